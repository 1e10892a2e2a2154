#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "ltlreplan/tree.hpp"

namespace ltlreplan {

const char* to_string(Partition p) {
    switch (p) {
        case Partition::Past: return "past";
        case Partition::Future: return "future";
        case Partition::Isolated: return "isolated";
    }
    return "?";
}

PlanGraph::PlanGraph(TreeParams params) : params_(params) {
    if (params_.eta <= 0.0 || params_.cell_size <= 0.0) throw std::invalid_argument("tree parameters must be positive");
}

NodeId PlanGraph::reset(const Point& x, State q) {
    nodes_.clear();
    records_.clear();
    record_alive_.clear();
    grid_.clear();
    forward_.clear();
    traces_.clear();
    tree_count_ = isolated_count_ = live_records_ = 0;
    aux_ = kNoNode;
    root_ = new_node(x, q, record_at(x, true));
    Node& r = nodes_[root_];
    r.partition = Partition::Past;
    r.cost = 0.0;
    --isolated_count_;
    ++tree_count_;
    reset_rewire_queue();
    return root_;
}

// ---------------------------------------------------------------------------
// bookkeeping

std::pair<long, long> PlanGraph::cell_of(const Point& x) const {
    return {static_cast<long>(std::floor(x.x() / params_.cell_size)),
            static_cast<long>(std::floor(x.y() / params_.cell_size))};
}

long long PlanGraph::cell_key(long ix, long iy) const {
    return (static_cast<long long>(ix) << 32) ^ static_cast<long long>(static_cast<std::uint32_t>(iy));
}

int PlanGraph::record_at(const Point& x, bool create) {
    const auto [ix, iy] = cell_of(x);
    auto it = grid_.find(cell_key(ix, iy));
    if (it != grid_.end())
        for (int r : it->second)
            if (records_[r].x == x) return r;
    if (!create) return -1;
    const int id = static_cast<int>(records_.size());
    records_.push_back(RecordSet{id, x, {}});
    record_alive_.push_back(true);
    grid_[cell_key(ix, iy)].push_back(id);
    ++live_records_;
    return id;
}

NodeId PlanGraph::new_node(const Point& x, State q, int record) {
    const NodeId id = static_cast<NodeId>(nodes_.size());
    Node n;
    n.id = id;
    n.q = q;
    n.x = x;
    n.record = record;
    nodes_.push_back(std::move(n));
    traces_.emplace_back();
    records_[record].members.push_back(id);
    ++isolated_count_;
    return id;
}

void PlanGraph::attach(NodeId parent, NodeId child, double length) {
    Node& c = nodes_[child];
    c.parent = parent;
    c.length = length;
    c.blocked = false;
    nodes_[parent].children.push_back(child);
    traces_[child].valid = false;
}

void PlanGraph::detach(NodeId child) {
    Node& c = nodes_[child];
    if (c.parent == kNoNode) return;
    auto& siblings = nodes_[c.parent].children;
    siblings.erase(std::remove(siblings.begin(), siblings.end(), child), siblings.end());
    c.parent = kNoNode;
    traces_[child].valid = false;
}

void PlanGraph::remove_node(NodeId id) {
    Node& n = nodes_[id];
    if (!n.alive) return;
    detach(id);
    for (NodeId c : n.children) nodes_[c].parent = kNoNode;
    n.children.clear();
    if (n.partition == Partition::Isolated) --isolated_count_;
    else --tree_count_;
    auto& members = records_[n.record].members;
    members.erase(std::remove(members.begin(), members.end(), id), members.end());
    if (members.empty() && record_alive_[n.record]) {
        record_alive_[n.record] = false;
        --live_records_;
        const auto [ix, iy] = cell_of(records_[n.record].x);
        auto& cell = grid_[cell_key(ix, iy)];
        cell.erase(std::remove(cell.begin(), cell.end(), n.record), cell.end());
    }
    n.alive = false;
    if (id == aux_) aux_ = kNoNode;
}

void PlanGraph::collect_subtree(NodeId start, std::vector<NodeId>& out) const {
    std::vector<NodeId> stack{start};
    while (!stack.empty()) {
        const NodeId n = stack.back();
        stack.pop_back();
        out.push_back(n);
        const auto& ch = nodes_[n].children;
        for (auto it = ch.rbegin(); it != ch.rend(); ++it) stack.push_back(*it);
    }
}

void PlanGraph::set_partition_subtree(NodeId start, Partition p) {
    std::vector<NodeId> sub;
    collect_subtree(start, sub);
    for (NodeId n : sub) {
        Node& node = nodes_[n];
        if (node.partition == Partition::Isolated && p != Partition::Isolated) {
            --isolated_count_;
            ++tree_count_;
        } else if (node.partition != Partition::Isolated && p == Partition::Isolated) {
            ++isolated_count_;
            --tree_count_;
        }
        node.partition = p;
    }
}

void PlanGraph::recompute_subtree(NodeId start) {
    Node& s = nodes_[start];
    if (start == root_ || start == aux_) s.cost = 0.0;
    else if (s.parent != kNoNode) s.cost = nodes_[s.parent].cost + s.edge_weight();
    std::vector<NodeId> stack{start};
    while (!stack.empty()) {
        const NodeId n = stack.back();
        stack.pop_back();
        for (NodeId c : nodes_[n].children) {
            Node& child = nodes_[c];
            child.cost = c == aux_ ? 0.0 : nodes_[n].cost + child.edge_weight();
            stack.push_back(c);
        }
    }
}

void PlanGraph::recompute_costs() {
    if (root_ != kNoNode) recompute_subtree(root_);
}

void PlanGraph::retag_partitions() {
    if (root_ == kNoNode) return;
    std::vector<NodeId> stack{root_};
    while (!stack.empty()) {
        const NodeId n = stack.back();
        stack.pop_back();
        nodes_[n].partition = Partition::Past;
        for (NodeId c : nodes_[n].children)
            if (c != aux_) stack.push_back(c);
    }
    if (aux_ != kNoNode) {
        std::vector<NodeId> sub;
        collect_subtree(aux_, sub);
        for (NodeId n : sub) nodes_[n].partition = Partition::Future;
    }
}

NodeId PlanGraph::resolve(NodeId id) const {
    for (std::size_t guard = 0; guard <= nodes_.size(); ++guard) {
        if (alive(id)) return id;
        auto it = forward_.find(id);
        if (it == forward_.end()) return kNoNode;
        id = it->second;
    }
    return kNoNode;
}

// ---------------------------------------------------------------------------
// queries

double PlanGraph::current_edge_weight() const { return aux_ == kNoNode ? 0.0 : nodes_[aux_].edge_weight(); }

double PlanGraph::root_cost(NodeId id) const {
    const Node& n = nodes_.at(id);
    switch (n.partition) {
        case Partition::Past: return n.cost;
        case Partition::Future: return n.cost + current_edge_weight();
        case Partition::Isolated: return kInf;
    }
    return kInf;
}

std::vector<NodeId> PlanGraph::path_to(NodeId id) const {
    std::vector<NodeId> path;
    if (!in_tree(id)) return path;
    for (NodeId n = id; n != kNoNode; n = nodes_[n].parent) {
        path.push_back(n);
        if (path.size() > nodes_.size()) throw std::logic_error("cycle in tree");
    }
    std::reverse(path.begin(), path.end());
    return path;
}

bool PlanGraph::is_ancestor(NodeId ancestor, NodeId id) const {
    std::size_t guard = 0;
    for (NodeId n = nodes_.at(id).parent; n != kNoNode; n = nodes_[n].parent) {
        if (n == ancestor) return true;
        if (++guard > nodes_.size()) throw std::logic_error("cycle in tree");
    }
    return false;
}

std::vector<NodeId> PlanGraph::same_state_nodes(int record, State q, NodeId except) const {
    std::vector<NodeId> out;
    for (NodeId m : records_.at(record).members)
        if (m != except && nodes_[m].alive && nodes_[m].q == q) out.push_back(m);
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<NodeId> PlanGraph::same_state_nodes(NodeId id) const {
    const Node& n = nodes_.at(id);
    return same_state_nodes(n.record, n.q, id);
}

double PlanGraph::near_radius() const {
    // The formula degenerates to 0 on an empty tree; use the cap there.
    if (tree_count_ == 0) return params_.eta_max;
    const double n = static_cast<double>(tree_count_);
    return std::min(params_.gamma * std::sqrt(std::log(n + 1.0) / (n + 1.0)), params_.eta_max);
}

std::vector<int> PlanGraph::records_within(const Point& x, double radius) const {
    std::vector<int> out;
    const auto [lo_x, lo_y] = cell_of(x - Point(radius, radius));
    const auto [hi_x, hi_y] = cell_of(x + Point(radius, radius));
    for (long ix = lo_x; ix <= hi_x; ++ix)
        for (long iy = lo_y; iy <= hi_y; ++iy) {
            auto it = grid_.find(cell_key(ix, iy));
            if (it == grid_.end()) continue;
            for (int r : it->second)
                if ((records_[r].x - x).norm() <= radius) out.push_back(r);
        }
    std::sort(out.begin(), out.end());
    return out;
}

NodeId PlanGraph::nearest(const Point& x) const {
    if (tree_count_ == 0) throw std::logic_error("nearest on an empty tree");
    const auto [cx, cy] = cell_of(x);
    double best = kInf;
    NodeId best_id = kNoNode;
    auto consider_cell = [&](long ix, long iy) {
        auto it = grid_.find(cell_key(ix, iy));
        if (it == grid_.end()) return;
        for (int r : it->second) {
            NodeId member = kNoNode;
            for (NodeId m : records_[r].members)
                if (nodes_[m].partition != Partition::Isolated && (member == kNoNode || m < member)) member = m;
            if (member == kNoNode) continue;
            const double d = (records_[r].x - x).norm();
            if (d < best || (d == best && member < best_id)) {
                best = d;
                best_id = member;
            }
        }
    };
    // Expanding square rings; cells beyond ring k are at least k cells away.
    for (long k = 0;; ++k) {
        if (k == 0) consider_cell(cx, cy);
        for (long d = -k; d <= k && k > 0; ++d) {
            consider_cell(cx + d, cy - k);
            consider_cell(cx + d, cy + k);
            if (d != -k && d != k) {
                consider_cell(cx - k, cy + d);
                consider_cell(cx + k, cy + d);
            }
        }
        if (best_id != kNoNode && best <= static_cast<double>(k) * params_.cell_size) break;
        if (k > 1 && static_cast<double>(k - 1) * params_.cell_size > best) break;
        if (k > 100000) break;
    }
    if (best_id == kNoNode) throw std::logic_error("nearest found no tree node");
    return best_id;
}

std::vector<NodeId> PlanGraph::near_set(const Point& x) const {
    std::vector<NodeId> out;
    for (int r : records_within(x, near_radius()))
        for (NodeId m : records_[r].members)
            if (nodes_[m].alive) out.push_back(m);
    std::sort(out.begin(), out.end());
    return out;
}

const std::vector<LabelMask>& PlanGraph::edge_trace(NodeId id, const Workspace& ws) const {
    const Node& n = nodes_.at(id);
    if (n.parent == kNoNode) throw std::logic_error("edge_trace of a node without parent");
    TraceCache& cache = traces_[id];
    if (!cache.valid) {
        cache.masks = ws.edge_trace_masks(nodes_[n.parent].x, n.x, params_.edge_resolution);
        cache.valid = true;
    }
    return cache.masks;
}

bool PlanGraph::edge_valid(NodeId id, const Dfa& dfa, const Workspace& ws) const {
    const Node& n = nodes_.at(id);
    const auto end = dfa.run(nodes_[n.parent].q, edge_trace(id, ws));
    return end && *end == n.q;
}

double PlanGraph::inflation(const Obstacle& o) const {
    return params_.clearance + (o.kind == ObstacleKind::Dynamic ? params_.dynamic_margin : 0.0);
}

bool PlanGraph::segment_blocked(const Workspace& ws, const Point& a, const Point& b) const {
    if (!ws.bounds().contains(a) || !ws.bounds().contains(b)) return true;
    for (const auto& o : ws.obstacles()) {
        const Footprint f = o.footprint();
        const double margin = inflation(o);
        const double sd = segment_distance(f, a, b);
        if (sd >= margin) continue;
        const double da = distance(f, a);
        if (da < margin && sd >= da - 1e-12) continue;  // escaping: closest point is the start
        return true;
    }
    return false;
}

bool PlanGraph::point_free(const Workspace& ws, const Point& x) const {
    if (!ws.bounds().contains(x)) return false;
    for (const auto& o : ws.obstacles())
        if (distance(o.footprint(), x) < inflation(o)) return false;
    return true;
}

// ---------------------------------------------------------------------------
// growth

Point PlanGraph::sample_free(const Workspace& ws, std::mt19937_64& rng) const {
    std::uniform_real_distribution<double> ux(ws.bounds().min().x(), ws.bounds().max().x());
    std::uniform_real_distribution<double> uy(ws.bounds().min().y(), ws.bounds().max().y());
    for (int i = 0; i < params_.sample_attempts; ++i) {
        const double x = ux(rng);
        const double y = uy(rng);
        const Point p(x, y);
        if (point_free(ws, p)) return p;
    }
    throw CollisionError("free-space sampling budget exhausted");
}

Point PlanGraph::steer(const Point& from, const Point& to, double eta) {
    const Point d = to - from;
    const double len = d.norm();
    if (len == 0.0) throw std::invalid_argument("steer: zero-length direction");
    if (len <= eta) return to;
    return from + d * (eta / len);
}

bool PlanGraph::first_accepting(NodeId id, const Dfa& dfa) const {
    const Node& n = nodes_[id];
    if (!in_tree(id) || !dfa.is_accepting(n.q) || !std::isfinite(root_cost(id))) return false;
    return n.parent == kNoNode || !dfa.is_accepting(nodes_[n.parent].q);
}

namespace {

struct Candidate {
    int record;
    double length;
    bool forward_ok;   // record -> new point
    bool backward_ok;  // new point -> record
    std::vector<LabelMask> forward;
};

}  // namespace

ExtendReport PlanGraph::extend(const Dfa& dfa, const Workspace& ws, const Point& x_rand) {
    ExtendReport report;
    const NodeId near_id = nearest(x_rand);
    report.nearest = near_id;
    const Point from = nodes_[near_id].x;
    if (from == x_rand) return report;
    const Point x_new = steer(from, x_rand, params_.eta);
    if (!point_free(ws, x_new) || segment_blocked(ws, from, x_new)) return report;
    if (record_at(x_new, false) >= 0) return report;

    std::vector<int> recs = records_within(x_new, near_radius());
    if (std::find(recs.begin(), recs.end(), nodes_[near_id].record) == recs.end()) {
        recs.push_back(nodes_[near_id].record);
        std::sort(recs.begin(), recs.end());
    }

    std::vector<Candidate> cands;
    cands.reserve(recs.size());
    for (int r : recs) {
        const Point& xr = records_[r].x;
        Candidate c{r, (x_new - xr).norm(), !segment_blocked(ws, xr, x_new), !segment_blocked(ws, x_new, xr), {}};
        if (c.forward_ok || c.backward_ok) c.forward = ws.edge_trace_masks(xr, x_new, params_.edge_resolution);
        cands.push_back(std::move(c));
    }

    struct Choice {
        double cost = kInf;
        NodeId parent = kNoNode;
        std::size_t cand = 0;
    };
    std::vector<Choice> best(dfa.num_states());
    for (std::size_t ci = 0; ci < cands.size(); ++ci) {
        const Candidate& c = cands[ci];
        if (!c.forward_ok) continue;
        for (NodeId m : records_[c.record].members) {
            if (!in_tree(m)) continue;
            const double base = root_cost(m);
            if (!std::isfinite(base)) continue;
            const auto q = dfa.run(nodes_[m].q, c.forward);
            if (!q) continue;
            const double total = base + c.length;
            Choice& b = best[*q];
            if (total < b.cost || (total == b.cost && m < b.parent)) b = {total, m, ci};
        }
    }

    const int rec_new = record_at(x_new, true);
    for (State q = 0; q < dfa.num_states(); ++q) {
        if (dfa.is_bad(q)) continue;
        const NodeId id = new_node(x_new, q, rec_new);
        const Choice& b = best[q];
        if (b.parent == kNoNode) {
            report.isolated.push_back(id);
            continue;
        }
        attach(b.parent, id, cands[b.cand].length);
        nodes_[id].partition = nodes_[b.parent].partition;
        --isolated_count_;
        ++tree_count_;
        nodes_[id].cost = nodes_[b.parent].cost + cands[b.cand].length;
        traces_[id] = {cands[b.cand].forward, true};
        report.added.push_back(id);
    }

    std::vector<NodeId> adopted;
    for (NodeId id : report.added) {
        if (!in_tree(id)) continue;
        const State q = nodes_[id].q;
        const double base = root_cost(id);
        for (const Candidate& c : cands) {
            if (!c.backward_ok) continue;
            std::vector<LabelMask> backward(c.forward.rbegin(), c.forward.rend());
            const auto end = dfa.run(q, backward);
            if (!end) continue;
            const double total = base + c.length;
            for (NodeId s : std::vector<NodeId>(records_[c.record].members)) {
                if (!alive(s) || nodes_[s].q != *end || s == root_ || s == aux_) continue;
                const Node& sn = nodes_[s];
                if (sn.partition == Partition::Future && nodes_[id].partition == Partition::Past) continue;
                if (!(total < root_cost(s))) continue;
                if (sn.partition == Partition::Isolated) {
                    bool tree_dup = false;
                    for (NodeId d : same_state_nodes(s))
                        if (in_tree(d)) tree_dup = true;
                    if (tree_dup) {
                        remove_node(s);
                        continue;
                    }
                } else if (is_ancestor(s, id)) {
                    continue;
                }
                const bool was_isolated = sn.partition == Partition::Isolated;
                detach(s);
                attach(id, s, c.length);
                traces_[s] = {backward, true};
                if (was_isolated) {
                    --isolated_count_;
                    ++tree_count_;
                    nodes_[s].partition = nodes_[id].partition;
                } else if (nodes_[s].partition != nodes_[id].partition) {
                    set_partition_subtree(s, nodes_[id].partition);
                }
                recompute_subtree(s);
                if (first_accepting(s, dfa)) adopted.push_back(s);
            }
        }
    }

    for (NodeId id : report.added)
        if (first_accepting(id, dfa)) report.solutions.push_back(id);
    for (NodeId id : adopted)
        if (first_accepting(id, dfa) &&
            std::find(report.solutions.begin(), report.solutions.end(), id) == report.solutions.end())
            report.solutions.push_back(id);
    report.accepted = true;
    return report;
}

int PlanGraph::rewire(const Dfa& dfa, const Workspace& ws, NodeId s_new, std::vector<NodeId>* adopted_accepting) {
    if (!in_tree(s_new)) return 0;
    const double base = root_cost(s_new);
    if (!std::isfinite(base)) return 0;
    const Point x = nodes_[s_new].x;
    const State q = nodes_[s_new].q;
    const Partition part = nodes_[s_new].partition;
    int count = 0;
    for (int r : records_within(x, near_radius())) {
        if (r == nodes_[s_new].record || !record_alive_[r]) continue;
        const Point xr = records_[r].x;
        const double length = (xr - x).norm();
        const double total = base + length;
        // Cheap pre-filter before tracing the segment.
        bool any = false;
        for (NodeId s : records_[r].members)
            if (nodes_[s].alive && s != root_ && s != aux_ && total < root_cost(s) &&
                !(nodes_[s].partition == Partition::Future && part == Partition::Past))
                any = true;
        if (!any || segment_blocked(ws, x, xr)) continue;
        const auto trace = ws.edge_trace_masks(x, xr, params_.edge_resolution);
        const auto end = dfa.run(q, trace);
        if (!end) continue;
        for (NodeId s : std::vector<NodeId>(records_[r].members)) {
            if (!alive(s) || nodes_[s].q != *end || s == root_ || s == aux_) continue;
            if (nodes_[s].partition == Partition::Future && part == Partition::Past) continue;
            if (!(total < root_cost(s))) continue;
            const bool was_isolated = nodes_[s].partition == Partition::Isolated;
            if (was_isolated) {
                bool tree_dup = false;
                for (NodeId d : same_state_nodes(s))
                    if (in_tree(d)) tree_dup = true;
                if (tree_dup) {
                    remove_node(s);
                    continue;
                }
            } else if (is_ancestor(s, s_new)) {
                continue;
            }
            detach(s);
            attach(s_new, s, length);
            traces_[s] = {trace, true};
            if (was_isolated) {
                --isolated_count_;
                ++tree_count_;
                nodes_[s].partition = part;
            } else if (nodes_[s].partition != part) {
                set_partition_subtree(s, part);
            }
            recompute_subtree(s);
            ++count;
            if (adopted_accepting && first_accepting(s, dfa)) adopted_accepting->push_back(s);
        }
    }
    return count;
}

void PlanGraph::reset_rewire_queue() {
    rewire_queue_.clear();
}

int PlanGraph::rewire_from_root(const Dfa& dfa, const Workspace& ws, int budget,
                                std::vector<NodeId>* adopted_accepting) {
    if (root_ == kNoNode) return 0;
    if (rewire_queue_.empty()) {
        rewire_queue_.push_back(root_);
    }
    int count = 0;
    for (int i = 0; i < budget && !rewire_queue_.empty(); ++i) {
        const NodeId n = rewire_queue_.front();
        rewire_queue_.pop_front();
        if (!alive(n) || nodes_[n].partition != Partition::Past) continue;
        count += rewire(dfa, ws, n, adopted_accepting);
        for (NodeId c : nodes_[n].children)
            if (c != aux_ && nodes_[c].partition == Partition::Past) rewire_queue_.push_back(c);
    }
    return count;
}

// ---------------------------------------------------------------------------
// repair

bool PlanGraph::propagate_state(NodeId parent, NodeId child, const Dfa& dfa, const Workspace& ws) {
    Node& c = nodes_.at(child);
    if (c.parent != parent) throw std::logic_error("propagate_state: not a parent-child pair");
    const auto end = dfa.run(nodes_[parent].q, edge_trace(child, ws));
    if (end && *end == c.q) return true;
    if (!end) return false;
    if (same_state_nodes(c.record, c.q, child).empty()) add_isolated_unchecked(c.x, c.q);
    nodes_[child].q = *end;
    return true;
}

void PlanGraph::demote_subtree(NodeId start) {
    std::vector<NodeId> sub;
    collect_subtree(start, sub);
    detach(start);
    for (NodeId n : sub) {
        Node& node = nodes_[n];
        node.parent = kNoNode;
        node.children.clear();
        node.blocked = false;
        node.cost = kInf;
        traces_[n].valid = false;
        if (node.partition != Partition::Isolated) {
            --tree_count_;
            ++isolated_count_;
        }
        node.partition = Partition::Isolated;
        if (n == aux_) aux_ = kNoNode;
    }
    for (NodeId n : sub)
        if (!same_state_nodes(n).empty()) remove_node(n);
}

int PlanGraph::propagate_from(NodeId start, const Dfa& dfa, const Workspace& ws, bool past_only) {
    int demoted = 0;
    std::vector<NodeId> stack{start};
    while (!stack.empty()) {
        const NodeId n = stack.back();
        stack.pop_back();
        if (!in_tree(n)) continue;
        const std::vector<NodeId> children = nodes_[n].children;
        for (auto it = children.rbegin(); it != children.rend(); ++it) {
            const NodeId c = *it;
            if (past_only && c == aux_) continue;
            if (propagate_state(n, c, dfa, ws)) {
                stack.push_back(c);
            } else {
                std::vector<NodeId> sub;
                collect_subtree(c, sub);
                demoted += static_cast<int>(sub.size());
                demote_subtree(c);
            }
        }
    }
    return demoted;
}

bool PlanGraph::merge_node(NodeId m) {
    if (!in_tree(m)) return false;
    std::vector<NodeId> tree_dups;
    for (NodeId d : same_state_nodes(m)) {
        if (nodes_[d].partition == Partition::Isolated) remove_node(d);
        else if (nodes_[d].partition == nodes_[m].partition) tree_dups.push_back(d);
    }
    if (tree_dups.empty()) return false;
    const NodeId d = tree_dups.front();

    NodeId better = m;
    NodeId worse = d;
    if (nodes_[d].parent == m) {
        better = m;
        worse = d;
    } else if (nodes_[m].parent == d || root_cost(d) <= root_cost(m)) {
        better = d;
        worse = m;
    }
    if (worse == root_ || worse == aux_ || is_ancestor(worse, better)) std::swap(better, worse);

    nodes_[better].visited = true;
    nodes_[worse].visited = true;
    const std::vector<NodeId> moved = nodes_[worse].children;
    for (NodeId c : moved) {
        nodes_[c].parent = better;
        nodes_[better].children.push_back(c);
    }
    nodes_[worse].children.clear();
    remove_node(worse);
    forward_[worse] = better;
    recompute_subtree(better);
    return true;
}

int PlanGraph::dedup_pass(NodeId start, bool past_only) {
    if (!in_tree(start)) return 0;
    std::vector<NodeId> sub;
    collect_subtree(start, sub);
    for (NodeId n : sub) nodes_[n].visited = false;
    std::vector<bool> expanded(nodes_.size(), false);
    int merges = 0;
    std::vector<NodeId> stack{start};
    while (!stack.empty()) {
        NodeId m = stack.back();
        stack.pop_back();
        if (!in_tree(m)) continue;
        while (merge_node(m)) {
            ++merges;
            m = resolve(m);
            if (m == kNoNode) break;
        }
        if (m == kNoNode || !in_tree(m)) continue;
        nodes_[m].visited = true;
        expanded[m] = true;
        const auto& ch = nodes_[m].children;
        for (auto it = ch.rbegin(); it != ch.rend(); ++it)
            if (!expanded[*it] && !(past_only && *it == aux_)) stack.push_back(*it);
    }
    return merges;
}

void PlanGraph::set_current_edge(std::optional<NodeId> target) {
    if (target) {
        if (!in_tree(*target) || nodes_[*target].parent != root_)
            throw std::logic_error("current edge target must be a child of the root");
        aux_ = *target;
    } else {
        aux_ = kNoNode;
    }
    retag_partitions();
    recompute_costs();
    reset_rewire_queue();
}

void PlanGraph::advance_root(const Dfa& dfa, const Workspace& ws, std::optional<NodeId> next_target,
                             std::optional<State> root_q) {
    if (aux_ == kNoNode) throw std::logic_error("advance_root without a current edge");
    const NodeId old_root = root_;
    const NodeId new_root = aux_;
    const double length = nodes_[new_root].length;
    detach(new_root);
    attach(new_root, old_root, length);
    nodes_[old_root].blocked = segment_blocked(ws, nodes_[new_root].x, nodes_[old_root].x);
    root_ = new_root;
    aux_ = kNoNode;
    nodes_[new_root].cost = 0.0;
    if (root_q) nodes_[new_root].q = *root_q;

    if (next_target) {
        if (!in_tree(*next_target) || nodes_[*next_target].parent != root_)
            throw std::logic_error("next target must be a child of the new root");
        aux_ = *next_target;
    }
    retag_partitions();
    propagate_from(root_, dfa, ws, true);
    dedup_pass(root_, true);
    recompute_costs();
    reset_rewire_queue();
}

NodeId PlanGraph::reseat_root(const Dfa& dfa, const Workspace& ws, const Point& x, State q) {
    const NodeId r = root_;
    if ((x - nodes_[r].x).norm() < 1e-9) {
        aux_ = kNoNode;
        nodes_[r].q = q;
        retag_partitions();
        propagate_from(root_, dfa, ws, false);
        dedup_pass(root_);
        recompute_costs();
        reset_rewire_queue();
        return root_;
    }
    const int rec = record_at(x, true);
    const NodeId s = new_node(x, q, rec);
    attach(r, s, (x - nodes_[r].x).norm());
    nodes_[s].partition = Partition::Past;
    --isolated_count_;
    ++tree_count_;
    if (aux_ != kNoNode) {
        const NodeId a = aux_;
        detach(a);
        attach(s, a, (nodes_[a].x - x).norm());
        nodes_[a].blocked = segment_blocked(ws, x, nodes_[a].x);
    }
    aux_ = s;
    advance_root(dfa, ws, std::nullopt, q);
    return resolve(s);
}

int PlanGraph::block_obstacle_edges(const Workspace& ws) {
    int newly = 0;
    bool changed = false;
    for (Node& n : nodes_) {
        if (!n.alive || n.parent == kNoNode) continue;
        const bool b = segment_blocked(ws, nodes_[n.parent].x, n.x);
        if (b == n.blocked) continue;
        changed = true;
        if (b) ++newly;
        n.blocked = b;
    }
    if (changed) recompute_costs();
    return newly;
}

void PlanGraph::invalidate_traces(const Box& changed) {
    for (const Node& n : nodes_) {
        if (!n.alive || n.parent == kNoNode || !traces_[n.id].valid) continue;
        const Point& a = nodes_[n.parent].x;
        const Box seg(a.cwiseMin(n.x), a.cwiseMax(n.x));
        if (seg.intersects(changed)) traces_[n.id].valid = false;
    }
}

void PlanGraph::invalidate_all_traces() {
    for (auto& t : traces_) t.valid = false;
}

std::string PlanGraph::dump() const {
    std::ostringstream out;
    out.precision(6);
    for (const Node& n : nodes_) {
        if (!n.alive) continue;
        out << "node " << n.id << " q=" << n.q << " x=" << n.x.x() << "," << n.x.y() << " cost=" << n.cost
            << " part=" << to_string(n.partition) << " parent=" << n.parent;
        if (n.id == root_) out << " root";
        if (n.id == aux_) out << " aux";
        out << "\n";
    }
    for (const Node& n : nodes_)
        if (n.alive && n.parent != kNoNode) out << "edge " << n.parent << " " << n.id << " w=" << n.edge_weight() << "\n";
    return out.str();
}

NodeId PlanGraph::add_child_unchecked(NodeId parent, const Point& x, State q) {
    if (!in_tree(parent)) throw std::logic_error("parent not in tree");
    const NodeId id = new_node(x, q, record_at(x, true));
    attach(parent, id, (x - nodes_[parent].x).norm());
    nodes_[id].partition = nodes_[parent].partition;
    --isolated_count_;
    ++tree_count_;
    recompute_subtree(id);
    return id;
}

NodeId PlanGraph::add_isolated_unchecked(const Point& x, State q) { return new_node(x, q, record_at(x, true)); }

}  // namespace ltlreplan
