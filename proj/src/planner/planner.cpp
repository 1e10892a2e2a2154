#include "ltlreplan/planner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace ltlreplan {

const char* to_string(Mode m) {
    switch (m) {
        case Mode::Planning: return "planning";
        case Mode::Executing: return "executing";
        case Mode::Stopped: return "stopped";
        case Mode::Done: return "done";
    }
    return "?";
}

const char* to_string(Infeasibility r) {
    switch (r) {
        case Infeasibility::None: return "none";
        case Infeasibility::BlockedEdge: return "blocked edge";
        case Infeasibility::BrokenTransition: return "broken transition";
    }
    return "?";
}

const char* to_string(AddResult r) {
    switch (r) {
        case AddResult::Added: return "added";
        case AddResult::Replaced: return "replaced";
        case AddResult::Ignored: return "ignored";
    }
    return "?";
}

// ---------------------------------------------------------------------------
// homotopy signature

std::vector<int> h_signature(const std::vector<Point>& waypoints, const Workspace& ws) {
    if (waypoints.size() < 2) throw std::invalid_argument("h_signature needs at least two waypoints");
    std::vector<Point> anchors;
    for (const auto& o : ws.obstacles()) anchors.push_back(center_of(o.footprint()));
    for (const auto& r : ws.regions()) anchors.push_back(r.rect.center());
    for (Point& a : anchors)
        for (const Point& w : waypoints)
            if (w.x() == a.x() && w.y() >= a.y()) {
                a.x() += 1e-6;
                break;
            }

    std::vector<int> word;
    std::vector<std::pair<double, int>> hits;
    for (std::size_t i = 1; i < waypoints.size(); ++i) {
        const Point& p = waypoints[i - 1];
        const Point& q = waypoints[i];
        hits.clear();
        for (std::size_t k = 0; k < anchors.size(); ++k) {
            const Point& a = anchors[k];
            const bool p_left = p.x() < a.x();
            if (p_left == (q.x() < a.x())) continue;
            const double t = (a.x() - p.x()) / (q.x() - p.x());
            if (p.y() + t * (q.y() - p.y()) < a.y()) continue;
            const int letter = static_cast<int>(k) + 1;
            hits.emplace_back(t, p_left ? letter : -letter);
        }
        std::sort(hits.begin(), hits.end());
        for (const auto& [t, letter] : hits) {
            if (!word.empty() && word.back() == -letter) word.pop_back();
            else word.push_back(letter);
        }
    }
    return word;
}

// ---------------------------------------------------------------------------
// library

namespace {

bool same_key(const Solution& a, const Solution& b) { return a.trace == b.trace && a.signature == b.signature; }

bool cheaper(const Solution& a, const Solution& b) { return a.cost < b.cost || (a.cost == b.cost && a.id < b.id); }

}  // namespace

AddResult SolutionLibrary::try_add(Solution sol) {
    for (Solution& m : members_) {
        if (!same_key(m, sol)) continue;
        if (!(sol.cost < m.cost)) return AddResult::Ignored;
        sol.id = m.id;
        m = std::move(sol);
        return AddResult::Replaced;
    }
    sol.id = next_id_++;
    members_.push_back(std::move(sol));
    if (members_.size() > capacity_) {
        auto worst = std::max_element(members_.begin(), members_.end(),
                                      [](const Solution& a, const Solution& b) { return cheaper(a, b); });
        const bool evicted_new = worst->id == members_.back().id;
        members_.erase(worst);
        if (evicted_new) return AddResult::Ignored;
    }
    return AddResult::Added;
}

const Solution* SolutionLibrary::find(int id) const {
    for (const auto& m : members_)
        if (m.id == id) return &m;
    return nullptr;
}

Solution* SolutionLibrary::find(int id) {
    for (auto& m : members_)
        if (m.id == id) return &m;
    return nullptr;
}

const Solution* SolutionLibrary::best() const {
    const Solution* out = nullptr;
    for (const auto& m : members_)
        if (m.feasible && (!out || cheaper(m, *out))) out = &m;
    return out;
}

void SolutionLibrary::dedup() {
    for (std::size_t i = 0; i < members_.size(); ++i)
        for (std::size_t j = i + 1; j < members_.size();) {
            if (!same_key(members_[i], members_[j])) {
                ++j;
                continue;
            }
            if (cheaper(members_[j], members_[i])) std::swap(members_[i], members_[j]);
            members_.erase(members_.begin() + static_cast<std::ptrdiff_t>(j));
        }
}

void SolutionLibrary::erase(int id) {
    members_.erase(std::remove_if(members_.begin(), members_.end(), [&](const Solution& m) { return m.id == id; }),
                   members_.end());
}

// ---------------------------------------------------------------------------
// validation

Validation validate_path(const std::vector<Point>& waypoints, State q_start, const Dfa& dfa, const Workspace& ws,
                         const PlanGraph& rules) {
    Validation v;
    if (waypoints.empty() || dfa.is_bad(q_start)) {
        v.reason = Infeasibility::BrokenTransition;
        return v;
    }
    double cost = 0.0;
    for (std::size_t i = 1; i < waypoints.size(); ++i) {
        if (rules.segment_blocked(ws, waypoints[i - 1], waypoints[i])) {
            v.reason = Infeasibility::BlockedEdge;
            return v;
        }
        cost += (waypoints[i] - waypoints[i - 1]).norm();
    }
    std::optional<State> q = dfa.step(q_start, ws.mask_at(waypoints.front()));
    for (std::size_t i = 1; q && i < waypoints.size(); ++i)
        q = dfa.run(*q, ws.edge_trace_masks(waypoints[i - 1], waypoints[i], rules.params().edge_resolution));
    if (!q || !dfa.is_accepting(*q)) {
        v.reason = Infeasibility::BrokenTransition;
        return v;
    }
    v.feasible = true;
    v.cost = cost;
    return v;
}

void validate_solution(Solution& sol, const PlanGraph& g, const Dfa& dfa, const Workspace& ws) {
    if (sol.path.empty() || !g.alive(sol.path.front())) {
        sol.feasible = false;
        sol.reason = Infeasibility::BrokenTransition;
        sol.cost = kInf;
        return;
    }
    const Validation v = validate_path(sol.waypoints, g.node(sol.path.front()).q, dfa, ws, g);
    sol.feasible = v.feasible;
    sol.reason = v.reason;
    sol.cost = v.cost;
}

std::string Event::line() const {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", t);
    return std::string("t=") + buf + " kind=" + kind + " detail=" + detail;
}

// ---------------------------------------------------------------------------
// shared loop

PlannerBase::PlannerBase(Dfa dfa, Workspace prior, Point start, PlannerConfig config, std::uint64_t seed)
    : dfa_(std::move(dfa)), kb_(std::move(prior)), config_(config), x_(start), rng_(seed) {
    kb_.belief().bind_alphabet(dfa_.alphabet());
    if (!kb_.belief().bounds().contains(start)) throw std::invalid_argument("start outside the workspace");
    q_ = dfa_.delta(dfa_.initial(), kb_.belief().mask_at(start));
    if (dfa_.is_bad(q_)) throw std::invalid_argument("start label already violates the task");
    if (dfa_.is_accepting(q_)) mode_ = Mode::Done;
}

void PlannerBase::emit(const std::string& kind, const std::string& detail) {
    Event e{time_, kind, detail};
    log_.push_back(e);
    tick_events_.push_back(std::move(e));
}

std::vector<Event> PlannerBase::tick(double dt, const Workspace& truth) {
    tick_events_.clear();
    if (executed_.empty()) executed_.push_back(truth.label_of(x_));
    if (mode_ == Mode::Done) return {};
    tick_started_ = std::chrono::steady_clock::now();

    KnowledgeDelta delta;
    std::vector<Knowledge> incoming = std::move(external_);
    external_.clear();
    for (auto& k : sense(truth, x_, config_.sense_size)) incoming.push_back(std::move(k));
    for (const auto& k : incoming) {
        if (!kb_.apply(k)) continue;
        if (const auto* r = std::get_if<RegionKnowledge>(&k)) delta.regions.push_back(r->region);
        else delta.obstacles.push_back(std::get<ObstacleKnowledge>(k).id);
    }
    if (!delta.empty()) {
        const auto start = std::chrono::steady_clock::now();
        const bool invalidated = handle_knowledge(delta);
        if (invalidated && !pending_) pending_ = {time_, start};
        if (pending_ && mode_ == Mode::Executing) finish_replan();
    }

    plan(config_.budget_per_tick);
    if (mode_ == Mode::Planning || mode_ == Mode::Stopped) {
        const bool was_stopped = mode_ == Mode::Stopped;
        if (try_install()) {
            mode_ = Mode::Executing;
            if (pending_) finish_replan();
            if (was_stopped) emit("resume", "feasible solution installed");
        }
    }
    if (mode_ == Mode::Executing) move(config_.v_max * dt, truth);
    time_ += dt;
    return tick_events_;
}

void PlannerBase::finish_replan() {
    // The control loop runs in real time: every tick spent waiting costs one period.
    const auto now = std::chrono::steady_clock::now();
    const bool same_tick = time_ == pending_->first;
    const double secs = same_tick ? std::chrono::duration<double>(now - pending_->second).count()
                                  : (time_ - pending_->first) + std::chrono::duration<double>(now - tick_started_).count();
    replans_.push_back({pending_->first, secs});
    pending_.reset();
}

void PlannerBase::move(double distance, const Workspace& truth) {
    double remaining = distance;
    for (int guard = 0; guard < 100000 && remaining > 1e-12 && mode_ == Mode::Executing; ++guard) {
        const auto target = current_target();
        if (!target) break;
        const double d = (*target - x_).norm();
        if (d <= remaining) {
            advance_to(*target, truth);
            remaining -= d;
            if (mode_ != Mode::Executing) break;
            on_arrival();
        } else {
            advance_to(x_ + (*target - x_) * (remaining / d), truth);
            remaining = 0.0;
        }
    }
}

void PlannerBase::advance_to(const Point& p, const Workspace& truth) {
    const Workspace& ws = kb_.belief();
    q_ = dfa_.run_unpruned(q_, ws.edge_trace_masks(x_, p, config_.tree.edge_resolution));
    for (auto& labels : truth.edge_trace(x_, p, config_.tree.edge_resolution))
        if (executed_.back() != labels) executed_.push_back(std::move(labels));
    travel_ += (p - x_).norm();
    x_ = p;
    if (dfa_.is_accepting(q_)) {
        mode_ = Mode::Done;
        emit("done", "task satisfied");
    } else if (dfa_.is_bad(q_)) {
        mode_ = Mode::Done;
        emit("done", "task violated");
    }
}

// ---------------------------------------------------------------------------
// dual-root planner

Planner::Planner(Dfa dfa, Workspace prior, Point start, PlannerConfig config, std::uint64_t seed)
    : PlannerBase(std::move(dfa), std::move(prior), start, config, seed),
      graph_(config.tree),
      library_(config.library_capacity) {
    graph_.reset(x_, q_);
}

Solution Planner::make_solution(NodeId terminal) const {
    const Workspace& ws = kb_.belief();
    Solution s;
    s.terminal = terminal;
    s.path = graph_.path_to(terminal);
    for (NodeId n : s.path) s.waypoints.push_back(graph_.node(n).x);
    s.trace.push_back(ws.mask_at(s.waypoints.front()));
    for (std::size_t i = 1; i < s.path.size(); ++i)
        for (LabelMask m : graph_.edge_trace(s.path[i], ws))
            if (m != s.trace.back()) s.trace.push_back(m);
    s.signature = s.waypoints.size() >= 2 ? h_signature(s.waypoints, ws) : std::vector<int>{};
    s.cost = graph_.root_cost(terminal);
    if (!std::isfinite(s.cost)) s.reason = Infeasibility::BlockedEdge;
    else if (!dfa_.is_accepting(graph_.node(terminal).q)) s.reason = Infeasibility::BrokenTransition;
    s.feasible = s.reason == Infeasibility::None;
    return s;
}

int Planner::offer(NodeId terminal) {
    terminal = graph_.resolve(terminal);
    if (!graph_.in_tree(terminal)) return 0;
    Solution s = make_solution(terminal);
    if (!s.feasible) return 0;
    return library_.try_add(std::move(s)) == AddResult::Ignored ? 0 : 1;
}

void Planner::refresh_library() {
    auto& members = library_.members();
    for (std::size_t i = 0; i < members.size();) {
        const NodeId t = graph_.resolve(members[i].terminal);
        if (t == kNoNode) {
            members.erase(members.begin() + static_cast<std::ptrdiff_t>(i));
            continue;
        }
        if (!graph_.in_tree(t)) {
            members[i].terminal = t;
            members[i].feasible = false;
            members[i].reason = Infeasibility::BrokenTransition;
            members[i].cost = kInf;
        } else {
            Solution s = make_solution(t);
            s.id = members[i].id;
            members[i] = std::move(s);
        }
        ++i;
    }
    library_.dedup();
}

bool Planner::at_root() const { return (x_ - graph_.node(graph_.root()).x).norm() < 1e-9; }

double Planner::remaining_cost(const Solution& sol) const {
    if (!sol.feasible) return kInf;
    const double traveled = (x_ - graph_.node(graph_.root()).x).norm();
    const auto aux = graph_.aux();
    if (aux && sol.path.size() >= 2 && sol.path[1] == *aux) return sol.cost - traveled;
    return sol.cost + traveled;
}

const Solution* Planner::select_best() const {
    const Solution* best = nullptr;
    double best_cost = kInf;
    for (const auto& m : library_.members()) {
        if (!m.feasible || m.path.size() < 2) continue;
        const double c = remaining_cost(m);
        if (c < best_cost || (c == best_cost && best && m.id < best->id)) {
            best = &m;
            best_cost = c;
        }
    }
    return best;
}

bool Planner::install(int id) {
    for (int attempt = 0; attempt < 2; ++attempt) {
        const Solution* s = library_.find(id);
        if (!s || !s->feasible || s->path.size() < 2) return false;
        const auto aux = graph_.aux();
        if (aux && s->path[1] == *aux) {
            current_ = id;
            return true;
        }
        if (at_root()) {
            graph_.set_current_edge(s->path[1]);
            refresh_library();
            current_ = id;
            return true;
        }
        graph_.reseat_root(dfa_, kb_.belief(), x_, q_);
        refresh_library();
    }
    return false;
}

void Planner::stop() {
    if (!at_root() || graph_.aux()) graph_.reseat_root(dfa_, kb_.belief(), x_, q_);
    refresh_library();
    current_ = -1;
    set_mode(Mode::Stopped);
    emit("stop", "no feasible solution");
}

bool Planner::try_install() {
    const Solution* best = select_best();
    if (!best) return false;
    const int id = best->id;
    if (!install(id)) return false;
    emit("switch", "solution " + std::to_string(id));
    return true;
}

std::optional<Point> Planner::current_target() const {
    const auto aux = graph_.aux();
    if (!aux) return std::nullopt;
    return graph_.node(*aux).x;
}

std::vector<Point> Planner::current_path() const {
    const Solution* s = current();
    if (!s || mode() != Mode::Executing) return {};
    std::vector<Point> out{x_};
    out.insert(out.end(), s->waypoints.begin() + 1, s->waypoints.end());
    return out;
}

int Planner::improve_step(int iterations) {
    if (mode() == Mode::Done) return 0;
    const Workspace& ws = kb_.belief();
    int changed = 0;
    std::vector<NodeId> adopted;
    // Without a feasible solution the tree keeps sampling up to twice the cap: at full size
    // the near radius is too small for rewiring alone to route around a fresh obstacle.
    const std::size_t cap = mode() == Mode::Executing ? config_.max_tree_nodes : 2 * config_.max_tree_nodes;
    for (int i = 0; i < iterations; ++i) {
        if (graph_.tree_size() >= cap) {
            std::uniform_int_distribution<std::size_t> pick(0, graph_.node_slots() - 1);
            const NodeId n = static_cast<NodeId>(pick(rng()));
            if (graph_.in_tree(n)) graph_.rewire(dfa_, ws, n, &adopted);
            continue;
        }
        Point x;
        try {
            x = graph_.sample_free(ws, rng());
        } catch (const CollisionError&) {
            break;
        }
        for (NodeId s : graph_.extend(dfa_, ws, x).solutions) changed += offer(s);
    }
    if (iterations > 0) graph_.rewire_from_root(dfa_, ws, config_.rewire_budget, &adopted);
    for (NodeId s : adopted) changed += offer(s);
    if (iterations > 0) {
        refresh_library();
        if (mode() == Mode::Executing) maybe_switch();
    }
    return changed;
}

void Planner::maybe_switch() {
    const auto aux = graph_.aux();
    const Solution* cur = current();
    if (!cur || !cur->feasible || !aux || cur->path.size() < 2 || cur->path[1] != *aux) {
        const Solution* best = select_best();
        if (best && install(best->id)) emit("switch", "solution " + std::to_string(current_));
        else stop();
        return;
    }
    const Solution* best = select_best();
    if (best && best->id != current_ && best->path[1] == *aux && remaining_cost(*best) < remaining_cost(*cur) - 1e-9) {
        current_ = best->id;
        emit("switch", "solution " + std::to_string(current_) + " cheaper");
    }
}

bool Planner::handle_knowledge(const KnowledgeDelta& delta) {
    Workspace& ws = kb_.belief();
    for (const auto& id : delta.regions) graph_.invalidate_traces(ws.find_region(id)->rect);
    if (!delta.obstacles.empty()) graph_.block_obstacle_edges(ws);

    Validation current_check;
    if (const Solution* cur = current(); cur && mode() == Mode::Executing) {
        std::vector<Point> rest{x_};
        rest.insert(rest.end(), cur->waypoints.begin() + 1, cur->waypoints.end());
        current_check = validate_path(rest, q_, dfa_, ws, graph_);
    }
    const bool current_ok = current_check.feasible;
    std::size_t feasible_before = 0;
    for (const auto& m : library_.members()) feasible_before += m.feasible;

    if (!delta.regions.empty()) graph_.reseat_root(dfa_, ws, x_, q_);
    refresh_library();

    if (mode() != Mode::Executing) return false;
    if (current_ok && install(current_)) return false;

    std::size_t feasible_after = 0;
    for (const auto& m : library_.members()) feasible_after += m.feasible;
    emit("replan", std::string(to_string(current_check.reason)) + ", " +
                       std::to_string(feasible_before - std::min(feasible_before, feasible_after)) +
                       " solutions invalidated");
    const Solution* best = select_best();
    if (best) {
        const int id = best->id;
        if (install(id)) {
            emit("switch", "solution " + std::to_string(id));
            return true;
        }
    }
    stop();
    return true;
}

void Planner::on_arrival() {
    const NodeId a = *graph_.aux();
    const Workspace& ws = kb_.belief();
    emit("arrive", "node " + std::to_string(a));
    if (graph_.node(a).q != q_) {
        graph_.advance_root(dfa_, ws, std::nullopt, q_);
        refresh_library();
        if (!try_install()) stop();
        return;
    }
    refresh_library();
    const Solution* best = select_best();
    if (best && best->path.size() > 2 && best->path[1] == a) {
        const int id = best->id;
        if (id != current_) emit("switch", "solution " + std::to_string(id));
        current_ = id;
        graph_.advance_root(dfa_, ws, best->path[2]);
        refresh_library();
        const Solution* cur = current();
        if (cur && cur->feasible && cur->path.size() >= 2 && graph_.aux() && cur->path[1] == *graph_.aux()) return;
    } else {
        graph_.advance_root(dfa_, ws);
        refresh_library();
    }
    if (!try_install()) stop();
}

// ---------------------------------------------------------------------------
// rebuild baseline

RebuildPlanner::RebuildPlanner(Dfa dfa, Workspace prior, Point start, PlannerConfig config, std::uint64_t seed)
    : PlannerBase(std::move(dfa), std::move(prior), start, config, seed), graph_(config.tree) {
    graph_.reset(x_, q_);
}

void RebuildPlanner::plan(int iterations) {
    if (mode() == Mode::Executing || mode() == Mode::Done) return;
    const Workspace& ws = kb_.belief();
    for (int i = 0; i < iterations; ++i) {
        if (graph_.tree_size() >= config_.max_tree_nodes) {
            std::uniform_int_distribution<std::size_t> pick(0, graph_.node_slots() - 1);
            const NodeId n = static_cast<NodeId>(pick(rng()));
            if (graph_.in_tree(n)) graph_.rewire(dfa_, ws, n, &terminals_);
            continue;
        }
        Point x;
        try {
            x = graph_.sample_free(ws, rng());
        } catch (const CollisionError&) {
            break;
        }
        for (NodeId s : graph_.extend(dfa_, ws, x).solutions) terminals_.push_back(s);
    }
    if (iterations > 0) graph_.rewire_from_root(dfa_, ws, config_.rewire_budget, &terminals_);
}

bool RebuildPlanner::try_install() {
    NodeId best = kNoNode;
    double best_cost = kInf;
    for (NodeId t : terminals_) {
        t = graph_.resolve(t);
        if (!graph_.in_tree(t) || !dfa_.is_accepting(graph_.node(t).q)) continue;
        const double c = graph_.root_cost(t);
        if (c < best_cost || (c == best_cost && t < best)) {
            best = t;
            best_cost = c;
        }
    }
    if (best == kNoNode || !std::isfinite(best_cost)) return false;
    path_.clear();
    for (NodeId n : graph_.path_to(best)) path_.push_back(graph_.node(n).x);
    if (path_.size() < 2) return false;
    next_ = 1;
    emit("switch", "path of " + std::to_string(path_.size()) + " waypoints");
    return true;
}

std::optional<Point> RebuildPlanner::current_target() const {
    if (next_ < path_.size()) return path_[next_];
    return std::nullopt;
}

std::vector<Point> RebuildPlanner::current_path() const {
    if (mode() != Mode::Executing || next_ >= path_.size()) return {};
    std::vector<Point> out{x_};
    out.insert(out.end(), path_.begin() + static_cast<std::ptrdiff_t>(next_), path_.end());
    return out;
}

void RebuildPlanner::on_arrival() {
    emit("arrive", "waypoint " + std::to_string(next_));
    if (++next_ < path_.size()) return;
    rebuild();
    emit("stop", "path exhausted");
}

void RebuildPlanner::rebuild() {
    graph_.reset(x_, q_);
    terminals_.clear();
    path_.clear();
    next_ = 0;
    if (mode() != Mode::Planning) set_mode(Mode::Stopped);
}

bool RebuildPlanner::handle_knowledge(const KnowledgeDelta&) {
    if (mode() != Mode::Executing) {
        rebuild();
        return false;
    }
    std::vector<Point> rest{x_};
    rest.insert(rest.end(), path_.begin() + static_cast<std::ptrdiff_t>(next_), path_.end());
    const Validation check = validate_path(rest, q_, dfa_, kb_.belief(), graph_);
    if (check.feasible) return false;
    emit("replan", std::string(to_string(check.reason)) + ", current path invalid");
    rebuild();
    emit("stop", "rebuilding tree");
    return true;
}

}  // namespace ltlreplan
