#pragma once

// Test-side structural checker for PlanGraph. Edge validity is re-derived from
// the label-set trace and the unpruned transition function, not from the
// graph's own cached mask traces.

#include <cmath>
#include <map>
#include <tuple>
#include <sstream>
#include <string>
#include <vector>

#include "ltlreplan/tree.hpp"

namespace ltlreplan::testing {

inline std::vector<std::string> graph_violations(const PlanGraph& g, const Dfa& dfa, const Workspace& ws) {
    std::vector<std::string> out;
    auto fail = [&](NodeId id, const std::string& what) {
        std::ostringstream s;
        s << "node " << id << ": " << what;
        out.push_back(s.str());
    };
    const NodeId root = g.root();
    const auto aux = g.aux();

    std::vector<int> seen(g.node_slots(), 0);
    std::vector<NodeId> stack{root};
    std::size_t reached = 0;
    std::vector<bool> in_future(g.node_slots(), false);
    while (!stack.empty()) {
        const NodeId n = stack.back();
        stack.pop_back();
        if (seen[n]++) {
            fail(n, "reached twice");
            continue;
        }
        ++reached;
        for (NodeId c : g.node(n).children) {
            if (!g.alive(c)) fail(c, "dead child");
            else if (g.node(c).parent != n) fail(c, "parent pointer mismatch");
            in_future[c] = in_future[n] || (aux && c == *aux);
            stack.push_back(c);
        }
    }
    if (reached != g.tree_size()) fail(root, "tree size mismatch");

    std::size_t isolated = 0;
    for (std::size_t i = 0; i < g.node_slots(); ++i) {
        const NodeId id = static_cast<NodeId>(i);
        if (!g.alive(id)) continue;
        const Node& n = g.node(id);
        if (dfa.is_bad(n.q)) fail(id, "carries a bad state");
        const RecordSet& rec = g.record(n.record);
        if (rec.x != n.x) fail(id, "record position mismatch");
        if (std::count(rec.members.begin(), rec.members.end(), id) != 1) fail(id, "not exactly once in its record");

        if (n.partition == Partition::Isolated) {
            ++isolated;
            if (n.parent != kNoNode || !n.children.empty()) fail(id, "isolated node has edges");
            if (std::isfinite(n.cost)) fail(id, "isolated node has finite cost");
            if (seen[id]) fail(id, "isolated node reachable from root");
            continue;
        }
        if (!seen[id]) fail(id, "tree node unreachable from root");
        const Partition expected = in_future[id] ? Partition::Future : Partition::Past;
        if (n.partition != expected) fail(id, "wrong partition");

        if (id == root || (aux && id == *aux)) {
            if (n.cost != 0.0) fail(id, "root cost not zero");
            if (id == root) continue;
        }
        const Node& p = g.node(n.parent);
        if (std::abs(n.length - (n.x - p.x).norm()) > 1e-9) fail(id, "edge length mismatch");
        if (!(aux && id == *aux)) {
            const double expect = p.cost + n.edge_weight();
            if (std::isfinite(expect) ? std::abs(n.cost - expect) > 1e-9 : std::isfinite(n.cost))
                fail(id, "cost inconsistent with parent");
            State q = p.q;
            bool ok = true;
            for (const LabelSet& labels : ws.edge_trace(p.x, n.x, g.params().edge_resolution)) {
                q = dfa.delta(q, dfa.mask_of(labels));
                if (dfa.is_bad(q)) ok = false;
            }
            if (!ok || q != n.q) fail(id, "edge violates the transition relation");
        }
    }
    if (isolated != g.isolated_size()) fail(root, "isolated count mismatch");
    return out;
}

/// A tree vertex identity: automaton state and exact position.
using StateKey = std::tuple<State, double, double>;

inline StateKey key_of(const Node& n) { return {n.q, n.x.x(), n.x.y()}; }

/// Tree nodes sharing a (q, x) pair.
inline std::vector<std::string> duplicate_states(const PlanGraph& g) {
    std::vector<std::string> out;
    std::map<StateKey, NodeId> first;
    for (std::size_t i = 0; i < g.node_slots(); ++i) {
        const NodeId id = static_cast<NodeId>(i);
        if (!g.in_tree(id)) continue;
        const auto [it, fresh] = first.emplace(key_of(g.node(id)), id);
        if (!fresh) {
            std::ostringstream s;
            s << "nodes " << it->second << " and " << id << " share (q, x)";
            out.push_back(s.str());
        }
    }
    return out;
}

/// Cheapest cost-to-come per (q, x), split by partition since Past and Future
/// costs are measured from different roots.
using CostBook = std::map<std::pair<Partition, StateKey>, double>;

inline CostBook cost_book(const PlanGraph& g) {
    CostBook book;
    for (std::size_t i = 0; i < g.node_slots(); ++i) {
        const NodeId id = static_cast<NodeId>(i);
        if (!g.in_tree(id)) continue;
        const Node& n = g.node(id);
        auto [it, fresh] = book.emplace(std::pair{n.partition, key_of(n)}, n.cost);
        if (!fresh) it->second = std::min(it->second, n.cost);
    }
    return book;
}

/// Violations of "dedup and rewire never drop a tree state nor raise its cost".
inline std::vector<std::string> cost_increases(const CostBook& before, const PlanGraph& g) {
    std::vector<std::string> out;
    const CostBook after = cost_book(g);
    std::map<StateKey, bool> present;
    for (const auto& [k, c] : after) present[k.second] = true;
    for (const auto& [k, c] : before) {
        const auto& [q, x, y] = k.second;
        std::ostringstream s;
        s << "state " << q << " at (" << x << ", " << y << ")";
        if (!present.count(k.second)) {
            out.push_back(s.str() + " left the tree");
            continue;
        }
        const auto it = after.find(k);
        if (it == after.end()) continue;  // moved between partitions; its cost base changed
        if (it->second > c + 1e-9) {
            s << " cost rose from " << c << " to " << it->second;
            out.push_back(s.str());
        }
    }
    return out;
}

}  // namespace ltlreplan::testing
