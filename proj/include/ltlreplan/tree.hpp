#pragma once

#include <cstdint>
#include <deque>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <unordered_map>
#include <vector>

#include "ltlreplan/geometry.hpp"
#include "ltlreplan/ltlf/dfa.hpp"
#include "ltlreplan/workspace.hpp"

namespace ltlreplan {

using ltlf::Dfa;
using ltlf::State;
using NodeId = int;

inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr NodeId kNoNode = -1;

struct TreeParams {
    double eta = 0.5;          // steering step, v_max * dt
    double gamma = 4.0;        // near-radius scale
    double eta_max = 1.0;      // near-radius cap
    double clearance = kDefaultClearance;
    double dynamic_margin = kObstacleDisplacementThreshold;  // extra inflation for moving obstacles
    double edge_resolution = kEdgeResolution;
    double cell_size = 0.25;   // spatial index resolution
    int sample_attempts = 10000;
};

enum class Partition { Past, Future, Isolated };

const char* to_string(Partition p);

struct Node {
    NodeId id = kNoNode;
    State q = 0;
    Point x = Point::Zero();
    double cost = kInf;  // cost-to-come from the node's own base (R_new for Past, R_aux for Future)
    NodeId parent = kNoNode;
    double length = 0.0;  // Euclidean length of the parent edge
    bool blocked = false;  // parent edge crosses an obstacle
    std::vector<NodeId> children;
    Partition partition = Partition::Isolated;
    bool visited = false;
    int record = -1;
    bool alive = true;

    double edge_weight() const { return blocked ? kInf : length; }
};

/// All nodes ever instantiated at one continuous position.
struct RecordSet {
    int id = -1;
    Point x = Point::Zero();
    std::vector<NodeId> members;
};

struct ExtendReport {
    bool accepted = false;  // false: steering collided or duplicated a position
    NodeId nearest = kNoNode;
    std::vector<NodeId> added;
    std::vector<NodeId> isolated;
    std::vector<NodeId> solutions;  // first accepting nodes reached by this call
};

class CollisionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Dual-root search tree over hybrid states plus the isolated vertex set.
///
/// Node state semantics: q is the automaton state after reading every label
/// along the path up to and including L(x). A tree edge <p, c> is valid iff the
/// pruned run from q_p over the edge's event-driven trace ends at q_c.
class PlanGraph {
public:
    explicit PlanGraph(TreeParams params = {});

    const TreeParams& params() const { return params_; }

    /// Discards everything and starts a single-node tree at (q, x).
    NodeId reset(const Point& x, State q);

    // -- queries -------------------------------------------------------------
    const Node& node(NodeId id) const { return nodes_.at(id); }
    bool alive(NodeId id) const { return id >= 0 && id < static_cast<NodeId>(nodes_.size()) && nodes_[id].alive; }
    bool in_tree(NodeId id) const { return alive(id) && nodes_[id].partition != Partition::Isolated; }
    /// Follows merge forwarding; kNoNode if the node is gone without a survivor.
    NodeId resolve(NodeId id) const;
    std::size_t node_slots() const { return nodes_.size(); }
    std::size_t tree_size() const { return tree_count_; }
    std::size_t isolated_size() const { return isolated_count_; }
    std::size_t record_count() const { return live_records_; }
    NodeId root() const { return root_; }
    std::optional<NodeId> aux() const { return aux_ == kNoNode ? std::nullopt : std::optional<NodeId>(aux_); }
    const RecordSet& record(int id) const { return records_.at(id); }

    /// Weight of the current edge <R_new, R_aux>; 0 without one.
    double current_edge_weight() const;
    /// Cost from R_new: Past cost, Future cost plus the current edge, Isolated infinite.
    double root_cost(NodeId id) const;
    /// Nodes from R_new to id (inclusive), empty if id is not in the tree.
    std::vector<NodeId> path_to(NodeId id) const;
    bool is_ancestor(NodeId ancestor, NodeId id) const;
    /// Other alive nodes sharing the hybrid state of (q, x at the record).
    std::vector<NodeId> same_state_nodes(NodeId id) const;
    std::vector<NodeId> same_state_nodes(int record, State q, NodeId except) const;

    double near_radius() const;
    NodeId nearest(const Point& x) const;
    /// All alive nodes (tree and isolated) within near_radius() of x.
    std::vector<NodeId> near_set(const Point& x) const;
    std::vector<int> records_within(const Point& x, double radius) const;

    /// Cached event-driven label trace of the parent edge of id.
    const std::vector<LabelMask>& edge_trace(NodeId id, const Workspace& ws) const;
    /// True iff the parent edge of id is transition-valid under the current labels.
    bool edge_valid(NodeId id, const Dfa& dfa, const Workspace& ws) const;

    /// Obstacle blocking with per-kind inflation. An edge starting inside an
    /// inflation zone is allowed when it moves monotonically away from the obstacle.
    bool segment_blocked(const Workspace& ws, const Point& a, const Point& b) const;
    bool point_free(const Workspace& ws, const Point& x) const;

    // -- growth --------------------------------------------------------------
    Point sample_free(const Workspace& ws, std::mt19937_64& rng) const;
    static Point steer(const Point& from, const Point& to, double eta);

    ExtendReport extend(const Dfa& dfa, const Workspace& ws, const Point& x_rand);
    /// Re-parents near nodes through s_new when strictly cheaper. Returns the count.
    int rewire(const Dfa& dfa, const Workspace& ws, NodeId s_new, std::vector<NodeId>* adopted_accepting = nullptr);
    /// Budgeted breadth-first rewire sweep over Past starting at R_new; resumes across calls.
    int rewire_from_root(const Dfa& dfa, const Workspace& ws, int budget,
                         std::vector<NodeId>* adopted_accepting = nullptr);
    void reset_rewire_queue();

    // -- repair --------------------------------------------------------------
    /// Algorithm 1. Returns false if the corrected state would lie in B.
    bool propagate_state(NodeId parent, NodeId child, const Dfa& dfa, const Workspace& ws);
    /// Depth-first propagate_state below start; failed subtrees are demoted to isolated vertices.
    /// With past_only, the R_aux subtree is left untouched. Returns the number of demoted nodes.
    int propagate_from(NodeId start, const Dfa& dfa, const Workspace& ws, bool past_only);
    /// Algorithm 2. Returns true if a duplicate was removed.
    bool merge_node(NodeId m);
    /// Preorder merge over the subtree of start, skipping the R_aux subtree with past_only.
    /// Returns the number of tree merges.
    int dedup_pass(NodeId start, bool past_only = false);

    /// Makes target (a child of R_new) the auxiliary root, or clears it.
    void set_current_edge(std::optional<NodeId> target);
    /// Robot arrived at R_aux: reverse the executed edge, make R_aux the root, repair Past.
    void advance_root(const Dfa& dfa, const Workspace& ws, std::optional<NodeId> next_target = std::nullopt,
                      std::optional<State> root_q = std::nullopt);
    /// Splices a node at x on the current edge (or below R_new without one) and makes it the root.
    NodeId reseat_root(const Dfa& dfa, const Workspace& ws, const Point& x, State q);

    /// Re-derives blocked flags for every tree edge; returns the number of newly blocked edges.
    int block_obstacle_edges(const Workspace& ws);
    /// Drops cached traces of edges whose bounding box meets the box.
    void invalidate_traces(const Box& changed);
    void invalidate_all_traces();
    void recompute_costs();

    /// Line-oriented dump: `node <id> q=<q> x=<x>,<y> cost=<c> part=<p> parent=<id>` then `edge <p> <c> w=<w>`.
    std::string dump() const;

    // -- fixture construction ----------------------------------------------
    /// Adds a tree node under parent without any checks; costs are recomputed.
    NodeId add_child_unchecked(NodeId parent, const Point& x, State q);
    /// Adds an isolated vertex without any checks.
    NodeId add_isolated_unchecked(const Point& x, State q);

private:
    NodeId new_node(const Point& x, State q, int record);
    int record_at(const Point& x, bool create);
    long long cell_key(long ix, long iy) const;
    std::pair<long, long> cell_of(const Point& x) const;
    void attach(NodeId parent, NodeId child, double length);
    void detach(NodeId child);
    void remove_node(NodeId id);
    void demote_subtree(NodeId start);
    void set_partition_subtree(NodeId start, Partition p);
    void recompute_subtree(NodeId start);
    void retag_partitions();
    void collect_subtree(NodeId start, std::vector<NodeId>& out) const;
    bool first_accepting(NodeId id, const Dfa& dfa) const;
    double inflation(const Obstacle& o) const;

    TreeParams params_;
    std::vector<Node> nodes_;
    std::vector<RecordSet> records_;
    std::vector<bool> record_alive_;
    std::unordered_map<long long, std::vector<int>> grid_;
    std::unordered_map<NodeId, NodeId> forward_;
    NodeId root_ = kNoNode;
    NodeId aux_ = kNoNode;
    std::size_t tree_count_ = 0;
    std::size_t isolated_count_ = 0;
    std::size_t live_records_ = 0;

    struct TraceCache {
        std::vector<LabelMask> masks;
        bool valid = false;
    };
    mutable std::vector<TraceCache> traces_;

    std::deque<NodeId> rewire_queue_;
};

}  // namespace ltlreplan
