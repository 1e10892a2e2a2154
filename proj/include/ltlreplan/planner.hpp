#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "ltlreplan/tree.hpp"
#include "ltlreplan/workspace.hpp"

namespace ltlreplan {

enum class Mode { Planning, Executing, Stopped, Done };
const char* to_string(Mode m);

enum class Infeasibility { None, BlockedEdge, BrokenTransition };
const char* to_string(Infeasibility r);

struct Solution {
    int id = -1;
    NodeId terminal = kNoNode;      // first accepting node
    std::vector<NodeId> path;       // R_new .. terminal
    std::vector<Point> waypoints;
    std::vector<LabelMask> trace;   // event-driven, from the root label through the terminal label
    std::vector<int> signature;     // reduced crossing word
    double cost = kInf;
    bool feasible = false;
    Infeasibility reason = Infeasibility::None;
};

/// Reduced word of signed crossings of upward rays cast from every obstacle and
/// region centroid. Letter k > 0 is a left-to-right crossing of anchor k-1's
/// ray, -k the reverse. Anchors are obstacles first, then regions.
std::vector<int> h_signature(const std::vector<Point>& waypoints, const Workspace& ws);

enum class AddResult { Added, Replaced, Ignored };
const char* to_string(AddResult r);

/// Solutions pairwise distinct in (trace, signature).
class SolutionLibrary {
public:
    explicit SolutionLibrary(std::size_t capacity = 64) : capacity_(capacity) {}

    AddResult try_add(Solution sol);
    const std::vector<Solution>& members() const { return members_; }
    std::vector<Solution>& members() { return members_; }
    const Solution* find(int id) const;
    Solution* find(int id);
    /// Least-cost feasible member, ties by lowest id.
    const Solution* best() const;
    /// Restores distinctness after members changed in place; keeps the cheaper of any clash.
    void dedup();
    void erase(int id);
    void clear() { members_.clear(); }
    std::size_t size() const { return members_.size(); }

private:
    std::size_t capacity_;
    std::vector<Solution> members_;
    int next_id_ = 0;
};

struct Validation {
    bool feasible = false;
    Infeasibility reason = Infeasibility::None;
    double cost = kInf;
};

/// Re-derives feasibility of a waypoint path under current beliefs: every
/// segment unblocked and the run from q_start never enters B and ends accepting.
Validation validate_path(const std::vector<Point>& waypoints, State q_start, const Dfa& dfa, const Workspace& ws,
                         const PlanGraph& rules);

/// Updates sol.feasible, reason and cost from validate_path starting at the state of its first node.
void validate_solution(Solution& sol, const PlanGraph& g, const Dfa& dfa, const Workspace& ws);

struct Event {
    double t = 0.0;
    std::string kind;  // arrive | replan | switch | stop | resume | done
    std::string detail;
    std::string line() const;
};

struct PlannerConfig {
    TreeParams tree;
    double v_max = 0.5;
    int budget_per_tick = 50;       // extend iterations per tick
    int rewire_budget = 100;        // nodes swept from R_new per tick
    std::size_t max_tree_nodes = 4000;  // beyond this, iterations rewire random nodes; doubled while no solution is feasible
    std::size_t library_capacity = 64;
    Point sense_size{3.0, 3.0};
};

struct ReplanRecord {
    double t = 0.0;       // sim time of the triggering knowledge
    double seconds = 0.0; // until a feasible current solution was installed; waited ticks count a full period
};

/// Shared execution loop: sensing, knowledge application, planning budget and
/// straight-line motion at v_max along the current target sequence.
class PlannerBase {
public:
    PlannerBase(Dfa dfa, Workspace prior, Point start, PlannerConfig config, std::uint64_t seed);
    virtual ~PlannerBase() = default;
    PlannerBase(const PlannerBase&) = delete;
    PlannerBase& operator=(const PlannerBase&) = delete;

    /// One control period against the ground truth; returns this tick's events.
    std::vector<Event> tick(double dt, const Workspace& truth);
    /// Knowledge from an external observer, applied with the next tick's sensing.
    void inform(Knowledge k) { external_.push_back(std::move(k)); }

    Mode mode() const { return mode_; }
    double time() const { return time_; }
    const Point& position() const { return x_; }
    State robot_state() const { return q_; }
    const Dfa& dfa() const { return dfa_; }
    const Workspace& belief() const { return kb_.belief(); }
    Workspace& belief_mut() { return kb_.belief(); }
    const PlannerConfig& config() const { return config_; }
    double travel_distance() const { return travel_; }
    /// Event-driven ground-truth label trace of the executed trajectory.
    const std::vector<LabelSet>& executed_trace() const { return executed_; }
    const std::vector<ReplanRecord>& replans() const { return replans_; }
    const std::vector<Event>& log() const { return log_; }
    bool replan_pending() const { return pending_.has_value(); }

    /// Waypoints the robot intends to follow from its current position.
    virtual std::vector<Point> current_path() const = 0;
    virtual const PlanGraph& graph() const = 0;
    virtual std::string name() const = 0;

protected:
    struct KnowledgeDelta {
        std::vector<std::string> regions;
        std::vector<std::string> obstacles;
        bool empty() const { return regions.empty() && obstacles.empty(); }
    };

    /// Applies changed knowledge. Returns true if the current solution became infeasible.
    virtual bool handle_knowledge(const KnowledgeDelta& delta) = 0;
    virtual void plan(int iterations) = 0;
    /// Planning or Stopped: install a feasible solution if one exists.
    virtual bool try_install() = 0;
    virtual std::optional<Point> current_target() const = 0;
    virtual void on_arrival() = 0;

    void emit(const std::string& kind, const std::string& detail);
    void set_mode(Mode m) { mode_ = m; }
    std::mt19937_64& rng() { return rng_; }

    Dfa dfa_;
    KnowledgeBase kb_;
    PlannerConfig config_;
    Point x_;
    State q_;

private:
    void move(double distance, const Workspace& truth);
    void advance_to(const Point& p, const Workspace& truth);
    void finish_replan();

    Mode mode_ = Mode::Planning;
    double time_ = 0.0;
    double travel_ = 0.0;
    std::mt19937_64 rng_;
    std::vector<LabelSet> executed_;
    std::vector<ReplanRecord> replans_;
    std::optional<std::pair<double, std::chrono::steady_clock::time_point>> pending_;
    std::chrono::steady_clock::time_point tick_started_;
    std::vector<Event> log_;
    std::vector<Event> tick_events_;
    std::vector<Knowledge> external_;
};

/// Dual-root tree reuse with a solution library.
class Planner : public PlannerBase {
public:
    Planner(Dfa dfa, Workspace prior, Point start, PlannerConfig config = {}, std::uint64_t seed = 0);

    std::vector<Point> current_path() const override;
    const PlanGraph& graph() const override { return graph_; }
    std::string name() const override { return "ours"; }

    const SolutionLibrary& library() const { return library_; }
    const Solution* current() const { return library_.find(current_); }
    /// n sample/extend/rewire iterations plus library refresh. Returns solutions added or replaced.
    int improve_step(int iterations);
    /// Cost for the robot to finish along sol from its present position.
    double remaining_cost(const Solution& sol) const;

protected:
    bool handle_knowledge(const KnowledgeDelta& delta) override;
    void plan(int iterations) override { improve_step(iterations); }
    bool try_install() override;
    std::optional<Point> current_target() const override;
    void on_arrival() override;

private:
    Solution make_solution(NodeId terminal) const;
    int offer(NodeId terminal);
    void refresh_library();
    const Solution* select_best() const;
    bool at_root() const;
    /// Makes sol current; re-seats the root at the robot if sol leaves the current edge.
    bool install(int id);
    void stop();
    void maybe_switch();

    PlanGraph graph_;
    SolutionLibrary library_;
    int current_ = -1;
};

/// Reference planner: plans once, follows the path, and rebuilds the tree
/// from the robot's hybrid state whenever the path becomes invalid.
class RebuildPlanner : public PlannerBase {
public:
    RebuildPlanner(Dfa dfa, Workspace prior, Point start, PlannerConfig config = {}, std::uint64_t seed = 0);

    std::vector<Point> current_path() const override;
    const PlanGraph& graph() const override { return graph_; }
    std::string name() const override { return "rebuild"; }

protected:
    bool handle_knowledge(const KnowledgeDelta& delta) override;
    void plan(int iterations) override;
    bool try_install() override;
    std::optional<Point> current_target() const override;
    void on_arrival() override;

private:
    void rebuild();

    PlanGraph graph_;
    std::vector<NodeId> terminals_;
    std::vector<Point> path_;
    std::size_t next_ = 0;
};

}  // namespace ltlreplan
