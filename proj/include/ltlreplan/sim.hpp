#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ltlreplan/planner.hpp"

namespace ltlreplan::sim {

class ScenarioError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Scenario {
    std::string name;
    Workspace truth;
    Workspace prior;
    std::string formula;
    std::optional<Point> start;
    std::optional<Box> start_box;  // uniform start over believed free space
    double v_max = 0.5;
    double dt = 0.1;
    Point sense_size{3.0, 3.0};
    int budget_per_tick = 50;
    double max_time = 300.0;
};

/// Parses and validates a scenario document. Errors name the offending field path.
Scenario load_scenario(const std::string& json_text);
Scenario load_scenario_file(const std::string& path);
std::string to_json(const Scenario& sc);

/// Built-in scenarios: X_A, X_B, X_C, X_A_STATIC, PHI2_DEMO.
std::vector<std::string> builtin_names();
Scenario builtin(const std::string& name);
/// A built-in name or a path to a scenario document.
Scenario resolve_scenario(const std::string& ref);

enum class PlannerKind { Ours, Rebuild };
const char* to_string(PlannerKind k);

struct RunMetrics {
    std::string scenario;
    std::string planner;
    std::uint64_t seed = 0;
    bool completed = false;
    double total_time = 0.0;        // simulated seconds until done
    int replan_events = 0;
    double avg_replan_time = 0.0;   // wall seconds, over replanning events
    double travel_distance = 0.0;
    std::vector<LabelSet> executed_trace;
    bool trace_satisfies = false;   // oracle verdict on the executed trace
    int collisions = 0;             // ticks with the robot inside a true obstacle
    int forbidden_entries = 0;      // ticks with the robot inside a forbidden zone
    std::vector<Point> trajectory;  // one point per tick
    std::vector<Event> events;
};

struct RunOptions {
    int budget_per_tick = -1;  // overrides the scenario when positive
    bool keep_trajectory = true;
};

/// Seed-determined start position: the declared start, or a uniform draw from the start box.
Point start_position(const Scenario& sc, std::uint64_t seed);

std::unique_ptr<PlannerBase> make_planner(PlannerKind kind, const Scenario& sc, std::uint64_t seed,
                                          const RunOptions& opts = {});

/// Ticks the planner until done or timeout. `observe` sees the planner and truth after each tick.
RunMetrics run_with(PlannerKind kind, const Scenario& sc, std::uint64_t seed, const RunOptions& opts = {},
                    const std::function<void(const PlannerBase&, const Workspace&)>& observe = {});
RunMetrics run(const Scenario& sc, std::uint64_t seed, const RunOptions& opts = {});
RunMetrics run_baseline(const Scenario& sc, std::uint64_t seed, const RunOptions& opts = {});

struct AggregateRow {
    std::string scenario;
    std::string planner;
    int runs = 0;
    int completed = 0;
    double total_time = 0.0;
    double avg_replan_time = 0.0;
    double travel_distance = 0.0;
};

struct BatchResult {
    std::vector<RunMetrics> runs;
    std::vector<AggregateRow> table;
};

/// Runs every scenario with both planners over seeds 0..seeds-1; means are taken over completed runs.
BatchResult batch(const std::vector<Scenario>& scenarios, int seeds, int workers = 1, const RunOptions& opts = {});

std::string csv_header();
std::string csv_row(const RunMetrics& m);
std::string jsonl_row(const RunMetrics& m);
std::string format_table(const std::vector<AggregateRow>& rows);

/// Static figure: regions, obstacles, tree edges, trajectory and remaining path.
std::string render_svg(const Scenario& sc, const PlannerBase& planner, const Workspace& truth,
                       const std::vector<Point>& trajectory);

}  // namespace ltlreplan::sim
