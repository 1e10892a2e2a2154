// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits non-zero if any fails.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <deque>
#include <functional>
#include <map>
#include <random>
#include <thread>

#include "graph_invariants.hpp"
#include "ltlf_oracle.hpp"
#include "ltlreplan/ltlf/dfa.hpp"
#include "ltlreplan/ltlf/parser.hpp"
#include "ltlreplan/sim.hpp"
#include "tree_fixture.hpp"

using namespace ltlreplan;
using namespace ltlreplan::testing;

namespace {

struct Verdict {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ---------------------------------------------------------------------------
// automaton

Verdict dfa_oracle_equivalence() {
    const auto t0 = std::chrono::steady_clock::now();
    std::size_t traces = 0, mismatches = 0, formulas = 0;
    for (const auto& text : kCorpus) {
        const ltlf::Formula f = ltlf::parse(text);
        if (ltlf::atoms(f).size() > 3) continue;
        ++formulas;
        const Dfa d = ltlf::to_dfa(f);
        for_each_trace(ltlf::atoms(f), 4, [&](const ltlf::Trace& t) {
            ++traces;
            mismatches += d.accepts(t) != oracle(f, t);
        });
    }
    const double secs = seconds_since(t0);
    return {formulas >= 10 && mismatches == 0 && secs < 10.0,
            fmt("%zu formulas, %zu traces, %zu mismatches, %.2f s", formulas, traces, mismatches, secs)};
}

Verdict pond_first_structure() {
    const Dfa d = ltlf::to_dfa(ltlf::parse(kPhi2));
    const std::vector<ltlf::RegionLabel> regions = {
        {"l1", d.mask_of({"grassland"})}, {"l2", d.mask_of({"pond"})}, {"l3", d.mask_of({"grassland"})}};
    const auto at_start = ltlf::forbidden_zones(d, d.initial(), 0, regions);
    const State pond_seen = d.delta(d.initial(), d.mask_of({"pond"}));
    const auto after_pond = ltlf::forbidden_zones(d, pond_seen, d.mask_of({"pond"}), regions);
    const bool ok = d.num_states() == 4 && d.bad_states().size() == 1 &&
                    at_start == std::set<std::string>{"l1", "l3"} && after_pond.empty();
    std::string start_ids;
    for (const auto& id : at_start) start_ids += (start_ids.empty() ? "" : ",") + id;
    return {ok, fmt("%d states, %zu bad, forbidden at start {%s}, after pond %zu zones", d.num_states(),
                    d.bad_states().size(), start_ids.c_str(), after_pond.size())};
}

// ---------------------------------------------------------------------------
// field study

struct FieldRun {
    sim::RunMetrics m;
    bool trace_ok = false;      // oracle verdict
    int forbidden_ticks = 0;    // ticks inside a region its believed automaton state forbids
};

struct FieldStudy {
    std::map<std::string, std::vector<FieldRun>> ours, baseline;
    double seconds = 0.0;
};

constexpr int kSeeds = 30;
const std::vector<std::string> kFields = {"X_A", "X_B", "X_C"};

/// Counts ticks where the robot sits in a region r with delta(q_prev, L(r)) in B,
/// q_prev being the robot's automaton state one tick earlier.
struct ForbiddenWatch {
    Point prev_x;
    std::optional<State> prev_q;
    int violations = 0;

    void operator()(const PlannerBase& p, const Workspace&) {
        const Dfa& d = p.dfa();
        const Workspace& belief = p.belief();
        if (!prev_q) prev_q = d.delta(d.initial(), belief.mask_at(prev_x));
        const Point x = p.position();
        if (d.is_bad(p.robot_state())) ++violations;
        else if (const int r = belief.region_index_at(x); r >= 0 && d.is_bad(d.delta(*prev_q, belief.regions()[r].mask)))
            ++violations;
        prev_x = x;
        prev_q = p.robot_state();
    }
};

const FieldStudy& field_study() {
    static const FieldStudy study = [] {
        struct Job {
            std::string scenario;
            sim::PlannerKind kind;
            int seed;
        };
        std::vector<Job> jobs;
        for (const auto& name : kFields)
            for (auto kind : {sim::PlannerKind::Ours, sim::PlannerKind::Rebuild})
                for (int s = 0; s < kSeeds; ++s) jobs.push_back({name, kind, s});
        std::map<std::string, sim::Scenario> scenarios;
        for (const auto& name : kFields) scenarios.emplace(name, sim::builtin(name));

        std::vector<FieldRun> results(jobs.size());
        std::atomic<std::size_t> next{0};
        const auto t0 = std::chrono::steady_clock::now();
        auto worker = [&] {
            for (std::size_t i; (i = next++) < jobs.size();) {
                const Job& j = jobs[i];
                const sim::Scenario& sc = scenarios.at(j.scenario);
                ForbiddenWatch watch{sim::start_position(sc, j.seed), std::nullopt};
                sim::RunOptions opts;
                opts.keep_trajectory = false;
                FieldRun r;
                r.m = sim::run_with(j.kind, sc, j.seed, opts, std::ref(watch));
                r.trace_ok = !r.m.executed_trace.empty() && oracle(ltlf::parse(sc.formula), r.m.executed_trace);
                r.forbidden_ticks = watch.violations;
                results[i] = std::move(r);
            }
        };
        std::vector<std::thread> pool;
        for (unsigned k = 0; k < std::max(1u, std::thread::hardware_concurrency()); ++k) pool.emplace_back(worker);
        for (auto& t : pool) t.join();

        FieldStudy out;
        out.seconds = seconds_since(t0);
        for (std::size_t i = 0; i < jobs.size(); ++i)
            (jobs[i].kind == sim::PlannerKind::Ours ? out.ours : out.baseline)[jobs[i].scenario].push_back(
                std::move(results[i]));
        return out;
    }();
    return study;
}

Verdict end_to_end_satisfaction() {
    const FieldStudy& st = field_study();
    bool ok = st.seconds < 300.0;
    std::string detail;
    for (const auto& name : kFields) {
        int completed = 0, satisfied = 0;
        for (const auto& r : st.ours.at(name)) {
            completed += r.m.completed;
            satisfied += r.m.completed && r.trace_ok;
        }
        ok = ok && completed >= 28 && satisfied == completed;
        detail += fmt("%s %d/%d done %d sat; ", name.c_str(), completed, kSeeds, satisfied);
    }
    return {ok, detail + fmt("%.0f s for both planners", st.seconds)};
}

double mean_replan_time(const std::vector<FieldRun>& runs, int& with_events) {
    double sum = 0.0;
    with_events = 0;
    for (const auto& r : runs)
        if (r.m.replan_events > 0) {
            sum += r.m.avg_replan_time;
            ++with_events;
        }
    return with_events ? sum / with_events : 0.0;
}

Verdict replanning_advantage() {
    const FieldStudy& st = field_study();
    const std::map<std::string, double> bound = {{"X_A", 0.5}, {"X_B", 0.7}, {"X_C", 0.7}};
    bool ok = true;
    std::string detail;
    for (const auto& name : kFields) {
        int n_ours = 0, n_base = 0;
        const double ours = mean_replan_time(st.ours.at(name), n_ours);
        const double base = mean_replan_time(st.baseline.at(name), n_base);
        const double ratio = base > 0 ? ours / base : INFINITY;
        ok = ok && n_ours > 0 && n_base > 0 && ratio <= bound.at(name);
        detail += fmt("%s %.4f/%.4f s ratio %.3f (<= %.1f); ", name.c_str(), ours, base, ratio, bound.at(name));
    }
    detail.resize(detail.size() - 2);
    return {ok, detail};
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

Verdict travel_advantage() {
    const FieldStudy& st = field_study();
    std::vector<double> ours, base;
    for (const auto& r : st.ours.at("X_B")) ours.push_back(r.m.travel_distance);
    for (const auto& r : st.baseline.at("X_B")) base.push_back(r.m.travel_distance);
    const double a = median(ours), b = median(base);
    return {a <= b, fmt("X_B median travel %.3f m vs baseline %.3f m", a, b)};
}

Verdict forbidden_zone_safety() {
    const FieldStudy& st = field_study();
    int runs = 0, ticks = 0, sim_entries = 0;
    for (const auto& name : kFields)
        for (const auto& r : st.ours.at(name)) {
            if (!r.m.completed) continue;
            ++runs;
            ticks += r.forbidden_ticks;
            sim_entries += r.m.forbidden_entries;
        }
    return {ticks == 0 && sim_entries == 0,
            fmt("%d completed runs, %d ticks in a forbidden zone (harness count %d)", runs, ticks, sim_entries)};
}

// ---------------------------------------------------------------------------
// tree

Verdict graph_invariant_fuzz() {
    constexpr int kEpisodes = 20, kIterations = 500;
    const std::vector<std::pair<std::string, LabelSet>> flips = {
        {"l3", {}}, {"l1", {"pond"}}, {"l3", {"grassland"}}, {"l2", {}}, {"l1", {"grassland"}}, {"l2", {"pond"}}};
    std::size_t checks = 0;
    std::vector<std::string> violations;
    auto record = [&](int episode, int it, const char* step, const std::vector<std::string>& v) {
        ++checks;
        for (const auto& s : v)
            if (violations.size() < 5) violations.push_back(fmt("episode %d iteration %d after %s: %s", episode, it, step, s.c_str()));
            else violations.emplace_back();
    };

    for (int episode = 0; episode < kEpisodes; ++episode) {
        TreeFixture f;
        f.ws.upsert_obstacle({"d1", DiscShape{0.25}, ObstacleKind::Dynamic, {1.5, 1.5}, std::nullopt});
        std::mt19937_64 rng(1000 + episode);
        std::uniform_real_distribution<double> coord(0.3, 4.7);
        f.g.reset({2.5, 2.0}, f.init);
        for (int it = 0; it < kIterations; ++it) {
            CostBook book = cost_book(f.g);
            f.g.extend(f.dfa, f.ws, f.g.sample_free(f.ws, rng));
            record(episode, it, "extend", graph_violations(f.g, f.dfa, f.ws));
            f.g.rewire_from_root(f.dfa, f.ws, 20);
            record(episode, it, "rewire", graph_violations(f.g, f.dfa, f.ws));
            record(episode, it, "extend and rewire", cost_increases(book, f.g));

            if (it % 10 == 9) {
                book = cost_book(f.g);
                f.g.dedup_pass(f.g.root());
                record(episode, it, "dedup", graph_violations(f.g, f.dfa, f.ws));
                record(episode, it, "dedup", duplicate_states(f.g));
                record(episode, it, "dedup", cost_increases(book, f.g));
            }
            if (it % 25 == 24) {
                f.ws.upsert_obstacle({"d1", DiscShape{0.25}, ObstacleKind::Dynamic, {coord(rng), coord(rng)}, std::nullopt});
                f.g.block_obstacle_edges(f.ws);
                record(episode, it, "obstacle move", graph_violations(f.g, f.dfa, f.ws));
            }
            if (it % 40 == 39) {
                const auto& [id, labels] = flips[(it / 40 + episode) % flips.size()];
                if (f.ws.set_region_labels(id, labels)) {
                    f.g.invalidate_traces(f.ws.find_region(id)->rect);
                    f.g.propagate_from(f.g.root(), f.dfa, f.ws, false);
                    f.g.dedup_pass(f.g.root());
                    f.g.recompute_costs();
                    record(episode, it, "label flip", graph_violations(f.g, f.dfa, f.ws));
                    record(episode, it, "label flip", duplicate_states(f.g));
                }
            }
            if (it % 50 == 49 && !f.g.node(f.g.root()).children.empty()) {
                f.g.set_current_edge(f.g.node(f.g.root()).children.front());
                f.g.advance_root(f.dfa, f.ws);
                record(episode, it, "root advance", graph_violations(f.g, f.dfa, f.ws));
            }
        }
    }
    std::string detail = fmt("%d iterations, %zu checks, %zu violations", kEpisodes * kIterations, checks,
                             violations.size());
    if (!violations.empty()) detail += "; first: " + violations.front();
    return {violations.empty(), detail};
}

/// Algorithm-level fixtures; each returns true when exactly the specified mutation happened.
Verdict algorithm_fixtures() {
    std::vector<std::pair<const char*, std::function<bool()>>> fixtures = {
        {"propagate valid", [] {
             TreeFixture f;
             const NodeId r = f.g.reset({2.5, 2.0}, f.init);
             const NodeId a = f.g.add_child_unchecked(r, {2.5, 0.7}, f.pond_seen);
             return f.g.propagate_state(r, a, f.dfa, f.ws) && f.g.node(a).q == f.pond_seen &&
                    f.g.isolated_size() == 0 && f.g.tree_size() == 2;
         }},
        {"propagate repairable", [] {
             TreeFixture f;
             const NodeId p = f.g.reset({2.5, 0.7}, f.pond_seen);
             const NodeId c = f.g.add_child_unchecked(p, {2.5, 2.0}, f.init);
             if (!f.g.propagate_state(p, c, f.dfa, f.ws) || f.g.node(c).q != f.pond_seen) return false;
             const auto copies = f.g.same_state_nodes(f.g.node(c).record, f.init, c);
             return f.g.isolated_size() == 1 && copies.size() == 1 &&
                    f.g.node(copies[0]).partition == Partition::Isolated;
         }},
        {"propagate unrepairable", [] {
             TreeFixture f;
             const NodeId p = f.g.reset({0.7, 3.5}, f.init);
             const NodeId c = f.g.add_child_unchecked(p, {0.7, 4.3}, f.init);
             return !f.g.propagate_state(p, c, f.dfa, f.ws) && f.g.node(c).q == f.init && f.g.isolated_size() == 0;
         }},
        {"merge isolated duplicate", [] {
             TreeFixture f;
             const NodeId r = f.g.reset({0.5, 0.5}, f.init);
             const NodeId a = f.g.add_child_unchecked(r, {1.0, 0.5}, f.init);
             const NodeId iso = f.g.add_isolated_unchecked({1.0, 0.5}, f.init);
             const NodeId other = f.g.add_isolated_unchecked({1.0, 0.5}, f.pond_seen);
             return !f.g.merge_node(a) && !f.g.alive(iso) && f.g.alive(other) && f.g.in_tree(a);
         }},
        {"merge costlier duplicate", [] {
             TreeFixture f;
             const NodeId r = f.g.reset({0.5, 0.5}, f.init);
             const NodeId a = f.g.add_child_unchecked(r, {1.0, 0.5}, f.init);
             const NodeId m = f.g.add_child_unchecked(a, {1.0, 2.0}, f.init);
             const NodeId k = f.g.add_child_unchecked(m, {1.5, 2.5}, f.init);
             const NodeId d = f.g.add_child_unchecked(r, {1.0, 2.0}, f.init);
             const auto before = tree_positions(f.g);
             return f.g.merge_node(m) && !f.g.alive(m) && f.g.resolve(m) == d && f.g.node(k).parent == d &&
                    std::abs(f.g.node(k).cost - (f.g.node(d).cost + std::sqrt(0.5))) < 1e-12 &&
                    tree_positions(f.g) == before;
         }},
        {"merge parent duplicate", [] {
             TreeFixture f;
             const NodeId r = f.g.reset({0.5, 0.5}, f.init);
             const NodeId p = f.g.add_child_unchecked(r, {1.0, 1.0}, f.init);
             const NodeId c = f.g.add_child_unchecked(p, {1.0, 1.0}, f.init);
             const NodeId k = f.g.add_child_unchecked(c, {1.5, 1.0}, f.init);
             return f.g.merge_node(c) && f.g.alive(p) && !f.g.alive(c) && f.g.node(k).parent == p;
         }},
    };
    int passed = 0;
    std::string failed;
    for (const auto& [name, fixture] : fixtures) {
        if (fixture()) ++passed;
        else failed += std::string(failed.empty() ? "; failed: " : ", ") + name;
    }
    return {passed == static_cast<int>(fixtures.size()), fmt("%d/%zu fixtures", passed, fixtures.size()) + failed};
}

// ---------------------------------------------------------------------------
// homotopy

/// Lattice oracle: two A-to-B paths are deformable into each other around the
/// obstacle iff the obstacle's center cell is reachable from outside the
/// lattice without crossing a cell the closed loop (path1, reversed path2) touches.
bool same_class_on_lattice(const std::vector<Point>& p1, const std::vector<Point>& p2, const Point& obstacle_center,
                           double extent) {
    constexpr int kCells = 20, kPad = kCells + 2;  // one ring of padding outside the workspace
    const double cell = extent / kCells;
    auto index = [&](const Point& x) {
        const int i = std::clamp(static_cast<int>(x.x() / cell), 0, kCells - 1) + 1;
        const int j = std::clamp(static_cast<int>(x.y() / cell), 0, kCells - 1) + 1;
        return std::pair{i, j};
    };
    std::vector<char> wall(kPad * kPad, 0);
    auto mark = [&](const std::vector<Point>& path) {
        for (std::size_t s = 1; s < path.size(); ++s) {
            const int n = static_cast<int>(std::ceil((path[s] - path[s - 1]).norm() / 0.01)) + 1;
            for (int k = 0; k <= n; ++k) {
                const auto [i, j] = index(path[s - 1] + (path[s] - path[s - 1]) * (double(k) / n));
                wall[j * kPad + i] = 1;
            }
        }
    };
    mark(p1);
    mark(p2);
    std::vector<char> seen(kPad * kPad, 0);
    std::deque<std::pair<int, int>> queue{{0, 0}};
    seen[0] = 1;
    while (!queue.empty()) {
        const auto [i, j] = queue.front();
        queue.pop_front();
        for (const auto& [di, dj] : {std::pair{1, 0}, {-1, 0}, {0, 1}, {0, -1}}) {
            const int a = i + di, b = j + dj;
            if (a < 0 || b < 0 || a >= kPad || b >= kPad || seen[b * kPad + a] || wall[b * kPad + a]) continue;
            seen[b * kPad + a] = 1;
            queue.emplace_back(a, b);
        }
    }
    const auto [ti, tj] = index(obstacle_center);
    return seen[tj * kPad + ti];
}

Verdict homotopy_oracle() {
    const Point center(2.5, 2.5);
    const Box block = make_box({2.0, 2.0}, {3.0, 3.0});
    const Workspace ws(make_box({0, 0}, {5, 5}), {}, {{"o", RectShape{{1, 1}}, ObstacleKind::Static, center, {}}});
    auto clear = [&](const Point& a, const Point& b) {
        const int n = static_cast<int>(std::ceil((b - a).norm() / 0.005)) + 1;
        for (int k = 0; k <= n; ++k)
            if (block.exteriorDistance(Point(a + (b - a) * (double(k) / n))) < 0.02) return false;
        return true;
    };
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(0.1, 4.9);
    auto free_point = [&] {
        for (;;)
            if (Point p(u(rng), u(rng)); block.exteriorDistance(p) > 0.05) return p;
    };

    int same = 0, different = 0, mismatches = 0;
    for (int pair = 0; pair < 5; ++pair) {
        Point a = free_point(), b = free_point();
        while ((a - b).norm() < 2.0) b = free_point();
        std::vector<std::vector<Point>> paths;
        while (paths.size() < 40) {
            const Point w = free_point();
            if (clear(a, w) && clear(w, b)) paths.push_back({a, w, b});
        }
        std::vector<std::vector<int>> sig;
        for (const auto& p : paths) sig.push_back(h_signature(p, ws));
        for (std::size_t i = 0; i < paths.size(); ++i)
            for (std::size_t j = i + 1; j < paths.size(); ++j) {
                const bool oracle_same = same_class_on_lattice(paths[i], paths[j], center, 5.0);
                (oracle_same ? same : different)++;
                mismatches += oracle_same != (sig[i] == sig[j]);
            }
    }
    return {mismatches == 0 && same > 0 && different > 0,
            fmt("%d same-side and %d opposite-side pairs, %d disagreements", same, different, mismatches)};
}

}  // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<Verdict()>>> criteria = {
        {"AC1 automaton matches the trace oracle", dfa_oracle_equivalence},
        {"AC2 pond-first automaton structure", pond_first_structure},
        {"AC3 field scenarios complete and satisfy the task", end_to_end_satisfaction},
        {"AC4 repair replans faster than rebuilding", replanning_advantage},
        {"AC5 repair travels no farther on X_B", travel_advantage},
        {"AC6 graph invariants under fuzzing", graph_invariant_fuzz},
        {"AC7 repair and merge fixtures", algorithm_fixtures},
        {"AC8 homotopy signature matches lattice deformation", homotopy_oracle},
        {"AC9 no tick inside a forbidden zone", forbidden_zone_safety},
    };
    int failures = 0;
    for (const auto& [name, check] : criteria) {
        Verdict v;
        try {
            v = check();
        } catch (const std::exception& e) {
            v = {false, std::string("threw: ") + e.what()};
        }
        failures += !v.pass;
        std::printf("%s %s: %s\n", v.pass ? "PASS" : "FAIL", name, v.detail.c_str());
        std::fflush(stdout);
    }
    return failures ? 1 : 0;
}
