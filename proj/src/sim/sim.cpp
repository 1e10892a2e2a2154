#include "ltlreplan/sim.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "ltlreplan/ltlf/evaluate.hpp"
#include "ltlreplan/ltlf/parser.hpp"

namespace ltlreplan::sim {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) { throw ScenarioError(path + ": " + what); }

const json& field(const json& obj, const std::string& key, const std::string& path) {
    if (!obj.is_object()) fail(path, "expected an object");
    auto it = obj.find(key);
    if (it == obj.end()) fail(path + "." + key, "missing");
    return *it;
}

double number(const json& j, const std::string& path) {
    if (!j.is_number()) fail(path, "expected a number");
    return j.get<double>();
}

std::vector<double> numbers(const json& j, std::size_t n, const std::string& path) {
    if (!j.is_array() || j.size() != n) fail(path, "expected an array of " + std::to_string(n) + " numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back(number(j[i], path + "[" + std::to_string(i) + "]"));
    return out;
}

Point point(const json& j, const std::string& path) {
    const auto v = numbers(j, 2, path);
    return {v[0], v[1]};
}

Box rect(const json& j, const std::string& path) {
    const auto v = numbers(j, 4, path);
    if (!(v[0] < v[2] && v[1] < v[3])) fail(path, "expected [xmin, ymin, xmax, ymax] with min < max");
    return make_box({v[0], v[1]}, {v[2], v[3]});
}

LabelSet labels(const json& j, const std::string& path) {
    if (!j.is_array()) fail(path, "expected an array of labels");
    LabelSet out;
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_string() || !ltlf::is_valid_atom_name(j[i].get<std::string>()))
            fail(path + "[" + std::to_string(i) + "]", "expected a lowercase label name");
        out.insert(j[i].get<std::string>());
    }
    return out;
}

std::string text(const json& j, const std::string& path) {
    if (!j.is_string()) fail(path, "expected a string");
    return j.get<std::string>();
}

json to_json(const Point& p) { return json::array({p.x(), p.y()}); }
json to_json(const Box& b) { return json::array({b.min().x(), b.min().y(), b.max().x(), b.max().y()}); }

const char* mode_name(ScriptMode m) {
    switch (m) {
        case ScriptMode::Once: return "once";
        case ScriptMode::Loop: return "loop";
        case ScriptMode::PingPong: return "pingpong";
    }
    return "once";
}

struct ObstacleSpec {
    Obstacle obstacle;
    bool known = true;
};

ObstacleSpec parse_obstacle(const json& j, const std::string& path) {
    ObstacleSpec spec;
    Obstacle& o = spec.obstacle;
    o.id = text(field(j, "id", path), path + ".id");
    const json& shape = field(j, "shape", path);
    const std::string sp = path + ".shape";
    const std::string type = text(field(shape, "type", sp), sp + ".type");
    o.position = point(field(shape, "center", sp), sp + ".center");
    if (type == "rect") {
        const Point size = point(field(shape, "size", sp), sp + ".size");
        if (size.x() <= 0 || size.y() <= 0) fail(sp + ".size", "must be positive");
        o.shape = RectShape{size};
    } else if (type == "disc") {
        const double r = number(field(shape, "radius", sp), sp + ".radius");
        if (r <= 0) fail(sp + ".radius", "must be positive");
        o.shape = DiscShape{r};
    } else {
        fail(sp + ".type", "expected \"rect\" or \"disc\"");
    }
    const std::string kind = j.contains("kind") ? text(j["kind"], path + ".kind") : "static";
    if (kind == "static") o.kind = ObstacleKind::Static;
    else if (kind == "dynamic") o.kind = ObstacleKind::Dynamic;
    else fail(path + ".kind", "expected \"static\" or \"dynamic\"");
    if (j.contains("known")) {
        if (!j["known"].is_boolean()) fail(path + ".known", "expected a boolean");
        spec.known = j["known"].get<bool>();
    }
    if (j.contains("script")) {
        const json& s = j["script"];
        const std::string spp = path + ".script";
        if (o.kind != ObstacleKind::Dynamic) fail(spp, "only dynamic obstacles move");
        ObstacleScript script;
        const json& wps = field(s, "waypoints", spp);
        if (!wps.is_array() || wps.empty()) fail(spp + ".waypoints", "expected a non-empty array of points");
        for (std::size_t i = 0; i < wps.size(); ++i)
            script.waypoints.push_back(point(wps[i], spp + ".waypoints[" + std::to_string(i) + "]"));
        script.speed = number(field(s, "speed", spp), spp + ".speed");
        if (script.speed < 0 || script.speed > kMaxDynamicSpeed + 1e-12)
            fail(spp + ".speed", "must lie in [0, " + std::to_string(kMaxDynamicSpeed) + "]");
        const std::string mode = s.contains("mode") ? text(s["mode"], spp + ".mode") : "once";
        if (mode == "once") script.mode = ScriptMode::Once;
        else if (mode == "loop") script.mode = ScriptMode::Loop;
        else if (mode == "pingpong") script.mode = ScriptMode::PingPong;
        else fail(spp + ".mode", "expected once, loop or pingpong");
        o.position = script.position_at(0.0);
        o.script = std::move(script);
    }
    return spec;
}

}  // namespace

Scenario load_scenario(const std::string& json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ScenarioError(std::string("$: malformed JSON: ") + e.what());
    }
    Scenario sc;
    sc.name = text(field(doc, "name", "$"), "$.name");
    const Box bounds = rect(field(doc, "bounds", "$"), "$.bounds");

    std::vector<Region> regions;
    const json& rj = field(doc, "regions", "$");
    if (!rj.is_array()) fail("$.regions", "expected an array");
    for (std::size_t i = 0; i < rj.size(); ++i) {
        const std::string p = "$.regions[" + std::to_string(i) + "]";
        regions.push_back({text(field(rj[i], "id", p), p + ".id"), rect(field(rj[i], "rect", p), p + ".rect"),
                           labels(field(rj[i], "labels", p), p + ".labels")});
    }

    std::vector<Obstacle> truth_obstacles, prior_obstacles;
    if (doc.contains("obstacles")) {
        const json& oj = doc["obstacles"];
        if (!oj.is_array()) fail("$.obstacles", "expected an array");
        for (std::size_t i = 0; i < oj.size(); ++i) {
            ObstacleSpec spec = parse_obstacle(oj[i], "$.obstacles[" + std::to_string(i) + "]");
            if (spec.known) {
                Obstacle belief = spec.obstacle;
                belief.script.reset();
                prior_obstacles.push_back(belief);
            }
            truth_obstacles.push_back(std::move(spec.obstacle));
        }
    }

    try {
        sc.truth = Workspace(bounds, regions, truth_obstacles);
        sc.prior = Workspace(bounds, regions, prior_obstacles);
    } catch (const std::invalid_argument& e) {
        throw ScenarioError(std::string("$.regions: ") + e.what());
    }
    if (doc.contains("prior_overrides")) {
        const json& pj = doc["prior_overrides"];
        if (!pj.is_array()) fail("$.prior_overrides", "expected an array");
        for (std::size_t i = 0; i < pj.size(); ++i) {
            const std::string p = "$.prior_overrides[" + std::to_string(i) + "]";
            const std::string id = text(field(pj[i], "region", p), p + ".region");
            if (!sc.prior.find_region(id)) fail(p + ".region", "unknown region '" + id + "'");
            sc.prior.set_region_labels(id, labels(field(pj[i], "labels", p), p + ".labels"));
        }
    }

    sc.formula = text(field(doc, "formula", "$"), "$.formula");
    try {
        ltlf::parse(sc.formula);
    } catch (const ltlf::ParseError& e) {
        throw ScenarioError(std::string("$.formula: ") + e.what());
    }

    if (doc.contains("start")) sc.start = point(doc["start"], "$.start");
    if (doc.contains("start_box")) sc.start_box = rect(doc["start_box"], "$.start_box");
    if (!sc.start && !sc.start_box) fail("$", "one of start or start_box is required");
    const PlanGraph rules;
    if (sc.start && !rules.point_free(sc.prior, *sc.start)) fail("$.start", "not in believed free space");
    if (sc.start_box && !bounds.contains(*sc.start_box)) fail("$.start_box", "leaves the workspace bounds");

    if (doc.contains("v_max")) sc.v_max = number(doc["v_max"], "$.v_max");
    if (doc.contains("dt")) sc.dt = number(doc["dt"], "$.dt");
    if (doc.contains("sense_wh")) sc.sense_size = point(doc["sense_wh"], "$.sense_wh");
    if (doc.contains("budget_per_tick")) {
        if (!doc["budget_per_tick"].is_number_integer()) fail("$.budget_per_tick", "expected an integer");
        sc.budget_per_tick = doc["budget_per_tick"].get<int>();
    }
    if (doc.contains("max_time")) sc.max_time = number(doc["max_time"], "$.max_time");
    if (sc.v_max <= 0) fail("$.v_max", "must be positive");
    if (sc.dt <= 0) fail("$.dt", "must be positive");
    if (sc.budget_per_tick < 0) fail("$.budget_per_tick", "must be non-negative");
    if (sc.max_time <= 0) fail("$.max_time", "must be positive");
    return sc;
}

Scenario load_scenario_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ScenarioError(path + ": cannot open");
    std::stringstream ss;
    ss << in.rdbuf();
    return load_scenario(ss.str());
}

std::string to_json(const Scenario& sc) {
    json doc;
    doc["name"] = sc.name;
    doc["bounds"] = to_json(sc.truth.bounds());
    doc["regions"] = json::array();
    doc["prior_overrides"] = json::array();
    for (const auto& r : sc.truth.regions()) {
        doc["regions"].push_back({{"id", r.id}, {"rect", to_json(r.rect)}, {"labels", r.labels}});
        const Region* prior = sc.prior.find_region(r.id);
        if (prior && prior->labels != r.labels)
            doc["prior_overrides"].push_back({{"region", r.id}, {"labels", prior->labels}});
    }
    doc["obstacles"] = json::array();
    for (const auto& o : sc.truth.obstacles()) {
        json shape;
        if (const auto* rs = std::get_if<RectShape>(&o.shape))
            shape = {{"type", "rect"}, {"center", to_json(o.position)}, {"size", to_json(rs->size)}};
        else
            shape = {{"type", "disc"}, {"center", to_json(o.position)}, {"radius", std::get<DiscShape>(o.shape).radius}};
        json oj = {{"id", o.id},
                   {"shape", shape},
                   {"kind", o.kind == ObstacleKind::Static ? "static" : "dynamic"},
                   {"known", sc.prior.find_obstacle(o.id) != nullptr}};
        if (o.script) {
            json wps = json::array();
            for (const auto& w : o.script->waypoints) wps.push_back(to_json(w));
            oj["script"] = {{"waypoints", wps}, {"speed", o.script->speed}, {"mode", mode_name(o.script->mode)}};
        }
        doc["obstacles"].push_back(oj);
    }
    doc["formula"] = sc.formula;
    if (sc.start) doc["start"] = to_json(*sc.start);
    if (sc.start_box) doc["start_box"] = to_json(*sc.start_box);
    doc["v_max"] = sc.v_max;
    doc["dt"] = sc.dt;
    doc["sense_wh"] = to_json(sc.sense_size);
    doc["budget_per_tick"] = sc.budget_per_tick;
    doc["max_time"] = sc.max_time;
    return doc.dump(2);
}

// ---------------------------------------------------------------------------
// built-ins

namespace {

const char* kFetchWater = "F(pond & F grassland)";
const char* kPondFirst = "(!grassland U pond) & F grassland";

std::vector<Region> field_regions() {
    return {
        {"l1", make_box({0.3, 3.9}, {1.1, 4.7}), {"grassland"}},
        {"l2", make_box({2.1, 0.3}, {2.9, 1.1}), {"pond"}},
        {"l3", make_box({3.7, 3.5}, {4.5, 4.3}), {"grassland"}},
    };
}

std::vector<Obstacle> field_obstacles() {
    return {
        {"o1", RectShape{{0.4, 0.4}}, ObstacleKind::Static, {1.4, 2.8}, std::nullopt},
        {"o2", RectShape{{0.4, 0.4}}, ObstacleKind::Static, {2.5, 3.3}, std::nullopt},
        {"o3", RectShape{{0.4, 0.4}}, ObstacleKind::Static, {3.4, 2.5}, std::nullopt},
    };
}

Obstacle crossing_obstacle() {
    ObstacleScript script{{{4.7, 2.4}, {0.3, 2.4}}, 0.2, ScriptMode::Once};
    return {"u1", DiscShape{0.25}, ObstacleKind::Dynamic, script.position_at(0.0), script};
}

Scenario field_scenario(const std::string& name, bool wrong_label, bool moving_obstacle) {
    Scenario sc;
    sc.name = name;
    auto truth_regions = field_regions();
    if (wrong_label) truth_regions[2].labels = {};
    auto truth_obstacles = field_obstacles();
    auto prior_obstacles = field_obstacles();
    if (moving_obstacle) {
        truth_obstacles.push_back(crossing_obstacle());
        Obstacle seen = crossing_obstacle();
        seen.script.reset();
        prior_obstacles.push_back(seen);
    }
    const Box bounds = make_box({0, 0}, {5, 5});
    sc.truth = Workspace(bounds, truth_regions, truth_obstacles);
    sc.prior = Workspace(bounds, field_regions(), prior_obstacles);
    sc.formula = kFetchWater;
    sc.start_box = make_box({3.7, 0.3}, {4.7, 1.3});
    return sc;
}

Scenario phi2_demo() {
    Scenario sc;
    sc.name = "PHI2_DEMO";
    const Box bounds = make_box({0, 0}, {5, 5});
    auto truth_obstacles = field_obstacles();
    truth_obstacles.push_back({"u1", DiscShape{0.25}, ObstacleKind::Static, {3.0, 1.9}, std::nullopt});
    sc.truth = Workspace(bounds, field_regions(), truth_obstacles);
    sc.prior = Workspace(bounds, field_regions(), field_obstacles());
    sc.formula = kPondFirst;
    sc.start = Point(0.8, 1.2);
    return sc;
}

}  // namespace

std::vector<std::string> builtin_names() { return {"X_A", "X_B", "X_C", "X_A_STATIC", "PHI2_DEMO"}; }

Scenario builtin(const std::string& name) {
    if (name == "X_A") return field_scenario(name, true, false);
    if (name == "X_B") return field_scenario(name, false, true);
    if (name == "X_C") return field_scenario(name, true, true);
    if (name == "X_A_STATIC") return field_scenario(name, false, false);
    if (name == "PHI2_DEMO") return phi2_demo();
    throw ScenarioError("unknown built-in scenario '" + name + "'");
}

Scenario resolve_scenario(const std::string& ref) {
    const auto names = builtin_names();
    if (std::find(names.begin(), names.end(), ref) != names.end()) return builtin(ref);
    if (!std::filesystem::exists(ref)) {
        std::string known;
        for (const auto& n : names) known += (known.empty() ? "" : ", ") + n;
        throw ScenarioError("'" + ref + "' is neither a built-in scenario (" + known + ") nor a file");
    }
    return load_scenario_file(ref);
}

// ---------------------------------------------------------------------------
// runs

const char* to_string(PlannerKind k) { return k == PlannerKind::Ours ? "ours" : "rebuild"; }

Point start_position(const Scenario& sc, std::uint64_t seed) {
    if (sc.start) return *sc.start;
    // Separate stream from the planner's so the start does not shift its samples.
    std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
    std::uniform_real_distribution<double> ux(sc.start_box->min().x(), sc.start_box->max().x());
    std::uniform_real_distribution<double> uy(sc.start_box->min().y(), sc.start_box->max().y());
    const PlanGraph rules;
    for (int i = 0; i < 10000; ++i) {
        const double x = ux(rng);
        const double y = uy(rng);
        const Point p(x, y);
        if (rules.point_free(sc.prior, p)) return p;
    }
    throw ScenarioError(sc.name + ": start box has no free point");
}

std::unique_ptr<PlannerBase> make_planner(PlannerKind kind, const Scenario& sc, std::uint64_t seed,
                                          const RunOptions& opts) {
    PlannerConfig config;
    config.v_max = sc.v_max;
    config.tree.eta = sc.v_max * 1.0;
    config.budget_per_tick = opts.budget_per_tick > 0 ? opts.budget_per_tick : sc.budget_per_tick;
    config.sense_size = sc.sense_size;
    const Dfa dfa = ltlf::to_dfa(ltlf::parse(sc.formula));
    const Point start = start_position(sc, seed);
    if (kind == PlannerKind::Ours) return std::make_unique<Planner>(dfa, sc.prior, start, config, seed);
    return std::make_unique<RebuildPlanner>(dfa, sc.prior, start, config, seed);
}

RunMetrics run_with(PlannerKind kind, const Scenario& sc, std::uint64_t seed, const RunOptions& opts,
                    const std::function<void(const PlannerBase&, const Workspace&)>& observe) {
    auto planner = make_planner(kind, sc, seed, opts);
    const Dfa& dfa = planner->dfa();
    Workspace truth = sc.truth;
    truth.bind_alphabet(dfa.alphabet());

    RunMetrics m;
    m.scenario = sc.name;
    m.planner = to_string(kind);
    m.seed = seed;
    if (opts.keep_trajectory) m.trajectory.push_back(planner->position());

    State q_prev = planner->robot_state();
    Point x_prev = planner->position();
    const int max_ticks = static_cast<int>(std::ceil(sc.max_time / sc.dt - 1e-9));
    for (int k = 0; k < max_ticks && planner->mode() != Mode::Done; ++k) {
        truth.advance_scripts(planner->time());
        planner->tick(sc.dt, truth);
        const Point x = planner->position();
        if (opts.keep_trajectory) m.trajectory.push_back(x);

        for (const auto& o : truth.obstacles())
            if (distance(o.footprint(), x) <= 0.0) {
                ++m.collisions;
                break;
            }
        const Workspace& belief = planner->belief();
        if (dfa.is_bad(q_prev)) {
            ++m.forbidden_entries;
        } else if (const int ri = belief.region_index_at(x); ri >= 0) {
            std::vector<ltlf::RegionLabel> regions;
            for (const auto& r : belief.regions()) regions.push_back({r.id, r.mask});
            if (ltlf::forbidden_zones(dfa, q_prev, belief.mask_at(x_prev), regions).count(belief.regions()[ri].id))
                ++m.forbidden_entries;
        }
        q_prev = planner->robot_state();
        x_prev = x;
        if (observe) observe(*planner, truth);
    }

    m.completed = planner->mode() == Mode::Done && dfa.is_accepting(planner->robot_state());
    m.total_time = planner->time();
    m.travel_distance = planner->travel_distance();
    m.executed_trace = planner->executed_trace();
    m.trace_satisfies = ltlf::evaluate(ltlf::parse(sc.formula), m.executed_trace);
    m.replan_events = static_cast<int>(planner->replans().size());
    double sum = 0.0;
    for (const auto& r : planner->replans()) sum += r.seconds;
    m.avg_replan_time = m.replan_events ? sum / m.replan_events : 0.0;
    m.events = planner->log();
    return m;
}

RunMetrics run(const Scenario& sc, std::uint64_t seed, const RunOptions& opts) {
    return run_with(PlannerKind::Ours, sc, seed, opts);
}

RunMetrics run_baseline(const Scenario& sc, std::uint64_t seed, const RunOptions& opts) {
    return run_with(PlannerKind::Rebuild, sc, seed, opts);
}

BatchResult batch(const std::vector<Scenario>& scenarios, int seeds, int workers, const RunOptions& opts) {
    if (seeds <= 0) throw std::invalid_argument("batch needs at least one seed");
    struct Job {
        const Scenario* sc;
        PlannerKind kind;
        std::uint64_t seed;
    };
    std::vector<Job> jobs;
    for (const auto& sc : scenarios)
        for (PlannerKind kind : {PlannerKind::Ours, PlannerKind::Rebuild})
            for (int s = 0; s < seeds; ++s) jobs.push_back({&sc, kind, static_cast<std::uint64_t>(s)});

    BatchResult out;
    out.runs.resize(jobs.size());
    RunOptions lean = opts;
    lean.keep_trajectory = false;
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < jobs.size(); i = next++)
            out.runs[i] = run_with(jobs[i].kind, *jobs[i].sc, jobs[i].seed, lean);
    };
    const int n = std::max(1, workers);
    std::vector<std::thread> pool;
    for (int i = 1; i < n; ++i) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();

    for (std::size_t i = 0; i < jobs.size(); i += static_cast<std::size_t>(seeds)) {
        AggregateRow row;
        row.scenario = out.runs[i].scenario;
        row.planner = out.runs[i].planner;
        int replan_runs = 0;
        for (int s = 0; s < seeds; ++s) {
            const RunMetrics& m = out.runs[i + static_cast<std::size_t>(s)];
            ++row.runs;
            if (m.replan_events > 0) {
                row.avg_replan_time += m.avg_replan_time;
                ++replan_runs;
            }
            if (!m.completed) continue;
            ++row.completed;
            row.total_time += m.total_time;
            row.travel_distance += m.travel_distance;
        }
        if (row.completed) {
            row.total_time /= row.completed;
            row.travel_distance /= row.completed;
        }
        if (replan_runs) row.avg_replan_time /= replan_runs;
        out.table.push_back(row);
    }
    return out;
}

std::string csv_header() { return "scenario,planner,seed,completed,total_time,avg_replan_time,travel_dist"; }

std::string csv_row(const RunMetrics& m) {
    char buf[256];
    std::snprintf(buf, sizeof buf, "%s,%s,%llu,%d,%.3f,%.6f,%.4f", m.scenario.c_str(), m.planner.c_str(),
                  static_cast<unsigned long long>(m.seed), m.completed ? 1 : 0, m.total_time, m.avg_replan_time,
                  m.travel_distance);
    return buf;
}

std::string jsonl_row(const RunMetrics& m) {
    json trace = json::array();
    for (const auto& l : m.executed_trace) trace.push_back(l);
    json j = {{"scenario", m.scenario},
              {"planner", m.planner},
              {"seed", m.seed},
              {"completed", m.completed},
              {"total_time", m.total_time},
              {"replan_events", m.replan_events},
              {"avg_replan_time", m.avg_replan_time},
              {"travel_dist", m.travel_distance},
              {"trace", trace},
              {"trace_satisfies", m.trace_satisfies},
              {"collisions", m.collisions},
              {"forbidden_entries", m.forbidden_entries}};
    return j.dump();
}

std::string format_table(const std::vector<AggregateRow>& rows) {
    std::ostringstream out;
    char buf[256];
    std::snprintf(buf, sizeof buf, "%-12s %-8s %6s %12s %16s %14s\n", "scenario", "planner", "done", "time (s)",
                  "replan (s)", "distance (m)");
    out << buf;
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%-12s %-8s %3d/%-3d %11.2f %16.4f %14.2f\n", r.scenario.c_str(),
                      r.planner.c_str(), r.completed, r.runs, r.total_time, r.avg_replan_time, r.travel_distance);
        out << buf;
    }
    return out.str();
}

// ---------------------------------------------------------------------------
// figure

std::string render_svg(const Scenario& sc, const PlannerBase& planner, const Workspace& truth,
                       const std::vector<Point>& trajectory) {
    const Box& b = truth.bounds();
    const double scale = 100.0;
    auto px = [&](const Point& p) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.1f,%.1f", (p.x() - b.min().x()) * scale, (b.max().y() - p.y()) * scale);
        return std::string(buf);
    };
    auto rect_attrs = [&](const Box& r) {
        char buf[128];
        std::snprintf(buf, sizeof buf, "x=\"%.1f\" y=\"%.1f\" width=\"%.1f\" height=\"%.1f\"",
                      (r.min().x() - b.min().x()) * scale, (b.max().y() - r.max().y()) * scale, r.sizes().x() * scale,
                      r.sizes().y() * scale);
        return std::string(buf);
    };
    auto fill_for = [](const LabelSet& labels) {
        if (labels.count("pond")) return "#7fb3e6";
        if (labels.count("grassland")) return "#8fd18f";
        return labels.empty() ? "#e6e6e6" : "#e6c98f";
    };

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << b.sizes().x() * scale << "\" height=\""
        << b.sizes().y() * scale << "\">\n";
    svg << "<title>" << sc.name << " (" << planner.name() << ")</title>\n";
    svg << "<rect " << rect_attrs(b) << " fill=\"white\" stroke=\"black\"/>\n";
    for (const auto& r : planner.belief().regions()) {
        const Region* t = truth.find_region(r.id);
        const bool mismatch = t && t->labels != r.labels;
        svg << "<rect " << rect_attrs(r.rect) << " fill=\"" << fill_for(r.labels) << "\" stroke=\""
            << (mismatch ? "red\" stroke-dasharray=\"6,3" : "#555") << "\"/>\n";
        svg << "<text x=\"" << (r.rect.min().x() - b.min().x()) * scale + 4 << "\" y=\""
            << (b.max().y() - r.rect.max().y()) * scale + 14 << "\" font-size=\"12\">" << r.id << "</text>\n";
    }
    const PlanGraph& g = planner.graph();
    std::size_t drawn = 0;
    for (std::size_t i = 0; i < g.node_slots() && drawn < 3000; ++i) {
        const NodeId id = static_cast<NodeId>(i);
        if (!g.in_tree(id) || g.node(id).parent == kNoNode) continue;
        svg << "<polyline points=\"" << px(g.node(g.node(id).parent).x) << " " << px(g.node(id).x)
            << "\" stroke=\"#bbb\" stroke-width=\"0.6\" fill=\"none\"/>\n";
        ++drawn;
    }
    for (const auto& o : truth.obstacles()) {
        const Footprint f = o.footprint();
        if (const auto* box = std::get_if<Box>(&f)) svg << "<rect " << rect_attrs(*box) << " fill=\"#444\"/>\n";
        else {
            const Disc& d = std::get<Disc>(f);
            const auto c = px(d.center);
            svg << "<circle cx=\"" << c.substr(0, c.find(',')) << "\" cy=\"" << c.substr(c.find(',') + 1) << "\" r=\""
                << d.radius * scale << "\" fill=\"#444\"/>\n";
        }
    }
    auto polyline = [&](const std::vector<Point>& pts, const char* color, double width) {
        if (pts.size() < 2) return;
        svg << "<polyline points=\"";
        for (const auto& p : pts) svg << px(p) << " ";
        svg << "\" stroke=\"" << color << "\" stroke-width=\"" << width << "\" fill=\"none\"/>\n";
    };
    polyline(trajectory, "black", 2.0);
    polyline(planner.current_path(), "#e67e22", 2.0);
    const auto c = px(planner.position());
    svg << "<circle cx=\"" << c.substr(0, c.find(',')) << "\" cy=\"" << c.substr(c.find(',') + 1)
        << "\" r=\"6\" fill=\"#c0392b\"/>\n";
    svg << "</svg>\n";
    return svg.str();
}

}  // namespace ltlreplan::sim
