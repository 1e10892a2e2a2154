#include "ltlreplan/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

#include "CLI11.hpp"
#include "ltlreplan/live.hpp"
#include "ltlreplan/ltlf/parser.hpp"

namespace ltlreplan::cli {

namespace fs = std::filesystem;

LogLevel parse_log_level(const std::string& text) {
    if (text == "off") return LogLevel::Off;
    if (text == "info") return LogLevel::Info;
    if (text == "debug") return LogLevel::Debug;
    throw std::invalid_argument("log level must be off, info or debug, got '" + text + "'");
}

LogLevel log_level_from_env() {
    const char* v = std::getenv("LTLREPLAN_LOG");
    return v ? parse_log_level(v) : LogLevel::Info;
}

namespace {

/// Info shows the decisions (replan, switch, stop, done); debug adds progress events.
bool shown(const Event& e, LogLevel level) {
    if (level == LogLevel::Off) return false;
    if (level == LogLevel::Debug) return true;
    return e.kind == "replan" || e.kind == "switch" || e.kind == "stop" || e.kind == "done";
}

void write_file(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + path.string());
    f << text;
}

std::string join_states(const std::set<ltlf::State>& states) {
    std::string s;
    for (auto q : states) s += (s.empty() ? "" : ",") + std::to_string(q);
    return "{" + s + "}";
}

fs::path default_web_root() {
    if (const char* v = std::getenv("LTLREPLAN_WEB_DIR")) return v;
    return LTLREPLAN_WEB_DIR;
}

struct CompileArgs {
    std::string formula;
    std::string out;
};

int do_compile(const CompileArgs& a, std::ostream& out) {
    const Dfa dfa = ltlf::to_dfa(ltlf::parse(a.formula));
    std::set<ltlf::State> accepting;
    for (ltlf::State q = 0; q < dfa.num_states(); ++q)
        if (dfa.is_accepting(q)) accepting.insert(q);
    const std::string report = "states=" + std::to_string(dfa.num_states()) + " initial=" +
                               std::to_string(dfa.initial()) + " accepting=" + join_states(accepting) +
                               " bad=" + join_states(dfa.bad_states());
    if (a.out.empty()) {
        out << dfa.to_dot() << "// " << report << "\n";
    } else {
        write_file(a.out, dfa.to_dot());
        out << report << "\n";
    }
    return 0;
}

struct RunArgs {
    std::string scenario;
    std::uint64_t seed = 0;
    bool baseline = false;
    int budget = -1;
    std::string svg;
    std::string out;
};

int do_run(const RunArgs& a, LogLevel level, std::ostream& out, std::ostream& err) {
    const sim::Scenario sc = sim::resolve_scenario(a.scenario);
    const auto kind = a.baseline ? sim::PlannerKind::Rebuild : sim::PlannerKind::Ours;
    sim::RunOptions opts;
    opts.budget_per_tick = a.budget;

    std::string svg;
    std::vector<Point> trajectory;
    auto observe = [&](const PlannerBase& p, const Workspace& truth) {
        if (a.svg.empty()) return;
        trajectory.push_back(p.position());
        if (p.mode() == Mode::Done || p.time() >= sc.max_time - sc.dt / 2)
            svg = sim::render_svg(sc, p, truth, trajectory);
    };
    const sim::RunMetrics m = sim::run_with(kind, sc, a.seed, opts, observe);

    for (const auto& e : m.events)
        if (shown(e, level)) err << e.line() << "\n";
    const std::string line = sim::jsonl_row(m);
    out << line << "\n";
    if (!a.out.empty()) write_file(a.out, line + "\n");
    if (!a.svg.empty()) write_file(a.svg, svg);
    if (!m.completed) {
        err << "error: run did not complete within " << sc.max_time << " s\n";
        return 1;
    }
    return 0;
}

struct BatchArgs {
    std::vector<std::string> scenarios;
    int seeds = 30;
    int workers = 0;
    int budget = -1;
    std::string out;
};

int do_batch(const BatchArgs& a, std::ostream& out) {
    std::vector<sim::Scenario> scenarios;
    for (const auto& ref : a.scenarios) scenarios.push_back(sim::resolve_scenario(ref));
    const int workers = a.workers > 0 ? a.workers : std::max(1u, std::thread::hardware_concurrency());
    sim::RunOptions opts;
    opts.budget_per_tick = a.budget;
    opts.keep_trajectory = false;
    const sim::BatchResult r = sim::batch(scenarios, a.seeds, workers, opts);

    const std::string table = sim::format_table(r.table);
    if (!a.out.empty()) {
        std::string csv = sim::csv_header() + "\n", jsonl;
        for (const auto& m : r.runs) {
            csv += sim::csv_row(m) + "\n";
            jsonl += sim::jsonl_row(m) + "\n";
        }
        const fs::path dir(a.out);
        write_file(dir / "runs.csv", csv);
        write_file(dir / "runs.jsonl", jsonl);
        write_file(dir / "table.txt", table);
    }
    out << table;
    return 0;
}

struct ServeArgs {
    std::string scenario = "PHI2_DEMO";
    std::uint64_t seed = 0;
    std::uint16_t port = 8080;
    std::string web;
};

int do_serve(const ServeArgs& a, std::ostream& out) {
    const fs::path root = a.web.empty() ? default_web_root() : fs::path(a.web);
    if (!fs::exists(root / "index.html")) throw std::runtime_error("no index.html under " + root.string());
    live::LiveSession session(sim::resolve_scenario(a.scenario), a.seed);
    live::LiveServer server(session, a.port, root);
    out << "serving " << a.scenario << " at http://127.0.0.1:" << server.port() << "/" << std::endl;
    server.run();
    return 0;
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Temporal-logic planning with real-time replanning"};
    app.require_subcommand(1);

    CompileArgs compile;
    auto* c = app.add_subcommand("compile", "Compile a formula to a minimal DFA in GraphViz DOT");
    c->add_option("formula", compile.formula, "Task formula")->required();
    c->add_option("-o,--out", compile.out, "DOT output file (default: stdout)");

    RunArgs run;
    auto* r = app.add_subcommand("run", "Simulate one scenario and print its metrics as JSON");
    r->add_option("scenario", run.scenario, "Built-in name or scenario file")->required();
    r->add_option("--seed", run.seed, "Run seed");
    r->add_flag("--baseline", run.baseline, "Use the rebuild-from-scratch planner");
    r->add_option("--budget", run.budget, "Planning iterations per tick")->check(CLI::PositiveNumber);
    r->add_option("--svg", run.svg, "Write a figure of the final state");
    r->add_option("-o,--out", run.out, "Also write the metrics line to this file");

    BatchArgs batch;
    auto* b = app.add_subcommand("batch", "Run scenarios with both planners over many seeds");
    b->add_option("scenarios", batch.scenarios, "Built-in names or scenario files")->required();
    b->add_option("--seeds", batch.seeds, "Seeds 0..n-1")->check(CLI::PositiveNumber);
    b->add_option("--workers", batch.workers, "Parallel runs (default: hardware threads)")->check(CLI::NonNegativeNumber);
    b->add_option("--budget", batch.budget, "Planning iterations per tick")->check(CLI::PositiveNumber);
    b->add_option("-o,--out", batch.out, "Directory for runs.csv, runs.jsonl and table.txt");

    ServeArgs serve;
    auto* s = app.add_subcommand("serve", "Serve a live run to the browser sandbox");
    s->add_option("scenario", serve.scenario, "Built-in name or scenario file");
    s->add_option("--seed", serve.seed, "Run seed");
    s->add_option("--port", serve.port, "Listening port (0 picks one)");
    s->add_option("--web", serve.web, "Static asset directory");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }
    LogLevel level;
    try {
        level = log_level_from_env();
    } catch (const std::invalid_argument& e) {
        err << "LTLREPLAN_LOG: " << e.what() << "\n";
        return 2;
    }

    try {
        if (*c) return do_compile(compile, out);
        if (*r) return do_run(run, level, out, err);
        if (*b) return do_batch(batch, out);
        return do_serve(serve, out);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace ltlreplan::cli
