#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "ltlreplan/cli.hpp"

using namespace ltlreplan;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result call(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = cli::dispatch(args, out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("ltlreplan_cli_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::size_t count_lines(const std::string& text) { return std::count(text.begin(), text.end(), '\n'); }

/// Scoped environment variable.
struct Env {
    Env(const char* key, const char* value) : key(key) { setenv(key, value, 1); }
    ~Env() { unsetenv(key); }
    const char* key;
};

}  // namespace

TEST_CASE("compile writes DOT with exactly one dashed state for the pond-first task") {
    const fs::path dot = scratch("compile") / "phi2.dot";
    const Result r = call({"compile", "(!g U p) & F g", "-o", dot.string()});
    CHECK(r.code == 0);
    CHECK(r.out == "states=4 initial=0 accepting={2} bad={3}\n");
    const std::string text = slurp(dot);
    CHECK(text.rfind("digraph", 0) == 0);
    const std::regex dashed_state(R"(\n  \d+ \[shape=\w+, style=dashed\];)");
    CHECK(std::distance(std::sregex_iterator(text.begin(), text.end(), dashed_state), std::sregex_iterator()) == 1);
    CHECK(text.find("doublecircle") != std::string::npos);
}

TEST_CASE("compile without an output file prints DOT") {
    const Result r = call({"compile", "F a"});
    CHECK(r.code == 0);
    CHECK(r.out.rfind("digraph", 0) == 0);
    CHECK(r.out.find("// states=2") != std::string::npos);
}

TEST_CASE("exit codes") {
    CHECK(call({}).code == 2);
    CHECK(call({"fly"}).code == 2);
    CHECK(call({"compile"}).code == 2);
    CHECK(call({"run", "X_A", "--seed", "x"}).code == 2);
    CHECK(call({"batch", "X_A", "--seeds", "0"}).code == 2);
    CHECK(call({"--help"}).code == 0);
    CHECK(call({"compile", "F("}).code == 1);
    const Result missing = call({"run", "no_such_scenario"});
    CHECK(missing.code == 1);
    CHECK(missing.err.find("neither a built-in") != std::string::npos);
    Env bad("LTLREPLAN_LOG", "loud");
    CHECK(call({"run", "X_A"}).code == 2);
}

TEST_CASE("run prints a metrics line, writes a figure and is seed-determined") {
    const fs::path dir = scratch("run");
    Env quiet("LTLREPLAN_LOG", "off");
    const Result a = call({"run", "X_B", "--seed", "7", "--svg", (dir / "out.svg").string(), "-o", (dir / "m.json").string()});
    REQUIRE(a.code == 0);
    CHECK(a.err.empty());
    CHECK(count_lines(a.out) == 1);
    json m = json::parse(a.out);
    CHECK(m["completed"] == true);
    CHECK(m["trace_satisfies"] == true);
    CHECK(m["seed"] == 7);
    CHECK(json::parse(slurp(dir / "m.json")) == m);
    const std::string svg = slurp(dir / "out.svg");
    CHECK(svg.rfind("<svg", 0) == 0);
    CHECK(svg.find("</svg>") != std::string::npos);

    json again = json::parse(call({"run", "X_B", "--seed", "7"}).out);
    m.erase("avg_replan_time");  // wall clock
    again.erase("avg_replan_time");
    CHECK(again == m);
    CHECK(json::parse(call({"run", "X_B", "--seed", "7", "--baseline"}).out)["planner"] == "rebuild");
}

TEST_CASE("event log verbosity follows LTLREPLAN_LOG") {
    std::string info, debug;
    {
        Env v("LTLREPLAN_LOG", "info");
        info = call({"run", "X_A", "--seed", "1"}).err;
    }
    {
        Env v("LTLREPLAN_LOG", "debug");
        debug = call({"run", "X_A", "--seed", "1"}).err;
    }
    CHECK(info.find("kind=replan") != std::string::npos);
    CHECK(info.find("kind=arrive") == std::string::npos);
    CHECK(debug.find("kind=arrive") != std::string::npos);
    CHECK(count_lines(debug) > count_lines(info));
}

TEST_CASE("the bundled example scenario replans and completes") {
    Env quiet("LTLREPLAN_LOG", "off");
    const Result r = call({"run", LTLREPLAN_SCENARIO_DIR "/example.json"});
    REQUIRE(r.code == 0);
    const json m = json::parse(r.out);
    CHECK(m["trace_satisfies"] == true);
    CHECK(m["replan_events"].get<int>() >= 1);
}

TEST_CASE("a run that times out exits 1") {
    const fs::path dir = scratch("timeout");
    json doc = json::parse(R"({
        "name": "short", "bounds": [0, 0, 5, 5], "formula": "F pond", "start": [0.5, 0.5], "max_time": 0.5,
        "regions": [{"id": "l1", "rect": [4, 4, 4.8, 4.8], "labels": ["pond"]}]
    })");
    std::ofstream(dir / "short.json") << doc.dump();
    Env quiet("LTLREPLAN_LOG", "off");
    const Result r = call({"run", (dir / "short.json").string()});
    CHECK(r.code == 1);
    CHECK(json::parse(r.out)["completed"] == false);
}

TEST_CASE("batch writes one row per scenario, planner and seed") {
    const fs::path dir = scratch("batch");
    const Result r = call({"batch", "X_A", "X_B", "X_C", "--seeds", "2", "--workers", "4", "-o", dir.string()});
    REQUIRE(r.code == 0);
    const std::string csv = slurp(dir / "runs.csv");
    CHECK(count_lines(csv) == 1 + 3 * 2 * 2);
    CHECK(count_lines(slurp(dir / "runs.jsonl")) == 3 * 2 * 2);
    CHECK(slurp(dir / "table.txt") == r.out);
    for (const char* name : {"X_A", "X_B", "X_C"}) CHECK(r.out.find(name) != std::string::npos);
}
