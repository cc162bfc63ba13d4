#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ssiter/cli.hpp"
#include "ssiter/error.hpp"

#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>
#include <vector>

using namespace ssiter;
namespace fs = std::filesystem;

namespace {

const fs::path kPresets = fs::path(SSITER_SOURCE_DIR) / "presets";

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result invoke(std::initializer_list<std::string> args) {
    std::vector<std::string> storage{"ssiter"};
    storage.insert(storage.end(), args.begin(), args.end());
    std::vector<char*> argv;
    for (std::string& s : storage) argv.push_back(s.data());
    std::ostringstream out, err;
    const int code = cli::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / ("ssiter_cli_" + name)) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

void write_file(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    out << text;
}

}  // namespace

TEST_CASE("dotted overrides") {
    cli::json c = cli::json::object();
    cli::apply_override(c, "topology.n", "50");
    cli::apply_override(c, "run.model", "async");
    cli::apply_override(c, "run.center", "[1, 2]");
    cli::apply_override(c, "a.b.c", "true");
    CHECK(c["topology"]["n"] == 50);
    CHECK(c["run"]["model"] == "async");
    CHECK(c["run"]["center"].size() == 2);
    CHECK(c["a"]["b"]["c"] == true);
    CHECK_THROWS_AS(cli::apply_override(c, "a..b", "1"), ConfigError);
}

TEST_CASE("component seeds derive from the master seed") {
    const cli::json a{{"seed", 1}};
    const cli::json b{{"seed", 2}};
    CHECK(cli::component_seed(a, "run.input", std::nullopt) == cli::component_seed(a, "run.input", std::nullopt));
    CHECK(cli::component_seed(a, "run.input", std::nullopt) != cli::component_seed(b, "run.input", std::nullopt));
    CHECK(cli::component_seed(a, "run.input", std::nullopt) != cli::component_seed(a, "run.center", std::nullopt));
    CHECK(cli::component_seed(a, "run.input", 77) == 77);
}

TEST_CASE("run config parsing") {
    cli::json c = cli::json::parse(R"({"topology": {"kind": "circle", "n": 5},
        "run": {"model": "async", "delta": 0.5, "center": [1, 2, 3, 4, 5], "initial": "fixed_point",
                "scheduler": {"kind": "random", "fairness_window": 20, "seed": 4}, "length": 77}})");
    const cli::RunConfig rc = cli::parse_run_config(c);
    CHECK(rc.model == ExecutionModel::async);
    CHECK(rc.delta == 0.5);
    CHECK(rc.center_kind == cli::CenterKind::explicit_vector);
    CHECK(rc.center.size() == 5);
    CHECK(rc.initial_kind == cli::InitialKind::fixed_point);
    CHECK(rc.scheduler == cli::SchedulerKind::random);
    CHECK(rc.fairness_window == 20);
    CHECK(rc.scheduler_seed == 4);
    CHECK(rc.length == 77);

    c["run"]["model"] = "quantum";
    CHECK_THROWS_AS((void)cli::parse_run_config(c), ConfigError);
    c["run"]["model"] = "sync";
    c["run"]["delta"] = -1;
    CHECK_THROWS_AS((void)cli::parse_run_config(c), ConfigError);
    c["run"]["delta"] = "big";
    CHECK_THROWS_AS((void)cli::parse_run_config(c), ConfigError);
}

TEST_CASE("gen-topology") {
    TempDir dir("gen");
    SUBCASE("circle preset prints the target norms") {
        const Result r = invoke({"gen-topology", "--config", (kPresets / "circle-100.json").string(), "--out",
                                 dir.path.string()});
        CHECK(r.code == 0);
        CHECK(r.out.find("a_norm 0.3333") != std::string::npos);
        CHECK(r.out.find("b_norm 0.6666") != std::string::npos);
        const cli::json config = cli::json::parse(slurp(kPresets / "circle-100.json"));
        CHECK(from_edge_file(dir.path / "circle-100.txt") == build_topology(cli::parse_topology(config)));
    }
    SUBCASE("unit-disc preset round trips") {
        const Result r = invoke({"gen-topology", "--config", (kPresets / "unit-disc-100.json").string(), "--out",
                                 dir.path.string()});
        CHECK(r.code == 0);
        const cli::json config = cli::json::parse(slurp(kPresets / "unit-disc-100.json"));
        CHECK(from_edge_file(dir.path / "unit-disc-100.txt") == build_topology(cli::parse_topology(config)));
    }
    SUBCASE("single unit-disc node") {
        const Result r = invoke({"gen-topology", "--out", dir.path.string(), "--topology.kind", "unit_disc",
                                 "--topology.n", "1", "--topology.self_weight", "0.02"});
        CHECK(r.code == 0);
        CHECK(slurp(dir.path / "topology.txt") == "n 1\nself 0 0.02\n");
    }
}

TEST_CASE("run") {
    TempDir dir("run");
    const std::string out = dir.path.string();

    SUBCASE("sync, zero radius, circle, 200 rounds") {
        const Result r = invoke({"run", "--out", out, "--topology.n", "100", "--run.delta", "0", "--run.length", "200"});
        REQUIRE(r.code == 0);
        const cli::json report = cli::json::parse(slurp(dir.path / "report.json"));
        CHECK(report["per_step_error"].back().get<double>() <= 1e-6);
        CHECK(report["violations"].empty());
        const std::string csv = slurp(dir.path / "trajectory.csv");
        CHECK(csv.rfind("round,node_0,", 0) == 0);
        CHECK(std::count(csv.begin(), csv.end(), '\n') == 202);
    }
    SUBCASE("async, round robin, same system") {
        const Result r = invoke({"run", "--out", out, "--topology.n", "100", "--run.delta", "0", "--run.model", "async",
                                 "--run.length", "30000"});
        CHECK(r.code == 0);
        CHECK(r.out.find("violations 0") != std::string::npos);
        CHECK(slurp(dir.path / "trajectory.csv").rfind("step,acting_node,action,round_index,node_0,", 0) == 0);
    }
    SUBCASE("async with a random scheduler and corrupted start") {
        const Result r = invoke({"run", "--out", out, "--topology.n", "10", "--run.delta", "0.2", "--run.model=async",
                                 "--run.scheduler.kind=random", "--run.scheduler.fairness_window=40",
                                 "--run.length", "5000", "--run.thinning", "10"});
        CHECK(r.code == 0);
        const std::string csv = slurp(dir.path / "trajectory.csv");
        CHECK(std::count(csv.begin(), csv.end(), '\n') == 502);
    }
    SUBCASE("explicit center and initial vector") {
        const Result r = invoke({"run", "--out", out, "--topology.n", "3", "--run.center", "[1,2,3]",
                                 "--run.initial", "[0,0,0]", "--run.input", "corner", "--run.delta", "0.1"});
        CHECK(r.code == 0);
    }
    SUBCASE("csv input") {
        write_file(dir.path / "in.csv", "1,2,3\n1.5,2,2.5\n");
        const Result r = invoke({"run", "--out", out, "--topology.n", "3", "--run.input.kind", "csv",
                                 "--run.input.path", (dir.path / "in.csv").string(), "--run.length", "20"});
        CHECK(r.code == 0);
        CHECK(r.out.find("delta 0.25") != std::string::npos);
    }
    SUBCASE("file topology") {
        write_file(dir.path / "g.txt", "n 2\nself 0 0.5\nself 1 0.5\nedge 0 1 0.25\nedge 1 0 -0.25\n");
        const Result r = invoke({"run", "--out", out, "--topology.kind", "file", "--topology.path",
                                 (dir.path / "g.txt").string()});
        CHECK(r.code == 0);
    }
    SUBCASE("non-contracting topologies are refused before running") {
        Result r = invoke({"run", "--out", out, "--topology.neighbor_budget", "1.0"});
        CHECK(r.code == 2);
        CHECK_FALSE(fs::exists(dir.path / "report.json"));

        write_file(dir.path / "bad.txt", "n 2\nself 0 0.5\nself 1 0.5\nedge 0 1 1.0\n");
        r = invoke({"run", "--out", out, "--topology.kind", "file", "--topology.path", (dir.path / "bad.txt").string()});
        CHECK(r.code == 2);
        CHECK(r.err.find("row 0") != std::string::npos);
        CHECK_FALSE(fs::exists(dir.path / "report.json"));
    }
    SUBCASE("configuration errors exit with 2") {
        CHECK(invoke({"run", "--config", (dir.path / "missing.json").string()}).code == 2);
        write_file(dir.path / "broken.json", "{ not json");
        CHECK(invoke({"run", "--config", (dir.path / "broken.json").string()}).code == 2);
        CHECK(invoke({"run", "--out", out, "--run.center", "[1,2]", "--topology.n", "3"}).code == 2);
        CHECK(invoke({"run", "--out", out, "--run.scheduler.kind", "random", "--run.model", "async",
                      "--run.scheduler.fairness_window", "3", "--topology.n", "5"})
                  .code == 2);
        CHECK(invoke({"frobnicate"}).code == 2);
        CHECK(invoke({}).code == 2);
        CHECK(invoke({"run", "--topology.n"}).code == 2);
    }
}

TEST_CASE("heatmap") {
    TempDir dir("heat");
    SUBCASE("single cell gives a single row") {
        const Result r = invoke({"heatmap", "--out", dir.path.string(), "--topology.n", "10",
                                 "--heatmap.delta_values", "[0.1]", "--heatmap.iteration_counts", "[50]",
                                 "--heatmap.trials", "3"});
        CHECK(r.code == 0);
        const std::string csv = slurp(dir.path / "heatmap.csv");
        CHECK(std::count(csv.begin(), csv.end(), '\n') == 2);
        CHECK(csv.rfind("delta,iterations,mean_linf\n0.10000000000000001,50,", 0) == 0);
    }
    SUBCASE("log-spaced grids") {
        const Result r = invoke({"heatmap", "--out", dir.path.string(), "--topology.n", "20", "--heatmap.trials", "2",
                                 "--heatmap.delta_values", R"({"min": 0.001, "max": 10, "count": 3})",
                                 "--heatmap.iteration_counts", R"({"min": 1, "max": 100, "count": 3})"});
        CHECK(r.code == 0);
        const std::string csv = slurp(dir.path / "heatmap.csv");
        CHECK(std::count(csv.begin(), csv.end(), '\n') == 10);
    }
}

TEST_CASE("identical invocations write identical files") {
    TempDir a("det_a");
    TempDir b("det_b");
    for (const char* preset : {"circle-100.json", "unit-disc-100.json"}) {
        const std::string cfg = (kPresets / preset).string();
        for (const fs::path& d : {a.path, b.path}) {
            REQUIRE(invoke({"gen-topology", "--config", cfg, "--out", d.string()}).code == 0);
            REQUIRE(invoke({"run", "--config", cfg, "--out", d.string(), "--seed", "7"}).code == 0);
            REQUIRE(invoke({"run", "--config", cfg, "--out", d.string(), "--seed", "7", "--run.model", "async",
                            "--run.length", "3000", "--run.trajectory", "async.csv", "--run.report", "async.json"})
                        .code == 0);
            REQUIRE(invoke({"heatmap", "--config", cfg, "--out", d.string(), "--heatmap.trials", "4"}).code == 0);
        }
        for (const auto& entry : fs::directory_iterator(a.path)) {
            CHECK(slurp(entry.path()) == slurp(b.path / entry.path().filename()));
        }
    }

    TempDir c("det_c");
    const std::string cfg = (kPresets / "circle-100.json").string();
    REQUIRE(invoke({"run", "--config", cfg, "--out", c.path.string(), "--seed", "8"}).code == 0);
    CHECK(slurp(c.path / "circle-100-report.json") != slurp(a.path / "circle-100-report.json"));
}
