#pragma once

// Configuration-driven front end: `gen-topology`, `run` and `heatmap`.
//
// A run is described by one JSON document. Any field can be overridden on
// the command line by its dotted name (`--run.delta 0.5`); values are parsed
// as JSON when possible and kept as strings otherwise.

#include "ssiter/analysis.hpp"
#include "ssiter/topology.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ssiter::cli {

enum ExitCode : int { ok = 0, violations = 1, config_error = 2 };

using nlohmann::json;

/// Sets `key` (dot separated) in `config`, creating objects on the way.
void apply_override(json& config, std::string_view key, std::string_view value);

/// Seed for a named component: explicit `<section>.seed` wins, otherwise
/// it is mixed from the top-level `seed` and the component name.
[[nodiscard]] std::uint64_t component_seed(const json& config, std::string_view component,
                                           const std::optional<std::uint64_t>& explicit_seed);

[[nodiscard]] TopologySpec parse_topology(const json& config);

enum class CenterKind { explicit_vector, uniform };
enum class InitialKind { zero, fixed_point, random, explicit_vector };
enum class InputKind { uniform, corner, constant, csv };
enum class SchedulerKind { round_robin, random };

struct RunConfig {
    TopologySpec topology;
    ExecutionModel model = ExecutionModel::sync;
    double delta = 0.0;

    CenterKind center_kind = CenterKind::uniform;
    std::vector<double> center;  // explicit_vector
    double center_range = 1.0;
    std::uint64_t center_seed = 0;

    std::size_t length = 200;  // rounds (sync) or atomic steps (async)

    InitialKind initial_kind = InitialKind::random;
    std::vector<double> initial;  // explicit_vector
    double initial_range = 10.0;
    std::uint64_t initial_seed = 0;

    InputKind input_kind = InputKind::uniform;
    std::uint64_t input_seed = 0;
    std::filesystem::path input_path;  // csv

    SchedulerKind scheduler = SchedulerKind::round_robin;
    std::size_t fairness_window = 0;  // 0: 10 n
    std::uint64_t scheduler_seed = 0;

    std::size_t thinning = 1;
    std::string trajectory_file = "trajectory.csv";
    std::string report_file = "report.json";
};

[[nodiscard]] RunConfig parse_run_config(const json& config);

struct HeatmapConfig {
    TopologySpec topology;
    std::vector<double> delta_values;
    std::vector<std::size_t> iteration_counts;
    std::size_t trials = 32;
    std::uint64_t seed = 0;
    HeatmapOptions options;
    std::string output_file = "heatmap.csv";
};

[[nodiscard]] HeatmapConfig parse_heatmap_config(const json& config);

int cmd_gen_topology(const json& config, const std::filesystem::path& out_dir, std::ostream& log);
int cmd_run(const json& config, const std::filesystem::path& out_dir, std::ostream& log);
int cmd_heatmap(const json& config, const std::filesystem::path& out_dir, std::ostream& log);

/// Full command-line entry point; returns the process exit code.
int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace ssiter::cli
