#pragma once

// Convergence envelopes and their runtime verification.
//
// Synchronous runs:  ||O(r+dt) - u|| <= delta * ||A|| / (1 - ||B||) + ||B||^dt * ||O(r) - u||
// Asynchronous runs: |O_i - u_i|     <= delta / (1 - ||B||) + ||B||^k * z,   k = completed rounds

#include "ssiter/async_engine.hpp"
#include "ssiter/inputs.hpp"
#include "ssiter/linalg.hpp"
#include "ssiter/sync_engine.hpp"
#include "ssiter/topology.hpp"

#include <json.hpp>

#include <cstdint>
#include <iosfwd>
#include <vector>

namespace ssiter {

enum class ExecutionModel { sync, async };

[[nodiscard]] double envelope_sync(double delta, const IterationPair& pair, double c0_norm, std::size_t dt);
[[nodiscard]] double envelope_sync(double delta, double a_norm, double b_norm, double c0_norm, std::size_t dt);
[[nodiscard]] double envelope_async(double delta, double b_norm, double z, std::size_t rounds);

/// Relative slack allowed for floating-point accumulation: 1e-9 * max(1, envelope).
[[nodiscard]] double envelope_tolerance(double envelope);

/// z for an arbitrary (possibly corrupted) asynchronous configuration: the
/// largest error of any value that can still flow into a published output.
/// Covers snapshots, registers (against the writer's u), the working value
/// of nodes in their write phase, and for nodes mid-read the pending partial
/// sum error scaled by 1 / (1 - ||B||). Equals max_i |O_i - u_i| for a clean state.
[[nodiscard]] double initial_error_radius(const AsyncState& state, const AsyncNetwork& network, const Vector& u,
                                          const Vector& center, double b_norm);

struct Violation {
    std::size_t step;
    double error;
    double envelope;
};

struct ConvergenceReport {
    ExecutionModel model = ExecutionModel::sync;
    Vector u;
    double delta = 0.0;
    double a_norm = 0.0;
    double b_norm = 0.0;
    double c1 = 0.0;
    double c2 = 0.0;
    /// ||O(r) - u|| for sync, z for async.
    double initial_error = 0.0;
    std::vector<std::size_t> steps;  // rounds (sync) or atomic-step counts (async)
    std::vector<std::size_t> round_index;
    std::vector<double> per_step_error;
    std::vector<double> per_step_envelope;
    std::vector<Violation> violations;
    double tolerance = 1e-9;

    [[nodiscard]] bool ok() const noexcept { return violations.empty(); }
};

/// Envelope check of a synchronous run against u = W^-1 center.
[[nodiscard]] ConvergenceReport check_trajectory(const SyncTrajectory& traj, const InputSequence& seq,
                                                 const WeightMatrix& w);

/// Envelope check of an asynchronous run; rounds are cut with `rule`.
[[nodiscard]] ConvergenceReport check_trajectory(const AsyncTrajectory& traj, const AsyncNetwork& network,
                                                 const InputSequence& seq, const WeightMatrix& w,
                                                 RoundRule rule = RoundRule::published);

[[nodiscard]] nlohmann::json to_json(const ConvergenceReport& report);

struct HeatmapGrid {
    std::vector<double> delta_values;
    std::vector<std::size_t> iteration_counts;
    /// cells[d][k]: mean final ||O - u|| for delta_values[d] after iteration_counts[k] rounds.
    std::vector<std::vector<double>> cells;
    std::size_t trials = 0;
    std::uint64_t seed = 0;
    double a_norm = 0.0;
    double b_norm = 0.0;
};

struct HeatmapOptions {
    double center_range = 1.0;   // v uniform on [-center_range, center_range]^n
    double initial_range = 10.0;  // O(0) uniform on [-initial_range, initial_range]^n
    std::size_t threads = 0;      // 0: hardware concurrency
};

/// Mean final error over `trials` runs per (delta, iterations) cell. Each
/// (delta, trial) pair is one trajectory read at every iteration count, seeded
/// from (seed, delta index, trial), so results do not depend on threading.
[[nodiscard]] HeatmapGrid heatmap_experiment(const TopologySpec& spec, const std::vector<double>& delta_values,
                                             const std::vector<std::size_t>& iteration_counts, std::size_t trials,
                                             std::uint64_t seed, const HeatmapOptions& options = {});

/// `delta,iterations,mean_linf`, values with 17 significant digits.
void write_heatmap_csv(std::ostream& out, const HeatmapGrid& grid);

/// count values log-spaced over [lo, hi] (inclusive).
[[nodiscard]] std::vector<double> log_space(double lo, double hi, std::size_t count);
/// Log-spaced integers over [lo, hi], rounded and deduplicated.
[[nodiscard]] std::vector<std::size_t> log_space_counts(std::size_t lo, std::size_t hi, std::size_t count);

}  // namespace ssiter
