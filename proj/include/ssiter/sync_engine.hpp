#pragma once

// Synchronous-round execution of the self-stabilizing iterative update
//
//   O_i(r+1) = w_{p_i,p_i} I_i(r+1) + sum_{j in N(i)} w_{p_i,p_j} O_j(r)
//
// evaluated per node with neighbors accumulated in ascending index order,
// so every run is bitwise reproducible.

#include "ssiter/inputs.hpp"
#include "ssiter/linalg.hpp"

#include <cstdint>
#include <iosfwd>
#include <vector>

namespace ssiter {

/// The single scalar each node stores. round_index is bookkeeping for the
/// observer; nodes never read it.
struct SyncConfiguration {
    Vector outputs;
    std::int64_t round_index = 0;
};

struct SyncTrajectory {
    SyncConfiguration initial;
    /// Recorded outputs, starting with the initial O(r).
    std::vector<Vector> outputs_per_round;
    /// Rounds elapsed since `initial` for each entry of outputs_per_round.
    std::vector<std::int64_t> recorded_rounds;
    InputSequence inputs_used;

    [[nodiscard]] const Vector& final_outputs() const { return outputs_per_round.back(); }
};

struct SyncRunOptions {
    /// Keep every k-th round (the final round is always kept).
    std::size_t thinning = 1;
};

[[nodiscard]] SyncConfiguration sync_step(const SyncConfiguration& config, const Vector& input,
                                          const IterationPair& pair);

/// A I + B O as a dense matrix expression. Agrees with sync_step up to
/// floating-point reassociation; used to cross-check the per-node form.
[[nodiscard]] Vector matrix_form_step(const Vector& outputs, const Vector& input, const IterationPair& pair);

[[nodiscard]] SyncTrajectory run_sync(const IterationPair& pair, const InputSequence& seq,
                                      const SyncConfiguration& initial, const SyncRunOptions& options = {});

/// Replaces every stored output; the round index is kept.
[[nodiscard]] SyncConfiguration inject_fault(const SyncConfiguration& config, const Vector& corruption);

/// CSV: `round,node_0,...,node_{n-1}`, one row per recorded round.
void write_sync_csv(std::ostream& out, const SyncTrajectory& trajectory);

}  // namespace ssiter
