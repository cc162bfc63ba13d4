#pragma once

// Shared-register execution of the asynchronous update loop
//
//   02: for each out-neighbor j:   write O_i to R(i->j)
//   04: O_i := w_{p_i,p_i} * I_i
//   05: for each in-neighbor j:    read R(j->i) into temp
//   07:                            O_i += w_{p_i,p_j} * temp
//
// One atomic step is one register access (line 03 or lines 06-07), or the
// input read of line 04. Asynchrony is modelled by an explicit schedule of
// node indices, so every interleaving is a replayable input.

#include "ssiter/inputs.hpp"
#include "ssiter/linalg.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

namespace ssiter {

/// Register layout derived from the algorithm weights. R(i->j) exists iff
/// w_{p_j,p_i} != 0, i.e. j listens to i.
class AsyncNetwork {
public:
    explicit AsyncNetwork(AlgorithmWeights weights);

    [[nodiscard]] std::size_t size() const noexcept { return weights_.size(); }
    [[nodiscard]] const AlgorithmWeights& weights() const noexcept { return weights_; }

    /// Ascending j that node i reads from, and the matching register ids R(j->i).
    [[nodiscard]] const std::vector<std::size_t>& read_peers(std::size_t i) const { return read_peers_[i]; }
    [[nodiscard]] const std::vector<std::size_t>& read_registers(std::size_t i) const { return read_regs_[i]; }
    /// Ascending j that node i writes to, and the matching register ids R(i->j).
    [[nodiscard]] const std::vector<std::size_t>& write_peers(std::size_t i) const { return write_peers_[i]; }
    [[nodiscard]] const std::vector<std::size_t>& write_registers(std::size_t i) const { return write_regs_[i]; }

    [[nodiscard]] std::size_t register_count() const noexcept { return edges_.size(); }
    /// (writer, reader) of a register.
    [[nodiscard]] std::pair<std::size_t, std::size_t> register_edge(std::size_t reg) const { return edges_[reg]; }
    [[nodiscard]] std::optional<std::size_t> register_index(std::size_t writer, std::size_t reader) const;

    /// Atomic steps in one uninterrupted pass of node i.
    [[nodiscard]] std::size_t body_length(std::size_t i) const;

private:
    AlgorithmWeights weights_;
    std::vector<std::vector<std::size_t>> read_peers_, read_regs_, write_peers_, write_regs_;
    std::vector<std::pair<std::size_t, std::size_t>> edges_;  // sorted by (writer, reader)
};

enum class Line : std::uint8_t { write, reset, read };

struct ProgramCounter {
    Line line = Line::write;
    std::size_t index = 0;
    friend bool operator==(const ProgramCounter&, const ProgramCounter&) = default;
};

/// Complete volatile configuration. Every field may be corrupted; weights may not.
struct AsyncState {
    std::vector<double> registers;  // indexed by AsyncNetwork register id
    Vector local_accum;             // the node's working O_i
    Vector temp;                    // last register value read (line 06)
    std::vector<ProgramCounter> pc;
    Vector output_snapshot;         // last completed O_i, or the arbitrary initial value
};

/// Fault-free start: every node at line 02 holding `outputs`, registers
/// carrying their writer's output.
[[nodiscard]] AsyncState make_clean_state(const AsyncNetwork& network, const Vector& outputs);

/// Every real field uniform on center_i +/- range (registers use the
/// writer's center) and every program counter uniform over legal positions.
[[nodiscard]] AsyncState make_corrupted_state(const AsyncNetwork& network, const Vector& center, double range,
                                              std::uint64_t seed);

/// Illegal positions (indices past the end of a loop) map to line 02.
[[nodiscard]] ProgramCounter normalize(const ProgramCounter& pc, const AsyncNetwork& network, std::size_t node);

enum class ActionKind : std::uint8_t { write_register, read_input_and_reset, read_register };

struct AtomicStep {
    static constexpr std::size_t no_peer = std::numeric_limits<std::size_t>::max();

    std::size_t node = 0;
    ActionKind action = ActionKind::write_register;
    std::size_t peer = no_peer;     // other end of the register for register actions
    bool starts_pass = false;       // first action of lines 02-07
    bool ends_write_phase = false;  // last line-03 write (or a completed pass of a node with no writes)
    bool completes_pass = false;    // the loop of line 07 finished; output published
};

/// Executes the single action at the node's program counter, in place.
AtomicStep apply_atomic_step(AsyncState& state, std::size_t node, const AsyncNetwork& network, double input);

/// Value-semantics form of apply_atomic_step().
[[nodiscard]] AsyncState async_atomic_step(const AsyncState& state, std::size_t node, const AsyncNetwork& network,
                                           double input);

/// Picks which node takes the next atomic step. Every node appears at
/// least once in any fairness_window() consecutive picks.
class Schedule {
public:
    /// Nodes in turn; node i takes body_lengths[i] consecutive steps per turn
    /// (one step each when body_lengths is empty).
    static Schedule round_robin(std::size_t n, std::vector<std::size_t> body_lengths = {});
    /// Uniform picks, except that a node is forced whenever waiting longer
    /// would make the window unsatisfiable (earliest-deadline rule).
    static Schedule random_fair(std::size_t n, std::size_t fairness_window, std::uint64_t seed);
    /// Replays `nodes`, cycling when exhausted.
    static Schedule sequence(std::size_t n, std::vector<std::size_t> nodes);

    std::size_t next();
    [[nodiscard]] std::size_t node_count() const noexcept { return n_; }
    [[nodiscard]] std::size_t fairness_window() const noexcept { return window_; }

private:
    enum class Kind { round_robin, random_fair, sequence };
    Schedule(Kind kind, std::size_t n, std::size_t window) : kind_(kind), n_(n), window_(window) {}

    Kind kind_;
    std::size_t n_;
    std::size_t window_;
    std::vector<std::size_t> pattern_;  // round-robin expansion or explicit sequence
    std::size_t cursor_ = 0;
    std::mt19937_64 rng_;
    std::int64_t time_ = 0;
    std::vector<std::int64_t> last_pick_;
};

[[nodiscard]] Schedule make_round_robin_schedule(std::size_t n, std::vector<std::size_t> body_lengths = {});
[[nodiscard]] Schedule make_random_fair_schedule(std::size_t n, std::size_t fairness_window, std::uint64_t seed);

enum class RoundRule {
    /// Earliest boundary at which every node has completed a pass that
    /// started after the previous boundary.
    full_pass,
    /// As full_pass, but each node must also finish the line-03 writes of
    /// its following pass, so the completed value has reached its registers.
    published,
};

/// Greedy round partition of a trace. Each entry is a prefix length: round
/// k covers steps [b_k, b_{k+1}) with b_0 = 0 implicit.
[[nodiscard]] std::vector<std::size_t> round_boundaries(std::span<const AtomicStep> trace, std::size_t node_count,
                                                        RoundRule rule = RoundRule::full_pass);

/// Input value I_i(step) seen by a node reading its sensor at global step `step`.
using InputOracle = std::function<double(std::size_t step, std::size_t node)>;

/// I(step) = seq[step mod len].
[[nodiscard]] InputOracle cyclic_inputs(InputSequence seq);
/// I(step) = seq[min(step / block, len - 1)].
[[nodiscard]] InputOracle blocked_inputs(InputSequence seq, std::size_t block);

struct ReadRecord {
    std::size_t peer;
    double value;
    std::int64_t written_at;  // step index of the write, -1 for the initial content
    std::size_t read_at;
};

/// One completed pass with the provenance of everything it consumed.
struct PassRecord {
    std::size_t node;
    std::optional<std::size_t> reset_step;  // empty when the pass began mid-loop from a corrupted state
    double input;
    std::vector<ReadRecord> reads;
    std::size_t completed_at;
    double published;
};

struct AsyncRunOptions {
    bool record_provenance = false;
};

struct AsyncTrajectory {
    AsyncState initial;
    AsyncState final_state;
    std::vector<AtomicStep> trace;
    /// output_snapshot[trace[s].node] after step s; the other nodes are unchanged.
    std::vector<double> acting_output;
    std::vector<std::size_t> full_pass_boundaries;
    std::vector<std::size_t> published_boundaries;
    std::vector<PassRecord> passes;  // only with record_provenance

    [[nodiscard]] std::size_t steps() const noexcept { return trace.size(); }
    [[nodiscard]] const std::vector<std::size_t>& boundaries(RoundRule rule) const {
        return rule == RoundRule::full_pass ? full_pass_boundaries : published_boundaries;
    }
    /// Output vector after `steps` atomic steps (0 gives the initial snapshot).
    [[nodiscard]] Vector snapshot_after(std::size_t steps) const;
    /// Calls fn(step_count, snapshot) for 0..steps().
    void for_each_snapshot(const std::function<void(std::size_t, const Vector&)>& fn) const;
};

[[nodiscard]] AsyncTrajectory run_async(const AsyncNetwork& network, const InputOracle& inputs,
                                        const AsyncState& initial, Schedule& schedule, std::size_t steps,
                                        const AsyncRunOptions& options = {});

/// Round index (0-based, per `boundaries`) of every step.
[[nodiscard]] std::vector<std::size_t> round_of_steps(std::size_t steps, std::span<const std::size_t> boundaries);

/// CSV: `step,acting_node,action,round_index,node_0,...`; step 0 is the initial state.
/// `every` > 1 keeps every k-th step plus the last.
void write_async_csv(std::ostream& out, const AsyncTrajectory& trajectory, RoundRule rule = RoundRule::published,
                     std::size_t every = 1);

[[nodiscard]] std::string_view to_string(ActionKind action);

}  // namespace ssiter
