#include "ssiter/async_engine.hpp"

#include "ssiter/csv.hpp"
#include "ssiter/error.hpp"

#include <algorithm>
#include <memory>
#include <numeric>
#include <ostream>
#include <string>

namespace ssiter {

namespace {

Eigen::Index idx(std::size_t i) { return static_cast<Eigen::Index>(i); }

void require_state_shape(const AsyncState& s, const AsyncNetwork& net) {
    const auto n = idx(net.size());
    if (s.registers.size() != net.register_count() || s.local_accum.size() != n || s.temp.size() != n ||
        s.pc.size() != net.size() || s.output_snapshot.size() != n) {
        throw DimensionError("async state does not match the network layout");
    }
}

}  // namespace

// ---------------------------------------------------------------------------
// AsyncNetwork

AsyncNetwork::AsyncNetwork(AlgorithmWeights weights) : weights_(std::move(weights)) {
    const std::size_t n = weights_.size();
    if (n == 0) throw DimensionError("network needs at least one node");
    if (static_cast<std::size_t>(weights_.neighbor_weight.rows()) != n ||
        static_cast<std::size_t>(weights_.neighbor_weight.cols()) != n) {
        throw DimensionError("neighbor weight matrix does not match node count");
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (weights_.self_weight(idx(i)) == 0.0) throw NotDominantError("zero self weight at node " + std::to_string(i), i);
    }

    // Registers sorted by (writer, reader) so ids are deterministic.
    for (std::size_t w = 0; w < n; ++w) {
        for (std::size_t r = 0; r < n; ++r) {
            if (w != r && weights_.neighbor_weight(idx(r), idx(w)) != 0.0) edges_.emplace_back(w, r);
        }
    }
    read_peers_.assign(n, {});
    read_regs_.assign(n, {});
    write_peers_.assign(n, {});
    write_regs_.assign(n, {});
    for (std::size_t reg = 0; reg < edges_.size(); ++reg) {
        const auto [w, r] = edges_[reg];
        write_peers_[w].push_back(r);
        write_regs_[w].push_back(reg);
    }
    // Reads in ascending writer order: edges_ is sorted by writer first.
    for (std::size_t reg = 0; reg < edges_.size(); ++reg) {
        const auto [w, r] = edges_[reg];
        read_peers_[r].push_back(w);
        read_regs_[r].push_back(reg);
    }
}

std::optional<std::size_t> AsyncNetwork::register_index(std::size_t writer, std::size_t reader) const {
    const auto key = std::make_pair(writer, reader);
    const auto it = std::lower_bound(edges_.begin(), edges_.end(), key);
    if (it == edges_.end() || *it != key) return std::nullopt;
    return static_cast<std::size_t>(it - edges_.begin());
}

std::size_t AsyncNetwork::body_length(std::size_t i) const {
    return write_regs_[i].size() + 1 + read_regs_[i].size();
}

// ---------------------------------------------------------------------------
// States and atomic steps

AsyncState make_clean_state(const AsyncNetwork& network, const Vector& outputs) {
    const auto n = idx(network.size());
    if (outputs.size() != n) throw DimensionError("initial outputs do not match the network");
    AsyncState s;
    s.registers.resize(network.register_count());
    for (std::size_t reg = 0; reg < network.register_count(); ++reg) {
        s.registers[reg] = outputs(idx(network.register_edge(reg).first));
    }
    s.local_accum = outputs;
    s.temp = Vector::Zero(n);
    s.pc.assign(network.size(), ProgramCounter{});
    s.output_snapshot = outputs;
    return s;
}

AsyncState make_corrupted_state(const AsyncNetwork& network, const Vector& center, double range,
                                std::uint64_t seed) {
    const auto n = idx(network.size());
    if (center.size() != n) throw DimensionError("corruption center does not match the network");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> noise(-range, range);
    AsyncState s;
    s.registers.resize(network.register_count());
    for (std::size_t reg = 0; reg < network.register_count(); ++reg) {
        s.registers[reg] = center(idx(network.register_edge(reg).first)) + noise(rng);
    }
    s.local_accum.resize(n);
    s.temp.resize(n);
    s.output_snapshot.resize(n);
    s.pc.resize(network.size());
    for (std::size_t i = 0; i < network.size(); ++i) {
        s.local_accum(idx(i)) = center(idx(i)) + noise(rng);
        s.temp(idx(i)) = noise(rng);
        s.output_snapshot(idx(i)) = center(idx(i)) + noise(rng);
        const std::size_t writes = network.write_registers(i).size();
        const std::size_t reads = network.read_registers(i).size();
        const std::size_t positions = std::max<std::size_t>(writes, 1) + 1 + reads;
        std::size_t p = std::uniform_int_distribution<std::size_t>(0, positions - 1)(rng);
        if (p < std::max<std::size_t>(writes, 1)) {
            s.pc[i] = {Line::write, p};
        } else if (p == std::max<std::size_t>(writes, 1)) {
            s.pc[i] = {Line::reset, 0};
        } else {
            s.pc[i] = {Line::read, p - std::max<std::size_t>(writes, 1) - 1};
        }
    }
    return s;
}

ProgramCounter normalize(const ProgramCounter& pc, const AsyncNetwork& network, std::size_t node) {
    const std::size_t writes = network.write_registers(node).size();
    const std::size_t reads = network.read_registers(node).size();
    switch (pc.line) {
        case Line::write:
            if (pc.index < writes || (writes == 0 && pc.index == 0)) return pc;
            break;
        case Line::reset:
            return {Line::reset, 0};
        case Line::read:
            if (pc.index < reads) return pc;
            break;
    }
    return {Line::write, 0};
}

AtomicStep apply_atomic_step(AsyncState& state, std::size_t node, const AsyncNetwork& network, double input) {
    if (node >= network.size()) throw DimensionError("node index " + std::to_string(node) + " out of range");
    const auto i = idx(node);
    ProgramCounter& pc = state.pc[node];
    pc = normalize(pc, network, node);
    const auto& writes = network.write_registers(node);
    const auto& reads = network.read_registers(node);

    AtomicStep step;
    step.node = node;

    // Lines 02-03: one register write.
    if (pc.line == Line::write && !writes.empty()) {
        step.action = ActionKind::write_register;
        step.peer = network.write_peers(node)[pc.index];
        step.starts_pass = pc.index == 0;
        state.registers[writes[pc.index]] = state.local_accum(i);
        if (++pc.index == writes.size()) {
            pc = {Line::reset, 0};
            step.ends_write_phase = true;
        }
        return step;
    }

    if (pc.line != Line::read) {
        // Line 04 (an empty write loop falls straight through to it).
        step.action = ActionKind::read_input_and_reset;
        step.starts_pass = writes.empty();
        state.local_accum(i) = network.weights().self_weight(i) * input;
        pc = {Line::read, 0};
    } else {
        // Lines 06-07.
        const std::size_t peer = network.read_peers(node)[pc.index];
        step.action = ActionKind::read_register;
        step.peer = peer;
        state.temp(i) = state.registers[reads[pc.index]];
        state.local_accum(i) += network.weights().neighbor_weight(i, idx(peer)) * state.temp(i);
        ++pc.index;
    }

    if (pc.index == reads.size()) {
        state.output_snapshot(i) = state.local_accum(i);
        pc = {Line::write, 0};
        step.completes_pass = true;
        if (writes.empty()) step.ends_write_phase = true;
    }
    return step;
}

AsyncState async_atomic_step(const AsyncState& state, std::size_t node, const AsyncNetwork& network, double input) {
    AsyncState next = state;
    apply_atomic_step(next, node, network, input);
    return next;
}

// ---------------------------------------------------------------------------
// Schedules

Schedule Schedule::round_robin(std::size_t n, std::vector<std::size_t> body_lengths) {
    if (n == 0) throw ConfigError("schedule needs at least one node");
    if (!body_lengths.empty() && body_lengths.size() != n) {
        throw ConfigError("round-robin body_lengths must have one entry per node");
    }
    std::vector<std::size_t> pattern;
    std::size_t shortest = std::numeric_limits<std::size_t>::max();
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t len = body_lengths.empty() ? 1 : body_lengths[i];
        if (len == 0) throw ConfigError("round-robin body length must be positive");
        shortest = std::min(shortest, len);
        pattern.insert(pattern.end(), len, i);
    }
    Schedule s(Kind::round_robin, n, pattern.size() - shortest + 1);
    s.pattern_ = std::move(pattern);
    return s;
}

Schedule Schedule::random_fair(std::size_t n, std::size_t fairness_window, std::uint64_t seed) {
    if (n == 0) throw ConfigError("schedule needs at least one node");
    if (fairness_window < n) {
        throw ConfigError("fairness window " + std::to_string(fairness_window) + " is smaller than the node count " +
                          std::to_string(n));
    }
    Schedule s(Kind::random_fair, n, fairness_window);
    s.rng_.seed(seed);
    s.last_pick_.assign(n, -1);
    return s;
}

Schedule Schedule::sequence(std::size_t n, std::vector<std::size_t> nodes) {
    if (n == 0 || nodes.empty()) throw ConfigError("explicit schedule needs nodes");
    for (std::size_t v : nodes) {
        if (v >= n) throw ConfigError("explicit schedule names node " + std::to_string(v) + " >= " + std::to_string(n));
    }
    // Longest cyclic gap between consecutive appearances of any node.
    std::size_t window = 0;
    for (std::size_t v = 0; v < n; ++v) {
        std::vector<std::size_t> at;
        for (std::size_t k = 0; k < nodes.size(); ++k) {
            if (nodes[k] == v) at.push_back(k);
        }
        if (at.empty()) {
            window = std::numeric_limits<std::size_t>::max();
            break;
        }
        for (std::size_t k = 0; k < at.size(); ++k) {
            const std::size_t next = (k + 1 < at.size()) ? at[k + 1] : at[0] + nodes.size();
            window = std::max(window, next - at[k]);
        }
        window = std::max(window, at[0] + 1);
    }
    Schedule s(Kind::sequence, n, window);
    s.pattern_ = std::move(nodes);
    return s;
}

std::size_t Schedule::next() {
    if (kind_ != Kind::random_fair) {
        const std::size_t v = pattern_[cursor_];
        cursor_ = (cursor_ + 1) % pattern_.size();
        return v;
    }
    // Node j must be picked no later than last_pick_[j] + window. If the k+1
    // most urgent deadlines all fall within the next k+1 picks, take the most
    // urgent one now.
    const auto window = static_cast<std::int64_t>(window_);
    std::vector<std::size_t> order(n_);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return last_pick_[a] != last_pick_[b] ? last_pick_[a] < last_pick_[b] : a < b;
    });
    std::optional<std::size_t> pick;
    for (std::size_t k = 0; k < n_; ++k) {
        if (last_pick_[order[k]] + window <= time_ + static_cast<std::int64_t>(k)) {
            pick = order[0];
            break;
        }
    }
    if (!pick) pick = std::uniform_int_distribution<std::size_t>(0, n_ - 1)(rng_);
    last_pick_[*pick] = time_++;
    return *pick;
}

Schedule make_round_robin_schedule(std::size_t n, std::vector<std::size_t> body_lengths) {
    return Schedule::round_robin(n, std::move(body_lengths));
}

Schedule make_random_fair_schedule(std::size_t n, std::size_t fairness_window, std::uint64_t seed) {
    return Schedule::random_fair(n, fairness_window, seed);
}

// ---------------------------------------------------------------------------
// Rounds

std::vector<std::size_t> round_boundaries(std::span<const AtomicStep> trace, std::size_t node_count, RoundRule rule) {
    enum Progress : std::uint8_t { idle, started, completed, published };
    const Progress target = rule == RoundRule::full_pass ? completed : published;
    std::vector<Progress> progress(node_count, idle);
    std::size_t satisfied = 0;
    std::vector<std::size_t> boundaries;

    for (std::size_t s = 0; s < trace.size(); ++s) {
        const AtomicStep& step = trace[s];
        if (step.node >= node_count) throw DimensionError("trace names a node outside the network");
        Progress& p = progress[step.node];
        const Progress before = p;
        if (step.starts_pass && p == idle) p = started;
        if (step.completes_pass && p == started) p = completed;
        if (rule == RoundRule::published && step.ends_write_phase && p == completed) p = published;
        if (before < target && p >= target) ++satisfied;
        if (satisfied == node_count) {
            boundaries.push_back(s + 1);
            std::fill(progress.begin(), progress.end(), idle);
            satisfied = 0;
        }
    }
    return boundaries;
}

std::vector<std::size_t> round_of_steps(std::size_t steps, std::span<const std::size_t> boundaries) {
    std::vector<std::size_t> rounds(steps);
    std::size_t k = 0;
    for (std::size_t s = 0; s < steps; ++s) {
        while (k < boundaries.size() && boundaries[k] <= s) ++k;
        rounds[s] = k;
    }
    return rounds;
}

// ---------------------------------------------------------------------------
// Runs

InputOracle cyclic_inputs(InputSequence seq) {
    if (seq.size() == 0) throw Error("input sequence is empty");
    auto shared = std::make_shared<const InputSequence>(std::move(seq));
    return [shared](std::size_t step, std::size_t node) {
        return shared->vectors[step % shared->size()](idx(node));
    };
}

InputOracle blocked_inputs(InputSequence seq, std::size_t block) {
    if (seq.size() == 0) throw Error("input sequence is empty");
    if (block == 0) throw Error("input block length must be positive");
    auto shared = std::make_shared<const InputSequence>(std::move(seq));
    return [shared, block](std::size_t step, std::size_t node) {
        return shared->vectors[std::min(step / block, shared->size() - 1)](idx(node));
    };
}

AsyncTrajectory run_async(const AsyncNetwork& network, const InputOracle& inputs, const AsyncState& initial,
                          Schedule& schedule, std::size_t steps, const AsyncRunOptions& options) {
    require_state_shape(initial, network);
    if (schedule.node_count() != network.size()) throw DimensionError("schedule node count does not match network");

    AsyncTrajectory traj;
    traj.initial = initial;
    traj.trace.reserve(steps);
    traj.acting_output.reserve(steps);
    AsyncState state = initial;

    std::vector<std::int64_t> written_at(network.register_count(), -1);
    std::vector<std::optional<PassRecord>> pending(network.size());

    for (std::size_t s = 0; s < steps; ++s) {
        const std::size_t node = schedule.next();
        const ProgramCounter pc = normalize(state.pc[node], network, node);
        const double input = inputs(s, node);
        const AtomicStep step = apply_atomic_step(state, node, network, input);
        traj.trace.push_back(step);
        traj.acting_output.push_back(state.output_snapshot(idx(node)));

        if (!options.record_provenance) continue;
        if (step.action == ActionKind::write_register) {
            written_at[network.write_registers(node)[pc.index]] = static_cast<std::int64_t>(s);
            continue;
        }
        auto& rec = pending[node];
        if (step.action == ActionKind::read_input_and_reset) {
            rec = PassRecord{node, s, input, {}, 0, 0.0};
        } else {
            if (!rec) rec = PassRecord{node, std::nullopt, 0.0, {}, 0, 0.0};
            const std::size_t reg = network.read_registers(node)[pc.index];
            rec->reads.push_back(ReadRecord{step.peer, state.registers[reg], written_at[reg], s});
        }
        if (step.completes_pass) {
            rec->completed_at = s;
            rec->published = state.output_snapshot(idx(node));
            traj.passes.push_back(std::move(*rec));
            rec.reset();
        }
    }

    traj.final_state = std::move(state);
    traj.full_pass_boundaries = round_boundaries(traj.trace, network.size(), RoundRule::full_pass);
    traj.published_boundaries = round_boundaries(traj.trace, network.size(), RoundRule::published);
    return traj;
}

Vector AsyncTrajectory::snapshot_after(std::size_t steps) const {
    if (steps > trace.size()) throw Error("snapshot requested past the end of the trajectory");
    Vector out = initial.output_snapshot;
    for (std::size_t s = 0; s < steps; ++s) out(idx(trace[s].node)) = acting_output[s];
    return out;
}

void AsyncTrajectory::for_each_snapshot(const std::function<void(std::size_t, const Vector&)>& fn) const {
    Vector out = initial.output_snapshot;
    fn(0, out);
    for (std::size_t s = 0; s < trace.size(); ++s) {
        out(idx(trace[s].node)) = acting_output[s];
        fn(s + 1, out);
    }
}

std::string_view to_string(ActionKind action) {
    switch (action) {
        case ActionKind::write_register: return "write_register";
        case ActionKind::read_input_and_reset: return "read_input_and_reset";
        case ActionKind::read_register: return "read_register";
    }
    return "unknown";
}

void write_async_csv(std::ostream& out, const AsyncTrajectory& trajectory, RoundRule rule, std::size_t every) {
    if (every == 0) throw Error("CSV thinning must be at least 1");
    const auto n = trajectory.initial.output_snapshot.size();
    const auto rounds = round_of_steps(trajectory.steps(), trajectory.boundaries(rule));
    out << "step,acting_node,action,round_index";
    for (Eigen::Index i = 0; i < n; ++i) out << ",node_" << i;
    out << '\n';
    trajectory.for_each_snapshot([&](std::size_t k, const Vector& snap) {
        if (k % every != 0 && k != trajectory.steps()) return;
        if (k == 0) {
            out << "0,,initial,0";
        } else {
            const AtomicStep& st = trajectory.trace[k - 1];
            out << k << ',' << st.node << ',' << to_string(st.action) << ',' << rounds[k - 1];
        }
        for (Eigen::Index i = 0; i < n; ++i) out << ',' << csv::real(snap(i));
        out << '\n';
    });
}

}  // namespace ssiter
