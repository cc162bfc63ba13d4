#include "ssiter/analysis.hpp"

#include "ssiter/csv.hpp"
#include "ssiter/error.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <random>
#include <string>
#include <thread>

namespace ssiter {

namespace {

Eigen::Index idx(std::size_t i) { return static_cast<Eigen::Index>(i); }

void require_contraction(double b_norm) {
    if (!(b_norm < 1.0) || !(b_norm >= 0.0)) {
        throw NotDominantError("envelope needs 0 <= ||B|| < 1, got " + std::to_string(b_norm), 0);
    }
}

const char* to_cstr(ExecutionModel m) { return m == ExecutionModel::sync ? "sync" : "async"; }

}  // namespace

double envelope_sync(double delta, double a_norm, double b_norm, double c0_norm, std::size_t dt) {
    require_contraction(b_norm);
    return delta * (a_norm / (1.0 - b_norm)) + std::pow(b_norm, static_cast<double>(dt)) * c0_norm;
}

double envelope_sync(double delta, const IterationPair& pair, double c0_norm, std::size_t dt) {
    return envelope_sync(delta, pair.a_norm(), pair.b_norm(), c0_norm, dt);
}

double envelope_async(double delta, double b_norm, double z, std::size_t rounds) {
    require_contraction(b_norm);
    return delta * (1.0 / (1.0 - b_norm)) + std::pow(b_norm, static_cast<double>(rounds)) * z;
}

double envelope_tolerance(double envelope) { return 1e-9 * std::max(1.0, envelope); }

double initial_error_radius(const AsyncState& state, const AsyncNetwork& network, const Vector& u,
                            const Vector& center, double b_norm) {
    require_contraction(b_norm);
    const std::size_t n = network.size();
    const AlgorithmWeights& w = network.weights();
    double z = 0.0;
    for (std::size_t i = 0; i < n; ++i) z = std::max(z, std::abs(state.output_snapshot(idx(i)) - u(idx(i))));
    for (std::size_t reg = 0; reg < network.register_count(); ++reg) {
        const std::size_t writer = network.register_edge(reg).first;
        z = std::max(z, std::abs(state.registers[reg] - u(idx(writer))));
    }
    for (std::size_t i = 0; i < n; ++i) {
        const ProgramCounter pc = normalize(state.pc[i], network, i);
        if (pc.line == Line::write && !network.write_registers(i).empty()) {
            z = std::max(z, std::abs(state.local_accum(idx(i)) - u(idx(i))));
        } else if (pc.line == Line::read) {
            // The publication will be acc + sum over the remaining reads; its
            // error is the pending error plus at most ||B|| times a level-0 error.
            double pending = state.local_accum(idx(i)) - w.self_weight(idx(i)) * center(idx(i));
            const auto& peers = network.read_peers(i);
            for (std::size_t k = 0; k < pc.index; ++k) {
                pending -= w.neighbor_weight(idx(i), idx(peers[k])) * u(idx(peers[k]));
            }
            z = std::max(z, std::abs(pending) / (1.0 - b_norm));
        }
    }
    return z;
}

ConvergenceReport check_trajectory(const SyncTrajectory& traj, const InputSequence& seq, const WeightMatrix& w) {
    if (seq.dimension() != w.size() || static_cast<std::size_t>(traj.initial.outputs.size()) != w.size()) {
        throw DimensionError("trajectory, input sequence and weight matrix dimensions disagree");
    }
    const IterationPair pair = derive_iteration_pair(w);
    ConvergenceReport report;
    report.model = ExecutionModel::sync;
    report.u = solve_direct(w, seq.center);
    report.delta = seq.delta;
    report.a_norm = pair.a_norm();
    report.b_norm = pair.b_norm();
    report.c1 = pair.a_norm() / (1.0 - pair.b_norm());
    report.c2 = pair.b_norm();
    report.initial_error = inf_norm_vector(traj.initial.outputs - report.u);

    for (std::size_t k = 0; k < traj.outputs_per_round.size(); ++k) {
        const auto dt = static_cast<std::size_t>(traj.recorded_rounds[k]);
        const double err = inf_norm_vector(traj.outputs_per_round[k] - report.u);
        const double env = envelope_sync(seq.delta, pair, report.initial_error, dt);
        report.steps.push_back(dt);
        report.round_index.push_back(dt);
        report.per_step_error.push_back(err);
        report.per_step_envelope.push_back(env);
        if (err > env + envelope_tolerance(env)) report.violations.push_back({dt, err, env});
    }
    return report;
}

ConvergenceReport check_trajectory(const AsyncTrajectory& traj, const AsyncNetwork& network, const InputSequence& seq,
                                   const WeightMatrix& w, RoundRule rule) {
    if (seq.dimension() != w.size() || network.size() != w.size()) {
        throw DimensionError("trajectory, input sequence and weight matrix dimensions disagree");
    }
    const IterationPair pair = derive_iteration_pair(w);
    ConvergenceReport report;
    report.model = ExecutionModel::async;
    report.u = solve_direct(w, seq.center);
    report.delta = seq.delta;
    report.a_norm = pair.a_norm();
    report.b_norm = pair.b_norm();
    report.c1 = 1.0 / (1.0 - pair.b_norm());
    report.c2 = pair.b_norm();
    report.initial_error = initial_error_radius(traj.initial, network, report.u, seq.center, pair.b_norm());

    const auto rounds = round_of_steps(traj.steps(), traj.boundaries(rule));
    report.steps.reserve(traj.steps() + 1);
    traj.for_each_snapshot([&](std::size_t k, const Vector& snap) {
        const std::size_t round = k == 0 ? 0 : rounds[k - 1];
        const double err = inf_norm_vector(snap - report.u);
        const double env = envelope_async(seq.delta, pair.b_norm(), report.initial_error, round);
        report.steps.push_back(k);
        report.round_index.push_back(round);
        report.per_step_error.push_back(err);
        report.per_step_envelope.push_back(env);
        if (err > env + envelope_tolerance(env)) report.violations.push_back({k, err, env});
    });
    return report;
}

nlohmann::json to_json(const ConvergenceReport& report) {
    nlohmann::json j;
    j["model"] = to_cstr(report.model);
    j["u"] = std::vector<double>(report.u.data(), report.u.data() + report.u.size());
    j["delta"] = report.delta;
    j["a_norm"] = report.a_norm;
    j["b_norm"] = report.b_norm;
    j["c1"] = report.c1;
    j["c2"] = report.c2;
    j["initial_error"] = report.initial_error;
    j["tolerance"] = report.tolerance;
    j["steps"] = report.steps;
    j["round_index"] = report.round_index;
    j["per_step_error"] = report.per_step_error;
    j["per_step_envelope"] = report.per_step_envelope;
    j["violations"] = nlohmann::json::array();
    for (const Violation& v : report.violations) {
        j["violations"].push_back({{"step", v.step}, {"error", v.error}, {"envelope", v.envelope}});
    }
    return j;
}

HeatmapGrid heatmap_experiment(const TopologySpec& spec, const std::vector<double>& delta_values,
                               const std::vector<std::size_t>& iteration_counts, std::size_t trials,
                               std::uint64_t seed, const HeatmapOptions& options) {
    if (delta_values.empty() || iteration_counts.empty()) throw ConfigError("heatmap axes must be nonempty");
    if (trials == 0) throw ConfigError("heatmap needs at least one trial");
    for (double d : delta_values) {
        if (!(d >= 0.0) || !std::isfinite(d)) throw ConfigError("heatmap delta values must be finite and >= 0");
    }

    const WeightMatrix w = build_topology(spec);
    const IterationPair pair = derive_iteration_pair(w);
    const DirectSolver solver(w);
    const auto n = idx(w.size());
    const std::size_t horizon = *std::max_element(iteration_counts.begin(), iteration_counts.end());

    HeatmapGrid grid;
    grid.delta_values = delta_values;
    grid.iteration_counts = iteration_counts;
    grid.cells.assign(delta_values.size(), std::vector<double>(iteration_counts.size(), 0.0));
    grid.trials = trials;
    grid.seed = seed;
    grid.a_norm = pair.a_norm();
    grid.b_norm = pair.b_norm();

    const auto run_row = [&](std::size_t d) {
        std::vector<double>& row = grid.cells[d];
        for (std::size_t t = 0; t < trials; ++t) {
            std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                              static_cast<std::uint32_t>(d), static_cast<std::uint32_t>(t)};
            std::mt19937_64 rng(seq);
            std::uniform_real_distribution<double> center_dist(-options.center_range, options.center_range);
            std::uniform_real_distribution<double> init_dist(-options.initial_range, options.initial_range);
            Vector v(n), o0(n);
            for (Eigen::Index i = 0; i < n; ++i) v(i) = center_dist(rng);
            for (Eigen::Index i = 0; i < n; ++i) o0(i) = init_dist(rng);
            const std::uint64_t input_seed = rng();
            const Vector u = solver.solve(v);

            SyncConfiguration config{o0, 0};
            std::size_t done = 0;
            const InputSequence inputs = horizon > 0
                                             ? bounded_random_sequence(v, delta_values[d], horizon, input_seed)
                                             : constant_sequence(v, 1);
            // Iteration counts may be unsorted; walk them in ascending order.
            std::vector<std::size_t> order(iteration_counts.size());
            for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
            std::sort(order.begin(), order.end(),
                      [&](std::size_t a, std::size_t b) { return iteration_counts[a] < iteration_counts[b]; });
            for (std::size_t k : order) {
                while (done < iteration_counts[k]) config = sync_step(config, inputs[done++], pair);
                row[k] += inf_norm_vector(config.outputs - u);
            }
        }
        for (double& cell : row) cell /= static_cast<double>(trials);
    };

    std::size_t threads = options.threads ? options.threads : std::max(1u, std::thread::hardware_concurrency());
    threads = std::min(threads, delta_values.size());
    if (threads <= 1) {
        for (std::size_t d = 0; d < delta_values.size(); ++d) run_row(d);
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t t = 0; t < threads; ++t) {
            pool.emplace_back([&, t] {
                for (std::size_t d = t; d < delta_values.size(); d += threads) run_row(d);
            });
        }
    }
    return grid;
}

void write_heatmap_csv(std::ostream& out, const HeatmapGrid& grid) {
    out << "delta,iterations,mean_linf\n";
    for (std::size_t d = 0; d < grid.delta_values.size(); ++d) {
        for (std::size_t k = 0; k < grid.iteration_counts.size(); ++k) {
            out << csv::real(grid.delta_values[d]) << ',' << grid.iteration_counts[k] << ','
                << csv::real(grid.cells[d][k]) << '\n';
        }
    }
}

std::vector<double> log_space(double lo, double hi, std::size_t count) {
    if (!(lo > 0.0) || !(hi >= lo) || count == 0) throw ConfigError("log_space needs 0 < lo <= hi and count >= 1");
    if (count == 1) return {lo};
    std::vector<double> out(count);
    const double a = std::log10(lo);
    const double b = std::log10(hi);
    for (std::size_t k = 0; k < count; ++k) {
        out[k] = std::pow(10.0, a + (b - a) * static_cast<double>(k) / static_cast<double>(count - 1));
    }
    out.front() = lo;
    out.back() = hi;
    return out;
}

std::vector<std::size_t> log_space_counts(std::size_t lo, std::size_t hi, std::size_t count) {
    std::vector<std::size_t> out;
    for (double x : log_space(static_cast<double>(lo), static_cast<double>(hi), count)) {
        const auto v = static_cast<std::size_t>(std::llround(x));
        if (out.empty() || out.back() != v) out.push_back(v);
    }
    return out;
}

}  // namespace ssiter
