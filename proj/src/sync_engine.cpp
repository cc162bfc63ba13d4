#include "ssiter/sync_engine.hpp"

#include "ssiter/csv.hpp"
#include "ssiter/error.hpp"

#include <ostream>
#include <string>

namespace ssiter {

namespace {

void require_dim(const Vector& v, std::size_t n, const char* what) {
    if (static_cast<std::size_t>(v.size()) != n) {
        throw DimensionError(std::string(what) + " has dimension " + std::to_string(v.size()) + ", expected " +
                             std::to_string(n));
    }
}

}  // namespace

SyncConfiguration sync_step(const SyncConfiguration& config, const Vector& input, const IterationPair& pair) {
    const std::size_t n = pair.size();
    require_dim(config.outputs, n, "configuration");
    require_dim(input, n, "input vector");

    const Vector& a = pair.a_diagonal();
    const Matrix& b = pair.b();
    SyncConfiguration next{Vector(static_cast<Eigen::Index>(n)), config.round_index + 1};
    for (std::size_t i = 0; i < n; ++i) {
        const auto ii = static_cast<Eigen::Index>(i);
        double o = a(ii) * input(ii);
        for (std::size_t j : pair.neighbors(i)) {
            const auto jj = static_cast<Eigen::Index>(j);
            o += b(ii, jj) * config.outputs(jj);
        }
        next.outputs(ii) = o;
    }
    return next;
}

Vector matrix_form_step(const Vector& outputs, const Vector& input, const IterationPair& pair) {
    require_dim(outputs, pair.size(), "configuration");
    require_dim(input, pair.size(), "input vector");
    return pair.a() * input + pair.b() * outputs;
}

SyncTrajectory run_sync(const IterationPair& pair, const InputSequence& seq, const SyncConfiguration& initial,
                        const SyncRunOptions& options) {
    if (seq.size() == 0) throw Error("input sequence is empty");
    if (options.thinning == 0) throw Error("thinning must be at least 1");
    require_dim(initial.outputs, pair.size(), "initial configuration");

    SyncTrajectory traj{initial, {initial.outputs}, {0}, seq};
    traj.outputs_per_round.reserve(seq.size() / options.thinning + 2);
    SyncConfiguration current = initial;
    for (std::size_t k = 0; k < seq.size(); ++k) {
        current = sync_step(current, seq[k], pair);
        const std::size_t elapsed = k + 1;
        if (elapsed % options.thinning == 0 || elapsed == seq.size()) {
            traj.outputs_per_round.push_back(current.outputs);
            traj.recorded_rounds.push_back(static_cast<std::int64_t>(elapsed));
        }
    }
    return traj;
}

SyncConfiguration inject_fault(const SyncConfiguration& config, const Vector& corruption) {
    require_dim(corruption, static_cast<std::size_t>(config.outputs.size()), "corruption");
    return SyncConfiguration{corruption, config.round_index};
}

void write_sync_csv(std::ostream& out, const SyncTrajectory& trajectory) {
    const auto n = trajectory.initial.outputs.size();
    out << "round";
    for (Eigen::Index i = 0; i < n; ++i) out << ",node_" << i;
    out << '\n';
    for (std::size_t k = 0; k < trajectory.outputs_per_round.size(); ++k) {
        out << trajectory.initial.round_index + trajectory.recorded_rounds[k];
        for (Eigen::Index i = 0; i < n; ++i) out << ',' << csv::real(trajectory.outputs_per_round[k](i));
        out << '\n';
    }
}

}  // namespace ssiter
