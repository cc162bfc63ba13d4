#include "ssiter/linalg.hpp"

#include "ssiter/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace ssiter {

namespace {

Eigen::Index idx(std::size_t i) { return static_cast<Eigen::Index>(i); }

std::vector<std::size_t> nonzero_off_diagonal(const Matrix& m, std::size_t row) {
    std::vector<std::size_t> out;
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
        if (static_cast<std::size_t>(j) != row && m(idx(row), j) != 0.0) out.push_back(static_cast<std::size_t>(j));
    }
    return out;
}

}  // namespace

WeightMatrix::WeightMatrix(Matrix entries) : entries_(std::move(entries)) {
    if (entries_.rows() != entries_.cols() || entries_.rows() == 0) {
        throw DimensionError("weight matrix must be square and nonempty, got " + std::to_string(entries_.rows()) +
                             "x" + std::to_string(entries_.cols()));
    }
    for (Eigen::Index i = 0; i < entries_.rows(); ++i) {
        if (entries_(i, i) == 0.0 || !std::isfinite(entries_(i, i))) {
            throw NotDominantError("zero or non-finite diagonal entry in row " + std::to_string(i),
                                   static_cast<std::size_t>(i));
        }
    }
}

std::vector<std::size_t> WeightMatrix::neighbors(std::size_t i) const { return nonzero_off_diagonal(entries_, i); }

std::vector<std::size_t> AlgorithmWeights::neighbors(std::size_t i) const {
    return nonzero_off_diagonal(neighbor_weight, i);
}

WeightMatrix to_weight_matrix(const AlgorithmWeights& weights) {
    const auto n = weights.self_weight.size();
    if (weights.neighbor_weight.rows() != n || weights.neighbor_weight.cols() != n) {
        throw DimensionError("neighbor weight matrix does not match node count");
    }
    Matrix w(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double self = weights.self_weight(i);
        if (self == 0.0) {
            throw NotDominantError("self weight of node " + std::to_string(i) + " is zero",
                                   static_cast<std::size_t>(i));
        }
        for (Eigen::Index j = 0; j < n; ++j) {
            w(i, j) = (i == j) ? 1.0 / self : -weights.neighbor_weight(i, j) / self;
        }
    }
    return WeightMatrix(std::move(w));
}

AlgorithmWeights to_algorithm_weights(const WeightMatrix& w) {
    const auto n = idx(w.size());
    const Matrix& m = w.entries();
    AlgorithmWeights out{Vector(n), Matrix::Zero(n, n)};
    for (Eigen::Index i = 0; i < n; ++i) {
        out.self_weight(i) = 1.0 / m(i, i);
        for (Eigen::Index j = 0; j < n; ++j) {
            if (i != j && m(i, j) != 0.0) out.neighbor_weight(i, j) = -m(i, j) / m(i, i);
        }
    }
    return out;
}

bool check_normalized_dd(const WeightMatrix& w) {
    const Matrix& m = w.entries();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        const double diag = std::abs(m(i, i));
        double off = 0.0;
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            if (j != i) off += std::abs(m(i, j));
        }
        if (!(diag > off) || !(diag >= 1.0)) return false;
    }
    return true;
}

void require_normalized_dd(const WeightMatrix& w) {
    const Matrix& m = w.entries();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        const double diag = std::abs(m(i, i));
        double off = 0.0;
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            if (j != i) off += std::abs(m(i, j));
        }
        if (!(diag >= 1.0)) {
            throw NotDominantError("row " + std::to_string(i) + ": |W_ii| = " + std::to_string(diag) + " < 1",
                                   static_cast<std::size_t>(i));
        }
        if (!(diag > off)) {
            throw NotDominantError("row " + std::to_string(i) + ": |W_ii| = " + std::to_string(diag) +
                                       " does not exceed off-diagonal sum " + std::to_string(off),
                                   static_cast<std::size_t>(i));
        }
    }
}

IterationPair derive_iteration_pair(const WeightMatrix& w) {
    require_normalized_dd(w);
    const AlgorithmWeights weights = to_algorithm_weights(w);
    const auto n = idx(w.size());

    IterationPair pair;
    pair.a_diag_ = weights.self_weight;
    pair.b_ = weights.neighbor_weight;
    pair.a_norm_ = pair.a_diag_.cwiseAbs().maxCoeff();
    pair.b_norm_ = inf_norm_matrix(pair.b_);
    pair.neighbors_.reserve(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) pair.neighbors_.push_back(weights.neighbors(static_cast<std::size_t>(i)));

    // normalized dominance gives ||A|| <= 1 and ||B|| < 1.
    if (!(pair.a_norm_ <= 1.0) || !(pair.b_norm_ < 1.0)) {
        throw NotDominantError("iteration pair violates ||A|| <= 1, ||B|| < 1 (a_norm = " +
                                   std::to_string(pair.a_norm_) + ", b_norm = " + std::to_string(pair.b_norm_) + ")",
                               0);
    }
    return pair;
}

double inf_norm_vector(const Vector& x) { return x.size() == 0 ? 0.0 : x.cwiseAbs().maxCoeff(); }

double inf_norm_matrix(const Matrix& m) {
    if (m.size() == 0) return 0.0;
    return m.cwiseAbs().rowwise().sum().maxCoeff();
}

DirectSolver::DirectSolver(const WeightMatrix& w) : w_(w.entries()), lu_(w.entries()) {}

Vector DirectSolver::solve(const Vector& v) const {
    if (v.size() != w_.rows()) {
        throw DimensionError("right-hand side has dimension " + std::to_string(v.size()) + ", expected " +
                             std::to_string(w_.rows()));
    }
    Vector u = lu_.solve(v);
    const double residual = inf_norm_vector(w_ * u - v);
    if (!(residual <= 1e-10 * std::max(1.0, inf_norm_vector(v)))) {
        throw Error("direct solve residual " + std::to_string(residual) + " exceeds tolerance");
    }
    return u;
}

Vector solve_direct(const WeightMatrix& w, const Vector& v) {
    require_normalized_dd(w);
    return DirectSolver(w).solve(v);
}

Vector closed_form_error(const IterationPair& pair, std::span<const Vector> deviations, const Vector& c0) {
    const auto n = idx(pair.size());
    if (c0.size() != n) throw DimensionError("c0 dimension does not match the system");
    Vector c = c0;
    for (const Vector& d : deviations) {
        if (d.size() != n) throw DimensionError("deviation dimension does not match the system");
        c = pair.a_diagonal().cwiseProduct(d) + pair.b() * c;
    }
    return c;
}

}  // namespace ssiter
