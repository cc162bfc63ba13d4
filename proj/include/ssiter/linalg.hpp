#pragma once

// Dense linear algebra core: the system matrix W, the node-level algorithm
// weights it is built from, the Jacobi splitting W -> (A, B), infinity
// norms, a direct-solve oracle, and the closed-form error expression
//
//   c(dt) = sum_{j=0}^{dt-1} B^j A D(r+dt-j) + B^dt c(0).

#include <Eigen/Core>
#include <Eigen/LU>

#include <cstddef>
#include <span>
#include <vector>

namespace ssiter {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Square system matrix W of W u = v with a nonzero diagonal.
///
/// Construction validates shape and the diagonal only; normalized diagonal
/// dominance is checked separately by check_normalized_dd() and enforced by
/// derive_iteration_pair().
class WeightMatrix {
public:
    explicit WeightMatrix(Matrix entries);

    [[nodiscard]] std::size_t size() const noexcept { return static_cast<std::size_t>(entries_.rows()); }
    [[nodiscard]] const Matrix& entries() const noexcept { return entries_; }
    [[nodiscard]] double operator()(std::size_t i, std::size_t j) const {
        return entries_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }

    /// N(p_i): ascending j != i with a nonzero entry in row i.
    [[nodiscard]] std::vector<std::size_t> neighbors(std::size_t i) const;

    friend bool operator==(const WeightMatrix& a, const WeightMatrix& b) {
        return a.entries_.rows() == b.entries_.rows() && a.entries_ == b.entries_;
    }

private:
    Matrix entries_;
};

/// Per-node weights of the update rule
///   u_i = w_{p_i,p_i} v_i + sum_j w_{p_i,p_j} u_j.
/// These are static configuration ("part of the code") and never corrupted.
struct AlgorithmWeights {
    Vector self_weight;      // w_{p_i,p_i}, nonzero
    Matrix neighbor_weight;  // w_{p_i,p_j}, zero diagonal, zero iff j is not a neighbor

    [[nodiscard]] std::size_t size() const noexcept { return static_cast<std::size_t>(self_weight.size()); }
    /// Ascending j with neighbor_weight(i, j) != 0.
    [[nodiscard]] std::vector<std::size_t> neighbors(std::size_t i) const;
};

/// w_{i,i} = 1 / w_{p_i,p_i}, w_{i,j} = -w_{p_i,p_j} / w_{p_i,p_i}.
[[nodiscard]] WeightMatrix to_weight_matrix(const AlgorithmWeights& weights);

/// Inverse of to_weight_matrix(): w_{p_i,p_i} = 1 / W_ii, w_{p_i,p_j} = -W_ij / W_ii.
/// derive_iteration_pair() uses the same arithmetic, so A_ii and B_ij are
/// bitwise equal to the weights returned here.
[[nodiscard]] AlgorithmWeights to_algorithm_weights(const WeightMatrix& w);

/// Jacobi splitting A = diag(W)^-1, B = -(A W - I), with cached norms.
class IterationPair {
public:
    [[nodiscard]] std::size_t size() const noexcept { return static_cast<std::size_t>(b_.rows()); }
    [[nodiscard]] Matrix a() const { return a_diag_.asDiagonal(); }
    [[nodiscard]] const Vector& a_diagonal() const noexcept { return a_diag_; }
    [[nodiscard]] const Matrix& b() const noexcept { return b_; }
    [[nodiscard]] double a_norm() const noexcept { return a_norm_; }
    [[nodiscard]] double b_norm() const noexcept { return b_norm_; }
    /// Ascending column indices of the nonzero entries of row i of B.
    [[nodiscard]] const std::vector<std::size_t>& neighbors(std::size_t i) const { return neighbors_[i]; }

private:
    friend IterationPair derive_iteration_pair(const WeightMatrix& w);

    Vector a_diag_;
    Matrix b_;
    double a_norm_ = 0.0;
    double b_norm_ = 0.0;
    std::vector<std::vector<std::size_t>> neighbors_;
};

/// True iff |W_ii| > sum_{j != i} |W_ij| and |W_ii| >= 1 for every row.
/// Exact floating-point comparisons; no tolerance.
[[nodiscard]] bool check_normalized_dd(const WeightMatrix& w);

/// Throws NotDominantError naming the first row that fails.
void require_normalized_dd(const WeightMatrix& w);

/// Throws NotDominantError when W is not normalized diagonally dominant.
/// Asserts ||A|| <= 1 and ||B|| < 1 on the result.
[[nodiscard]] IterationPair derive_iteration_pair(const WeightMatrix& w);

[[nodiscard]] double inf_norm_vector(const Vector& x);

/// Induced infinity norm: the largest absolute row sum.
[[nodiscard]] double inf_norm_matrix(const Matrix& m);

/// LU factorisation of W kept for repeated solves with different v.
class DirectSolver {
public:
    explicit DirectSolver(const WeightMatrix& w);
    [[nodiscard]] Vector solve(const Vector& v) const;
    [[nodiscard]] std::size_t size() const noexcept { return static_cast<std::size_t>(w_.rows()); }

private:
    Matrix w_;
    Eigen::PartialPivLU<Matrix> lu_;
};

/// u with W u = v. Checks ||W u - v|| <= 1e-10 * max(1, ||v||).
[[nodiscard]] Vector solve_direct(const WeightMatrix& w, const Vector& v);

/// c(dt) for deviations D(r+1), ..., D(r+dt), accumulated as c <- A D(k) + B c.
[[nodiscard]] Vector closed_form_error(const IterationPair& pair, std::span<const Vector> deviations,
                                       const Vector& c0);

}  // namespace ssiter
