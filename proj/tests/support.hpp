#pragma once

// Shared generators and independent oracles for the test binaries.

#include "ssiter/async_engine.hpp"
#include "ssiter/linalg.hpp"

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace ssiter::testing {

inline Eigen::Index ix(std::size_t i) { return static_cast<Eigen::Index>(i); }

/// Random algorithm weights whose W is normalized diagonally dominant:
/// |self| in (0.05, 1], neighbor mass strictly below 1, random signs.
inline AlgorithmWeights random_weights(std::size_t n, std::mt19937_64& rng, double density = 0.5) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    AlgorithmWeights w{Vector(ix(n)), Matrix::Zero(ix(n), ix(n))};
    for (std::size_t i = 0; i < n; ++i) {
        w.self_weight(ix(i)) = (0.05 + 0.95 * unit(rng)) * (unit(rng) < 0.5 ? -1.0 : 1.0);
        const double budget = 0.98 * unit(rng);
        std::vector<double> raw(n, 0.0);
        double total = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i || unit(rng) > density) continue;
            raw[j] = unit(rng) + 1e-3;
            total += raw[j];
        }
        if (total == 0.0) continue;
        for (std::size_t j = 0; j < n; ++j) {
            if (raw[j] == 0.0) continue;
            const double sign = unit(rng) < 0.5 ? -1.0 : 1.0;
            w.neighbor_weight(ix(i), ix(j)) = sign * budget * raw[j] / total;
        }
    }
    return w;
}

/// W drawn directly in W-space: |W_ii| >= 1 and off-diagonal mass strictly below |W_ii|.
inline Matrix random_dominant_matrix(std::size_t n, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    Matrix m = Matrix::Zero(ix(n), ix(n));
    for (std::size_t i = 0; i < n; ++i) {
        const double diag = (1.0 + 9.0 * unit(rng)) * (unit(rng) < 0.5 ? -1.0 : 1.0);
        m(ix(i), ix(i)) = diag;
        double mass = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            m(ix(i), ix(j)) = (2.0 * unit(rng) - 1.0);
            mass += std::abs(m(ix(i), ix(j)));
        }
        if (mass == 0.0) continue;
        const double target = std::abs(diag) * 0.999 * unit(rng);
        for (std::size_t j = 0; j < n; ++j) {
            if (j != i) m(ix(i), ix(j)) *= target / mass;
        }
    }
    return m;
}

inline Vector random_vector(std::size_t n, double range, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> dist(-range, range);
    Vector v(ix(n));
    for (std::size_t i = 0; i < n; ++i) v(ix(i)) = dist(rng);
    return v;
}

/// Row-sum norm by explicit loops, independent of the library.
inline double oracle_inf_norm(const Matrix& m) {
    double best = 0.0;
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        double s = 0.0;
        for (Eigen::Index j = 0; j < m.cols(); ++j) s += std::abs(m(i, j));
        best = std::max(best, s);
    }
    return best;
}

inline double oracle_inf_norm(const Vector& v) {
    double best = 0.0;
    for (Eigen::Index i = 0; i < v.size(); ++i) best = std::max(best, std::abs(v(i)));
    return best;
}

/// B = I - D^-1 W built entry by entry.
inline Matrix oracle_b(const Matrix& w) {
    Matrix b(w.rows(), w.cols());
    for (Eigen::Index i = 0; i < w.rows(); ++i) {
        for (Eigen::Index j = 0; j < w.cols(); ++j) b(i, j) = i == j ? 0.0 : -w(i, j) / w(i, i);
    }
    return b;
}

/// Gaussian elimination with partial pivoting, written out by hand.
inline Vector oracle_solve(Matrix m, Vector v) {
    const Eigen::Index n = m.rows();
    for (Eigen::Index k = 0; k < n; ++k) {
        Eigen::Index p = k;
        for (Eigen::Index r = k + 1; r < n; ++r) {
            if (std::abs(m(r, k)) > std::abs(m(p, k))) p = r;
        }
        m.row(k).swap(m.row(p));
        std::swap(v(k), v(p));
        for (Eigen::Index r = k + 1; r < n; ++r) {
            const double f = m(r, k) / m(k, k);
            for (Eigen::Index c = k; c < n; ++c) m(r, c) -= f * m(k, c);
            v(r) -= f * v(k);
        }
    }
    Vector x(n);
    for (Eigen::Index k = n - 1; k >= 0; --k) {
        double s = v(k);
        for (Eigen::Index c = k + 1; c < n; ++c) s -= m(k, c) * x(c);
        x(k) = s / m(k, k);
    }
    return x;
}

inline double rel_diff(const Vector& a, const Vector& b) {
    return oracle_inf_norm(Vector(a - b)) / std::max(1.0, oracle_inf_norm(b));
}

/// Every node does all of its writes, then every node resets and reads:
/// one synchronous round per repetition of the pattern.
inline std::vector<std::size_t> sync_emulation_pattern(const AsyncNetwork& network) {
    std::vector<std::size_t> pattern;
    for (std::size_t i = 0; i < network.size(); ++i) pattern.insert(pattern.end(), network.write_registers(i).size(), i);
    for (std::size_t i = 0; i < network.size(); ++i) pattern.insert(pattern.end(), 1 + network.read_registers(i).size(), i);
    return pattern;
}

}  // namespace ssiter::testing
