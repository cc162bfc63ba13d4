#pragma once

// delta-bounded input sequences: every vector lies in the closed
// infinity-norm ball of radius delta around a center v.

#include "ssiter/linalg.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

namespace ssiter {

struct InputSequence {
    Vector center;
    double delta = 0.0;
    std::vector<Vector> vectors;
    std::uint64_t seed = 0;

    [[nodiscard]] std::size_t size() const noexcept { return vectors.size(); }
    [[nodiscard]] std::size_t dimension() const noexcept { return static_cast<std::size_t>(center.size()); }
    [[nodiscard]] const Vector& operator[](std::size_t k) const { return vectors[k]; }
};

[[nodiscard]] InputSequence constant_sequence(const Vector& v, std::size_t len);

/// v + e with each component of e uniform on [-delta, delta].
[[nodiscard]] InputSequence bounded_random_sequence(const Vector& v, double delta, std::size_t len,
                                                    std::uint64_t seed);

/// Worst-case corners: every component is exactly v_i +/- delta, signs drawn
/// independently per round and node.
[[nodiscard]] InputSequence corner_sequence(const Vector& v, double delta, std::size_t len, std::uint64_t seed);

/// True iff ||x - v|| <= delta for every vector x of the sequence (exact comparison).
[[nodiscard]] bool verify_bounded(const InputSequence& seq, const Vector& v, double delta);

/// D(k) = I(k) - center for every k.
[[nodiscard]] std::vector<Vector> deviations(const InputSequence& seq);

/// One row per round, n comma-separated decimals. The center is the
/// componentwise midrange and delta the largest deviation from it.
[[nodiscard]] InputSequence parse_input_csv(std::string_view text);
[[nodiscard]] InputSequence load_input_csv(const std::filesystem::path& path);

}  // namespace ssiter
