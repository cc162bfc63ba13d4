#pragma once

// Weight-matrix generators for the circle and unit-disc experiment
// topologies, plus a text edge-file format.
//
// Every node spends `self_weight` on its own reading and spreads at most
// `neighbor_budget` of absolute algorithm weight over its neighbors. With
// 0 < self_weight <= 1 and 0 <= neighbor_budget < 1 this gives ||A|| =
// self_weight and ||B|| <= neighbor_budget, so the result is normalized
// diagonally dominant by construction.

#include "ssiter/linalg.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>

namespace ssiter {

enum class TopologyKind { circle, unit_disc, file };

struct TopologySpec {
    TopologyKind kind = TopologyKind::circle;
    std::size_t n = 100;
    double self_weight = 1.0 / 3.0;
    double neighbor_budget = 2.0 / 3.0;
    double plane_side = 6.75;      // unit-disc: points uniform in [0, plane_side]^2
    double connect_radius = 1.0;   // unit-disc edge threshold
    std::uint64_t seed = 0;
    bool random_signs = false;     // flip each neighbor weight's sign with probability 1/2
    bool require_connected = false;  // unit-disc: resample until the graph is connected
    std::filesystem::path path;    // kind == file
};

/// Throws ConfigError when the weight budget or sizes are out of range.
void validate(const TopologySpec& spec);

/// Node i listens to (i-1 mod n) and (i+1 mod n), each with weight neighbor_budget / 2.
[[nodiscard]] AlgorithmWeights circle_weights(std::size_t n, double self_weight, double neighbor_budget);
[[nodiscard]] WeightMatrix circle_graph(std::size_t n, double self_weight, double neighbor_budget);

/// Random geometric graph; node i gives neighbor_budget / deg(i) to each neighbor.
[[nodiscard]] AlgorithmWeights unit_disc_weights(const TopologySpec& spec);
[[nodiscard]] WeightMatrix unit_disc_graph(const TopologySpec& spec);

/// Edge-file text: `n <count>`, then `self <i> <w>` and `edge <i> <j> <w>` lines
/// (i receives from j). `#` starts a comment line. Validates dominance.
[[nodiscard]] AlgorithmWeights parse_edge_text(std::string_view text);
[[nodiscard]] AlgorithmWeights read_edge_file(const std::filesystem::path& path);
[[nodiscard]] WeightMatrix from_edge_file(const std::filesystem::path& path);

/// Emits every nonzero weight with 17 significant digits, so parsing the
/// output reproduces the weights bit for bit.
void write_edge_text(std::ostream& out, const AlgorithmWeights& weights);

/// Dispatch on spec.kind; the returned weights always pass check_normalized_dd
/// after conversion.
[[nodiscard]] AlgorithmWeights build_weights(const TopologySpec& spec);
[[nodiscard]] WeightMatrix build_topology(const TopologySpec& spec);

[[nodiscard]] std::string_view to_string(TopologyKind kind);
[[nodiscard]] TopologyKind parse_topology_kind(std::string_view name);

}  // namespace ssiter
