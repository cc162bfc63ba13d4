#include "ssiter/topology.hpp"

#include "ssiter/error.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <vector>

namespace ssiter {

namespace {

Eigen::Index idx(std::size_t i) { return static_cast<Eigen::Index>(i); }

void check_budget(double self_weight, double neighbor_budget) {
    if (!(self_weight > 0.0 && self_weight <= 1.0)) {
        throw ConfigError("self_weight must lie in (0, 1], got " + std::to_string(self_weight));
    }
    if (!(neighbor_budget >= 0.0 && neighbor_budget < 1.0)) {
        throw ConfigError("neighbor_budget must lie in [0, 1), got " + std::to_string(neighbor_budget));
    }
}

void flip_signs(AlgorithmWeights& weights, std::uint64_t seed) {
    std::mt19937_64 rng(seed ^ 0x5eed5197ULL);
    std::bernoulli_distribution coin(0.5);
    const auto n = weights.neighbor_weight.rows();
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            if (weights.neighbor_weight(i, j) != 0.0 && coin(rng)) weights.neighbor_weight(i, j) *= -1.0;
        }
    }
}

bool connected(const std::vector<std::vector<std::size_t>>& adjacency) {
    const std::size_t n = adjacency.size();
    std::vector<bool> seen(n, false);
    std::vector<std::size_t> stack{0};
    seen[0] = true;
    std::size_t count = 1;
    while (!stack.empty()) {
        const std::size_t v = stack.back();
        stack.pop_back();
        for (std::size_t w : adjacency[v]) {
            if (!seen[w]) {
                seen[w] = true;
                ++count;
                stack.push_back(w);
            }
        }
    }
    return count == n;
}

std::vector<std::string_view> split_ws(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
        const std::size_t start = i;
        while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
        if (i > start) out.push_back(line.substr(start, i - start));
    }
    return out;
}

std::optional<std::size_t> parse_index(std::string_view s) {
    std::size_t v = 0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size()) return std::nullopt;
    return v;
}

std::optional<double> parse_real(std::string_view s) {
    // strtod for portability of hex/inf spellings; reject trailing junk.
    const std::string tmp(s);
    char* end = nullptr;
    const double v = std::strtod(tmp.c_str(), &end);
    if (end != tmp.c_str() + tmp.size() || tmp.empty() || !std::isfinite(v)) return std::nullopt;
    return v;
}

}  // namespace

void validate(const TopologySpec& spec) {
    if (spec.kind == TopologyKind::file) {
        if (spec.path.empty()) throw ConfigError("file topology requires a path");
        return;
    }
    if (spec.n < 1) throw ConfigError("topology needs at least one node");
    check_budget(spec.self_weight, spec.neighbor_budget);
    if (spec.kind == TopologyKind::circle && spec.n < 3) {
        throw ConfigError("circle topology needs n >= 3, got " + std::to_string(spec.n));
    }
    if (spec.kind == TopologyKind::unit_disc) {
        if (!(spec.connect_radius > 0.0)) throw ConfigError("connect_radius must be positive");
        if (!(spec.plane_side > 0.0)) throw ConfigError("plane_side must be positive");
    }
}

AlgorithmWeights circle_weights(std::size_t n, double self_weight, double neighbor_budget) {
    if (n < 3) throw ConfigError("circle topology needs n >= 3, got " + std::to_string(n));
    check_budget(self_weight, neighbor_budget);
    const auto m = idx(n);
    AlgorithmWeights weights{Vector::Constant(m, self_weight), Matrix::Zero(m, m)};
    const double share = neighbor_budget / 2.0;
    if (share != 0.0) {
        for (Eigen::Index i = 0; i < m; ++i) {
            weights.neighbor_weight(i, (i + m - 1) % m) = share;
            weights.neighbor_weight(i, (i + 1) % m) = share;
        }
    }
    return weights;
}

WeightMatrix circle_graph(std::size_t n, double self_weight, double neighbor_budget) {
    return to_weight_matrix(circle_weights(n, self_weight, neighbor_budget));
}

AlgorithmWeights unit_disc_weights(const TopologySpec& spec) {
    TopologySpec checked = spec;
    checked.kind = TopologyKind::unit_disc;
    validate(checked);

    const std::size_t n = spec.n;
    std::mt19937_64 rng(spec.seed);
    std::uniform_real_distribution<double> coord(0.0, spec.plane_side);
    const double r2 = spec.connect_radius * spec.connect_radius;

    std::vector<std::vector<std::size_t>> adjacency;
    constexpr int kMaxAttempts = 10000;
    for (int attempt = 0;; ++attempt) {
        std::vector<double> xs(n), ys(n);
        for (std::size_t i = 0; i < n; ++i) {
            xs[i] = coord(rng);
            ys[i] = coord(rng);
        }
        adjacency.assign(n, {});
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) {
                const double dx = xs[i] - xs[j];
                const double dy = ys[i] - ys[j];
                if (dx * dx + dy * dy <= r2) {
                    adjacency[i].push_back(j);
                    adjacency[j].push_back(i);
                }
            }
        }
        if (!spec.require_connected || connected(adjacency)) break;
        if (attempt + 1 == kMaxAttempts) {
            throw ConfigError("no connected unit-disc sample after " + std::to_string(kMaxAttempts) + " attempts");
        }
    }

    const auto m = idx(n);
    AlgorithmWeights weights{Vector::Constant(m, spec.self_weight), Matrix::Zero(m, m)};
    for (std::size_t i = 0; i < n; ++i) {
        if (adjacency[i].empty() || spec.neighbor_budget == 0.0) continue;
        const double share = spec.neighbor_budget / static_cast<double>(adjacency[i].size());
        for (std::size_t j : adjacency[i]) weights.neighbor_weight(idx(i), idx(j)) = share;
    }
    if (spec.random_signs) flip_signs(weights, spec.seed);
    return weights;
}

WeightMatrix unit_disc_graph(const TopologySpec& spec) { return to_weight_matrix(unit_disc_weights(spec)); }

AlgorithmWeights parse_edge_text(std::string_view text) {
    std::optional<std::size_t> n;
    std::vector<std::optional<double>> self;
    std::vector<std::tuple<std::size_t, std::size_t, double>> edges;

    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t eol = text.find('\n', pos);
        const std::string_view line = text.substr(pos, eol == std::string_view::npos ? text.size() - pos : eol - pos);
        pos = (eol == std::string_view::npos) ? text.size() + 1 : eol + 1;
        ++line_no;

        const auto tokens = split_ws(line);
        if (tokens.empty() || tokens[0].front() == '#') continue;
        const auto fail = [&](const std::string& why) -> ParseError {
            return ParseError("edge file line " + std::to_string(line_no) + ": " + why, line_no);
        };

        if (tokens[0] == "n") {
            if (n) throw fail("duplicate node-count line");
            if (tokens.size() != 2) throw fail("expected `n <count>`");
            n = parse_index(tokens[1]);
            if (!n || *n == 0) throw fail("node count must be a positive integer");
            self.assign(*n, std::nullopt);
            continue;
        }
        if (!n) throw fail("the first directive must be `n <count>`");

        if (tokens[0] == "self") {
            if (tokens.size() != 3) throw fail("expected `self <i> <w>`");
            const auto i = parse_index(tokens[1]);
            const auto w = parse_real(tokens[2]);
            if (!i || *i >= *n) throw fail("node index out of range");
            if (!w) throw fail("weight is not a finite decimal number");
            if (self[*i]) throw fail("duplicate self weight for node " + std::to_string(*i));
            if (*w == 0.0) throw fail("self weight of node " + std::to_string(*i) + " is zero");
            self[*i] = *w;
        } else if (tokens[0] == "edge") {
            if (tokens.size() != 4) throw fail("expected `edge <i> <j> <w>`");
            const auto i = parse_index(tokens[1]);
            const auto j = parse_index(tokens[2]);
            const auto w = parse_real(tokens[3]);
            if (!i || *i >= *n || !j || *j >= *n) throw fail("node index out of range");
            if (*i == *j) throw fail("edge from a node to itself; use `self`");
            if (!w) throw fail("weight is not a finite decimal number");
            edges.emplace_back(*i, *j, *w);
        } else {
            throw fail("unknown directive `" + std::string(tokens[0]) + "`");
        }
    }
    if (!n) throw ParseError("edge file is missing the `n <count>` line", 0);

    const auto m = idx(*n);
    AlgorithmWeights weights{Vector(m), Matrix::Zero(m, m)};
    for (std::size_t i = 0; i < *n; ++i) {
        if (!self[i]) throw ParseError("edge file has no self weight for node " + std::to_string(i), 0);
        weights.self_weight(idx(i)) = *self[i];
    }
    for (const auto& [i, j, w] : edges) {
        if (weights.neighbor_weight(idx(i), idx(j)) != 0.0) {
            throw ParseError("duplicate edge " + std::to_string(i) + " " + std::to_string(j), 0);
        }
        weights.neighbor_weight(idx(i), idx(j)) = w;
    }
    require_normalized_dd(to_weight_matrix(weights));
    return weights;
}

AlgorithmWeights read_edge_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open edge file " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_edge_text(buffer.str());
}

WeightMatrix from_edge_file(const std::filesystem::path& path) { return to_weight_matrix(read_edge_file(path)); }

void write_edge_text(std::ostream& out, const AlgorithmWeights& weights) {
    char buf[64];
    const auto n = weights.self_weight.size();
    out << "n " << n << '\n';
    for (Eigen::Index i = 0; i < n; ++i) {
        std::snprintf(buf, sizeof buf, "%.17g", weights.self_weight(i));
        out << "self " << i << ' ' << buf << '\n';
        for (Eigen::Index j = 0; j < n; ++j) {
            if (i == j || weights.neighbor_weight(i, j) == 0.0) continue;
            std::snprintf(buf, sizeof buf, "%.17g", weights.neighbor_weight(i, j));
            out << "edge " << i << ' ' << j << ' ' << buf << '\n';
        }
    }
}

AlgorithmWeights build_weights(const TopologySpec& spec) {
    validate(spec);
    switch (spec.kind) {
        case TopologyKind::circle: {
            AlgorithmWeights w = circle_weights(spec.n, spec.self_weight, spec.neighbor_budget);
            if (spec.random_signs) flip_signs(w, spec.seed);
            return w;
        }
        case TopologyKind::unit_disc:
            return unit_disc_weights(spec);
        case TopologyKind::file:
            return read_edge_file(spec.path);
    }
    throw ConfigError("unknown topology kind");
}

WeightMatrix build_topology(const TopologySpec& spec) { return to_weight_matrix(build_weights(spec)); }

std::string_view to_string(TopologyKind kind) {
    switch (kind) {
        case TopologyKind::circle: return "circle";
        case TopologyKind::unit_disc: return "unit_disc";
        case TopologyKind::file: return "file";
    }
    return "unknown";
}

TopologyKind parse_topology_kind(std::string_view name) {
    if (name == "circle") return TopologyKind::circle;
    if (name == "unit_disc" || name == "unit-disc") return TopologyKind::unit_disc;
    if (name == "file") return TopologyKind::file;
    throw ConfigError("unknown topology kind `" + std::string(name) + "`");
}

}  // namespace ssiter
