#include "ssiter/inputs.hpp"

#include "ssiter/error.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>
#include <string>

namespace ssiter {

namespace {

// v + e can round to a point whose recomputed distance from v exceeds delta
// by an ulp. Step it back toward v until the exact check passes.
double pull_into_ball(double x, double center, double delta) {
    while (std::abs(x - center) > delta) x = std::nextafter(x, center);
    return x;
}

InputSequence perturbed(const Vector& v, double delta, std::size_t len, std::uint64_t seed, bool corners) {
    if (!(delta >= 0.0) || !std::isfinite(delta)) {
        throw Error("delta must be a finite nonnegative number, got " + std::to_string(delta));
    }
    if (len == 0) throw Error("input sequence length must be positive");
    InputSequence seq{v, delta, {}, seed};
    seq.vectors.reserve(len);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> noise(-delta, delta);
    std::bernoulli_distribution sign(0.5);
    for (std::size_t k = 0; k < len; ++k) {
        Vector x(v.size());
        for (Eigen::Index i = 0; i < v.size(); ++i) {
            const double e = corners ? (sign(rng) ? delta : -delta) : (delta == 0.0 ? 0.0 : noise(rng));
            x(i) = pull_into_ball(v(i) + e, v(i), delta);
        }
        seq.vectors.push_back(std::move(x));
    }
    return seq;
}

}  // namespace

InputSequence constant_sequence(const Vector& v, std::size_t len) {
    if (len == 0) throw Error("input sequence length must be positive");
    return InputSequence{v, 0.0, std::vector<Vector>(len, v), 0};
}

InputSequence bounded_random_sequence(const Vector& v, double delta, std::size_t len, std::uint64_t seed) {
    return perturbed(v, delta, len, seed, false);
}

InputSequence corner_sequence(const Vector& v, double delta, std::size_t len, std::uint64_t seed) {
    return perturbed(v, delta, len, seed, true);
}

bool verify_bounded(const InputSequence& seq, const Vector& v, double delta) {
    for (const Vector& x : seq.vectors) {
        if (x.size() != v.size()) throw DimensionError("input vector dimension does not match the center");
        for (Eigen::Index i = 0; i < v.size(); ++i) {
            if (!(std::abs(x(i) - v(i)) <= delta)) return false;
        }
    }
    return true;
}

std::vector<Vector> deviations(const InputSequence& seq) {
    std::vector<Vector> out;
    out.reserve(seq.size());
    for (const Vector& x : seq.vectors) out.push_back(x - seq.center);
    return out;
}

InputSequence parse_input_csv(std::string_view text) {
    std::vector<std::vector<double>> rows;
    std::size_t line_no = 0;
    std::istringstream in{std::string(text)};
    std::string line;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos || line[line.find_first_not_of(" \t")] == '#') continue;
        std::vector<double> row;
        std::istringstream cells(line);
        std::string cell;
        while (std::getline(cells, cell, ',')) {
            char* end = nullptr;
            const double v = std::strtod(cell.c_str(), &end);
            if (end == cell.c_str() || cell.find_first_not_of(" \t", static_cast<std::size_t>(end - cell.c_str())) !=
                                           std::string::npos ||
                !std::isfinite(v)) {
                throw ParseError("input CSV line " + std::to_string(line_no) + ": `" + cell + "` is not a number",
                                 line_no);
            }
            row.push_back(v);
        }
        if (!rows.empty() && row.size() != rows.front().size()) {
            throw ParseError("input CSV line " + std::to_string(line_no) + ": expected " +
                                 std::to_string(rows.front().size()) + " values, got " + std::to_string(row.size()),
                             line_no);
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw ParseError("input CSV has no data rows", 0);

    const auto n = static_cast<Eigen::Index>(rows.front().size());
    Vector lo = Vector::Constant(n, std::numeric_limits<double>::infinity());
    Vector hi = Vector::Constant(n, -std::numeric_limits<double>::infinity());
    InputSequence seq;
    for (const auto& row : rows) {
        Vector x = Eigen::Map<const Vector>(row.data(), n);
        lo = lo.cwiseMin(x);
        hi = hi.cwiseMax(x);
        seq.vectors.push_back(std::move(x));
    }
    seq.center = lo + (hi - lo) / 2.0;
    seq.delta = 0.0;
    for (const Vector& x : seq.vectors) seq.delta = std::max(seq.delta, inf_norm_vector(x - seq.center));
    return seq;
}

InputSequence load_input_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open input CSV " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_input_csv(buffer.str());
}

}  // namespace ssiter
