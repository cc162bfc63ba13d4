#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ssiter/error.hpp"
#include "ssiter/linalg.hpp"
#include "support.hpp"

#include <cmath>
#include <random>

using namespace ssiter;
using namespace ssiter::testing;

namespace {

WeightMatrix circle3() {
    Matrix m(3, 3);
    m << 3, -1, -1, -1, 3, -1, -1, -1, 3;
    return WeightMatrix(m);
}

}  // namespace

TEST_CASE("weight matrix construction rejects bad shapes and diagonals") {
    CHECK_THROWS_AS(WeightMatrix{Matrix(2, 3)}, DimensionError);
    CHECK_THROWS_AS(WeightMatrix{Matrix(0, 0)}, DimensionError);
    Matrix m = Matrix::Identity(3, 3);
    m(1, 1) = 0.0;
    CHECK_THROWS_AS(WeightMatrix{m}, NotDominantError);
    m(1, 1) = std::nan("");
    CHECK_THROWS_AS(WeightMatrix{m}, NotDominantError);
}

TEST_CASE("check_normalized_dd examples") {
    CHECK(check_normalized_dd(WeightMatrix(Matrix::Identity(3, 3))));
    CHECK(check_normalized_dd(circle3()));

    Matrix m = Matrix::Identity(3, 3);
    m(0, 1) = -0.6;
    m(0, 2) = -0.6;
    CHECK_FALSE(check_normalized_dd(WeightMatrix(m)));
}

TEST_CASE("dominance is strict and the diagonal must reach one") {
    Matrix equal(2, 2);
    equal << 2, -2, 0, 1;
    CHECK_FALSE(check_normalized_dd(WeightMatrix(equal)));

    Matrix small(2, 2);
    small << 0.5, 0.1, 0, 1;
    CHECK_FALSE(check_normalized_dd(WeightMatrix(small)));

    try {
        require_normalized_dd(WeightMatrix(small));
        FAIL("expected NotDominantError");
    } catch (const NotDominantError& e) {
        CHECK(e.row() == 0);
    }
}

TEST_CASE("derive_iteration_pair examples") {
    SUBCASE("identity") {
        const IterationPair p = derive_iteration_pair(WeightMatrix(Matrix::Identity(3, 3)));
        CHECK(p.a() == Matrix::Identity(3, 3));
        CHECK(p.b() == Matrix::Zero(3, 3));
        CHECK(p.a_norm() == 1.0);
        CHECK(p.b_norm() == 0.0);
    }
    SUBCASE("three-node circle") {
        const IterationPair p = derive_iteration_pair(circle3());
        for (Eigen::Index i = 0; i < 3; ++i) {
            CHECK(p.a()(i, i) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
            for (Eigen::Index j = 0; j < 3; ++j) {
                if (i != j) CHECK(p.b()(i, j) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
            }
            CHECK(p.b()(i, i) == 0.0);
        }
        CHECK(p.a_norm() == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
        CHECK(p.b_norm() == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
        CHECK(p.neighbors(0) == std::vector<std::size_t>{1, 2});
    }
    SUBCASE("non-dominant input is refused") {
        Matrix m = Matrix::Identity(2, 2);
        m(1, 0) = 1.0;
        CHECK_THROWS_AS((void)derive_iteration_pair(WeightMatrix(m)), NotDominantError);
    }
}

TEST_CASE("infinity norms") {
    CHECK(inf_norm_vector(Vector::Zero(3)) == 0.0);
    Vector x(3);
    x << 1, -3, 2;
    CHECK(inf_norm_vector(x) == 3.0);
    Vector y(1);
    y << -0.5;
    CHECK(inf_norm_vector(y) == 0.5);

    CHECK(inf_norm_matrix(Matrix::Zero(4, 4)) == 0.0);
    CHECK(inf_norm_matrix(Matrix::Identity(5, 5)) == 1.0);
    CHECK(inf_norm_matrix(derive_iteration_pair(circle3()).b()) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
}

TEST_CASE("solve_direct examples") {
    Vector v(3);
    v << 1, 2, 3;
    CHECK(solve_direct(WeightMatrix(Matrix::Identity(3, 3)), v) == v);

    const Vector u = solve_direct(circle3(), Vector::Ones(3));
    CHECK(inf_norm_vector(u - Vector::Ones(3)) <= 1e-14);

    std::mt19937_64 rng(7);
    const WeightMatrix w(random_dominant_matrix(10, rng));
    const Vector rhs = random_vector(10, 1.0, rng);
    const Vector sol = solve_direct(w, rhs);
    CHECK(inf_norm_vector(w.entries() * sol - rhs) <= 1e-10);

    CHECK_THROWS_AS((void)solve_direct(w, Vector::Ones(3)), DimensionError);
}

TEST_CASE("property: dominant matrices contract (1000 samples, n in [2, 50])") {
    std::mt19937_64 rng(20240601);
    std::uniform_int_distribution<std::size_t> size(2, 50);
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t n = size(rng);
        const Matrix m = random_dominant_matrix(n, rng);
        const WeightMatrix w(m);
        REQUIRE(check_normalized_dd(w));
        const IterationPair p = derive_iteration_pair(w);
        CHECK(p.a_norm() <= 1.0);
        CHECK(p.b_norm() < 1.0);
        CHECK(std::abs(p.b_norm() - oracle_inf_norm(oracle_b(m))) <= 1e-14);
    }
}

TEST_CASE("property: algorithm weights round trip") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 2 + trial % 30;
        const AlgorithmWeights aw = random_weights(n, rng);
        const AlgorithmWeights back = to_algorithm_weights(to_weight_matrix(aw));
        for (std::size_t i = 0; i < n; ++i) {
            CHECK(std::abs(back.self_weight(ix(i)) - aw.self_weight(ix(i))) <=
                  1e-12 * std::abs(aw.self_weight(ix(i))));
            for (std::size_t j = 0; j < n; ++j) {
                const double a = aw.neighbor_weight(ix(i), ix(j));
                CHECK(std::abs(back.neighbor_weight(ix(i), ix(j)) - a) <= 1e-12 * std::abs(a));
            }
        }
        CHECK(check_normalized_dd(to_weight_matrix(aw)));
    }
}

TEST_CASE("iteration pair weights are bitwise the algorithm weights") {
    std::mt19937_64 rng(5);
    const WeightMatrix w(random_dominant_matrix(12, rng));
    const IterationPair p = derive_iteration_pair(w);
    const AlgorithmWeights aw = to_algorithm_weights(w);
    CHECK(p.a_diagonal() == aw.self_weight);
    CHECK(p.b() == aw.neighbor_weight);
}

TEST_CASE("property: fixed point satisfies u = A v + B u") {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 2 + trial % 40;
        const WeightMatrix w(random_dominant_matrix(n, rng));
        const IterationPair p = derive_iteration_pair(w);
        const Vector v = random_vector(n, 5.0, rng);
        const Vector u = solve_direct(w, v);
        const double residual = inf_norm_vector(u - (p.a() * v + p.b() * u));
        CHECK(residual <= 1e-9 * std::max(1.0, inf_norm_vector(u)));
        CHECK(rel_diff(u, oracle_solve(w.entries(), v)) <= 1e-10);
    }
}

TEST_CASE("property: plain iteration lands on the direct solution") {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = 2 + trial % 20;
        const WeightMatrix w(random_dominant_matrix(n, rng));
        const IterationPair p = derive_iteration_pair(w);
        const Vector v = random_vector(n, 1.0, rng);
        const Vector u = solve_direct(w, v);
        // From the zero start the error is u itself, so the rounds scale with ||u||.
        const double start = std::max(1.0, inf_norm_vector(u));
        const auto rounds = p.b_norm() == 0.0 ? 1 : static_cast<int>(std::ceil(std::log(1e-8 / start) / std::log(p.b_norm())));
        Vector o = Vector::Zero(ix(n));
        for (int r = 0; r < rounds; ++r) o = p.a() * v + p.b() * o;
        CHECK(inf_norm_vector(o - u) <= 1e-6);
    }
}

TEST_CASE("closed_form_error") {
    const IterationPair p = derive_iteration_pair(circle3());
    Vector c0(3);
    c0 << 1, -2, 4;

    SUBCASE("empty history returns c0") { CHECK(closed_form_error(p, {}, c0) == c0); }

    SUBCASE("zero deviations give B^dt c0") {
        const std::vector<Vector> zeros(4, Vector::Zero(3));
        Vector expect = c0;
        for (int k = 0; k < 4; ++k) expect = p.b() * expect;
        CHECK(rel_diff(closed_form_error(p, zeros, c0), expect) <= 1e-14);
    }

    SUBCASE("agrees with explicit matrix powers") {
        std::mt19937_64 rng(99);
        for (int trial = 0; trial < 50; ++trial) {
            const std::size_t n = 2 + trial % 10;
            const WeightMatrix w(random_dominant_matrix(n, rng));
            const IterationPair q = derive_iteration_pair(w);
            const std::size_t dt = static_cast<std::size_t>(trial % 12);
            std::vector<Vector> d;
            for (std::size_t k = 0; k < dt; ++k) d.push_back(random_vector(n, 1.0, rng));
            const Vector c = random_vector(n, 10.0, rng);

            // sum_{j=0}^{dt-1} B^j A D(dt - j) + B^dt c0
            const Matrix b = oracle_b(w.entries());
            Matrix a = Matrix::Zero(ix(n), ix(n));
            for (std::size_t i = 0; i < n; ++i) a(ix(i), ix(i)) = 1.0 / w(i, i);
            Vector expect = Vector::Zero(ix(n));
            Matrix power = Matrix::Identity(ix(n), ix(n));
            for (std::size_t j = 0; j < dt; ++j) {
                expect += power * a * d[dt - 1 - j];
                power = power * b;
            }
            expect += power * c;
            CHECK(rel_diff(closed_form_error(q, d, c), expect) <= 1e-12);
        }
    }

    SUBCASE("dimension mismatch") {
        CHECK_THROWS_AS((void)closed_form_error(p, {}, Vector::Zero(2)), DimensionError);
    }
}
