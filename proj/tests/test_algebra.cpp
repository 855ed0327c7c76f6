#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>

#include "qpspec/grid.hpp"
#include "qpspec/mat2.hpp"
#include "qpspec/rng.hpp"
#include "qpspec/series.hpp"
#include "qpspec/weights.hpp"

using namespace qpspec;
using namespace qpspec::algebra;

namespace {

WeightScheme scheme1(double eta = 1.0) { return WeightScheme::uniform(1, eta); }

Mat2 random_traceless(Rng& rng, double scale) {
    auto c = [&] { return cplx(rng.uniform(-1, 1), rng.uniform(-1, 1)) * scale; };
    const cplx a = c();
    return {a, c(), c(), -a};
}

ScalarSeries random_scalar_series(Rng& rng, const WeightScheme& s, double h, int modes,
                                  int kmax) {
    ScalarSeries f(s, h);
    for (int m = 0; m < modes; ++m) {
        MultiIndex k(std::size_t(s.dim), 0);
        bool nonzero = false;
        for (auto& kj : k) {
            kj = int(std::floor(rng.uniform(-double(kmax), double(kmax) + 1)));
            nonzero |= kj != 0;
        }
        if (!nonzero) k[0] = 1;
        f.add(k, cplx(rng.uniform(-1, 1), rng.uniform(-1, 1)));
    }
    return f;
}

}  // namespace

TEST_CASE("weighted norm: zero vector, d=1, and the mixed d=3 evaluation") {
    CHECK(weighted_norm({0, 0, 0}, WeightScheme::uniform(3)) == 0.0);
    CHECK(weighted_norm({3}, scheme1()) == doctest::Approx(3.0));
    // <0> = <1> = 1 and <2> = 2, so (1,-2,1) weighs 1 + 2 + 2 = 5
    CHECK(weighted_norm({1, -2, 1}, WeightScheme::uniform(3, 1.0)) == doctest::Approx(5.0));
}

TEST_CASE("cone value") {
    ConeSpec cone{0.5, WeightScheme::uniform(2, 1.0)};
    CHECK(cone_value({0, 0}, cone) == 0.0);
    CHECK(cone_value({1, -1}, cone) == doctest::Approx(0.0));
    ConeSpec cone1{0.3, scheme1()};
    CHECK(cone_value({5}, cone1) == doctest::Approx(5.0));
}

TEST_CASE("cone membership: positive half-line in one dimension") {
    for (double r : {0.1, 0.5, 1.0}) {
        ConeSpec cone{r, scheme1()};
        CHECK(cone_contains({3}, cone));
        CHECK_FALSE(cone_contains({-1}, cone));
        CHECK_FALSE(cone_contains({0}, cone));
    }
}

TEST_CASE("cone additivity: random members of the cone stay closed under +") {
    Rng rng(7);
    ConeSpec cone{0.4, WeightScheme::uniform(2, 1.5)};
    std::vector<MultiIndex> members;
    for_each_index(cone.scheme, 12.0, [&](const MultiIndex& k) { members.push_back(k); },
                   &cone);
    REQUIRE(members.size() > 10);
    for (int t = 0; t < 200; ++t) {
        const auto& a = members[rng.next_u64() % members.size()];
        const auto& b = members[rng.next_u64() % members.size()];
        CHECK(cone_contains(add(a, b), cone));
    }
}

TEST_CASE("series norm: empty, one mode, two modes") {
    ScalarSeries empty(scheme1(), 0.5);
    CHECK(empty.norm() == 0.0);

    ScalarSeries one(scheme1(), 0.5);
    one.set({1}, cplx(0.0, 2.0));
    CHECK(one.norm() == doctest::Approx(2.0 * std::exp(0.5)));

    ScalarSeries two(scheme1(), 0.5);
    two.set({1}, 1.0);
    two.set({2}, 0.3);
    CHECK(two.norm() == doctest::Approx(std::exp(0.5) + 0.3 * std::exp(1.0)));
}

TEST_CASE("series product: annihilator, delta convolution, cone closure") {
    ScalarSeries f(scheme1(), 0.5);
    f.set({1}, 1.0);
    ScalarSeries zero(scheme1(), 0.5);
    auto fz = series_multiply(f, zero, 64.0);
    CHECK(fz.series.empty());
    CHECK(fz.dropped_mass == 0.0);

    auto ff = series_multiply(f, f, 64.0);
    REQUIRE(ff.series.size() == 1);
    CHECK(std::abs(ff.series.at({2}) - cplx(1.0)) < 1e-15);

    Rng rng(3);
    ConeSpec cone{0.4, WeightScheme::uniform(2, 1.0)};
    std::vector<MultiIndex> members;
    for_each_index(cone.scheme, 6.0, [&](const MultiIndex& k) { members.push_back(k); },
                   &cone);
    ScalarSeries a(cone.scheme, 0.3), b(cone.scheme, 0.3);
    for (int m = 0; m < 5; ++m) {
        a.add(members[rng.next_u64() % members.size()], cplx(rng.uniform(-1, 1), 0.0));
        b.add(members[rng.next_u64() % members.size()], cplx(rng.uniform(-1, 1), 0.0));
    }
    auto prod = series_multiply(a, b, 1e9);
    CHECK(prod.series.off_cone_mass(cone) == 0.0);
}

TEST_CASE("series product norms are submultiplicative before truncation") {
    Rng rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        auto f = random_scalar_series(rng, scheme1(), 0.4, 6, 5);
        auto g = random_scalar_series(rng, scheme1(), 0.4, 6, 5);
        auto fg = series_multiply(f, g, 1e9);
        CHECK(fg.dropped_mass == 0.0);
        CHECK(fg.series.norm() <= f.norm() * g.norm() * (1.0 + 1e-12));
    }
}

TEST_CASE("matrix series commutator norm bound") {
    Rng rng(13);
    WeightScheme s = scheme1();
    for (int trial = 0; trial < 10; ++trial) {
        MatSeries f(s, 0.4), g(s, 0.4);
        for (int m = 0; m < 4; ++m) {
            f.add({int(rng.next_u64() % 9) - 4}, random_traceless(rng, 0.7));
            g.add({int(rng.next_u64() % 9) - 4}, random_traceless(rng, 0.7));
        }
        MultiIndex zero{0};
        f.set(zero, Mat2::zero());
        g.set(zero, Mat2::zero());
        const MatSeries br = commutator(f, g, 1e9);
        CHECK(br.norm() <= 2.0 * f.norm() * g.norm() * (1.0 + 1e-12));
    }
}

TEST_CASE("truncation splits and reassembles exactly") {
    ScalarSeries f(scheme1(), 0.5);
    f.set({1}, 1.0);
    f.set({2}, cplx(0.0, 0.5));
    f.set({3}, -0.25);
    auto low = f.truncate_low(2.0);
    auto high = f.truncate_high(2.0);
    CHECK(low.size() == 2);
    CHECK(high.size() == 1);
    auto sum = low + high;
    for (const auto& [k, v] : f.coefficients()) CHECK(std::abs(sum.at(k) - v) == 0.0);

    CHECK(f.truncate_low(0.0).empty());
    CHECK(f.truncate_low(99.0).size() == f.size());
}

TEST_CASE("traceless exponential: identity, rotation, nilpotent shear") {
    CHECK(max_abs_entry(mat_exp_traceless(Mat2::zero()) - Mat2::identity()) < 1e-15);

    const double theta = 0.37;
    const Mat2 rot = mat_exp_traceless({cplx(0, theta), 0, 0, cplx(0, -theta)});
    CHECK(std::abs(rot.a - std::polar(1.0, theta)) < 1e-15);
    CHECK(std::abs(rot.d - std::polar(1.0, -theta)) < 1e-15);
    CHECK(std::abs(rot.b) == 0.0);

    const Mat2 shear = mat_exp_traceless({0.0, cplx(2.5, -1.0), 0.0, 0.0});
    CHECK(std::abs(shear.a - 1.0) < 1e-15);
    CHECK(std::abs(shear.b - cplx(2.5, -1.0)) < 1e-15);
    CHECK(std::abs(shear.c) == 0.0);
}

TEST_CASE("exponential is unimodular and log inverts it") {
    Rng rng(17);
    for (int trial = 0; trial < 50; ++trial) {
        Mat2 f = random_traceless(rng, 0.15);
        const Mat2 m = mat_exp_traceless(f);
        CHECK(std::abs(m.det() - 1.0) < 1e-12);
        const Mat2 back = mat_log_near_identity(m);
        CHECK(max_abs_entry(back - f) < 1e-12);
    }
    // canonical values
    CHECK(max_abs_entry(mat_log_near_identity(Mat2::identity())) == 0.0);
    const Mat2 diag{std::polar(1.0, 0.1), 0.0, 0.0, std::polar(1.0, -0.1)};
    const Mat2 l = mat_log_near_identity(diag);
    CHECK(std::abs(l.a - cplx(0.0, 0.1)) < 1e-14);
}

TEST_CASE("log rejects matrices far from the identity") {
    CHECK_THROWS(mat_log_near_identity(Mat2{3.0, 0.0, 0.0, 1.0 / 3.0}));
}

TEST_CASE("evaluation: empty series, single mode, complexified point") {
    ScalarSeries empty(scheme1(), 0.5);
    CHECK(std::abs(empty.evaluate({cplx(1.0, 0.0)})) == 0.0);

    ScalarSeries one(scheme1(), 0.5);
    one.set({1}, cplx(2.0, -1.0));
    CHECK(std::abs(one.evaluate({cplx(0.0, 0.0)}) - cplx(2.0, -1.0)) < 1e-15);

    ScalarSeries wave(scheme1(), 0.5);
    wave.set({1}, 1.0);
    const double eps = 0.3;
    CHECK(std::abs(wave.evaluate({cplx(0.0, eps)}) - std::exp(-eps)) < 1e-15);

    CHECK_THROWS(wave.evaluate({cplx(0.0, 0.7)}));  // outside the strip
}

TEST_CASE("grid recovery: constant zero, pure mode, random round trip") {
    WeightScheme s = scheme1();
    TorusGrid grid({8});
    detail::PhaseTable table(grid);

    std::vector<cplx> zeros(grid.total(), 0.0);
    auto rec0 = coefficients_from_grid<cplx>(zeros, grid, {{1}, {0}}, s, 0.5);
    rec0.series.prune();
    CHECK(rec0.series.empty());

    ScalarSeries wave(s, 0.5);
    wave.set({1}, 1.0);
    auto samples = series_grid_values(wave, grid, table);
    auto rec1 = coefficients_from_grid<cplx>(samples, grid, {{1}}, s, 0.5);
    CHECK(std::abs(rec1.series.at({1}) - 1.0) < 1e-14);
    CHECK(rec1.residual < 1e-14);

    Rng rng(23);
    for (int dim : {1, 2}) {
        WeightScheme sd = WeightScheme::uniform(dim, 1.0);
        auto f = random_scalar_series(rng, sd, 0.4, 5, 4);
        std::vector<MultiIndex> support;
        for (const auto& [k, v] : f.coefficients()) support.push_back(k);
        TorusGrid g2 = TorusGrid::for_support(support, dim);
        detail::PhaseTable t2(g2);
        auto vals = series_grid_values(f, g2, t2);
        auto rec = coefficients_from_grid<cplx>(vals, g2, support, sd, 0.4);
        for (const auto& [k, v] : f.coefficients())
            CHECK(std::abs(rec.series.at(k) - v) < 1e-12);
    }
}

TEST_CASE("grid recovery rejects too-coarse grids") {
    WeightScheme s = scheme1();
    TorusGrid grid({4});
    std::vector<cplx> samples(grid.total(), 0.0);
    CHECK_THROWS(coefficients_from_grid<cplx>(samples, grid, {{3}}, s, 0.5));
}

TEST_CASE("operator norm closed form agrees with the Frobenius bound") {
    Rng rng(29);
    for (int trial = 0; trial < 50; ++trial) {
        Mat2 m = random_traceless(rng, 1.0);
        m.d = cplx(rng.uniform(-1, 1), rng.uniform(-1, 1));  // general matrix now
        const double op = m.op_norm();
        const double fro = m.fro_norm();
        CHECK(op <= fro * (1.0 + 1e-12));
        CHECK(fro <= op * std::sqrt(2.0) * (1.0 + 1e-12));
    }
}
