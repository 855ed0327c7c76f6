#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "qpspec/cocycle.hpp"
#include "qpspec/rng.hpp"

using namespace qpspec;
using namespace qpspec::cocycle;
using algebra::cplx;
using algebra::Mat2;
using algebra::ScalarSeries;
using algebra::WeightScheme;

namespace {

CocycleSpec sarnak(double lambda, cplx energy, double eps = 0.0, double width = 2.0) {
    CocycleSpec spec;
    spec.alpha = dioph::Frequency::golden();
    spec.energy = energy;
    spec.pot.lambda = lambda;
    spec.pot.v = ScalarSeries(WeightScheme::uniform(1), width);
    spec.pot.v.set({1}, 1.0);
    spec.phase_shift = eps;
    return spec;
}

CocycleSpec almost_mathieu(double lambda, cplx energy, double eps = 0.0) {
    CocycleSpec spec;
    spec.alpha = dioph::Frequency::golden();
    spec.energy = energy;
    spec.pot.lambda = lambda;
    spec.pot.v = ScalarSeries(WeightScheme::uniform(1), 0.8);
    spec.pot.v.set({1}, 1.0);
    spec.pot.v.set({-1}, 1.0);
    spec.phase_shift = eps;
    return spec;
}

// Constant-cocycle oracle: growth rate of A_E^n is log of the spectral radius.
double constant_matrix_oracle(cplx energy) {
    const cplx rad = std::sqrt(energy * energy - 4.0);
    return std::log(std::max(std::abs(0.5 * (energy + rad)),
                             std::abs(0.5 * (energy - rad))));
}

}  // namespace

TEST_CASE("transfer matrix entries and determinant") {
    const auto free3 = sarnak(0.0, 3.0);
    const Mat2 m = transfer_matrix(free3, {0.0});
    CHECK(std::abs(m.a - 3.0) < 1e-15);
    CHECK(std::abs(m.b + 1.0) < 1e-15);
    CHECK(std::abs(m.c - 1.0) < 1e-15);
    CHECK(std::abs(m.d) < 1e-15);

    const auto s = sarnak(1.0, 0.0);
    const Mat2 m2 = transfer_matrix(s, {0.0});
    CHECK(std::abs(m2.a + 1.0) < 1e-15);  // E - v(0) = -1

    Rng rng(5);
    for (int t = 0; t < 20; ++t) {
        const auto spec = sarnak(rng.uniform(-2, 2), cplx(rng.uniform(-3, 3), rng.uniform(-1, 1)));
        const Mat2 mm = transfer_matrix(spec, {rng.uniform(0, 6.28)});
        CHECK(std::abs(mm.det() - 1.0) < 1e-12);
    }
}

TEST_CASE("lyapunov: free cocycle matches the constant-matrix oracle") {
    const auto est = lyapunov(sarnak(0.0, 3.0), 10000, 4, 42);
    // oracle value log((3 + sqrt 5)/2) = 0.9624236501192069
    CHECK(constant_matrix_oracle(3.0) == doctest::Approx(0.9624236501192069));
    CHECK(est.value == doctest::Approx(0.9624236501192069).epsilon(1e-3));
    CHECK(est.value >= -1e-6);
}

TEST_CASE("lyapunov: exponential potential at strong coupling") {
    const auto est = lyapunov(sarnak(2.0, 0.0), 100000, 8, 42);
    CHECK(std::abs(est.value - std::log(2.0)) < 2e-2);
}

TEST_CASE("lyapunov: exponential potential at weak coupling vanishes on the interval") {
    const auto est = lyapunov(sarnak(0.5, 1.0), 100000, 8, 42);
    CHECK(std::abs(est.value) < 2e-2);
}

TEST_CASE("lyapunov is deterministic for a fixed seed and stable across seeds") {
    const auto spec = sarnak(2.0, cplx(0.3, 0.1));
    const auto a = lyapunov(spec, 20000, 6, 7);
    const auto b = lyapunov(spec, 20000, 6, 7);
    CHECK(a.value == b.value);  // bit-identical

    const auto c = lyapunov(spec, 20000, 6, 8);
    const double spread = 3.0 * (a.std_error + c.std_error) + 1e-4;
    CHECK(std::abs(a.value - c.value) <= spread);
}

TEST_CASE("lyapunov is invariant under an orbit shift of the phase") {
    auto spec = sarnak(2.0, cplx(0.3, 0.1));
    std::vector<std::vector<double>> phases, shifted;
    Rng rng(31);
    for (int p = 0; p < 6; ++p) {
        phases.push_back({rng.uniform(0.0, 2.0 * std::numbers::pi)});
        shifted.push_back({phases.back()[0] + 2.0 * std::numbers::pi * spec.alpha.alpha[0]});
    }
    const auto base = lyapunov_at_phases(spec, 30000, phases);
    const auto moved = lyapunov_at_phases(spec, 30000, shifted);
    CHECK(std::abs(base.value - moved.value) <=
          3.0 * (base.std_error + moved.std_error) + 1e-3);
}

TEST_CASE("renormalized products keep determinant 1 over many steps") {
    // bounded orbit (weak coupling, energy inside the interval) so the
    // accumulated normalization stays in floating range
    const auto spec = sarnak(0.5, 1.0);
    OrbitEvaluator ev(spec.pot, spec.alpha, {0.3}, 0.0);
    Mat2 q = Mat2::identity();
    double acc = 0.0;
    for (int j = 0; j < 100000; ++j) {
        const cplx v = ev.next();
        q = Mat2{spec.energy - v, -1.0, 1.0, 0.0} * q;
        const double n = q.fro_norm();
        acc += std::log(n);
        q *= 1.0 / n;
    }
    // det(product) = 1 exactly, so det(q) = exp(-2 acc); the measured drift
    // is pure rounding accumulation
    CHECK(std::abs(std::log(std::abs(q.det())) + 2.0 * acc) < 1e-9);
}

TEST_CASE("free laplacian exponent") {
    CHECK(free_laplacian_le(2.0) == doctest::Approx(0.0));
    CHECK(free_laplacian_le(0.0) == doctest::Approx(0.0));
    CHECK(free_laplacian_le(-1.3) == doctest::Approx(0.0));
    CHECK(free_laplacian_le(3.0) == doctest::Approx(0.9624236501192069));
    CHECK(free_laplacian_le(2.1) == doctest::Approx(0.314924756603848));
    CHECK(free_laplacian_le(cplx(0.0, 1.0)) > 0.0);
}

TEST_CASE("acceleration: slopes of the complexified exponent") {
    const auto spec = sarnak(2.0, 0.0);
    CHECK(std::abs(acceleration(spec, -0.3, 0.05, 30000, 6, 3) - (-1.0)) < 0.05);
    CHECK(std::abs(acceleration(spec, 1.5, 0.05, 30000, 6, 3)) < 0.05);
    const auto free_spec = sarnak(0.0, 2.5);
    CHECK(std::abs(acceleration(free_spec, 0.1, 0.05, 5000, 4, 3)) < 1e-6);
}

TEST_CASE("exponent is midpoint convex in the phase shift") {
    const auto spec = sarnak(2.0, 0.0);
    std::vector<double> eps{-0.4, -0.2, 0.0, 0.2, 0.4};
    std::vector<double> le;
    for (double e : eps) {
        auto s = spec;
        s.phase_shift = e;
        le.push_back(lyapunov(s, 50000, 6, 9).value);
    }
    for (std::size_t i = 1; i + 1 < le.size(); ++i)
        CHECK(le[i - 1] + le[i + 1] >= 2.0 * le[i] - 2e-2);
}

TEST_CASE("shifted almost Mathieu exponent is even in the shift") {
    for (double e : {0.5, 1.2}) {
        auto up = almost_mathieu(0.7, e, 0.3);
        auto dn = almost_mathieu(0.7, e, -0.3);
        const double lu = lyapunov(up, 50000, 6, 21).value;
        const double ld = lyapunov(dn, 50000, 6, 21).value;
        CHECK(std::abs(lu - ld) < 2e-2);
    }
}

TEST_CASE("uh detector: hyperbolic and elliptic constant cocycles") {
    const auto hyper = uh_detect(sarnak(0.0, 3.0));
    CHECK(hyper.verdict == UhVerdict::Uh);

    const auto ell = uh_detect(sarnak(0.0, 1.0));
    CHECK(ell.verdict == UhVerdict::NotUh);
    CHECK(ell.le_zero <= 5e-3);
}

TEST_CASE("uh detector: strong-coupling exponential potential on its spectrum curve") {
    // (2.5, 0) lies on the ellipse with semi-axes (2.5, 1.5)
    const auto on = uh_detect(sarnak(2.0, 2.5));
    CHECK(on.verdict == UhVerdict::NotUh);
    CHECK(on.le_zero > 0.5);  // exponent log 2 despite membership

    const auto inside = uh_detect(sarnak(2.0, 0.0));
    CHECK(inside.verdict == UhVerdict::Uh);

    const auto outside = uh_detect(sarnak(2.0, 3.5));
    CHECK(outside.verdict == UhVerdict::Uh);
}

TEST_CASE("uh detector with two frequencies relies on the splitting fields") {
    CocycleSpec spec;
    spec.alpha = dioph::Frequency::golden_silver();
    spec.pot.lambda = 1e-3;
    spec.pot.v = ScalarSeries(WeightScheme::uniform(2), 0.6);
    spec.pot.v.set({1, 0}, 1.0);
    spec.pot.v.set({0, 1}, 0.5);
    spec.pot.v.set({1, 1}, 0.3);

    UhOptions opt;
    opt.iterates = 30000;
    opt.phases = 4;

    spec.energy = 2.5;
    const auto outside = uh_detect(spec, opt);
    CHECK_FALSE(outside.affinity_applicable);  // one-frequency criterion only
    CHECK(outside.verdict == UhVerdict::Uh);
    CHECK(outside.min_split_angle > 1e-3);

    spec.energy = 1.0;
    const auto inside = uh_detect(spec, opt);
    CHECK(inside.verdict == UhVerdict::NotUh);
}

TEST_CASE("spec validation") {
    auto bad = sarnak(1.0, 0.0, 2.5);  // eps outside the strip
    CHECK_THROWS(bad.validate());
    CHECK_THROWS(lyapunov(sarnak(0.0, 1.0), 0, 4, 1));
}
