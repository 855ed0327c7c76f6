#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>

#include "qpspec/dioph.hpp"

using namespace qpspec;
using namespace qpspec::dioph;

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Brute-force oracle: scan the ball directly from the definition.
double gamma_oracle(const Frequency& a, double tau, double bound, double eta) {
    double best = std::numeric_limits<double>::infinity();
    const int cap = int(bound);
    if (a.dim() == 1) {
        for (int k = -cap; k <= cap; ++k) {
            if (k == 0) continue;
            if (std::abs(double(k)) > bound) continue;
            const double sd = torus_distance(kTwoPi * double(k) * a.alpha[0]);
            best = std::min(best, sd * (1.0 + std::pow(std::abs(double(k)), tau)));
        }
    } else {
        for (int k0 = -cap; k0 <= cap; ++k0)
            for (int k1 = -cap; k1 <= cap; ++k1) {
                if (k0 == 0 && k1 == 0) continue;
                const double norm = std::abs(double(k0)) + std::abs(double(k1));
                if (norm > bound + 1e-12) continue;
                const double sd =
                    torus_distance(kTwoPi * (double(k0) * a.alpha[0] + double(k1) * a.alpha[1]));
                const double prod = (1.0 + std::pow(std::abs(double(k0)), tau)) *
                                    (1.0 + std::pow(std::abs(double(k1)), tau));
                best = std::min(best, sd * prod);
            }
    }
    (void)eta;
    return best;
}

}  // namespace

TEST_CASE("torus distance") {
    CHECK(torus_distance(0.0) == 0.0);
    CHECK(torus_distance(kTwoPi) < 1e-15);
    CHECK(torus_distance(std::numbers::pi + 0.1) ==
          doctest::Approx(std::numbers::pi - 0.1));
    CHECK(torus_distance(-0.3) == doctest::Approx(0.3));
}

TEST_CASE("small denominator at the golden mean") {
    const Frequency g = Frequency::golden();
    const double expected = kTwoPi * (1.0 - (std::sqrt(5.0) - 1.0) / 2.0);
    CHECK(small_denominator({1}, g) == doctest::Approx(expected).epsilon(1e-12));
    CHECK(small_denominator({1}, g) == doctest::Approx(2.399963229728653));
    CHECK_THROWS(small_denominator({0}, g));

    const Frequency gs = Frequency::golden_silver();
    const double direct =
        torus_distance(kTwoPi * (gs.alpha[0] * 1.0 + gs.alpha[1] * -1.0));
    CHECK(small_denominator({1, -1}, gs) == doctest::Approx(direct));
}

TEST_CASE("small denominator symmetry under k -> -k") {
    const Frequency gs = Frequency::golden_silver();
    for (MultiIndex k : {MultiIndex{2, 3}, MultiIndex{-5, 1}, MultiIndex{7, -4}}) {
        MultiIndex neg = k;
        for (auto& v : neg) v = -v;
        CHECK(small_denominator(k, gs) == doctest::Approx(small_denominator(neg, gs)));
    }
}

TEST_CASE("gamma estimate: empty scan, brute-force agreement, rational collapse") {
    const Frequency g = Frequency::golden();
    CHECK(estimate_gamma(g, 2.0, 0.5, 1.0) == std::numeric_limits<double>::infinity());

    CHECK(estimate_gamma(g, 2.0, 20.0, 1.0) ==
          doctest::Approx(gamma_oracle(g, 2.0, 20.0, 1.0)).epsilon(1e-12));

    const Frequency gs = Frequency::golden_silver();
    CHECK(estimate_gamma(gs, 2.0, 8.0, 1.0) ==
          doctest::Approx(gamma_oracle(gs, 2.0, 8.0, 1.0)).epsilon(1e-12));

    const Frequency rational{{0.5}};
    CHECK(estimate_gamma(rational, 2.0, 2.0, 1.0) < 1e-12);
}

TEST_CASE("gamma estimate is non-increasing in the scan bound") {
    const Frequency g = Frequency::golden();
    double prev = std::numeric_limits<double>::infinity();
    for (double bound : {1.0, 2.0, 5.0, 13.0, 34.0, 89.0}) {
        const double cur = estimate_gamma(g, 2.0, bound, 1.0);
        CHECK(cur <= prev + 1e-15);
        prev = cur;
    }
}

TEST_CASE("golden mean stays badly approximable through k = 1000") {
    CHECK(estimate_gamma(Frequency::golden(), 2.0, 1000.0, 1.0) >= 1e-3);
}

TEST_CASE("small denominator floor") {
    DioParams p{0.1, 2.0};
    CHECK(small_denom_bound(1.0, p, 1.0) == doctest::Approx(0.05));
    CHECK(small_denom_bound(0.0, p, 1.0) == doctest::Approx(0.1));
    double prev = 1e9;
    for (double n : {1.0, 2.0, 4.0, 8.0, 64.0, 512.0}) {
        const double b = small_denom_bound(n, p, 1.0);
        CHECK(b < prev);
        prev = b;
    }
    CHECK_THROWS(small_denom_bound(1.0, DioParams{1.5, 2.0}, 1.0));
}

TEST_CASE("presets") {
    CHECK(Frequency::preset("golden").alpha[0] ==
          doctest::Approx((std::sqrt(5.0) - 1.0) / 2.0));
    CHECK(Frequency::preset("silver").alpha[0] == doctest::Approx(std::sqrt(2.0) - 1.0));
    CHECK(Frequency::preset("golden-silver").dim() == 2);
    CHECK(Frequency::preset("cubic").dim() == 2);
    CHECK_THROWS(Frequency::preset("nonsense"));
}
