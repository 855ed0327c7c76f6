#include "qpspec/dioph.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace qpspec::dioph {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

double Frequency::pairing_angle(const MultiIndex& k) const {
    if (k.size() != alpha.size())
        throw std::invalid_argument("Frequency::pairing_angle: dimension mismatch");
    double a = 0.0;
    for (std::size_t j = 0; j < k.size(); ++j) a += double(k[j]) * alpha[j];
    return kTwoPi * a;
}

Frequency Frequency::golden() { return {{(std::sqrt(5.0) - 1.0) / 2.0}}; }
Frequency Frequency::silver() { return {{std::sqrt(2.0) - 1.0}}; }
Frequency Frequency::golden_silver() {
    return {{(std::sqrt(5.0) - 1.0) / 2.0, std::sqrt(2.0) - 1.0}};
}
Frequency Frequency::cubic() {
    return {{std::cbrt(2.0) - 1.0, std::cbrt(4.0) - 1.0}};
}

Frequency Frequency::preset(const std::string& name) {
    if (name == "golden") return golden();
    if (name == "silver") return silver();
    if (name == "golden-silver") return golden_silver();
    if (name == "cubic") return cubic();
    throw std::invalid_argument("unknown frequency preset: " + name);
}

void DioParams::validate() const {
    if (!(gamma > 0.0 && gamma < 1.0))
        throw std::invalid_argument("DioParams: gamma must be in (0,1)");
    if (!(tau > 1.0)) throw std::invalid_argument("DioParams: tau must be > 1");
}

double torus_distance(double t) { return std::abs(std::remainder(t, kTwoPi)); }

double small_denominator(const MultiIndex& k, const Frequency& alpha) {
    if (algebra::is_zero(k))
        throw std::invalid_argument("small_denominator: k must be nonzero");
    return torus_distance(alpha.pairing_angle(k));
}

double estimate_gamma(const Frequency& alpha, double tau, double scan_bound, double eta) {
    WeightScheme scheme = WeightScheme::uniform(alpha.dim(), eta);
    double best = std::numeric_limits<double>::infinity();
    algebra::for_each_index(scheme, scan_bound, [&](const MultiIndex& k) {
        double prod = 1.0;
        for (std::size_t j = 0; j < k.size(); ++j)
            prod *= 1.0 + std::pow(algebra::coord_bracket(j), tau) *
                              std::pow(std::abs(double(k[j])), tau);
        best = std::min(best, small_denominator(k, alpha) * prod);
    });
    return best;
}

double small_denom_bound(double n, const DioParams& params, double eta, double c1) {
    params.validate();
    if (n < 0.0) throw std::invalid_argument("small_denom_bound: N must be >= 0");
    return params.gamma * std::pow(1.0 + n, -c1 * std::pow(n, 1.0 / (eta + 1.0)));
}

}  // namespace qpspec::dioph
