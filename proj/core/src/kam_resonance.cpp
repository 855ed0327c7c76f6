#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "qpspec/kam.hpp"

namespace qpspec::kam {

namespace {
const cplx kI(0.0, 1.0);
}

Mat2 ConstantPart::matrix() const {
    const cplx u = std::exp(kI * xi);
    const cplx ui = std::exp(-kI * xi);
    if (orient == Orientation::Upper) return {u, zeta, 0.0, ui};
    return {u, 0.0, zeta, ui};
}

double ConstantPart::rho_mod_pi() const {
    double r = std::remainder(xi.real(), std::numbers::pi);
    return r;
}

MultiIndex ResonanceReport::rotation() const {
    MultiIndex q = site;
    for (auto& v : q) v *= -branch;
    return q;
}

ResonanceReport classify_resonance(const ConstantPart& a, const Frequency& alpha,
                                   const ConeSpec& cone, double scan_bound, double delta) {
    if (!(scan_bound >= 1.0)) throw std::invalid_argument("classify_resonance: N must be >= 1");
    if (!(delta > 0.0)) throw std::invalid_argument("classify_resonance: delta must be > 0");
    cone.validate();

    ResonanceReport rep;
    rep.threshold = delta;
    rep.offending = std::numeric_limits<double>::infinity();
    double best_norm = std::numeric_limits<double>::infinity();

    const cplx two_xi = 2.0 * a.xi;
    algebra::for_each_index(
        cone.scheme, scan_bound,
        [&](const MultiIndex& k) {
            const double theta = alpha.pairing_angle(k);
            const double vplus = std::abs(std::exp(kI * (theta + two_xi)) - 1.0);
            const double vminus = std::abs(std::exp(kI * (theta - two_xi)) - 1.0);
            rep.offending = std::min(rep.offending, std::min(vplus, vminus));
            const double v = std::min(vplus, vminus);
            if (v < delta) {
                const double kn = algebra::weighted_norm(k, cone.scheme);
                // smallest |k|_eta wins; lexicographic order of the scan breaks ties
                if (kn < best_norm - 1e-12) {
                    best_norm = kn;
                    rep.resonant = true;
                    rep.site = k;
                    rep.branch = vminus <= vplus ? -1 : +1;
                }
            }
        },
        &cone);

    const double ratio = rep.offending / delta;
    rep.near_threshold = ratio > 2.0 / 3.0 && ratio < 1.5;
    return rep;
}

MatSeries apply_twisted_difference(const ConstantPart& a, const MatSeries& y,
                                   const Frequency& alpha) {
    const Mat2 am = a.matrix();
    const Mat2 am_inv = am.inv_unimodular();
    MatSeries out(y.scheme(), y.width());
    for (const auto& [k, v] : y.coefficients()) {
        const cplx ek = std::exp(kI * alpha.pairing_angle(k));
        out.set(k, ek * (am_inv * v * am) - v);
    }
    return out;
}

namespace {

bool is_excluded(const std::vector<Exclusion>& excl, const MultiIndex& k, EntrySlot slot) {
    for (const auto& e : excl)
        if (e.slot == slot && e.site == k) return true;
    return false;
}

[[noreturn]] void underflow(const MultiIndex& k, const char* comp, double mag) {
    std::ostringstream os;
    os << "homological_solve: denominator " << mag << " below floor at k=(";
    for (std::size_t j = 0; j < k.size(); ++j) os << (j ? "," : "") << k[j];
    os << ") component " << comp;
    throw std::runtime_error(os.str());
}

}  // namespace

MatSeries homological_solve(const ConstantPart& a, const MatSeries& f,
                            const Frequency& alpha,
                            const std::vector<Exclusion>& exclusions, double denom_floor) {
    MatSeries y(f.scheme(), f.width());
    const cplx zeta = a.zeta;

    for (const auto& [k, m] : f.coefficients()) {
        if (algebra::is_zero(k)) continue;  // zero mode has no solvable equation
        const double theta = alpha.pairing_angle(k);
        const cplx ek = std::exp(kI * theta);
        const cplx den_diag = ek - 1.0;
        const cplx den_plus = std::exp(kI * (theta + 2.0 * a.xi)) - 1.0;   // (2,1) for upper A
        const cplx den_minus = std::exp(kI * (theta - 2.0 * a.xi)) - 1.0;  // (1,2) for upper A

        Mat2 ym{};
        if (a.orient == Orientation::Upper) {
            // back-substitution order: (2,1) feeds the diagonal feeds (1,2)
            cplx y21 = 0.0;
            if (!is_excluded(exclusions, k, EntrySlot::LowerLeft)) {
                if (std::abs(den_plus) < denom_floor) underflow(k, "(2,1)", std::abs(den_plus));
                y21 = m.c / den_plus;
            }
            cplx y11 = 0.0;
            if (!is_excluded(exclusions, k, EntrySlot::Diag)) {
                if (std::abs(den_diag) < denom_floor) underflow(k, "diag", std::abs(den_diag));
                y11 = (m.a + zeta * std::exp(kI * (theta + a.xi)) * y21) / den_diag;
            }
            cplx y12 = 0.0;
            if (!is_excluded(exclusions, k, EntrySlot::UpperRight)) {
                if (std::abs(den_minus) < denom_floor) underflow(k, "(1,2)", std::abs(den_minus));
                y12 = (m.b + zeta * zeta * ek * y21 -
                       2.0 * zeta * std::exp(kI * (theta - a.xi)) * y11) /
                      den_minus;
            }
            ym = {y11, y12, y21, -y11};
        } else {
            // lower-triangular mirror: (1,2) feeds the diagonal feeds (2,1)
            cplx y12 = 0.0;
            if (!is_excluded(exclusions, k, EntrySlot::UpperRight)) {
                if (std::abs(den_minus) < denom_floor) underflow(k, "(1,2)", std::abs(den_minus));
                y12 = m.b / den_minus;
            }
            cplx y11 = 0.0;
            if (!is_excluded(exclusions, k, EntrySlot::Diag)) {
                if (std::abs(den_diag) < denom_floor) underflow(k, "diag", std::abs(den_diag));
                y11 = (m.a - zeta * std::exp(kI * (theta - a.xi)) * y12) / den_diag;
            }
            cplx y21 = 0.0;
            if (!is_excluded(exclusions, k, EntrySlot::LowerLeft)) {
                if (std::abs(den_plus) < denom_floor) underflow(k, "(2,1)", std::abs(den_plus));
                y21 = (m.c + zeta * zeta * ek * y12 +
                       2.0 * zeta * std::exp(kI * (theta + a.xi)) * y11) /
                      den_plus;
            }
            ym = {y11, y12, y21, -y11};
        }
        y.set(k, ym);
    }
    y.prune();
    return y;
}

}  // namespace qpspec::kam
