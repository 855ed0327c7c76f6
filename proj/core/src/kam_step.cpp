#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "kam_detail.hpp"

namespace qpspec::kam {

namespace {

const cplx kI(0.0, 1.0);
constexpr double kTwoPi = 2.0 * std::numbers::pi;

using algebra::detail::PhaseTable;
using algebra::TorusGrid;

void zero_slot(Mat2& m, EntrySlot slot) {
    switch (slot) {
        case EntrySlot::Diag: m.a = 0.0; m.d = 0.0; break;
        case EntrySlot::UpperRight: m.b = 0.0; break;
        case EntrySlot::LowerLeft: m.c = 0.0; break;
    }
}

MatSeries masked_low_part(const MatSeries& f, double cutoff,
                          const std::vector<Exclusion>& excl,
                          const ConeSpec* cone) {
    MatSeries low = f.truncate_low(cutoff);
    MatSeries out(f.scheme(), f.width());
    for (const auto& [k, m] : low.coefficients()) {
        if (algebra::is_zero(k)) continue;
        if (cone && !algebra::cone_contains(k, *cone)) continue;
        Mat2 v = m;
        for (const auto& e : excl)
            if (e.site == k) zero_slot(v, e.slot);
        out.set(k, v);
    }
    out.prune();
    return out;
}

}  // namespace

namespace detail {

double recovery_noise_floor(const Mat2& amat) {
    const double a = amat.op_norm();
    return 64.0 * std::numeric_limits<double>::epsilon() * (1.0 + a * a);
}

std::vector<double> rotation_shift(const Frequency& alpha) {
    std::vector<double> s(alpha.alpha.size());
    for (std::size_t j = 0; j < s.size(); ++j) s[j] = kTwoPi * alpha.alpha[j];
    return s;
}

TorusGrid grid_for(const std::vector<MultiIndex>& box, const MatSeries& f, int dim) {
    std::vector<MultiIndex> support = box;
    for (const auto& [k, v] : f.coefficients()) support.push_back(k);
    return TorusGrid::for_support(support, dim);
}

CancelResult cancel_low_modes(const ConstantPart& a, const MatSeries& f,
                              const Frequency& alpha, const CancelSetup& setup) {
    CancelResult res;
    res.f_final = f;

    const auto& scheme = f.scheme();
    const auto box = algebra::index_ball(scheme, setup.k_cap, true);
    const TorusGrid grid = grid_for(box, f, scheme.dim);
    const PhaseTable table(grid);
    const auto shift = rotation_shift(alpha);

    const Mat2 amat = a.matrix();
    const Mat2 ainv = amat.inv_unimodular();
    const double f0_norm = f.norm();
    const double noise_floor = recovery_noise_floor(amat);

    for (int round = 0; round < setup.max_rounds; ++round) {
        MatSeries target =
            masked_low_part(res.f_final, setup.cutoff, setup.excl, setup.cone);
        res.final_low = target.norm();
        res.round_norms.push_back(res.final_low);
        if (res.final_low <= setup.tol) {
            res.converged = true;
            return res;
        }

        MatSeries y = homological_solve(a, target, alpha, setup.excl, setup.denom_floor);
        res.y_norm_sum += y.norm();

        const auto yg = algebra::series_grid_values(y, grid, table);
        const auto ysg = algebra::series_grid_values(y.phase_shifted(shift), grid, table);
        const auto fg = algebra::series_grid_values(res.f_final, grid, table);

        std::vector<Mat2> logs(grid.total());
        for (std::size_t g = 0; g < grid.total(); ++g) {
            const Mat2 d = ainv * algebra::mat_exp_traceless(-1.0 * ysg[g]) * amat *
                           algebra::mat_exp_traceless(fg[g]) *
                           algebra::mat_exp_traceless(yg[g]);
            logs[g] = algebra::mat_log_near_identity(d);
        }
        auto rec =
            algebra::coefficients_from_grid<Mat2>(logs, grid, box, scheme, f.width());
        res.recovery_residual = std::max(res.recovery_residual, rec.residual);

        res.ys.push_back(std::move(y));
        res.f_final = std::move(rec.series);
        res.f_final.prune(noise_floor);
        ++res.rounds;

        if (res.f_final.norm() > 4.0 * std::max(f0_norm, 1e-8)) {
            std::ostringstream os;
            os << "fixed point diverged; round norms:";
            for (double rn : res.round_norms) os << ' ' << rn;
            throw std::runtime_error(os.str());
        }
    }
    MatSeries target = masked_low_part(res.f_final, setup.cutoff, setup.excl, setup.cone);
    res.final_low = target.norm();
    res.round_norms.push_back(res.final_low);
    res.converged = res.final_low <= setup.tol;
    return res;
}

}  // namespace detail

namespace {

MatSeries reweighted(const MatSeries& f, double h_next) {
    MatSeries out(f.scheme(), h_next);
    for (const auto& [k, m] : f.coefficients()) out.set(k, m);
    return out;
}

}  // namespace

Mat2 ConjFactor::eval(const std::vector<double>& x) const {
    switch (kind) {
        case Kind::ConstMat:
            return cmat;
        case Kind::ExpSeries:
            return algebra::mat_exp_traceless(exponent.evaluate_real(x));
        case Kind::HalfRotation: {
            double ang = 0.0;
            for (std::size_t j = 0; j < half_index.size(); ++j)
                ang += 0.5 * double(half_index[j]) * x[j];
            return {std::polar(1.0, ang), 0.0, 0.0, std::polar(1.0, -ang)};
        }
        case Kind::DiagExp: {
            const cplx phi = diag_phi.evaluate_real(x);
            return {std::exp(phi), 0.0, 0.0, std::exp(-phi)};
        }
    }
    return Mat2::identity();
}

Mat2 Conjugation::eval(const std::vector<double>& x) const {
    Mat2 b = Mat2::identity();
    for (const auto& f : factors) b = b * f.eval(x);
    return b;
}

double conjugation_residual(const PerturbedCocycle& before, const PerturbedCocycle& after,
                            const std::vector<ConjFactor>& factors, const Frequency& alpha,
                            const TorusGrid& grid) {
    const auto shift = detail::rotation_shift(alpha);
    const Mat2 a0 = before.a.matrix();
    const Mat2 a1 = after.a.matrix();
    double worst = 0.0;
    for (std::size_t g = 0; g < grid.total(); ++g) {
        const auto x = grid.point(g);
        std::vector<double> xs = x;
        for (std::size_t j = 0; j < xs.size(); ++j) xs[j] += shift[j];
        Mat2 bx = Mat2::identity(), bxs = Mat2::identity();
        for (const auto& f : factors) {
            bx = bx * f.eval(x);
            bxs = bxs * f.eval(xs);
        }
        const Mat2 lhs =
            bxs.inverse() * a0 * algebra::mat_exp_traceless(before.f.evaluate_real(x)) * bx;
        const Mat2 rhs = a1 * algebra::mat_exp_traceless(after.f.evaluate_real(x));
        worst = std::max(worst, (lhs - rhs).op_norm());
    }
    return worst;
}

StepOutcome nonresonant_step(const PerturbedCocycle& p, const Frequency& alpha,
                             const StepParams& params) {
    detail::CancelSetup setup;
    setup.cutoff = params.solve_cutoff;
    setup.k_cap = params.k_cap;
    setup.tol = params.fp_tol;
    setup.max_rounds = params.max_rounds;
    setup.denom_floor = params.denom_floor;
    setup.cone = &p.cone;

    const detail::CancelResult res = detail::cancel_low_modes(p.a, p.f, alpha, setup);

    StepOutcome out;
    out.next.a = p.a;
    out.next.f = reweighted(res.f_final, params.h_next);
    out.next.cone = p.cone;
    out.next.cone.aperture = params.r_next;
    out.rounds = res.rounds;
    out.y_norm_bound = res.y_norm_sum;
    out.dropped_mass = res.recovery_residual;
    out.off_cone_mass = out.next.f.off_cone_mass(out.next.cone);
    out.zero_mode = out.next.f.zero_mode_norm();
    for (const auto& y : res.ys) {
        ConjFactor cf;
        cf.kind = ConjFactor::Kind::ExpSeries;
        cf.exponent = y;
        out.factors.push_back(std::move(cf));
    }

    const auto box = algebra::index_ball(p.f.scheme(), params.k_cap, true);
    const TorusGrid grid = detail::grid_for(box, p.f, p.f.scheme().dim);
    out.grid_residual = conjugation_residual(p, out.next, out.factors, alpha, grid);
    return out;
}

StepOutcome resonant_step(const PerturbedCocycle& p, const Frequency& alpha,
                          const ResonanceReport& report, const StepParams& params) {
    if (!report.resonant)
        throw std::invalid_argument("resonant_step: report carries no resonant site");

    StepOutcome out;
    std::vector<ConjFactor> factors;

    // 1. Triangular diagonalization when the off-diagonal entry is present.
    ConstantPart a_diag{p.a.xi, 0.0, p.a.orient};
    MatSeries f_tilde = p.f;
    const cplx u = std::exp(kI * p.a.xi);
    if (std::abs(p.a.zeta) > 0.0) {
        const cplx den = (p.a.orient == Orientation::Upper) ? (1.0 / u - u) : (u - 1.0 / u);
        if (std::abs(den) < 1e-8)
            throw std::runtime_error(
                "resonant_step: parabolic constant part, |2 sin xi| < 1e-8");
        Mat2 pmat = Mat2::identity();
        if (p.a.orient == Orientation::Upper)
            pmat.b = p.a.zeta / den;
        else
            pmat.c = p.a.zeta / den;
        f_tilde = algebra::conjugate_coefficients(p.f, pmat);
        ConjFactor cf;
        cf.kind = ConjFactor::Kind::ConstMat;
        cf.cmat = pmat;
        factors.push_back(std::move(cf));
    }

    // 2. Cancel everything solvable, keeping the resonant corner untouched.
    detail::CancelSetup setup;
    setup.cutoff = params.solve_cutoff;
    setup.excl = {{report.site, report.resonant_slot()}};
    setup.k_cap = params.k_cap;
    setup.tol = params.fp_tol;
    setup.max_rounds = params.max_rounds;
    setup.denom_floor = params.denom_floor;
    setup.cone = &p.cone;
    const detail::CancelResult res = detail::cancel_low_modes(a_diag, f_tilde, alpha, setup);
    for (const auto& y : res.ys) {
        ConjFactor cf;
        cf.kind = ConjFactor::Kind::ExpSeries;
        cf.exponent = y;
        factors.push_back(std::move(cf));
    }

    // 3. Resonant coefficient and the half-angle rotation that freezes it.
    const Mat2 res_coef_mat = res.f_final.at(report.site);
    const cplx corner =
        report.resonant_slot() == EntrySlot::UpperRight ? res_coef_mat.b : res_coef_mat.c;
    out.resonant_coef = corner;

    const MultiIndex q = report.rotation();
    const double theta_q = alpha.pairing_angle(q);
    ConjFactor rot;
    rot.kind = ConjFactor::Kind::HalfRotation;
    rot.half_index = q;
    factors.push_back(rot);

    cplx xi_next = a_diag.xi - 0.5 * theta_q;
    xi_next = cplx(std::remainder(xi_next.real(), kTwoPi), xi_next.imag());

    ConstantPart a_next;
    a_next.xi = xi_next;
    if (report.resonant_slot() == EntrySlot::UpperRight) {
        a_next.orient = Orientation::Upper;
        a_next.zeta = corner * std::exp(kI * xi_next);
    } else {
        a_next.orient = Orientation::Lower;
        a_next.zeta = corner * std::exp(-kI * xi_next);
    }

    // 4. Rotate the remainder: diagonals stay at k, the (1,2) corner shifts to
    // k - q, the (2,1) corner to k + q; the frozen corner lands on the zero mode.
    const auto& scheme = p.f.scheme();
    MatSeries g_all(scheme, p.f.width());
    for (const auto& [k, m] : res.f_final.coefficients()) {
        if (m.a != 0.0 || m.d != 0.0) g_all.add(k, Mat2{m.a, 0.0, 0.0, m.d});
        if (m.b != 0.0) {
            MultiIndex kb = k;
            for (std::size_t j = 0; j < kb.size(); ++j) kb[j] -= q[j];
            g_all.add(kb, Mat2{0.0, m.b, 0.0, 0.0});
        }
        if (m.c != 0.0) {
            MultiIndex kc = k;
            for (std::size_t j = 0; j < kc.size(); ++j) kc[j] += q[j];
            g_all.add(kc, Mat2{0.0, 0.0, m.c, 0.0});
        }
    }
    g_all.prune();

    // 5. F_plus(x) = log(e^{-L} e^{G(x)}) pointwise; L is the frozen corner.
    Mat2 lmat = Mat2::zero();
    if (report.resonant_slot() == EntrySlot::UpperRight)
        lmat.b = corner;
    else
        lmat.c = corner;
    const Mat2 exp_neg_l = algebra::mat_exp_traceless(-1.0 * lmat);

    const auto box = algebra::index_ball(scheme, params.k_cap, true);
    const TorusGrid grid = detail::grid_for(box, g_all, scheme.dim);
    const algebra::detail::PhaseTable table(grid);
    const auto gg = algebra::series_grid_values(g_all, grid, table);
    std::vector<Mat2> logs(grid.total());
    for (std::size_t g = 0; g < grid.total(); ++g)
        logs[g] =
            algebra::mat_log_near_identity(exp_neg_l * algebra::mat_exp_traceless(gg[g]));
    auto rec = algebra::coefficients_from_grid<Mat2>(logs, grid, box, scheme, p.f.width());

    out.next.a = a_next;
    out.next.cone = p.cone;
    out.next.cone.aperture = params.r_next;
    out.off_cone_mass = rec.series.off_cone_mass(out.next.cone);
    out.zero_mode = rec.series.zero_mode_norm();
    rec.series.prune(detail::recovery_noise_floor(a_next.matrix()));
    out.next.f = reweighted(rec.series, params.h_next);
    out.dropped_mass = res.recovery_residual + rec.residual;
    out.rounds = res.rounds;
    out.y_norm_bound = res.y_norm_sum;
    out.factors = factors;

    out.grid_residual = conjugation_residual(p, out.next, out.factors, alpha, grid);
    return out;
}

}  // namespace qpspec::kam
