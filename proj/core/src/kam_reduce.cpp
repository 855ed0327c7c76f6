#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "kam_detail.hpp"

namespace qpspec::kam {

namespace {

const cplx kI(0.0, 1.0);
constexpr double kTwoPi = 2.0 * std::numbers::pi;

using algebra::TorusGrid;

}  // namespace

KamSchedule KamSchedule::build(double h, double h_final, double r, double r_final,
                               double eps0, int steps) {
    if (!(h_final > 0.0 && h_final < h))
        throw std::invalid_argument("KamSchedule: need 0 < h' < h");
    if (!(r_final > 0.0 && r_final < r))
        throw std::invalid_argument("KamSchedule: need 0 < r' < r");
    KamSchedule s;
    s.h0 = h;
    s.h_final = h_final;
    s.r0 = r;
    s.r_final = r_final;
    s.h.push_back(h);
    s.r.push_back(r);
    s.eps.push_back(eps0);
    for (int n = 0; n < steps; ++n) {
        const double dh = (h - h_final) / double((n + 2) * (n + 2));
        const double dr = (r - r_final) / double((n + 2) * (n + 2));
        s.n_trunc.push_back(2.0 * std::abs(std::log(s.eps.back())) / dh);
        s.h.push_back(s.h.back() - dh);
        s.r.push_back(s.r.back() - dr);
        s.eps.push_back(2.0 * std::pow(s.eps.back(), 3.0));
    }
    return s;
}

int KamTrace::resonance_count() const {
    int c = 0;
    for (const auto& st : steps) c += st.resonant ? 1 : 0;
    return c;
}

std::vector<Mat2> KamTrace::sample_conjugation(const algebra::TorusGrid& grid) const {
    std::vector<Mat2> out(grid.total(), Mat2::identity());
    for (std::size_t g = 0; g < grid.total(); ++g) out[g] = conj.eval(grid.point(g));
    return out;
}

std::string KamTrace::to_jsonl() const {
    // One record per step; angle-valued fields are written in turns (units of 2pi).
    std::ostringstream os;
    for (const auto& st : steps) {
        nlohmann::json j;
        j["n"] = st.n;
        j["verdict"] = st.resonant ? "resonant" : "nonresonant";
        j["site"] = st.site;
        j["branch"] = st.branch;
        j["rotation"] = st.rotation;
        j["xi_re_2pi"] = st.xi_before.real() / kTwoPi;
        j["xi_im"] = st.xi_before.imag();
        j["xi_next_re_2pi"] = st.xi_after.real() / kTwoPi;
        j["xi_next_im"] = st.xi_after.imag();
        j["zeta_re"] = st.zeta_before.real();
        j["zeta_im"] = st.zeta_before.imag();
        j["zeta_next_re"] = st.zeta_after.real();
        j["zeta_next_im"] = st.zeta_after.imag();
        j["f_norm"] = st.f_norm;
        j["h"] = st.h;
        j["r"] = st.r;
        j["delta"] = st.delta;
        j["offending"] = st.offending;
        j["near_threshold"] = st.near_threshold;
        j["residual"] = st.residual;
        j["off_cone_mass"] = st.off_cone_mass;
        j["zero_mode"] = st.zero_mode;
        j["dropped_mass"] = st.dropped_mass;
        j["rounds"] = st.rounds;
        j["rho_update_defect"] = st.rho_update_defect;
        j["gap_growth_ok"] = st.gap_growth_ok;
        os << j.dump() << '\n';
    }
    nlohmann::json fin;
    fin["terminal"] = true;
    fin["xi_re_2pi"] = terminal.a.xi.real() / kTwoPi;
    fin["xi_im"] = terminal.a.xi.imag();
    fin["rho_mod_pi_2pi"] = terminal.a.rho_mod_pi() / kTwoPi;
    fin["zeta_re"] = terminal.a.zeta.real();
    fin["zeta_im"] = terminal.a.zeta.imag();
    fin["orientation"] = terminal.a.orient == Orientation::Upper ? "upper" : "lower";
    fin["f_norm"] = terminal.f.norm();
    fin["converged"] = converged;
    fin["stop_reason"] = stop_reason;
    os << fin.dump() << '\n';
    return os.str();
}

namespace {

struct DriverState {
    PerturbedCocycle cur;
    double h0 = 0.0, r0 = 0.0;
};

// One schedule iteration; returns false when the driver should stop (the
// reason is written into the trace).
bool one_kam_step(DriverState& st, const Frequency& alpha, const KamOptions& opt, int n,
                  KamTrace& trace) {
    const double eps = st.cur.f.norm();
    if (eps <= opt.f_target) {
        trace.converged = true;
        trace.stop_reason = "perturbation below target";
        return false;
    }
    if (eps >= 0.5) {
        trace.stop_reason = "perturbation too large for the iteration";
        return false;
    }
    const double h_n = st.cur.f.width();
    const double r_n = st.cur.cone.aperture;
    const double dh = (st.h0 - opt.h_final) / double((n + 2) * (n + 2));
    const double dr = (st.r0 - opt.r_final) / double((n + 2) * (n + 2));
    if (h_n - dh <= 0.0 || r_n - dr <= 0.0) {
        trace.stop_reason = "schedule exhausted";
        return false;
    }

    const double n_trunc = 2.0 * std::abs(std::log(eps)) / dh;
    const double delta = std::min(std::pow(eps, 0.1), opt.delta_cap);
    const double scan = std::clamp(n_trunc, 1.0, opt.scan_bound);

    const ResonanceReport report =
        classify_resonance(st.cur.a, alpha, st.cur.cone, scan, delta);

    StepParams sp;
    sp.h_next = h_n - dh;
    sp.r_next = r_n - dr;
    sp.solve_cutoff = report.resonant ? opt.k_cap : std::min(n_trunc, opt.k_cap);
    sp.delta = delta;
    sp.fp_tol = std::max(opt.fp_floor, 0.1 * eps * eps * eps);
    sp.max_rounds = opt.max_rounds;
    sp.k_cap = opt.k_cap;
    sp.denom_floor = opt.denom_floor;

    StepRecord rec;
    rec.n = n;
    rec.resonant = report.resonant;
    rec.site = report.site;
    rec.branch = report.branch;
    rec.xi_before = st.cur.a.xi;
    rec.zeta_before = st.cur.a.zeta;
    rec.f_norm = eps;
    rec.h = h_n;
    rec.r = r_n;
    rec.delta = delta;
    rec.offending = report.offending;
    rec.near_threshold = report.near_threshold;

    StepOutcome outcome;
    try {
        outcome = report.resonant ? resonant_step(st.cur, alpha, report, sp)
                                  : nonresonant_step(st.cur, alpha, sp);
    } catch (const std::exception& e) {
        std::ostringstream os;
        os << "step " << n << " failed: " << e.what();
        trace.stop_reason = os.str();
        return false;
    }

    rec.xi_after = outcome.next.a.xi;
    rec.zeta_after = outcome.next.a.zeta;
    rec.residual = outcome.grid_residual;
    rec.off_cone_mass = outcome.off_cone_mass;
    rec.zero_mode = outcome.zero_mode;
    rec.dropped_mass = outcome.dropped_mass;
    rec.rounds = outcome.rounds;
    if (report.resonant) {
        rec.rotation = report.rotation();
        const double theta_q = alpha.pairing_angle(rec.rotation);
        rec.rho_update_defect =
            dioph::torus_distance(rec.xi_after.real() -
                                  (rec.xi_before.real() - 0.5 * theta_q)) +
            std::abs(rec.xi_after.imag() - rec.xi_before.imag());
        // sparsity of consecutive resonant sites
        for (auto it = trace.steps.rbegin(); it != trace.steps.rend(); ++it) {
            if (!it->resonant) continue;
            const double prev = algebra::weighted_norm(it->site, st.cur.cone.scheme);
            const double curn = algebra::weighted_norm(rec.site, st.cur.cone.scheme);
            const double eta = st.cur.cone.scheme.eta;
            rec.gap_growth_ok = curn >= std::pow(prev, 1.0 + eta / (4.0 + eta)) - 1e-9;
            break;
        }
    }
    trace.steps.push_back(rec);

    if (outcome.grid_residual > opt.residual_tol) {
        std::ostringstream os;
        os << "step " << n << ": conjugation residual " << outcome.grid_residual
           << " above tolerance";
        trace.stop_reason = os.str();
        return false;
    }

    for (auto& f : outcome.factors) trace.conj.append(std::move(f));
    st.cur = outcome.next;
    return true;
}

}  // namespace

KamTrace reduce_elliptic(const PerturbedCocycle& p, const Frequency& alpha,
                         const KamOptions& opt) {
    if (!p.a.is_elliptic())
        throw std::invalid_argument("reduce_elliptic: constant part must have real exponent");
    p.cone.validate();

    KamTrace trace;
    trace.alpha = alpha;
    DriverState st{p, p.f.width(), p.cone.aperture};
    for (int n = 0; n < opt.max_steps; ++n) {
        if (!one_kam_step(st, alpha, opt, n, trace)) break;
    }
    if (trace.stop_reason.empty()) {
        trace.converged = st.cur.f.norm() <= opt.f_target;
        trace.stop_reason = trace.converged ? "perturbation below target" : "max steps reached";
    }
    trace.terminal = st.cur;
    return trace;
}

KamTrace reduce_hyperbolic(const PerturbedCocycle& p, const Frequency& alpha,
                           const KamOptions& opt) {
    if (p.a.is_elliptic())
        throw std::invalid_argument("reduce_hyperbolic: constant part must have Im xi != 0");
    p.cone.validate();

    KamTrace trace;
    trace.alpha = alpha;
    DriverState st{p, p.f.width(), p.cone.aperture};

    // Plain KAM steps until the perturbation clears the direct
    // diagonalization threshold min(1e-8, |Im xi|^3).
    int n = 0;
    bool ok = true;
    for (; n < opt.max_steps; ++n) {
        const double eps = st.cur.f.norm();
        const double im = std::abs(st.cur.a.xi.imag());
        if (std::pow(eps, 0.9) <= std::min(1e-8, im * im * im)) break;
        if (!one_kam_step(st, alpha, opt, n, trace)) {
            ok = false;
            break;
        }
    }
    if (!ok) {
        trace.terminal = st.cur;
        return trace;
    }

    // Finish: triangular diagonalization, a split solve that leaves only
    // near-resonant diagonal modes, then the scalar cohomological equation
    // phi(x+a) - phi(x) = f(x) which removes the diagonal exactly.
    PerturbedCocycle cur = st.cur;
    std::vector<ConjFactor> fin;
    MatSeries f_tilde = cur.f;
    if (std::abs(cur.a.zeta) > 0.0) {
        const cplx u = std::exp(kI * cur.a.xi);
        const cplx den = (cur.a.orient == Orientation::Upper) ? (1.0 / u - u) : (u - 1.0 / u);
        if (std::abs(den) < 1e-12) {
            trace.stop_reason = "hyperbolic finish: degenerate diagonalization";
            trace.terminal = cur;
            return trace;
        }
        Mat2 pmat = Mat2::identity();
        if (cur.a.orient == Orientation::Upper)
            pmat.b = cur.a.zeta / den;
        else
            pmat.c = cur.a.zeta / den;
        f_tilde = algebra::conjugate_coefficients(cur.f, pmat);
        ConjFactor cf;
        cf.kind = ConjFactor::Kind::ConstMat;
        cf.cmat = pmat;
        fin.push_back(std::move(cf));
    }
    const ConstantPart a_diag{cur.a.xi, 0.0, Orientation::Upper};

    StepRecord rec;
    rec.n = n;
    rec.xi_before = cur.a.xi;
    rec.zeta_before = cur.a.zeta;
    rec.f_norm = cur.f.norm();
    rec.h = cur.f.width();
    rec.r = cur.cone.aperture;
    rec.xi_after = a_diag.xi;
    rec.zeta_after = 0.0;

    const auto& scheme = cur.f.scheme();
    PerturbedCocycle terminal;
    terminal.a = a_diag;
    terminal.cone = cur.cone;
    terminal.f = MatSeries(scheme, cur.f.width());

    if (!f_tilde.empty()) {
        const double eps = f_tilde.norm();
        const double sigma_diag = std::max(std::cbrt(eps), 1e-10);
        detail::CancelSetup setup;
        setup.cutoff = opt.k_cap;
        setup.k_cap = opt.k_cap;
        setup.tol = std::max(opt.fp_floor, 0.1 * eps * eps * eps);
        setup.max_rounds = opt.max_rounds;
        setup.denom_floor = opt.denom_floor;
        setup.cone = &cur.cone;
        const auto ball = algebra::index_ball(scheme, opt.k_cap, false);
        for (const auto& k : ball) {
            const double den = std::abs(std::exp(kI * alpha.pairing_angle(k)) - 1.0);
            if (den < sigma_diag) setup.excl.push_back({k, EntrySlot::Diag});
        }

        detail::CancelResult res;
        try {
            res = detail::cancel_low_modes(a_diag, f_tilde, alpha, setup);
        } catch (const std::exception& e) {
            trace.stop_reason = std::string("hyperbolic finish failed: ") + e.what();
            trace.terminal = cur;
            return trace;
        }
        for (const auto& y : res.ys) {
            ConjFactor cf;
            cf.kind = ConjFactor::Kind::ExpSeries;
            cf.exponent = y;
            fin.push_back(std::move(cf));
        }
        rec.rounds = res.rounds;
        rec.dropped_mass = res.recovery_residual;

        // Scalar cohomological solve over the full diagonal remainder.
        ScalarSeries phi(scheme, cur.f.width());
        for (const auto& [k, m] : res.f_final.coefficients()) {
            if (algebra::is_zero(k)) continue;
            if (std::abs(m.a) == 0.0) continue;
            const cplx den = std::exp(kI * alpha.pairing_angle(k)) - 1.0;
            if (std::abs(den) < opt.denom_floor) {
                trace.stop_reason = "hyperbolic finish: cohomological denominator underflow";
                trace.terminal = cur;
                return trace;
            }
            phi.set(k, m.a / den);
        }
        if (!phi.empty()) {
            ConjFactor cf;
            cf.kind = ConjFactor::Kind::DiagExp;
            cf.diag_phi = phi;
            fin.push_back(std::move(cf));
        }

        // Read the terminal remainder off a grid through the finish factors.
        const auto box = algebra::index_ball(scheme, opt.k_cap, true);
        const TorusGrid grid = detail::grid_for(box, f_tilde, scheme.dim);
        const auto shift = detail::rotation_shift(alpha);
        const Mat2 a0 = cur.a.matrix();
        const Mat2 at_inv = a_diag.matrix().inv_unimodular();
        std::vector<Mat2> logs(grid.total());
        for (std::size_t g = 0; g < grid.total(); ++g) {
            const auto x = grid.point(g);
            std::vector<double> xs = x;
            for (std::size_t j = 0; j < xs.size(); ++j) xs[j] += shift[j];
            Mat2 bx = Mat2::identity(), bxs = Mat2::identity();
            for (const auto& f : fin) {
                bx = bx * f.eval(x);
                bxs = bxs * f.eval(xs);
            }
            const Mat2 c = bxs.inverse() * a0 *
                           algebra::mat_exp_traceless(cur.f.evaluate_real(x)) * bx;
            logs[g] = algebra::mat_log_near_identity(at_inv * c);
        }
        auto recov =
            algebra::coefficients_from_grid<Mat2>(logs, grid, box, scheme, cur.f.width());
        terminal.f = recov.series;
        terminal.f.prune(detail::recovery_noise_floor(a_diag.matrix()));
        rec.residual = conjugation_residual(cur, terminal, fin, alpha, grid);
        rec.zero_mode = terminal.f.zero_mode_norm();
        rec.off_cone_mass = terminal.f.off_cone_mass(terminal.cone);
    }

    trace.steps.push_back(rec);
    for (auto& f : fin) trace.conj.append(std::move(f));
    trace.terminal = terminal;
    trace.converged = terminal.f.norm() <= std::max(opt.f_target, 1e-8);
    if (trace.stop_reason.empty())
        trace.stop_reason = trace.converged ? "reduced to constant (hyperbolic finish)"
                                            : "hyperbolic finish left a remainder";
    return trace;
}

namespace {

// Streams A e^{F(x0 + j 2pi alpha)} along an orbit with per-mode rotators.
class MatOrbit {
  public:
    MatOrbit(const Mat2& a_const, const MatSeries& f, const Frequency& alpha,
             const std::vector<double>& x0)
        : amat_(a_const) {
        for (const auto& [k, m] : f.coefficients()) {
            double ang0 = 0.0;
            for (std::size_t j = 0; j < k.size(); ++j) ang0 += double(k[j]) * x0[j];
            coef_.push_back(m);
            base_ang_.push_back(ang0);
            step_ang_.push_back(alpha.pairing_angle(k));
            phase_.push_back(std::polar(1.0, ang0));
            rot_.push_back(std::polar(1.0, step_ang_.back()));
        }
    }

    Mat2 next() {
        Mat2 fx = Mat2::zero();
        for (std::size_t m = 0; m < coef_.size(); ++m) fx += coef_[m] * phase_[m];
        for (std::size_t m = 0; m < coef_.size(); ++m) phase_[m] *= rot_[m];
        if ((++count_ & 0x1FFF) == 0)
            for (std::size_t m = 0; m < coef_.size(); ++m)
                phase_[m] =
                    std::polar(1.0, base_ang_[m] + double(count_) * step_ang_[m]);
        return amat_ * algebra::mat_exp_traceless(fx);
    }

  private:
    Mat2 amat_;
    std::vector<Mat2> coef_;
    std::vector<cplx> phase_, rot_;
    std::vector<double> base_ang_, step_ang_;
    std::int64_t count_ = 0;
};

std::vector<double> growth_phases_point(int i, int total, int dim) {
    std::vector<double> x(std::size_t(dim), 0.0);
    for (int j = 0; j < dim; ++j) {
        double frac = double(i) / double(total) + 0.618033988749 * double(j);
        frac -= std::floor(frac);
        x[std::size_t(j)] = kTwoPi * frac;
    }
    return x;
}

std::vector<double> sup_norms(const ConstantPart& a, const MatSeries& f,
                              const Frequency& alpha,
                              const std::vector<std::int64_t>& checkpoints, int phases) {
    std::vector<double> sup(checkpoints.size(), 0.0);
    const std::int64_t jmax = checkpoints.empty() ? 0 : checkpoints.back();
    const Mat2 amat = a.matrix();
    for (int p = 0; p < phases; ++p) {
        MatOrbit orbit(amat, f, alpha, growth_phases_point(p, phases, f.scheme().dim));
        Mat2 q = Mat2::identity();
        double log_scale = 0.0;
        std::size_t ci = 0;
        for (std::int64_t j = 1; j <= jmax; ++j) {
            q = orbit.next() * q;
            const double fn = q.fro_norm();
            if (fn > 1e100) {
                log_scale += std::log(fn);
                q *= 1.0 / fn;
            }
            while (ci < checkpoints.size() && checkpoints[ci] == j) {
                sup[ci] = std::max(sup[ci], std::exp(log_scale) * q.op_norm());
                ++ci;
            }
        }
    }
    return sup;
}

}  // namespace

GrowthCheck growth_bound_check(const PerturbedCocycle& p, const KamTrace& trace,
                               const Frequency& alpha,
                               const std::vector<std::int64_t>& checkpoints,
                               int phase_grid) {
    GrowthCheck out;
    out.checkpoints = checkpoints;
    out.zeta_abs = std::abs(trace.terminal.a.zeta);
    out.sup_original = sup_norms(p.a, p.f, alpha, checkpoints, phase_grid);
    out.sup_terminal =
        sup_norms(trace.terminal.a, trace.terminal.f, alpha, checkpoints, phase_grid);
    return out;
}

PerturbedCocycle embed_schrodinger(const cocycle::CocycleSpec& spec, const ConeSpec& cone) {
    spec.validate();
    const cplx e = spec.energy;
    const bool elliptic = std::abs(e.imag()) <= 1e-12 && std::abs(e.real()) <= 2.0;

    Mat2 u0;
    cplx xi;
    if (elliptic) {
        const double rho = std::acos(std::clamp(e.real() / 2.0, -1.0, 1.0));
        xi = rho;
        const cplx eip = std::exp(kI * rho);
        const double s = 1.0 / std::sqrt(2.0);
        u0 = Mat2{eip * s, -s, s, std::conj(eip) * s};
    } else {
        // Pick the root with modulus > 1 so that Im xi < 0.
        const cplx rad = std::sqrt(e * e - 4.0);
        cplx w = 0.5 * (e + rad);
        if (std::abs(w) < 1.0) w = 0.5 * (e - rad);
        xi = -kI * std::log(w);
        const cplx eix = std::exp(kI * xi);
        const double s = 1.0 / std::sqrt(std::abs(eix * eix) + 1.0);
        u0 = Mat2{eix * s, -s, s, eix * s};
    }

    const Mat2 a_e{e, -1.0, 1.0, 0.0};
    const Mat2 a_emb = u0.inverse() * a_e * u0;
    if (std::abs(a_emb.c) > 1e-10)
        throw std::runtime_error("embed_schrodinger: triangularization failed");

    PerturbedCocycle p;
    p.a = ConstantPart{xi, a_emb.b, Orientation::Upper};
    p.cone = cone;
    p.f = MatSeries(spec.pot.v.scheme(), spec.pot.v.width());
    const Mat2 lower{0.0, 0.0, 1.0, 0.0};
    const Mat2 t = u0.inverse() * lower * u0;
    for (const auto& [k, c] : spec.pot.v.coefficients()) {
        const cplx amp =
            spec.pot.lambda * c * std::exp(-double(k[0]) * spec.phase_shift);
        p.f.add(k, t * amp);
    }
    p.f.prune();
    return p;
}

}  // namespace qpspec::kam
