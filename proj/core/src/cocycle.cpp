#include "qpspec/cocycle.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "qpspec/rng.hpp"

namespace qpspec::cocycle {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::vector<double> random_phase(Rng& rng, int dim) {
    std::vector<double> x(std::size_t(dim), 0.0);
    for (auto& xi : x) xi = rng.uniform(0.0, kTwoPi);
    return x;
}
}  // namespace

void CocycleSpec::validate() const {
    pot.v.scheme().validate();
    if (int(alpha.alpha.size()) != pot.v.scheme().dim)
        throw std::invalid_argument("CocycleSpec: frequency dimension != potential dimension");
    if (!(std::abs(phase_shift) < pot.v.width()))
        throw std::domain_error("CocycleSpec: |eps| must be < potential width h");
}

OrbitEvaluator::OrbitEvaluator(const Potential& pot, const Frequency& alpha,
                               const std::vector<double>& x0, double eps) {
    const auto& coef = pot.v.coefficients();
    amp_.reserve(coef.size());
    for (const auto& [k, c] : coef) {
        double ang0 = 0.0;
        for (std::size_t j = 0; j < k.size(); ++j) ang0 += double(k[j]) * x0[j];
        const cplx a = pot.lambda * c * std::exp(-double(k[0]) * eps);
        mag_.push_back(std::abs(a));
        base_angle_.push_back(ang0 + std::arg(a));
        step_angle_.push_back(alpha.pairing_angle(k));
        amp_.push_back(a * std::polar(1.0, ang0));
        rot_.push_back(std::polar(1.0, step_angle_.back()));
    }
}

void OrbitEvaluator::resync() {
    for (std::size_t m = 0; m < amp_.size(); ++m)
        amp_[m] = std::polar(mag_[m], base_angle_[m] + double(step_count_) * step_angle_[m]);
}

cplx OrbitEvaluator::next() {
    cplx v = 0.0;
    for (const cplx& a : amp_) v += a;
    for (std::size_t m = 0; m < amp_.size(); ++m) amp_[m] *= rot_[m];
    if ((++step_count_ & 0x1FFF) == 0) resync();  // keep |rot products| from drifting
    return v;
}

Mat2 transfer_matrix(const CocycleSpec& spec, const std::vector<double>& x) {
    std::vector<cplx> cx(x.begin(), x.end());
    if (!cx.empty()) cx[0] += cplx(0.0, spec.phase_shift);
    const cplx v = spec.pot.v.evaluate(cx) * spec.pot.lambda;
    return {spec.energy - v, -1.0, 1.0, 0.0};
}

namespace {

// One renormalized orbit: returns (1/n) log |S_n(x0)|.
double orbit_exponent(const CocycleSpec& spec, const std::vector<double>& x0,
                      std::int64_t n) {
    OrbitEvaluator ev(spec.pot, spec.alpha, x0, spec.phase_shift);
    Mat2 q = Mat2::identity();
    double acc = 0.0;
    for (std::int64_t j = 0; j < n; ++j) {
        const cplx v = ev.next();
        const Mat2 s{spec.energy - v, -1.0, 1.0, 0.0};
        q = s * q;
        const double norm = q.fro_norm();
        acc += std::log(norm);
        q *= 1.0 / norm;
    }
    return (acc + std::log(q.op_norm())) / double(n);
}

}  // namespace

LyapunovEstimate lyapunov_at_phases(const CocycleSpec& spec, std::int64_t iterates,
                                    const std::vector<std::vector<double>>& phases) {
    if (iterates < 1) throw std::invalid_argument("lyapunov: iterates must be >= 1");
    if (phases.empty()) throw std::invalid_argument("lyapunov: need at least one phase");
    spec.validate();

    double sum = 0.0, sumsq = 0.0, last_acc = 0.0;
    for (const auto& x0 : phases) {
        const double lp = orbit_exponent(spec, x0, iterates);
        sum += lp;
        sumsq += lp * lp;
        last_acc = lp * double(iterates);
    }
    const int n = int(phases.size());
    LyapunovEstimate est;
    est.value = sum / double(n);
    est.iterates = iterates;
    est.phase_samples = n;
    est.log_sum = last_acc;
    if (n > 1) {
        const double var = std::max(0.0, (sumsq - sum * sum / double(n)) / double(n - 1));
        est.std_error = std::sqrt(var / double(n));
    }
    return est;
}

LyapunovEstimate lyapunov(const CocycleSpec& spec, std::int64_t iterates, int phases,
                          std::uint64_t seed) {
    if (phases < 1) throw std::invalid_argument("lyapunov: phases must be >= 1");
    const int dim = spec.pot.v.scheme().dim;
    std::vector<std::vector<double>> starts;
    starts.reserve(std::size_t(phases));
    for (int p = 0; p < phases; ++p) {
        Rng rng(derive_seed(seed, std::uint64_t(p)));
        starts.push_back(random_phase(rng, dim));
    }
    return lyapunov_at_phases(spec, iterates, starts);
}

double free_laplacian_le(cplx energy) {
    const cplx rad = std::sqrt(energy * energy - 4.0);
    const double m1 = std::abs(0.5 * (energy + rad));
    const double m2 = std::abs(0.5 * (energy - rad));
    return std::log(std::max(m1, m2));
}

double acceleration(const CocycleSpec& spec, double eps, double step,
                    std::int64_t iterates, int phases, std::uint64_t seed) {
    if (!(step > 0.0)) throw std::invalid_argument("acceleration: step must be > 0");
    CocycleSpec up = spec, dn = spec;
    up.phase_shift = eps + step;
    dn.phase_shift = eps - step;
    up.validate();
    dn.validate();
    const double lu = lyapunov(up, iterates, phases, seed).value;
    const double ld = lyapunov(dn, iterates, phases, seed).value;
    return (lu - ld) / (2.0 * step);
}

namespace {

struct Direction {
    cplx u1, u2;  // unit vector in C^2
};

double angle_between(const Direction& a, const Direction& b) {
    const double ip = std::abs(std::conj(a.u1) * b.u1 + std::conj(a.u2) * b.u2);
    return std::acos(std::min(1.0, ip));
}

Direction normalize(cplx v1, cplx v2) {
    const double n = std::sqrt(std::norm(v1) + std::norm(v2));
    return {v1 / n, v2 / n};
}

// Right singular directions of a renormalized product: eigenvectors of P*P.
void singular_directions(const Mat2& p, Direction& smallest, Direction& largest) {
    // Hermitian H = P^dagger P = [[h11, h12], [conj(h12), h22]]
    const double h11 = std::norm(p.a) + std::norm(p.c);
    const double h22 = std::norm(p.b) + std::norm(p.d);
    const cplx h12 = std::conj(p.a) * p.b + std::conj(p.c) * p.d;
    const double tr = h11 + h22;
    const double det = h11 * h22 - std::norm(h12);
    const double disc = std::sqrt(std::max(tr * tr / 4.0 - det, 0.0));
    const double lam_max = tr / 2.0 + disc;
    const double lam_min = tr / 2.0 - disc;
    auto eigvec = [&](double lam) -> Direction {
        // (H - lam) v = 0
        if (std::abs(h12) > 1e-300)
            return normalize(h12, cplx(lam - h11));
        return (h11 >= lam) == (h11 >= h22) ? Direction{1.0, 0.0} : Direction{0.0, 1.0};
    };
    largest = eigvec(lam_max);
    smallest = eigvec(lam_min);
}

struct SplitSample {
    Direction stable, unstable;
    bool ok = false;
};

// Stable direction at x: most contracted right-singular direction of the
// forward product from x. Unstable at x: most expanded image direction of the
// product ending at x. Convergence checked between n/2 and n.
SplitSample splitting_at(const CocycleSpec& spec, const std::vector<double>& x, int n,
                         double conv_tol) {
    SplitSample out;
    const int dim = spec.pot.v.scheme().dim;

    auto product_from = [&](const std::vector<double>& start, int steps) {
        OrbitEvaluator ev(spec.pot, spec.alpha, start, spec.phase_shift);
        Mat2 q = Mat2::identity();
        Mat2 half = Mat2::identity();
        for (int j = 0; j < steps; ++j) {
            const cplx v = ev.next();
            q = Mat2{spec.energy - v, -1.0, 1.0, 0.0} * q;
            q *= 1.0 / q.fro_norm();
            if (j + 1 == steps / 2) half = q;
        }
        return std::pair<Mat2, Mat2>(q, half);
    };

    // forward from x
    auto [pf, pf_half] = product_from(x, n);
    Direction s_full, s_half, dummy;
    singular_directions(pf, s_full, dummy);
    singular_directions(pf_half, s_half, dummy);
    if (angle_between(s_full, s_half) > conv_tol) return out;

    // product ending at x: start at x - n alpha
    std::vector<double> back(x);
    for (int j = 0; j < dim; ++j)
        back[std::size_t(j)] -= double(n) * kTwoPi * spec.alpha.alpha[std::size_t(j)];
    auto [pb, pb_half_ignored] = product_from(back, n);
    (void)pb_half_ignored;
    Direction small_b, large_right;
    singular_directions(pb, small_b, large_right);
    // image of the most expanded right direction
    const cplx w1 = pb.a * large_right.u1 + pb.b * large_right.u2;
    const cplx w2 = pb.c * large_right.u1 + pb.d * large_right.u2;
    // convergence of the unstable field: compare with a (n - 1)-step product
    std::vector<double> back1(x);
    for (int j = 0; j < dim; ++j)
        back1[std::size_t(j)] -= double(n - 7) * kTwoPi * spec.alpha.alpha[std::size_t(j)];
    auto [pb1, pb1_half] = product_from(back1, n - 7);
    (void)pb1_half;
    Direction small_b1, large_right1;
    singular_directions(pb1, small_b1, large_right1);
    const cplx z1 = pb1.a * large_right1.u1 + pb1.b * large_right1.u2;
    const cplx z2 = pb1.c * large_right1.u1 + pb1.d * large_right1.u2;
    const Direction u_full = normalize(w1, w2);
    const Direction u_alt = normalize(z1, z2);
    if (angle_between(u_full, u_alt) > conv_tol) return out;

    out.stable = s_full;
    out.unstable = u_full;
    out.ok = true;
    return out;
}

}  // namespace

UhReport uh_detect(const CocycleSpec& spec, const UhOptions& opt) {
    spec.validate();
    UhReport rep;
    rep.le_zero = lyapunov(spec, opt.iterates, opt.phases, opt.seed).value;

    // Splitting sub-test.
    bool all_converged = true;
    double min_angle = std::numbers::pi;
    Rng rng(derive_seed(opt.seed, 0x5917ULL));
    for (int p = 0; p < opt.split_phases; ++p) {
        const auto x = random_phase(rng, spec.pot.v.scheme().dim);
        const auto smp = splitting_at(spec, x, opt.split_iterates, opt.split_conv_tol);
        if (!smp.ok) {
            all_converged = false;
            break;
        }
        min_angle = std::min(min_angle, angle_between(smp.stable, smp.unstable));
    }
    rep.split_converged = all_converged;
    rep.min_split_angle = all_converged ? min_angle : -1.0;

    // Affinity sub-test (one frequency only).
    const bool one_freq = spec.pot.v.scheme().dim == 1;
    const double strip = spec.pot.v.width();
    rep.affinity_applicable =
        one_freq && std::abs(spec.phase_shift) + opt.affinity_step < strip;
    if (rep.affinity_applicable) {
        CocycleSpec up = spec, dn = spec;
        up.phase_shift = spec.phase_shift + opt.affinity_step;
        dn.phase_shift = spec.phase_shift - opt.affinity_step;
        const double lu = lyapunov(up, opt.iterates, opt.phases, opt.seed).value;
        const double ld = lyapunov(dn, opt.iterates, opt.phases, opt.seed).value;
        rep.affinity_defect = std::abs(lu + ld - 2.0 * rep.le_zero);
    }

    // Verdict. A vanishing exponent excludes UH outright. With one frequency
    // and positive exponent, UH is equivalent to the affine behavior of
    // eps -> L(eps) near 0, so a decisive defect settles the point in either
    // direction; the splitting test arbitrates otherwise.
    if (rep.le_zero <= opt.l_min) {
        rep.verdict = UhVerdict::NotUh;
        return rep;
    }
    if (rep.affinity_applicable) {
        if (rep.affinity_defect <= opt.affinity_tol) {
            rep.verdict = UhVerdict::Uh;
            return rep;
        }
        if (rep.affinity_defect > 3.0 * opt.affinity_tol) {
            rep.verdict = UhVerdict::NotUh;
            return rep;
        }
    }
    if (rep.split_converged)
        rep.verdict = rep.min_split_angle >= opt.theta_min ? UhVerdict::Uh : UhVerdict::NotUh;
    else
        rep.verdict = UhVerdict::Undecided;
    return rep;
}

}  // namespace qpspec::cocycle
