#include "qpspec/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <thread>

#include <Eigen/Eigenvalues>

#include "qpspec/rng.hpp"

namespace qpspec::spectral {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

SpectrumReference sarnak_spectrum_reference(double lambda, cplx energy, double tol) {
    if (lambda == 0.0)
        throw std::invalid_argument("sarnak_spectrum_reference: lambda must be nonzero");
    SpectrumReference ref;
    if (std::abs(lambda) <= 1.0) {
        const double dx = std::max(std::abs(energy.real()) - 2.0, 0.0);
        ref.distance = std::hypot(dx, energy.imag());
    } else {
        const double xi = std::log(std::abs(lambda));
        const double a = 2.0 * std::cosh(xi);
        const double b = 2.0 * std::sinh(xi);
        // nearest-point distance by dense parameter scan plus local refinement
        auto dist_at = [&](double t) {
            return std::hypot(energy.real() - a * std::cos(t), energy.imag() - b * std::sin(t));
        };
        double best_t = 0.0, best = dist_at(0.0);
        const int coarse = 4096;
        for (int i = 1; i < coarse; ++i) {
            const double t = kTwoPi * double(i) / double(coarse);
            const double d = dist_at(t);
            if (d < best) {
                best = d;
                best_t = t;
            }
        }
        double step = kTwoPi / double(coarse);
        for (int it = 0; it < 60; ++it) {
            step *= 0.5;
            if (dist_at(best_t + step) < best) best_t += step;
            else if (dist_at(best_t - step) < best) best_t -= step;
            best = dist_at(best_t);
        }
        ref.distance = best;
    }
    ref.on_spectrum = ref.distance <= tol;
    return ref;
}

double sarnak_le_reference(double lambda, cplx energy) {
    if (lambda == 0.0)
        throw std::invalid_argument("sarnak_le_reference: lambda must be nonzero");
    return std::max(cocycle::free_laplacian_le(energy), std::log(std::abs(lambda)));
}

double amo_shift_le_reference(double lambda, double eps, double l_zero) {
    return std::max(std::log(std::abs(lambda)) + std::abs(eps), l_zero);
}

ScanResult spectrum_scan(const CocycleSpec& spec, const ScanRegion& region,
                         const UhOptions& opt, int threads) {
    if (region.re_count < 2 || region.im_count < 2)
        throw std::invalid_argument("spectrum_scan: resolution must be >= 2 per axis");
    spec.validate();

    const std::size_t total = std::size_t(region.re_count) * std::size_t(region.im_count);
    ScanResult res;
    res.grid.resize(total);

    auto classify_point = [&](std::size_t idx) {
        const int i = int(idx) % region.re_count;
        const int j = int(idx) / region.re_count;
        const double re = region.re_min +
                          (region.re_max - region.re_min) * double(i) /
                              double(region.re_count - 1);
        const double im = region.im_min +
                          (region.im_max - region.im_min) * double(j) /
                              double(region.im_count - 1);
        CocycleSpec point = spec;
        point.energy = cplx(re, im);
        UhOptions local = opt;
        local.seed = derive_seed(opt.seed, idx);  // per-point stream: thread-count invariant
        const auto rep = uh_detect(point, local);
        SpectrumVerdict v;
        v.energy = point.energy;
        v.lyapunov = rep.le_zero;
        v.affinity_defect = rep.affinity_defect;
        v.splitting_angle = rep.min_split_angle;
        switch (rep.verdict) {
            case UhVerdict::Uh: v.cls = Classification::Resolvent; break;
            case UhVerdict::NotUh: v.cls = Classification::InSpectrum; break;
            case UhVerdict::Undecided: v.cls = Classification::Undecided; break;
        }
        res.grid[idx] = v;
    };

    if (threads <= 1) {
        for (std::size_t idx = 0; idx < total; ++idx) classify_point(idx);
    } else {
        std::vector<std::thread> pool;
        std::size_t chunk = (total + std::size_t(threads) - 1) / std::size_t(threads);
        for (int t = 0; t < threads; ++t) {
            const std::size_t lo = std::size_t(t) * chunk;
            const std::size_t hi = std::min(total, lo + chunk);
            if (lo >= hi) break;
            pool.emplace_back([&, lo, hi] {
                for (std::size_t idx = lo; idx < hi; ++idx) classify_point(idx);
            });
        }
        for (auto& th : pool) th.join();
    }

    res.summary.total = int(total);
    for (const auto& v : res.grid) {
        switch (v.cls) {
            case Classification::InSpectrum:
                ++res.summary.in_spectrum;
                res.summary.max_le_on_spectrum =
                    std::max(res.summary.max_le_on_spectrum, std::abs(v.lyapunov));
                break;
            case Classification::Resolvent: ++res.summary.resolvent; break;
            case Classification::Undecided: ++res.summary.undecided; break;
        }
    }
    return res;
}

std::vector<cplx> finite_section_eigenvalues(const CocycleSpec& spec,
                                             const std::vector<double>& x, int n) {
    if (n < 1) throw std::invalid_argument("finite_section_eigenvalues: n must be >= 1");
    spec.validate();

    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(n, n);
    const int dim = spec.pot.v.scheme().dim;
    for (int j = 0; j < n; ++j) {
        std::vector<cplx> xj(x.begin(), x.end());
        for (int a = 0; a < dim; ++a)
            xj[std::size_t(a)] += kTwoPi * double(j) * spec.alpha.alpha[std::size_t(a)];
        if (!xj.empty()) xj[0] += cplx(0.0, spec.phase_shift);
        m(j, j) = spec.pot.lambda * spec.pot.v.evaluate(xj);
        if (j + 1 < n) {
            m(j, j + 1) = 1.0;
            m(j + 1, j) = 1.0;
        }
    }
    if (n == 1) return {m(0, 0)};

    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(m, false);
    if (solver.info() != Eigen::Success)
        throw std::runtime_error("finite_section_eigenvalues: eigensolver failed");
    std::vector<cplx> out(std::size_t(n), cplx{});
    for (int j = 0; j < n; ++j) out[std::size_t(j)] = solver.eigenvalues()(j);
    std::sort(out.begin(), out.end(), [](const cplx& a, const cplx& b) {
        if (a.real() != b.real()) return a.real() < b.real();
        return a.imag() < b.imag();
    });
    return out;
}

}  // namespace qpspec::spectral
