#include "commands.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace qpspec::cli {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

Family detect_family(const ExperimentConfig& cfg, double* lambda_eff) {
    if (lambda_eff) *lambda_eff = 0.0;
    const auto& coef = cfg.potential.v.coefficients();
    if (cfg.potential.lambda == 0.0 || coef.empty()) return Family::Free;
    if (cfg.scheme.dim == 1 && coef.size() == 1) {
        const auto& [k, c] = *coef.begin();
        if (k[0] > 0) {
            // exponential-type potential: a single positive mode; rescaling the
            // coefficient only translates the phase
            if (lambda_eff) *lambda_eff = std::abs(cfg.potential.lambda) * std::abs(c);
            return Family::Exponential;
        }
    }
    return Family::None;
}

LyapunovReport cmd_lyapunov(const ExperimentConfig& cfg, cplx energy, double eps) {
    const auto spec = cfg.cocycle_spec(energy, eps);
    const auto est =
        cocycle::lyapunov(spec, cfg.engine.iterates, cfg.engine.phases, cfg.engine.seed);

    LyapunovReport rep;
    rep.value = est.value;
    rep.std_error = est.std_error;
    double lam = 0.0;
    rep.family = detect_family(cfg, &lam);

    std::ostringstream os;
    os << "E = " << format_double(energy.real());
    if (energy.imag() != 0.0) os << (energy.imag() > 0 ? "+" : "") << format_double(energy.imag()) << "i";
    os << "  eps = " << format_double(eps) << "\n";
    os << "lyapunov = " << format_double(est.value) << " +- " << format_double(est.std_error)
       << "  (n = " << est.iterates << ", phases = " << est.phase_samples << ")\n";
    if (eps == 0.0 && rep.family == Family::Free) {
        rep.reference = cocycle::free_laplacian_le(energy);
        os << "free-laplacian reference = " << format_double(*rep.reference)
           << "  deviation = " << format_double(est.value - *rep.reference) << "\n";
    } else if (eps == 0.0 && rep.family == Family::Exponential) {
        rep.reference = spectral::sarnak_le_reference(lam, energy);
        os << "exponential-potential reference = " << format_double(*rep.reference)
           << "  deviation = " << format_double(est.value - *rep.reference) << "\n";
    }
    rep.text = os.str();
    return rep;
}

std::string cmd_le_profile(const ExperimentConfig& cfg, cplx energy, double eps_min,
                           double eps_max, int steps) {
    if (steps < 2) throw std::invalid_argument("le-profile: need at least 2 steps");
    std::vector<double> eps(std::size_t(steps), 0.0), le(std::size_t(steps), 0.0),
        err(std::size_t(steps), 0.0);
    for (int i = 0; i < steps; ++i) {
        eps[std::size_t(i)] =
            eps_min + (eps_max - eps_min) * double(i) / double(steps - 1);
        const auto spec = cfg.cocycle_spec(energy, eps[std::size_t(i)]);
        const auto est = cocycle::lyapunov(spec, cfg.engine.iterates, cfg.engine.phases,
                                           cfg.engine.seed);
        le[std::size_t(i)] = est.value;
        err[std::size_t(i)] = est.std_error;
    }
    std::ostringstream os;
    os << "# qpspec le-profile config=" << cfg.digest << " seed=" << cfg.engine.seed
       << " E=" << format_double(energy.real()) << "," << format_double(energy.imag())
       << "\n";
    os << "eps,lyapunov,slope,stderr\n";
    for (int i = 0; i < steps; ++i) {
        const int lo = std::max(i - 1, 0);
        const int hi = std::min(i + 1, steps - 1);
        const double slope = (le[std::size_t(hi)] - le[std::size_t(lo)]) /
                             (eps[std::size_t(hi)] - eps[std::size_t(lo)]);
        os << format_double(eps[std::size_t(i)]) << "," << format_double(le[std::size_t(i)])
           << "," << format_double(slope) << "," << format_double(err[std::size_t(i)])
           << "\n";
    }
    return os.str();
}

SpectrumOutput cmd_spectrum(const ExperimentConfig& cfg, int threads) {
    const auto spec = cfg.cocycle_spec(0.0, 0.0);
    cocycle::UhOptions opt = cfg.engine.uh;
    const auto res = spectral::spectrum_scan(spec, cfg.region, opt, threads);

    SpectrumOutput out;
    out.summary = res.summary;

    double lam = 0.0;
    const Family family = detect_family(cfg, &lam);
    const double cell_re =
        (cfg.region.re_max - cfg.region.re_min) / double(cfg.region.re_count - 1);
    const double cell_im =
        (cfg.region.im_max - cfg.region.im_min) / double(cfg.region.im_count - 1);
    const double cell = std::hypot(cell_re, cell_im);

    std::ostringstream os;
    os << "# qpspec spectrum config=" << cfg.digest << " seed=" << cfg.engine.seed << "\n";
    os << "re_e,im_e,classification,lyapunov,affinity_defect,splitting_angle\n";
    for (const auto& v : res.grid) {
        const char* cls = v.cls == spectral::Classification::InSpectrum ? "in-spectrum"
                          : v.cls == spectral::Classification::Resolvent ? "resolvent"
                                                                         : "undecided";
        os << format_double(v.energy.real()) << "," << format_double(v.energy.imag()) << ","
           << cls << "," << format_double(v.lyapunov) << ","
           << format_double(v.affinity_defect) << "," << format_double(v.splitting_angle)
           << "\n";

        if (family == Family::Free || family == Family::Exponential) {
            double dist;
            if (family == Family::Free) {
                const double dx = std::max(std::abs(v.energy.real()) - 2.0, 0.0);
                dist = std::hypot(dx, v.energy.imag());
            } else {
                dist = spectral::sarnak_spectrum_reference(lam, v.energy).distance;
            }
            // compare only points farther than one grid cell from the
            // reference set boundary
            if (v.cls != spectral::Classification::Undecided &&
                std::abs(dist) > cell) {
                ++out.reference_checked;
                const bool should_resolve = dist > 0.0;
                const bool resolved = v.cls == spectral::Classification::Resolvent;
                if (should_resolve == resolved) ++out.reference_agreed;
            }
        }
    }
    out.csv = os.str();
    return out;
}

KamOutput cmd_kam(const ExperimentConfig& cfg, cplx energy) {
    const auto spec = cfg.cocycle_spec(energy, 0.0);
    const auto cone = cfg.cone_or_full();
    const auto p = kam::embed_schrodinger(spec, cone);

    KamOutput out;
    if (p.a.is_elliptic())
        out.trace = kam::reduce_elliptic(p, cfg.frequency, cfg.kam);
    else
        out.trace = kam::reduce_hyperbolic(p, cfg.frequency, cfg.kam);
    out.jsonl = out.trace.to_jsonl();
    return out;
}

}  // namespace qpspec::cli
