#pragma once

#include <optional>
#include <string>

#include "config.hpp"

namespace qpspec::cli {

using algebra::cplx;

// Closed-form families recognized for printed references.
enum class Family { None, Free, Exponential };

Family detect_family(const ExperimentConfig& cfg, double* lambda_eff);

struct LyapunovReport {
    double value = 0.0;
    double std_error = 0.0;
    Family family = Family::None;
    std::optional<double> reference;  // closed-form exponent when recognized
    std::string text;                 // printable report
};

LyapunovReport cmd_lyapunov(const ExperimentConfig& cfg, cplx energy, double eps);

// CSV rows (eps, lyapunov, slope, stderr); slope from neighboring rows.
std::string cmd_le_profile(const ExperimentConfig& cfg, cplx energy, double eps_min,
                           double eps_max, int steps);

struct SpectrumOutput {
    std::string csv;
    spectral::ScanSummary summary;
    int reference_checked = 0;   // points comparable against a closed form
    int reference_agreed = 0;
};

SpectrumOutput cmd_spectrum(const ExperimentConfig& cfg, int threads);

struct KamOutput {
    std::string jsonl;
    kam::KamTrace trace;
};

// Builds the triangular embedding of S_{E, lambda v} and runs the matching
// reducibility driver (elliptic for real E in [-2,2], hyperbolic otherwise).
KamOutput cmd_kam(const ExperimentConfig& cfg, cplx energy);

std::string format_double(double v);

}  // namespace qpspec::cli
