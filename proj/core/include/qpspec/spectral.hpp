#pragma once

#include <vector>

#include "qpspec/cocycle.hpp"

namespace qpspec::spectral {

using algebra::cplx;
using cocycle::CocycleSpec;
using cocycle::UhOptions;
using cocycle::UhVerdict;

enum class Classification { InSpectrum, Resolvent, Undecided };

struct SpectrumVerdict {
    cplx energy{};
    Classification cls = Classification::Undecided;
    double lyapunov = 0.0;
    double affinity_defect = -1.0;
    double splitting_angle = -1.0;
};

struct SpectrumReference {
    bool on_spectrum = false;
    double distance = 0.0;  // to the reference spectrum set
};

// Exponential-potential reference spectrum: the interval [-2,2] for
// |lambda| <= 1, the ellipse with semi-axes (2 cosh xi, 2 sinh xi),
// xi = ln|lambda|, for |lambda| > 1.
SpectrumReference sarnak_spectrum_reference(double lambda, cplx energy,
                                            double tol = 1e-9);

// max(log|E/2 + sqrt(E^2-4)/2|, log|lambda|), every E in C.
double sarnak_le_reference(double lambda, cplx energy);

// Shifted almost Mathieu exponent identity: max(log|lambda| + |eps|, L0).
double amo_shift_le_reference(double lambda, double eps, double l_zero);

struct ScanRegion {
    double re_min = -3.0, re_max = 3.0;
    double im_min = -1.0, im_max = 1.0;
    int re_count = 21, im_count = 7;
};

struct ScanSummary {
    int total = 0;
    int in_spectrum = 0, resolvent = 0, undecided = 0;
    double max_le_on_spectrum = 0.0;
};

struct ScanResult {
    std::vector<SpectrumVerdict> grid;  // row-major, re fastest
    ScanSummary summary;
};

// Classifies each grid energy through the uniform-hyperbolicity detector.
// Deterministic for a fixed seed; element-parallel over grid points.
ScanResult spectrum_scan(const CocycleSpec& spec, const ScanRegion& region,
                         const UhOptions& opt, int threads = 1);

// Eigenvalues of the n x n tridiagonal section with diagonal
// lambda v(x + 2pi j alpha) and unit off-diagonals, sorted by (Re, Im).
// Diagnostic overlay only; finite sections of non-normal operators may
// pollute, so no spectrum verdict is ever derived from them.
std::vector<cplx> finite_section_eigenvalues(const CocycleSpec& spec,
                                             const std::vector<double>& x, int n);

}  // namespace qpspec::spectral
