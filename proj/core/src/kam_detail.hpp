#pragma once

// Internals shared by the KAM step and driver translation units.

#include "qpspec/kam.hpp"

namespace qpspec::kam::detail {

struct CancelSetup {
    double cutoff = 0.0;
    std::vector<Exclusion> excl;
    double k_cap = 64.0;
    double tol = 1e-13;
    int max_rounds = 16;
    double denom_floor = 1e-15;
    const ConeSpec* cone = nullptr;  // solve target restricted to cone modes
};

// Grid recoveries carry flat rounding noise ~eps at every mode; under the
// analytic weight e^{h|k|} that noise would masquerade as high-mode content,
// so recovered coefficients below this floor are discarded.
double recovery_noise_floor(const Mat2& amat);

struct CancelResult {
    std::vector<MatSeries> ys;
    MatSeries f_final;
    int rounds = 0;
    double final_low = 0.0;
    bool converged = false;
    double recovery_residual = 0.0;
    double y_norm_sum = 0.0;
    std::vector<double> round_norms;
};

// Newton rounds of the twisted-difference solve with exact grid re-reads of
// log(A^{-1} e^{-Y(x+a)} A e^{F(x)} e^{Y(x)}).
CancelResult cancel_low_modes(const ConstantPart& a, const MatSeries& f,
                              const Frequency& alpha, const CancelSetup& setup);

algebra::TorusGrid grid_for(const std::vector<MultiIndex>& box, const MatSeries& f,
                            int dim);

std::vector<double> rotation_shift(const Frequency& alpha);

}  // namespace qpspec::kam::detail
