#pragma once

#include <string>
#include <vector>

#include "qpspec/weights.hpp"

namespace qpspec::dioph {

using algebra::MultiIndex;
using algebra::WeightScheme;

// Frequency vector, stored as fractions of the circle (alpha_j in [0,1));
// angles are alpha_j * 2pi. Rational independence of (1, alpha) is assumed
// for arbitrary input and certified for the named presets.
struct Frequency {
    std::vector<double> alpha;

    int dim() const { return int(alpha.size()); }

    // Angle <k, 2pi alpha> in radians (not reduced).
    double pairing_angle(const MultiIndex& k) const;

    static Frequency golden();                 // (sqrt(5)-1)/2
    static Frequency silver();                 // sqrt(2)-1
    static Frequency golden_silver();          // d = 2
    static Frequency cubic();                  // d = 2: (2^{1/3}-1, 2^{2/3}-1)
    static Frequency preset(const std::string& name);
};

struct DioParams {
    double gamma = 0.1;  // in (0,1)
    double tau = 2.0;    // > 1
    void validate() const;
};

// Distance to 2pi Z: min_n |t - 2pi n|.
double torus_distance(double t);

// |<k, 2pi alpha>|_T; requires k != 0.
double small_denominator(const MultiIndex& k, const Frequency& alpha);

// Certified lower bound for the Diophantine constant at scale K:
// min over 0 < |k|_eta <= K of small_denominator(k) * prod_j (1 + <j>^tau |k_j|^tau).
// Returns +infinity when the scan range is empty.
double estimate_gamma(const Frequency& alpha, double tau, double scan_bound, double eta);

// gamma * (1+N)^{-C1 N^{1/(eta+1)}}; the a-priori small-denominator floor.
double small_denom_bound(double n, const DioParams& params, double eta, double c1 = 1.0);

}  // namespace qpspec::dioph
