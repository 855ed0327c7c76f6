#pragma once

#include <cstdint>
#include <optional>

#include "qpspec/dioph.hpp"
#include "qpspec/series.hpp"

namespace qpspec::cocycle {

using algebra::cplx;
using algebra::Mat2;
using algebra::ScalarSeries;
using dioph::Frequency;

// lambda * v with v a finitely supported (possibly cone-tagged) series.
struct Potential {
    double lambda = 0.0;
    ScalarSeries v;
};

// The family S_{E, lambda v}(x + i eps), eps applied to the first coordinate.
struct CocycleSpec {
    Frequency alpha;
    cplx energy;
    Potential pot;
    double phase_shift = 0.0;  // eps, |eps| < h

    void validate() const;
};

struct LyapunovEstimate {
    double value = 0.0;       // averaged exponent, >= 0 up to noise
    std::int64_t iterates = 0;
    int phase_samples = 0;
    double log_sum = 0.0;     // accumulated renormalization logs (last phase)
    double std_error = 0.0;   // over the phase sample
};

// S_{E,lambda v}(x) = [[E - lambda v(x + i eps), -1], [1, 0]].
Mat2 transfer_matrix(const CocycleSpec& spec, const std::vector<double>& x);

// Birkhoff average of log |renormalized product| over `phases` random phases.
// Deterministic for a fixed seed.
LyapunovEstimate lyapunov(const CocycleSpec& spec, std::int64_t iterates, int phases,
                          std::uint64_t seed);

// Same estimator over caller-chosen starting phases.
LyapunovEstimate lyapunov_at_phases(const CocycleSpec& spec, std::int64_t iterates,
                                    const std::vector<std::vector<double>>& phases);

// max over both sqrt branches of log |E/2 +- sqrt(E^2-4)/2|; zero exactly on [-2,2].
double free_laplacian_le(cplx energy);

// Central-difference slope of eps -> L(eps) at `eps`.
double acceleration(const CocycleSpec& spec, double eps, double step,
                    std::int64_t iterates, int phases, std::uint64_t seed);

enum class UhVerdict { Uh, NotUh, Undecided };

struct UhOptions {
    std::int64_t iterates = 100000;
    int phases = 8;
    std::uint64_t seed = 1;
    double l_min = 5e-3;          // exponent floor below which UH is excluded
    double theta_min = 1e-3;      // minimal angle between the direction fields
    double affinity_tol = 1e-2;   // defect tolerance for the affine test
    double affinity_step = 0.1;   // probe offset delta0
    int split_iterates = 512;
    int split_phases = 24;
    double split_conv_tol = 1e-5; // direction convergence angle (radians)
};

struct UhReport {
    UhVerdict verdict = UhVerdict::Undecided;
    double le_zero = 0.0;          // L(E, 0)
    double affinity_defect = -1.0; // |L(d)+L(-d)-2L(0)|, -1 when inapplicable
    double min_split_angle = -1.0; // min angle between unstable/stable fields
    bool split_converged = false;
    bool affinity_applicable = false;
};

// Uniform-hyperbolicity detector: projective splitting test plus, for d = 1,
// the affine-in-eps criterion. Undecided is a first-class outcome.
UhReport uh_detect(const CocycleSpec& spec, const UhOptions& opt = {});

// Streams v(x0 + j 2pi alpha + i eps e_1) along an orbit using exact per-mode
// rotators; the workhorse of every transfer-matrix loop.
class OrbitEvaluator {
  public:
    OrbitEvaluator(const Potential& pot, const Frequency& alpha,
                   const std::vector<double>& x0, double eps);

    cplx next();  // value at the current orbit point, then advance

  private:
    void resync();

    std::vector<cplx> amp_;
    std::vector<cplx> rot_;
    std::vector<double> base_angle_;
    std::vector<double> step_angle_;
    std::vector<double> mag_;
    std::int64_t step_count_ = 0;
};

}  // namespace qpspec::cocycle
