#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qpspec/cocycle.hpp"
#include "qpspec/dioph.hpp"
#include "qpspec/grid.hpp"
#include "qpspec/series.hpp"

namespace qpspec::kam {

using algebra::ConeSpec;
using algebra::cplx;
using algebra::Mat2;
using algebra::MatSeries;
using algebra::MultiIndex;
using algebra::ScalarSeries;
using dioph::Frequency;

enum class Orientation { Upper, Lower };

// Triangular constant cocycle matrix diag(e^{i xi}, e^{-i xi}) with
// off-diagonal zeta in the corner selected by the orientation.
struct ConstantPart {
    cplx xi{};
    cplx zeta{};
    Orientation orient = Orientation::Upper;

    Mat2 matrix() const;
    bool is_elliptic(double tol = 1e-12) const { return std::abs(xi.imag()) <= tol; }
    double rho_mod_pi() const;  // Re xi folded to (-pi/2, pi/2]
};

enum class EntrySlot { Diag, UpperRight, LowerLeft };

struct Exclusion {
    MultiIndex site;
    EntrySlot slot;
};

struct ResonanceReport {
    bool resonant = false;
    MultiIndex site;        // in the scanned cone slab, empty when nonresonant
    int branch = 0;         // -1: |e^{i(<k,a>-2xi)}-1| < delta; +1: the + branch
    double offending = 0.0; // min over scanned sites/branches
    double threshold = 0.0;
    bool near_threshold = false;

    // Half-angle rotation vector q: the resonant corner becomes constant
    // under Q_q; q = -branch * site.
    MultiIndex rotation() const;
    EntrySlot resonant_slot() const {
        return branch < 0 ? EntrySlot::UpperRight : EntrySlot::LowerLeft;
    }
};

// Scan T_N Gamma_r for |e^{i(<k,alpha> +- 2 xi)} - 1| < delta. Ties break by
// smallest |k|_eta then lexicographic order.
ResonanceReport classify_resonance(const ConstantPart& a, const Frequency& alpha,
                                   const ConeSpec& cone, double scan_bound, double delta);

// Twisted difference (L_A Y)(x) = A^{-1} Y(x + alpha) A - Y(x), coefficientwise.
MatSeries apply_twisted_difference(const ConstantPart& a, const MatSeries& y,
                                   const Frequency& alpha);

// Solve L_A Y = F componentwise in Fourier space, skipping the zero mode and
// any excluded (site, slot) pairs. Throws on a non-excluded denominator below
// the floor, naming the offending index and component.
MatSeries homological_solve(const ConstantPart& a, const MatSeries& f,
                            const Frequency& alpha,
                            const std::vector<Exclusion>& exclusions = {},
                            double denom_floor = 1e-15);

struct PerturbedCocycle {
    ConstantPart a;
    MatSeries f;     // traceless coefficients, width h carried by the series
    ConeSpec cone;   // aperture r
};

// Shrinking-width schedule: eps_{n+1} = 2 eps_n^3,
// h_{n+1} = h_n - (h - h')/(n+2)^2, r likewise, N_n = 2|log eps_n|/(h_n - h_{n+1}).
struct KamSchedule {
    double h0 = 0.0, h_final = 0.0, r0 = 0.0, r_final = 0.0;
    std::vector<double> h, r, eps, n_trunc;

    static KamSchedule build(double h, double h_final, double r, double r_final,
                             double eps0, int steps);
};

struct KamOptions {
    double h_final = 0.3;     // h'
    double r_final = 0.5;     // r'
    int max_steps = 24;
    double f_target = 1e-12;  // stop once |F_n|_{h_n} falls below
    double k_cap = 64.0;      // representable |k|_eta ceiling
    double scan_bound = 64.0; // resonance scan radius ceiling
    double delta_cap = 0.02;  // resonance threshold ceiling (delta = min(eps^{1/10}, cap))
    double fp_floor = 1e-13;  // fixed-point low-mode target floor
    int max_rounds = 16;
    double residual_tol = 1e-9;
    double denom_floor = 1e-15;
};

// One factor of an accumulated conjugation Phi(x); products read left to right.
struct ConjFactor {
    enum class Kind { ConstMat, ExpSeries, HalfRotation, DiagExp };
    Kind kind = Kind::ConstMat;
    Mat2 cmat = Mat2::identity();
    MatSeries exponent;     // ExpSeries: e^{Y(x)}
    MultiIndex half_index;  // HalfRotation: diag(e^{i<k,x>/2}, e^{-i<k,x>/2}) on 2T^d
    ScalarSeries diag_phi;  // DiagExp: diag(e^{phi(x)}, e^{-phi(x)})

    Mat2 eval(const std::vector<double>& x) const;
};

struct Conjugation {
    std::vector<ConjFactor> factors;
    Mat2 eval(const std::vector<double>& x) const;
    void append(ConjFactor f) { factors.push_back(std::move(f)); }
};

struct StepRecord {
    int n = 0;
    bool resonant = false;
    MultiIndex site;
    int branch = 0;
    MultiIndex rotation;
    cplx xi_before{}, xi_after{};
    cplx zeta_before{}, zeta_after{};
    double f_norm = 0.0;   // |F_n|_{h_n} entering the step
    double h = 0.0, r = 0.0;
    double delta = 0.0, offending = 0.0;
    bool near_threshold = false;
    double residual = 0.0;       // conjugation identity on the grid
    double off_cone_mass = 0.0;  // of F_{n+1} against Gamma_{r_{n+1}}
    double zero_mode = 0.0;      // of F_{n+1}
    double dropped_mass = 0.0;
    int rounds = 0;
    double rho_update_defect = 0.0;  // |xi_next - (xi - <q, 2pi a>/2)| on resonant steps
    // Resonant steps only: |k*|_eta >= |previous k*|_eta^{1+eta/(4+eta)}, the
    // sparsity law for consecutive resonant sites. True when no earlier
    // resonance exists.
    bool gap_growth_ok = true;
};

struct KamTrace {
    std::vector<StepRecord> steps;
    PerturbedCocycle terminal;
    Conjugation conj;
    Frequency alpha;
    bool converged = false;
    std::string stop_reason;

    int resonance_count() const;
    std::string to_jsonl() const;  // one record per line

    // Accumulated conjugation sampled pointwise; the half-angle rotation
    // factors make it a map on the doubled torus.
    std::vector<Mat2> sample_conjugation(const algebra::TorusGrid& grid) const;
};

struct StepParams {
    double h_next = 0.0;
    double r_next = 0.0;
    double solve_cutoff = 0.0;  // truncation level fed to the cancellation
    double delta = 0.0;
    double fp_tol = 1e-13;
    int max_rounds = 16;
    double k_cap = 64.0;
    double denom_floor = 1e-15;
};

struct StepOutcome {
    PerturbedCocycle next;
    std::vector<ConjFactor> factors;  // appended to Phi, left to right
    double grid_residual = 0.0;
    double off_cone_mass = 0.0;
    double zero_mode = 0.0;
    double dropped_mass = 0.0;
    double y_norm_bound = 0.0;  // sum of |Y_j|_h over rounds
    int rounds = 0;
    cplx resonant_coef{};       // extracted corner coefficient (resonant steps)
};

// Nonresonant cancellation step: Newton rounds of homological solve plus a
// pointwise-exact conjugated-log recovery; A is unchanged.
StepOutcome nonresonant_step(const PerturbedCocycle& p, const Frequency& alpha,
                             const StepParams& params);

// Resonant step: optional triangular diagonalization, excluded-mode solve,
// half-angle rotation; xi shifts by <q, 2pi alpha>/2.
StepOutcome resonant_step(const PerturbedCocycle& p, const Frequency& alpha,
                          const ResonanceReport& report, const StepParams& params);

// Elliptic/parabolic driver (Im xi = 0): iterates the two steps on the
// shrinking (h_n, r_n) schedule with eps_{n+1} = 2 eps_n^3 bookkeeping.
KamTrace reduce_elliptic(const PerturbedCocycle& p, const Frequency& alpha,
                         const KamOptions& opt);

// Hyperbolic driver (Im xi != 0): KAM loop until eps^{9/10} clears
// min(1e-8, |Im xi|^3), then the split solve plus the scalar cohomological
// finish; Im xi is preserved.
KamTrace reduce_hyperbolic(const PerturbedCocycle& p, const Frequency& alpha,
                           const KamOptions& opt);

struct GrowthCheck {
    std::vector<std::int64_t> checkpoints;
    std::vector<double> sup_original;  // sup_x |A_j(x)|, input cocycle
    std::vector<double> sup_terminal;  // same for the terminal cocycle of the trace
    double zeta_abs = 0.0;
};

// Measures iterate growth on a deterministic phase grid at the given
// checkpoints (both in the input frame and the terminal frame).
GrowthCheck growth_bound_check(const PerturbedCocycle& p, const KamTrace& trace,
                               const Frequency& alpha,
                               const std::vector<std::int64_t>& checkpoints,
                               int phase_grid = 64);

// Conjugation residual max_x |B(x+2pi a)^{-1} A e^{F(x)} B(x) - A1 e^{F1(x)}|
// over the grid carried by the factors.
double conjugation_residual(const PerturbedCocycle& before, const PerturbedCocycle& after,
                            const std::vector<ConjFactor>& factors, const Frequency& alpha,
                            const algebra::TorusGrid& grid);

// Schrodinger embedding: S_{E, lambda v} = A_E e^{F_v} conjugated into the
// triangular class by the eigenbasis of A_E. Elliptic for real E in [-2,2]
// (xi = arccos(E/2)), hyperbolic otherwise (Im xi < 0).
PerturbedCocycle embed_schrodinger(const cocycle::CocycleSpec& spec, const ConeSpec& cone);

}  // namespace qpspec::kam
