#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "qpspec/kam.hpp"
#include "qpspec/rng.hpp"

using namespace qpspec;
using namespace qpspec::kam;
using algebra::ConeSpec;
using algebra::cplx;
using algebra::Mat2;
using algebra::MatSeries;
using algebra::MultiIndex;
using algebra::WeightScheme;
using dioph::Frequency;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;
const cplx kJ(0.0, 1.0);

Mat2 random_traceless(Rng& rng, double scale) {
    auto c = [&] { return cplx(rng.uniform(-1, 1), rng.uniform(-1, 1)) * scale; };
    const cplx a = c();
    return {a, c(), c(), -a};
}

// Cone-supported random matrix series with a prescribed norm.
MatSeries random_cone_series(Rng& rng, const ConeSpec& cone, double h, int modes,
                             double bound, double norm_target) {
    std::vector<MultiIndex> members;
    algebra::for_each_index(
        cone.scheme, bound, [&](const MultiIndex& k) { members.push_back(k); }, &cone);
    MatSeries f(cone.scheme, h);
    for (int m = 0; m < modes; ++m)
        f.add(members[rng.next_u64() % members.size()], random_traceless(rng, 1.0));
    const double n = f.norm();
    return f.scaled(norm_target / n);
}

cocycle::CocycleSpec wave_spec(double lambda, cplx energy, double h = 0.6) {
    cocycle::CocycleSpec spec;
    spec.alpha = Frequency::golden();
    spec.energy = energy;
    spec.pot.lambda = lambda;
    spec.pot.v = algebra::ScalarSeries(WeightScheme::uniform(1), h);
    spec.pot.v.set({1}, 1.0);
    return spec;
}

}  // namespace

TEST_CASE("resonance classification: exact site, strongly nonreal exponent, scan oracle") {
    const Frequency g = Frequency::golden();
    ConeSpec cone{1.0, WeightScheme::uniform(1)};

    ConstantPart a;
    a.xi = g.pairing_angle({3}) / 2.0;  // exact - branch resonance at k = 3
    const auto rep = classify_resonance(a, g, cone, 10.0, 1e-2);
    REQUIRE(rep.resonant);
    CHECK(rep.site == MultiIndex{3});
    CHECK(rep.branch == -1);
    CHECK(rep.offending < 1e-12);
    CHECK(rep.rotation() == MultiIndex{3});

    ConstantPart far;
    far.xi = cplx(0.4, 1.5);
    CHECK_FALSE(classify_resonance(far, g, cone, 20.0, 0.5).resonant);

    // brute-force oracle over the scanned slab
    ConstantPart mid;
    mid.xi = 0.3;
    const double delta = 1e-4;
    bool oracle = false;
    for (int k = 1; k <= 20; ++k) {
        const double th = kTwoPi * double(k) * g.alpha[0];
        oracle |= std::abs(std::exp(kJ * (th + 0.6)) - 1.0) < delta;
        oracle |= std::abs(std::exp(kJ * (th - 0.6)) - 1.0) < delta;
    }
    CHECK(classify_resonance(mid, g, cone, 20.0, delta).resonant == oracle);
}

TEST_CASE("homological solve: trivial input and the diagonal closed form") {
    const Frequency g = Frequency::golden();
    WeightScheme s = WeightScheme::uniform(1);
    MatSeries zero(s, 0.5);
    ConstantPart a;
    a.xi = 0.7;
    CHECK(homological_solve(a, zero, g).empty());

    // diagonal constant part, single diagonal mode: y = f / (e^{i theta} - 1)
    MatSeries f(s, 0.5);
    const cplx coef(0.3, -0.1);
    f.set({2}, Mat2{coef, 0.0, 0.0, -coef});
    const auto y = homological_solve(a, f, g);
    const double th = g.pairing_angle({2});
    const cplx expected = coef / (std::exp(kJ * th) - 1.0);
    CHECK(std::abs(y.at({2}).a - expected) < 1e-15);
}

TEST_CASE("homological solve: random series residual, both orientations") {
    Rng rng(100);
    const Frequency g1 = Frequency::golden();
    const Frequency g2 = Frequency::golden_silver();
    for (int trial = 0; trial < 24; ++trial) {
        const bool two_dim = trial % 2 == 1;
        const Frequency& freq = two_dim ? g2 : g1;
        ConeSpec cone{0.4, WeightScheme::uniform(two_dim ? 2 : 1)};
        MatSeries f = random_cone_series(rng, cone, 0.5, 6, 8.0, 1e-3);

        ConstantPart a;
        a.xi = rng.uniform(0.2, 1.4);
        a.zeta = cplx(rng.uniform(-1, 1), rng.uniform(-1, 1));
        a.orient = trial % 4 < 2 ? Orientation::Upper : Orientation::Lower;

        const auto y = homological_solve(a, f, freq);
        const auto residual = apply_twisted_difference(a, y, freq) - f;
        CHECK(residual.norm() < 1e-12);
    }
}

TEST_CASE("homological solve respects exclusions") {
    const Frequency g = Frequency::golden();
    WeightScheme s = WeightScheme::uniform(1);
    ConstantPart a;
    a.xi = 0.9;
    MatSeries f(s, 0.5);
    f.set({1}, Mat2{cplx(0.1, 0.0), cplx(0.2, 0.0), cplx(0.3, 0.0), cplx(-0.1, 0.0)});

    const std::vector<Exclusion> excl{{{1}, EntrySlot::UpperRight}};
    const auto y = homological_solve(a, f, g, excl);
    CHECK(std::abs(y.at({1}).b) == 0.0);
    const auto lhs = apply_twisted_difference(a, y, g);
    // non-excluded components solved exactly, the excluded one untouched
    CHECK(std::abs(lhs.at({1}).c - f.at({1}).c) < 1e-15);
    CHECK(std::abs(lhs.at({1}).a - f.at({1}).a) < 1e-15);
}

TEST_CASE("nonresonant step: trivial input") {
    const Frequency g = Frequency::golden();
    ConeSpec cone{1.0, WeightScheme::uniform(1)};
    PerturbedCocycle p;
    p.a.xi = 0.37;
    p.a.zeta = 0.4;
    p.f = MatSeries(cone.scheme, 0.6);
    p.cone = cone;

    StepParams sp;
    sp.h_next = 0.5;
    sp.r_next = 0.9;
    sp.solve_cutoff = 64.0;
    const auto out = nonresonant_step(p, g, sp);
    CHECK(out.next.f.empty());
    CHECK(out.factors.empty());
    CHECK(out.grid_residual < 1e-13);
}

TEST_CASE("nonresonant step: contraction and exact conjugation on the grid") {
    const Frequency g = Frequency::golden();
    ConeSpec cone{1.0, WeightScheme::uniform(1)};
    Rng rng(200);

    PerturbedCocycle p;
    p.a.xi = 0.37;
    p.a.zeta = cplx(0.3, 0.2);
    p.cone = cone;
    p.f = random_cone_series(rng, cone, 0.6, 3, 4.0, 1e-4);

    StepParams sp;
    sp.h_next = 0.4;
    sp.r_next = 0.9;
    sp.solve_cutoff = 64.0;
    sp.fp_tol = 1e-13;
    const auto out = nonresonant_step(p, g, sp);

    CHECK(out.grid_residual < 1e-10);
    CHECK(out.next.f.norm() < 1e-8);  // quadratic-or-better contraction from 1e-4
    CHECK(out.zero_mode < 1e-12);
    CHECK(out.off_cone_mass < 1e-12);
    CHECK(out.y_norm_bound < std::sqrt(1e-4));
    // constant part untouched
    CHECK(out.next.a.xi == p.a.xi);
    CHECK(out.next.a.zeta == p.a.zeta);
}

TEST_CASE("resonant step: pure resonant mode becomes the new off-diagonal entry") {
    const Frequency g = Frequency::golden();
    ConeSpec cone{1.0, WeightScheme::uniform(1)};
    const MultiIndex site{2};
    const double theta = g.pairing_angle(site);

    PerturbedCocycle p;
    p.a.xi = theta / 2.0;  // - branch resonance, upper-right corner
    p.a.zeta = 0.0;
    p.cone = cone;
    p.f = MatSeries(cone.scheme, 0.6);
    const cplx b(2e-5, -1e-5);
    p.f.set(site, Mat2{0.0, b, 0.0, 0.0});

    const auto rep = classify_resonance(p.a, g, cone, 10.0, 1e-3);
    REQUIRE(rep.resonant);
    REQUIRE(rep.site == site);
    REQUIRE(rep.branch == -1);

    StepParams sp;
    sp.h_next = 0.5;
    sp.r_next = 0.8;
    sp.solve_cutoff = 64.0;
    const auto out = resonant_step(p, g, rep, sp);

    CHECK(dioph::torus_distance(out.next.a.xi.real()) < 1e-12);
    CHECK(std::abs(out.next.a.xi.imag()) == 0.0);
    CHECK(out.next.a.orient == Orientation::Upper);
    CHECK(std::abs(out.next.a.zeta - b * std::exp(kJ * out.next.a.xi)) < 1e-10);
    CHECK(out.next.f.norm() < 1e-9);
    CHECK(out.grid_residual < 1e-10);
}

TEST_CASE("resonant step without perturbation just rotates the constant part") {
    const Frequency g = Frequency::golden();
    ConeSpec cone{1.0, WeightScheme::uniform(1)};
    PerturbedCocycle p;
    p.a.xi = g.pairing_angle({1}) / 2.0;
    p.cone = cone;
    p.f = MatSeries(cone.scheme, 0.6);

    ResonanceReport rep;
    rep.resonant = true;
    rep.site = {1};
    rep.branch = -1;
    StepParams sp;
    sp.h_next = 0.5;
    sp.r_next = 0.8;
    sp.solve_cutoff = 64.0;
    const auto out = resonant_step(p, g, rep, sp);
    CHECK(out.next.f.empty());
    CHECK(dioph::torus_distance(out.next.a.xi.real() -
                                (p.a.xi.real() - g.pairing_angle({1}) / 2.0)) < 1e-12);
    CHECK(std::abs(out.next.a.zeta) == 0.0);
    CHECK(out.grid_residual < 1e-12);
}

TEST_CASE("resonant step on a two-frequency cone keeps the cone structure") {
    const Frequency g = Frequency::golden_silver();
    ConeSpec cone{0.3, WeightScheme::uniform(2)};
    Rng rng(300);

    PerturbedCocycle p;
    const MultiIndex site{1, 1};
    p.a.xi = g.pairing_angle(site) / 2.0;
    p.a.zeta = 0.0;
    p.cone = cone;
    p.f = random_cone_series(rng, cone, 0.6, 4, 4.0, 1e-4);
    p.f.add(site, Mat2{0.0, cplx(5e-5, 0.0), 0.0, 0.0});

    StepParams sp;
    sp.h_next = 0.5;
    sp.r_next = 0.25;
    sp.solve_cutoff = 12.0;
    sp.k_cap = 12.0;
    const auto rep = classify_resonance(p.a, g, cone, 8.0, 1e-3);
    REQUIRE(rep.resonant);
    REQUIRE(rep.site == site);

    const auto out = resonant_step(p, g, rep, sp);
    CHECK(out.off_cone_mass < 1e-12);
    CHECK(out.zero_mode < 1e-12);
    CHECK(out.grid_residual < 1e-9);
}

TEST_CASE("elliptic reduction: empty perturbation gives an empty trace") {
    const Frequency g = Frequency::golden();
    ConeSpec cone{1.0, WeightScheme::uniform(1)};
    PerturbedCocycle p;
    p.a.xi = 0.8;
    p.cone = cone;
    p.f = MatSeries(cone.scheme, 0.6);
    KamOptions opt;
    const auto trace = reduce_elliptic(p, g, opt);
    CHECK(trace.steps.empty());
    CHECK(trace.converged);
    CHECK(trace.terminal.a.xi == p.a.xi);
}

TEST_CASE("elliptic reduction: parabolic endpoint after exactly one resonance") {
    // E tuned so the rotation exponent is half the k = 1 denominator angle;
    // a single resonance then freezes the corner with |zeta| close to lambda/2.
    const Frequency g = Frequency::golden();
    const double rho0 = kPi * (1.0 - g.alpha[0]);
    const double lambda = 1e-5;
    auto spec = wave_spec(lambda, 2.0 * std::cos(rho0));

    ConeSpec cone{1.0, WeightScheme::uniform(1)};
    const auto p = embed_schrodinger(spec, cone);
    CHECK(std::abs(p.a.xi.real() - rho0) < 1e-12);
    CHECK(std::abs(p.a.xi.imag()) < 1e-14);

    KamOptions opt;
    opt.h_final = 0.3;
    opt.r_final = 0.5;
    opt.max_steps = 8;
    const auto trace = reduce_elliptic(p, g, opt);

    REQUIRE(trace.resonance_count() == 1);
    CHECK(trace.steps[0].resonant);
    CHECK(trace.steps[0].site == MultiIndex{1});
    CHECK(trace.steps[0].branch == +1);  // lower-left corner carries the wave
    CHECK(trace.steps[0].rho_update_defect < 1e-12);
    CHECK(trace.converged);

    CHECK(std::abs(trace.terminal.a.rho_mod_pi()) < 1e-9);
    CHECK(std::abs(trace.terminal.a.zeta) >= lambda / 4.0);
    CHECK(std::abs(trace.terminal.a.zeta) <= lambda);
    CHECK(std::abs(trace.terminal.a.xi.imag()) < 1e-12);

    // growth in the terminal frame: the unipotent corner drives a linear trend
    const auto growth = growth_bound_check(p, trace, g, {1000, 10000, 100000}, 16);
    const double zeta_abs = growth.zeta_abs;
    const double incr = growth.sup_terminal[2] - growth.sup_terminal[0];
    const double ref = zeta_abs * double(100000 - 1000);
    CHECK(incr >= ref / 4.0);
    CHECK(incr <= ref * 4.0);
}

TEST_CASE("elliptic reduction: Diophantine exponent sees no resonance") {
    const Frequency g = Frequency::golden();
    const double rho0 = 0.37;  // min_k |e^{i(theta_k +- 2 rho)} - 1| ~ 0.04 over the scan
    auto spec = wave_spec(1e-4, 2.0 * std::cos(rho0));
    ConeSpec cone{1.0, WeightScheme::uniform(1)};
    const auto p = embed_schrodinger(spec, cone);

    KamOptions opt;
    opt.max_steps = 6;
    const auto trace = reduce_elliptic(p, g, opt);
    CHECK(trace.resonance_count() == 0);
    CHECK(trace.converged);
    for (const auto& st : trace.steps) {
        CHECK(st.residual < 1e-9);
        CHECK(std::abs(st.zeta_after - st.zeta_before) == 0.0);
        CHECK(st.zero_mode < 1e-12);
    }
    // terminal rotation exponent unchanged, perturbation killed
    CHECK(std::abs(trace.terminal.a.xi.real() - rho0) < 1e-12);
    CHECK(trace.terminal.f.norm() <= opt.f_target);

    const auto growth = growth_bound_check(p, trace, g, {1000, 8000, 64000}, 16);
    CHECK(growth.sup_original[2] < 10.0);
    CHECK(growth.sup_original[2] <= growth.sup_original[0] * 1.5 + 1.0);
}

TEST_CASE("consecutive resonant steps compose cleanly") {
    // First resonance at k = 1, second at k = 55: the exponent starts at half
    // the k = 1 angle plus half the k = 55 torus defect, so the first rotation
    // lands exactly on the k = 55 resonance. A narrow strip keeps the k = 55
    // mode representable; the second classification needs a threshold below
    // the k = 34 beat value 0.0316.
    const Frequency g = Frequency::golden();
    const double th1 = g.pairing_angle({1});
    const double s55 = 0.5 * dioph::torus_distance(g.pairing_angle({55}));

    ConeSpec cone{1.0, WeightScheme::uniform(1)};
    PerturbedCocycle p;
    p.a.xi = 0.5 * th1 + s55;
    p.cone = cone;
    p.f = MatSeries(cone.scheme, 0.05);
    p.f.set({1}, Mat2{cplx(1e-4, 0.0), cplx(-2e-4, 5e-5), cplx(1e-4, 1e-4), cplx(-1e-4, 0.0)});
    p.f.set({55}, Mat2{cplx(5e-6, 0.0), cplx(1e-5, -5e-6), cplx(-8e-6, 2e-6), cplx(-5e-6, 0.0)});

    StepParams sp;
    sp.h_next = 0.04;
    sp.r_next = 0.9;
    sp.solve_cutoff = 64.0;
    sp.k_cap = 64.0;

    const auto rep1 = classify_resonance(p.a, g, cone, 64.0, 0.06);
    REQUIRE(rep1.resonant);
    REQUIRE(rep1.site == MultiIndex{1});
    const auto out1 = resonant_step(p, g, rep1, sp);
    CHECK(out1.grid_residual < 1e-9);
    CHECK(std::abs(out1.next.a.xi.real() - s55) < 1e-12);

    sp.h_next = 0.03;
    const auto rep2 = classify_resonance(out1.next.a, g, out1.next.cone, 64.0, 0.01);
    REQUIRE(rep2.resonant);
    REQUIRE(rep2.site == MultiIndex{55});
    CHECK(rep2.offending < 1e-10);
    const auto out2 = resonant_step(out1.next, g, rep2, sp);
    CHECK(out2.grid_residual < 1e-9);
    // the second rotation returns the exponent to 0 mod pi
    CHECK(std::abs(std::remainder(out2.next.a.xi.real(), std::numbers::pi)) < 1e-9);
    CHECK(out2.zero_mode < 1e-12);
}

TEST_CASE("accumulated conjugation transports the input cocycle to the terminal one") {
    const Frequency g = Frequency::golden();
    auto spec = wave_spec(1e-4, 2.0 * std::cos(0.37));
    ConeSpec cone{1.0, WeightScheme::uniform(1)};
    const auto p = embed_schrodinger(spec, cone);
    const auto trace = reduce_elliptic(p, g, KamOptions{});
    REQUIRE(trace.converged);

    const algebra::TorusGrid grid({64});
    const double full_residual =
        conjugation_residual(p, trace.terminal, trace.conj.factors, g, grid);
    CHECK(full_residual < 1e-8);

    // sampled map stays unimodular
    for (const auto& b : trace.sample_conjugation(grid))
        CHECK(std::abs(b.det() - 1.0) < 1e-12);
}

TEST_CASE("hyperbolic reduction: trivial input diagonalizes immediately") {
    const Frequency g = Frequency::golden();
    ConeSpec cone{1.0, WeightScheme::uniform(1)};
    PerturbedCocycle p;
    p.a.xi = cplx(0.3, -0.4);
    p.a.zeta = cplx(0.5, 0.1);
    p.cone = cone;
    p.f = MatSeries(cone.scheme, 0.6);

    KamOptions opt;
    const auto trace = reduce_hyperbolic(p, g, opt);
    CHECK(trace.converged);
    CHECK(trace.terminal.a.xi == p.a.xi);
    CHECK(std::abs(trace.terminal.a.zeta) == 0.0);
    CHECK(trace.terminal.f.empty());
}

TEST_CASE("hyperbolic reduction preserves the imaginary part of the exponent") {
    const Frequency g = Frequency::golden();
    auto spec = wave_spec(1e-5, cplx(1.0, 0.5));
    ConeSpec cone{1.0, WeightScheme::uniform(1)};
    const auto p = embed_schrodinger(spec, cone);
    REQUIRE(std::abs(p.a.xi.imag()) > 0.1);
    // the eigenvalue exponent reproduces the free growth rate
    CHECK(std::abs(p.a.xi.imag()) ==
          doctest::Approx(cocycle::free_laplacian_le(cplx(1.0, 0.5))).epsilon(1e-10));

    KamOptions opt;
    const auto trace = reduce_hyperbolic(p, g, opt);
    CHECK(trace.converged);
    CHECK(std::abs(trace.terminal.a.xi.imag() - p.a.xi.imag()) < 1e-10);
    CHECK(std::abs(trace.terminal.a.zeta) == 0.0);
    REQUIRE(!trace.steps.empty());
    CHECK(trace.steps.back().residual < 1e-9);
}

TEST_CASE("schedule recursions") {
    const auto s = KamSchedule::build(0.6, 0.3, 1.0, 0.5, 1e-4, 5);
    CHECK(s.eps[1] == doctest::Approx(2e-12));
    CHECK(s.h[1] == doctest::Approx(0.6 - 0.3 / 4.0));
    CHECK(s.r[1] == doctest::Approx(1.0 - 0.5 / 4.0));
    CHECK(s.n_trunc[0] == doctest::Approx(2.0 * std::abs(std::log(1e-4)) / (0.3 / 4.0)));
    for (std::size_t n = 1; n < s.h.size(); ++n) {
        CHECK(s.h[n] < s.h[n - 1]);
        CHECK(s.h[n] > 0.3);
        CHECK(s.r[n] < s.r[n - 1]);
        CHECK(s.r[n] > 0.5);
    }
    CHECK_THROWS(KamSchedule::build(0.3, 0.6, 1.0, 0.5, 1e-4, 3));
}

TEST_CASE("trace serialization emits one record per step plus a terminal line") {
    const Frequency g = Frequency::golden();
    auto spec = wave_spec(1e-4, 2.0 * std::cos(0.37));
    ConeSpec cone{1.0, WeightScheme::uniform(1)};
    const auto trace = reduce_elliptic(embed_schrodinger(spec, cone), g, KamOptions{});
    const std::string jsonl = trace.to_jsonl();
    std::size_t lines = 0;
    for (char c : jsonl) lines += c == '\n' ? 1 : 0;
    CHECK(lines == trace.steps.size() + 1);
    CHECK(jsonl.find("\"verdict\"") != std::string::npos);
    CHECK(jsonl.find("\"terminal\":true") != std::string::npos);
}

TEST_CASE("embedding: triangular form and bounded corner entry") {
    for (cplx e : {cplx(0.7, 0.0), cplx(-1.9, 0.0), cplx(2.5, 0.0), cplx(0.4, 0.8)}) {
        auto spec = wave_spec(1e-3, e);
        ConeSpec cone{1.0, WeightScheme::uniform(1)};
        const auto p = embed_schrodinger(spec, cone);
        CHECK(std::abs(p.a.zeta) <= 2.0 + 1e-9);
        // matrix of the constant part reproduces the trace of the transfer matrix
        CHECK(std::abs(p.a.matrix().trace() - e) < 1e-9);
        CHECK(std::abs(p.f.norm() - 1e-3 * p.f.at({1}).op_norm() / 1e-3 *
                                        std::exp(0.6)) <= p.f.norm());
    }
}
