#include <doctest.h>

#include <random>

#include "hypdiss/conditions.hpp"
#include "hypdiss/error.hpp"
#include "hypdiss/grids.hpp"
#include "hypdiss/symbols.hpp"
#include "test_support.hpp"

using namespace hypdiss;
using namespace hypdiss::testing;

namespace {

struct Hyperbolic {
  ConditionReport ha;
  ConditionReport hb;
  SymmetrizerCache ha_cache;
  SymmetrizerCache hb_cache;
};

Hyperbolic hyperbolic(const CoefficientModel& m, const DirectionSet& dirs) {
  Hyperbolic h;
  const std::vector<RVec> states{m.reference_state()};
  h.ha = check_HA(m, states, dirs, h.ha_cache);
  h.hb = check_HB(m, states, dirs, h.hb_cache);
  return h;
}

ConditionReport d1_for(double a) {
  const CoefficientModel m = builtin_convected_damped_wave(a);
  const DirectionSet dirs = default_directions(1);
  Hyperbolic h = hyperbolic(m, dirs);
  return check_D1(m, m.reference_state(), dirs, h.ha_cache);
}

CoefficientModel fluid(const FluidParameters& p = {}) { return normalize_b00(builtin_barotropic_fluid(p)); }

}  // namespace

TEST_CASE("margin classification") {
  CHECK(classify_margin(-1.0, 1e-10) == Verdict::Pass);
  CHECK(classify_margin(1.0, 1e-10) == Verdict::Fail);
  CHECK(classify_margin(0.0, 1e-10) == Verdict::Marginal);
  CHECK(classify_margin(-1e-11, 1e-10) == Verdict::Marginal);
  CHECK(to_string(Verdict::Marginal) == "marginal");
  CHECK(to_string(Condition::Uniform) == "UNIFORM");
}

TEST_CASE("HA") {
  const DirectionSet dirs = default_directions(3);
  CHECK(hyperbolic(builtin_damped_wave(2.0, 3), dirs).ha.verdict == Verdict::Pass);
  const Hyperbolic f = hyperbolic(fluid(), dirs);
  CHECK(f.ha.verdict == Verdict::Pass);
  CHECK(f.ha_cache.size() == dirs.directions.size());

  RMat rot(2, 2);
  rot << 0.0, 1.0, -1.0, 0.0;
  const RMat i2 = RMat::Identity(2, 2);
  const RMat z2 = RMat::Zero(2, 2);
  const CoefficientModel bad = constant_model(2, 1, {rot, z2}, {-i2, z2, z2, i2});
  const Hyperbolic h = hyperbolic(bad, default_directions(1));
  CHECK(h.ha.verdict == Verdict::Fail);
  CHECK(h.ha.margin == doctest::Approx(1.0));

  SymmetrizerCache c;
  CHECK_THROWS_AS((void)check_HA(bad, {}, default_directions(1), c), Error);
  CHECK_THROWS_AS((void)check_HA(builtin_barotropic_fluid({}), {RVec::Zero(4)}, dirs, c), Error);
}

TEST_CASE("HB") {
  const Hyperbolic dw = hyperbolic(builtin_damped_wave(2.0, 1), default_directions(1));
  CHECK(dw.hb.verdict == Verdict::Pass);
  CHECK(dw.hb.trace["multiplicities"] == nlohmann::json::array({1, 1}));

  const Hyperbolic f = hyperbolic(fluid(), default_directions(3));
  CHECK(f.hb.verdict == Verdict::Pass);
  CHECK(f.hb.trace["multiplicities"] == nlohmann::json::array({1, 1, 1, 1, 2, 2}));
  CHECK_FALSE(f.hb.trace["pattern_mismatch"].get<bool>());

  // Symmetrizer contract on every cached entry.
  const DirectionSet dirs = default_directions(3);
  const CoefficientModel m = fluid();
  for (const RVec& w : dirs.directions) {
    const CMat* s = f.hb_cache.find(m.reference_state(), w);
    REQUIRE(s != nullptr);
    const CMat k = kI * assemble_calB(m, m.reference_state(), w);
    CHECK((*s - s->adjoint()).norm() < 1e-12 * s->norm());
    CHECK(hermitian_eigenvalues(*s)(0) > 0.0);
    CHECK((*s * k - (*s * k).adjoint()).norm() <= 1e-8 * s->norm() * k.norm());
  }
}

TEST_CASE("D1 closed form and threshold") {
  for (double a : {0.0, 0.25, 0.5, 0.9, 1.5, 2.0}) {
    const ConditionReport r = d1_for(a);
    CHECK(std::abs(r.margin - 2.0 * (a * a - 1.0)) < 1e-9);
  }
  const ConditionReport pass = d1_for(0.5);
  CHECK(pass.verdict == Verdict::Pass);
  CHECK(pass.c_bar == doctest::Approx(1.5));
  CHECK(d1_for(1.5).verdict == Verdict::Fail);
  CHECK(d1_for(1.5).margin == doctest::Approx(2.5));
  CHECK(d1_for(1.0 - 1e-3).verdict == Verdict::Pass);
  CHECK(d1_for(1.0 + 1e-3).verdict == Verdict::Fail);
  CHECK(d1_for(1.0).verdict == Verdict::Marginal);

  SymmetrizerCache empty;
  const CoefficientModel m = builtin_damped_wave(2.0, 1);
  CHECK_THROWS_AS((void)check_D1(m, m.reference_state(), default_directions(1), empty), Error);
}

TEST_CASE("D2") {
  const CoefficientModel dw = builtin_damped_wave(2.0, 1);
  Hyperbolic h = hyperbolic(dw, default_directions(1));
  const ConditionReport r = check_D2(dw, dw.reference_state(), default_directions(1), h.hb_cache);
  CHECK(r.verdict == Verdict::Pass);
  CHECK(r.margin == doctest::Approx(-2.0));

  const CoefficientModel f = fluid();
  Hyperbolic hf = hyperbolic(f, default_directions(3));
  CHECK(check_D2(f, f.reference_state(), default_directions(3), hf.hb_cache).verdict == Verdict::Pass);

  // No first-order terms: the tested form vanishes.
  const CoefficientModel flat = constant_model(1, 1, {scalar(0.0), scalar(0.0)},
                                               {scalar(-1.0), scalar(0.0), scalar(0.0), scalar(1.0)});
  Hyperbolic hz = hyperbolic(flat, default_directions(1));
  const ConditionReport z = check_D2(flat, flat.reference_state(), default_directions(1), hz.hb_cache);
  CHECK(z.verdict == Verdict::Marginal);
  CHECK(std::abs(z.margin) < 1e-14);
}

TEST_CASE("D3") {
  const std::vector<double> grid = log_grid(1e-3, 1e3, 49);
  const CoefficientModel dw = builtin_damped_wave(2.0, 1);
  const ConditionReport r = check_D3(dw, dw.reference_state(), default_directions(1), grid);
  CHECK(r.verdict == Verdict::Pass);
  // Small-frequency branch: -1 + sqrt(1 - xi^2) ~ -xi^2 / 2.
  CHECK(r.margin == doctest::Approx(-0.5e-6).epsilon(1e-4));
  CHECK(r.witness.xi == doctest::Approx(1e-3));
  CHECK(r.points.size() == grid.size() * 2);

  const CoefficientModel f = fluid();
  const DirectionSet dirs = default_directions(3);
  const ConditionReport rf = check_D3(f, f.reference_state(), dirs, grid);
  CHECK(rf.verdict == Verdict::Pass);
  CHECK(rf.points.size() == 49 * 26);

  // Witness reproduces the margin.
  const RVec xi = rf.witness.xi * rf.witness.omega;
  CHECK(std::abs(dispersion_roots(f, rf.witness.u, xi).max_real_part - rf.margin) <= 1e-12 * std::abs(rf.margin));

  // Grid robustness: nearby frequencies keep the verdict.
  std::mt19937 rng(8);
  std::uniform_real_distribution<double> jitter(-0.5, 0.5);
  const double step = std::log(grid[1] / grid[0]);
  for (int i = 0; i < 20; ++i) {
    RVec w = rf.witness.omega + 0.05 * random_unit(3, rng);
    w /= w.norm();
    const double x = rf.witness.xi * std::exp(step * jitter(rng));
    CHECK(dispersion_roots(f, f.reference_state(), x * w).max_real_part < 0.0);
  }

  // The abscissa of M agrees with the largest root.
  for (double x : {1e-2, 1.0, 1e2}) {
    const RVec v = x * dirs.directions[3];
    CHECK(std::abs(spectral_abscissa(assemble_M(f, f.reference_state(), v)) -
                   dispersion_roots(f, f.reference_state(), v).max_real_part) < 1e-10);
  }

  const CoefficientModel anti = constant_model(1, 1, {scalar(-1.0), scalar(0.0)},
                                               {scalar(-1.0), scalar(0.0), scalar(0.0), scalar(1.0)});
  const ConditionReport ra = check_D3(anti, anti.reference_state(), default_directions(1), grid);
  CHECK(ra.verdict == Verdict::Fail);
  CHECK(ra.witness.xi == doctest::Approx(1e-3));
  CHECK(ra.margin == doctest::Approx(1.0).epsilon(1e-5));
  CHECK_THROWS_AS((void)check_D3(dw, dw.reference_state(), default_directions(1), {0.0, 1.0}), Error);
}

TEST_CASE("uniform dissipativity") {
  const CoefficientModel dw = builtin_damped_wave(2.0, 1);
  const ConditionReport r =
      check_uniform_dissipativity(dw, dw.reference_state(), default_directions(1), log_grid(1e-3, 1e3, 61));
  CHECK(r.verdict == Verdict::Pass);
  CHECK(std::abs(r.c_bar - 0.5) < 1e-6);
  CHECK(r.witness.xi == doctest::Approx(1e-3));

  const CoefficientModel f = fluid();
  const ConditionReport rf =
      check_uniform_dissipativity(f, f.reference_state(), default_directions(3), log_grid(1e-2, 1e2, 49));
  CHECK(rf.verdict == Verdict::Pass);
  CHECK(rf.c_bar > 0.0);
  CHECK(rf.trace["cond_sup"].get<double>() < 1e8);

  // Lyapunov certificate consistency.
  std::mt19937 rng(9);
  std::normal_distribution<double> g;
  for (double x : {0.05, 1.0, 20.0}) {
    const RVec xi = x * default_directions(3).directions[5];
    const CMat m = assemble_M(f, f.reference_state(), xi);
    const double rho = decay_profile(x);
    const CMat p = solve_lyapunov(m, rho * CMat::Identity(8, 8));
    for (int i = 0; i < 100; ++i) {
      CVec v(8);
      for (int k = 0; k < 8; ++k) v(k) = cplx(g(rng), g(rng));
      const double q = (v.adjoint() * (p * m + m.adjoint() * p) * v)(0).real();
      CHECK(std::abs(q + rho * v.squaredNorm()) <= 1e-8 * rho * v.squaredNorm());
    }
  }
  CHECK_THROWS_AS(
      (void)check_uniform_dissipativity(dw, dw.reference_state(), default_directions(1), {0.0, 1.0}), Error);
}

TEST_CASE("dissipation symbol") {
  const CoefficientModel dw = builtin_damped_wave(2.0, 1);
  const DissipationSymbol d = build_dissipation_symbol(dw, RVec::Zero(1), RVec::Constant(1, 10.0));
  CHECK(d.residual < 1e-10);
  CHECK(d.lambda_min > 0.0);
  CHECK(d.c_inf > 0.0);

  double worst = 0.0;
  std::vector<double> conds;
  for (double x : log_grid(1.0, 1e3, 13)) {
    const DissipationSymbol s = build_dissipation_symbol(dw, RVec::Zero(1), RVec::Constant(1, x));
    CHECK(s.residual < 1e-10 * std::max(1.0, s.lambda_max));
    conds.push_back(s.lambda_max / s.lambda_min);
    worst = std::max(worst, conds.back());
    CHECK(dissipation_derivative_bound(dw, RVec::Zero(1), RVec::Constant(1, x)) < 10.0 * s.lambda_max);
  }
  // Condition numbers settle in the last decade.
  CHECK(conds.back() <= 1.05 * conds[conds.size() - 5]);
  CHECK(worst < 1e3);

  const CoefficientModel nl = builtin_convected_damped_wave(0.3, 1.0);
  const RVec xi = RVec::Constant(1, 5.0);
  const CMat d0 = build_dissipation_symbol(nl, RVec::Zero(1), xi).D;
  const double c1 = (build_dissipation_symbol(nl, RVec::Constant(1, 1e-3), xi).D - d0).norm();
  const double c2 = (build_dissipation_symbol(nl, RVec::Constant(1, 2e-3), xi).D - d0).norm();
  CHECK(c1 > 0.0);
  CHECK(c1 < 1e-2 * d0.norm());
  CHECK(c2 / c1 == doctest::Approx(2.0).epsilon(0.01));

  CHECK_THROWS_AS((void)build_dissipation_symbol(dw, RVec::Zero(1), RVec::Constant(1, 0.5)), Error);
}

TEST_CASE("full check") {
  CheckSettings s;
  const FullCheck dw = run_all_checks(builtin_damped_wave(2.0, 3), s, default_directions(3));
  CHECK(dw.overall == Verdict::Pass);
  REQUIRE(dw.reports.size() == 6);
  CHECK(dw.reports[5].c_bar == doctest::Approx(0.5).epsilon(1e-3));

  const FullCheck conv = run_all_checks(builtin_convected_damped_wave(1.5), s, default_directions(1));
  CHECK(conv.overall == Verdict::Fail);
  CHECK(conv.reports[2].verdict == Verdict::Fail);

  const FullCheck edge = run_all_checks(builtin_convected_damped_wave(1.0), s, default_directions(1));
  CHECK(edge.overall == Verdict::Marginal);
  CHECK(edge.reports[5].verdict == Verdict::Marginal);

  const FullCheck f = run_all_checks(fluid(), s, default_directions(3));
  CHECK(f.overall == Verdict::Pass);

  const nlohmann::json j = to_json(f.reports[0]);
  CHECK(j["condition"] == "HA");
  CHECK(j["verdict"] == "pass");
  CHECK(j.contains("witness"));
  CHECK(margins_csv(f.reports[4]).rfind("xi,omega_index,margin\n", 0) == 0);
}
