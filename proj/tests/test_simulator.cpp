#include <doctest.h>

#include <cmath>
#include <random>

#include "hypdiss/conditions.hpp"
#include "hypdiss/error.hpp"
#include "hypdiss/simulator.hpp"
#include "hypdiss/symbols.hpp"
#include "test_support.hpp"

using namespace hypdiss;
using namespace hypdiss::testing;

namespace {

const double kTwoPi = 2.0 * M_PI;

DataSpec bump(int n, double width, double u0, double u1 = 0.0) {
  BumpSpec b;
  b.width = width;
  b.u0_amplitude = RVec::Constant(n, u0);
  if (u1 != 0.0) b.u1_amplitude = RVec::Constant(n, u1);
  return DataSpec{{b}};
}

// Largest per-mode deviation of `state` from exp(t Mbar) applied to the modes of `start`.
double mode_error(const Simulator& sim, const FieldState& start, const FieldState& state, double t) {
  const Lattice& l = sim.lattice();
  const int n = sim.model().n();
  const CMat u0 = start.u.spectrum();
  const CMat v0 = start.u_t.spectrum();
  const CMat u1 = state.u.spectrum();
  const CMat v1 = state.u_t.spectrum();
  double worst = 0.0;
  for (int k = 0; k < l.size(); ++k) {
    CVec y(2 * n);
    y << u0.row(k).transpose(), v0.row(k).transpose();
    const CVec want = evolve_mode(assemble_Mbar(sim.model(), sim.model().reference_state(), l.frequency(k)), y, t);
    CVec got(2 * n);
    got << u1.row(k).transpose(), v1.row(k).transpose();
    worst = std::max(worst, (got - want).cwiseAbs().maxCoeff());
  }
  return worst;
}

FieldState advance(const Simulator& sim, FieldState s, double t, int steps) {
  const double dt = t / steps;
  for (int i = 0; i < steps; ++i) s = sim.step(s, dt);
  return s;
}

CoefficientModel convected(double a, double kappa) { return normalize_b00(builtin_convected_damped_wave(a, kappa)); }

}  // namespace

TEST_CASE("right-hand side") {
  SUBCASE("equilibrium") {
    const CoefficientModel f = normalize_b00(builtin_barotropic_fluid({}));
    const Simulator sim(f, Lattice(3, 8, kTwoPi));
    const FieldState eq = equilibrium_state(f, sim.lattice());
    const FieldState r = sim.rhs(eq);
    CHECK(r.u.values.cwiseAbs().maxCoeff() == 0.0);
    CHECK(r.u_t.values.cwiseAbs().maxCoeff() < 1e-14);
    const FieldState next = sim.step(eq, 0.5 * sim.max_stable_dt());
    CHECK((next.u.values - eq.u.values).cwiseAbs().maxCoeff() < 1e-14);
    CHECK(next.u_t.values.cwiseAbs().maxCoeff() < 1e-14);
  }

  SUBCASE("damped wave on sin(x)") {
    const CoefficientModel dw = builtin_damped_wave(2.0, 1);
    const Simulator sim(dw, Lattice(1, 32, kTwoPi));
    FieldState s = equilibrium_state(dw, sim.lattice());
    for (int p = 0; p < sim.lattice().size(); ++p) s.u.values(p, 0) = std::sin(sim.lattice().position(p)(0));
    const FieldState r = sim.rhs(s);
    CHECK(r.u.values.cwiseAbs().maxCoeff() == 0.0);
    CHECK((r.u_t.values + s.u.values).cwiseAbs().maxCoeff() < 1e-13);
  }

  SUBCASE("single modes follow Mbar") {
    const CoefficientModel f = normalize_b00(builtin_barotropic_fluid({2.0, 3.0, 0.8, 1.1, 0.3}));
    const Lattice l(3, 8, kTwoPi);
    const Simulator sim(f, l, SimSettings{true});
    std::mt19937 rng(3);
    std::uniform_int_distribution<int> pick(0, l.size() - 1);
    int tested = 0;
    while (tested < 10) {
      const int k = pick(rng);
      if (!l.resolved(k)) continue;
      ++tested;
      const CVec cu = CVec::Random(4);
      const CVec cv = CVec::Random(4);
      CMat uh = CMat::Zero(l.size(), 4);
      CMat vh = CMat::Zero(l.size(), 4);
      uh.row(k) = cu.transpose();
      vh.row(k) = cv.transpose();
      const FieldState s{GridFunction::from_spectrum(l, uh), GridFunction::from_spectrum(l, vh), 0.0};
      const FieldState r = sim.rhs(s);
      CVec y(8);
      y << cu, cv;
      const CVec want = assemble_Mbar(f, f.reference_state(), l.frequency(k)) * y;
      const CMat ru = r.u.spectrum();
      const CMat rv = r.u_t.spectrum();
      CVec got(8);
      got << ru.row(k).transpose(), rv.row(k).transpose();
      CHECK((got - want).norm() <= 1e-11 * std::max(1.0, want.norm()));
      CHECK(ru.norm() == doctest::Approx(ru.row(k).norm()));
      CHECK(rv.norm() == doctest::Approx(rv.row(k).norm()));
    }
  }
}

TEST_CASE("time stepping") {
  const CoefficientModel m = convected(0.5, 0.0);
  const Lattice l(1, 32, kTwoPi);
  const Simulator sim(m, l);
  const FieldState start = initial_state(m, l, bump(1, 0.5, 1.0, 0.5), 1e-2);

  SUBCASE("zero data stays zero") {
    const FieldState zero = initial_state(m, l, bump(1, 0.5, 1.0), 0.0);
    const FieldState end = advance(sim, zero, 1.0, 50);
    CHECK(end.u.values.cwiseAbs().maxCoeff() == 0.0);
    CHECK(end.u_t.values.cwiseAbs().maxCoeff() == 0.0);
  }

  SUBCASE("frozen run agrees with the matrix exponential") {
    const FieldState end = advance(sim, start, 1.0, 1000);
    CHECK(mode_error(sim, start, end, 1.0) < 1e-8);
  }

  SUBCASE("fourth-order convergence") {
    std::vector<double> errors;
    for (int steps : {100, 200, 400}) errors.push_back(mode_error(sim, start, advance(sim, start, 1.0, steps), 1.0));
    CHECK(std::log2(errors[0] / errors[1]) == doctest::Approx(4.0).epsilon(0.05));
    CHECK(std::log2(errors[1] / errors[2]) == doctest::Approx(4.0).epsilon(0.05));
  }

  SUBCASE("step size bound") {
    CHECK(sim.spectral_radius_bound() > 0.0);
    CHECK_THROWS_AS((void)sim.step(start, 2.0 * sim.max_stable_dt()), Error);
    try {
      (void)sim.step(start, 2.0 * sim.max_stable_dt());
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::CFLViolation);
    }
  }
}

TEST_CASE("nonlinear runs") {
  const Lattice l(1, 32, kTwoPi);
  const CoefficientModel nonlinear = convected(0.5, 1.0);
  const Simulator full(nonlinear, l);
  const Simulator frozen(nonlinear, l, SimSettings{true});

  SUBCASE("quadratic small-amplitude signature") {
    std::vector<double> ratios;
    for (double eps : {1e-2, 1e-3}) {
      FieldState a = initial_state(nonlinear, l, bump(1, 0.5, 1.0), eps);
      FieldState b = a;
      const double dt = 0.01;
      double worst = 0.0;
      for (int i = 0; i < 300; ++i) {
        a = full.step(a, dt);
        b = frozen.step(b, dt);
        worst = std::max(worst, (a.u.values - b.u.values).cwiseAbs().maxCoeff());
      }
      ratios.push_back(worst / (eps * eps));
    }
    CHECK(ratios[0] > 0.0);
    CHECK(ratios[0] / ratios[1] == doctest::Approx(1.0).epsilon(0.1));
  }

  SUBCASE("reality and dealiasing") {
    RunSettings rs;
    rs.t_final = 5.0;
    rs.records = 10;
    const EnergyTrace trace = full.run(initial_state(nonlinear, l, bump(1, 0.5, 1.0, 0.5), 1e-2), rs);
    CHECK(trace.max_imaginary < 1e-10);
    CHECK(trace.max_masked < 1e-15);
    CHECK(trace.times.size() == 11);
    CHECK(trace.times.back() == doctest::Approx(5.0));
    for (const auto& row : trace.norms) CHECK(row[0] <= 2.0 * trace.norms.front()[0]);
  }

  SUBCASE("zero amplitude gives a constant trace") {
    RunSettings rs;
    rs.t_final = 2.0;
    const EnergyTrace trace = full.run(initial_state(nonlinear, l, bump(1, 0.5, 1.0), 0.0), rs);
    for (const auto& row : trace.norms) CHECK(row[0] == 0.0);
  }

  SUBCASE("domain exit") {
    FieldState s = equilibrium_state(nonlinear, l);
    s.u.values.setConstant(2.0);
    CHECK_THROWS_AS((void)full.rhs(s), Error);
    try {
      (void)full.rhs(s);
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::DomainExit);
    }
    // Frozen coefficients never look at the state.
    CHECK_NOTHROW((void)frozen.rhs(s));
  }
}

TEST_CASE("periodic damped wave keeps its mean") {
  const CoefficientModel dw = builtin_damped_wave(2.0, 1);
  const Lattice l(1, 16, kTwoPi);
  const Simulator sim(dw, l);
  FieldState s = equilibrium_state(dw, l);
  for (int p = 0; p < l.size(); ++p) s.u.values(p, 0) = 0.3 + std::sin(l.position(p)(0));
  RunSettings rs;
  rs.t_final = 30.0;
  FieldState end = s;
  (void)sim.run(s, rs, &end);
  const CMat hat = end.u.spectrum();
  CHECK(std::abs(hat(0, 0) - 0.3) < 1e-12);
  // The xi = 1 mode is critically damped: (1 + t) e^{-t}.
  CHECK(hat.bottomRows(l.size() - 1).cwiseAbs().maxCoeff() < 0.5 * 31.0 * std::exp(-30.0) + 1e-12);
}

TEST_CASE("energy monitor") {
  const Lattice l(1, 32, kTwoPi);

  SUBCASE("constant coefficients give an exact multiplier") {
    const CoefficientModel m = convected(0.5, 0.0);
    const Simulator sim(m, l);
    const FieldState s = initial_state(m, l, bump(1, 0.5, 1.0, -0.5), 1e-2);
    EnergySettings es;
    const CMat uh = s.u.spectrum();
    const CMat vh = s.u_t.spectrum();
    double want = 0.0;
    for (int k = 0; k < l.size(); ++k) {
      const double x = l.frequency_norm(k);
      const double br = japanese_bracket(x);
      const double phi = smoothstep((x - 2.0) / 1.0, es.chi.order);
      const double psi = 1.0 - smoothstep((x - 4.0) / 1.0, es.chi.order);
      CMat dm = psi * CMat::Identity(2, 2);
      if (phi > 0.0) dm += phi * build_dissipation_symbol(m, m.reference_state(), l.frequency(k), 1.0).D;
      CVec w(2);
      w << std::pow(br, es.s + 1.0) * uh(k, 0), std::pow(br, es.s) * vh(k, 0);
      want += kTwoPi * w.dot(dm * w).real();
    }
    CHECK(sim.energy_value(s, es) == doctest::Approx(want).epsilon(1e-12));
  }

  SUBCASE("the energy inequality holds along a small run") {
    const CoefficientModel m = convected(0.5, 1.0);
    const Simulator sim(m, l);
    RunSettings rs;
    rs.t_final = 2.0;
    rs.records = 4;
    rs.energy = true;
    rs.energy_snapshots = 20;
    rs.dt = 0.01;
    const EnergyTrace trace = sim.run(initial_state(m, l, bump(1, 0.5, 1.0), 1e-3), rs);
    REQUIRE(trace.snapshots.size() == 20);
    for (const EnergySample& e : trace.snapshots) {
      CHECK(e.satisfied);
      CHECK(e.rayleigh_min > 0.0);
      CHECK(e.value > 0.0);
    }
    int sampled = 0;
    for (double v : trace.energy_functional) sampled += std::isnan(v) ? 0 : 1;
    CHECK(sampled == 20);
    const std::string csv = trace_csv(trace);
    CHECK(csv.rfind("t,norm_s2,energy_functional,dissipation_integral\n", 0) == 0);
  }
}

TEST_CASE("simulator preconditions") {
  const CoefficientModel raw = builtin_barotropic_fluid({});
  CHECK_THROWS_AS(Simulator(raw, Lattice(3, 4, kTwoPi)), Error);
  try {
    Simulator bad(raw, Lattice(3, 4, kTwoPi));
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::PrerequisiteMissing);
  }
  const CoefficientModel dw = builtin_damped_wave(2.0, 1);
  CHECK_THROWS_AS(Simulator(dw, Lattice(2, 4, kTwoPi)), Error);
  const Simulator sim(dw, Lattice(1, 8, kTwoPi));
  BumpSpec b;
  b.width = 1.0;
  b.u0_amplitude = RVec::Ones(2);
  CHECK_THROWS_AS((void)initial_state(dw, sim.lattice(), DataSpec{{b}}, 1.0), Error);
}
