// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "commands.hpp"
#include "config.hpp"
#include "hypdiss/conditions.hpp"
#include "hypdiss/error.hpp"
#include "hypdiss/io.hpp"
#include "hypdiss/linear_spectral.hpp"
#include "hypdiss/simulator.hpp"
#include "hypdiss/symbols.hpp"

namespace fs = std::filesystem;
using namespace hypdiss;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string num(double x) { return format_double(x); }

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

RVec random_unit(int d, std::mt19937& rng) {
  std::normal_distribution<double> g;
  RVec v(d);
  for (int i = 0; i < d; ++i) v(i) = g(rng);
  return v / v.norm();
}

double rel(const CMat& a, const CMat& b) { return (a - b).norm() / std::max(1.0, b.norm()); }

CoefficientModel fluid(const FluidParameters& p = {}) { return normalize_b00(builtin_barotropic_fluid(p)); }

DataSpec gaussian(int n, int d, double width) {
  BumpSpec b;
  b.width = width;
  b.center = RVec::Zero(d);
  b.u0_amplitude = RVec::Ones(n);
  return DataSpec{{b}};
}

// 1. Decay exponent of the combined norm for d = 3.
Outcome decay_rate() {
  Outcome o{true, ""};
  const std::pair<const char*, CoefficientModel> models[] = {{"fluid", fluid()},
                                                             {"damped-wave", builtin_damped_wave(2.0, 3)}};
  for (const auto& [name, m] : models) {
    const auto t0 = std::chrono::steady_clock::now();
    const DirectionSet dirs = default_directions(3);
    const double width = diffusive_data_width(m, dirs);
    const DecayStudy study = run_decay(m, gaussian(m.n(), 3, width), default_mode_grid(3), DecaySettings{});
    const double p = study.fit.exponent;
    const bool ok = p >= -0.85 && p <= -0.65 && study.fit.t_min == 5.0 && study.fit.t_max == 200.0;
    o.pass = o.pass && ok;
    o.detail += std::string(name) + " exponent " + num(p) + " (" + num(seconds_since(t0)) + " s); ";
  }
  return o;
}

// 2. Uniform certificate: damped wave constant and fluid conditioning trend.
Outcome uniform_certificate() {
  const DirectionSet dirs = default_directions(3);
  const std::vector<double> grid = log_grid(1e-2, 1e2, 49);
  const CoefficientModel dw = builtin_damped_wave(2.0, 3);
  const double c_dw = check_uniform_dissipativity(dw, dw.reference_state(), dirs, grid).c_bar;

  const CoefficientModel f = fluid();
  const ConditionReport fr = check_uniform_dissipativity(f, f.reference_state(), dirs, grid);
  std::vector<double> xs;
  std::vector<double> conds;
  for (const auto& row : fr.trace["per_xi"]) {
    xs.push_back(row["xi"].get<double>());
    conds.push_back(row["cond_balanced"].get<double>());
  }
  const double slope = loglog_slope(xs, conds);
  // Decade slopes at both ends: the certificate settles to different constants there.
  const auto tail = [&](std::size_t from, std::size_t to) {
    return loglog_slope({xs.begin() + from, xs.begin() + to}, {conds.begin() + from, conds.begin() + to});
  };
  const double low = tail(0, 13);
  const double high = tail(xs.size() - 13, xs.size());
  const bool ok = std::abs(c_dw - 0.5) <= 1e-3 && fr.c_bar > 0.0 && std::abs(slope) < 0.05 &&
                  fr.verdict == Verdict::Pass;
  return {ok, "damped c_abs " + num(c_dw) + "; fluid c_abs " + num(fr.c_bar) + ", cond(P) log-log slope " +
                  num(slope) + " (limit 0.05; first and last decade " + num(low) + ", " + num(high) + "), cond range " +
                  num(*std::min_element(conds.begin(), conds.end())) + " to " + num(fr.trace["cond_sup"].get<double>())};
}

// 3. All conditions pass for three fluid parameter sets; block reassembly.
Outcome fluid_conditions() {
  const FluidParameters sets[] = {{3.0, 2.0, 1.0, 1.0, 0.0}, {2.0, 3.0, 0.8, 1.1, 0.3}, {1.5, 5.0, 2.0, 2.0, 1.0}};
  Outcome o{true, ""};
  for (const FluidParameters& p : sets) {
    if (!(p.mu > p.eta_tilde())) {
      o.pass = false;
      o.detail += "bad parameter set; ";
      continue;
    }
    const FullCheck full = run_all_checks(fluid(p), CheckSettings{}, default_directions(3));
    std::string verdicts;
    for (const ConditionReport& r : full.reports) {
      if (r.condition != Condition::Uniform) o.pass = o.pass && r.verdict == Verdict::Pass;
      verdicts += std::string(to_string(r.condition)) + "=" + std::string(to_string(r.verdict)) + " ";
    }
    o.detail += "mu " + num(p.mu) + ": " + verdicts + "; ";

    const CoefficientModel raw = builtin_barotropic_fluid(p);
    std::mt19937 rng(17);
    double worst = 0.0;
    for (int i = 0; i < 50; ++i) {
      const RVec w = random_unit(3, rng);
      const FluidBlocks fb = fluid_block_decomposition(raw, w);
      const BlockSet full_blocks = raw_directional_symbols(raw, raw.reference_state(), w);
      auto err = [&](const RMat& l, const RMat& t, const RMat& want) {
        RMat blk = RMat::Zero(4, 4);
        blk.topLeftCorner(2, 2) = l;
        blk.bottomRightCorner(2, 2) = t;
        return (fb.basis * blk * fb.basis.transpose() - want).norm();
      };
      worst = std::max({worst, err(fb.longitudinal.A0, fb.transverse.A0, full_blocks.A0),
                        err(fb.longitudinal.A, fb.transverse.A, full_blocks.A),
                        err(fb.longitudinal.B00, fb.transverse.B00, full_blocks.B00),
                        err(fb.longitudinal.B, fb.transverse.B, full_blocks.B),
                        err(fb.longitudinal.C, fb.transverse.C, full_blocks.C)});
      // Transverse blocks are damped-wave coefficients: A0 = I, B00 = -nu I, B = eta I, no convection.
      worst = std::max({worst, (fb.transverse.A0 - RMat::Identity(2, 2)).norm(), fb.transverse.A.norm(),
                        fb.transverse.C.norm(), (fb.transverse.B00 + p.nu * RMat::Identity(2, 2)).norm(),
                        (fb.transverse.B - p.eta * RMat::Identity(2, 2)).norm()});
    }
    o.pass = o.pass && worst < 1e-12;
    o.detail += "reassembly " + num(worst) + "; ";
  }
  return o;
}

// 4. Sub-characteristic threshold of the convected damped wave.
Outcome d1_threshold() {
  const DirectionSet dirs = default_directions(1);
  auto d1 = [&](double a) {
    const CoefficientModel m = builtin_convected_damped_wave(a);
    const std::vector<RVec> states{m.reference_state()};
    SymmetrizerCache cache;
    (void)check_HA(m, states, dirs, cache);
    return check_D1(m, m.reference_state(), dirs, cache);
  };
  double lo = 0.5;
  double hi = 1.5;
  const bool bracket = d1(lo).verdict == Verdict::Pass && d1(hi).verdict == Verdict::Fail;
  while (hi - lo > 1e-4) {
    const double mid = 0.5 * (lo + hi);
    (d1(mid).verdict == Verdict::Pass ? lo : hi) = mid;
  }
  double worst = 0.0;
  for (double a : {0.0, 0.3, 0.9, 0.999, 1.001, 1.2, 2.0, -1.7}) {
    worst = std::max(worst, std::abs(d1(a).margin - 2.0 * (a * a - 1.0)));
  }
  const double edge = 0.5 * (lo + hi);
  const bool ok = bracket && std::abs(edge - 1.0) <= 1e-3 && worst <= 1e-9;
  return {ok, "flip at a = " + num(edge) + " (bracket width " + num(hi - lo) + "), max |margin - 2(a^2-1)| " +
                  num(worst)};
}

// 5. Symbol identities over 100 random samples.
Outcome symbol_identities() {
  const auto t0 = std::chrono::steady_clock::now();
  const CoefficientModel f = fluid();
  const RVec u = f.reference_state();
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> mag(-2.0, 2.0);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const RVec w = random_unit(3, rng);
    const double xi = std::pow(10.0, mag(rng));
    const CMat z = z_scaling(4, xi);
    worst = std::max(worst, rel(assemble_M(f, u, xi * w), z * assemble_Mbar(f, u, xi * w) * z.inverse()));
    const CMat zt = z_tilde_scaling(4, xi);
    worst = std::max(worst, rel(xi * assemble_K(f, u, 1.0 / xi, w), zt.inverse() * assemble_M(f, u, xi * w) * zt));
    worst = std::max(worst, rel(assemble_K(f, u, 0.0, w), assemble_calB(f, u, w)));
    const double h = 1e-4;
    worst = std::max(worst, rel((assemble_K(f, u, h, w) - assemble_K(f, u, 0.0, w)) / h, assemble_calA(f, u, w)));
  }
  const double elapsed = seconds_since(t0);
  return {worst <= 1e-10 && elapsed < 5.0, "max relative residual " + num(worst) + " in " + num(elapsed) + " s"};
}

// 6. Para-differential suite.
Outcome paradiff_properties() {
  const nlohmann::json suite = cli::paradiff_suite(cli::RunConfig{});
  Outcome o{true, ""};
  int count = 0;
  for (const auto& [name, entry] : suite.items()) {
    if (!entry.contains("pass")) continue;
    ++count;
    if (!entry["pass"].get<bool>()) {
      o.pass = false;
      o.detail += name + " failed; ";
    }
  }
  const auto val = [&](const char* k) { return suite[k]["value"].is_null() ? std::string("inf") : num(suite[k]["value"]); };
  o.detail += std::to_string(count) + " checks; LP " + val("lp_reconstruction") + ", support " +
              val("smoothed_support") + ", adjoint slope " + val("adjoint_error_slope") + ", product slope " +
              val("product_error_slope") + ", Garding deficit exponent " + val("garding_scaling");
  return o;
}

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
    CVec got(2 * n);
    got << u1.row(k).transpose(), v1.row(k).transpose();
    const CMat mbar = assemble_Mbar(sim.model(), sim.model().reference_state(), l.frequency(k));
    worst = std::max(worst, (got - evolve_mode(mbar, y, t)).cwiseAbs().maxCoeff());
  }
  return worst;
}

FieldState advance(const Simulator& sim, FieldState s, double t, int steps) {
  for (int i = 0; i < steps; ++i) s = sim.step(s, t / steps);
  return s;
}

// 7. Simulator consistency and bounded norms.
Outcome simulator_consistency() {
  const Lattice l(1, 32, 2.0 * M_PI);
  BumpSpec b;
  b.width = 0.5;
  b.u0_amplitude = RVec::Ones(1);
  b.u1_amplitude = RVec::Constant(1, 0.5);
  const DataSpec data{{b}};

  const CoefficientModel linear = normalize_b00(builtin_convected_damped_wave(0.5));
  const Simulator lin(linear, l);
  const FieldState start = initial_state(linear, l, data, 1e-2);
  const double frozen_err = mode_error(lin, start, advance(lin, start, 1.0, 1000), 1.0) / 1e-2;
  std::vector<double> errs;
  for (int steps : {100, 200, 400}) errs.push_back(mode_error(lin, start, advance(lin, start, 1.0, steps), 1.0));
  const double order = std::log2(errs[1] / errs[2]);
  const double order_coarse = std::log2(errs[0] / errs[1]);

  const CoefficientModel nonlinear = normalize_b00(builtin_convected_damped_wave(0.5, 1.0));
  const Simulator full(nonlinear, l);
  const Simulator frozen(nonlinear, l, SimSettings{true});
  std::vector<double> ratios;
  for (double eps : {1e-2, 1e-3}) {
    FieldState a = initial_state(nonlinear, l, data, eps);
    FieldState c = a;
    double worst = 0.0;
    for (int i = 0; i < 300; ++i) {
      a = full.step(a, 0.01);
      c = frozen.step(c, 0.01);
      worst = std::max(worst, (a.u.values - c.u.values).cwiseAbs().maxCoeff());
    }
    ratios.push_back(worst / (eps * eps));
  }
  const double spread = ratios[0] / ratios[1];

  RunSettings energy;
  energy.t_final = 2.0;
  energy.dt = 0.01;
  energy.records = 4;
  energy.energy = true;
  energy.energy_snapshots = 20;
  const EnergyTrace et = full.run(initial_state(nonlinear, l, data, 1e-3), energy);
  int satisfied = 0;
  for (const EnergySample& e : et.snapshots) satisfied += e.satisfied && e.rayleigh_min > 0.0 ? 1 : 0;

  RunSettings long_run;
  long_run.t_final = 100.0;
  long_run.records = 200;
  long_run.sobolev_indices = {1.0, 2.0};
  double growth = 0.0;
  bool completed = true;
  try {
    const EnergyTrace tr = full.run(initial_state(nonlinear, l, data, 1e-2), long_run);
    for (const auto& row : tr.norms) {
      for (std::size_t j = 0; j < row.size(); ++j) growth = std::max(growth, row[j] / tr.norms.front()[j]);
    }
    completed = tr.max_imaginary < 1e-10;
  } catch (const Error& e) {
    completed = false;
  }

  const bool ok = frozen_err <= 1e-8 && std::abs(order - 4.0) <= 0.2 && std::abs(order_coarse - 4.0) <= 0.2 &&
                  spread > 0.5 && spread < 2.0 && et.snapshots.size() == 20 && satisfied == 20 && completed &&
                  growth <= 2.0;
  return {ok, "frozen per-mode error " + num(frozen_err) + " (relative to eps); RK4 slopes " + num(order_coarse) + ", " +
                  num(order) + "; |nl-lin|/eps^2 = " + num(ratios[0]) + ", " + num(ratios[1]) + "; energy " +
                  std::to_string(satisfied) + "/20; max norm growth on [0,100] " + num(growth)};
}

std::string tree_bytes(const fs::path& root) {
  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  std::string all;
  for (const fs::path& p : files) {
    all += fs::relative(p, root).string() + "\n" + read_file(p.string());
  }
  return all;
}

// 8. Byte-identical repeated runs.
Outcome determinism() {
  const fs::path dir = fs::temp_directory_path() / "hypdiss_acceptance_determinism";
  cli::RunConfig c;
  c.output_dir = dir.string();
  c.seed = 11;
  std::ostringstream sink;
  std::streambuf* saved = std::cout.rdbuf(sink.rdbuf());
  std::string first;
  std::string second;
  for (std::string* target : {&first, &second}) {
    fs::remove_all(dir);
    c.builtin = "fluid";
    c.command = "check";
    (void)cli::cmd_check(c);
    c.builtin = "damped-wave";
    c.command = "decay";
    (void)cli::cmd_decay(c);
    *target = tree_bytes(dir);
  }
  std::cout.rdbuf(saved);
  fs::remove_all(dir);
  const bool ok = !first.empty() && first == second;
  return {ok, std::to_string(first.size()) + " bytes compared"};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"decay rate t^(-d/4) in d = 3", decay_rate},
      {"uniform dissipativity certificate", uniform_certificate},
      {"condition checks on fluid parameter sets", fluid_conditions},
      {"sub-characteristic threshold", d1_threshold},
      {"symbol identities", symbol_identities},
      {"para-differential properties", paradiff_properties},
      {"simulator consistency", simulator_consistency},
      {"determinism", determinism},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += o.pass ? 0 : 1;
    std::cout << (o.pass ? "PASS" : "FAIL") << " [" << i + 1 << "] " << criteria[i].first << ": " << o.detail
              << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
