#include "hypdiss/conditions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include "hypdiss/error.hpp"
#include "hypdiss/io.hpp"
#include "hypdiss/parallel.hpp"
#include "hypdiss/symbols.hpp"

namespace hypdiss {

std::string_view to_string(Verdict v) noexcept {
  switch (v) {
    case Verdict::Pass: return "pass";
    case Verdict::Fail: return "fail";
    case Verdict::Marginal: return "marginal";
  }
  return "fail";
}

std::string_view to_string(Condition c) noexcept {
  switch (c) {
    case Condition::HA: return "HA";
    case Condition::HB: return "HB";
    case Condition::D1: return "D1";
    case Condition::D2: return "D2";
    case Condition::D3: return "D3";
    case Condition::Uniform: return "UNIFORM";
  }
  return "HA";
}

Verdict classify_margin(double margin, double floor) {
  if (!std::isfinite(margin)) return Verdict::Fail;
  if (margin < -floor) return Verdict::Pass;
  if (margin > floor) return Verdict::Fail;
  return Verdict::Marginal;
}

void SymmetrizerCache::insert(const RVec& u, const RVec& omega, CMat s) {
  entries_.push_back({u, omega, std::move(s)});
}

const CMat* SymmetrizerCache::find(const RVec& u, const RVec& omega) const {
  for (const auto& e : entries_) {
    if (e.u.size() == u.size() && e.omega.size() == omega.size() && e.u == u && e.omega == omega) return &e.s;
  }
  return nullptr;
}

namespace {

constexpr double kPatternMismatchMargin = 1.0;

void require_normalized(const CoefficientModel& model) {
  if (!model.normalized()) fail(ErrorKind::PrerequisiteMissing, "condition checks need a normalized model");
}

// Tracks the worst (largest) margin and where it occurred.
struct Worst {
  double margin = -std::numeric_limits<double>::infinity();
  Witness witness;
  void offer(double m, const RVec& u, const RVec& omega, double xi) {
    if (m > margin) {
      margin = m;
      witness = {u, omega, xi};
    }
  }
};

// Hyperbolicity margin of a matrix that should have real semi-simple spectrum:
// +max|Im| if non-real, 0 if defective, otherwise -1/cond(S).
struct HyperbolicPoint {
  double margin = 0.0;
  std::vector<int> pattern;
  std::optional<Symmetrizer> symmetrizer;
};

HyperbolicPoint hyperbolic_point(const CMat& k, const CheckSettings& settings) {
  HyperbolicPoint p;
  const EigenStructure es = eigstructure(k, settings.cluster_tolerance);
  p.pattern = es.multiplicities();
  std::sort(p.pattern.begin(), p.pattern.end());
  if (es.max_abs_imag() > es.absolute_tolerance) {
    p.margin = es.max_abs_imag();
  } else if (!es.all_semi_simple()) {
    p.margin = 0.0;
  } else {
    p.symmetrizer = build_symmetrizer(es, k);
    p.margin = -1.0 / p.symmetrizer->condition;
  }
  return p;
}

std::string grid_description(const std::string& what, std::size_t states, std::size_t directions) {
  return what + ": " + std::to_string(states) + " states x " + std::to_string(directions) + " directions";
}

nlohmann::json vec_json(const RVec& v) {
  nlohmann::json a = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

ConditionReport finish(Condition c, const Worst& worst, double c_bar, std::string grid, const CheckSettings& s) {
  ConditionReport r;
  r.condition = c;
  r.margin = worst.margin;
  r.witness = worst.witness;
  r.c_bar = c_bar;
  r.grid_spec = std::move(grid);
  r.verdict = classify_margin(worst.margin, s.strictness_floor);
  return r;
}

ConditionReport hyperbolic_check(Condition which, const CoefficientModel& model, const std::vector<RVec>& states,
                                 const DirectionSet& directions, SymmetrizerCache& cache,
                                 const CheckSettings& settings) {
  require_normalized(model);
  if (states.empty() || directions.directions.empty()) fail(ErrorKind::GridEmpty, "state or direction grid is empty");
  Worst worst;
  double c_bar = std::numeric_limits<double>::infinity();
  std::optional<std::vector<int>> reference_pattern;
  bool pattern_mismatch = false;
  double a0_margin = -std::numeric_limits<double>::infinity();

  for (const RVec& u : states) {
    const RMat a0 = model.A(0, u);
    if (which == Condition::HA) {
      // Part (a): A^0 diagonalizable with positive real spectrum.
      const EigenStructure es0 = eigstructure(to_complex(a0), settings.cluster_tolerance);
      double m;
      if (es0.max_abs_imag() > es0.absolute_tolerance) {
        m = es0.max_abs_imag();
      } else if (!es0.all_semi_simple()) {
        m = 0.0;
      } else {
        double lmin = std::numeric_limits<double>::infinity();
        for (const auto& c : es0.clusters) lmin = std::min(lmin, c.value.real());
        m = -lmin;
      }
      a0_margin = std::max(a0_margin, m);
      worst.offer(m, u, directions.directions.front(), 0.0);
      if (m >= 0.0) continue;
    }
    for (std::size_t w = 0; w < directions.directions.size(); ++w) {
      const RVec& omega = directions.directions[w];
      CMat k;
      if (which == Condition::HA) {
        k = to_complex(a0.partialPivLu().solve(RMat(frequency_symbols(model, u, omega).A.real())));
      } else {
        k = kI * assemble_calB(model, u, omega);
      }
      const HyperbolicPoint p = hyperbolic_point(k, settings);
      double m = p.margin;
      if (!reference_pattern) {
        reference_pattern = p.pattern;
      } else if (*reference_pattern != p.pattern) {
        pattern_mismatch = true;
        m = std::max(m, kPatternMismatchMargin);
      }
      worst.offer(m, u, omega, 0.0);
      if (p.symmetrizer) {
        c_bar = std::min(c_bar, p.symmetrizer->lambda_min);
        cache.insert(u, omega, p.symmetrizer->S);
      }
    }
  }
  ConditionReport r = finish(which, worst, std::isfinite(c_bar) ? c_bar : 0.0,
                             grid_description(which == Condition::HA ? "A0^{-1} A(u,w)" : "i calB(u,w)", states.size(),
                                              directions.directions.size()),
                             settings);
  r.trace["pattern_mismatch"] = pattern_mismatch;
  if (reference_pattern) r.trace["multiplicities"] = *reference_pattern;
  if (which == Condition::HA) r.trace["a0_margin"] = a0_margin;
  r.trace["symmetrizers_cached"] = cache.size();
  return r;
}

// lambda_max of J^*(W + W^*)J over the eigenspaces of `w0` (orthonormal J).
double eigenspace_margin(const CMat& w0, const CMat& w1, const CheckSettings& settings) {
  const EigenStructure es = eigstructure(w0, settings.cluster_tolerance);
  const CMat g = w1 + w1.adjoint();
  double worst = -std::numeric_limits<double>::infinity();
  for (const auto& c : es.clusters) {
    const CMat restricted = c.basis.adjoint() * g * c.basis;
    worst = std::max(worst, hermitian_eigenvalues(restricted).maxCoeff());
  }
  return worst;
}

}  // namespace

ConditionReport check_HA(const CoefficientModel& model, const std::vector<RVec>& states,
                         const DirectionSet& directions, SymmetrizerCache& cache, const CheckSettings& settings) {
  return hyperbolic_check(Condition::HA, model, states, directions, cache, settings);
}

ConditionReport check_HB(const CoefficientModel& model, const std::vector<RVec>& states,
                         const DirectionSet& directions, SymmetrizerCache& cache, const CheckSettings& settings) {
  return hyperbolic_check(Condition::HB, model, states, directions, cache, settings);
}

ConditionReport check_D1(const CoefficientModel& model, const RVec& ubar, const DirectionSet& directions,
                         const SymmetrizerCache& ha_cache, const CheckSettings& settings) {
  require_normalized(model);
  if (directions.directions.empty()) fail(ErrorKind::GridEmpty, "direction grid is empty");
  Worst worst;
  const RMat a0 = model.A(0, ubar);
  const Eigen::PartialPivLU<CMat> a0_lu(to_complex(a0));
  for (std::size_t w = 0; w < directions.directions.size(); ++w) {
    const RVec& omega = directions.directions[w];
    const CMat* h = ha_cache.find(ubar, omega);
    if (!h) fail(ErrorKind::PrerequisiteMissing, "no HA symmetrizer cached for this (u, w)");
    const DirectionalSymbols s = assemble_directional(model, ubar, omega);
    const CMat w0 = a0_lu.solve(s.A);
    const CMat w1 = *h * a0_lu.solve(-s.B + w0 * w0 + s.C * w0);
    const double m = eigenspace_margin(w0, w1, settings);
    worst.offer(m, ubar, omega, 0.0);
  }
  return finish(Condition::D1, worst, -worst.margin,
                grid_description("eigenspaces of A0^{-1} A(ubar,w)", 1, directions.directions.size()), settings);
}

ConditionReport check_D2(const CoefficientModel& model, const RVec& ubar, const DirectionSet& directions,
                         const SymmetrizerCache& hb_cache, const CheckSettings& settings) {
  require_normalized(model);
  if (directions.directions.empty()) fail(ErrorKind::GridEmpty, "direction grid is empty");
  Worst worst;
  for (std::size_t w = 0; w < directions.directions.size(); ++w) {
    const RVec& omega = directions.directions[w];
    const CMat* h = hb_cache.find(ubar, omega);
    if (!h) fail(ErrorKind::PrerequisiteMissing, "no HB symmetrizer cached for this (u, w)");
    const CMat w1 = *h * assemble_calA(model, ubar, omega);
    const double m = eigenspace_margin(assemble_calB(model, ubar, omega), w1, settings);
    worst.offer(m, ubar, omega, 0.0);
  }
  return finish(Condition::D2, worst, -worst.margin,
                grid_description("eigenspaces of calB(ubar,w)", 1, directions.directions.size()), settings);
}

ConditionReport check_D3(const CoefficientModel& model, const RVec& ubar, const DirectionSet& directions,
                         const std::vector<double>& xi_grid, const CheckSettings& settings) {
  require_normalized(model);
  if (xi_grid.empty() || directions.directions.empty()) fail(ErrorKind::GridEmpty, "frequency grid is empty");
  for (double x : xi_grid) {
    if (!(x > 0.0)) fail(ErrorKind::InvalidParameter, "D3 frequency grid must exclude 0");
  }
  const int nd = static_cast<int>(directions.directions.size());
  const int total = static_cast<int>(xi_grid.size()) * nd;
  std::vector<double> margins(total);
  parallel_for(total, [&](int idx) {
    const RVec xi = xi_grid[idx / nd] * directions.directions[idx % nd];
    margins[idx] = dispersion_roots(model, ubar, xi).max_real_part;
  });
  Worst worst;
  std::vector<GridMargin> points;
  for (int idx = 0; idx < total; ++idx) {
    const double x = xi_grid[idx / nd];
    worst.offer(margins[idx], ubar, directions.directions[idx % nd], x);
    points.push_back({x, idx % nd, margins[idx]});
  }
  ConditionReport r = finish(Condition::D3, worst, -worst.margin,
                             grid_description("dispersion roots, " + std::to_string(xi_grid.size()) + " |xi| values", 1,
                                              directions.directions.size()),
                             settings);
  r.points = std::move(points);
  return r;
}

UniformPoint uniform_point(const CoefficientModel& model, const RVec& u, const RVec& xi_vec) {
  const CMat m = assemble_M(model, u, xi_vec);
  const double rho = decay_profile(xi_vec.norm());
  UniformPoint p;
  p.abscissa = spectral_abscissa(m);
  p.ratio = -p.abscissa / rho;
  if (p.abscissa >= 0.0) {
    p.cond_literal = p.cond_balanced = std::numeric_limits<double>::infinity();
    p.certified_ratio = p.ratio;
    return p;
  }
  const CMat literal = solve_lyapunov(m, rho * CMat::Identity(m.rows(), m.cols()));
  p.cond_literal = hermitian_condition(literal);
  const RateBalancedLyapunov balanced = rate_balanced_lyapunov(m);
  p.cond_balanced = balanced.condition;
  p.certified_ratio = balanced.certified_rate / rho;
  return p;
}

ConditionReport check_uniform_dissipativity(const CoefficientModel& model, const RVec& ubar,
                                            const DirectionSet& directions, const std::vector<double>& xi_grid,
                                            const CheckSettings& settings) {
  require_normalized(model);
  if (xi_grid.empty() || directions.directions.empty()) fail(ErrorKind::GridEmpty, "frequency grid is empty");
  for (double x : xi_grid) {
    if (!(x > 0.0)) fail(ErrorKind::InvalidParameter, "uniform certificate excludes xi = 0");
  }
  const int nd = static_cast<int>(directions.directions.size());
  const int nx = static_cast<int>(xi_grid.size());
  std::vector<UniformPoint> pts(static_cast<std::size_t>(nx) * nd);
  parallel_for(nx * nd, [&](int idx) {
    pts[idx] = uniform_point(model, ubar, xi_grid[idx / nd] * directions.directions[idx % nd]);
  });

  double c_abs = std::numeric_limits<double>::infinity();
  double cond_sup = 0.0;
  Witness witness;
  std::vector<GridMargin> points;
  nlohmann::json per_xi = nlohmann::json::array();
  for (int i = 0; i < nx; ++i) {
    double ratio = std::numeric_limits<double>::infinity();
    double cond_b = 0.0;
    double cond_l = 0.0;
    double certified = std::numeric_limits<double>::infinity();
    double alpha = -std::numeric_limits<double>::infinity();
    for (int w = 0; w < nd; ++w) {
      const UniformPoint& p = pts[static_cast<std::size_t>(i) * nd + w];
      if (p.ratio < c_abs) {
        c_abs = p.ratio;
        witness = {ubar, directions.directions[w], xi_grid[i]};
      }
      ratio = std::min(ratio, p.ratio);
      cond_b = std::max(cond_b, p.cond_balanced);
      cond_l = std::max(cond_l, p.cond_literal);
      certified = std::min(certified, p.certified_ratio);
      alpha = std::max(alpha, p.abscissa);
      points.push_back({xi_grid[i], w, -p.ratio});
    }
    cond_sup = std::max(cond_sup, cond_b);
    per_xi.push_back({{"xi", xi_grid[i]},
                      {"abscissa", alpha},
                      {"ratio", ratio},
                      {"cond_balanced", cond_b},
                      {"cond_literal", cond_l},
                      {"certified_ratio", certified}});
  }
  ConditionReport r;
  r.condition = Condition::Uniform;
  r.c_bar = c_abs;
  r.witness = witness;
  r.grid_spec = grid_description("M(ubar, xi w), " + std::to_string(nx) + " |xi| values", 1, nd);
  r.points = std::move(points);
  const bool cond_ok = std::isfinite(cond_sup) && cond_sup <= settings.lyapunov_cond_ceiling;
  r.margin = cond_ok ? -c_abs : std::max(-c_abs, std::log10(cond_sup / settings.lyapunov_cond_ceiling));
  if (!std::isfinite(cond_sup)) r.margin = std::max(-c_abs, 1.0);
  r.verdict = classify_margin(r.margin, settings.strictness_floor);
  r.trace["c_abs"] = c_abs;
  r.trace["cond_sup"] = cond_sup;
  r.trace["cond_ceiling"] = settings.lyapunov_cond_ceiling;
  r.trace["per_xi"] = std::move(per_xi);
  return r;
}

DissipationSymbol build_dissipation_symbol(const CoefficientModel& model, const RVec& u, const RVec& xi_vec,
                                           double r_threshold) {
  if (xi_vec.norm() < r_threshold) fail(ErrorKind::InvalidParameter, "dissipation symbol needs |xi| >= r_threshold");
  const CMat m = assemble_M(model, u, xi_vec);
  if (spectral_abscissa(m) >= 0.0) fail(ErrorKind::NotDissipativeAtPoint, "symbol is not Hurwitz at this frequency");
  DissipationSymbol out;
  const CMat identity = CMat::Identity(m.rows(), m.cols());
  out.D = solve_lyapunov(m, identity);
  const RVec ev = hermitian_eigenvalues(out.D);
  out.lambda_min = ev(0);
  out.lambda_max = ev(ev.size() - 1);
  if (!(out.lambda_min > 0.0)) fail(ErrorKind::NotDissipativeAtPoint, "Lyapunov solution is not positive definite");
  out.c_inf = std::min(1.0, out.lambda_min);
  out.residual = (out.D * m + m.adjoint() * out.D + identity).norm();
  const double top = hermitian_eigenvalues(out.D * m + m.adjoint() * out.D).maxCoeff();
  if (top > -out.c_inf * (1.0 - 1e-8)) fail(ErrorKind::NotDissipativeAtPoint, "dissipation inequality not verified");
  return out;
}

double dissipation_derivative_bound(const CoefficientModel& model, const RVec& u, const RVec& xi_vec, double h) {
  double worst = 0.0;
  for (Eigen::Index j = 0; j < xi_vec.size(); ++j) {
    RVec plus = xi_vec;
    RVec minus = xi_vec;
    plus(j) += h;
    minus(j) -= h;
    const CMat d = (build_dissipation_symbol(model, u, plus, 0.0).D - build_dissipation_symbol(model, u, minus, 0.0).D) /
                   (2.0 * h);
    worst = std::max(worst, japanese_bracket(xi_vec.norm()) * d.operatorNorm());
  }
  return worst;
}

FullCheck run_all_checks(const CoefficientModel& model, const CheckSettings& settings,
                         const DirectionSet& directions) {
  FullCheck out;
  const RVec ubar = model.reference_state();
  const int samples = model.constant_coefficients() ? 1 : settings.state_samples;
  const std::vector<RVec> states = sample_states(model, samples);

  SymmetrizerCache ha_cache;
  SymmetrizerCache hb_cache;
  const ConditionReport ha = check_HA(model, states, directions, ha_cache, settings);
  const ConditionReport hb = check_HB(model, states, directions, hb_cache, settings);
  out.reports.push_back(ha);
  out.reports.push_back(hb);

  // A check whose prerequisite is marginal inherits the marginal verdict.
  auto blocked = [&](Condition c, const char* why, Verdict prerequisite) {
    ConditionReport r;
    r.condition = c;
    r.verdict = prerequisite == Verdict::Marginal ? Verdict::Marginal : Verdict::Fail;
    r.margin = prerequisite == Verdict::Marginal ? 0.0 : std::numeric_limits<double>::infinity();
    r.grid_spec = "not evaluated";
    r.trace["skipped"] = why;
    return r;
  };
  try {
    out.reports.push_back(check_D1(model, ubar, directions, ha_cache, settings));
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::PrerequisiteMissing) throw;
    out.reports.push_back(blocked(Condition::D1, "HA symmetrizer unavailable", ha.verdict));
  }
  try {
    out.reports.push_back(check_D2(model, ubar, directions, hb_cache, settings));
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::PrerequisiteMissing) throw;
    out.reports.push_back(blocked(Condition::D2, "HB symmetrizer unavailable", hb.verdict));
  }
  const ConditionReport d3 =
      check_D3(model, ubar, directions, log_grid(settings.xi_min, settings.xi_max, settings.xi_count), settings);
  out.reports.push_back(d3);
  if (d3.verdict == Verdict::Pass) {
    out.reports.push_back(check_uniform_dissipativity(
        model, ubar, directions, log_grid(settings.uniform_xi_min, settings.uniform_xi_max, settings.uniform_xi_count),
        settings));
  } else {
    out.reports.push_back(blocked(Condition::Uniform, "D3 did not pass", d3.verdict));
  }

  out.overall = Verdict::Pass;
  for (const auto& r : out.reports) {
    if (r.verdict == Verdict::Fail) {
      out.overall = Verdict::Fail;
    } else if (r.verdict == Verdict::Marginal && out.overall == Verdict::Pass) {
      out.overall = Verdict::Marginal;
    }
  }
  return out;
}

nlohmann::json to_json(const ConditionReport& report) {
  nlohmann::json j;
  j["condition"] = to_string(report.condition);
  j["verdict"] = to_string(report.verdict);
  j["margin"] = std::isfinite(report.margin) ? nlohmann::json(report.margin) : nlohmann::json(nullptr);
  j["c_bar"] = std::isfinite(report.c_bar) ? nlohmann::json(report.c_bar) : nlohmann::json(nullptr);
  nlohmann::json w;
  w["u"] = vec_json(report.witness.u);
  w["omega"] = vec_json(report.witness.omega);
  w["xi"] = std::isfinite(report.witness.xi) ? nlohmann::json(report.witness.xi) : nlohmann::json(nullptr);
  j["witness"] = w;
  j["grid_spec"] = report.grid_spec;
  if (!report.trace.empty()) j["trace"] = report.trace;
  return j;
}

std::string margins_csv(const ConditionReport& report) {
  std::string out = "xi,omega_index,margin\n";
  for (const auto& p : report.points) {
    out += format_double(p.xi) + "," + std::to_string(p.omega_index) + "," + format_double(p.margin) + "\n";
  }
  return out;
}

}  // namespace hypdiss
