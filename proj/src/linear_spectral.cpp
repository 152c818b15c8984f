#include "hypdiss/linear_spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "hypdiss/error.hpp"
#include "hypdiss/parallel.hpp"
#include "hypdiss/symbols.hpp"

namespace hypdiss {

namespace {

double sinc(double x) { return std::abs(x) < 1e-8 ? 1.0 - x * x / 6.0 : std::sin(x) / x; }

cplx bump_transform(const BumpSpec& b, const RVec& xi) {
  const auto d = xi.size();
  double mag;
  if (b.shape == BumpShape::Gaussian) {
    mag = std::pow(b.width, static_cast<double>(d)) * std::exp(-0.5 * b.width * b.width * xi.squaredNorm());
  } else {
    mag = std::pow(2.0 * std::numbers::pi, -0.5 * static_cast<double>(d));
    for (Eigen::Index j = 0; j < d; ++j) mag *= b.width * std::pow(sinc(0.5 * b.width * xi(j)), 4);
  }
  const double phase = b.center.size() == d ? -xi.dot(b.center) : 0.0;
  return mag * std::polar(1.0, phase);
}

void validate(const BumpSpec& b, int n, int d) {
  if (!(b.width > 0.0)) fail(ErrorKind::UnsupportedDataSpec, "bump width must be positive");
  if (b.u0_amplitude.size() != n) fail(ErrorKind::UnsupportedDataSpec, "u0 amplitude must have n entries");
  if (b.u1_amplitude.size() != 0 && b.u1_amplitude.size() != n) {
    fail(ErrorKind::UnsupportedDataSpec, "u1 amplitude must have n entries");
  }
  if (b.center.size() != 0 && b.center.size() != d) fail(ErrorKind::UnsupportedDataSpec, "bump center must have d entries");
}

}  // namespace

double data_regularity(const DataSpec& data) {
  double s = std::numeric_limits<double>::infinity();
  for (const auto& b : data.bumps) {
    if (b.shape == BumpShape::CubicSpline) s = std::min(s, 3.5);
  }
  return s;
}

ModeGrid product_mode_grid(int d, const RadialGrid& radial, const DirectionSet& directions) {
  ModeGrid g;
  g.d = d;
  for (std::size_t i = 0; i < radial.nodes.size(); ++i) {
    for (std::size_t w = 0; w < directions.directions.size(); ++w) {
      g.modes.push_back({radial.nodes[i] * directions.directions[w], radial.weights[i] * directions.weights[w]});
    }
  }
  std::vector<double> weights;
  for (const auto& m : g.modes) weights.push_back(m.weight);
  g.measure = pairwise_sum(weights);
  return g;
}

ModeGrid default_mode_grid(int d) {
  return product_mode_grid(d, radial_log_grid(1e-3, 1e2, 64, d), default_directions(d));
}

ModeEnsemble init_ensemble(const CoefficientModel& model, const DataSpec& data, const ModeGrid& grid) {
  const int n = model.n();
  if (grid.d != model.d()) fail(ErrorKind::GridMismatch, "mode grid dimension differs from the model");
  for (const auto& b : data.bumps) validate(b, n, model.d());
  ModeEnsemble e;
  e.n = n;
  e.grid = grid;
  e.coefficients.reserve(grid.modes.size());
  for (const Mode& m : grid.modes) {
    CVec v = CVec::Zero(2 * n);
    const double br = japanese_bracket(m.xi.norm());
    for (const auto& b : data.bumps) {
      const cplx f = bump_transform(b, m.xi);
      v.head(n) += br * f * b.u0_amplitude.cast<cplx>();
      if (b.u1_amplitude.size() == n) v.tail(n) += f * b.u1_amplitude.cast<cplx>();
    }
    e.coefficients.push_back(std::move(v));
  }
  return e;
}

CVec evolve_mode(const CMat& m, const CVec& u0, double t) {
  if (!(t >= 0.0)) fail(ErrorKind::InvalidParameter, "evolution time must be nonnegative");
  if (t == 0.0) return u0;
  return expm(t * m) * u0;
}

ModePropagator::ModePropagator(CMat m, double eig_cond_limit) : m_(std::move(m)) {
  Eigen::ComplexEigenSolver<CMat> solver(m_);
  if (solver.info() == Eigen::Success) {
    const CMat v = solver.eigenvectors();
    const Eigen::JacobiSVD<CMat> svd(v);
    const RVec sv = svd.singularValues();
    const double cond = sv(0) / sv(sv.size() - 1);
    if (std::isfinite(cond) && cond < eig_cond_limit) {
      use_eig_ = true;
      v_ = v;
      v_inv_ = v.partialPivLu().inverse();
      lambda_ = solver.eigenvalues();
    }
  }
}

CVec ModePropagator::apply(const CVec& u0, double t) const {
  if (!use_eig_) return evolve_mode(m_, u0, t);
  const CVec exps = (t * lambda_).array().exp();
  return v_ * (exps.asDiagonal() * (v_inv_ * u0));
}

std::vector<CVec> evolve_mode_with_forcing(const CMat& m, const CVec& u0, const std::vector<CVec>& forcing,
                                           const std::vector<double>& t_grid) {
  if (t_grid.empty() || forcing.size() != t_grid.size()) fail(ErrorKind::GridMismatch, "forcing samples do not match the time grid");
  for (std::size_t k = 0; k < forcing.size(); ++k) {
    if (forcing[k].size() != u0.size()) fail(ErrorKind::GridMismatch, "forcing sample has the wrong length");
    if (k > 0 && !(t_grid[k] > t_grid[k - 1])) fail(ErrorKind::GridMismatch, "time grid must be increasing");
  }
  std::vector<CVec> out{u0};
  out.reserve(t_grid.size());
  CMat step;
  double last_h = -1.0;
  for (std::size_t k = 0; k + 1 < t_grid.size(); ++k) {
    const double h = t_grid[k + 1] - t_grid[k];
    if (h != last_h) {
      step = expm(h * m);
      last_h = h;
    }
    out.push_back(step * (out.back() + 0.5 * h * forcing[k]) + 0.5 * h * forcing[k + 1]);
  }
  return out;
}

double pairwise_sum(const std::vector<double>& values) {
  auto rec = [&](auto&& self, std::size_t lo, std::size_t hi) -> double {
    if (hi - lo <= 8) {
      double s = 0.0;
      for (std::size_t i = lo; i < hi; ++i) s += values[i];
      return s;
    }
    const std::size_t mid = lo + (hi - lo) / 2;
    return self(self, lo, mid) + self(self, mid, hi);
  };
  return rec(rec, 0, values.size());
}

SobolevNorms sobolev_norm(const ModeEnsemble& ensemble, double s) {
  const int n = ensemble.n;
  std::vector<double> uu;
  std::vector<double> vv;
  uu.reserve(ensemble.coefficients.size());
  vv.reserve(ensemble.coefficients.size());
  for (std::size_t i = 0; i < ensemble.coefficients.size(); ++i) {
    const Mode& m = ensemble.grid.modes[i];
    const double w = m.weight * std::pow(1.0 + m.xi.squaredNorm(), s - 1.0);
    uu.push_back(w * ensemble.coefficients[i].head(n).squaredNorm());
    vv.push_back(w * ensemble.coefficients[i].tail(n).squaredNorm());
  }
  SobolevNorms out;
  out.u = std::sqrt(pairwise_sum(uu));
  out.u_t = std::sqrt(pairwise_sum(vv));
  out.combined = out.u + out.u_t;
  return out;
}

ModeEnsemble evolve_ensemble(const CoefficientModel& model, const ModeEnsemble& ensemble, double t) {
  ModeEnsemble out = ensemble;
  const RVec& u = model.reference_state();
  parallel_for(static_cast<int>(ensemble.coefficients.size()), [&](int i) {
    out.coefficients[i] = evolve_mode(assemble_M(model, u, ensemble.grid.modes[i].xi), ensemble.coefficients[i], t);
  });
  out.time = ensemble.time + t;
  return out;
}

DecayFit decay_fit(const std::vector<double>& times, const std::vector<double>& norms, double t_min, double t_max) {
  if (times.size() != norms.size()) fail(ErrorKind::DegenerateFit, "times and norms differ in length");
  std::vector<double> x;
  std::vector<double> y;
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (times[i] < t_min || times[i] > t_max) continue;
    if (!(norms[i] > 0.0)) fail(ErrorKind::DegenerateFit, "norms must be positive on the fit window");
    x.push_back(std::log1p(times[i]));
    y.push_back(std::log(norms[i]));
    lo = std::min(lo, norms[i]);
    hi = std::max(hi, norms[i]);
  }
  if (x.size() < 8) fail(ErrorKind::DegenerateFit, "fewer than 8 samples in the fit window");
  Eigen::MatrixXd a(static_cast<Eigen::Index>(x.size()), 2);
  Eigen::VectorXd b(static_cast<Eigen::Index>(x.size()));
  for (std::size_t i = 0; i < x.size(); ++i) {
    a(static_cast<Eigen::Index>(i), 0) = x[i];
    a(static_cast<Eigen::Index>(i), 1) = 1.0;
    b(static_cast<Eigen::Index>(i)) = y[i];
  }
  const Eigen::Vector2d coef = a.colPivHouseholderQr().solve(b);
  DecayFit fit;
  fit.exponent = coef(0);
  fit.amplitude = std::exp(coef(1));
  fit.t_min = t_min;
  fit.t_max = t_max;
  fit.samples = static_cast<int>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double model = std::exp(coef(1) + coef(0) * x[i]);
    fit.residual = std::max(fit.residual, std::abs(std::exp(y[i]) / model - 1.0));
  }
  fit.short_span = hi / lo < 10.0;
  fit.poor_fit = fit.residual > 0.05;
  if (!std::isfinite(fit.exponent)) fail(ErrorKind::DegenerateFit, "non-finite exponent");
  return fit;
}

std::vector<double> decay_times(const DecaySettings& settings) {
  std::vector<double> t{0.0};
  for (double x : log_grid(settings.t_fit_min, settings.t_fit_max, settings.time_samples)) t.push_back(x);
  return t;
}

DecayStudy run_decay(const CoefficientModel& model, const DataSpec& data, const ModeGrid& grid,
                     const DecaySettings& settings) {
  if (settings.s >= data_regularity(data)) fail(ErrorKind::UnsupportedDataSpec, "data is not in H^s for the requested s");
  const ModeEnsemble e0 = init_ensemble(model, data, grid);
  DecayStudy study;
  study.times = decay_times(settings);
  const std::size_t nt = study.times.size();
  const std::size_t nm = grid.modes.size();
  const int n = model.n();
  // Per (mode, time) contributions, reduced afterwards in canonical mode order.
  std::vector<double> uu(nm * nt);
  std::vector<double> vv(nm * nt);
  const RVec& ubar = model.reference_state();
  parallel_for(static_cast<int>(nm), [&](int i) {
    const Mode& m = grid.modes[i];
    const CMat symbol = assemble_M(model, ubar, m.xi);
    const double w = m.weight * std::pow(1.0 + m.xi.squaredNorm(), settings.s - 1.0);
    for (std::size_t k = 0; k < nt; ++k) {
      const CVec v = evolve_mode(symbol, e0.coefficients[i], study.times[k]);
      uu[k * nm + i] = w * v.head(n).squaredNorm();
      vv[k * nm + i] = w * v.tail(n).squaredNorm();
    }
  });
  std::vector<double> combined;
  for (std::size_t k = 0; k < nt; ++k) {
    const std::vector<double> a(uu.begin() + static_cast<std::ptrdiff_t>(k * nm), uu.begin() + static_cast<std::ptrdiff_t>((k + 1) * nm));
    const std::vector<double> b(vv.begin() + static_cast<std::ptrdiff_t>(k * nm), vv.begin() + static_cast<std::ptrdiff_t>((k + 1) * nm));
    SobolevNorms s;
    s.u = std::sqrt(pairwise_sum(a));
    s.u_t = std::sqrt(pairwise_sum(b));
    s.combined = s.u + s.u_t;
    study.norms.push_back(s);
    combined.push_back(s.combined);
  }
  study.fit = decay_fit(study.times, combined, settings.t_fit_min, settings.t_fit_max);
  if (!data.bumps.empty()) study.data_width = data.bumps.front().width;
  return study;
}

double diffusive_data_width(const CoefficientModel& model, const DirectionSet& directions, double tolerance) {
  const std::vector<double> xs = log_grid(1e-3, 1e3, 97);
  const RVec& u = model.reference_state();
  std::vector<double> g;
  for (double x : xs) {
    double alpha = -std::numeric_limits<double>::infinity();
    for (const RVec& w : directions.directions) alpha = std::max(alpha, spectral_abscissa(assemble_Mbar(model, u, x * w)));
    g.push_back(-alpha / decay_profile(x));
  }
  std::size_t k = 0;
  while (k < g.size() && std::abs(g[k] / g[0] - 1.0) <= tolerance) ++k;
  if (k == 0) k = 1;
  return 1.0 / xs[k - 1];
}

}  // namespace hypdiss
