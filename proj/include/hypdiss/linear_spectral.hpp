#pragma once

#include <string>
#include <vector>

#include "hypdiss/grids.hpp"
#include "hypdiss/model.hpp"

namespace hypdiss {

enum class BumpShape { Gaussian, CubicSpline };

// One localized bump with a closed-form Fourier transform.
//   Gaussian:     exp(-|x - c|^2 / (2 w^2)), transform w^d exp(-w^2 |xi|^2 / 2) e^{-i xi.c}
//   CubicSpline:  tensor product of cubic B-splines with knot spacing w (support 4w per axis),
//                 transform prod_j w sinc^4(w xi_j / 2) (2 pi)^{-d/2} e^{-i xi.c}
struct BumpSpec {
  BumpShape shape = BumpShape::Gaussian;
  double width = 1.0;
  RVec center;          // d entries (empty means origin)
  RVec u0_amplitude;    // n entries, profile of u(0) - ubar
  RVec u1_amplitude;    // n entries, profile of u_t(0) (empty means zero)
};

struct DataSpec {
  std::vector<BumpSpec> bumps;
};

// Highest Sobolev index for which the data spec is in H^s.
[[nodiscard]] double data_regularity(const DataSpec& data);

struct Mode {
  RVec xi;
  double weight = 0.0;
};

struct ModeGrid {
  int d = 0;
  std::vector<Mode> modes;
  double measure = 0.0;  // sum of weights
};

// Radial log grid x direction set (weights multiply).
[[nodiscard]] ModeGrid product_mode_grid(int d, const RadialGrid& radial, const DirectionSet& directions);
// Defaults: 64 radial points on [1e-3, 1e2] times the default directions.
[[nodiscard]] ModeGrid default_mode_grid(int d);

// Coefficients V(xi) = (<xi> u_hat, u_t_hat) per mode.
struct ModeEnsemble {
  int n = 0;
  ModeGrid grid;
  std::vector<CVec> coefficients;
  double time = 0.0;
};

[[nodiscard]] ModeEnsemble init_ensemble(const CoefficientModel& model, const DataSpec& data, const ModeGrid& grid);

// exp(t M) U0 (Pade scaling and squaring).
[[nodiscard]] CVec evolve_mode(const CMat& m, const CVec& u0, double t);

// Reusable propagator: uses an eigendecomposition when its basis is well conditioned,
// the matrix exponential otherwise.
class ModePropagator {
 public:
  explicit ModePropagator(CMat m, double eig_cond_limit = 1e4);
  [[nodiscard]] CVec apply(const CVec& u0, double t) const;
  [[nodiscard]] bool uses_eigenbasis() const noexcept { return use_eig_; }

 private:
  CMat m_;
  bool use_eig_ = false;
  CMat v_;
  CMat v_inv_;
  CVec lambda_;
};

// Trapezoidal Duhamel integration on t_grid; U0 is the state at t_grid[0] and
// `forcing[k]` is sampled at t_grid[k]. Throws GridMismatch on size or ordering errors.
[[nodiscard]] std::vector<CVec> evolve_mode_with_forcing(const CMat& m, const CVec& u0,
                                                         const std::vector<CVec>& forcing,
                                                         const std::vector<double>& t_grid);

struct SobolevNorms {
  double u = 0.0;      // ||u||_{H^s}
  double u_t = 0.0;    // ||u_t||_{H^{s-1}}
  double combined = 0.0;
};

[[nodiscard]] SobolevNorms sobolev_norm(const ModeEnsemble& ensemble, double s);

// The ensemble propagated to time t by exp(t M(0, xi)) per mode.
[[nodiscard]] ModeEnsemble evolve_ensemble(const CoefficientModel& model, const ModeEnsemble& ensemble, double t);

struct DecayFit {
  double exponent = 0.0;
  double amplitude = 0.0;
  double t_min = 0.0;
  double t_max = 0.0;
  double residual = 0.0;     // max relative deviation on the window
  bool short_span = false;   // norms span less than one decade
  bool poor_fit = false;     // residual above 5%
  int samples = 0;
};

// Least squares of log(norm) against log(1 + t) for t in [t_min, t_max].
[[nodiscard]] DecayFit decay_fit(const std::vector<double>& times, const std::vector<double>& norms, double t_min,
                                 double t_max);

struct DecayStudy {
  std::vector<double> times;
  std::vector<SobolevNorms> norms;
  DecayFit fit;
  double data_width = 0.0;
};

struct DecaySettings {
  double s = 3.0;
  double t_fit_min = 5.0;
  double t_fit_max = 200.0;
  int time_samples = 24;  // log-spaced on the fit window, plus t = 0
};

[[nodiscard]] std::vector<double> decay_times(const DecaySettings& settings);

// Norm trajectories of the linear evolution plus the fitted exponent.
[[nodiscard]] DecayStudy run_decay(const CoefficientModel& model, const DataSpec& data, const ModeGrid& grid,
                                   const DecaySettings& settings);

// Width that places the data in the diffusive regime: 1 / xi_d where xi_d is the largest
// grid frequency below which -alpha(xi)/rho(xi) stays within `tolerance` of its value at
// 1e-3 (alpha = spectral abscissa over the direction set).
[[nodiscard]] double diffusive_data_width(const CoefficientModel& model, const DirectionSet& directions,
                                          double tolerance = 0.25);

// Sum in canonical order by recursive halving.
[[nodiscard]] double pairwise_sum(const std::vector<double>& values);

}  // namespace hypdiss
