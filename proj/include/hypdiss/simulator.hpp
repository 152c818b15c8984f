#pragma once

#include <string>
#include <vector>

#include "hypdiss/linear_spectral.hpp"
#include "hypdiss/model.hpp"
#include "hypdiss/paradiff.hpp"

namespace hypdiss {

// (u, u_t) on a periodic lattice; u holds the full state (reference state included).
struct FieldState {
  GridFunction u;
  GridFunction u_t;
  double time = 0.0;
};

// Sum of bumps centred in the box (periodic minimum-image distance), scaled by `epsilon`,
// added to the reference state. The result is projected onto the resolved band.
[[nodiscard]] FieldState initial_state(const CoefficientModel& model, const Lattice& lattice, const DataSpec& data,
                                       double epsilon);
// Reference state with zero velocity.
[[nodiscard]] FieldState equilibrium_state(const CoefficientModel& model, const Lattice& lattice);

// Zeroes every frequency outside the 2/3-rule band.
void dealias(GridFunction& f);
// Largest spectral magnitude outside the resolved band.
[[nodiscard]] double masked_band_energy(const GridFunction& f);

struct SimSettings {
  bool frozen = false;   // coefficients evaluated at the reference state, remainder dropped
  double cfl = 2.5;      // dt * spectral radius bound must not exceed this
};

struct EnergySettings {
  double s = 1.0;               // W = Lambda^s (Lambda (u - ubar), u_t)
  double r_threshold = 1.0;     // phi ramps on [2r, 3r], psi on [4r, 5r]
  CutoffSpec chi{};
  double c = 0.25;              // dissipation constant claimed in the inequality
  double kappa = 50.0;          // weight of the nonlinear budget term
  double fd_tolerance = 1e-6;   // relative allowance for the finite-difference derivative
  int rayleigh_samples = 50;
  unsigned seed = 5;
};

struct EnergySample {
  double time = 0.0;
  double value = 0.0;           // <G_u W, W>
  double derivative = 0.0;      // central difference of value
  double w_norm2 = 0.0;         // ||W||^2
  double w_norm2_low = 0.0;     // ||W||^2_{-1}
  double delta_u = 0.0;         // sup |u - ubar| + sup |grad u| + sup |u_t|
  double lhs = 0.0;             // derivative / 2 + c ||W||^2
  double budget = 0.0;          // C_low ||W||^2_{-1} + (kappa delta_u + fd_tol) ||W||^2
  double rayleigh_min = 0.0;    // min <G W, W> / ||W||^2 over random band-limited W
  bool satisfied = false;
};

struct EnergyTrace {
  std::vector<double> sobolev_indices;
  std::vector<double> times;
  std::vector<std::vector<double>> norms;  // per time: combined perturbation norm per index
  std::vector<double> energy_functional;   // NaN where the monitor was not sampled
  std::vector<double> dissipation_integral;
  std::vector<EnergySample> snapshots;
  double max_imaginary = 0.0;              // largest |Im u|, |Im u_t| over the run
  double max_masked = 0.0;                 // largest spectral magnitude in the masked band
  double dt = 0.0;
  int steps = 0;
};

struct RunSettings {
  double t_final = 1.0;
  double dt = 0.0;                         // 0 picks the largest stable step
  int records = 100;
  std::vector<double> sobolev_indices{2.0};
  double ceiling_factor = 10.0;            // BlowUp when a norm exceeds this multiple of its initial value
  bool energy = false;
  int energy_snapshots = 20;
  EnergySettings energy_settings{};
};

class Simulator {
 public:
  // The model must be normalized (B^{00} = -I).
  Simulator(CoefficientModel model, Lattice lattice, SimSettings settings = {});

  [[nodiscard]] const CoefficientModel& model() const noexcept { return model_; }
  [[nodiscard]] const Lattice& lattice() const noexcept { return lattice_; }
  // Spectral radius bound of the first-order symbol over resolved frequencies at the reference state.
  [[nodiscard]] double spectral_radius_bound() const noexcept { return rho_max_; }
  [[nodiscard]] double max_stable_dt() const noexcept { return settings_.cfl / rho_max_; }

  // Time derivative (u_t, v_t). Throws DomainExit when u leaves the state domain.
  [[nodiscard]] FieldState rhs(const FieldState& state) const;
  // Classical RK4 step. Throws CFLViolation when dt exceeds max_stable_dt.
  [[nodiscard]] FieldState step(const FieldState& state, double dt) const;

  // Throws BlowUp, DomainExit or CFLViolation. The last state is copied to `final_state` if given.
  [[nodiscard]] EnergyTrace run(const FieldState& initial, const RunSettings& settings,
                                FieldState* final_state = nullptr) const;

  // Energy functional and derivative at `state`; the derivative uses steps of size h.
  [[nodiscard]] EnergySample energy_monitor(const FieldState& state, const EnergySettings& settings, double h) const;
  // <G_u W, W> alone.
  [[nodiscard]] double energy_value(const FieldState& state, const EnergySettings& settings) const;
  // Low-frequency constant: sup over lattice frequencies of <xi>^2 (lambda_max(Re(D~ M)) + c)_+ at ubar.
  [[nodiscard]] double low_frequency_constant(const EnergySettings& settings) const;

 private:
  struct Coefficients {
    std::vector<CMat> a;   // A^0..A^d
    std::vector<CMat> b;   // B^{jk}, (d+1)^2
  };
  [[nodiscard]] Coefficients coefficients_at(const RVec& u) const;
  [[nodiscard]] DiscreteSymbol modified_dissipation(const GridFunction& u, const EnergySettings& settings) const;
  [[nodiscard]] GridFunction energy_variable(const FieldState& state, double s) const;

  CoefficientModel model_;
  Lattice lattice_;
  SimSettings settings_;
  Coefficients frozen_;
  bool use_frozen_;
  double rho_max_ = 0.0;
};

// Combined perturbation norm ||u - ubar||_{H^s} + ||u_t||_{H^{s-1}}.
[[nodiscard]] double perturbation_norm(const FieldState& state, const RVec& ubar, double s);

// CSV columns: t, norm_s..., energy_functional, dissipation_integral.
[[nodiscard]] std::string trace_csv(const EnergyTrace& trace);

}  // namespace hypdiss
