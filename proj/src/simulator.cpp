#include "hypdiss/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <set>

#include "hypdiss/conditions.hpp"
#include "hypdiss/error.hpp"
#include "hypdiss/grids.hpp"
#include "hypdiss/io.hpp"
#include "hypdiss/symbols.hpp"

namespace hypdiss {

namespace {

double cubic_bspline(double t) {
  const double a = std::abs(t);
  if (a < 1.0) return 2.0 / 3.0 - a * a + 0.5 * a * a * a;
  if (a < 2.0) return (2.0 - a) * (2.0 - a) * (2.0 - a) / 6.0;
  return 0.0;
}

double bump_profile(const BumpSpec& b, const RVec& offset) {
  if (b.shape == BumpShape::Gaussian) return std::exp(-offset.squaredNorm() / (2.0 * b.width * b.width));
  double v = 1.0;
  for (Eigen::Index j = 0; j < offset.size(); ++j) v *= cubic_bspline(offset(j) / b.width);
  return v;
}

FieldState combine(const FieldState& s, double h, const FieldState& k) {
  FieldState out = s;
  out.u.values += h * k.u.values;
  out.u_t.values += h * k.u_t.values;
  return out;
}

GridFunction subtract_reference(const GridFunction& u, const RVec& ubar) {
  GridFunction out = u;
  for (int c = 0; c < out.components(); ++c) out.values.col(c).array() -= ubar(c);
  return out;
}

// Spectral derivative i xi_axis f (axis = -1 leaves f unchanged).
CMat spectral_derivative(const Lattice& l, const CMat& hat, int axis_a, int axis_b = -1) {
  CMat tmp = hat;
  for (int k = 0; k < l.size(); ++k) {
    const RVec xi = l.frequency(k);
    cplx factor = 1.0;
    if (axis_a >= 0) factor *= kI * xi(axis_a);
    if (axis_b >= 0) factor *= kI * xi(axis_b);
    tmp.row(k) *= factor;
  }
  return GridFunction::from_spectrum(l, tmp).values;
}

double ramp_up(double x, double start, double width, int order) { return smoothstep((x - start) / width, order); }

double inner_real(const Lattice& l, const CMat& a, const CMat& b) {
  return l.cell_volume() * (b.conjugate().cwiseProduct(a)).sum().real();
}

}  // namespace

void dealias(GridFunction& f) {
  CMat hat = f.spectrum();
  for (int k = 0; k < f.lattice.size(); ++k) {
    if (!f.lattice.resolved(k)) hat.row(k).setZero();
  }
  f.values = GridFunction::from_spectrum(f.lattice, hat).values;
}

double masked_band_energy(const GridFunction& f) {
  const CMat hat = f.spectrum();
  double worst = 0.0;
  for (int k = 0; k < f.lattice.size(); ++k) {
    if (!f.lattice.resolved(k)) worst = std::max(worst, hat.row(k).cwiseAbs().maxCoeff());
  }
  return worst;
}

FieldState equilibrium_state(const CoefficientModel& model, const Lattice& lattice) {
  FieldState s{GridFunction(lattice, model.n()), GridFunction(lattice, model.n()), 0.0};
  for (int c = 0; c < model.n(); ++c) s.u.values.col(c).setConstant(model.reference_state()(c));
  return s;
}

FieldState initial_state(const CoefficientModel& model, const Lattice& lattice, const DataSpec& data, double epsilon) {
  if (lattice.d() != model.d()) fail(ErrorKind::GridMismatch, "lattice dimension differs from the model dimension");
  FieldState s = equilibrium_state(model, lattice);
  const int n = model.n();
  const double length = lattice.box_length();
  for (const BumpSpec& b : data.bumps) {
    if (b.u0_amplitude.size() != n || (b.u1_amplitude.size() != 0 && b.u1_amplitude.size() != n)) {
      fail(ErrorKind::UnsupportedDataSpec, "bump amplitudes must have n entries");
    }
    if (!(b.width > 0.0)) fail(ErrorKind::UnsupportedDataSpec, "bump width must be positive");
    const RVec center = b.center.size() == 0 ? RVec::Constant(lattice.d(), 0.5 * length) : b.center;
    if (center.size() != lattice.d()) fail(ErrorKind::UnsupportedDataSpec, "bump centre has the wrong dimension");
    for (int p = 0; p < lattice.size(); ++p) {
      RVec offset = lattice.position(p) - center;
      for (Eigen::Index j = 0; j < offset.size(); ++j) offset(j) -= length * std::round(offset(j) / length);
      const double shape = epsilon * bump_profile(b, offset);
      for (int c = 0; c < n; ++c) {
        s.u.values(p, c) += shape * b.u0_amplitude(c);
        if (b.u1_amplitude.size() == n) s.u_t.values(p, c) += shape * b.u1_amplitude(c);
      }
    }
  }
  dealias(s.u);
  dealias(s.u_t);
  return s;
}

double perturbation_norm(const FieldState& state, const RVec& ubar, double s) {
  return sobolev_norm(subtract_reference(state.u, ubar), s) + sobolev_norm(state.u_t, s - 1.0);
}

Simulator::Simulator(CoefficientModel model, Lattice lattice, SimSettings settings)
    : model_(std::move(model)), lattice_(std::move(lattice)), settings_(settings) {
  if (!model_.normalized()) fail(ErrorKind::PrerequisiteMissing, "simulator needs a normalized model");
  if (lattice_.d() != model_.d()) fail(ErrorKind::GridMismatch, "lattice dimension differs from the model dimension");
  if (!(settings_.cfl > 0.0)) fail(ErrorKind::InvalidParameter, "CFL factor must be positive");
  use_frozen_ = settings_.frozen || model_.constant_coefficients();
  frozen_ = coefficients_at(model_.reference_state());
  for (int k = 0; k < lattice_.size(); ++k) {
    if (!lattice_.resolved(k)) continue;
    rho_max_ = std::max(rho_max_, spectral_radius(assemble_Mbar(model_, model_.reference_state(), lattice_.frequency(k))));
  }
  rho_max_ = std::max(rho_max_, std::numeric_limits<double>::min());
}

Simulator::Coefficients Simulator::coefficients_at(const RVec& u) const {
  const int d = model_.d();
  Coefficients c;
  for (int j = 0; j <= d; ++j) c.a.push_back(to_complex(model_.A(j, u)));
  for (int j = 0; j <= d; ++j) {
    for (int k = 0; k <= d; ++k) c.b.push_back(to_complex(model_.B(j, k, u)));
  }
  return c;
}

FieldState Simulator::rhs(const FieldState& state) const {
  const int n = model_.n();
  const int d = model_.d();
  const int size = lattice_.size();
  if (state.u.components() != n || state.u_t.components() != n || !(state.u.lattice == lattice_)) {
    fail(ErrorKind::GridMismatch, "state does not match the simulator lattice");
  }
  const CMat uh = state.u.spectrum();
  const CMat vh = state.u_t.spectrum();
  std::vector<CMat> ux(d);
  std::vector<CMat> vx(d);
  std::vector<CMat> uxx(d * d);
  for (int j = 0; j < d; ++j) {
    ux[j] = spectral_derivative(lattice_, uh, j);
    vx[j] = spectral_derivative(lattice_, vh, j);
    for (int k = j; k < d; ++k) {
      uxx[j * d + k] = spectral_derivative(lattice_, uh, j, k);
      uxx[k * d + j] = uxx[j * d + k];
    }
  }
  const bool with_remainder = !use_frozen_ && model_.has_remainder();
  const auto b_index = [d](int j, int k) { return j * (d + 1) + k; };

  CMat vt(size, n);
  Coefficients local;
  for (int p = 0; p < size; ++p) {
    const Coefficients* c = &frozen_;
    const RVec u_real = state.u.values.row(p).real().transpose();
    if (!use_frozen_) {
      if (!model_.state_domain().contains(u_real)) {
        fail(ErrorKind::DomainExit, "state left the model domain at t = " + format_double(state.time));
      }
      local = coefficients_at(u_real);
      c = &local;
    }
    const CVec v = state.u_t.values.row(p).transpose();
    CVec acc = -c->a[0] * v;
    for (int j = 1; j <= d; ++j) {
      acc -= c->a[j] * ux[j - 1].row(p).transpose();
      acc += (c->b[b_index(0, j)] + c->b[b_index(j, 0)]) * vx[j - 1].row(p).transpose();
      for (int k = 1; k <= d; ++k) acc += c->b[b_index(j, k)] * uxx[(j - 1) * d + (k - 1)].row(p).transpose();
    }
    if (with_remainder) {
      RMat grad(n, d);
      for (int j = 0; j < d; ++j) grad.col(j) = ux[j].row(p).real().transpose();
      acc += to_complex(RMat(model_.Q(u_real, v.real(), grad))).col(0);
    }
    vt.row(p) = acc.transpose();
  }
  FieldState out{state.u_t, GridFunction(lattice_, std::move(vt)), state.time};
  dealias(out.u_t);
  return out;
}

FieldState Simulator::step(const FieldState& s, double dt) const {
  if (std::abs(dt) > max_stable_dt() * (1.0 + 1e-12)) {
    fail(ErrorKind::CFLViolation, "dt = " + format_double(dt) + " exceeds the stable bound " +
                                      format_double(max_stable_dt()));
  }
  const FieldState k1 = rhs(s);
  FieldState s2 = combine(s, 0.5 * dt, k1);
  s2.time = s.time + 0.5 * dt;
  const FieldState k2 = rhs(s2);
  FieldState s3 = combine(s, 0.5 * dt, k2);
  s3.time = s2.time;
  const FieldState k3 = rhs(s3);
  FieldState s4 = combine(s, dt, k3);
  s4.time = s.time + dt;
  const FieldState k4 = rhs(s4);
  FieldState out = s;
  out.u.values += dt / 6.0 * (k1.u.values + 2.0 * k2.u.values + 2.0 * k3.u.values + k4.u.values);
  out.u_t.values += dt / 6.0 * (k1.u_t.values + 2.0 * k2.u_t.values + 2.0 * k3.u_t.values + k4.u_t.values);
  out.time = s.time + dt;
  return out;
}

GridFunction Simulator::energy_variable(const FieldState& state, double s) const {
  const int n = model_.n();
  const GridFunction du = bessel_potential(subtract_reference(state.u, model_.reference_state()), s + 1.0);
  const GridFunction dv = bessel_potential(state.u_t, s);
  CMat w(lattice_.size(), 2 * n);
  w << du.values, dv.values;
  return GridFunction(lattice_, std::move(w));
}

DiscreteSymbol Simulator::modified_dissipation(const GridFunction& u, const EnergySettings& es) const {
  const int n2 = 2 * model_.n();
  const double r = es.r_threshold;
  const int order = es.chi.order;
  DiscreteSymbol out(lattice_, n2, 0.0, SymbolClass::GammaK);
  const CMat identity = CMat::Identity(n2, n2);
  for (int k = 0; k < lattice_.size(); ++k) {
    const RVec xi = lattice_.frequency(k);
    const double x = xi.norm();
    const double phi = ramp_up(x, 2.0 * r, r, order);
    const double psi = 1.0 - ramp_up(x, 4.0 * r, r, order);
    CMat frozen_d = CMat::Zero(n2, n2);
    if (phi > 0.0 && use_frozen_) {
      frozen_d = build_dissipation_symbol(model_, model_.reference_state(), xi, r).D;
    }
    for (int p = 0; p < lattice_.size(); ++p) {
      CMat dm = psi * identity;
      if (phi > 0.0) {
        dm += phi * (use_frozen_ ? frozen_d
                                 : build_dissipation_symbol(model_, RVec(u.values.row(p).real().transpose()), xi, r).D);
      }
      out.set_matrix(k, p, dm);
    }
  }
  return out;
}

namespace {

// Re <G W, W> for G = Op[D~_u] (symmetrized implicitly) + (op - Op)[D~_0].
double quadratic_form(const Lattice& l, const GridFunction& w, const DiscreteSymbol* smoothed, const DiscreteSymbol& d0,
                      const CutoffSpec& chi) {
  const CMat what = w.spectrum();
  double value = 0.0;
  const double volume = std::pow(l.box_length(), l.d());
  for (int k = 0; k < l.size(); ++k) {
    const CVec wk = what.row(k).transpose();
    const double weight = smoothed ? 1.0 - chi(0.0, l.frequency_norm(k)) : 1.0;
    if (weight == 0.0) continue;
    value += weight * volume * wk.dot(d0.matrix(k, 0) * wk).real();
  }
  if (smoothed) value += inner_real(l, apply_op(*smoothed, w).values, w.values);
  return value;
}

}  // namespace

double Simulator::energy_value(const FieldState& state, const EnergySettings& es) const {
  const GridFunction w = energy_variable(state, es.s);
  const DiscreteSymbol d0 = modified_dissipation(equilibrium_state(model_, lattice_).u, es);
  if (use_frozen_) return quadratic_form(lattice_, w, nullptr, d0, es.chi);
  const DiscreteSymbol smoothed = smooth_symbol(modified_dissipation(state.u, es), es.chi);
  return quadratic_form(lattice_, w, &smoothed, d0, es.chi);
}

double Simulator::low_frequency_constant(const EnergySettings& es) const {
  const DiscreteSymbol d0 = modified_dissipation(equilibrium_state(model_, lattice_).u, es);
  double worst = 0.0;
  for (int k = 0; k < lattice_.size(); ++k) {
    if (!lattice_.resolved(k)) continue;
    const CMat m = assemble_M(model_, model_.reference_state(), lattice_.frequency(k));
    const CMat dm = d0.matrix(k, 0) * m;
    const double top = hermitian_eigenvalues(hermitian_part(dm)).maxCoeff() + es.c;
    const double bracket = japanese_bracket(lattice_.frequency_norm(k));
    worst = std::max(worst, bracket * bracket * top);
  }
  return worst;
}

EnergySample Simulator::energy_monitor(const FieldState& state, const EnergySettings& es, double h) const {
  if (!(h > 0.0)) fail(ErrorKind::InvalidParameter, "finite-difference step must be positive");
  EnergySample out;
  out.time = state.time;
  const GridFunction w = energy_variable(state, es.s);
  const DiscreteSymbol d0 = modified_dissipation(equilibrium_state(model_, lattice_).u, es);
  DiscreteSymbol smoothed = d0;
  if (!use_frozen_) smoothed = smooth_symbol(modified_dissipation(state.u, es), es.chi);
  const DiscreteSymbol* op = use_frozen_ ? nullptr : &smoothed;
  out.value = quadratic_form(lattice_, w, op, d0, es.chi);
  const double plus = energy_value(step(state, h), es);
  const double minus = energy_value(step(state, -h), es);
  out.derivative = (plus - minus) / (2.0 * h);
  out.w_norm2 = std::pow(sobolev_norm(w, 0.0), 2);
  out.w_norm2_low = std::pow(sobolev_norm(w, -1.0), 2);

  const GridFunction du = subtract_reference(state.u, model_.reference_state());
  const CMat uh = state.u.spectrum();
  out.delta_u = du.values.cwiseAbs().maxCoeff() + state.u_t.values.cwiseAbs().maxCoeff();
  for (int j = 0; j < lattice_.d(); ++j) out.delta_u += spectral_derivative(lattice_, uh, j).cwiseAbs().maxCoeff();

  out.lhs = 0.5 * out.derivative + es.c * out.w_norm2;
  out.budget = low_frequency_constant(es) * out.w_norm2_low + (es.kappa * out.delta_u + es.fd_tolerance) * out.w_norm2;
  out.satisfied = out.lhs <= out.budget;

  std::mt19937 rng(es.seed);
  std::normal_distribution<double> normal;
  out.rayleigh_min = std::numeric_limits<double>::infinity();
  for (int i = 0; i < es.rayleigh_samples; ++i) {
    CMat spec = CMat::Zero(lattice_.size(), w.components());
    for (int k = 0; k < lattice_.size(); ++k) {
      if (!lattice_.resolved(k)) continue;
      for (int c = 0; c < w.components(); ++c) spec(k, c) = cplx(normal(rng), normal(rng));
    }
    const GridFunction v = GridFunction::from_spectrum(lattice_, spec);
    const double q = quadratic_form(lattice_, v, op, d0, es.chi) / std::pow(sobolev_norm(v, 0.0), 2);
    out.rayleigh_min = std::min(out.rayleigh_min, q);
  }
  return out;
}

EnergyTrace Simulator::run(const FieldState& initial, const RunSettings& rs, FieldState* final_state) const {
  if (!(rs.t_final >= 0.0)) fail(ErrorKind::InvalidParameter, "final time must be nonnegative");
  if (rs.records < 1) fail(ErrorKind::InvalidParameter, "need at least one record");
  const double target = rs.dt > 0.0 ? rs.dt : max_stable_dt() * (1.0 - 1e-9);
  const int steps = rs.t_final == 0.0 ? 0 : static_cast<int>(std::ceil(rs.t_final / target - 1e-9));
  const double dt = steps == 0 ? 0.0 : rs.t_final / steps;

  std::set<int> record_at;
  std::set<int> energy_at;
  for (int i = 0; i <= rs.records; ++i) record_at.insert(static_cast<int>(std::lround(1.0 * i * steps / rs.records)));
  if (rs.energy && steps > 0) {
    for (int i = 1; i <= rs.energy_snapshots; ++i) {
      const int idx = static_cast<int>(std::lround(1.0 * i * steps / rs.energy_snapshots));
      energy_at.insert(idx);
      record_at.insert(idx);
    }
  }

  const RVec& ubar = model_.reference_state();
  EnergyTrace trace;
  trace.sobolev_indices = rs.sobolev_indices;
  trace.dt = dt;
  trace.steps = steps;
  auto norms_of = [&](const FieldState& s) {
    std::vector<double> out;
    for (double idx : rs.sobolev_indices) out.push_back(perturbation_norm(s, ubar, idx));
    return out;
  };
  auto w_norm2 = [&](const FieldState& s) { return std::pow(sobolev_norm(energy_variable(s, rs.energy_settings.s), 0.0), 2); };

  FieldState state = initial;
  const std::vector<double> initial_norms = norms_of(state);
  std::vector<double> ceilings;
  for (double v : initial_norms) ceilings.push_back(v > 0.0 ? rs.ceiling_factor * v : std::numeric_limits<double>::infinity());

  double integral = 0.0;
  double last_w = w_norm2(state);
  for (int i = 0;; ++i) {
    const std::vector<double> norms = i == 0 ? initial_norms : norms_of(state);
    for (std::size_t j = 0; j < norms.size(); ++j) {
      if (!std::isfinite(norms[j]) || norms[j] > ceilings[j]) {
        fail(ErrorKind::BlowUp, "norm " + format_double(norms[j]) + " exceeded the ceiling at t = " + format_double(state.time));
      }
    }
    if (record_at.count(i)) {
      trace.times.push_back(state.time);
      trace.norms.push_back(norms);
      trace.dissipation_integral.push_back(integral);
      trace.max_imaginary = std::max({trace.max_imaginary, state.u.values.imag().cwiseAbs().maxCoeff(),
                                      state.u_t.values.imag().cwiseAbs().maxCoeff()});
      trace.max_masked = std::max({trace.max_masked, masked_band_energy(state.u), masked_band_energy(state.u_t)});
      double energy = std::numeric_limits<double>::quiet_NaN();
      if (energy_at.count(i)) {
        trace.snapshots.push_back(energy_monitor(state, rs.energy_settings, dt));
        energy = trace.snapshots.back().value;
      }
      trace.energy_functional.push_back(energy);
    }
    if (i == steps) break;
    state = step(state, dt);
    state.time = (i + 1) * dt;
    const double w = w_norm2(state);
    integral += 0.5 * dt * (w + last_w);
    last_w = w;
  }
  if (final_state) *final_state = state;
  return trace;
}

std::string trace_csv(const EnergyTrace& trace) {
  std::string out = "t";
  for (double s : trace.sobolev_indices) out += ",norm_s" + format_double(s);
  out += ",energy_functional,dissipation_integral\n";
  for (std::size_t i = 0; i < trace.times.size(); ++i) {
    std::vector<double> row{trace.times[i]};
    row.insert(row.end(), trace.norms[i].begin(), trace.norms[i].end());
    row.push_back(trace.energy_functional[i]);
    row.push_back(trace.dissipation_integral[i]);
    out += csv_row(row);
  }
  return out;
}

}  // namespace hypdiss
