#include "hypdiss/model.hpp"

#include <cmath>
#include <memory>

#include "hypdiss/error.hpp"
#include "hypdiss/grids.hpp"

namespace hypdiss {

bool StateBox::contains(const RVec& u) const {
  if (u.size() != lo.size()) return false;
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    if (!(u(i) >= lo(i) && u(i) <= hi(i))) return false;
  }
  return true;
}

CoefficientModel::CoefficientModel(int n, int d, RVec reference_state, StateBox domain, std::string label,
                                   std::vector<MatrixFn> a, std::vector<MatrixFn> b)
    : n_(n), d_(d), reference_(std::move(reference_state)), domain_(std::move(domain)), label_(std::move(label)),
      a_(std::move(a)), b_(std::move(b)) {
  if (n_ <= 0 || d_ <= 0) fail(ErrorKind::InvalidParameter, "model dimensions must be positive");
  if (reference_.size() != n_ || domain_.lo.size() != n_ || domain_.hi.size() != n_) {
    fail(ErrorKind::DimensionMismatch, "reference state and state domain must have n entries");
  }
  if (static_cast<int>(a_.size()) != d_ + 1 || static_cast<int>(b_.size()) != (d_ + 1) * (d_ + 1)) {
    fail(ErrorKind::DimensionMismatch, "coefficient family sizes do not match d");
  }
  if (!domain_.contains(reference_)) fail(ErrorKind::InvalidParameter, "reference state outside the state domain");
}

RMat CoefficientModel::A(int j, const RVec& u) const {
  if (j < 0 || j > d_) fail(ErrorKind::DimensionMismatch, "A index out of range");
  return a_[j](u);
}

RMat CoefficientModel::B(int j, int k, const RVec& u) const {
  if (j < 0 || j > d_ || k < 0 || k > d_) fail(ErrorKind::DimensionMismatch, "B index out of range");
  return b_[j * (d_ + 1) + k](u);
}

RVec CoefficientModel::Q(const RVec& u, const RVec& v, const RMat& grad) const {
  if (!q_) return RVec::Zero(n_);
  return q_(u, v, grad);
}

std::vector<RVec> sample_states(const CoefficientModel& model, int count) {
  return halton_states(model.reference_state(), model.state_domain().lo, model.state_domain().hi, count);
}

namespace {

MatrixFn constant(RMat m) {
  return [m = std::move(m)](const RVec&) { return m; };
}

RVec scalar_vec(double x) {
  RVec v(1);
  v << x;
  return v;
}

RMat scalar_mat(double x) {
  RMat m(1, 1);
  m << x;
  return m;
}

std::vector<MatrixFn> zero_family(int count, int n) {
  return std::vector<MatrixFn>(count, constant(RMat::Zero(n, n)));
}

}  // namespace

CoefficientModel normalize_b00(const CoefficientModel& model, double cond_ceiling) {
  const int n = model.n();
  const int d = model.d();
  const int samples = model.constant_coefficients() ? 1 : kDefaultStateSamples;
  for (const RVec& u : sample_states(model, samples)) {
    const RMat neg = -model.B(0, 0, u);
    Eigen::JacobiSVD<RMat> svd(neg);
    const RVec sv = svd.singularValues();
    const double smin = sv(sv.size() - 1);
    if (!(smin > 0.0) || sv(0) / smin > cond_ceiling || !std::isfinite(sv(0))) {
      fail(ErrorKind::SingularB00, "B^00 is singular or ill-conditioned at a sampled state");
    }
  }

  CoefficientModel out = model;
  out.label_ = model.label();
  if (model.constant_coefficients()) {
    const RVec& u0 = model.reference_state();
    const Eigen::PartialPivLU<RMat> lu(-model.B(0, 0, u0));
    for (int j = 0; j <= d; ++j) out.a_[j] = constant(lu.solve(model.A(j, u0)));
    for (int j = 0; j <= d; ++j) {
      for (int k = 0; k <= d; ++k) out.b_[j * (d + 1) + k] = constant(lu.solve(model.B(j, k, u0)));
    }
    out.b_[0] = constant(-RMat::Identity(n, n));
  } else {
    auto base = std::make_shared<const CoefficientModel>(model);
    for (int j = 0; j <= d; ++j) {
      out.a_[j] = [base, j](const RVec& u) -> RMat { return (-base->B(0, 0, u)).partialPivLu().solve(base->A(j, u)); };
    }
    for (int j = 0; j <= d; ++j) {
      for (int k = 0; k <= d; ++k) {
        out.b_[j * (d + 1) + k] = [base, j, k](const RVec& u) -> RMat {
          return (-base->B(0, 0, u)).partialPivLu().solve(base->B(j, k, u));
        };
      }
    }
    out.b_[0] = constant(-RMat::Identity(n, n));
    if (model.has_remainder()) {
      out.q_ = [base](const RVec& u, const RVec& v, const RMat& g) -> RVec {
        return (-base->B(0, 0, u)).partialPivLu().solve(base->Q(u, v, g));
      };
    }
  }
  if (model.constant_coefficients() && model.has_remainder()) {
    const RMat inv = (-model.B(0, 0, model.reference_state())).inverse();
    auto base = std::make_shared<const CoefficientModel>(model);
    out.q_ = [base, inv](const RVec& u, const RVec& v, const RMat& g) -> RVec { return inv * base->Q(u, v, g); };
  }
  out.normalized_ = true;
  return out;
}

CoefficientModel builtin_damped_wave(double a, int d) {
  if (!(a > 0.0)) fail(ErrorKind::InvalidParameter, "damping coefficient must be positive");
  if (d <= 0) fail(ErrorKind::InvalidParameter, "space dimension must be positive");
  std::vector<MatrixFn> af = zero_family(d + 1, 1);
  af[0] = constant(scalar_mat(a));
  std::vector<MatrixFn> bf = zero_family((d + 1) * (d + 1), 1);
  bf[0] = constant(scalar_mat(-1.0));
  for (int j = 1; j <= d; ++j) bf[j * (d + 1) + j] = constant(scalar_mat(1.0));
  CoefficientModel m(1, d, scalar_vec(0.0), StateBox{scalar_vec(-1.0), scalar_vec(1.0)}, "damped-wave", af, bf);
  m.mark_normalized(true);
  m.mark_constant(true);
  return m;
}

CoefficientModel builtin_convected_damped_wave(double a_conv, double kappa) {
  if (!std::isfinite(a_conv) || !std::isfinite(kappa)) fail(ErrorKind::InvalidParameter, "non-finite convection parameter");
  std::vector<MatrixFn> af = zero_family(2, 1);
  af[0] = constant(scalar_mat(1.0));
  if (kappa == 0.0) {
    af[1] = constant(scalar_mat(a_conv));
  } else {
    af[1] = [a_conv, kappa](const RVec& u) { return scalar_mat(a_conv + kappa * u(0)); };
  }
  std::vector<MatrixFn> bf = zero_family(4, 1);
  bf[0] = constant(scalar_mat(-1.0));
  bf[3] = constant(scalar_mat(1.0));
  CoefficientModel m(1, 1, scalar_vec(0.0), StateBox{scalar_vec(-1.0), scalar_vec(1.0)}, "convected-damped-wave", af,
                     bf);
  m.mark_normalized(true);
  m.mark_constant(kappa == 0.0);
  return m;
}

CoefficientModel builtin_barotropic_fluid(const FluidParameters& p) {
  if (!(p.r >= 1.0) || !std::isfinite(p.r)) fail(ErrorKind::InvalidParameter, "fluid requires 1 <= r < inf");
  if (!(p.mu > 0.0 && p.nu > 0.0 && p.eta > 0.0 && p.zeta >= 0.0)) {
    fail(ErrorKind::InvalidParameter, "fluid requires mu, nu, eta > 0 and zeta >= 0");
  }
  if (!(p.mu > p.eta_tilde())) fail(ErrorKind::InvalidParameter, "fluid requires mu > 4/3 eta + zeta");

  constexpr int n = 4;
  constexpr int d = 3;
  std::vector<MatrixFn> af(d + 1);
  RMat a0 = RMat::Identity(n, n);
  a0(0, 0) = p.r;
  af[0] = constant(a0);
  for (int j = 1; j <= d; ++j) {
    RMat aj = RMat::Zero(n, n);
    aj(0, j) = 1.0;
    aj(j, 0) = 1.0;
    af[j] = constant(aj);
  }
  std::vector<MatrixFn> bf((d + 1) * (d + 1));
  RMat b00 = -p.nu * RMat::Identity(n, n);
  b00(0, 0) = -p.r * p.r * p.mu;
  bf[0] = constant(b00);
  const double coupling = -0.5 * (p.mu * p.r + p.nu);
  for (int j = 1; j <= d; ++j) {
    RMat b0j = RMat::Zero(n, n);
    b0j(0, j) = coupling;
    b0j(j, 0) = coupling;
    bf[j] = constant(b0j);
    bf[j * (d + 1)] = constant(b0j);
  }
  const double shear = 0.5 * (-p.mu + p.eta / 3.0 + p.zeta);
  for (int i = 1; i <= d; ++i) {
    for (int j = 1; j <= d; ++j) {
      RMat bij = RMat::Zero(n, n);
      if (i == j) {
        bij(0, 0) = -p.nu;
        for (int k = 1; k <= d; ++k) bij(k, k) = p.eta;
      }
      bij(i, j) += shear;
      bij(j, i) += shear;
      bf[i * (d + 1) + j] = constant(bij);
    }
  }
  RVec ref = RVec::Zero(n);
  StateBox box{RVec::Constant(n, -1.0), RVec::Constant(n, 1.0)};
  CoefficientModel m(n, d, ref, box, "fluid", af, bf);
  m.mark_constant(true);
  m.set_fluid(p);
  return m;
}

BlockSet raw_directional_symbols(const CoefficientModel& model, const RVec& u, const RVec& omega) {
  const int n = model.n();
  const int d = model.d();
  BlockSet s{model.A(0, u), RMat::Zero(n, n), model.B(0, 0, u), RMat::Zero(n, n), RMat::Zero(n, n)};
  for (int j = 1; j <= d; ++j) {
    s.A += model.A(j, u) * omega(j - 1);
    s.C += (model.B(0, j, u) + model.B(j, 0, u)) * omega(j - 1);
    for (int k = 1; k <= d; ++k) s.B += model.B(j, k, u) * (omega(j - 1) * omega(k - 1));
  }
  return s;
}

FluidBlocks fluid_block_decomposition(const CoefficientModel& model, const RVec& omega) {
  if (!model.fluid()) fail(ErrorKind::NotFluidModel, "model has no fluid block structure");
  if (omega.size() != 3) fail(ErrorKind::DimensionMismatch, "fluid direction must be a 3-vector");
  if (std::abs(omega.norm() - 1.0) > 1e-12) fail(ErrorKind::NonUnitDirection, "direction is not a unit vector");

  // Orthonormal complement of omega via Householder QR of [omega].
  const RMat q = Eigen::HouseholderQR<RMat>(omega).householderQ() * RMat::Identity(3, 3);
  RMat basis = RMat::Zero(4, 4);
  basis(0, 0) = 1.0;
  basis.block(1, 1, 3, 1) = omega;
  basis.block(1, 2, 3, 2) = q.block(0, 1, 3, 2);

  const BlockSet full = raw_directional_symbols(model, model.reference_state(), omega);
  auto split = [&](const RMat& m, int offset) -> RMat {
    return basis.block(0, offset, 4, 2).transpose() * m * basis.block(0, offset, 4, 2);
  };
  FluidBlocks out;
  out.basis = basis;
  out.longitudinal = {split(full.A0, 0), split(full.A, 0), split(full.B00, 0), split(full.B, 0), split(full.C, 0)};
  out.transverse = {split(full.A0, 2), split(full.A, 2), split(full.B00, 2), split(full.B, 2), split(full.C, 2)};
  return out;
}

}  // namespace hypdiss
