#include "hypdiss/symbols.hpp"

#include <cmath>

#include "hypdiss/error.hpp"
#include "hypdiss/grids.hpp"

namespace hypdiss {

namespace {

void require_normalized(const CoefficientModel& model) {
  if (!model.normalized()) fail(ErrorKind::PrerequisiteMissing, "symbol assembly needs a model with B^00 = -I");
}

CMat two_by_two(const CMat& tl, const CMat& tr, const CMat& bl, const CMat& br) {
  const Eigen::Index n = tl.rows();
  CMat m(2 * n, 2 * n);
  m << tl, tr, bl, br;
  return m;
}

}  // namespace

DirectionalSymbols frequency_symbols(const CoefficientModel& model, const RVec& u, const RVec& xi) {
  require_normalized(model);
  const int n = model.n();
  const int d = model.d();
  if (xi.size() != d) fail(ErrorKind::DimensionMismatch, "frequency vector must have d entries");
  RMat a = RMat::Zero(n, n);
  RMat b = RMat::Zero(n, n);
  RMat c = RMat::Zero(n, n);
  for (int j = 1; j <= d; ++j) {
    const double xj = xi(j - 1);
    if (xj == 0.0) continue;
    a += model.A(j, u) * xj;
    c += (model.B(0, j, u) + model.B(j, 0, u)) * xj;
    for (int k = 1; k <= d; ++k) {
      if (xi(k - 1) != 0.0) b += model.B(j, k, u) * (xj * xi(k - 1));
    }
  }
  return {to_complex(a), to_complex(b), to_complex(c)};
}

DirectionalSymbols assemble_directional(const CoefficientModel& model, const RVec& u, const RVec& omega) {
  if (omega.size() != model.d()) fail(ErrorKind::DimensionMismatch, "direction must have d entries");
  if (std::abs(omega.norm() - 1.0) > 1e-12) fail(ErrorKind::NonUnitDirection, "direction is not a unit vector");
  return frequency_symbols(model, u, omega);
}

CMat first_order_symbol(const DirectionalSymbols& s, const CMat& a0) {
  const Eigen::Index n = s.A.rows();
  return two_by_two(CMat::Zero(n, n), CMat::Identity(n, n), -kI * s.A - s.B, kI * s.C - a0);
}

CMat z_scaling(int n, double xi_norm) {
  CVec diag(2 * n);
  diag.head(n).setConstant(japanese_bracket(xi_norm));
  diag.tail(n).setOnes();
  return diag.asDiagonal();
}

CMat z_tilde_scaling(int n, double xi_norm) {
  if (!(xi_norm > 0.0)) fail(ErrorKind::InvalidParameter, "Z-tilde needs xi > 0");
  CVec diag(2 * n);
  diag.head(n).setConstant(japanese_bracket(xi_norm) / xi_norm);
  diag.tail(n).setOnes();
  return diag.asDiagonal();
}

CMat assemble_calB(const CoefficientModel& model, const RVec& u, const RVec& omega) {
  const DirectionalSymbols s = assemble_directional(model, u, omega);
  const Eigen::Index n = s.A.rows();
  return two_by_two(CMat::Zero(n, n), CMat::Identity(n, n), -s.B, kI * s.C);
}

CMat assemble_calA(const CoefficientModel& model, const RVec& u, const RVec& omega) {
  const DirectionalSymbols s = assemble_directional(model, u, omega);
  const Eigen::Index n = s.A.rows();
  return two_by_two(CMat::Zero(n, n), CMat::Zero(n, n), -kI * s.A, -to_complex(model.A(0, u)));
}

CMat assemble_Mbar(const CoefficientModel& model, const RVec& u, const RVec& xi) {
  return first_order_symbol(frequency_symbols(model, u, xi), to_complex(model.A(0, u)));
}

CMat assemble_M(const CoefficientModel& model, const RVec& u, const RVec& xi) {
  CMat m = assemble_Mbar(model, u, xi);
  const Eigen::Index n = model.n();
  const double br = japanese_bracket(xi.norm());
  m.topRightCorner(n, n) *= br;
  m.bottomLeftCorner(n, n) /= br;
  return m;
}

CMat assemble_K(const CoefficientModel& model, const RVec& u, double eta, const RVec& omega) {
  if (!(eta >= 0.0)) fail(ErrorKind::InvalidParameter, "K needs eta >= 0");
  const DirectionalSymbols s = assemble_directional(model, u, omega);
  const Eigen::Index n = s.A.rows();
  const CMat a0 = to_complex(model.A(0, u));
  return two_by_two(CMat::Zero(n, n), CMat::Identity(n, n), -kI * eta * s.A - s.B, kI * s.C - eta * a0);
}

SymbolBundle assemble_bundle(const CoefficientModel& model, const RVec& u, const RVec& omega, double xi) {
  SymbolBundle b;
  b.u = u;
  b.omega = omega;
  b.xi = xi;
  b.directional = assemble_directional(model, u, omega);
  b.calB = assemble_calB(model, u, omega);
  b.calA = assemble_calA(model, u, omega);
  const RVec xv = xi * omega;
  b.Mbar = assemble_Mbar(model, u, xv);
  b.M = assemble_M(model, u, xv);
  b.K = assemble_K(model, u, xi > 0.0 ? 1.0 / xi : 0.0, omega);
  return b;
}

DispersionRoots dispersion_roots(const CoefficientModel& model, const RVec& u, const RVec& xi) {
  DispersionRoots out;
  out.xi = xi;
  out.roots = eigenvalues(assemble_Mbar(model, u, xi));
  out.max_real_part = out.roots.real().maxCoeff();
  return out;
}

}  // namespace hypdiss
