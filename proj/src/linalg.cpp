#include "hypdiss/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <unsupported/Eigen/MatrixFunctions>

#include "hypdiss/error.hpp"

namespace hypdiss {

CMat expm(const CMat& m) { return m.exp(); }

RVec balancing_scales(const CMat& m) {
  const Eigen::Index n = m.rows();
  RVec d = RVec::Ones(n);
  CMat b = m;
  constexpr double radix = 2.0;
  bool converged = false;
  for (int sweep = 0; sweep < 100 && !converged; ++sweep) {
    converged = true;
    for (Eigen::Index i = 0; i < n; ++i) {
      double c = 0.0;
      double r = 0.0;
      for (Eigen::Index j = 0; j < n; ++j) {
        if (j == i) continue;
        c += std::abs(b(j, i));
        r += std::abs(b(i, j));
      }
      if (c == 0.0 || r == 0.0) continue;
      double g = r / radix;
      double f = 1.0;
      const double s = c + r;
      while (c < g) {
        f *= radix;
        c *= radix * radix;
      }
      g = r * radix;
      while (c >= g) {
        f /= radix;
        c /= radix * radix;
      }
      if ((c + r) / f < 0.95 * s) {
        converged = false;
        d(i) *= f;
        b.row(i) /= f;
        b.col(i) *= f;
      }
    }
  }
  return d;
}

CVec eigenvalues(const CMat& m) {
  const RVec d = balancing_scales(m);
  const CMat b = d.cwiseInverse().asDiagonal() * m * d.asDiagonal();
  Eigen::ComplexEigenSolver<CMat> solver(b, false);
  if (solver.info() != Eigen::Success) fail(ErrorKind::EigensolverFailure, "complex eigensolver did not converge");
  return solver.eigenvalues();
}

double spectral_abscissa(const CMat& m) { return eigenvalues(m).real().maxCoeff(); }

double spectral_radius(const CMat& m) { return eigenvalues(m).cwiseAbs().maxCoeff(); }

SchurForm complex_schur(const CMat& m) {
  Eigen::ComplexSchur<CMat> schur(m);
  if (schur.info() != Eigen::Success) fail(ErrorKind::EigensolverFailure, "complex Schur decomposition did not converge");
  return {schur.matrixU(), schur.matrixT()};
}

namespace {

void swap_adjacent(SchurForm& s, Eigen::Index k) {
  CMat& t = s.triangular;
  const cplx t11 = t(k, k);
  const cplx t22 = t(k + 1, k + 1);
  const cplx t12 = t(k, k + 1);
  const cplx diff = t22 - t11;
  const double norm = std::hypot(std::abs(t12), std::abs(diff));
  if (norm == 0.0) return;
  const cplx c = t12 / norm;
  const cplx sn = diff / norm;
  Eigen::Matrix2cd g;
  g << c, -std::conj(sn), sn, std::conj(c);
  const Eigen::Index n = t.rows();
  t.block(k, 0, 2, n) = g.adjoint() * t.block(k, 0, 2, n);
  t.block(0, k, n, 2) = t.block(0, k, n, 2) * g;
  s.unitary.block(0, k, n, 2) = s.unitary.block(0, k, n, 2) * g;
  t(k + 1, k) = 0.0;
}

// Upper-triangular Sylvester: A Y - Y B = C.
CMat solve_triangular_sylvester(const CMat& a, const CMat& b, const CMat& c) {
  const Eigen::Index p = a.rows();
  const Eigen::Index q = b.rows();
  CMat y = CMat::Zero(p, q);
  for (Eigen::Index j = 0; j < q; ++j) {
    CVec rhs = c.col(j);
    for (Eigen::Index k = 0; k < j; ++k) rhs += y.col(k) * b(k, j);
    CMat shifted = a;
    shifted.diagonal().array() -= b(j, j);
    y.col(j) = shifted.triangularView<Eigen::Upper>().solve(rhs);
  }
  return y;
}

}  // namespace

void reorder_schur(SchurForm& schur, std::vector<int>& keys) {
  const auto n = static_cast<Eigen::Index>(keys.size());
  for (Eigen::Index pass = 0; pass < n; ++pass) {
    bool swapped = false;
    for (Eigen::Index k = 0; k + 1 < n; ++k) {
      if (keys[k] > keys[k + 1]) {
        swap_adjacent(schur, k);
        std::swap(keys[k], keys[k + 1]);
        swapped = true;
      }
    }
    if (!swapped) break;
  }
}

BlockDiagonalization block_diagonalize(const SchurForm& grouped, const std::vector<int>& group_sizes) {
  const Eigen::Index n = grouped.triangular.rows();
  BlockDiagonalization out;
  out.offsets.push_back(0);
  for (int size : group_sizes) out.offsets.push_back(out.offsets.back() + size);
  if (out.offsets.back() != n) fail(ErrorKind::DimensionMismatch, "group sizes do not cover the matrix");

  CMat t = grouped.triangular;
  CMat s = CMat::Identity(n, n);
  CMat s_inv = CMat::Identity(n, n);
  for (std::size_t g = 0; g + 1 < group_sizes.size(); ++g) {
    const Eigen::Index o = out.offsets[g];
    const Eigen::Index p = group_sizes[g];
    const Eigen::Index rest = n - o - p;
    const CMat a = t.block(o, o, p, p);
    const CMat b = t.block(o + p, o + p, rest, rest);
    const CMat y = solve_triangular_sylvester(a, b, -t.block(o, o + p, p, rest));
    t.block(o, o + p, p, rest).setZero();
    // s <- s * [[I, Y],[0, I]] on the trailing block; inverse accumulates on the left.
    s.block(0, o + p, n, rest) += s.block(0, o, n, p) * y;
    s_inv.block(o, 0, p, n) -= y * s_inv.block(o + p, 0, rest, n);
  }
  out.basis = grouped.unitary * s;
  out.basis_inverse = s_inv * grouped.unitary.adjoint();
  for (std::size_t g = 0; g < group_sizes.size(); ++g) {
    const Eigen::Index o = out.offsets[g];
    out.blocks.push_back(t.block(o, o, group_sizes[g], group_sizes[g]));
  }
  return out;
}

CMat solve_lyapunov(const CMat& m, const CMat& q) {
  const Eigen::Index n = m.rows();
  const SchurForm schur = complex_schur(m);
  const CMat& t = schur.triangular;
  const CMat& u = schur.unitary;
  const CMat c = -(u.adjoint() * q * u);
  // Y T + T^* Y = C, column by column; T^* is lower triangular.
  CMat y = CMat::Zero(n, n);
  const double scale = std::max(1.0, t.cwiseAbs().maxCoeff());
  for (Eigen::Index j = 0; j < n; ++j) {
    CVec rhs = c.col(j);
    for (Eigen::Index k = 0; k < j; ++k) rhs -= y.col(k) * t(k, j);
    CMat lower = t.adjoint();
    lower.diagonal().array() += t(j, j);
    for (Eigen::Index i = 0; i < n; ++i) {
      if (std::abs(lower(i, i)) <= 1e3 * std::numeric_limits<double>::epsilon() * scale) {
        fail(ErrorKind::LyapunovSolveFailure, "eigenvalue pair symmetric about the imaginary axis");
      }
    }
    y.col(j) = lower.triangularView<Eigen::Lower>().solve(rhs);
  }
  CMat p = u * y * u.adjoint();
  return hermitian_part(p);
}

RVec hermitian_eigenvalues(const CMat& m) {
  Eigen::SelfAdjointEigenSolver<CMat> solver(hermitian_part(m), Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) fail(ErrorKind::EigensolverFailure, "hermitian eigensolver did not converge");
  return solver.eigenvalues();
}

double hermitian_condition(const CMat& m) {
  const RVec ev = hermitian_eigenvalues(m);
  if (ev(0) <= 0.0) return std::numeric_limits<double>::infinity();
  return ev(ev.size() - 1) / ev(0);
}

double pencil_max_eigenvalue(const CMat& g, const CMat& n) {
  Eigen::GeneralizedSelfAdjointEigenSolver<CMat> solver(hermitian_part(g), hermitian_part(n),
                                                       Eigen::EigenvaluesOnly | Eigen::Ax_lBx);
  if (solver.info() != Eigen::Success) fail(ErrorKind::EigensolverFailure, "generalized hermitian eigensolver failed");
  return solver.eigenvalues().maxCoeff();
}

CMat orthonormal_columns(const CMat& m) {
  Eigen::HouseholderQR<CMat> qr(m);
  return qr.householderQ() * CMat::Identity(m.rows(), m.cols());
}

}  // namespace hypdiss
