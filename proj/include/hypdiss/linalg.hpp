#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

namespace hypdiss {

using cplx = std::complex<double>;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using RMat = Eigen::MatrixXd;
using RVec = Eigen::VectorXd;

inline constexpr cplx kI{0.0, 1.0};

[[nodiscard]] inline CMat to_complex(const RMat& m) { return m.cast<cplx>(); }

// Matrix exponential (Pade scaling and squaring).
[[nodiscard]] CMat expm(const CMat& m);

// Diagonal similarity D such that D^{-1} M D has balanced row/column norms.
[[nodiscard]] RVec balancing_scales(const CMat& m);

// Eigenvalues after balancing.
[[nodiscard]] CVec eigenvalues(const CMat& m);

[[nodiscard]] double spectral_abscissa(const CMat& m);
[[nodiscard]] double spectral_radius(const CMat& m);

struct SchurForm {
  CMat unitary;     // U
  CMat triangular;  // T, with M = U T U*
};

[[nodiscard]] SchurForm complex_schur(const CMat& m);

// Moves diagonal entries so that `keys` (one per diagonal position) become
// non-decreasing, using adjacent Givens swaps. `keys` is permuted in place.
void reorder_schur(SchurForm& schur, std::vector<int>& keys);

// Block diagonalization M = X diag(B_0, ..., B_{k-1}) X^{-1} from a Schur form
// whose diagonal is grouped contiguously (group sizes given).
struct BlockDiagonalization {
  CMat basis;          // X
  CMat basis_inverse;  // X^{-1}
  std::vector<int> offsets;  // size k+1
  std::vector<CMat> blocks;  // upper triangular diagonal blocks
};

[[nodiscard]] BlockDiagonalization block_diagonalize(const SchurForm& grouped,
                                                     const std::vector<int>& group_sizes);

// Solves P M + M^* P = -Q for hermitian P (Bartels-Stewart on the complex Schur form).
// Throws LyapunovSolveFailure when conj(l_i) + l_j is numerically zero.
[[nodiscard]] CMat solve_lyapunov(const CMat& m, const CMat& q);

[[nodiscard]] inline CMat hermitian_part(const CMat& m) { return 0.5 * (m + m.adjoint()); }

// Ascending eigenvalues of a hermitian matrix (only the hermitian part is used).
[[nodiscard]] RVec hermitian_eigenvalues(const CMat& m);

// lambda_max / lambda_min of a hermitian positive definite matrix; +inf if not pd.
[[nodiscard]] double hermitian_condition(const CMat& m);

// Largest eigenvalue of the hermitian pencil (G, N) with N positive definite.
[[nodiscard]] double pencil_max_eigenvalue(const CMat& g, const CMat& n);

// Orthonormal basis of the column span (thin QR).
[[nodiscard]] CMat orthonormal_columns(const CMat& m);

}  // namespace hypdiss
