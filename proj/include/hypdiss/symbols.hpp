#pragma once

#include "hypdiss/model.hpp"

namespace hypdiss {

// All functions below expect a normalized model (B^{00} = -I) and throw
// PrerequisiteMissing otherwise.

struct DirectionalSymbols {
  CMat A;  // sum_j A^j w_j
  CMat B;  // sum_jk B^{jk} w_j w_k
  CMat C;  // sum_j (B^{0j} + B^{j0}) w_j
};

// Directional symbols at a unit direction; throws NonUnitDirection.
[[nodiscard]] DirectionalSymbols assemble_directional(const CoefficientModel& model, const RVec& u, const RVec& omega);

// Same sums with an arbitrary frequency vector (homogeneous of degree 1, 2, 1).
[[nodiscard]] DirectionalSymbols frequency_symbols(const CoefficientModel& model, const RVec& u, const RVec& xi);

[[nodiscard]] CMat assemble_calB(const CoefficientModel& model, const RVec& u, const RVec& omega);
[[nodiscard]] CMat assemble_calA(const CoefficientModel& model, const RVec& u, const RVec& omega);
[[nodiscard]] CMat assemble_Mbar(const CoefficientModel& model, const RVec& u, const RVec& xi);
[[nodiscard]] CMat assemble_M(const CoefficientModel& model, const RVec& u, const RVec& xi);
[[nodiscard]] CMat assemble_K(const CoefficientModel& model, const RVec& u, double eta, const RVec& omega);

// Block builders shared with the simulator and the spectral code.
[[nodiscard]] CMat first_order_symbol(const DirectionalSymbols& s, const CMat& a0);
[[nodiscard]] CMat z_scaling(int n, double xi_norm);        // diag(<xi> I, I)
[[nodiscard]] CMat z_tilde_scaling(int n, double xi_norm);  // diag((<xi>/xi) I, I)

struct SymbolBundle {
  RVec u;
  RVec omega;
  double xi = 0.0;
  DirectionalSymbols directional;
  CMat calB, calA, Mbar, M, K;
};

// K is evaluated at eta = 1/xi (0 when xi = 0).
[[nodiscard]] SymbolBundle assemble_bundle(const CoefficientModel& model, const RVec& u, const RVec& omega, double xi);

struct DispersionRoots {
  RVec xi;
  CVec roots;
  double max_real_part = 0.0;
};

[[nodiscard]] DispersionRoots dispersion_roots(const CoefficientModel& model, const RVec& u, const RVec& xi);

}  // namespace hypdiss
