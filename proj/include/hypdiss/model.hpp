#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "hypdiss/linalg.hpp"

namespace hypdiss {

struct StateBox {
  RVec lo;
  RVec hi;
  [[nodiscard]] bool contains(const RVec& u) const;
};

struct FluidParameters {
  double r = 3.0;
  double mu = 2.0;
  double nu = 1.0;
  double eta = 1.0;
  double zeta = 0.0;
  [[nodiscard]] double eta_tilde() const { return 4.0 / 3.0 * eta + zeta; }
};

// Quadratic remainder Q(u, v, grad u); grad is n x d with column j = u_{x_j}.
using RemainderFn = std::function<RVec(const RVec& u, const RVec& v, const RMat& grad)>;
using MatrixFn = std::function<RMat(const RVec& u)>;

// Coefficient families A^j(u) (j = 0..d) and B^{jk}(u) (j, k = 0..d) of
//   sum_j A^j u_{x_j} = sum_{jk} B^{jk} u_{x_j x_k} + Q,   x_0 = t.
class CoefficientModel {
 public:
  CoefficientModel(int n, int d, RVec reference_state, StateBox domain, std::string label,
                   std::vector<MatrixFn> a, std::vector<MatrixFn> b);

  [[nodiscard]] int n() const noexcept { return n_; }
  [[nodiscard]] int d() const noexcept { return d_; }
  [[nodiscard]] const RVec& reference_state() const noexcept { return reference_; }
  [[nodiscard]] const StateBox& state_domain() const noexcept { return domain_; }
  [[nodiscard]] const std::string& label() const noexcept { return label_; }

  [[nodiscard]] RMat A(int j, const RVec& u) const;
  [[nodiscard]] RMat B(int j, int k, const RVec& u) const;
  [[nodiscard]] RVec Q(const RVec& u, const RVec& v, const RMat& grad) const;
  [[nodiscard]] bool has_remainder() const noexcept { return static_cast<bool>(q_); }

  void set_remainder(RemainderFn q) { q_ = std::move(q); }

  // True when B^{00} = -I is known to hold on the whole state domain.
  [[nodiscard]] bool normalized() const noexcept { return normalized_; }
  // True when no evaluator depends on u.
  [[nodiscard]] bool constant_coefficients() const noexcept { return constant_; }
  [[nodiscard]] const std::optional<FluidParameters>& fluid() const noexcept { return fluid_; }

  void mark_normalized(bool v) noexcept { normalized_ = v; }
  void mark_constant(bool v) noexcept { constant_ = v; }
  void set_fluid(const FluidParameters& p) { fluid_ = p; }

 private:
  friend CoefficientModel normalize_b00(const CoefficientModel&, double);

  int n_;
  int d_;
  RVec reference_;
  StateBox domain_;
  std::string label_;
  std::vector<MatrixFn> a_;
  std::vector<MatrixFn> b_;
  RemainderFn q_;
  bool normalized_ = false;
  bool constant_ = false;
  std::optional<FluidParameters> fluid_;
};

inline constexpr int kDefaultStateSamples = 256;

// Deterministic sample of the state domain (reference state first).
[[nodiscard]] std::vector<RVec> sample_states(const CoefficientModel& model, int count = kDefaultStateSamples);

// Left-multiplies every coefficient by (-B^{00}(u))^{-1}. Throws SingularB00 when a
// sampled B^{00} has condition number above `cond_ceiling`.
[[nodiscard]] CoefficientModel normalize_b00(const CoefficientModel& model, double cond_ceiling = 1e12);

[[nodiscard]] CoefficientModel builtin_damped_wave(double a, int d);
// A^1(u) = a_conv + kappa * u; kappa = 0 gives the linear model.
[[nodiscard]] CoefficientModel builtin_convected_damped_wave(double a_conv, double kappa = 0.0);
[[nodiscard]] CoefficientModel builtin_barotropic_fluid(const FluidParameters& p);

struct BlockSet {
  RMat A0, A, B00, B, C;
};

struct FluidBlocks {
  BlockSet longitudinal;
  BlockSet transverse;
  RMat basis;  // 4x4 orthogonal, columns: (longitudinal pair, transverse pair)
};

// Directional blocks of the (unnormalized) fluid symbols in the orthogonal
// splitting C^4 = (C x omega C) + ({0} x omega^perp).
[[nodiscard]] FluidBlocks fluid_block_decomposition(const CoefficientModel& model, const RVec& omega);

// Unnormalized directional symbols used by the block decomposition.
[[nodiscard]] BlockSet raw_directional_symbols(const CoefficientModel& model, const RVec& u, const RVec& omega);

}  // namespace hypdiss
