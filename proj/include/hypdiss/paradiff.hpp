#pragma once

#include <functional>
#include <string>
#include <vector>

#include "hypdiss/lattice.hpp"

namespace hypdiss {

// Generalized smoothstep of the given order on [0, 1], clamped outside.
[[nodiscard]] double smoothstep(double x, int order);

// chi(eta, xi) = S(|xi|) T(|eta| / <xi>) with
//   T = 1 - h((t - eps1) / (eps2 - eps1)),  S = h((|xi| - eps2) / (1 - eps2)).
struct CutoffSpec {
  double eps1 = 0.25;
  double eps2 = 0.5;
  int order = 3;
  [[nodiscard]] double operator()(double eta_norm, double xi_norm) const;
};

// Throws InvalidEpsilon unless 0 < eps1 < eps2 < 1.
[[nodiscard]] CutoffSpec make_cutoff(double eps1, double eps2, int order = 3);

// Max over `rays` random rays of <xi>^{|a|+|b|} |d^b_eta d^a_xi chi| (first derivatives,
// central differences). Bounded values confirm the symbol-type estimate.
[[nodiscard]] double cutoff_derivative_bound(const CutoffSpec& chi, int rays, unsigned seed);

enum class SymbolClass { GammaK, S11, Smoothed };

// Matrix-valued symbol sampled on lattice x dual lattice.
class DiscreteSymbol {
 public:
  DiscreteSymbol(Lattice lattice, int n, double order, SymbolClass tag);

  [[nodiscard]] const Lattice& lattice() const noexcept { return lattice_; }
  [[nodiscard]] int n() const noexcept { return n_; }
  [[nodiscard]] double order() const noexcept { return order_; }
  [[nodiscard]] SymbolClass tag() const noexcept { return tag_; }
  void set_tag(SymbolClass t) noexcept { tag_ = t; }

  // Entry (r, c) at position p and frequency k; storage index ((k P + p) n + r) n + c.
  [[nodiscard]] cplx& at(int k, int p, int r, int c) { return data_[index(k, p, r, c)]; }
  [[nodiscard]] cplx at(int k, int p, int r, int c) const { return data_[index(k, p, r, c)]; }
  [[nodiscard]] CMat matrix(int k, int p) const;
  void set_matrix(int k, int p, const CMat& m);

  [[nodiscard]] std::vector<cplx>& data() noexcept { return data_; }
  [[nodiscard]] const std::vector<cplx>& data() const noexcept { return data_; }

  // Builds a symbol from a pointwise function of (x, xi).
  [[nodiscard]] static DiscreteSymbol from_function(const Lattice& lattice, int n, double order, SymbolClass tag,
                                                    const std::function<CMat(const RVec& x, const RVec& xi)>& f);

  // Pointwise conjugate transpose.
  [[nodiscard]] DiscreteSymbol adjoint() const;
  // Pointwise matrix product (this * other).
  [[nodiscard]] DiscreteSymbol product(const DiscreteSymbol& other) const;
  [[nodiscard]] DiscreteSymbol operator-(const DiscreteSymbol& other) const;

 private:
  [[nodiscard]] std::size_t index(int k, int p, int r, int c) const {
    return ((static_cast<std::size_t>(k) * lattice_.size() + p) * n_ + r) * n_ + c;
  }

  Lattice lattice_;
  int n_;
  double order_;
  SymbolClass tag_;
  std::vector<cplx> data_;
};

// Discrete symbol convolution in x: multiplies the x-spectrum at each xi by chi(eta, xi).
[[nodiscard]] DiscreteSymbol smooth_symbol(const DiscreteSymbol& a, const CutoffSpec& chi);

// Max of |x-spectrum| over the forbidden region |eta| >= eps2 <xi>, relative to the max
// of the input spectrum.
[[nodiscard]] double forbidden_leakage(const DiscreteSymbol& a, const CutoffSpec& chi);

// op[a] f (x) = sum_k e^{i x.xi_k} a(x, xi_k) f_hat(xi_k)
[[nodiscard]] GridFunction apply_op(const DiscreteSymbol& a, const GridFunction& f);
// Adjoint of apply_op in the lattice l^2 inner product.
[[nodiscard]] GridFunction apply_op_adjoint(const DiscreteSymbol& a, const GridFunction& g);
[[nodiscard]] GridFunction para_op(const DiscreteSymbol& a, const CutoffSpec& chi, const GridFunction& f);

// Dense (P n) x (P n) matrix of op[a]; row/column index = p * n + component.
[[nodiscard]] CMat assemble_dense(const DiscreteSymbol& a);

// rho(t) = 1 - h((|t| - 1/2) / (1/2)), used for the dyadic partition.
[[nodiscard]] double lp_profile(double t, int order = 3);

// a_nu(x, xi) = a(x, xi) zeta_nu(xi) for nu = -1 .. nu_max (returned in that order)
// with zeta_{-1} = rho, zeta_nu = rho(xi / 2^{nu+1}) - rho(xi / 2^nu).
[[nodiscard]] std::vector<DiscreteSymbol> lp_decompose(const DiscreteSymbol& a, int order = 3);

// Linear map given by forward and adjoint actions on flattened (P n) vectors.
struct LinearMap {
  int dim = 0;
  std::function<CVec(const CVec&)> apply;
  std::function<CVec(const CVec&)> adjoint;
};

struct NormEstimate {
  double norm = 0.0;
  int iterations = 0;
  bool converged = false;
};

// Largest singular value by power iteration on A^* A. Throws PowerIterationDivergence
// when the estimate is not finite; `converged` is false if it did not settle.
[[nodiscard]] NormEstimate power_iteration_norm(const LinearMap& a, unsigned seed, int max_iter = 500,
                                                double tol = 1e-10);
// Same estimate with the roles of A and A^* swapped.
[[nodiscard]] NormEstimate power_iteration_norm_adjoint(const LinearMap& a, unsigned seed, int max_iter = 500,
                                                        double tol = 1e-10);

// Lambda^{l} E Lambda^{-(l + shift)} as a map on flattened grid vectors.
[[nodiscard]] LinearMap weighted_map(const Lattice& lattice, int n, const LinearMap& e, double l, double shift);

// State-dependent symbol family F(y, xi) for y in R^{ny}.
using SymbolFamily = std::function<CMat(const RVec& y, const RVec& xi)>;

// F_u(x, xi) = F(u(x), xi) for a real state field u (columns = state components).
[[nodiscard]] DiscreteSymbol compose_symbol(const SymbolFamily& f, const GridFunction& u, int n, double order);

struct ScalingReport {
  std::vector<double> amplitudes;  // ||u||_s per sweep point
  std::vector<double> adjoint_errors;
  std::vector<double> product_errors;
  double adjoint_slope = 0.0;  // +inf when every error is exactly zero
  double product_slope = 0.0;
};

struct ScalingSettings {
  double sobolev_index = 2.0;  // s in ||u||_s
  double l = 0.0;              // target space H^l
  std::vector<double> scales{1.0, 0.5, 0.25, 0.125};
  bool dense = true;           // dense SVD norms instead of power iteration
  unsigned seed = 7;
};

// Norms of Op[F_u]^* - Op[F_u^*] and Op[G_u] Op[F_u] - Op[G_u F_u] (each minus its
// value at u = 0) between weighted spaces, over amplitudes u_base * scales.
[[nodiscard]] ScalingReport check_adjoint_product_errors(const SymbolFamily& f, double f_order,
                                                         const SymbolFamily& g, double g_order, int n,
                                                         const CutoffSpec& chi, const GridFunction& u_base,
                                                         const ScalingSettings& settings = {});

struct GardingReport {
  std::vector<double> amplitudes;   // ||u||_{s+2}
  std::vector<double> deficits;     // max(0, -min q(v) / ||v||^2_{(m-1)/2})
  double exponent = 0.0;            // slope of log deficit against log amplitude
  double constant_exponent = 0.0;   // exponent - 1/2: slope of deficit / ||u||^{1/2}
  bool exact = false;
};

struct GardingSettings {
  double s = 1.0;
  std::vector<double> scales{1.0, 0.5, 0.25, 0.125};
  int samples = 64;        // random test functions when not exact
  bool exact = true;       // dense eigenvalue (d = 1, N <= 128)
  double precheck_radius = 1.0;
  unsigned seed = 11;
};

// Lower bound of q(v) = Re <(Op[F_u] + Op[F_u]^*) v, v> over an amplitude sweep.
// Throws PrecheckFailed when F + F^* has a negative eigenvalue for |xi| > radius.
[[nodiscard]] GardingReport check_garding(const SymbolFamily& f, double order, int n, const CutoffSpec& chi,
                                          const GridFunction& u_base, const GardingSettings& settings = {});

// Least-squares slope of log(y) against log(x).
[[nodiscard]] double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace hypdiss
