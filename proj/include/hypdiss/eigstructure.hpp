#pragma once

#include <vector>

#include "hypdiss/linalg.hpp"

namespace hypdiss {

inline constexpr double kDefaultClusterTolerance = 1e-7;

struct EigenCluster {
  cplx value;           // mean of the clustered eigenvalues
  int multiplicity = 0;
  bool semi_simple = true;
  CMat projection;      // spectral projection onto the invariant subspace
  CMat basis;           // orthonormal basis of range(projection)
};

struct EigenStructure {
  std::vector<EigenCluster> clusters;  // sorted by (Re, Im) of the cluster value
  double cluster_tolerance = kDefaultClusterTolerance;
  double absolute_tolerance = 0.0;     // cluster_tolerance * (1 + spectral radius)
  double spectral_radius = 0.0;

  [[nodiscard]] std::vector<int> multiplicities() const;
  [[nodiscard]] bool all_semi_simple() const;
  [[nodiscard]] double max_abs_imag() const;
  [[nodiscard]] double max_abs_real() const;
};

// Clusters eigenvalues whose gap is at most tol * (1 + spectral radius) and
// computes spectral projections from a reordered Schur form. Throws
// ClusterAmbiguity when two clusters are within 10x the absolute tolerance.
[[nodiscard]] EigenStructure eigstructure(const CMat& matrix, double cluster_tolerance = kDefaultClusterTolerance);

struct Symmetrizer {
  CMat S;
  double lambda_min = 0.0;
  double condition = 0.0;
};

// S = V^{-*} V^{-1} for K = V diag(real) V^{-1}, where V stacks orthonormal bases of
// the eigenspaces. Throws NotSymmetrizable for non-real or defective spectra.
[[nodiscard]] Symmetrizer build_symmetrizer(const CMat& k, double cluster_tolerance = kDefaultClusterTolerance);
[[nodiscard]] Symmetrizer build_symmetrizer(const EigenStructure& es, const CMat& k);

struct RateBalancedLyapunov {
  CMat P;
  double condition = 0.0;
  double certified_rate = 0.0;  // -lambda_max(P M + M^* P, P) / 2
};

// Lyapunov certificate assembled block-wise on groups of comparable decay rates:
// P = X^{-*} blkdiag(P_b) X^{-1} with P_b M_b + M_b^* P_b = -|alpha_b| I. Eigenvalues
// l_i, l_j share a group when |l_i - l_j| <= group_ratio * min(|Re l_i|, |Re l_j|).
[[nodiscard]] RateBalancedLyapunov rate_balanced_lyapunov(const CMat& m, double group_ratio = 1.0);

}  // namespace hypdiss
