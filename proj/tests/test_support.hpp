#pragma once

#include <algorithm>
#include <limits>
#include <random>
#include <vector>

#include "hypdiss/linalg.hpp"
#include "hypdiss/model.hpp"

namespace hypdiss::testing {

inline RVec unit(int d, int axis) {
  RVec e = RVec::Zero(d);
  e(axis) = 1.0;
  return e;
}

inline RVec random_unit(int d, std::mt19937& rng) {
  std::normal_distribution<double> g;
  RVec v(d);
  for (int i = 0; i < d; ++i) v(i) = g(rng);
  return v / v.norm();
}

// Largest distance in a greedy nearest-neighbour pairing of two root multisets.
inline double multiset_distance(const CVec& a, const CVec& b) {
  if (a.size() != b.size()) return std::numeric_limits<double>::infinity();
  std::vector<bool> used(b.size(), false);
  double worst = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    Eigen::Index best = -1;
    double dist = std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < b.size(); ++j) {
      if (!used[j] && std::abs(a(i) - b(j)) < dist) {
        dist = std::abs(a(i) - b(j));
        best = j;
      }
    }
    used[best] = true;
    worst = std::max(worst, dist);
  }
  return worst;
}

// Constant-coefficient model from A^0..A^d and the row-major (d+1)^2 list of B^{jk}.
inline CoefficientModel constant_model(int n, int d, const std::vector<RMat>& a, const std::vector<RMat>& b,
                                       bool normalized = true) {
  std::vector<MatrixFn> af;
  std::vector<MatrixFn> bf;
  for (const RMat& m : a) af.push_back([m](const RVec&) { return m; });
  for (const RMat& m : b) bf.push_back([m](const RVec&) { return m; });
  CoefficientModel model(n, d, RVec::Zero(n), StateBox{RVec::Constant(n, -1.0), RVec::Constant(n, 1.0)}, "test", af,
                         bf);
  model.mark_constant(true);
  model.mark_normalized(normalized);
  return model;
}

inline RMat scalar(double x) { return RMat::Constant(1, 1, x); }

inline double rel(const CMat& a, const CMat& b) { return (a - b).norm() / std::max(1.0, b.norm()); }

}  // namespace hypdiss::testing
