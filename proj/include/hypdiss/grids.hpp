#pragma once

#include <cmath>
#include <vector>

#include "hypdiss/linalg.hpp"

namespace hypdiss {

// Unit directions with surface quadrature weights (weights sum to |S^{d-1}|).
struct DirectionSet {
  std::vector<RVec> directions;
  std::vector<double> weights;
};

// d=1: {-1,+1}; d=2: 64 equiangular points; d=3: 26-point cube stencil
// (axes, edge midpoints, corners) with degree-9 exact weights.
[[nodiscard]] DirectionSet default_directions(int d);

// Equiangular points on the circle.
[[nodiscard]] DirectionSet circle_directions(int count);

// `count` log-spaced points from lo to hi inclusive.
[[nodiscard]] std::vector<double> log_grid(double lo, double hi, int count);

// Radial quadrature for integrals of f(|xi|) |xi|^{d-1} d|xi| on log-spaced nodes.
// Each weight is the exact integral of r^{d-1} over the node's cell (cells split at
// geometric midpoints, end cells clamped to [lo, hi]); the weights sum to (hi^d - lo^d)/d.
struct RadialGrid {
  std::vector<double> nodes;
  std::vector<double> weights;
};
[[nodiscard]] RadialGrid radial_log_grid(double lo, double hi, int count, int d);

// Halton radical inverse in the given prime base (index >= 1).
[[nodiscard]] double radical_inverse(unsigned index, unsigned base);

// `count` deterministic samples of the box [lo, hi]; the first sample is `center`.
[[nodiscard]] std::vector<RVec> halton_states(const RVec& center, const RVec& lo, const RVec& hi, int count);

[[nodiscard]] inline double japanese_bracket(double xi_norm) { return std::sqrt(1.0 + xi_norm * xi_norm); }

// |xi|^2 / (1 + |xi|^2)
[[nodiscard]] inline double decay_profile(double xi_norm) {
  const double s = xi_norm * xi_norm;
  return s / (1.0 + s);
}

}  // namespace hypdiss
