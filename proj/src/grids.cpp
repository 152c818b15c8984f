#include "hypdiss/grids.hpp"

#include <cmath>
#include <numbers>

#include "hypdiss/error.hpp"

namespace hypdiss {

DirectionSet circle_directions(int count) {
  if (count <= 0) fail(ErrorKind::GridEmpty, "circle direction count must be positive");
  DirectionSet set;
  for (int k = 0; k < count; ++k) {
    const double phi = 2.0 * std::numbers::pi * k / count;
    RVec w(2);
    w << std::cos(phi), std::sin(phi);
    set.directions.push_back(w);
    set.weights.push_back(2.0 * std::numbers::pi / count);
  }
  return set;
}

namespace {

DirectionSet cube_stencil() {
  DirectionSet set;
  const double sphere = 4.0 * std::numbers::pi;
  auto add = [&](double x, double y, double z, double w) {
    RVec v(3);
    v << x, y, z;
    set.directions.push_back(v.normalized());
    set.weights.push_back(w * sphere);
  };
  for (int axis = 0; axis < 3; ++axis) {
    for (double s : {1.0, -1.0}) {
      double c[3] = {0, 0, 0};
      c[axis] = s;
      add(c[0], c[1], c[2], 1.0 / 21.0);
    }
  }
  for (int zero = 2; zero >= 0; --zero) {
    for (double s1 : {1.0, -1.0}) {
      for (double s2 : {1.0, -1.0}) {
        double c[3];
        int k = 0;
        for (int i = 0; i < 3; ++i) c[i] = (i == zero) ? 0.0 : (k++ == 0 ? s1 : s2);
        add(c[0], c[1], c[2], 4.0 / 105.0);
      }
    }
  }
  for (double sx : {1.0, -1.0}) {
    for (double sy : {1.0, -1.0}) {
      for (double sz : {1.0, -1.0}) add(sx, sy, sz, 9.0 / 280.0);
    }
  }
  return set;
}

}  // namespace

DirectionSet default_directions(int d) {
  switch (d) {
    case 1: {
      DirectionSet set;
      for (double s : {-1.0, 1.0}) {
        RVec v(1);
        v << s;
        set.directions.push_back(v);
        set.weights.push_back(1.0);
      }
      return set;
    }
    case 2: return circle_directions(64);
    case 3: return cube_stencil();
    default: fail(ErrorKind::InvalidParameter, "default directions exist for d = 1, 2, 3 only");
  }
}

std::vector<double> log_grid(double lo, double hi, int count) {
  if (count <= 0) fail(ErrorKind::GridEmpty, "log grid needs at least one point");
  if (!(lo > 0.0 && hi >= lo)) fail(ErrorKind::InvalidParameter, "log grid needs 0 < lo <= hi");
  std::vector<double> out(count);
  if (count == 1) {
    out[0] = lo;
    return out;
  }
  const double a = std::log(lo);
  const double b = std::log(hi);
  for (int i = 0; i < count; ++i) out[i] = std::exp(a + (b - a) * i / (count - 1));
  out.front() = lo;
  out.back() = hi;
  return out;
}

RadialGrid radial_log_grid(double lo, double hi, int count, int d) {
  RadialGrid g;
  g.nodes = log_grid(lo, hi, count);
  const auto n = g.nodes.size();
  std::vector<double> edges(n + 1);
  for (std::size_t i = 1; i < n; ++i) edges[i] = std::sqrt(g.nodes[i - 1] * g.nodes[i]);
  edges[0] = lo;
  edges[n] = hi;
  for (std::size_t i = 0; i < n; ++i) {
    g.weights.push_back((std::pow(edges[i + 1], d) - std::pow(edges[i], d)) / d);
  }
  return g;
}

double radical_inverse(unsigned index, unsigned base) {
  double inv = 1.0 / base;
  double f = inv;
  double r = 0.0;
  while (index > 0) {
    r += f * (index % base);
    index /= base;
    f *= inv;
  }
  return r;
}

std::vector<RVec> halton_states(const RVec& center, const RVec& lo, const RVec& hi, int count) {
  static constexpr unsigned primes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53};
  const Eigen::Index n = center.size();
  if (n > static_cast<Eigen::Index>(std::size(primes))) fail(ErrorKind::InvalidParameter, "state dimension too large for Halton sampling");
  std::vector<RVec> out;
  if (count <= 0) return out;
  out.push_back(center);
  for (int k = 1; k < count; ++k) {
    RVec u(n);
    for (Eigen::Index i = 0; i < n; ++i) u(i) = lo(i) + (hi(i) - lo(i)) * radical_inverse(static_cast<unsigned>(k), primes[i]);
    out.push_back(u);
  }
  return out;
}

}  // namespace hypdiss
