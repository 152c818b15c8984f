#pragma once

#include <vector>

#include "hypdiss/linalg.hpp"

namespace hypdiss {

// Periodic lattice with N points per axis on [0, L)^d and its dual lattice
// xi = 2 pi k / L with signed k in (-N/2, N/2]. Flat index = sum_j i_j N^j.
class Lattice {
 public:
  Lattice(int d, int n_per_axis, double box_length);

  [[nodiscard]] int d() const noexcept { return d_; }
  [[nodiscard]] int n_per_axis() const noexcept { return n_; }
  [[nodiscard]] double box_length() const noexcept { return length_; }
  [[nodiscard]] int size() const noexcept { return size_; }
  [[nodiscard]] double cell_volume() const;

  [[nodiscard]] RVec position(int index) const;
  [[nodiscard]] RVec frequency(int index) const;
  [[nodiscard]] double frequency_norm(int index) const { return norms_[index]; }
  [[nodiscard]] int signed_wavenumber(int index, int axis) const;
  [[nodiscard]] int axis_index(int index, int axis) const;
  // Lattice index of -k.
  [[nodiscard]] int negated(int index) const;
  [[nodiscard]] double max_frequency() const;
  // 2/3-rule mask: |k_j| < N/3 on every axis.
  [[nodiscard]] bool resolved(int index) const;

  // f_hat(k) = (1/P) sum_x f(x) e^{-i x.xi_k}
  void forward(const cplx* in, cplx* out) const;
  // f(x) = sum_k f_hat(k) e^{i x.xi_k}
  void backward(const cplx* in, cplx* out) const;
  [[nodiscard]] CVec forward(const CVec& in) const;
  [[nodiscard]] CVec backward(const CVec& in) const;

  // e^{i x_p . xi_k}
  [[nodiscard]] cplx phase(int position_index, int frequency_index) const;

  [[nodiscard]] bool operator==(const Lattice& o) const noexcept {
    return d_ == o.d_ && n_ == o.n_ && length_ == o.length_;
  }

 private:
  int d_;
  int n_;
  double length_;
  int size_;
  std::vector<double> norms_;
  std::vector<cplx> roots_;  // e^{2 pi i m / N}
};

// Columns are components; rows are lattice points.
struct GridFunction {
  Lattice lattice;
  CMat values;

  GridFunction(Lattice l, int components) : lattice(std::move(l)), values(CMat::Zero(lattice.size(), components)) {}
  GridFunction(Lattice l, CMat v) : lattice(std::move(l)), values(std::move(v)) {}
  [[nodiscard]] int components() const noexcept { return static_cast<int>(values.cols()); }
  // Column-wise forward transform.
  [[nodiscard]] CMat spectrum() const;
  [[nodiscard]] static GridFunction from_spectrum(const Lattice& l, const CMat& spectrum);
};

// Discrete H^s norm: L^d sum_k <xi_k>^{2s} |f_hat(k)|^2, square-rooted.
[[nodiscard]] double sobolev_norm(const GridFunction& f, double s);
// Fourier multiplier <xi>^s applied column-wise.
[[nodiscard]] GridFunction bessel_potential(const GridFunction& f, double s);

}  // namespace hypdiss
