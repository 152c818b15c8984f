#include "hypdiss/lattice.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <tuple>

#include <fftw3.h>

#include "hypdiss/error.hpp"

namespace hypdiss {

namespace {

// Unaligned FFTW plans keyed by (d, N, sign); the planner is not thread-safe.
class PlanCache {
 public:
  ~PlanCache() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }

  fftw_plan get(int d, int n, int sign) {
    std::lock_guard lock(mutex_);
    const auto key = std::make_tuple(d, n, sign);
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;
    int size = 1;
    std::vector<int> dims(d, n);
    for (int i = 0; i < d; ++i) size *= n;
    std::vector<fftw_complex> a(size);
    std::vector<fftw_complex> b(size);
    fftw_plan p = fftw_plan_dft(d, dims.data(), a.data(), b.data(), sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
    if (!p) fail(ErrorKind::InvalidParameter, "FFTW could not create a plan");
    plans_.emplace(key, p);
    return p;
  }

 private:
  std::mutex mutex_;
  std::map<std::tuple<int, int, int>, fftw_plan> plans_;
};

PlanCache& plans() {
  static PlanCache cache;
  return cache;
}

// FFTW uses row-major order (last index fastest); our flat index has axis 0 fastest,
// which is the same memory layout with reversed axis order. Transforms are symmetric
// under axis permutation, so the plan applies directly.
void execute(int d, int n, int sign, const cplx* in, cplx* out) {
  fftw_plan p = plans().get(d, n, sign);
  fftw_execute_dft(p, reinterpret_cast<fftw_complex*>(const_cast<cplx*>(in)), reinterpret_cast<fftw_complex*>(out));
}

}  // namespace

Lattice::Lattice(int d, int n_per_axis, double box_length) : d_(d), n_(n_per_axis), length_(box_length) {
  if (d_ < 1 || d_ > 3) fail(ErrorKind::InvalidParameter, "lattice dimension must be 1, 2 or 3");
  if (n_ < 2) fail(ErrorKind::InvalidParameter, "lattice needs at least 2 points per axis");
  if (!(length_ > 0.0)) fail(ErrorKind::InvalidParameter, "box length must be positive");
  size_ = 1;
  for (int i = 0; i < d_; ++i) size_ *= n_;
  norms_.resize(size_);
  for (int i = 0; i < size_; ++i) norms_[i] = frequency(i).norm();
  roots_.resize(n_);
  for (int m = 0; m < n_; ++m) roots_[m] = std::polar(1.0, 2.0 * std::numbers::pi * m / n_);
}

double Lattice::cell_volume() const { return std::pow(length_ / n_, d_); }

int Lattice::axis_index(int index, int axis) const {
  for (int a = 0; a < axis; ++a) index /= n_;
  return index % n_;
}

int Lattice::signed_wavenumber(int index, int axis) const {
  const int i = axis_index(index, axis);
  return i <= n_ / 2 ? i : i - n_;
}

RVec Lattice::position(int index) const {
  RVec x(d_);
  for (int a = 0; a < d_; ++a) x(a) = length_ * axis_index(index, a) / n_;
  return x;
}

RVec Lattice::frequency(int index) const {
  RVec xi(d_);
  for (int a = 0; a < d_; ++a) xi(a) = 2.0 * std::numbers::pi * signed_wavenumber(index, a) / length_;
  return xi;
}

int Lattice::negated(int index) const {
  int out = 0;
  int stride = 1;
  for (int a = 0; a < d_; ++a) {
    const int i = axis_index(index, a);
    out += ((n_ - i) % n_) * stride;
    stride *= n_;
  }
  return out;
}

double Lattice::max_frequency() const {
  double m = 0.0;
  for (double x : norms_) m = std::max(m, x);
  return m;
}

bool Lattice::resolved(int index) const {
  for (int a = 0; a < d_; ++a) {
    if (3 * std::abs(signed_wavenumber(index, a)) >= n_) return false;
  }
  return true;
}

void Lattice::forward(const cplx* in, cplx* out) const {
  execute(d_, n_, FFTW_FORWARD, in, out);
  const double scale = 1.0 / size_;
  for (int i = 0; i < size_; ++i) out[i] *= scale;
}

void Lattice::backward(const cplx* in, cplx* out) const { execute(d_, n_, FFTW_BACKWARD, in, out); }

CVec Lattice::forward(const CVec& in) const {
  if (in.size() != size_) fail(ErrorKind::GridMismatch, "vector does not match the lattice");
  CVec out(size_);
  forward(in.data(), out.data());
  return out;
}

CVec Lattice::backward(const CVec& in) const {
  if (in.size() != size_) fail(ErrorKind::GridMismatch, "vector does not match the lattice");
  CVec out(size_);
  backward(in.data(), out.data());
  return out;
}

cplx Lattice::phase(int position_index, int frequency_index) const {
  long m = 0;
  for (int a = 0; a < d_; ++a) {
    m += static_cast<long>(axis_index(position_index, a)) * axis_index(frequency_index, a);
  }
  return roots_[static_cast<std::size_t>(m % n_)];
}

CMat GridFunction::spectrum() const {
  CMat out(values.rows(), values.cols());
  for (Eigen::Index c = 0; c < values.cols(); ++c) {
    const CVec col = values.col(c);
    out.col(c) = lattice.forward(col);
  }
  return out;
}

GridFunction GridFunction::from_spectrum(const Lattice& l, const CMat& spectrum) {
  CMat v(spectrum.rows(), spectrum.cols());
  for (Eigen::Index c = 0; c < spectrum.cols(); ++c) {
    const CVec col = spectrum.col(c);
    v.col(c) = l.backward(col);
  }
  return GridFunction(l, v);
}

double sobolev_norm(const GridFunction& f, double s) {
  const CMat spec = f.spectrum();
  double acc = 0.0;
  for (int k = 0; k < f.lattice.size(); ++k) {
    acc += std::pow(1.0 + f.lattice.frequency_norm(k) * f.lattice.frequency_norm(k), s) * spec.row(k).squaredNorm();
  }
  return std::sqrt(std::pow(f.lattice.box_length(), f.lattice.d()) * acc);
}

GridFunction bessel_potential(const GridFunction& f, double s) {
  CMat spec = f.spectrum();
  for (int k = 0; k < f.lattice.size(); ++k) {
    spec.row(k) *= std::pow(1.0 + f.lattice.frequency_norm(k) * f.lattice.frequency_norm(k), 0.5 * s);
  }
  return GridFunction::from_spectrum(f.lattice, spec);
}

}  // namespace hypdiss
