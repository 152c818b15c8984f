#include "hypdiss/paradiff.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "hypdiss/error.hpp"
#include "hypdiss/grids.hpp"

namespace hypdiss {

namespace {

double binomial(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

void require_same_lattice(const Lattice& a, const Lattice& b) {
  if (!(a == b)) fail(ErrorKind::GridMismatch, "symbol and grid function live on different lattices");
}

CVec random_vector(int dim, std::mt19937& rng) {
  std::normal_distribution<double> normal;
  CVec v(dim);
  for (int i = 0; i < dim; ++i) v(i) = cplx(normal(rng), normal(rng));
  return v;
}

GridFunction unflatten(const Lattice& l, int n, const CVec& v) {
  CMat m(l.size(), n);
  for (int p = 0; p < l.size(); ++p) {
    for (int c = 0; c < n; ++c) m(p, c) = v(p * n + c);
  }
  return GridFunction(l, m);
}

CVec flatten(const GridFunction& f) {
  const int n = f.components();
  CVec v(static_cast<Eigen::Index>(f.lattice.size()) * n);
  for (int p = 0; p < f.lattice.size(); ++p) {
    for (int c = 0; c < n; ++c) v(p * n + c) = f.values(p, c);
  }
  return v;
}

CMat dense_matrix(const LinearMap& map) {
  CMat m(map.dim, map.dim);
  for (int j = 0; j < map.dim; ++j) {
    CVec e = CVec::Zero(map.dim);
    e(j) = 1.0;
    m.col(j) = map.apply(e);
  }
  return m;
}

double top_singular_value(const CMat& m) {
  Eigen::BDCSVD<CMat> svd(m);
  return svd.singularValues()(0);
}

}  // namespace

double smoothstep(double x, int order) {
  if (order < 0) fail(ErrorKind::InvalidParameter, "smoothstep order must be nonnegative");
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  double acc = 0.0;
  for (int j = 0; j <= order; ++j) acc += binomial(order + j, j) * binomial(2 * order + 1, order - j) * std::pow(-x, j);
  return std::pow(x, order + 1) * acc;
}

double CutoffSpec::operator()(double eta_norm, double xi_norm) const {
  const double t = std::abs(eta_norm) / japanese_bracket(xi_norm);
  const double inner = 1.0 - smoothstep((t - eps1) / (eps2 - eps1), order);
  const double outer = smoothstep((std::abs(xi_norm) - eps2) / (1.0 - eps2), order);
  return inner * outer;
}

CutoffSpec make_cutoff(double eps1, double eps2, int order) {
  if (!(eps1 > 0.0 && eps1 < eps2 && eps2 < 1.0)) fail(ErrorKind::InvalidEpsilon, "cut-off needs 0 < eps1 < eps2 < 1");
  if (order < 1) fail(ErrorKind::InvalidParameter, "cut-off profile order must be at least 1");
  return CutoffSpec{eps1, eps2, order};
}

double cutoff_derivative_bound(const CutoffSpec& chi, int rays, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> angle(0.0, 0.5 * 3.141592653589793);
  const std::vector<double> radii = log_grid(1e-2, 1e3, 100);
  double worst = 0.0;
  for (int r = 0; r < rays; ++r) {
    const double a = angle(rng);
    for (double rad : radii) {
      const double eta = rad * std::sin(a);
      const double xi = rad * std::cos(a);
      const double h = 1e-6 * std::max(1.0, rad);
      const double d_eta = (chi(eta + h, xi) - chi(std::max(0.0, eta - h), xi)) / (eta + h - std::max(0.0, eta - h));
      const double d_xi = (chi(eta, xi + h) - chi(eta, std::max(0.0, xi - h))) / (xi + h - std::max(0.0, xi - h));
      worst = std::max(worst, japanese_bracket(xi) * std::max(std::abs(d_eta), std::abs(d_xi)));
    }
  }
  return worst;
}

DiscreteSymbol::DiscreteSymbol(Lattice lattice, int n, double order, SymbolClass tag)
    : lattice_(std::move(lattice)), n_(n), order_(order), tag_(tag) {
  if (n_ <= 0) fail(ErrorKind::InvalidParameter, "symbol size must be positive");
  data_.assign(static_cast<std::size_t>(lattice_.size()) * lattice_.size() * n_ * n_, cplx(0.0));
}

CMat DiscreteSymbol::matrix(int k, int p) const {
  CMat m(n_, n_);
  for (int r = 0; r < n_; ++r) {
    for (int c = 0; c < n_; ++c) m(r, c) = at(k, p, r, c);
  }
  return m;
}

void DiscreteSymbol::set_matrix(int k, int p, const CMat& m) {
  for (int r = 0; r < n_; ++r) {
    for (int c = 0; c < n_; ++c) at(k, p, r, c) = m(r, c);
  }
}

DiscreteSymbol DiscreteSymbol::from_function(const Lattice& lattice, int n, double order, SymbolClass tag,
                                             const std::function<CMat(const RVec&, const RVec&)>& f) {
  DiscreteSymbol s(lattice, n, order, tag);
  for (int k = 0; k < lattice.size(); ++k) {
    const RVec xi = lattice.frequency(k);
    for (int p = 0; p < lattice.size(); ++p) s.set_matrix(k, p, f(lattice.position(p), xi));
  }
  return s;
}

DiscreteSymbol DiscreteSymbol::adjoint() const {
  DiscreteSymbol out(lattice_, n_, order_, tag_);
  for (int k = 0; k < lattice_.size(); ++k) {
    for (int p = 0; p < lattice_.size(); ++p) {
      for (int r = 0; r < n_; ++r) {
        for (int c = 0; c < n_; ++c) out.at(k, p, r, c) = std::conj(at(k, p, c, r));
      }
    }
  }
  return out;
}

DiscreteSymbol DiscreteSymbol::product(const DiscreteSymbol& other) const {
  require_same_lattice(lattice_, other.lattice_);
  if (other.n_ != n_) fail(ErrorKind::DimensionMismatch, "symbol sizes differ");
  DiscreteSymbol out(lattice_, n_, order_ + other.order_, tag_);
  for (int k = 0; k < lattice_.size(); ++k) {
    for (int p = 0; p < lattice_.size(); ++p) out.set_matrix(k, p, matrix(k, p) * other.matrix(k, p));
  }
  return out;
}

DiscreteSymbol DiscreteSymbol::operator-(const DiscreteSymbol& other) const {
  require_same_lattice(lattice_, other.lattice_);
  if (other.n_ != n_) fail(ErrorKind::DimensionMismatch, "symbol sizes differ");
  DiscreteSymbol out(lattice_, n_, std::max(order_, other.order_), tag_);
  for (std::size_t i = 0; i < data_.size(); ++i) out.data_[i] = data_[i] - other.data_[i];
  return out;
}

namespace {

// Calls fn(k, r, c, spectrum) with the x-spectrum of a(., xi_k)_{rc}; fn may modify it
// and the modified spectrum is written back when `write` is set.
template <class Fn>
void for_each_x_spectrum(DiscreteSymbol& a, bool write, Fn&& fn) {
  const Lattice& l = a.lattice();
  const int n = a.n();
  const int size = l.size();
  CVec buf(size);
  CVec spec(size);
  for (int k = 0; k < size; ++k) {
    for (int r = 0; r < n; ++r) {
      for (int c = 0; c < n; ++c) {
        for (int p = 0; p < size; ++p) buf(p) = a.at(k, p, r, c);
        l.forward(buf.data(), spec.data());
        fn(k, r, c, spec);
        if (write) {
          l.backward(spec.data(), buf.data());
          for (int p = 0; p < size; ++p) a.at(k, p, r, c) = buf(p);
        }
      }
    }
  }
}

}  // namespace

DiscreteSymbol smooth_symbol(const DiscreteSymbol& a, const CutoffSpec& chi) {
  DiscreteSymbol out = a;
  const Lattice& l = a.lattice();
  for_each_x_spectrum(out, true, [&](int k, int, int, CVec& spec) {
    const double xi = l.frequency_norm(k);
    for (int q = 0; q < l.size(); ++q) spec(q) *= chi(l.frequency_norm(q), xi);
  });
  out.set_tag(SymbolClass::Smoothed);
  return out;
}

double forbidden_leakage(const DiscreteSymbol& a, const CutoffSpec& chi) {
  DiscreteSymbol copy = a;
  const Lattice& l = a.lattice();
  double inside = 0.0;
  double total = 0.0;
  for_each_x_spectrum(copy, false, [&](int k, int, int, CVec& spec) {
    const double limit = chi.eps2 * japanese_bracket(l.frequency_norm(k));
    for (int q = 0; q < l.size(); ++q) {
      const double v = std::abs(spec(q));
      total = std::max(total, v);
      if (l.frequency_norm(q) >= limit) inside = std::max(inside, v);
    }
  });
  return total > 0.0 ? inside / total : 0.0;
}

GridFunction apply_op(const DiscreteSymbol& a, const GridFunction& f) {
  require_same_lattice(a.lattice(), f.lattice);
  const int n = a.n();
  if (f.components() != n) fail(ErrorKind::GridMismatch, "grid function has the wrong number of components");
  const Lattice& l = a.lattice();
  const CMat fhat = f.spectrum();
  CMat out = CMat::Zero(l.size(), n);
  for (int k = 0; k < l.size(); ++k) {
    if (fhat.row(k).squaredNorm() == 0.0) continue;
    for (int p = 0; p < l.size(); ++p) {
      const cplx ph = l.phase(p, k);
      for (int r = 0; r < n; ++r) {
        cplx acc = 0.0;
        for (int c = 0; c < n; ++c) acc += a.at(k, p, r, c) * fhat(k, c);
        out(p, r) += ph * acc;
      }
    }
  }
  return GridFunction(l, out);
}

GridFunction apply_op_adjoint(const DiscreteSymbol& a, const GridFunction& g) {
  require_same_lattice(a.lattice(), g.lattice);
  const int n = a.n();
  if (g.components() != n) fail(ErrorKind::GridMismatch, "grid function has the wrong number of components");
  const Lattice& l = a.lattice();
  CMat h = CMat::Zero(l.size(), n);
  for (int k = 0; k < l.size(); ++k) {
    for (int p = 0; p < l.size(); ++p) {
      const cplx ph = std::conj(l.phase(p, k));
      for (int c = 0; c < n; ++c) {
        cplx acc = 0.0;
        for (int r = 0; r < n; ++r) acc += std::conj(a.at(k, p, r, c)) * g.values(p, r);
        h(k, c) += ph * acc;
      }
    }
  }
  GridFunction out = GridFunction::from_spectrum(l, h);
  out.values /= static_cast<double>(l.size());
  return out;
}

GridFunction para_op(const DiscreteSymbol& a, const CutoffSpec& chi, const GridFunction& f) {
  return apply_op(smooth_symbol(a, chi), f);
}

CMat assemble_dense(const DiscreteSymbol& a) {
  const Lattice& l = a.lattice();
  const int n = a.n();
  const int size = l.size();
  CMat m(static_cast<Eigen::Index>(size) * n, static_cast<Eigen::Index>(size) * n);
  CVec buf(size);
  CVec row(size);
  for (int p = 0; p < size; ++p) {
    for (int r = 0; r < n; ++r) {
      for (int c = 0; c < n; ++c) {
        // K(p, q) = (1/P) sum_k a(k, p) e^{i x_p xi_k} e^{-i x_q xi_k}: a forward DFT in k.
        for (int k = 0; k < size; ++k) buf(k) = a.at(k, p, r, c) * l.phase(p, k);
        l.forward(buf.data(), row.data());
        for (int q = 0; q < size; ++q) m(p * n + r, q * n + c) = row(q);
      }
    }
  }
  return m;
}

double lp_profile(double t, int order) { return 1.0 - smoothstep((std::abs(t) - 0.5) / 0.5, order); }

std::vector<DiscreteSymbol> lp_decompose(const DiscreteSymbol& a, int order) {
  const Lattice& l = a.lattice();
  const double xmax = l.max_frequency();
  int nu_max = 0;
  while (std::ldexp(1.0, nu_max) < xmax) ++nu_max;
  std::vector<DiscreteSymbol> out;
  const int n = a.n();
  for (int nu = -1; nu <= nu_max; ++nu) {
    DiscreteSymbol part(l, n, a.order(), a.tag());
    for (int k = 0; k < l.size(); ++k) {
      const double x = l.frequency_norm(k);
      const double zeta = nu < 0 ? lp_profile(x, order)
                                 : lp_profile(std::ldexp(x, -(nu + 1)), order) - lp_profile(std::ldexp(x, -nu), order);
      if (zeta == 0.0) continue;
      for (int p = 0; p < l.size(); ++p) {
        for (int r = 0; r < n; ++r) {
          for (int c = 0; c < n; ++c) part.at(k, p, r, c) = a.at(k, p, r, c) * zeta;
        }
      }
    }
    out.push_back(std::move(part));
  }
  return out;
}

namespace {

NormEstimate power_iterate(const std::function<CVec(const CVec&)>& first, const std::function<CVec(const CVec&)>& second,
                           int dim, unsigned seed, int max_iter, double tol) {
  std::mt19937 rng(seed);
  CVec x = random_vector(dim, rng);
  x.normalize();
  NormEstimate est;
  double prev = 0.0;
  for (int it = 1; it <= max_iter; ++it) {
    const CVec y = second(first(x));
    const double lambda = y.norm();
    if (!std::isfinite(lambda)) fail(ErrorKind::PowerIterationDivergence, "power iteration produced a non-finite value");
    est.iterations = it;
    est.norm = std::sqrt(lambda);
    if (lambda == 0.0) {
      est.converged = true;
      return est;
    }
    x = y / lambda;
    if (it > 1 && std::abs(lambda - prev) <= tol * lambda) {
      est.converged = true;
      return est;
    }
    prev = lambda;
  }
  return est;
}

}  // namespace

NormEstimate power_iteration_norm(const LinearMap& a, unsigned seed, int max_iter, double tol) {
  return power_iterate(a.apply, a.adjoint, a.dim, seed, max_iter, tol);
}

NormEstimate power_iteration_norm_adjoint(const LinearMap& a, unsigned seed, int max_iter, double tol) {
  return power_iterate(a.adjoint, a.apply, a.dim, seed, max_iter, tol);
}

LinearMap weighted_map(const Lattice& lattice, int n, const LinearMap& e, double l, double shift) {
  LinearMap out;
  out.dim = e.dim;
  auto lam = [lattice, n](const CVec& v, double s) { return flatten(bessel_potential(unflatten(lattice, n, v), s)); };
  out.apply = [=](const CVec& v) { return lam(e.apply(lam(v, -(l + shift))), l); };
  out.adjoint = [=](const CVec& v) { return lam(e.adjoint(lam(v, l)), -(l + shift)); };
  return out;
}

DiscreteSymbol compose_symbol(const SymbolFamily& f, const GridFunction& u, int n, double order) {
  const Lattice& l = u.lattice;
  DiscreteSymbol s(l, n, order, SymbolClass::GammaK);
  for (int p = 0; p < l.size(); ++p) {
    const RVec y = u.values.row(p).real().transpose();
    for (int k = 0; k < l.size(); ++k) s.set_matrix(k, p, f(y, l.frequency(k)));
  }
  return s;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) fail(ErrorKind::DegenerateFit, "slope fit needs at least two points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double m = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0 && y[i] > 0.0)) fail(ErrorKind::DegenerateFit, "log-log fit needs positive values");
    const double lx = std::log(x[i]);
    const double ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

namespace {

// Maps on flattened vectors for a smoothed symbol.
LinearMap op_map(const DiscreteSymbol& smoothed) {
  const Lattice l = smoothed.lattice();
  const int n = smoothed.n();
  LinearMap m;
  m.dim = l.size() * n;
  m.apply = [smoothed, l, n](const CVec& v) { return flatten(apply_op(smoothed, unflatten(l, n, v))); };
  m.adjoint = [smoothed, l, n](const CVec& v) { return flatten(apply_op_adjoint(smoothed, unflatten(l, n, v))); };
  return m;
}

LinearMap difference(const LinearMap& a, const LinearMap& b) {
  return {a.dim, [a, b](const CVec& v) -> CVec { return a.apply(v) - b.apply(v); },
          [a, b](const CVec& v) -> CVec { return a.adjoint(v) - b.adjoint(v); }};
}

LinearMap compose(const LinearMap& a, const LinearMap& b) {  // a after b
  return {a.dim, [a, b](const CVec& v) { return a.apply(b.apply(v)); },
          [a, b](const CVec& v) { return b.adjoint(a.adjoint(v)); }};
}

LinearMap adjoint_of(const LinearMap& a) { return {a.dim, a.adjoint, a.apply}; }

double map_norm(const LinearMap& m, bool dense, unsigned seed) {
  if (dense) return top_singular_value(dense_matrix(m));
  return power_iteration_norm(m, seed).norm;
}

GridFunction scaled(const GridFunction& u, double s) {
  GridFunction out = u;
  out.values *= s;
  return out;
}

}  // namespace

ScalingReport check_adjoint_product_errors(const SymbolFamily& f, double f_order, const SymbolFamily& g,
                                           double g_order, int n, const CutoffSpec& chi, const GridFunction& u_base,
                                           const ScalingSettings& settings) {
  const Lattice& l = u_base.lattice;
  auto error_maps = [&](const GridFunction& u) {
    const DiscreteSymbol fu = compose_symbol(f, u, n, f_order);
    const DiscreteSymbol gu = compose_symbol(g, u, n, g_order);
    const LinearMap op_f = op_map(smooth_symbol(fu, chi));
    const LinearMap op_fstar = op_map(smooth_symbol(fu.adjoint(), chi));
    const LinearMap op_g = op_map(smooth_symbol(gu, chi));
    const LinearMap op_gf = op_map(smooth_symbol(gu.product(fu), chi));
    return std::make_pair(difference(adjoint_of(op_f), op_fstar), difference(compose(op_g, op_f), op_gf));
  };
  const auto [adj0, prod0] = error_maps(scaled(u_base, 0.0));
  const double base_norm = sobolev_norm(u_base, settings.sobolev_index);
  ScalingReport report;
  for (double s : settings.scales) {
    const auto [adj, prod] = error_maps(scaled(u_base, s));
    const LinearMap adj_w = weighted_map(l, n, difference(adj, adj0), settings.l, f_order - 1.0);
    const LinearMap prod_w = weighted_map(l, n, difference(prod, prod0), settings.l, f_order + g_order - 1.0);
    report.amplitudes.push_back(s * base_norm);
    report.adjoint_errors.push_back(map_norm(adj_w, settings.dense, settings.seed));
    report.product_errors.push_back(map_norm(prod_w, settings.dense, settings.seed + 1));
  }
  // Errors that vanish at every amplitude decay faster than any power.
  auto slope = [&](const std::vector<double>& errors) {
    if (std::all_of(errors.begin(), errors.end(), [](double e) { return e == 0.0; })) {
      return std::numeric_limits<double>::infinity();
    }
    return loglog_slope(report.amplitudes, errors);
  };
  report.adjoint_slope = slope(report.adjoint_errors);
  report.product_slope = slope(report.product_errors);
  return report;
}

GardingReport check_garding(const SymbolFamily& f, double order, int n, const CutoffSpec& chi,
                            const GridFunction& u_base, const GardingSettings& settings) {
  const Lattice& l = u_base.lattice;
  // Pointwise nonnegativity for |xi| > radius on the sampled states.
  for (double s : settings.scales) {
    for (int p = 0; p < l.size(); ++p) {
      const RVec y = (s * u_base.values.row(p).real()).transpose();
      for (int k = 0; k < l.size(); ++k) {
        if (l.frequency_norm(k) <= settings.precheck_radius) continue;
        const CMat fm = f(y, l.frequency(k));
        const RVec ev = hermitian_eigenvalues(fm + fm.adjoint());
        if (ev(0) < -1e-12 * std::max(1.0, fm.norm())) fail(ErrorKind::PrecheckFailed, "symbol is not nonnegative");
      }
    }
  }
  const double sigma = 0.5 * (order - 1.0);
  const bool exact = settings.exact && l.d() == 1 && l.n_per_axis() <= 128;
  GardingReport report;
  report.exact = exact;
  const double base_norm = sobolev_norm(u_base, settings.s + 2.0);
  for (double s : settings.scales) {
    const LinearMap op = op_map(smooth_symbol(compose_symbol(f, scaled(u_base, s), n, order), chi));
    const LinearMap sym{op.dim, [op](const CVec& v) -> CVec { return op.apply(v) + op.adjoint(v); },
                        [op](const CVec& v) -> CVec { return op.apply(v) + op.adjoint(v); }};
    const LinearMap weighted = weighted_map(l, n, sym, -sigma, 2.0 * sigma);
    double min_q = std::numeric_limits<double>::infinity();
    if (exact) {
      const CMat m = dense_matrix(weighted);
      min_q = hermitian_eigenvalues(m).minCoeff();
    } else {
      std::mt19937 rng(settings.seed);
      for (int i = 0; i < settings.samples; ++i) {
        const CVec v = random_vector(weighted.dim, rng);
        min_q = std::min(min_q, (v.dot(weighted.apply(v))).real() / v.squaredNorm());
      }
    }
    report.amplitudes.push_back(s * base_norm);
    report.deficits.push_back(std::max(0.0, -min_q));
  }
  bool all_positive = true;
  for (double d : report.deficits) all_positive = all_positive && d > 0.0;
  if (all_positive) {
    report.exponent = loglog_slope(report.amplitudes, report.deficits);
  } else {
    report.exponent = std::numeric_limits<double>::infinity();  // deficit vanishes somewhere: no growth at all
  }
  report.constant_exponent = report.exponent - 0.5;
  return report;
}

}  // namespace hypdiss
