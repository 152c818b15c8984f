#include "hypdiss/eigstructure.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "hypdiss/error.hpp"

namespace hypdiss {

std::vector<int> EigenStructure::multiplicities() const {
  std::vector<int> m;
  for (const auto& c : clusters) m.push_back(c.multiplicity);
  return m;
}

bool EigenStructure::all_semi_simple() const {
  return std::all_of(clusters.begin(), clusters.end(), [](const EigenCluster& c) { return c.semi_simple; });
}

double EigenStructure::max_abs_imag() const {
  double m = 0.0;
  for (const auto& c : clusters) m = std::max(m, std::abs(c.value.imag()));
  return m;
}

double EigenStructure::max_abs_real() const {
  double m = 0.0;
  for (const auto& c : clusters) m = std::max(m, std::abs(c.value.real()));
  return m;
}

namespace {

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  }
  void join(int a, int b) { parent[find(a)] = find(b); }
};

// Maps union-find roots to consecutive labels ordered by `less` on group representatives.
template <class Less>
std::vector<int> canonical_labels(UnionFind& uf, int n, Less less, int& group_count) {
  std::vector<int> roots;
  for (int i = 0; i < n; ++i) {
    if (uf.find(i) == i) roots.push_back(i);
  }
  std::sort(roots.begin(), roots.end(), less);
  std::vector<int> label(n);
  for (int i = 0; i < n; ++i) {
    label[i] = static_cast<int>(std::find(roots.begin(), roots.end(), uf.find(i)) - roots.begin());
  }
  group_count = static_cast<int>(roots.size());
  return label;
}

struct GroupedSchur {
  BlockDiagonalization blocks;
  std::vector<int> sizes;
};

GroupedSchur group_and_split(SchurForm schur, std::vector<int> labels, int group_count) {
  reorder_schur(schur, labels);
  std::vector<int> sizes(group_count, 0);
  for (int l : labels) ++sizes[l];
  return {block_diagonalize(schur, sizes), sizes};
}

}  // namespace

EigenStructure eigstructure(const CMat& matrix, double cluster_tolerance) {
  if (!matrix.allFinite()) fail(ErrorKind::InvalidParameter, "eigstructure needs a finite matrix");
  const int n = static_cast<int>(matrix.rows());
  EigenStructure es;
  es.cluster_tolerance = cluster_tolerance;
  if (n == 0) return es;

  const SchurForm schur = complex_schur(matrix);
  const CVec ev = schur.triangular.diagonal();
  es.spectral_radius = ev.cwiseAbs().maxCoeff();
  const double tol = cluster_tolerance * (1.0 + es.spectral_radius);
  es.absolute_tolerance = tol;

  UnionFind uf(n);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (std::abs(ev(i) - ev(j)) <= tol) uf.join(i, j);
    }
  }
  std::vector<cplx> sum(n, 0.0);
  std::vector<int> count(n, 0);
  for (int i = 0; i < n; ++i) {
    sum[uf.find(i)] += ev(i);
    ++count[uf.find(i)];
  }
  auto mean = [&](int root) { return sum[root] / static_cast<double>(count[root]); };
  int groups = 0;
  const std::vector<int> labels = canonical_labels(
      uf, n,
      [&](int a, int b) {
        const cplx ma = mean(a);
        const cplx mb = mean(b);
        if (ma.real() != mb.real()) return ma.real() < mb.real();
        return ma.imag() < mb.imag();
      },
      groups);

  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (labels[i] != labels[j] && std::abs(ev(i) - ev(j)) <= 10.0 * tol) {
        fail(ErrorKind::ClusterAmbiguity, "eigenvalue clusters closer than 10x the clustering tolerance");
      }
    }
  }

  const GroupedSchur split = group_and_split(schur, labels, groups);
  const BlockDiagonalization& bd = split.blocks;
  for (int g = 0; g < groups; ++g) {
    const Eigen::Index o = bd.offsets[g];
    const Eigen::Index s = split.sizes[g];
    EigenCluster c;
    c.multiplicity = static_cast<int>(s);
    const CMat& t = bd.blocks[g];
    c.value = t.diagonal().mean();
    CMat shifted = t;
    shifted.diagonal().array() -= c.value;
    c.semi_simple = shifted.norm() <= 10.0 * tol;
    c.projection = bd.basis.middleCols(o, s) * bd.basis_inverse.middleRows(o, s);
    c.basis = orthonormal_columns(bd.basis.middleCols(o, s));
    es.clusters.push_back(std::move(c));
  }
  return es;
}

Symmetrizer build_symmetrizer(const EigenStructure& es, const CMat& k) {
  const Eigen::Index n = k.rows();
  if (!es.all_semi_simple()) fail(ErrorKind::NotSymmetrizable, "spectrum has a defective eigenvalue");
  if (es.max_abs_imag() > es.absolute_tolerance) fail(ErrorKind::NotSymmetrizable, "spectrum is not real");
  CMat v(n, n);
  Eigen::Index col = 0;
  for (const auto& c : es.clusters) {
    v.middleCols(col, c.multiplicity) = c.basis;
    col += c.multiplicity;
  }
  const CMat v_inv = v.partialPivLu().inverse();
  Symmetrizer out;
  out.S = hermitian_part(v_inv.adjoint() * v_inv);
  const RVec ev = hermitian_eigenvalues(out.S);
  out.lambda_min = ev(0);
  out.condition = ev(ev.size() - 1) / ev(0);
  if (!(out.lambda_min > 0.0) || !std::isfinite(out.condition)) fail(ErrorKind::NotSymmetrizable, "symmetrizer is not positive definite");
  return out;
}

Symmetrizer build_symmetrizer(const CMat& k, double cluster_tolerance) {
  return build_symmetrizer(eigstructure(k, cluster_tolerance), k);
}

RateBalancedLyapunov rate_balanced_lyapunov(const CMat& m, double group_ratio) {
  const int n = static_cast<int>(m.rows());
  const SchurForm schur = complex_schur(m);
  const CVec ev = schur.triangular.diagonal();
  if (ev.real().maxCoeff() >= 0.0) fail(ErrorKind::LyapunovSolveFailure, "matrix is not Hurwitz");

  UnionFind uf(n);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (std::abs(ev(i) - ev(j)) <= group_ratio * std::min(std::abs(ev(i).real()), std::abs(ev(j).real()))) {
        uf.join(i, j);
      }
    }
  }
  int groups = 0;
  const std::vector<int> labels = canonical_labels(
      uf, n, [&](int a, int b) { return a < b; }, groups);
  const GroupedSchur split = group_and_split(schur, labels, groups);
  const BlockDiagonalization& bd = split.blocks;

  CMat pb = CMat::Zero(n, n);
  for (int g = 0; g < groups; ++g) {
    const CMat& block = bd.blocks[g];
    const double alpha = block.diagonal().real().maxCoeff();
    const Eigen::Index s = split.sizes[g];
    pb.block(bd.offsets[g], bd.offsets[g], s, s) = solve_lyapunov(block, std::abs(alpha) * CMat::Identity(s, s));
  }
  // Positive weights per block keep every block inequality, so the certified rate is
  // unchanged; pick them to minimize cond(P) by a log-scale coordinate search.
  auto assemble = [&](const std::vector<double>& w) {
    CMat scaled = pb;
    for (int g = 0; g < groups; ++g) {
      const Eigen::Index s = split.sizes[g];
      scaled.block(bd.offsets[g], bd.offsets[g], s, s) *= w[g];
    }
    return CMat(hermitian_part(bd.basis_inverse.adjoint() * scaled * bd.basis_inverse));
  };
  std::vector<double> weights(groups, 1.0);
  for (int g = 0; g < groups; ++g) {
    weights[g] = bd.basis.middleCols(bd.offsets[g], split.sizes[g]).squaredNorm() / split.sizes[g];
  }
  double best = hermitian_condition(assemble(weights));
  for (double step = 8.0; groups > 1 && step > 1.01; step = std::sqrt(step)) {
    for (bool improved = true; improved;) {
      improved = false;
      for (int g = 1; g < groups; ++g) {
        for (double f : {step, 1.0 / step}) {
          std::vector<double> trial = weights;
          trial[g] *= f;
          const double c = hermitian_condition(assemble(trial));
          if (c < best * (1.0 - 1e-9)) {
            best = c;
            weights = std::move(trial);
            improved = true;
          }
        }
      }
    }
  }
  RateBalancedLyapunov out;
  out.P = assemble(weights);
  out.condition = hermitian_condition(out.P);
  out.certified_rate = -0.5 * pencil_max_eigenvalue(out.P * m + m.adjoint() * out.P, out.P);
  return out;
}

}  // namespace hypdiss
