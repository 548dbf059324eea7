#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include "config.hpp"
#include "matrix.hpp"

namespace lueders {

inline constexpr int kJacobiSweepBudget = 30;
inline constexpr double kJacobiOffDiagonalThreshold = 1e-13;

struct HermitianEigensystem {
  std::vector<double> eigenvalues;  // ascending
  ComplexMatrix eigenvectors;       // columns
};

namespace detail {

// Unitary 2x2 rotation G = [[g11, g12], [g21, g22]] with G* B G diagonal for
// the Hermitian block B = [[a, c], [conj(c), b]].
struct Rotation {
  cplx g11, g12, g21, g22;
};

inline Rotation jacobi_rotation(double a, double b, cplx c) {
  const double r = std::abs(c);
  const cplx phase = c / r;  // e^{i phi}
  const double theta = (b - a) / (2.0 * r);
  double t;
  if (std::abs(theta) > 1e150) {
    t = 0.5 / theta;
  } else {
    t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(1.0 + theta * theta));
  }
  const double cs = 1.0 / std::sqrt(1.0 + t * t);
  const double sn = t * cs;
  const cplx conj_phase = std::conj(phase);
  return {cs, sn, -sn * conj_phase, cs * conj_phase};
}

inline double off_diagonal_norm(const ComplexMatrix& a) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j)
      if (i != j) s += std::norm(a(i, j));
  return std::sqrt(s);
}

inline double hermitian_defect(const ComplexMatrix& m) {
  double s = 0.0;
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) s += std::norm(m(i, j) - std::conj(m(j, i)));
  return std::sqrt(s);
}

}  // namespace detail

inline bool is_hermitian(const ComplexMatrix& m, double tol) {
  return m.is_square() && detail::hermitian_defect(m) <= tol * m.frobenius_norm();
}

inline ComplexMatrix hermitian_part(const ComplexMatrix& m) {
  ComplexMatrix h(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) h(i, j) = 0.5 * (m(i, j) + std::conj(m(j, i)));
  return h;
}

/// Cyclic complex Jacobi. Eigenvalues ascending; eigenvectors are the columns
/// of a unitary matrix.
inline HermitianEigensystem hermitian_eigendecompose(const ComplexMatrix& m, const Tolerances& tol = {}) {
  if (!m.is_square()) throw Error(ErrorCode::NotSquare, "eigendecomposition needs a square matrix");
  if (!m.is_finite()) throw Error(ErrorCode::InvalidArgument, "matrix has non-finite entries");
  if (!is_hermitian(m, tol.herm)) {
    throw Error(ErrorCode::NotHermitian, "asymmetry " + std::to_string(detail::hermitian_defect(m)));
  }
  const std::size_t n = m.rows();
  ComplexMatrix a = hermitian_part(m);
  ComplexMatrix u = ComplexMatrix::identity(n);
  const double threshold = kJacobiOffDiagonalThreshold * m.frobenius_norm();

  int sweep = 0;
  while (detail::off_diagonal_norm(a) > threshold) {
    if (sweep++ == kJacobiSweepBudget) {
      throw Error(ErrorCode::NoConvergence, "Jacobi sweep budget exhausted");
    }
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const cplx apq = a(p, q);
        if (std::abs(apq) == 0.0) continue;
        const auto g = detail::jacobi_rotation(a(p, p).real(), a(q, q).real(), apq);
        for (std::size_t k = 0; k < n; ++k) {
          const cplx akp = a(k, p);
          const cplx akq = a(k, q);
          a(k, p) = akp * g.g11 + akq * g.g21;
          a(k, q) = akp * g.g12 + akq * g.g22;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const cplx apk = a(p, k);
          const cplx aqk = a(q, k);
          a(p, k) = std::conj(g.g11) * apk + std::conj(g.g21) * aqk;
          a(q, k) = std::conj(g.g12) * apk + std::conj(g.g22) * aqk;
        }
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        a(p, p) = a(p, p).real();
        a(q, q) = a(q, q).real();
        for (std::size_t k = 0; k < n; ++k) {
          const cplx ukp = u(k, p);
          const cplx ukq = u(k, q);
          u(k, p) = ukp * g.g11 + ukq * g.g21;
          u(k, q) = ukp * g.g12 + ukq * g.g22;
        }
      }
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return a(i, i).real() < a(j, j).real(); });
  HermitianEigensystem es{std::vector<double>(n), ComplexMatrix(n, n)};
  for (std::size_t c = 0; c < n; ++c) {
    es.eigenvalues[c] = a(order[c], order[c]).real();
    for (std::size_t r = 0; r < n; ++r) es.eigenvectors(r, c) = u(r, order[c]);
  }
  return es;
}

/// U diag(values) U*.
inline ComplexMatrix reconstruct(const ComplexMatrix& u, std::span<const double> values) {
  const std::size_t n = u.rows();
  ComplexMatrix r(n, n);
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (values[k] == 0.0) continue;
    for (std::size_t i = 0; i < n; ++i) {
      const cplx uik = u(i, k) * values[k];
      for (std::size_t j = 0; j < n; ++j) r(i, j) += uik * std::conj(u(j, k));
    }
  }
  return r;
}

/// Sum of u_k u_k* over the eigenvector columns selected by `keep(eigenvalue)`.
template <typename Predicate>
ComplexMatrix spectral_projector(const HermitianEigensystem& es, Predicate keep) {
  std::vector<double> mask(es.eigenvalues.size());
  for (std::size_t k = 0; k < mask.size(); ++k) mask[k] = keep(es.eigenvalues[k]) ? 1.0 : 0.0;
  return reconstruct(es.eigenvectors, mask);
}

/// Largest singular value.
inline double operator_norm(const ComplexMatrix& m) {
  if (m.empty()) return 0.0;
  const ComplexMatrix gram = m.rows() >= m.cols() ? m.adjoint() * m : m * m.adjoint();
  const auto es = hermitian_eigendecompose(hermitian_part(gram));
  return std::sqrt(std::max(0.0, es.eigenvalues.back()));
}

struct SingularValueSystem {
  std::vector<double> singular_values;  // one per column of the input, unordered
  ComplexMatrix right_vectors;          // columns, unitary
};

/// One-sided (Hestenes) Jacobi: rotates column pairs of M until mutually
/// orthogonal; the accumulated rotation holds the right singular vectors.
inline SingularValueSystem one_sided_jacobi(const ComplexMatrix& m) {
  const std::size_t cols = m.cols();
  const std::size_t rows = m.rows();
  std::vector<Vector> a(cols, Vector(rows));
  for (std::size_t j = 0; j < cols; ++j)
    for (std::size_t i = 0; i < rows; ++i) a[j][i] = m(i, j);
  std::vector<Vector> v(cols, Vector(cols));
  for (std::size_t j = 0; j < cols; ++j) v[j][j] = 1.0;

  const double eps = std::numeric_limits<double>::epsilon() * std::sqrt(static_cast<double>(std::max<std::size_t>(rows, 1)));
  bool rotated = true;
  int sweep = 0;
  while (rotated) {
    if (sweep++ == kJacobiSweepBudget) {
      throw Error(ErrorCode::NoConvergence, "one-sided Jacobi sweep budget exhausted");
    }
    rotated = false;
    for (std::size_t p = 0; p + 1 < cols; ++p) {
      for (std::size_t q = p + 1; q < cols; ++q) {
        const double alpha = std::real(dot(a[p], a[p]));
        const double beta = std::real(dot(a[q], a[q]));
        const cplx gamma = dot(a[p], a[q]);
        if (alpha == 0.0 || beta == 0.0 || std::abs(gamma) <= eps * std::sqrt(alpha * beta)) continue;
        rotated = true;
        const auto g = detail::jacobi_rotation(alpha, beta, gamma);
        for (std::size_t k = 0; k < rows; ++k) {
          const cplx xp = a[p][k];
          const cplx xq = a[q][k];
          a[p][k] = xp * g.g11 + xq * g.g21;
          a[q][k] = xp * g.g12 + xq * g.g22;
        }
        for (std::size_t k = 0; k < cols; ++k) {
          const cplx vp = v[p][k];
          const cplx vq = v[q][k];
          v[p][k] = vp * g.g11 + vq * g.g21;
          v[q][k] = vp * g.g12 + vq * g.g22;
        }
      }
    }
  }
  SingularValueSystem s{std::vector<double>(cols), ComplexMatrix::from_columns(cols, v)};
  for (std::size_t j = 0; j < cols; ++j) s.singular_values[j] = norm2(a[j]);
  return s;
}

/// Orthonormal basis of {x : ||Mx|| <= tol ||M|| ||x||}.
inline std::vector<Vector> nullspace(const ComplexMatrix& m, double tol = Tolerances{}.nullspace) {
  if (!(tol > 0.0)) throw Error(ErrorCode::InvalidArgument, "nullspace tolerance must be positive");
  ComplexMatrix work = m;
  if (m.rows() < m.cols()) {
    // pad to square so every right singular vector is produced
    work = ComplexMatrix(m.cols(), m.cols());
    for (std::size_t i = 0; i < m.rows(); ++i)
      for (std::size_t j = 0; j < m.cols(); ++j) work(i, j) = m(i, j);
  }
  const auto svd = one_sided_jacobi(work);
  const double largest =
      svd.singular_values.empty() ? 0.0 : *std::max_element(svd.singular_values.begin(), svd.singular_values.end());
  std::vector<Vector> basis;
  for (std::size_t j = 0; j < svd.singular_values.size(); ++j) {
    if (svd.singular_values[j] <= tol * largest) basis.push_back(svd.right_vectors.column(j));
  }
  return basis;
}

inline ComplexMatrix sqrt_psd(const ComplexMatrix& m, const Tolerances& tol = {}) {
  const auto es = hermitian_eigendecompose(m, tol);
  std::vector<double> roots(es.eigenvalues.size());
  for (std::size_t k = 0; k < roots.size(); ++k) {
    const double lambda = es.eigenvalues[k];
    if (lambda < -tol.psd) throw Error(ErrorCode::NotPositive, "eigenvalue " + std::to_string(lambda));
    roots[k] = std::sqrt(std::max(0.0, lambda));
  }
  return hermitian_part(reconstruct(es.eigenvectors, roots));
}

/// Pivoted modified Gram-Schmidt. Always takes the candidate with the largest
/// remaining residual; stops once that residual falls to `drop` or below.
inline std::vector<Vector> orthonormalize(std::vector<Vector> candidates, double drop) {
  std::vector<Vector> basis;
  std::vector<bool> used(candidates.size(), false);
  while (true) {
    std::size_t best = candidates.size();
    double best_norm = drop;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      if (used[i]) continue;
      const double nrm = norm2(candidates[i]);
      if (nrm > best_norm) {
        best_norm = nrm;
        best = i;
      }
    }
    if (best == candidates.size()) break;
    used[best] = true;
    Vector q = candidates[best];
    for (auto& e : q) e /= best_norm;
    // second pass restores orthogonality lost to cancellation
    for (const auto& b : basis) {
      const cplx c = dot(b, q);
      for (std::size_t k = 0; k < q.size(); ++k) q[k] -= c * b[k];
    }
    const double qn = norm2(q);
    for (auto& e : q) e /= qn;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      if (used[i]) continue;
      const cplx c = dot(q, candidates[i]);
      for (std::size_t k = 0; k < q.size(); ++k) candidates[i][k] -= c * q[k];
    }
    basis.push_back(std::move(q));
  }
  return basis;
}

/// Linear subspace of d x d matrices with a Hilbert-Schmidt orthonormal basis.
struct OperatorSubspace {
  std::size_t dim_hilbert = 0;
  std::vector<ComplexMatrix> basis;

  std::size_t dimension() const noexcept { return basis.size(); }

  /// Wraps column-stacked vectors that are already orthonormal.
  static OperatorSubspace from_vectors(std::size_t d, std::span<const Vector> vectors) {
    OperatorSubspace s{d, {}};
    s.basis.reserve(vectors.size());
    for (const auto& v : vectors) s.basis.push_back(unvec(v, d, d));
    return s;
  }

  /// Orthonormalizes an arbitrary spanning set, dropping residuals <= drop.
  static OperatorSubspace span_of(std::size_t d, std::span<const ComplexMatrix> spanning, double drop = 1e-10) {
    std::vector<Vector> vs;
    vs.reserve(spanning.size());
    for (const auto& m : spanning) vs.push_back(vec(m));
    const auto on = orthonormalize(std::move(vs), drop);
    return from_vectors(d, on);
  }
};

/// d^2 x d^2 orthogonal projector onto S in column-stacked coordinates.
inline ComplexMatrix subspace_projector(const OperatorSubspace& s) {
  const std::size_t n = s.dim_hilbert * s.dim_hilbert;
  ComplexMatrix p(n, n);
  for (const auto& b : s.basis) {
    const Vector v = vec(b);
    for (std::size_t i = 0; i < n; ++i) {
      if (v[i] == cplx{}) continue;
      for (std::size_t j = 0; j < n; ++j) p(i, j) += v[i] * std::conj(v[j]);
    }
  }
  return p;
}

struct SubspaceComparison {
  bool equal = false;
  std::size_t first_dim = 0;
  std::size_t second_dim = 0;
  double distance = 0.0;  // ||proj(S1) - proj(S2)||_F
};

inline SubspaceComparison subspaces_equal(const OperatorSubspace& s1, const OperatorSubspace& s2,
                                          double tol = Tolerances{}.subspace) {
  if (s1.dim_hilbert != s2.dim_hilbert) {
    throw Error(ErrorCode::DimensionMismatch, "subspaces live in different operator spaces");
  }
  const double distance = (subspace_projector(s1) - subspace_projector(s2)).frobenius_norm();
  return {distance <= tol, s1.dimension(), s2.dimension(), distance};
}

}  // namespace lueders
