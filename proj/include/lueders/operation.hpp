#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <mutex>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "config.hpp"
#include "effects.hpp"
#include "linalg.hpp"
#include "matrix.hpp"
#include "random.hpp"

namespace lueders {

/// The map B -> sum_i E_i B E_i. The d^2 x d^2 superoperator is built on first
/// request and shared (read-only) between copies.
class LuedersOperation {
 public:
  explicit LuedersOperation(EffectSet set) : set_(std::move(set)), cache_(std::make_shared<Cache>()) {}

  const EffectSet& effects() const noexcept { return set_; }
  std::size_t dim() const noexcept { return set_.dim(); }

  ComplexMatrix apply(const ComplexMatrix& b) const {
    const std::size_t d = dim();
    if (b.rows() != d || b.cols() != d) {
      throw Error(ErrorCode::DimensionMismatch, "operand must be " + std::to_string(d) + "x" + std::to_string(d));
    }
    ComplexMatrix out(d, d);
    for (const auto& e : set_.effects()) out += (e.matrix() * b) * e.matrix();
    return out;
  }

  /// sum_i transpose(E_i) (x) E_i, acting on column-stacked operators.
  const ComplexMatrix& superoperator() const {
    std::call_once(cache_->once, [this] {
      const std::size_t d = dim();
      ComplexMatrix s(d * d, d * d);
      for (const auto& e : set_.effects()) s += kron(e.matrix().transpose(), e.matrix());
      cache_->superop = std::move(s);
    });
    return cache_->superop;
  }

 private:
  struct Cache {
    std::once_flag once;
    ComplexMatrix superop;
  };

  EffectSet set_;
  std::shared_ptr<Cache> cache_;
};

inline ComplexMatrix apply(const LuedersOperation& op, const ComplexMatrix& b) { return op.apply(b); }

inline const ComplexMatrix& superoperator_matrix(const LuedersOperation& op) { return op.superoperator(); }

/// {B : Phi(B) = B} as the nullspace of (superoperator - I).
inline OperatorSubspace fixed_point_space(const LuedersOperation& op, double tol = Tolerances{}.nullspace) {
  const std::size_t d = op.dim();
  const ComplexMatrix shifted = op.superoperator() - ComplexMatrix::identity(d * d);
  return OperatorSubspace::from_vectors(d, nullspace(shifted, tol));
}

/// Stacked map vec(B) -> [vec(E_1 B - B E_1); ...; vec(E_n B - B E_n)].
inline ComplexMatrix commutator_map(const EffectSet& set) {
  const std::size_t d = set.dim();
  const std::size_t dd = d * d;
  const ComplexMatrix id = ComplexMatrix::identity(d);
  ComplexMatrix stacked(set.size() * dd, dd);
  for (std::size_t i = 0; i < set.size(); ++i) {
    const ComplexMatrix& e = set[i].matrix();
    const ComplexMatrix block = kron(id, e) - kron(e.transpose(), id);
    for (std::size_t r = 0; r < dd; ++r)
      for (std::size_t c = 0; c < dd; ++c) stacked(i * dd + r, c) = block(r, c);
  }
  return stacked;
}

inline OperatorSubspace commutant(const EffectSet& set, double tol = Tolerances{}.nullspace) {
  return OperatorSubspace::from_vectors(set.dim(), nullspace(commutator_map(set), tol));
}

// ---------------------------------------------------------------------------
// Joint eigenspaces of a commuting family

struct JointBlock {
  std::vector<double> eigenvalues;  // one per effect
  ComplexMatrix basis;              // d x dim, orthonormal columns
  std::size_t dim() const noexcept { return basis.cols(); }
};

struct JointEigenstructure {
  std::vector<JointBlock> blocks;

  /// sum_j d_j^2: the commutant is a direct sum of full matrix blocks.
  std::size_t commutant_dimension() const {
    std::size_t s = 0;
    for (const auto& b : blocks) s += b.dim() * b.dim();
    return s;
  }
};

/// Refines the whole space one effect at a time, splitting each block by the
/// eigenvalue clusters of the effect compressed onto it.
inline JointEigenstructure joint_eigenspaces(const EffectSet& set, const Tolerances& tol = {}) {
  if (!set.commuting()) throw Error(ErrorCode::NotCommuting, "joint eigenspaces need a commuting family");
  const std::size_t d = set.dim();
  std::vector<JointBlock> blocks{{{}, ComplexMatrix::identity(d)}};
  for (const auto& effect : set.effects()) {
    std::vector<JointBlock> refined;
    for (const auto& block : blocks) {
      const ComplexMatrix compressed = hermitian_part(block.basis.adjoint() * effect.matrix() * block.basis);
      const auto es = hermitian_eigendecompose(compressed, tol);
      std::size_t start = 0;
      const std::size_t k = es.eigenvalues.size();
      for (std::size_t end = 1; end <= k; ++end) {
        if (end < k && es.eigenvalues[end] - es.eigenvalues[end - 1] <= tol.cluster) continue;
        ComplexMatrix local(k, end - start);
        double mean = 0.0;
        for (std::size_t c = start; c < end; ++c) {
          mean += es.eigenvalues[c];
          for (std::size_t r = 0; r < k; ++r) local(r, c - start) = es.eigenvectors(r, c);
        }
        JointBlock child{block.eigenvalues, block.basis * local};
        child.eigenvalues.push_back(mean / static_cast<double>(end - start));
        refined.push_back(std::move(child));
        start = end;
      }
    }
    blocks = std::move(refined);
  }
  return {std::move(blocks)};
}

// ---------------------------------------------------------------------------
// Fixed-point claims

enum class FixedPointClaim {
  Commutant,           // Resolution: fixed points = commutant
  ProjectedCommutant,  // Subnormalized: fixed points = P^F{1} . commutant
};

/// Identifier used in reports and JSON ("3.1" / "3.2").
constexpr std::string_view claim_id(FixedPointClaim c) {
  return c == FixedPointClaim::Commutant ? "3.1" : "3.2";
}

struct TheoremReport {
  FixedPointClaim theorem = FixedPointClaim::Commutant;
  std::size_t fixed_space_dim = 0;
  std::size_t target_space_dim = 0;
  double projector_distance = 0.0;
  bool verdict = false;
  std::string details;
};

namespace detail {

inline TheoremReport compare_fixed_space(FixedPointClaim claim, const OperatorSubspace& fixed,
                                         const OperatorSubspace& target, double tol, std::string details) {
  const auto cmp = subspaces_equal(fixed, target, tol);
  TheoremReport r;
  r.theorem = claim;
  r.fixed_space_dim = cmp.first_dim;
  r.target_space_dim = cmp.second_dim;
  r.projector_distance = cmp.distance;
  r.verdict = cmp.equal && cmp.first_dim == cmp.second_dim;
  r.details = std::move(details);
  return r;
}

}  // namespace detail

/// Fixed-point space versus commutant for a resolution of the identity.
/// Commutativity is not required.
inline TheoremReport verify_commutant_claim(const EffectSet& set, const Tolerances& tol = {}) {
  if (set.normalization() != Normalization::Resolution) {
    throw Error(ErrorCode::NotResolution, "sum of squares deviates from I by " + std::to_string(set.resolution_defect()));
  }
  const LuedersOperation op(set);
  std::ostringstream details;
  details << "d=" << set.dim() << " n=" << set.size() << (set.commuting() ? " commuting" : " non-commuting");
  return detail::compare_fixed_space(FixedPointClaim::Commutant, fixed_point_space(op, tol.nullspace),
                                     commutant(set, tol.nullspace), tol.subspace, details.str());
}

/// Spectral projector of F = sum E_i^2 onto its eigenvalue cluster at 1.
inline ComplexMatrix unit_eigenprojector(const EffectSet& set, const Tolerances& tol = {}) {
  const auto es = hermitian_eigendecompose(hermitian_part(set.square_sum()), tol);
  return spectral_projector(es, [&](double l) { return std::abs(l - 1.0) <= tol.cluster; });
}

/// Fixed-point space versus P . commutant for a commuting subnormalized family.
inline TheoremReport verify_projected_commutant_claim(const EffectSet& set, const Tolerances& tol = {}) {
  if (!set.commuting()) throw Error(ErrorCode::NotCommuting, "projected-commutant claim needs commuting effects");
  if (set.normalization() == Normalization::Resolution) {
    throw Error(ErrorCode::IsResolution, "use the commutant claim for a resolution of the identity");
  }
  const LuedersOperation op(set);
  const ComplexMatrix p = unit_eigenprojector(set, tol);
  const OperatorSubspace comm = commutant(set, tol.nullspace);
  std::vector<ComplexMatrix> projected;
  projected.reserve(comm.dimension());
  for (const auto& b : comm.basis) projected.push_back(p * b);
  const OperatorSubspace target = OperatorSubspace::span_of(set.dim(), projected, 1e-10);
  std::ostringstream details;
  details << "d=" << set.dim() << " n=" << set.size() << " rank(P)=" << std::lround(p.trace().real())
          << " dim(commutant)=" << comm.dimension();
  return detail::compare_fixed_space(FixedPointClaim::ProjectedCommutant, fixed_point_space(op, tol.nullspace),
                                     target, tol.subspace, details.str());
}

/// Dispatches on the normalization class.
inline TheoremReport verify_fixed_point_claim(const EffectSet& set, const Tolerances& tol = {}) {
  return set.normalization() == Normalization::Resolution ? verify_commutant_claim(set, tol)
                                                          : verify_projected_commutant_claim(set, tol);
}

// ---------------------------------------------------------------------------
// Channel norm

struct ChannelNormCertificate {
  double norm = 0.0;                 // ||sum E_i^2||
  double identity_image_norm = 0.0;  // ||Phi(I)||
  double max_sampled_norm = 0.0;     // max ||Phi(B)|| over sampled ||B|| = 1
  std::size_t samples = 0;
  bool identity_exact = false;
  bool bound_respected = false;

  bool holds() const noexcept { return identity_exact && bound_respected; }
};

inline ChannelNormCertificate channel_norm(const LuedersOperation& op, std::size_t samples = 200,
                                           std::uint64_t seed = 0, double slack = 1e-10) {
  ChannelNormCertificate c;
  c.norm = operator_norm(op.effects().square_sum());
  c.identity_image_norm = operator_norm(op.apply(ComplexMatrix::identity(op.dim())));
  c.identity_exact = c.identity_image_norm == c.norm;
  c.samples = samples;
  SplitMix64 rng(seed);
  for (std::size_t s = 0; s < samples; ++s) {
    ComplexMatrix b = random_gaussian_matrix(op.dim(), op.dim(), rng);
    b *= 1.0 / operator_norm(b);
    c.max_sampled_norm = std::max(c.max_sampled_norm, operator_norm(op.apply(b)));
  }
  c.bound_respected = c.max_sampled_norm <= c.norm + slack;
  return c;
}

// ---------------------------------------------------------------------------
// Phi(X) = I - X

struct NagySolution {
  ComplexMatrix solution;
  double residual = 0.0;                   // ||Phi(X) + X - I||_F
  double distance_to_half_identity = 0.0;  // ||X - I/2||_F
  bool in_effect_space = false;            // 0 <= X <= I
};

/// Least-squares solve of (S + I) vec(X) = vec(I) through the eigensystem of
/// the normal matrix (S + I)*(S + I).
inline NagySolution nagy_solve(const LuedersOperation& op, const Tolerances& tol = {}) {
  const std::size_t d = op.dim();
  const std::size_t dd = d * d;
  const ComplexMatrix a = op.superoperator() + ComplexMatrix::identity(dd);
  const ComplexMatrix a_adj = a.adjoint();
  const auto es = hermitian_eigendecompose(hermitian_part(a_adj * a), tol);
  const double smallest = std::sqrt(std::max(0.0, es.eigenvalues.front()));
  if (smallest <= tol.nullspace) {
    throw Error(ErrorCode::SingularSystem, "superoperator has an eigenvalue at -1 (smallest singular value " +
                                               std::to_string(smallest) + ")");
  }
  std::vector<double> inverse(dd);
  for (std::size_t k = 0; k < dd; ++k) inverse[k] = 1.0 / es.eigenvalues[k];
  const Vector rhs = a_adj * vec(ComplexMatrix::identity(d));
  const Vector x = reconstruct(es.eigenvectors, inverse) * rhs;

  NagySolution s;
  s.solution = unvec(x, d, d);
  const ComplexMatrix id = ComplexMatrix::identity(d);
  s.residual = (op.apply(s.solution) + s.solution - id).frobenius_norm();
  s.distance_to_half_identity = (s.solution - 0.5 * id).frobenius_norm();
  if (is_hermitian(s.solution, tol.herm)) {
    const auto xs = hermitian_eigendecompose(s.solution, tol);
    s.in_effect_space = xs.eigenvalues.front() >= -tol.psd && xs.eigenvalues.back() <= 1.0 + tol.psd;
  }
  return s;
}

// ---------------------------------------------------------------------------
// Undisturbed states

struct DisturbanceCheck {
  bool is_fixed = false;
  bool commutes_with_all = false;
  double fixed_residual = 0.0;  // ||Phi(rho) - rho||_F
  double max_commutator = 0.0;  // max_i ||[rho, E_i]||
};

inline DisturbanceCheck is_undisturbed_state(const LuedersOperation& op, const ComplexMatrix& rho, double tol = 1e-9,
                                             const Tolerances& tols = {}) {
  const std::size_t d = op.dim();
  if (rho.rows() != d || rho.cols() != d) throw Error(ErrorCode::NotDensityMatrix, "wrong shape");
  if (!is_hermitian(rho, tols.herm)) throw Error(ErrorCode::NotDensityMatrix, "not Hermitian");
  if (std::abs(rho.trace() - 1.0) > 1e-9) throw Error(ErrorCode::NotDensityMatrix, "trace differs from 1");
  if (hermitian_eigendecompose(rho, tols).eigenvalues.front() < -tols.psd) {
    throw Error(ErrorCode::NotDensityMatrix, "not positive semidefinite");
  }
  DisturbanceCheck c;
  c.fixed_residual = (op.apply(rho) - rho).frobenius_norm();
  for (const auto& e : op.effects().effects()) {
    c.max_commutator = std::max(c.max_commutator, operator_norm(commutator(rho, e.matrix())));
  }
  c.is_fixed = c.fixed_residual <= tol;
  c.commutes_with_all = c.max_commutator <= tol;
  return c;
}

}  // namespace lueders
