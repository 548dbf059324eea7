#pragma once

#include <cmath>
#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "config.hpp"
#include "effects.hpp"
#include "linalg.hpp"
#include "matrix.hpp"
#include "operation.hpp"

namespace lueders {

inline constexpr std::int64_t kMaxResolution = std::int64_t{1} << 20;

/// Multi-index (k_1, ..., k_n) at resolution m, each k_i in {-1, ..., m-1}.
struct BinIndex {
  std::int64_t m = 1;
  std::vector<std::int64_t> ks;

  friend auto operator<=>(const BinIndex&, const BinIndex&) = default;
};

/// F^m_{k_1..k_n} together with its index.
struct BinProjection {
  BinIndex index;
  ComplexMatrix projector;
};

namespace detail {

struct Window {
  std::int64_t k;
  ComplexMatrix projector;
};

/// Nonempty bins of a single effect at resolution m, ascending k.
inline std::vector<Window> occupied_windows(const Effect& e, std::int64_t m, const Tolerances& tol) {
  std::vector<std::int64_t> ks;
  for (double lambda : e.eigensystem().eigenvalues) {
    const auto k = bin_of(lambda, m, tol.cluster);
    if (ks.empty() || ks.back() != k) ks.push_back(k);
  }
  std::vector<Window> out;
  out.reserve(ks.size());
  for (auto k : ks) out.push_back({k, bin_window(e, m, k, tol)});
  return out;
}

inline void require_commuting(const EffectSet& set) {
  if (!set.commuting()) {
    throw Error(ErrorCode::NotCommuting,
                "bin projections need commuting effects (max commutator " + std::to_string(set.max_commutator_norm()) + ")");
  }
}

// A product of commuting projections has ||P||_F^2 = rank.
inline bool nonzero_projection(const ComplexMatrix& p) { return p.frobenius_norm() > std::sqrt(0.5); }

}  // namespace detail

inline ComplexMatrix bin_projection(const EffectSet& set, const BinIndex& index, const Tolerances& tol = {}) {
  detail::require_commuting(set);
  if (index.m < 1) throw Error(ErrorCode::IndexOutOfRange, "resolution must be positive");
  if (index.ks.size() != set.size()) {
    throw Error(ErrorCode::IndexOutOfRange, "expected " + std::to_string(set.size()) + " indices");
  }
  ComplexMatrix p = ComplexMatrix::identity(set.dim());
  for (std::size_t i = 0; i < set.size(); ++i) {
    const auto k = index.ks[i];
    if (k < -1 || k > index.m - 1) {
      throw Error(ErrorCode::IndexOutOfRange, "k=" + std::to_string(k) + " at m=" + std::to_string(index.m));
    }
    p = p * bin_window(set[i], index.m, k, tol);
  }
  return p;
}

/// Every nonzero F^m_{ks}, in lexicographic order of ks. Empty products are
/// pruned effect by effect, so only occupied multi-indices are visited.
inline std::vector<BinProjection> nonzero_bins(const EffectSet& set, std::int64_t m, const Tolerances& tol = {}) {
  detail::require_commuting(set);
  if (m < 1) throw Error(ErrorCode::IndexOutOfRange, "resolution must be positive");
  std::vector<BinProjection> partial{{{m, {}}, ComplexMatrix::identity(set.dim())}};
  for (const auto& effect : set.effects()) {
    const auto windows = detail::occupied_windows(effect, m, tol);
    std::vector<BinProjection> next;
    for (const auto& prefix : partial) {
      for (const auto& w : windows) {
        ComplexMatrix product = prefix.projector * w.projector;
        if (!detail::nonzero_projection(product)) continue;
        BinProjection child{prefix.index, std::move(product)};
        child.index.ks.push_back(w.k);
        next.push_back(std::move(child));
      }
    }
    partial = std::move(next);
  }
  return partial;
}

/// True iff B commutes with every bin projection at resolution m.
inline bool bin_commutation_check(const EffectSet& set, const ComplexMatrix& b, std::int64_t m,
                                  const Tolerances& tol = {}) {
  const double limit = tol.comm * operator_norm(b);
  for (const auto& bin : nonzero_bins(set, m, tol)) {
    if (operator_norm(commutator(b, bin.projector)) > limit) return false;
  }
  return true;
}

struct OffDiagonalBlock {
  BinIndex left;
  BinIndex right;
  double block_norm = 0.0;
};

/// First pair of distinct multi-indices (lexicographic) with F B F' nonzero.
inline std::optional<OffDiagonalBlock> offdiagonal_block_search(const EffectSet& set, const ComplexMatrix& b,
                                                                std::int64_t m, const Tolerances& tol = {}) {
  const double threshold = tol.witness * operator_norm(b);
  const auto bins = nonzero_bins(set, m, tol);
  for (const auto& left : bins) {
    const ComplexMatrix lb = left.projector * b;
    for (const auto& right : bins) {
      if (left.index == right.index) continue;
      const double nrm = operator_norm(lb * right.projector);
      if (nrm > threshold) return OffDiagonalBlock{left.index, right.index, nrm};
    }
  }
  return std::nullopt;
}

struct WitnessCertificate {
  std::int64_t m = 0;
  std::int64_t k = 0;
  std::int64_t j = 0;
  double block_norm = 0.0;  // ||P^E(k/m,(k+1)/m] B P^E(j/m,(j+1)/m]||
  ComplexMatrix left_projector;
  ComplexMatrix right_projector;
};

/// Dyadic search for spectral windows k, j with |k - j| >= 2 between which B
/// has a nonzero block. Starts at m = 2 and doubles; adjacent-only couplings
/// separate once 1/m drops below half the gap of the coupled eigenvalues.
inline WitnessCertificate witness_search(const Effect& e, const ComplexMatrix& b, const Tolerances& tol = {},
                                         std::int64_t max_resolution = kMaxResolution) {
  if (b.rows() != e.dim() || b.cols() != e.dim()) throw Error(ErrorCode::DimensionMismatch, "operator shape");
  const double b_norm = operator_norm(b);
  const double e_norm = e.eigensystem().eigenvalues.back();
  const double comm = operator_norm(commutator(b, e.matrix()));
  if (comm <= tol.comm * e_norm * b_norm) {
    throw Error(ErrorCode::CommutesNoWitness, "||[B,E]|| = " + std::to_string(comm));
  }
  const double threshold = tol.witness * b_norm;
  for (std::int64_t m = 2; m <= max_resolution; m *= 2) {
    const auto windows = detail::occupied_windows(e, m, tol);
    for (const auto& left : windows) {
      const ComplexMatrix lb = left.projector * b;
      for (const auto& right : windows) {
        if (std::abs(left.k - right.k) < 2) continue;
        const double nrm = operator_norm(lb * right.projector);
        if (nrm > threshold) return {m, left.k, right.k, nrm, left.projector, right.projector};
      }
    }
  }
  throw Error(ErrorCode::ResolutionExhausted,
              "no separated block up to m=" + std::to_string(max_resolution) + "; eigenvalues cluster below resolution");
}

// ---------------------------------------------------------------------------
// Contraction bound

/// (p^2 - 4 sqrt(n) m p - 2n) / (2 (pm)^2). Negative for small p.
inline double contraction_bound(std::int64_t n, std::int64_t m, std::int64_t p) {
  if (n < 1 || m < 1 || p < 1) throw Error(ErrorCode::InvalidArgument, "n, m, p must be positive");
  const double nd = static_cast<double>(n);
  const double md = static_cast<double>(m);
  const double pd = static_cast<double>(p);
  return (pd * pd - 4.0 * std::sqrt(nd) * md * pd - 2.0 * nd) / (2.0 * (pd * md) * (pd * md));
}

/// Variant with the linear term missing its factor p,
/// (p^2 - 4 sqrt(n) m - 2n) / (2 (pm)^2). Reported alongside, never enforced.
inline double contraction_bound_without_p_factor(std::int64_t n, std::int64_t m, std::int64_t p) {
  if (n < 1 || m < 1 || p < 1) throw Error(ErrorCode::InvalidArgument, "n, m, p must be positive");
  const double nd = static_cast<double>(n);
  const double md = static_cast<double>(m);
  const double pd = static_cast<double>(p);
  return (pd * pd - 4.0 * std::sqrt(nd) * md - 2.0 * nd) / (2.0 * (pd * md) * (pd * md));
}

/// Smallest p >= 1 with contraction_bound(n, m, p) > 0.
inline std::int64_t smallest_positive_bound_p(std::int64_t n, std::int64_t m) {
  if (n < 1 || m < 1) throw Error(ErrorCode::InvalidArgument, "n, m must be positive");
  // positive root of p^2 - 4 sqrt(n) m p - 2n, then settle by scanning
  const double half_b = 2.0 * std::sqrt(static_cast<double>(n)) * static_cast<double>(m);
  const double root = half_b + std::sqrt(half_b * half_b + 2.0 * static_cast<double>(n));
  std::int64_t p = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::floor(root)) - 2);
  while (p > 1 && contraction_bound(n, m, p - 1) > 0.0) --p;
  while (contraction_bound(n, m, p) <= 0.0) ++p;
  return p;
}

inline std::int64_t index_square_sum(const BinIndex& index) {
  std::int64_t s = 0;
  for (auto k : index.ks) s += k * k;
  return s;
}

struct ContractionReport {
  std::int64_t p = 0;
  std::int64_t m = 0;  // coarse resolution from the witness
  std::int64_t n = 0;
  std::int64_t k = 0;  // witness window of E_1
  std::int64_t j = 0;
  BinIndex coarse_left;
  BinIndex coarse_right;
  BinIndex refined_left;  // at resolution p*m
  BinIndex refined_right;
  double bound = 0.0;
  double bound_without_p_factor = 0.0;
  double y_norm = 0.0;
  double image_norm = 0.0;  // ||Phi(Y)||
  double achieved_ratio = 0.0;
  ComplexMatrix y;
  ComplexMatrix p_projector;
  ComplexMatrix q_projector;
};

/// Builds P, Q in the commutant with PQ = 0 and Y = P X Q != 0 whose relative
/// norm loss under Phi is at least contraction_bound(n, m, p).
inline ContractionReport build_contractive_block(const EffectSet& set, const ComplexMatrix& x, std::int64_t p,
                                                 const Tolerances& tol = {}) {
  detail::require_commuting(set);
  if (p < 1) throw Error(ErrorCode::InvalidArgument, "p must be positive");
  const auto cert = witness_search(set[0], x, tol);
  const double threshold = tol.witness * operator_norm(x);

  ContractionReport r;
  r.p = p;
  r.m = cert.m;
  r.n = static_cast<std::int64_t>(set.size());
  r.k = cert.k;
  r.j = cert.j;

  // coarse pair: first indices pinned to the witness windows
  const auto coarse = nonzero_bins(set, cert.m, tol);
  const BinProjection* left = nullptr;
  const BinProjection* right = nullptr;
  for (const auto& l : coarse) {
    if (l.index.ks.front() != cert.k) continue;
    const ComplexMatrix lx = l.projector * x;
    for (const auto& rt : coarse) {
      if (rt.index.ks.front() != cert.j) continue;
      if (operator_norm(lx * rt.projector) > threshold) {
        left = &l;
        right = &rt;
        break;
      }
    }
    if (left != nullptr) break;
  }
  if (left == nullptr) throw Error(ErrorCode::RefinementVanished, "no coarse multi-index block above threshold");
  r.coarse_left = left->index;
  r.coarse_right = right->index;
  const ComplexMatrix y0 = left->projector * x * right->projector;

  const auto fine = nonzero_bins(set, p * cert.m, tol);
  const BinProjection* fine_left = nullptr;
  const BinProjection* fine_right = nullptr;
  for (const auto& l : fine) {
    const ComplexMatrix ly = l.projector * y0;
    for (const auto& rt : fine) {
      if (operator_norm(ly * rt.projector) > threshold) {
        fine_left = &l;
        fine_right = &rt;
        break;
      }
    }
    if (fine_left != nullptr) break;
  }
  if (fine_left == nullptr) throw Error(ErrorCode::RefinementVanished, "every refined block fell below threshold");
  r.refined_left = fine_left->index;
  r.refined_right = fine_right->index;

  r.p_projector = fine_left->projector * left->projector;
  r.q_projector = right->projector * fine_right->projector;
  r.y = r.p_projector * x * r.q_projector;
  r.y_norm = operator_norm(r.y);
  r.image_norm = operator_norm(LuedersOperation(set).apply(r.y));
  r.achieved_ratio = (r.y_norm - r.image_norm) / r.y_norm;
  r.bound = contraction_bound(r.n, r.m, p);
  r.bound_without_p_factor = contraction_bound_without_p_factor(r.n, r.m, p);
  return r;
}

}  // namespace lueders
