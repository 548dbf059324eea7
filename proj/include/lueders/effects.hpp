#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "config.hpp"
#include "linalg.hpp"
#include "matrix.hpp"
#include "random.hpp"

namespace lueders {

inline constexpr std::size_t kMaxEffects = 64;

/// Hermitian operator with spectrum in [0, 1]. The eigensystem is cached with
/// eigenvalues clipped into [0, 1]; the original matrix is kept untouched.
class Effect {
 public:
  const ComplexMatrix& matrix() const noexcept { return matrix_; }
  const HermitianEigensystem& eigensystem() const noexcept { return eig_; }
  std::size_t dim() const noexcept { return matrix_.rows(); }

  friend Effect validate_effect(const ComplexMatrix& m, const Tolerances& tol);

 private:
  Effect(ComplexMatrix m, HermitianEigensystem eig) : matrix_(std::move(m)), eig_(std::move(eig)) {}

  ComplexMatrix matrix_;
  HermitianEigensystem eig_;
};

inline Effect validate_effect(const ComplexMatrix& m, const Tolerances& tol = {}) {
  if (!m.is_square()) throw Error(ErrorCode::NotSquare, "effect must be square");
  if (m.rows() == 0) throw Error(ErrorCode::InvalidArgument, "effect must have positive dimension");
  auto eig = hermitian_eigendecompose(m, tol);
  const double lo = eig.eigenvalues.front();
  const double hi = eig.eigenvalues.back();
  if (lo < -tol.psd) throw Error(ErrorCode::SpectrumBelowZero, "smallest eigenvalue " + std::to_string(lo));
  if (hi > 1.0 + tol.psd) throw Error(ErrorCode::SpectrumAboveOne, "largest eigenvalue " + std::to_string(hi));
  for (auto& lambda : eig.eigenvalues) lambda = std::clamp(lambda, 0.0, 1.0);
  return Effect(m, std::move(eig));
}

enum class Normalization { Resolution, Subnormalized };

constexpr std::string_view to_string(Normalization n) {
  return n == Normalization::Resolution ? "Resolution" : "Subnormalized";
}

class EffectSet {
 public:
  const std::vector<Effect>& effects() const noexcept { return effects_; }
  const Effect& operator[](std::size_t i) const { return effects_.at(i); }
  std::size_t size() const noexcept { return effects_.size(); }
  std::size_t dim() const noexcept { return effects_.front().dim(); }

  /// F = sum_i E_i^2, accumulated in index order.
  const ComplexMatrix& square_sum() const noexcept { return square_sum_; }
  bool commuting() const noexcept { return commuting_; }
  Normalization normalization() const noexcept { return normalization_; }
  double max_commutator_norm() const noexcept { return max_commutator_; }
  /// ||F - I|| (operator norm).
  double resolution_defect() const noexcept { return resolution_defect_; }
  double max_effect_norm() const noexcept { return max_effect_norm_; }

  friend EffectSet build_effect_set(const std::vector<ComplexMatrix>& ms, const Tolerances& tol);

 private:
  std::vector<Effect> effects_;
  ComplexMatrix square_sum_;
  bool commuting_ = true;
  Normalization normalization_ = Normalization::Resolution;
  double max_commutator_ = 0.0;
  double resolution_defect_ = 0.0;
  double max_effect_norm_ = 0.0;
};

inline EffectSet build_effect_set(const std::vector<ComplexMatrix>& ms, const Tolerances& tol = {}) {
  if (ms.empty()) throw Error(ErrorCode::InvalidArgument, "effect set must be nonempty");
  if (ms.size() > kMaxEffects) {
    throw Error(ErrorCode::InvalidArgument, "at most " + std::to_string(kMaxEffects) + " effects supported");
  }
  const std::size_t d = ms.front().rows();
  EffectSet set;
  set.effects_.reserve(ms.size());
  for (std::size_t i = 0; i < ms.size(); ++i) {
    if (ms[i].rows() != d || ms[i].cols() != d) {
      throw Error(ErrorCode::DimensionMismatch, "effect " + std::to_string(i) + " is not " + std::to_string(d) +
                                                    "x" + std::to_string(d));
    }
    try {
      set.effects_.push_back(validate_effect(ms[i], tol));
    } catch (const Error& e) {
      throw Error(e.code(), "effect " + std::to_string(i) + ": " + e.what());
    }
  }

  set.square_sum_ = ComplexMatrix(d, d);
  for (const auto& e : set.effects_) {
    set.square_sum_ += e.matrix() * e.matrix();
    set.max_effect_norm_ =
        std::max({set.max_effect_norm_, std::abs(e.eigensystem().eigenvalues.front()),
                  std::abs(e.eigensystem().eigenvalues.back())});
  }

  for (std::size_t i = 0; i < set.effects_.size(); ++i)
    for (std::size_t j = i + 1; j < set.effects_.size(); ++j)
      set.max_commutator_ = std::max(
          set.max_commutator_, operator_norm(commutator(set.effects_[i].matrix(), set.effects_[j].matrix())));
  set.commuting_ = set.max_commutator_ <= tol.comm * set.max_effect_norm_;

  const auto f_eig = hermitian_eigendecompose(hermitian_part(set.square_sum_), tol);
  if (f_eig.eigenvalues.back() > 1.0 + tol.psd) {
    throw Error(ErrorCode::NotSubnormalized,
                "sum of squares has eigenvalue " + std::to_string(f_eig.eigenvalues.back()));
  }
  set.resolution_defect_ = std::max(std::abs(f_eig.eigenvalues.front() - 1.0), std::abs(f_eig.eigenvalues.back() - 1.0));
  set.normalization_ =
      set.resolution_defect_ <= tol.norm ? Normalization::Resolution : Normalization::Subnormalized;
  return set;
}

// ---------------------------------------------------------------------------
// Spectral windows P^E(a, b]

/// An eigenvalue within `snap` of an edge counts as sitting on it, so it lands
/// in the window whose closed right edge that is.
constexpr bool in_window(double lambda, double a, double b, double snap) noexcept {
  return lambda > a + snap && lambda <= b + snap;
}

inline double bin_edge(std::int64_t k, std::int64_t m) noexcept {
  return static_cast<double>(k) / static_cast<double>(m);
}

/// The k in {-1, ..., m-1} with lambda in (k/m, (k+1)/m] (after snapping).
inline std::int64_t bin_of(double lambda, std::int64_t m, double snap) {
  std::int64_t k = static_cast<std::int64_t>(std::ceil((lambda - snap) * static_cast<double>(m))) - 1;
  k = std::clamp<std::int64_t>(k, -1, m - 1);
  while (k > -1 && !(lambda > bin_edge(k, m) + snap)) --k;
  while (k < m - 1 && !(lambda <= bin_edge(k + 1, m) + snap)) ++k;
  return k;
}

struct SpectralWindow {
  double lower = 0.0;  // open
  double upper = 0.0;  // closed
  ComplexMatrix projector;
};

inline SpectralWindow spectral_window(const Effect& e, double a, double b, const Tolerances& tol = {}) {
  if (!(a < b)) throw Error(ErrorCode::InvalidInterval, "(" + std::to_string(a) + ", " + std::to_string(b) + "]");
  return {a, b, spectral_projector(e.eigensystem(), [&](double l) { return in_window(l, a, b, tol.cluster); })};
}

/// P^E(k/m, (k+1)/m], using the same membership rule as bin_of.
inline ComplexMatrix bin_window(const Effect& e, std::int64_t m, std::int64_t k, const Tolerances& tol = {}) {
  return spectral_projector(e.eigensystem(), [&](double l) { return bin_of(l, m, tol.cluster) == k; });
}

// ---------------------------------------------------------------------------
// Seeded generators

/// Raw material of a commuting construction E_i = U diag(spectra[i]) U*.
struct CommutingConstruction {
  ComplexMatrix basis;                       // U
  std::vector<std::vector<double>> spectra;  // spectra[i][v] = eigenvalue of E_i on column v
  std::vector<ComplexMatrix> effects;
};

/// Minimum Euclidean distance between the unit eigenvalue directions of two
/// generated joint eigenvectors (n >= 2); closer draws are resampled.
inline constexpr double kTupleSeparation = 1e-2;

namespace detail {

inline CommutingConstruction commuting_construction(std::size_t d, std::size_t n, std::uint64_t seed,
                                                    double unit_fraction) {
  if (d == 0 || n == 0) throw Error(ErrorCode::InvalidArgument, "d and n must be positive");
  if (!(unit_fraction >= 0.0 && unit_fraction <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "unit_fraction must lie in [0, 1]");
  }
  SplitMix64 rng(seed);
  CommutingConstruction c;
  c.basis = d == 1 ? ComplexMatrix::identity(1) : random_unitary(d, rng);
  c.spectra.assign(n, std::vector<double>(d));
  const auto unit_columns = static_cast<std::size_t>(std::lround(unit_fraction * static_cast<double>(d)));
  std::vector<std::vector<double>> directions;
  for (std::size_t v = 0; v < d; ++v) {
    std::vector<double> g(n, 1.0);
    if (n > 1) {
      for (bool accepted = false; !accepted;) {
        double norm = 0.0;
        for (auto& x : g) {
          x = std::abs(rng.gaussian());
          norm += x * x;
        }
        if (norm == 0.0) continue;
        for (auto& x : g) x /= std::sqrt(norm);
        accepted = std::all_of(directions.begin(), directions.end(), [&](const std::vector<double>& h) {
          double dist = 0.0;
          for (std::size_t i = 0; i < n; ++i) dist += (g[i] - h[i]) * (g[i] - h[i]);
          return std::sqrt(dist) >= kTupleSeparation;
        });
      }
    }
    directions.push_back(g);
    const double radius = v < unit_columns ? 1.0 : rng.uniform(0.3, 0.95);
    for (std::size_t i = 0; i < n; ++i) c.spectra[i][v] = radius * g[i];
  }
  for (std::size_t i = 0; i < n; ++i) {
    const bool all_one = std::all_of(c.spectra[i].begin(), c.spectra[i].end(), [](double x) { return x == 1.0; });
    c.effects.push_back(all_one ? ComplexMatrix::identity(d) : hermitian_part(reconstruct(c.basis, c.spectra[i])));
  }
  return c;
}

}  // namespace detail

/// Commuting set with sum E_i^2 = I exactly up to rounding.
inline CommutingConstruction commuting_resolution_construction(std::size_t d, std::size_t n, std::uint64_t seed) {
  return detail::commuting_construction(d, n, seed, 1.0);
}

/// Commuting set in which round(unit_fraction * d) joint eigenvectors carry a
/// unit-length eigenvalue tuple and the rest are scaled into [0.3, 0.95].
inline CommutingConstruction commuting_subnormalized_construction(std::size_t d, std::size_t n, std::uint64_t seed,
                                                                  double unit_fraction) {
  return detail::commuting_construction(d, n, seed, unit_fraction);
}

inline EffectSet generate_commuting_resolution(std::size_t d, std::size_t n, std::uint64_t seed,
                                               const Tolerances& tol = {}) {
  return build_effect_set(commuting_resolution_construction(d, n, seed).effects, tol);
}

inline EffectSet generate_commuting_subnormalized(std::size_t d, std::size_t n, std::uint64_t seed,
                                                  double unit_fraction, const Tolerances& tol = {}) {
  return build_effect_set(commuting_subnormalized_construction(d, n, seed, unit_fraction).effects, tol);
}

/// E_1..E_{n-1} random, scaled so their square sum is at most 0.9 I; E_n closes
/// the resolution as sqrt(I - sum). Regenerates from the next sub-seed while
/// every pairwise commutator is below 0.01.
inline std::vector<ComplexMatrix> noncommuting_resolution_matrices(std::size_t d, std::size_t n, std::uint64_t seed) {
  if (d < 2 || n < 3) throw Error(ErrorCode::InvalidArgument, "non-commuting generator needs d >= 2 and n >= 3");
  constexpr double kHeadroom = 0.1;
  constexpr double kMinCommutator = 0.01;
  for (std::uint64_t attempt = 0;; ++attempt) {
    SplitMix64 rng(attempt == 0 ? seed : derive_seed(seed, attempt));
    std::vector<ComplexMatrix> ms;
    ComplexMatrix sum(d, d);
    for (std::size_t i = 0; i + 1 < n; ++i) {
      const ComplexMatrix g = random_gaussian_matrix(d, d, rng);
      ComplexMatrix h = hermitian_part(g * g.adjoint());
      h *= rng.uniform(0.2, 1.0) / operator_norm(h);
      sum += h * h;
      ms.push_back(std::move(h));
    }
    const double scale = std::sqrt((1.0 - kHeadroom) / operator_norm(sum));
    for (auto& m : ms) m *= scale;
    sum *= scale * scale;
    ms.push_back(sqrt_psd(hermitian_part(ComplexMatrix::identity(d) - sum)));

    double worst = 0.0;
    for (std::size_t i = 0; i < ms.size(); ++i)
      for (std::size_t j = i + 1; j < ms.size(); ++j) worst = std::max(worst, operator_norm(commutator(ms[i], ms[j])));
    if (worst >= kMinCommutator) return ms;
  }
}

inline EffectSet generate_noncommuting_resolution(std::size_t d, std::size_t n, std::uint64_t seed,
                                                  const Tolerances& tol = {}) {
  return build_effect_set(noncommuting_resolution_matrices(d, n, seed), tol);
}

}  // namespace lueders
