#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>

#include "linalg.hpp"
#include "matrix.hpp"

namespace lueders {

/// SplitMix64: output k is mix(seed + (k+1) * golden_gamma), so the stream is a
/// pure function of (seed, counter). All randomness in the library and CLI
/// flows through this generator; no system entropy is read.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform on [0, 1).
  double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

  /// Standard normal via Box-Muller (one draw per call, no cached spare, so the
  /// stream position is a simple function of the number of calls).
  double gaussian() noexcept {
    const double u1 = static_cast<double>(((*this)() >> 11) + 1) * 0x1.0p-53;  // (0, 1]
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  std::uint64_t state_;
};

/// Independent stream for sub-task `stream` of a seeded job.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
  SplitMix64 g(seed ^ (0xd1b54a32d192ed03ULL * (stream + 1)));
  return g();
}

inline ComplexMatrix random_gaussian_matrix(std::size_t rows, std::size_t cols, SplitMix64& rng) {
  ComplexMatrix m(rows, cols);
  for (auto& e : m.entries()) {
    const double re = rng.gaussian();
    const double im = rng.gaussian();
    e = cplx(re, im) * (1.0 / std::numbers::sqrt2);
  }
  return m;
}

inline ComplexMatrix random_hermitian(std::size_t d, SplitMix64& rng) {
  return hermitian_part(random_gaussian_matrix(d, d, rng));
}

/// Haar-like unitary: orthonormalized complex Gaussian columns.
inline ComplexMatrix random_unitary(std::size_t d, SplitMix64& rng) {
  const ComplexMatrix g = random_gaussian_matrix(d, d, rng);
  std::vector<Vector> cols;
  cols.reserve(d);
  for (std::size_t j = 0; j < d; ++j) {
    Vector q = g.column(j);
    for (int pass = 0; pass < 2; ++pass) {
      for (const auto& b : cols) {
        const cplx c = dot(b, q);
        for (std::size_t k = 0; k < d; ++k) q[k] -= c * b[k];
      }
    }
    const double n = norm2(q);
    for (auto& e : q) e /= n;
    cols.push_back(std::move(q));
  }
  return ComplexMatrix::from_columns(d, cols);
}

/// Random density matrix G G* / tr(G G*).
inline ComplexMatrix random_density(std::size_t d, SplitMix64& rng) {
  const ComplexMatrix g = random_gaussian_matrix(d, d, rng);
  ComplexMatrix rho = hermitian_part(g * g.adjoint());
  rho *= 1.0 / rho.trace().real();
  return rho;
}

}  // namespace lueders
