#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "lueders.hpp"

using namespace lueders;

namespace {

ComplexMatrix random_psd(std::size_t d, SplitMix64& rng) {
  const ComplexMatrix g = random_gaussian_matrix(d, d, rng);
  return hermitian_part(g.adjoint() * g);
}

double relative(const ComplexMatrix& a, const ComplexMatrix& b) { return (a - b).frobenius_norm() / b.frobenius_norm(); }

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no lueders::Error thrown";
  return ErrorCode::InvalidArgument;
}

}  // namespace

TEST(Matrix, ConstructionAndAccess) {
  const ComplexMatrix m{{1, 2}, {cplx(0, 1), 4}};
  EXPECT_EQ(m.rows(), 2u);
  EXPECT_EQ(m(1, 0), cplx(0, 1));
  EXPECT_EQ(m.adjoint()(0, 1), cplx(0, -1));
  EXPECT_EQ(m.transpose()(0, 1), cplx(0, 1));
  EXPECT_EQ(m.trace(), cplx(5, 0));
  EXPECT_EQ(ComplexMatrix::identity(3).trace(), cplx(3, 0));
  EXPECT_TRUE(ComplexMatrix::zeros(2, 3).frobenius_norm() == 0.0);
}

TEST(Matrix, IdentityProductIsBitExact) {
  SplitMix64 rng(3);
  const ComplexMatrix a = random_gaussian_matrix(5, 5, rng);
  EXPECT_TRUE(a * ComplexMatrix::identity(5) == a);
  EXPECT_TRUE(ComplexMatrix::identity(5) * a == a);
}

TEST(Matrix, VecOfProductMatchesKronecker) {
  SplitMix64 rng(4);
  const ComplexMatrix a = random_gaussian_matrix(3, 3, rng);
  const ComplexMatrix x = random_gaussian_matrix(3, 3, rng);
  const ComplexMatrix b = random_gaussian_matrix(3, 3, rng);
  const Vector lhs = vec(a * x * b);
  const Vector rhs = kron(b.transpose(), a) * vec(x);
  double err = 0.0;
  for (std::size_t i = 0; i < lhs.size(); ++i) err = std::max(err, std::abs(lhs[i] - rhs[i]));
  EXPECT_LT(err, 1e-12);
  EXPECT_TRUE(unvec(vec(x), 3, 3) == x);
}

TEST(Matrix, HilbertSchmidtInner) {
  const ComplexMatrix a{{1, 0}, {0, 0}};
  const ComplexMatrix b{{cplx(0, 2), 0}, {0, 5}};
  EXPECT_EQ(hs_inner(a, b), cplx(0, 2));
}

TEST(Eigen, IdentityGivesUnitEigenvalues) {
  const auto es = hermitian_eigendecompose(ComplexMatrix::identity(2));
  EXPECT_EQ(es.eigenvalues, (std::vector<double>{1.0, 1.0}));
  EXPECT_LT((es.eigenvectors.adjoint() * es.eigenvectors - ComplexMatrix::identity(2)).frobenius_norm(), 1e-12);
}

TEST(Eigen, DiagonalSortedAscending) {
  const auto es = hermitian_eigendecompose(ComplexMatrix::diagonal({0.75, 0.25}));
  EXPECT_DOUBLE_EQ(es.eigenvalues[0], 0.25);
  EXPECT_DOUBLE_EQ(es.eigenvalues[1], 0.75);
  EXPECT_NEAR(std::abs(es.eigenvectors(1, 0)), 1.0, 1e-15);
  EXPECT_NEAR(std::abs(es.eigenvectors(0, 1)), 1.0, 1e-15);
}

TEST(Eigen, RandomSixBySixReconstructs) {
  SplitMix64 rng(6);
  const ComplexMatrix m = random_hermitian(6, rng);
  const auto es = hermitian_eigendecompose(m);
  EXPECT_LE(relative(reconstruct(es.eigenvectors, es.eigenvalues), m), 1e-10);
  EXPECT_TRUE(std::is_sorted(es.eigenvalues.begin(), es.eigenvalues.end()));
}

TEST(Eigen, ReconstructionSweep) {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    SplitMix64 rng(seed);
    const std::size_t d = 1 + seed % 12;
    const ComplexMatrix m = random_hermitian(d, rng);
    const auto es = hermitian_eigendecompose(m);
    ASSERT_LE(relative(reconstruct(es.eigenvectors, es.eigenvalues), m), 1e-9) << "seed " << seed;
    ASSERT_LE((es.eigenvectors.adjoint() * es.eigenvectors - ComplexMatrix::identity(d)).frobenius_norm(), 1e-9);
  }
}

TEST(Eigen, DegenerateSpectrum) {
  SplitMix64 rng(8);
  const ComplexMatrix u = random_unitary(5, rng);
  const std::vector<double> values{0.3, 0.3, 0.3, 0.9, 0.9};
  const auto es = hermitian_eigendecompose(hermitian_part(reconstruct(u, values)));
  for (std::size_t i = 0; i < 5; ++i) EXPECT_NEAR(es.eigenvalues[i], i < 3 ? 0.3 : 0.9, 1e-13);
}

TEST(Eigen, Errors) {
  EXPECT_EQ(code_of([] { hermitian_eigendecompose(ComplexMatrix(2, 3)); }), ErrorCode::NotSquare);
  EXPECT_EQ(code_of([] { hermitian_eigendecompose(ComplexMatrix{{0, 1}, {0, 0}}); }), ErrorCode::NotHermitian);
  EXPECT_EQ(code_of([] { hermitian_eigendecompose(ComplexMatrix{{std::nan(""), 0}, {0, 0}}); }),
            ErrorCode::InvalidArgument);
}

TEST(OperatorNorm, Examples) {
  EXPECT_EQ(operator_norm(ComplexMatrix::zeros(3, 3)), 0.0);
  EXPECT_NEAR(operator_norm(ComplexMatrix::diagonal({0.3, 0.8})), 0.8, 1e-15);
  EXPECT_NEAR(operator_norm(ComplexMatrix{{0, 1}, {0, 0}}), 1.0, 1e-15);
}

TEST(OperatorNorm, BoundsFrobenius) {
  SplitMix64 rng(10);
  for (int t = 0; t < 50; ++t) {
    const ComplexMatrix m = random_gaussian_matrix(4, 3, rng);
    const double op = operator_norm(m);
    EXPECT_LE(op, m.frobenius_norm() * (1 + 1e-12));
    EXPECT_GE(op, m.frobenius_norm() / std::sqrt(3.0) * (1 - 1e-12));
  }
}

TEST(Nullspace, RankOneDiagonal) {
  const auto ns = nullspace(ComplexMatrix::diagonal({1.0, 0.0}), 1e-10);
  ASSERT_EQ(ns.size(), 1u);
  EXPECT_NEAR(std::abs(ns[0][1]), 1.0, 1e-14);
  EXPECT_NEAR(std::abs(ns[0][0]), 0.0, 1e-14);
}

TEST(Nullspace, InvertibleIsEmpty) {
  const ComplexMatrix m{{2, 1, 0}, {1, 3, 1}, {0, 1, 4}};
  EXPECT_TRUE(nullspace(m, 1e-10).empty());
}

TEST(Nullspace, ConstructedRank) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    SplitMix64 rng(seed);
    const ComplexMatrix m = random_gaussian_matrix(8, 5, rng) * random_gaussian_matrix(5, 8, rng);
    const auto ns = nullspace(m, 1e-10);
    ASSERT_EQ(ns.size(), 3u) << "seed " << seed;
    for (const auto& x : ns) EXPECT_LE(norm2(m * x), 1e-12 * m.frobenius_norm());
    for (std::size_t i = 0; i < ns.size(); ++i)
      for (std::size_t j = 0; j < ns.size(); ++j) EXPECT_NEAR(std::abs(dot(ns[i], ns[j])), i == j ? 1.0 : 0.0, 1e-12);
  }
}

TEST(Nullspace, WideMatrix) {
  const ComplexMatrix m{{1, 0, 0}, {0, 1, 0}};
  const auto ns = nullspace(m, 1e-10);
  ASSERT_EQ(ns.size(), 1u);
  EXPECT_NEAR(std::abs(ns[0][2]), 1.0, 1e-14);
}

TEST(Nullspace, ZeroMatrixIsEverything) { EXPECT_EQ(nullspace(ComplexMatrix::zeros(3, 3), 1e-10).size(), 3u); }

TEST(SqrtPsd, Examples) {
  EXPECT_LT((sqrt_psd(ComplexMatrix::identity(3)) - ComplexMatrix::identity(3)).frobenius_norm(), 1e-15);
  EXPECT_LT((sqrt_psd(ComplexMatrix::diagonal({4.0, 0.25})) - ComplexMatrix::diagonal({2.0, 0.5})).frobenius_norm(),
            1e-14);
}

TEST(SqrtPsd, SquaresBack) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    SplitMix64 rng(seed);
    const ComplexMatrix m = random_psd(1 + seed % 7, rng);
    const ComplexMatrix r = sqrt_psd(m);
    EXPECT_LE(relative(r * r, m), 1e-10);
    EXPECT_LE(relative(sqrt_psd(hermitian_part(r * r)), r), 1e-9);
  }
}

TEST(SqrtPsd, NegativeRejected) {
  EXPECT_EQ(code_of([] { sqrt_psd(ComplexMatrix::diagonal({1.0, -0.1})); }), ErrorCode::NotPositive);
  EXPECT_NO_THROW(sqrt_psd(ComplexMatrix::diagonal({1.0, -1e-12})));
}

TEST(Subspace, EmptyProjectorIsZero) {
  const OperatorSubspace s{2, {}};
  EXPECT_EQ(subspace_projector(s).frobenius_norm(), 0.0);
}

TEST(Subspace, AllMatrixUnitsGiveIdentity) {
  std::vector<ComplexMatrix> units;
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 2; ++j) {
      ComplexMatrix e(2, 2);
      e(i, j) = 1.0;
      units.push_back(e);
    }
  const auto s = OperatorSubspace::span_of(2, units);
  EXPECT_LT((subspace_projector(s) - ComplexMatrix::identity(4)).frobenius_norm(), 1e-14);
}

TEST(Subspace, ProjectorIdempotentWithTraceEqualRank) {
  SplitMix64 rng(12);
  std::vector<ComplexMatrix> spanning;
  for (int i = 0; i < 5; ++i) spanning.push_back(random_gaussian_matrix(3, 3, rng));
  spanning.push_back(spanning[0] + 2.0 * spanning[1]);
  const auto s = OperatorSubspace::span_of(3, spanning);
  EXPECT_EQ(s.dimension(), 5u);
  for (std::size_t i = 0; i < s.dimension(); ++i)
    for (std::size_t j = 0; j < s.dimension(); ++j)
      EXPECT_NEAR(std::abs(hs_inner(s.basis[i], s.basis[j])), i == j ? 1.0 : 0.0, 1e-12);
  const ComplexMatrix p = subspace_projector(s);
  EXPECT_LT((p * p - p).frobenius_norm(), 1e-10);
  EXPECT_NEAR(p.trace().real(), 5.0, 1e-8);
}

TEST(Subspace, Equality) {
  const auto e1 = OperatorSubspace::span_of(1, std::vector{ComplexMatrix{{1}}});
  const auto same = subspaces_equal(e1, e1, 1e-8);
  EXPECT_TRUE(same.equal);
  EXPECT_EQ(same.distance, 0.0);

  ComplexMatrix a(2, 2), b(2, 2);
  a(0, 0) = 1.0;
  b(1, 1) = 1.0;
  const auto diff = subspaces_equal(OperatorSubspace::span_of(2, std::vector{a}), OperatorSubspace::span_of(2, std::vector{b}), 1e-8);
  EXPECT_FALSE(diff.equal);
  EXPECT_NEAR(diff.distance, std::numbers::sqrt2, 1e-14);
}

TEST(Subspace, RotatedBasisIsSameSubspace) {
  SplitMix64 rng(13);
  std::vector<ComplexMatrix> basis;
  for (int i = 0; i < 4; ++i) basis.push_back(random_gaussian_matrix(3, 3, rng));
  const auto s1 = OperatorSubspace::span_of(3, basis);
  const ComplexMatrix u = random_unitary(4, rng);
  std::vector<ComplexMatrix> rotated;
  for (std::size_t c = 0; c < 4; ++c) {
    ComplexMatrix m(3, 3);
    for (std::size_t r = 0; r < 4; ++r) m += u(r, c) * s1.basis[r];
    rotated.push_back(m);
  }
  const auto cmp = subspaces_equal(s1, OperatorSubspace::span_of(3, rotated), 1e-8);
  EXPECT_TRUE(cmp.equal) << cmp.distance;
}

TEST(Subspace, DimensionMismatch) {
  const auto a = OperatorSubspace::span_of(2, std::vector{ComplexMatrix::identity(2)});
  const auto b = OperatorSubspace::span_of(3, std::vector{ComplexMatrix::identity(3)});
  EXPECT_EQ(code_of([&] { subspaces_equal(a, b, 1e-8); }), ErrorCode::DimensionMismatch);
}

TEST(Random, SplitMixIsDeterministic) {
  SplitMix64 a(42), b(42), c(43);
  for (int i = 0; i < 10; ++i) {
    const auto x = a();
    EXPECT_EQ(x, b());
    EXPECT_NE(x, c());
  }
}

TEST(Random, KnownFirstOutputs) {
  // reference values of the published SplitMix64 stream for seed 0
  SplitMix64 g(0);
  EXPECT_EQ(g(), 0xe220a8397b1dcdafULL);
  EXPECT_EQ(g(), 0x6e789e6aa1b965f4ULL);
}

TEST(Random, UniformAndGaussianMoments) {
  SplitMix64 g(5);
  double sum = 0, sq = 0, usum = 0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const double x = g.gaussian();
    sum += x;
    sq += x * x;
    const double u = g.uniform();
    ASSERT_TRUE(u >= 0.0 && u < 1.0);
    usum += u;
  }
  EXPECT_NEAR(sum / n, 0.0, 0.03);
  EXPECT_NEAR(sq / n, 1.0, 0.05);
  EXPECT_NEAR(usum / n, 0.5, 0.01);
}

TEST(Random, UnitaryAndDensity) {
  SplitMix64 g(9);
  const ComplexMatrix u = random_unitary(6, g);
  EXPECT_LT((u.adjoint() * u - ComplexMatrix::identity(6)).frobenius_norm(), 1e-13);
  const ComplexMatrix rho = random_density(4, g);
  EXPECT_NEAR(rho.trace().real(), 1.0, 1e-14);
  EXPECT_GE(hermitian_eigendecompose(rho).eigenvalues.front(), -1e-14);
}
