#include <gtest/gtest.h>

#include <cmath>

#include "bmtensor/linalg.hpp"
#include "bmtensor/random.hpp"
#include "bmtensor/tensor.hpp"
#include "bmtensor/verifier.hpp"
#include "test_support.hpp"

using namespace bmtensor;
using bmtensor::testing::brute_force_cp;
using bmtensor::testing::random_symmetric;

namespace {

bool all_permutations_equal(const SymTensor3& t) {
  const Index n = t.dim();
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j)
      for (Index k = 0; k < n; ++k) {
        const double v = t(i, j, k);
        if (t(i, k, j) != v || t(j, i, k) != v || t(j, k, i) != v || t(k, i, j) != v ||
            t(k, j, i) != v)
          return false;
      }
  return true;
}

Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Index>(xs.size()));
  Index i = 0;
  for (double x : xs) v(i++) = x;
  return v;
}

}  // namespace

TEST(Outer3, BasisVector) {
  const SymTensor3 t = outer3(Vector::Unit(2, 0));
  EXPECT_EQ(t(0, 0, 0), 1.0);
  double others = 0.0;
  for (double x : t.data()) others += std::abs(x);
  EXPECT_EQ(others, 1.0);
}

TEST(Outer3, ZeroVector) {
  const SymTensor3 t = outer3(Vector::Zero(3));
  for (double x : t.data()) EXPECT_EQ(x, 0.0);
}

TEST(Outer3, CoordinateProducts) {
  const SymTensor3 t = outer3(vec({1, 2}));
  EXPECT_EQ(t(0, 1, 1), 4.0);
  EXPECT_EQ(t(1, 1, 1), 8.0);
}

TEST(Outer3, EmptyVectorThrows) {
  EXPECT_THROW(outer3(Vector(0)), std::invalid_argument);
}

TEST(BuildFromFactors, IdentityColumns) {
  const SymTensor3 t = build_from_factors(Matrix::Identity(2, 2));
  EXPECT_EQ(t(0, 0, 0), 1.0);
  EXPECT_EQ(t(1, 1, 1), 1.0);
  EXPECT_EQ(t(0, 0, 1), 0.0);
  EXPECT_EQ(t(0, 1, 1), 0.0);
}

TEST(BuildFromFactors, SingleColumnIsOuter3) {
  Rng rng(3);
  const Vector u = rng.gaussian_vector(5);
  const SymTensor3 a = build_from_factors(u);
  const SymTensor3 b = outer3(u);
  EXPECT_LE(fro_norm(a - b), 1e-14 * fro_norm(b));
}

TEST(BuildFromFactors, MatchesTripleLoop) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    const Index n = 1 + static_cast<Index>(seed % 7), r = 1 + static_cast<Index>(seed % 4);
    const Matrix U = rng.gaussian_matrix(n, r);
    const SymTensor3 got = build_from_factors(U);
    const SymTensor3 want = brute_force_cp(U);
    EXPECT_LE(fro_norm(got - want), 1e-13 * (1.0 + fro_norm(want))) << "seed " << seed;
  }
}

TEST(BuildFromFactors, BitExactSymmetry) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Rng rng(seed);
    const SymTensor3 t = build_from_factors(rng.gaussian_matrix(6, 4));
    EXPECT_TRUE(all_permutations_equal(t));
    EXPECT_EQ(t.max_asymmetry(), 0.0);
    EXPECT_TRUE(all_permutations_equal(outer3(rng.gaussian_vector(5))));
  }
}

TEST(BuildFromFactors, EmptyThrows) {
  EXPECT_THROW(build_from_factors(Matrix(3, 0)), std::invalid_argument);
}

TEST(Arithmetic, PreservesSymmetry) {
  Rng rng(8);
  const SymTensor3 a = build_from_factors(rng.gaussian_matrix(5, 3));
  const SymTensor3 b = build_from_factors(rng.gaussian_matrix(5, 2));
  EXPECT_TRUE(all_permutations_equal(a + b));
  EXPECT_TRUE(all_permutations_equal(a - 0.3 * b));
}

TEST(Arithmetic, DimensionMismatchThrows) {
  SymTensor3 a(3);
  EXPECT_THROW(a += SymTensor3(4), std::invalid_argument);
  EXPECT_THROW(inner(a, SymTensor3(2)), std::invalid_argument);
}

TEST(SymTensor3, WrongDataLengthThrows) {
  EXPECT_THROW(SymTensor3(2, std::vector<double>(7)), std::invalid_argument);
}

TEST(SymTensor3, SymmetrizeAveragesOrbits) {
  SymTensor3 t(3);
  t(0, 1, 2) = 6.0;
  t.symmetrize();
  EXPECT_DOUBLE_EQ(t(2, 1, 0), 1.0);
  EXPECT_DOUBLE_EQ(t(0, 1, 2), 1.0);
  EXPECT_EQ(t.max_asymmetry(), 0.0);
}

TEST(Inner, BasisVectors) {
  const SymTensor3 e = outer3(Vector::Unit(3, 0));
  EXPECT_EQ(inner(e, e), 1.0);
  EXPECT_EQ(inner(e, SymTensor3(3)), 0.0);
}

TEST(Inner, CubeOfDotProduct) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Rng rng(seed);
    const Index n = 1 + static_cast<Index>(seed % 16);
    const Vector u = rng.gaussian_vector(n), v = rng.gaussian_vector(n);
    const SymTensor3 U = outer3(u), V = outer3(v);
    // Entrywise oracle.
    double loop = 0.0;
    for (std::size_t q = 0; q < U.size(); ++q) loop += U.data()[q] * V.data()[q];
    const double d = u.dot(v);
    const double scale = std::pow(u.norm() * v.norm(), 3.0);
    EXPECT_LE(std::abs(inner(U, V) - d * d * d), 1e-12 * scale);
    EXPECT_LE(std::abs(loop - d * d * d), 1e-12 * scale);
  }
}

TEST(Inner, SelfInnerIsSquaredNorm) {
  const SymTensor3 t = random_symmetric(4, 11);
  EXPECT_NEAR(inner(t, t), fro_norm(t) * fro_norm(t), 1e-12 * inner(t, t));
}

TEST(Matricize1, BasisTensor) {
  const Matrix m = matricize1(outer3(Vector::Unit(2, 0)));
  ASSERT_EQ(m.rows(), 2);
  ASSERT_EQ(m.cols(), 4);
  EXPECT_EQ(m(0, 0), 1.0);
  EXPECT_EQ(m.cwiseAbs().sum(), 1.0);
}

TEST(Matricize1, ColumnLayout) {
  const SymTensor3 t = random_symmetric(4, 2);
  const Matrix m = matricize1(t);
  for (Index k = 0; k < 4; ++k)
    for (Index j = 0; j < 4; ++j)
      for (Index i = 0; i < 4; ++i) EXPECT_EQ(m(i, j + 4 * k), t(i, j, k));
}

TEST(Matricize1, NormAndRoundTrip) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const SymTensor3 t = random_symmetric(5, seed);
    const Matrix m = matricize1(t);
    EXPECT_EQ(m.norm(), Eigen::Map<const Vector>(t.data().data(), 125).norm());
    const SymTensor3 back = refold1(m);
    for (std::size_t q = 0; q < t.size(); ++q) EXPECT_EQ(back.data()[q], t.data()[q]);
  }
}

TEST(Refold1, WrongShapeThrows) {
  EXPECT_THROW(refold1(Matrix::Zero(3, 8)), std::invalid_argument);
}

TEST(KhatriRao, BasisColumn) {
  const Matrix e = Matrix::Identity(2, 1);
  const Matrix kr = khatri_rao(e, e);
  ASSERT_EQ(kr.rows(), 4);
  EXPECT_EQ(kr(0, 0), 1.0);
  EXPECT_EQ(kr.cwiseAbs().sum(), 1.0);
}

TEST(KhatriRao, UnfoldingIdentity) {
  // (U o U o U)_(1) = U (U * U)^T entrywise.
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(100 + seed);
    const Index n = 2 + static_cast<Index>(seed % 5), r = 1 + static_cast<Index>(seed % 4);
    const Matrix U = rng.gaussian_matrix(n, r);
    const Matrix lhs = matricize1(brute_force_cp(U));
    const Matrix rhs = U * khatri_rao(U, U).transpose();
    EXPECT_LE((lhs - rhs).cwiseAbs().maxCoeff(), 1e-13 * (1.0 + lhs.cwiseAbs().maxCoeff()));
  }
}

TEST(KhatriRao, RowConvention) {
  Rng rng(5);
  const Matrix U = rng.gaussian_matrix(3, 2), V = rng.gaussian_matrix(4, 2);
  const Matrix kr = khatri_rao(U, V);
  for (Index p = 0; p < 2; ++p)
    for (Index k = 0; k < 3; ++k)
      for (Index j = 0; j < 4; ++j) EXPECT_EQ(kr(j + 4 * k, p), U(k, p) * V(j, p));
}

TEST(KhatriRao, ColumnMismatchThrows) {
  EXPECT_THROW(khatri_rao(Matrix::Zero(2, 2), Matrix::Zero(2, 3)), std::invalid_argument);
}

TEST(KhatriRao, NormBoundProperty) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Rng rng(seed);
    const Matrix U = rng.gaussian_matrix(2 + static_cast<Index>(seed % 7),
                                         1 + static_cast<Index>(seed % 6));
    const double lhs = spectral_norm(khatri_rao(U, U));
    const double u = spectral_norm(U);
    EXPECT_LE(lhs, u * u + 1e-9);
  }
}

TEST(Hadamard, Examples) {
  Rng rng(9);
  const Matrix a = rng.gaussian_matrix(3, 3), b = rng.gaussian_matrix(3, 3);
  const Matrix h = hadamard(a, b);
  for (Index i = 0; i < 3; ++i)
    for (Index j = 0; j < 3; ++j) EXPECT_EQ(h(i, j), a(i, j) * b(i, j));
  EXPECT_EQ(hadamard(a, Matrix::Identity(3, 3)), Matrix(a.diagonal().asDiagonal()));
  EXPECT_EQ(hadamard(Matrix::Ones(3, 3), b), b);
  EXPECT_THROW(hadamard(a, Matrix::Zero(2, 3)), std::invalid_argument);
}

TEST(Contract12, RankOneIdentity) {
  Rng rng(4);
  const Vector a = rng.gaussian_vector(5);
  const Vector w = contract12(outer3(a), a, a);
  const Vector want = std::pow(a.squaredNorm(), 2.0) * a;
  EXPECT_LE((w - want).norm(), 1e-12 * want.norm());
}

TEST(Contract12, ZeroTensor) {
  Rng rng(4);
  EXPECT_EQ(contract12(SymTensor3(4), rng.gaussian_vector(4), rng.gaussian_vector(4)).norm(), 0.0);
}

TEST(Contract12, MatchesTripleLoop) {
  const SymTensor3 t = random_symmetric(5, 21);
  Rng rng(22);
  const Vector u = rng.gaussian_vector(5), v = rng.gaussian_vector(5), z = rng.gaussian_vector(5);
  const Vector w = contract12(t, u, v);
  const Matrix m = contract1(t, u);
  double full = 0.0;
  for (Index k = 0; k < 5; ++k) {
    double s = 0.0;
    for (Index i = 0; i < 5; ++i)
      for (Index j = 0; j < 5; ++j) {
        s += t(i, j, k) * u(i) * v(j);
        double mij = 0.0;
        for (Index q = 0; q < 5; ++q) mij += t(q, j, k) * u(q);
        if (i == 0) EXPECT_NEAR(m(j, k), mij, 1e-12);
        full += t(i, j, k) * u(i) * v(j) * z(k);
      }
    EXPECT_NEAR(w(k), s, 1e-12);
  }
  EXPECT_NEAR(contract123(t, u, v, z), full, 1e-11);
  EXPECT_THROW(contract12(t, Vector::Zero(4), v), std::invalid_argument);
}

TEST(SpectralNorm, Examples) {
  EXPECT_NEAR(spectral_norm(Matrix::Identity(3, 3)), 1.0, 1e-12);
  EXPECT_NEAR(spectral_norm(Vector(vec({1, 2, 3})).asDiagonal().toDenseMatrix()), 3.0, 1e-9);
}

TEST(SpectralNorm, MatchesJacobiOracle) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Rng rng(seed);
    const Matrix a = rng.gaussian_matrix(5, 7);
    const SymmetricEigen eig = jacobi_eigen(a * a.transpose());
    const double oracle = std::sqrt(eig.values(eig.values.size() - 1));
    const PowerIterationResult got = matrix_spectral_norm(a);
    EXPECT_TRUE(got.converged);
    EXPECT_NEAR(got.value, oracle, 1e-8 * oracle);
  }
}

TEST(TensorOpNorm, Examples) {
  EXPECT_NEAR(tensor_op_norm_estimate(outer3(Vector::Unit(4, 0)), 4), 1.0, 1e-9);
  Rng rng(7);
  const Vector u = rng.unit_vector(6);
  EXPECT_NEAR(tensor_op_norm_estimate(2.5 * outer3(u), 4), 2.5, 1e-9);
  // Orthogonal factors with lambda = (3, 1).
  Matrix U = Matrix::Zero(3, 2);
  U(0, 0) = std::cbrt(3.0);
  U(1, 1) = 1.0;
  EXPECT_NEAR(tensor_op_norm_estimate(build_from_factors(U), 8), 3.0, 1e-6);
  EXPECT_THROW(tensor_op_norm_estimate(outer3(u), 0), std::invalid_argument);
}

TEST(TensorOpNorm, BelowUnfoldingNorm) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const SymTensor3 q = random_symmetric(2 + static_cast<Index>(seed % 6), seed);
    const InequalityCheck c = unfolding_norm_bound(q, 4);
    EXPECT_TRUE(c.holds()) << c.lhs << " vs " << c.rhs;
  }
}

TEST(TwoToPNorm, Examples) {
  const Matrix e1 = Matrix::Identity(3, 1);
  for (int p : {3, 4}) {
    EXPECT_NEAR(two_to_p_norm_estimate(e1, p, 4), 1.0, 1e-9);
    EXPECT_NEAR(two_to_p_norm_estimate(2.0 * e1, p, 4), 2.0, 1e-9);
    Rng rng(p);
    const Matrix q = Eigen::HouseholderQR<Matrix>(rng.gaussian_matrix(2, 2)).householderQ();
    EXPECT_NEAR(two_to_p_norm_estimate(q, p, 8), 1.0, 1e-8);
  }
  EXPECT_THROW(two_to_p_norm_estimate(e1, 2, 4), std::invalid_argument);
}
