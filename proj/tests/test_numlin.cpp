#include <gtest/gtest.h>

#include "oracles.hpp"
#include "w2s/numlin.hpp"

using namespace w2s;

TEST(SymEig, DiagonalKeepsStandardBasis) {
  Mat a(2, 2);
  a << 2, 0, 0, 1;
  const auto e = sym_eig(a);
  EXPECT_DOUBLE_EQ(e.values(0), 2);
  EXPECT_DOUBLE_EQ(e.values(1), 1);
  EXPECT_TRUE(e.vectors.isApprox(Mat::Identity(2, 2)));
}

TEST(SymEig, IdentityHasUnitEigenvalues) {
  const auto e = sym_eig(Mat::Identity(3, 3));
  EXPECT_TRUE(e.values.isApprox(Vec::Ones(3)));
}

TEST(SymEig, SwapMatrixMatchesCharacteristicPolynomial) {
  Mat a(2, 2);
  a << 0, 1, 1, 0;
  // lambda^2 - 1 = 0
  const auto e = sym_eig(a);
  EXPECT_NEAR(e.values(0), 1, 1e-14);
  EXPECT_NEAR(e.values(1), -1, 1e-14);
}

TEST(SymEig, RejectsAsymmetricAndNonFinite) {
  Mat a(2, 2);
  a << 1, 1, 0, 1;
  try {
    sym_eig(a);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::NonSymmetric);
  }
  a << 1, std::nan(""), std::nan(""), 1;
  try {
    sym_eig(a);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::NonFinite);
  }
}

TEST(SymEig, SymmetrizesRoundingLevelAsymmetry) {
  Mat a(2, 2);
  a << 1, 0.5 + 1e-12, 0.5, 1;
  EXPECT_NO_THROW(sym_eig(a));
}

TEST(SymEig, SignConventionFirstNonzeroPositive) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const auto e = sym_eig(oracle::random_symmetric(6, rng));
    for (Index j = 0; j < 6; ++j) {
      Index i = 0;
      while (std::abs(e.vectors(i, j)) <= 1e-12) ++i;
      EXPECT_GT(e.vectors(i, j), 0);
    }
  }
}

TEST(SymEig, RandomReconstructionAndJacobiAgreement) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const Mat a = oracle::random_symmetric(20, rng);
    const auto e = sym_eig(a);
    const Mat rec = e.vectors * e.values.asDiagonal() * e.vectors.transpose();
    const double scale = std::max(1.0, operator_norm(a));
    EXPECT_LE(oracle::spectral_norm(a - rec), 1e-8 * scale);
    EXPECT_LE((e.vectors.transpose() * e.vectors - Mat::Identity(20, 20)).cwiseAbs().maxCoeff(), 1e-10);
    const auto ref = oracle::jacobi_eigenvalues(a);
    for (int i = 0; i < 20; ++i) EXPECT_NEAR(e.values(i), ref[static_cast<std::size_t>(i)], 1e-10 * scale);
    for (int i = 1; i < 20; ++i) EXPECT_GE(e.values(i - 1), e.values(i));
  }
}

TEST(OperatorNorm, Examples) {
  EXPECT_NEAR(operator_norm(Mat::Identity(2, 2)), 1, 1e-15);
  Mat d = Mat::Zero(2, 2);
  d.diagonal() << 0.4, 0.02;
  EXPECT_NEAR(operator_norm(d), 0.4, 1e-15);
  Mat r(2, 2);
  r << 3, 4, 0, 0;
  EXPECT_NEAR(operator_norm(r), 5, 1e-14);
}

TEST(OperatorNorm, EqualsMaxAbsEigenvalueForSymmetric) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    const Mat a = oracle::random_symmetric(8, rng);
    const auto ev = oracle::jacobi_eigenvalues(a);
    const double expected = std::max(std::abs(ev.front()), std::abs(ev.back()));
    EXPECT_NEAR(operator_norm(a), expected, 1e-8 * expected);
  }
}

TEST(OperatorNorm, Submultiplicative) {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 100; ++trial) {
    const Mat a = oracle::random_matrix(5, 7, rng);
    const Mat b = oracle::random_matrix(7, 3, rng);
    EXPECT_LE(operator_norm(Mat(a * b)), operator_norm(a) * operator_norm(b) + 1e-10);
  }
}

TEST(OperatorNorm, WideAndTallAgree) {
  std::mt19937_64 rng(8);
  const Mat a = oracle::random_matrix(3, 9, rng);
  EXPECT_NEAR(operator_norm(a), operator_norm(Mat(a.transpose())), 1e-12);
  EXPECT_NEAR(operator_norm(a), oracle::spectral_norm(a), 1e-10);
}

TEST(PsdClamp, ClampsWithinTolerance) {
  Mat a = Mat::Zero(2, 2);
  a.diagonal() << 1, -1e-12;
  const Mat c = psd_clamp(a, 1e-10);
  EXPECT_NEAR(c(0, 0), 1, 1e-15);
  EXPECT_NEAR(c(1, 1), 0, 1e-15);
  EXPECT_NEAR(c(0, 1), 0, 1e-15);
}

TEST(PsdClamp, PsdInputUnchanged) {
  Mat a(2, 2);
  a << 2, 1, 1, 2;
  EXPECT_EQ(psd_clamp(a, 1e-10), a);
}

TEST(PsdClamp, IndefiniteInputRejected) {
  Mat a = Mat::Zero(2, 2);
  a.diagonal() << 1, -0.5;
  try {
    psd_clamp(a, 1e-10);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::EigenvalueBelowTolerance);
  }
}
