#pragma once

// Dense symmetric linear algebra shared by every other module.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <string>

#include "w2s/error.hpp"

namespace w2s {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using Index = Eigen::Index;

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Eigenpairs of a symmetric matrix, eigenvalues sorted descending.
template <typename Scalar>
struct SymEig {
  VectorX<Scalar> values;
  MatrixX<Scalar> vectors;
};

inline constexpr double kSymmetryTol = 1e-8;

template <typename Derived>
bool all_finite(const Eigen::DenseBase<Derived>& a) {
  return a.derived().array().isFinite().all();
}

template <typename Derived>
void require_finite(const Eigen::DenseBase<Derived>& a, const char* what) {
  if (!all_finite(a)) throw Error(Errc::NonFinite, std::string(what) + " has non-finite entries");
}

/// max|a_ij - a_ji| relative to max(1, max|a_ij|).
template <typename Derived>
typename Derived::Scalar relative_asymmetry(const Eigen::MatrixBase<Derived>& a) {
  using Scalar = typename Derived::Scalar;
  if (a.size() == 0) return Scalar(0);
  const Scalar scale = std::max(Scalar(1), a.cwiseAbs().maxCoeff());
  return (a - a.transpose()).cwiseAbs().maxCoeff() / scale;
}

/// Symmetric part of a square matrix that is symmetric up to rounding.
template <typename Derived>
MatrixX<typename Derived::Scalar> symmetrized(const Eigen::MatrixBase<Derived>& a) {
  using Scalar = typename Derived::Scalar;
  if (a.rows() != a.cols()) throw Error(Errc::DimensionMismatch, "matrix is not square");
  require_finite(a, "matrix");
  if (relative_asymmetry(a) > Scalar(kSymmetryTol))
    throw Error(Errc::NonSymmetric, "asymmetry exceeds 1e-8");
  return (a + a.transpose()) / Scalar(2);
}

/// Flips each column so that its first component with |v_i| > 1e-12 is positive.
template <typename Derived>
void canonicalize_signs(Eigen::MatrixBase<Derived>& v) {
  for (Index j = 0; j < v.cols(); ++j) {
    for (Index i = 0; i < v.rows(); ++i) {
      if (std::abs(v(i, j)) > 1e-12) {
        if (v(i, j) < 0) v.col(j) = -v.col(j);
        break;
      }
    }
  }
}

template <typename Derived>
SymEig<typename Derived::Scalar> sym_eig(const Eigen::MatrixBase<Derived>& a) {
  using Scalar = typename Derived::Scalar;
  const MatrixX<Scalar> sym = symmetrized(a);
  SymEig<Scalar> out;
  if (sym.rows() == 0) return out;
  Eigen::SelfAdjointEigenSolver<MatrixX<Scalar>> solver(sym);
  if (solver.info() != Eigen::Success) throw Error(Errc::NonFinite, "eigensolver did not converge");
  // Eigen sorts ascending.
  out.values = solver.eigenvalues().reverse();
  out.vectors = solver.eigenvectors().rowwise().reverse();
  canonicalize_signs(out.vectors);
  return out;
}

template <typename Derived>
VectorX<typename Derived::Scalar> sym_eigenvalues(const Eigen::MatrixBase<Derived>& a) {
  using Scalar = typename Derived::Scalar;
  const MatrixX<Scalar> sym = symmetrized(a);
  if (sym.rows() == 0) return {};
  Eigen::SelfAdjointEigenSolver<MatrixX<Scalar>> solver(sym, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw Error(Errc::NonFinite, "eigensolver did not converge");
  return solver.eigenvalues().reverse();
}

/// Largest singular value via the top eigenvalue of the smaller Gram matrix.
template <typename Derived>
typename Derived::Scalar operator_norm(const Eigen::MatrixBase<Derived>& a) {
  using Scalar = typename Derived::Scalar;
  require_finite(a, "matrix");
  if (a.size() == 0) return Scalar(0);
  const Index k = std::min(a.rows(), a.cols());
  MatrixX<Scalar> gram = MatrixX<Scalar>::Zero(k, k);
  if (a.rows() >= a.cols())
    gram.template selfadjointView<Eigen::Lower>().rankUpdate(a.transpose());
  else
    gram.template selfadjointView<Eigen::Lower>().rankUpdate(a);
  // The solver reads only the lower triangle.
  Eigen::SelfAdjointEigenSolver<MatrixX<Scalar>> solver(gram, Eigen::EigenvaluesOnly);
  return std::sqrt(std::max(Scalar(0), solver.eigenvalues().maxCoeff()));
}

/// Zeroes eigenvalues in [-tol, 0). Throws if any eigenvalue is below -tol.
template <typename Derived>
MatrixX<typename Derived::Scalar> psd_clamp(const Eigen::MatrixBase<Derived>& a,
                                            typename Derived::Scalar tol) {
  using Scalar = typename Derived::Scalar;
  auto eig = sym_eig(a);
  if (eig.values.size() == 0) return MatrixX<Scalar>(0, 0);
  const Scalar lowest = eig.values.minCoeff();
  if (lowest < -tol)
    throw Error(Errc::EigenvalueBelowTolerance,
                "smallest eigenvalue " + std::to_string(lowest) + " is below -tol");
  if (lowest >= Scalar(0)) return symmetrized(a);
  VectorX<Scalar> clamped = eig.values.cwiseMax(Scalar(0));
  return eig.vectors * clamped.asDiagonal() * eig.vectors.transpose();
}

}  // namespace w2s
