#pragma once

// Small Hermitian-matrix helpers shared by the dereverberation, mixture-model
// and beamforming code. Templated on the Eigen expression so they accept
// blocks, maps and float or double storage alike.

#include <cmath>
#include <complex>

#include <Eigen/Dense>

#include "gss/types.hpp"

namespace gss::linalg {

/// (A + A^H) / 2
template <typename Derived>
typename Derived::PlainObject hermitian_part(const Eigen::MatrixBase<Derived>& a) {
  return (a + a.adjoint()) / typename Derived::Scalar(2);
}

/// max |A - A^H|
template <typename Derived>
typename Eigen::NumTraits<typename Derived::Scalar>::Real hermitian_defect(
    const Eigen::MatrixBase<Derived>& a) {
  if (a.size() == 0) return 0;
  return (a - a.adjoint()).cwiseAbs().maxCoeff();
}

/// Real part of the trace.
template <typename Derived>
typename Eigen::NumTraits<typename Derived::Scalar>::Real real_trace(
    const Eigen::MatrixBase<Derived>& a) {
  return std::real(a.trace());
}

/// Adds `factor * trace(A) / dim` to the diagonal of A in place.
template <typename Derived>
void load_diagonal(Eigen::MatrixBase<Derived>& a,
                   typename Eigen::NumTraits<typename Derived::Scalar>::Real factor) {
  using RealScalar = typename Eigen::NumTraits<typename Derived::Scalar>::Real;
  const auto dim = a.rows();
  if (dim == 0) return;
  RealScalar amount = factor * real_trace(a) / static_cast<RealScalar>(dim);
  if (!(amount > 0)) amount = factor > 0 ? factor : RealScalar(0);
  a.diagonal().array() += typename Derived::Scalar(amount);
}

/// Cholesky factorization of a Hermitian matrix with escalating diagonal
/// loading. The first attempt uses `loading`; each retry multiplies it by ten.
/// Throws NumericalError when every attempt fails.
template <typename MatrixType>
Eigen::LLT<MatrixType> loaded_llt(const MatrixType& a,
                                  typename Eigen::NumTraits<typename MatrixType::Scalar>::Real loading,
                                  int retries = 3) {
  using RealScalar = typename Eigen::NumTraits<typename MatrixType::Scalar>::Real;
  RealScalar factor = loading;
  for (int attempt = 0; attempt <= retries; ++attempt) {
    MatrixType loaded = a;
    if (factor > 0) load_diagonal(loaded, factor);
    Eigen::LLT<MatrixType> llt(loaded);
    if (llt.info() == Eigen::Success) {
      const auto diag = llt.matrixLLT().diagonal();
      bool ok = true;
      for (Eigen::Index i = 0; i < diag.size(); ++i) {
        const RealScalar d = std::real(diag(i));
        if (!(d > 0) || !std::isfinite(d)) ok = false;
      }
      if (ok) return llt;
    }
    factor = factor > 0 ? factor * RealScalar(10) : RealScalar(1e-10);
  }
  throw NumericalError("matrix is not positive definite after diagonal loading");
}

/// log det of the matrix factorized by `llt`.
template <typename MatrixType>
typename Eigen::NumTraits<typename MatrixType::Scalar>::Real log_det(
    const Eigen::LLT<MatrixType>& llt) {
  using RealScalar = typename Eigen::NumTraits<typename MatrixType::Scalar>::Real;
  RealScalar acc = 0;
  const auto diag = llt.matrixLLT().diagonal();
  for (Eigen::Index i = 0; i < diag.size(); ++i) acc += std::log(std::real(diag(i)));
  return RealScalar(2) * acc;
}

}  // namespace gss::linalg
