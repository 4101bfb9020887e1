// SPDX-License-Identifier: Apache-2.0
//
// risbc - sum-rate optimization for RIS-aided MIMO broadcast channels
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
// ------------------------------------------------------------------------

#ifndef RISBC_COMMON_HPP
#define RISBC_COMMON_HPP

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace risbc {

template <class Real> using Complex = std::complex<Real>;

template <class Real>
using MatC = Eigen::Matrix<Complex<Real>, Eigen::Dynamic, Eigen::Dynamic>;
template <class Real>
using VecC = Eigen::Matrix<Complex<Real>, Eigen::Dynamic, 1>;
template <class Real>
using RowC = Eigen::Matrix<Complex<Real>, 1, Eigen::Dynamic>;
template <class Real>
using VecR = Eigen::Matrix<Real, Eigen::Dynamic, 1>;

// Thrown when matrix/vector dimensions do not agree with the system layout.
class DimensionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Thrown when a numerical precondition fails (non-Hermitian input, negative
// eigenvalue beyond tolerance, infeasible start, ...).
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Thrown on malformed experiment/config input.
class SpecError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

template <class Real> constexpr Real pi_v = Real(3.141592653589793238462643383279502884L);

// (x)_+ = max(0, x)
template <class Real> inline Real pos(Real x) { return x > Real(0) ? x : Real(0); }

template <class Real> inline Real ln2_v() { return std::log(Real(2)); }

// 0.5 * (X + X^H); all Hermitian intermediates are passed through this to
// keep round-off drift out of eigensolvers. Accepts any dense expression.
template <class Derived>
inline typename Derived::PlainObject hermitize(const Eigen::MatrixBase<Derived>& x) {
    using Scalar = typename Derived::Scalar;
    return Scalar(0.5) * (x + x.adjoint()).eval();
}

template <class Derived>
inline typename Eigen::NumTraits<typename Derived::Scalar>::Real
hermitian_drift(const Eigen::MatrixBase<Derived>& x) {
    return (x - x.adjoint()).norm();
}

// log(det(M)) for Hermitian positive definite M, via Cholesky.
template <class Derived>
inline typename Eigen::NumTraits<typename Derived::Scalar>::Real
logdet_hpd(const Eigen::MatrixBase<Derived>& m) {
    using Real = typename Eigen::NumTraits<typename Derived::Scalar>::Real;
    Eigen::LLT<typename Derived::PlainObject> llt(m);
    if (llt.info() != Eigen::Success)
        throw NumericalError("logdet_hpd: matrix is not positive definite");
    Real acc = 0;
    const auto& l = llt.matrixLLT();
    for (Eigen::Index i = 0; i < l.rows(); ++i)
        acc += std::log(std::real(l(i, i)));
    return Real(2) * acc;
}

// Largest eigenvalue of a Hermitian PSD matrix.
template <class Derived>
inline typename Eigen::NumTraits<typename Derived::Scalar>::Real
lambda_max_hermitian(const Eigen::MatrixBase<Derived>& m) {
    Eigen::SelfAdjointEigenSolver<typename Derived::PlainObject> es(
        m, Eigen::EigenvaluesOnly);
    return es.eigenvalues().maxCoeff();
}

} // namespace risbc

#endif
