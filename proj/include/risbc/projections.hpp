// SPDX-License-Identifier: Apache-2.0
//
// risbc - sum-rate optimization for RIS-aided MIMO broadcast channels
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
// ------------------------------------------------------------------------

#ifndef RISBC_PROJECTIONS_HPP
#define RISBC_PROJECTIONS_HPP

#include "risbc/model.hpp"

namespace risbc {

// Euclidean projection onto the PSD cone: clip negative eigenvalues.
// Inputs with Hermitian drift up to `herm_tol` are symmetrized first;
// anything worse is rejected.
template <class Real>
MatC<Real> project_psd(const MatC<Real>& x, Real herm_tol = Real(1e-8)) {
    if (x.rows() != x.cols()) throw DimensionError("project_psd: matrix not square");
    if (hermitian_drift(x) > herm_tol)
        throw NumericalError("project_psd: input not Hermitian within tolerance");
    const MatC<Real> xs = hermitize(x);
    Eigen::SelfAdjointEigenSolver<MatC<Real>> es(xs);
    if (es.info() != Eigen::Success)
        throw NumericalError("project_psd: eigendecomposition failed");
    VecR<Real> ev = es.eigenvalues();
    for (Eigen::Index i = 0; i < ev.size(); ++i) ev(i) = pos(ev(i));
    return hermitize(es.eigenvectors() * ev.asDiagonal() *
                           es.eigenvectors().adjoint());
}

namespace detail {

// Water level eta solving sum_k sum_i (e_{k,i} - eta)_+ = P by bisection
// on [0, max e]. Caller guarantees the clipped sum exceeds P at eta = 0.
template <class Real>
Real water_level(const std::vector<VecR<Real>>& eigs, Real power_budget) {
    Real hi = 0;
    for (const auto& e : eigs) hi = std::max(hi, e.maxCoeff());
    Real lo = 0;
    const Real tol = Real(1e-12) * std::max(Real(1), power_budget);
    auto clipped_sum = [&](Real eta) {
        Real s = 0;
        for (const auto& e : eigs)
            for (Eigen::Index i = 0; i < e.size(); ++i) s += pos(e(i) - eta);
        return s;
    };
    while (hi - lo > tol) {
        const Real mid = (hi + lo) / Real(2);
        if (mid == lo || mid == hi) break; // bracket at float resolution
        if (clipped_sum(mid) > power_budget)
            lo = mid;
        else
            hi = mid;
    }
    return (hi + lo) / Real(2);
}

} // namespace detail

// Euclidean projection onto S = { Sbar : Sbar_k PSD, sum_k tr Sbar_k <= P }.
// Eigenvalues are water-filled in the shared eigenbasis of each input; when
// the clipped input already fits the budget the water level is zero, so
// interior points project to their PSD clip only.
template <class Real>
CovarianceSet<Real> project_feasible_covariances(const CovarianceSet<Real>& sbar,
                                                 Real power_budget) {
    if (!(power_budget > Real(0)))
        throw SpecError("project_feasible_covariances: P must be > 0");

    const size_t k_users = sbar.s.size();
    std::vector<MatC<Real>> basis(k_users);
    std::vector<VecR<Real>> eigs(k_users);
    Real clipped_sum = 0;
    for (size_t k = 0; k < k_users; ++k) {
        Eigen::SelfAdjointEigenSolver<MatC<Real>> es(hermitize(sbar.s[k]));
        if (es.info() != Eigen::Success)
            throw NumericalError("project_feasible_covariances: eigendecomposition failed");
        basis[k] = es.eigenvectors();
        eigs[k] = es.eigenvalues();
        for (Eigen::Index i = 0; i < eigs[k].size(); ++i) clipped_sum += pos(eigs[k](i));
    }

    const Real eta = (clipped_sum <= power_budget)
                         ? Real(0)
                         : detail::water_level(eigs, power_budget);

    CovarianceSet<Real> out;
    out.domain = sbar.domain;
    out.s.resize(k_users);
    for (size_t k = 0; k < k_users; ++k) {
        VecR<Real> ev = eigs[k];
        for (Eigen::Index i = 0; i < ev.size(); ++i) ev(i) = pos(ev(i) - eta);
        out.s[k] = hermitize(basis[k] * ev.asDiagonal() * basis[k].adjoint());
    }
    return out;
}

// Euclidean projection onto the unit-modulus set: theta_l / |theta_l|.
// A zero entry may go anywhere on the circle; it is pinned to 1 + 0j for
// reproducibility.
template <class Real>
PhaseVector<Real> project_unit_modulus(const VecC<Real>& theta) {
    VecC<Real> out(theta.size());
    for (Eigen::Index i = 0; i < theta.size(); ++i) {
        const Real mag = std::abs(theta(i));
        out(i) = (mag == Real(0)) ? Complex<Real>(Real(1), Real(0)) : theta(i) / mag;
    }
    return PhaseVector<Real>(std::move(out));
}

} // namespace risbc

#endif
