// SPDX-License-Identifier: Apache-2.0
//
// risbc - sum-rate optimization for RIS-aided MIMO broadcast channels
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
// ------------------------------------------------------------------------

#ifndef RISBC_DUALITY_HPP
#define RISBC_DUALITY_HPP

#include "risbc/model.hpp"

namespace risbc {

namespace detail {

// Hermitian square roots of M = I + PSD via eigendecomposition. Eigenvalues
// sit at or above 1, so no regularization is involved; a value materially
// below 1 indicates a broken caller.
template <class Real>
void sqrt_and_invsqrt(const MatC<Real>& m, MatC<Real>& root, MatC<Real>& inv_root) {
    Eigen::SelfAdjointEigenSolver<MatC<Real>> es(hermitize(m));
    if (es.info() != Eigen::Success)
        throw NumericalError("sqrt_and_invsqrt: eigendecomposition failed");
    if (es.eigenvalues().minCoeff() < Real(1) - Real(1e-9))
        throw NumericalError("sqrt_and_invsqrt: eigenvalue below 1 on an I + PSD matrix");
    VecR<Real> r = es.eigenvalues();
    VecR<Real> ir = es.eigenvalues();
    for (Eigen::Index i = 0; i < r.size(); ++i) {
        r(i) = std::sqrt(r(i));
        ir(i) = Real(1) / r(i);
    }
    root = hermitize(es.eigenvectors() * r.asDiagonal() * es.eigenvectors().adjoint());
    inv_root =
        hermitize(es.eigenvectors() * ir.asDiagonal() * es.eigenvectors().adjoint());
}

} // namespace detail

// MAC -> BC covariance transformation. pi is the DPC encoding order, the
// same convention bc_user_rates uses: the user at position q is encoded
// after the users at positions < q and sees interference only from the
// positions > q. The conversion therefore walks the positions from the
// last encoded user to the first: for each user,
// A = I + H (sum of the later-encoded users' BC covariances) H^H is its
// BC interference term and B = I + sum of the earlier positions' MAC
// terms, and the SVD B^-1/2 H^H A^-1/2 = F Lambda W^H flips the MAC
// covariance into the BC (W is the right-singular factor, unrelated to
// the RIS-user channels G_k). The construction preserves the sum rate,
// and the sum power whenever Sbar carries no power in the channels' null
// spaces.
template <class Real>
CovarianceSet<Real> mac_to_bc(const CompositeChannels<Real>& h,
                              const CovarianceSet<Real>& sbar,
                              const std::vector<int>& pi) {
    if (sbar.domain != CovDomain::mac)
        throw DimensionError("mac_to_bc: input must be MAC covariances");
    const int k_users = h.users();
    if (sbar.users() != k_users || static_cast<int>(pi.size()) != k_users)
        throw DimensionError("mac_to_bc: size mismatch");
    const int nt = h.nt();

    // Prefix sums of MAC terms in position order:
    // mac_before[q] = sum_{r<q} H^H Sbar H over users pi(r).
    std::vector<MatC<Real>> mac_before(static_cast<size_t>(k_users) + 1);
    mac_before[0] = MatC<Real>::Zero(nt, nt);
    for (int q = 0; q < k_users; ++q) {
        const int user = pi[static_cast<size_t>(q)];
        const auto& hu = h.h[static_cast<size_t>(user)];
        mac_before[static_cast<size_t>(q) + 1] =
            mac_before[static_cast<size_t>(q)] +
            hu.adjoint() * sbar.s[static_cast<size_t>(user)] * hu;
    }

    CovarianceSet<Real> out;
    out.domain = CovDomain::bc;
    out.s.assign(static_cast<size_t>(k_users), MatC<Real>());

    MatC<Real> later_bc = MatC<Real>::Zero(nt, nt); // sum_{r>q} S_{pi(r)}
    for (int q = k_users - 1; q >= 0; --q) {
        const int user = pi[static_cast<size_t>(q)];
        const auto& hu = h.h[static_cast<size_t>(user)];
        const int nu = static_cast<int>(hu.rows());

        const MatC<Real> a = hermitize(MatC<Real>::Identity(nu, nu) +
                                             hu * later_bc * hu.adjoint());
        const MatC<Real> b = hermitize(MatC<Real>::Identity(nt, nt) +
                                             mac_before[static_cast<size_t>(q)]);
        MatC<Real> a_half, a_invhalf, b_half, b_invhalf;
        detail::sqrt_and_invsqrt(a, a_half, a_invhalf);
        detail::sqrt_and_invsqrt(b, b_half, b_invhalf);

        const MatC<Real> core = b_invhalf * hu.adjoint() * a_invhalf; // N_t x n_u
        Eigen::JacobiSVD<MatC<Real>> svd(core, Eigen::ComputeThinU | Eigen::ComputeThinV);
        const MatC<Real> f = svd.matrixU(); // N_t x r
        const MatC<Real> w = svd.matrixV(); // n_u x r

        const MatC<Real> mid = w.adjoint() * a_half * sbar.s[static_cast<size_t>(user)] *
                               a_half * w; // r x r
        out.s[static_cast<size_t>(user)] =
            hermitize(b_invhalf * f * mid * f.adjoint() * b_invhalf);
        later_bc += out.s[static_cast<size_t>(user)];
    }
    return out;
}

template <class Real>
struct DualityReport {
    Real mac_rate_bits = 0;
    Real bc_sum_rate_bits = 0;
    Real rate_gap_rel = 0;  // |sum BC - MAC| / (1 + MAC)
    Real power_mac = 0;
    Real power_bc = 0;
    Real power_gap_rel = 0; // |power BC - power MAC| / max(1e-300, power MAC)
    VecR<Real> per_user_rates;
    bool rate_ok = true;
    bool power_ok = true;
};

// Evaluates both sides of the duality and flags violations beyond the
// given relative tolerances.
template <class Real>
DualityReport<Real> verify_duality(const CompositeChannels<Real>& h,
                                   const CovarianceSet<Real>& sbar,
                                   const CovarianceSet<Real>& s_bc,
                                   const std::vector<int>& pi,
                                   Real rate_tol = Real(1e-8),
                                   Real power_tol = Real(1e-8)) {
    DualityReport<Real> rep;
    rep.mac_rate_bits = mac_sum_rate_nats(h, sbar) / ln2_v<Real>();
    rep.per_user_rates = bc_user_rates(h, s_bc, pi);
    rep.bc_sum_rate_bits = rep.per_user_rates.sum();
    rep.rate_gap_rel = std::abs(rep.bc_sum_rate_bits - rep.mac_rate_bits) /
                       (Real(1) + std::abs(rep.mac_rate_bits));
    rep.power_mac = sbar.sum_trace();
    rep.power_bc = s_bc.sum_trace();
    const Real denom = std::max(rep.power_mac, Real(1e-300));
    rep.power_gap_rel = std::abs(rep.power_bc - rep.power_mac) / denom;
    if (rep.power_mac == Real(0) && rep.power_bc == Real(0)) rep.power_gap_rel = 0;
    rep.rate_ok = rep.rate_gap_rel <= rate_tol;
    rep.power_ok = rep.power_gap_rel <= power_tol;
    return rep;
}

template <class Real>
std::vector<int> identity_ordering(int k_users) {
    std::vector<int> pi(static_cast<size_t>(k_users));
    std::iota(pi.begin(), pi.end(), 0);
    return pi;
}

} // namespace risbc

#endif
