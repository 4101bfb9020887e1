// SPDX-License-Identifier: Apache-2.0
//
// risbc - sum-rate optimization for RIS-aided MIMO broadcast channels
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
// ------------------------------------------------------------------------

#ifndef RISBC_MODEL_HPP
#define RISBC_MODEL_HPP

#include "risbc/scenario.hpp"

#include <numeric>

namespace risbc {

// RIS reflection coefficients, one unit-modulus entry per element across
// all surfaces. diag(theta) is the reflection matrix F(theta).
template <class Real>
struct PhaseVector {
    VecC<Real> theta;

    PhaseVector() = default;
    explicit PhaseVector(VecC<Real> t) : theta(std::move(t)) {}

    static PhaseVector from_phases(const VecR<Real>& phi) {
        VecC<Real> t(phi.size());
        for (Eigen::Index i = 0; i < phi.size(); ++i)
            t(i) = std::polar(Real(1), phi(i));
        return PhaseVector(std::move(t));
    }

    static PhaseVector ones(Eigen::Index n) {
        return PhaseVector(VecC<Real>::Ones(n));
    }

    Eigen::Index size() const { return theta.size(); }

    Real max_modulus_error() const {
        Real worst = 0;
        for (Eigen::Index i = 0; i < theta.size(); ++i)
            worst = std::max(worst, std::abs(std::abs(theta(i)) - Real(1)));
        return worst;
    }

    void validate(Real tol = Real(1e-12)) const {
        if (max_modulus_error() > tol)
            throw NumericalError("PhaseVector: entry off the unit circle");
    }
};

enum class CovDomain { mac, bc };

// Per-user Hermitian PSD input covariances, either in the dual MAC
// (n_k x n_k) or in the BC (N_t x N_t).
template <class Real>
struct CovarianceSet {
    CovDomain domain = CovDomain::mac;
    std::vector<MatC<Real>> s;

    CovarianceSet() = default;
    CovarianceSet(CovDomain dom, std::vector<MatC<Real>> mats)
        : domain(dom), s(std::move(mats)) {}

    static CovarianceSet zero(CovDomain dom, const std::vector<int>& dims) {
        std::vector<MatC<Real>> mats;
        mats.reserve(dims.size());
        for (int n : dims) mats.push_back(MatC<Real>::Zero(n, n));
        return CovarianceSet(dom, std::move(mats));
    }

    // Uniform feasible start: (P / (K n_k)) I per user.
    static CovarianceSet uniform_mac(const std::vector<int>& dims, Real total_power) {
        std::vector<MatC<Real>> mats;
        mats.reserve(dims.size());
        const Real k = Real(dims.size());
        for (int n : dims)
            mats.push_back((total_power / (k * Real(n))) * MatC<Real>::Identity(n, n));
        return CovarianceSet(CovDomain::mac, std::move(mats));
    }

    int users() const { return static_cast<int>(s.size()); }

    Real sum_trace() const {
        Real t = 0;
        for (const auto& m : s) t += std::real(m.trace());
        return t;
    }

    Real min_eigenvalue() const {
        Real worst = std::numeric_limits<Real>::infinity();
        for (const auto& m : s) {
            Eigen::SelfAdjointEigenSolver<MatC<Real>> es(m, Eigen::EigenvaluesOnly);
            worst = std::min(worst, es.eigenvalues().minCoeff());
        }
        return worst;
    }

    Real max_hermitian_drift() const {
        Real worst = 0;
        for (const auto& m : s) worst = std::max(worst, hermitian_drift(m));
        return worst;
    }

    void validate(Real power_budget, Real herm_tol = Real(1e-10),
                  Real psd_tol = Real(1e-10), Real power_tol = Real(1e-9)) const {
        if (max_hermitian_drift() > herm_tol)
            throw NumericalError("CovarianceSet: matrix not Hermitian");
        if (min_eigenvalue() < -psd_tol)
            throw NumericalError("CovarianceSet: matrix not PSD");
        if (sum_trace() > power_budget + power_tol)
            throw NumericalError("CovarianceSet: power budget exceeded");
    }
};

// Composite channels H_k = D_k + G_k diag(theta) U.
template <class Real>
struct CompositeChannels {
    std::vector<MatC<Real>> h;

    int users() const { return static_cast<int>(h.size()); }
    int nt() const { return h.empty() ? 0 : static_cast<int>(h.front().cols()); }
    int n_of(int k) const { return static_cast<int>(h[static_cast<size_t>(k)].rows()); }

    std::vector<int> user_dims() const {
        std::vector<int> dims(h.size());
        for (size_t k = 0; k < h.size(); ++k) dims[k] = static_cast<int>(h[k].rows());
        return dims;
    }
};

// The shared diag(theta) U product is formed once; each user then costs one
// n_k x m by m x N_t multiply.
template <class Real>
CompositeChannels<Real> composite_channel(const ChannelSet<Real>& channels,
                                          const PhaseVector<Real>& theta) {
    const Eigen::Index m = channels.u.rows();
    if (theta.size() != m)
        throw DimensionError("composite_channel: theta length != N_s * N_ris");
    CompositeChannels<Real> out;
    out.h.resize(channels.d.size());
    if (m == 0) {
        for (size_t k = 0; k < channels.d.size(); ++k) out.h[k] = channels.d[k];
        return out;
    }
    const MatC<Real> fu = theta.theta.asDiagonal() * channels.u;
    for (size_t k = 0; k < channels.d.size(); ++k) {
        if (channels.g[k].cols() != m)
            throw DimensionError("composite_channel: G_k column count != N_s * N_ris");
        out.h[k] = channels.d[k] + channels.g[k] * fu;
    }
    return out;
}

// H_sum = I + sum_k H_k^H Sbar_k H_k. Every evaluation of the objective,
// the Lagrangian and the gradients factors through this Gram matrix.
template <class Real>
MatC<Real> mac_gram(const CompositeChannels<Real>& h, const CovarianceSet<Real>& sbar) {
    if (sbar.users() != h.users())
        throw DimensionError("mac_gram: covariance/user count mismatch");
    const int nt = h.nt();
    MatC<Real> m = MatC<Real>::Identity(nt, nt);
    for (int k = 0; k < h.users(); ++k) {
        const auto& hk = h.h[static_cast<size_t>(k)];
        if (sbar.s[static_cast<size_t>(k)].rows() != hk.rows())
            throw DimensionError("mac_gram: covariance size != n_k");
        m.noalias() += hk.adjoint() * sbar.s[static_cast<size_t>(k)] * hk;
    }
    return hermitize(m);
}

template <class Real>
Real mac_sum_rate_nats_from_gram(const MatC<Real>& gram) {
    return logdet_hpd(gram);
}

template <class Real>
Real mac_sum_rate_nats(const CompositeChannels<Real>& h, const CovarianceSet<Real>& sbar) {
    return logdet_hpd(mac_gram(h, sbar));
}

// Dual-MAC sum rate f(theta, Sbar) = log2 |I + sum_k H_k^H Sbar_k H_k|
// in bit/s/Hz. Rejects covariance sets that are not PSD within tolerance.
template <class Real>
Real mac_sum_rate(const CompositeChannels<Real>& h, const CovarianceSet<Real>& sbar,
                  Real psd_tol = Real(1e-8)) {
    if (sbar.domain != CovDomain::mac)
        throw DimensionError("mac_sum_rate: covariances must be in the MAC domain");
    if (sbar.min_eigenvalue() < -psd_tol)
        throw NumericalError("mac_sum_rate: covariance not PSD within tolerance");
    return mac_sum_rate_nats(h, sbar) / ln2_v<Real>();
}

// Per-user DPC rates in the BC under encoding order pi (a permutation of
// {0..K-1}); user pi(k) sees interference only from users encoded after it.
// The sum is independent of pi.
template <class Real>
VecR<Real> bc_user_rates(const CompositeChannels<Real>& h, const CovarianceSet<Real>& s_bc,
                         const std::vector<int>& pi) {
    if (s_bc.domain != CovDomain::bc)
        throw DimensionError("bc_user_rates: covariances must be in the BC domain");
    const int k_users = h.users();
    if (static_cast<int>(pi.size()) != k_users || s_bc.users() != k_users)
        throw DimensionError("bc_user_rates: ordering/covariance size mismatch");
    const int nt = h.nt();
    VecR<Real> rates(k_users);
    MatC<Real> suffix = MatC<Real>::Zero(nt, nt); // sum_{j>k} S_{pi(j)}
    for (int k = k_users - 1; k >= 0; --k) {
        const int user = pi[static_cast<size_t>(k)];
        const auto& hk = h.h[static_cast<size_t>(user)];
        const int nk = static_cast<int>(hk.rows());
        const MatC<Real> denom = hermitize(
            MatC<Real>::Identity(nk, nk) + hk * suffix * hk.adjoint());
        suffix += s_bc.s[static_cast<size_t>(user)];
        const MatC<Real> numer = hermitize(
            MatC<Real>::Identity(nk, nk) + hk * suffix * hk.adjoint());
        rates(user) = (logdet_hpd(numer) - logdet_hpd(denom)) / ln2_v<Real>();
    }
    return rates;
}

// Complex gradient (with respect to conjugate coordinates) of the
// natural-log objective: vect_d( sum_k G_k^H Sbar_k H_k H_sum^-1 U^H ).
// The directional derivative along d_theta is 2 Re(g^H d_theta).
template <class Real>
VecC<Real> grad_theta(const ChannelSet<Real>& channels, const CompositeChannels<Real>& h,
                      const CovarianceSet<Real>& sbar, const MatC<Real>& gram) {
    const Eigen::Index m = channels.u.rows();
    if (m == 0) return VecC<Real>();
    Eigen::LLT<MatC<Real>> llt(gram);
    if (llt.info() != Eigen::Success)
        throw NumericalError("grad_theta: Gram matrix not positive definite");
    const MatC<Real> minv_uh = llt.solve(channels.u.adjoint()); // N_t x m
    MatC<Real> acc = MatC<Real>::Zero(m, h.nt());               // m x N_t
    for (int k = 0; k < h.users(); ++k)
        acc.noalias() += channels.g[static_cast<size_t>(k)].adjoint() *
                         (sbar.s[static_cast<size_t>(k)] * h.h[static_cast<size_t>(k)]);
    // diag(acc * minv_uh) without forming the product
    return (acc.array() * minv_uh.transpose().array()).rowwise().sum().matrix();
}

template <class Real>
VecC<Real> grad_theta(const ChannelSet<Real>& channels, const PhaseVector<Real>& theta,
                      const CovarianceSet<Real>& sbar) {
    const auto h = composite_channel(channels, theta);
    return grad_theta(channels, h, sbar, mac_gram(h, sbar));
}

// Gradient of the natural-log objective with respect to Sbar_k:
// H_k H_sum^-1 H_k^H, Hermitian PSD.
template <class Real>
MatC<Real> grad_covariance(const CompositeChannels<Real>& h, const CovarianceSet<Real>& sbar,
                           int k, const MatC<Real>& gram) {
    (void)sbar;
    Eigen::LLT<MatC<Real>> llt(gram);
    if (llt.info() != Eigen::Success)
        throw NumericalError("grad_covariance: Gram matrix not positive definite");
    const auto& hk = h.h[static_cast<size_t>(k)];
    return hermitize(hk * llt.solve(hk.adjoint()));
}

template <class Real>
MatC<Real> grad_covariance(const CompositeChannels<Real>& h, const CovarianceSet<Real>& sbar,
                           int k) {
    return grad_covariance(h, sbar, k, mac_gram(h, sbar));
}

// Partial Lagrangian of the fixed-theta problem, in nats:
// ln|H_sum| - mu (sum_k tr Sbar_k - P).
template <class Real>
Real lagrangian(Real mu, const CovarianceSet<Real>& sbar, const CompositeChannels<Real>& h,
                Real power_budget) {
    if (!(mu >= Real(0))) throw SpecError("lagrangian: mu must be >= 0");
    return mac_sum_rate_nats(h, sbar) - mu * (sbar.sum_trace() - power_budget);
}

template <class Real>
Real lagrangian_from_gram(Real mu, const CovarianceSet<Real>& sbar, const MatC<Real>& gram,
                          Real power_budget) {
    return logdet_hpd(gram) - mu * (sbar.sum_trace() - power_budget);
}

// Partial gradient of the Lagrangian with respect to block k:
// H_k (Hbar_k + H_k^H Sbar_k H_k)^-1 H_k^H - mu I = H_k H_sum^-1 H_k^H - mu I.
template <class Real>
MatC<Real> partial_grad_lagrangian(Real mu, const CovarianceSet<Real>& sbar,
                                   const CompositeChannels<Real>& h, int k,
                                   const MatC<Real>& gram) {
    if (!(mu >= Real(0))) throw SpecError("partial_grad_lagrangian: mu must be >= 0");
    const int nk = h.n_of(k);
    return grad_covariance(h, sbar, k, gram) - mu * MatC<Real>::Identity(nk, nk);
}

template <class Real>
MatC<Real> partial_grad_lagrangian(Real mu, const CovarianceSet<Real>& sbar,
                                   const CompositeChannels<Real>& h, int k) {
    return partial_grad_lagrangian(mu, sbar, h, k, mac_gram(h, sbar));
}

// Upper bound on the block Lipschitz constant of the Lagrangian gradient:
// lambda_max^2(H_k H_k^H).
template <class Real>
Real block_lipschitz_bound(const CompositeChannels<Real>& h, int k) {
    const auto& hk = h.h[static_cast<size_t>(k)];
    const Real lmax = lambda_max_hermitian(hermitize(hk * hk.adjoint()));
    return lmax * lmax;
}

} // namespace risbc

#endif
