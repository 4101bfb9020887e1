// SPDX-License-Identifier: Apache-2.0
//
// risbc - sum-rate optimization for RIS-aided MIMO broadcast channels
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
// ------------------------------------------------------------------------

#ifndef RISBC_MAC_COVARIANCE_HPP
#define RISBC_MAC_COVARIANCE_HPP

#include "risbc/projections.hpp"

namespace risbc {

// Bisection bracket and counters of the dual decomposition.
// mu_max = K N_t / P bounds the optimal multiplier, so the bracket always
// contains it.
template <class Real>
struct DualState {
    Real mu = 0;
    Real mu_min = 0;
    Real mu_max = 0;
    Real epsilon = Real(1e-5);
    int outer_iterations = 0;   // T: bisection steps
    Real avg_inner_iterations = 0; // I: average block updates per bisection
};

// Inner stopping rule for the block coordinate maximization: relative
// Lagrangian improvement below rel_tol over one sweep, or the block-update
// budget, whichever first.
struct BcmStop {
    double rel_tol = 1e-9;
    int max_block_updates = 500;
};

// Exact maximizer of the single-block subproblem: water-filling over the
// eigenmodes of H_k Hbar_k^-1 H_k^H with level 1/mu, where
// Hbar_k = H_sum - H_k^H Sbar_k H_k.
template <class Real>
MatC<Real> block_update(int k, Real mu, const CompositeChannels<Real>& h,
                        const CovarianceSet<Real>& sbar, const MatC<Real>& gram) {
    if (!(mu > Real(0))) throw SpecError("block_update: mu must be > 0");
    const auto& hk = h.h[static_cast<size_t>(k)];
    const MatC<Real> hbar =
        hermitize(gram - hk.adjoint() * sbar.s[static_cast<size_t>(k)] * hk);
    Eigen::LLT<MatC<Real>> llt(hbar);
    if (llt.info() != Eigen::Success)
        throw NumericalError("block_update: Hbar_k not positive definite");
    const MatC<Real> w = hermitize(hk * llt.solve(hk.adjoint()));
    Eigen::SelfAdjointEigenSolver<MatC<Real>> es(w);
    if (es.info() != Eigen::Success)
        throw NumericalError("block_update: eigendecomposition failed");
    VecR<Real> ev = es.eigenvalues();
    const Real sigma_max = ev.maxCoeff();
    const Real floor = Real(1e-12) * std::max(sigma_max, Real(0));
    for (Eigen::Index i = 0; i < ev.size(); ++i)
        ev(i) = (ev(i) <= floor) ? Real(0) : pos(Real(1) / mu - Real(1) / ev(i));
    return hermitize(es.eigenvectors() * ev.asDiagonal() *
                           es.eigenvectors().adjoint());
}

template <class Real>
MatC<Real> block_update(int k, Real mu, const CompositeChannels<Real>& h,
                        const CovarianceSet<Real>& sbar) {
    return block_update(k, mu, h, sbar, mac_gram(h, sbar));
}

template <class Real>
struct BcmResult {
    CovarianceSet<Real> sbar;
    int block_updates = 0;
};

namespace detail {

template <class Real>
void apply_block(CovarianceSet<Real>& sbar, MatC<Real>& gram,
                 const CompositeChannels<Real>& h, int k, MatC<Real> next) {
    const auto& hk = h.h[static_cast<size_t>(k)];
    gram = hermitize(gram + hk.adjoint() *
                                      (next - sbar.s[static_cast<size_t>(k)]) * hk);
    sbar.s[static_cast<size_t>(k)] = std::move(next);
}

} // namespace detail

// Cyclic block coordinate maximization of the Lagrangian at fixed mu.
// Every block step is an exact maximization, so the Lagrangian never
// decreases.
template <class Real>
BcmResult<Real> cbcm(const CovarianceSet<Real>& sbar0, Real mu,
                     const CompositeChannels<Real>& h, Real power_budget,
                     const BcmStop& stop = {}) {
    BcmResult<Real> res{sbar0, 0};
    MatC<Real> gram = mac_gram(h, res.sbar);
    Real l_prev = lagrangian_from_gram(mu, res.sbar, gram, power_budget);
    const int k_users = h.users();
    while (res.block_updates < stop.max_block_updates) {
        for (int k = 0; k < k_users && res.block_updates < stop.max_block_updates; ++k) {
            detail::apply_block(res.sbar, gram, h, k,
                                block_update(k, mu, h, res.sbar, gram));
            ++res.block_updates;
        }
        const Real l = lagrangian_from_gram(mu, res.sbar, gram, power_budget);
        if (l - l_prev <= Real(stop.rel_tol) * std::max(Real(1), std::abs(l))) break;
        l_prev = l;
    }
    return res;
}

// Greedy (Gauss-Southwell) block coordinate maximization: each iteration
// scores every user by the length of a projected gradient step with step
// size 1/lambda_max^2(H_i H_i^H) and updates only the best one.
template <class Real>
BcmResult<Real> gbcm(const CovarianceSet<Real>& sbar0, Real mu,
                     const CompositeChannels<Real>& h, Real power_budget,
                     const BcmStop& stop = {}) {
    BcmResult<Real> res{sbar0, 0};
    MatC<Real> gram = mac_gram(h, res.sbar);
    const int k_users = h.users();

    std::vector<Real> lip(static_cast<size_t>(k_users));
    for (int k = 0; k < k_users; ++k) lip[static_cast<size_t>(k)] = block_lipschitz_bound(h, k);

    Real l_prev = lagrangian_from_gram(mu, res.sbar, gram, power_budget);
    int since_check = 0;
    while (res.block_updates < stop.max_block_updates) {
        Eigen::LLT<MatC<Real>> llt(gram);
        if (llt.info() != Eigen::Success)
            throw NumericalError("gbcm: Gram matrix not positive definite");
        int best = -1;
        Real best_len = -1;
        for (int i = 0; i < k_users; ++i) {
            const auto& hi = h.h[static_cast<size_t>(i)];
            const int ni = static_cast<int>(hi.rows());
            const MatC<Real> grad = hermitize(hi * llt.solve(hi.adjoint())) -
                                    mu * MatC<Real>::Identity(ni, ni);
            MatC<Real> cand;
            if (lip[static_cast<size_t>(i)] > Real(0)) {
                cand = project_psd<Real>(
                    res.sbar.s[static_cast<size_t>(i)] + grad / lip[static_cast<size_t>(i)],
                    std::numeric_limits<Real>::infinity());
            } else {
                cand = MatC<Real>::Zero(ni, ni); // zero channel: optimum is 0
            }
            const Real len = (res.sbar.s[static_cast<size_t>(i)] - cand).norm();
            if (len > best_len) {
                best_len = len;
                best = i;
            }
        }
        if (best_len <= Real(1e-9)) break; // stationary: all step lengths vanish
        detail::apply_block(res.sbar, gram, h, best,
                            block_update(best, mu, h, res.sbar, gram));
        ++res.block_updates;
        if (++since_check >= k_users) {
            since_check = 0;
            const Real l = lagrangian_from_gram(mu, res.sbar, gram, power_budget);
            if (l - l_prev <= Real(stop.rel_tol) * std::max(Real(1), std::abs(l))) break;
            l_prev = l;
        }
    }
    return res;
}

template <class Real>
struct DualResult {
    CovarianceSet<Real> sbar;
    DualState<Real> state;
};

// Dual decomposition: bisection on the power multiplier, with the inner
// maximization warm-started from the previous iterate. P - sum tr(Sbar*)
// is a subgradient of the dual function, which fixes the bracket update.
// The returned covariances are feasible; if the final inner solution
// overshoots the budget it is rescaled onto it.
template <class Real>
DualResult<Real> dual_decomposition(const CompositeChannels<Real>& h, Real power_budget,
                                    Real epsilon, const CovarianceSet<Real>& sbar0,
                                    const BcmStop& stop = {}) {
    if (!(epsilon > Real(0))) throw SpecError("dual_decomposition: epsilon must be > 0");
    if (!(power_budget > Real(0))) throw SpecError("dual_decomposition: P must be > 0");

    DualResult<Real> res;
    res.sbar = sbar0;
    auto& st = res.state;
    st.epsilon = epsilon;
    st.mu_min = 0;
    st.mu_max = Real(h.users()) * Real(h.nt()) / power_budget;

    long total_inner = 0;
    while (st.mu_max - st.mu_min >= epsilon) {
        st.mu = (st.mu_max + st.mu_min) / Real(2);
        BcmResult<Real> inner = gbcm(res.sbar, st.mu, h, power_budget, stop);
        res.sbar = std::move(inner.sbar);
        total_inner += inner.block_updates;
        ++st.outer_iterations;
        if (power_budget < res.sbar.sum_trace())
            st.mu_min = st.mu;
        else
            st.mu_max = st.mu;
    }
    st.mu = (st.mu_max + st.mu_min) / Real(2);
    st.avg_inner_iterations =
        st.outer_iterations > 0 ? Real(total_inner) / Real(st.outer_iterations) : Real(0);

    // Land exactly on the power budget. The constraint is active at the
    // optimum for any nonzero channel, and the objective is non-decreasing
    // under uniform up-scaling, so this only improves the iterate; scaling
    // down restores feasibility after the last inner solve.
    const Real trace = res.sbar.sum_trace();
    if (trace > Real(0) && trace != power_budget) {
        const Real scale = power_budget / trace;
        for (auto& s : res.sbar.s) s *= scale;
    }
    return res;
}

// Certified O(1/n) gap bound for the cyclic method (diagnostic only): the
// sublevel-set radius R is not computable from the instance and must be
// supplied by the caller.
template <class Real>
Real cbcm_gap_bound(Real lipschitz_m, int k_users, Real radius, Real gap_at_first,
                    int n) {
    if (n < 1) throw SpecError("cbcm_gap_bound: n must be >= 1");
    const Real mkr = lipschitz_m * Real(k_users) * Real(k_users) * radius * radius;
    const Real c = std::max({Real(2) / mkr - Real(2), Real(2), gap_at_first});
    return Real(2) * c * mkr / Real(n);
}

} // namespace risbc

#endif
