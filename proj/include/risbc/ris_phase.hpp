// SPDX-License-Identifier: Apache-2.0
//
// risbc - sum-rate optimization for RIS-aided MIMO broadcast channels
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
// ------------------------------------------------------------------------

#ifndef RISBC_RIS_PHASE_HPP
#define RISBC_RIS_PHASE_HPP

#include "risbc/mac_covariance.hpp"

namespace risbc {

// Backtracking state for the projected-gradient phase (and covariance)
// updates. The accepted step size carries over between outer iterations;
// the line search only ever shrinks it.
template <class Real>
struct SurrogateParams {
    Real mu = Real(1e4);  // current step size (initial value 10^4)
    Real rho = Real(0.5); // backtracking factor, 0 < rho < 1

    void validate() const {
        if (!(mu > Real(0))) throw SpecError("SurrogateParams: mu must be > 0");
        if (!(rho > Real(0) && rho < Real(1)))
            throw SpecError("SurrogateParams: rho must be in (0, 1)");
    }
};

template <class Real>
struct ElementUpdate {
    Complex<Real> theta;  // optimal reflection coefficient for the element
    Complex<Real> sigma;  // tr(A_l^-1 B_l), the only nonzero eigenvalue of A_l^-1 B_l
};

// Closed-form single-element optimum: with every other variable fixed, the
// objective is log2|A_l + theta_l B_l + theta_l^* B_l^H| with rank-one B_l,
// maximized on the unit circle by theta_l = exp(-j arg sigma_l). A flat
// direction (|sigma_l| ~ 0) leaves the element unchanged.
template <class Real>
ElementUpdate<Real> closed_form_element(int l, const ChannelSet<Real>& channels,
                                        const CompositeChannels<Real>& h,
                                        const PhaseVector<Real>& theta,
                                        const CovarianceSet<Real>& sbar) {
    const int nt = h.nt();
    const RowC<Real> ul = channels.u.row(l);
    const Complex<Real> th = theta.theta(l);

    MatC<Real> a = MatC<Real>::Identity(nt, nt);
    VecC<Real> b = VecC<Real>::Zero(nt);
    Real quad = 0; // sum_k g_kl^H Sbar_k g_kl
    for (int k = 0; k < h.users(); ++k) {
        const auto& sk = sbar.s[static_cast<size_t>(k)];
        const VecC<Real> gkl = channels.g[static_cast<size_t>(k)].col(l);
        const MatC<Real> ck = h.h[static_cast<size_t>(k)] - th * (gkl * ul);
        const MatC<Real> sck = sk * ck; // n_k x N_t
        a.noalias() += ck.adjoint() * sck;
        b.noalias() += sck.adjoint() * gkl;
        quad += std::real(gkl.dot(sk * gkl));
    }
    a.noalias() += quad * (ul.adjoint() * ul);
    a = hermitize(a);

    Eigen::LLT<MatC<Real>> llt(a);
    if (llt.info() != Eigen::Success)
        throw NumericalError("closed_form_element: A_l not positive definite");
    const Complex<Real> sigma = (ul * llt.solve(b))(0, 0);

    ElementUpdate<Real> out;
    out.sigma = sigma;
    out.theta = (std::abs(sigma) <= Real(1e-14))
                    ? th
                    : std::polar(Real(1), -std::arg(sigma));
    return out;
}

template <class Real>
struct SweepResult {
    PhaseVector<Real> theta;
    CompositeChannels<Real> h; // composite channels at the returned theta
};

struct SweepOptions {
    // Rebuild the composite channels from scratch after every element
    // instead of applying the rank-one correction (debug / validation).
    bool recompute_each = false;
};

// One full pass of closed-form element updates in index order. The working
// composite channel follows each accepted element by a rank-one update.
// The objective is non-decreasing after every element.
template <class Real>
SweepResult<Real> sequential_sweep(const ChannelSet<Real>& channels,
                                   const PhaseVector<Real>& theta,
                                   const CovarianceSet<Real>& sbar,
                                   const SweepOptions& options = {}) {
    SweepResult<Real> res{theta, composite_channel(channels, theta)};
    const Eigen::Index m = res.theta.size();
    for (Eigen::Index l = 0; l < m; ++l) {
        const auto upd = closed_form_element(static_cast<int>(l), channels, res.h,
                                             res.theta, sbar);
        const Complex<Real> delta = upd.theta - res.theta.theta(l);
        res.theta.theta(l) = upd.theta;
        if (options.recompute_each) {
            res.h = composite_channel(channels, res.theta);
        } else if (delta != Complex<Real>(0, 0)) {
            const RowC<Real> ul = channels.u.row(l);
            for (int k = 0; k < res.h.users(); ++k)
                res.h.h[static_cast<size_t>(k)].noalias() +=
                    delta * (channels.g[static_cast<size_t>(k)].col(l) * ul);
        }
    }
    return res;
}

template <class Real>
struct GradientStepResult {
    PhaseVector<Real> theta;
    CompositeChannels<Real> h;
    Real objective_nats = 0;
    int line_search_steps = 0; // I_Theta: trial projections evaluated
};

// Projected gradient ascent step on theta with backtracking against the
// quadratic model Q_mu. Acceptance requires f(theta') >= Q_mu(theta'),
// which both guarantees ascent and terminates once mu <= 1/L_theta(Sbar).
template <class Real>
GradientStepResult<Real> theta_gradient_step(const PhaseVector<Real>& theta,
                                             const CovarianceSet<Real>& sbar,
                                             const ChannelSet<Real>& channels,
                                             SurrogateParams<Real>& params,
                                             int max_halvings = 200) {
    params.validate();
    GradientStepResult<Real> res;
    res.h = composite_channel(channels, theta);
    const MatC<Real> gram = mac_gram(res.h, sbar);
    const Real f0 = mac_sum_rate_nats_from_gram(gram);
    const VecC<Real> g = grad_theta(channels, res.h, sbar, gram);

    if (g.size() == 0 || g.norm() == Real(0)) {
        res.theta = theta;
        res.objective_nats = f0;
        return res;
    }

    for (int step = 0; step < max_halvings; ++step) {
        PhaseVector<Real> trial = project_unit_modulus<Real>(theta.theta + params.mu * g);
        CompositeChannels<Real> h_trial = composite_channel(channels, trial);
        const Real f1 = mac_sum_rate_nats(h_trial, sbar);
        ++res.line_search_steps;
        const VecC<Real> delta = trial.theta - theta.theta;
        const Real q = f0 + Real(2) * std::real(g.dot(delta)) -
                       delta.squaredNorm() / params.mu;
        if (f1 >= q) {
            res.theta = std::move(trial);
            res.h = std::move(h_trial);
            res.objective_nats = f1;
            return res;
        }
        params.mu *= params.rho;
    }
    throw NumericalError("theta_gradient_step: line search failed to terminate");
}

// Projection of a Euclidean gradient onto the tangent space of the unit
// circle at theta (diagnostic; the solvers use the Euclidean gradient).
template <class Real>
VecC<Real> riemann_project(const PhaseVector<Real>& theta, const VecC<Real>& g) {
    if (g.size() != theta.size())
        throw DimensionError("riemann_project: size mismatch");
    VecC<Real> out(g.size());
    for (Eigen::Index i = 0; i < g.size(); ++i)
        out(i) = g(i) - std::real(std::conj(g(i)) * theta.theta(i)) * theta.theta(i);
    return out;
}

} // namespace risbc

#endif
