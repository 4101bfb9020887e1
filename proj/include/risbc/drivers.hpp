// SPDX-License-Identifier: Apache-2.0
//
// risbc - sum-rate optimization for RIS-aided MIMO broadcast channels
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
// ------------------------------------------------------------------------

#ifndef RISBC_DRIVERS_HPP
#define RISBC_DRIVERS_HPP

#include "risbc/duality.hpp"
#include "risbc/ris_phase.hpp"

#include <chrono>
#include <cstdint>
#include <optional>

namespace risbc {

enum class Algo { ao, approx_ao, apgm };

inline const char* algo_name(Algo a) {
    switch (a) {
        case Algo::ao: return "ao";
        case Algo::approx_ao: return "aao";
        default: return "apgm";
    }
}

enum class SubIterKind { covariance, phase };

template <class Real>
struct TraceRow {
    int outer = 0;
    SubIterKind kind = SubIterKind::covariance;
    Real objective_bits = 0; // optimizer objective after this sub-iteration
    Real eval_bits = std::numeric_limits<Real>::quiet_NaN(); // on eval channels
    double wall_ms = 0;      // cumulative
    int line_search_steps = 0; // I_S or I_Theta (gradient sub-iterations)
    int dual_outer = 0;        // T (dual-decomposition sub-iterations)
    Real dual_inner_avg = 0;   // I
    Real dual_mu = 0;          // final multiplier of the dual decomposition
};

// Per-sub-iteration record of one driver run, together with the final
// iterate. Within a run the objective_bits column is non-decreasing (every
// sub-step is an ascent step); eval_bits carries no such guarantee.
template <class Real>
struct RunTrace {
    Algo algo = Algo::ao;
    Real initial_bits = 0;
    std::vector<TraceRow<Real>> rows;
    bool converged = false;
    PhaseVector<Real> final_theta;
    CovarianceSet<Real> final_sbar;

    Real final_bits() const { return rows.empty() ? initial_bits : rows.back().objective_bits; }
    int total_sub_iterations() const { return static_cast<int>(rows.size()); }
};

template <class Real>
struct DriverOptions {
    Real tol = Real(1e-5);      // relative objective gain per outer iteration
    int max_outer = 30;
    Real dual_epsilon = Real(1e-5);
    BcmStop bcm{};
    Real theta_mu0 = Real(1e4); // initial step for the theta line search
    Real cov_mu0 = Real(1e4);   // initial step for the covariance line search
    Real rho = Real(0.5);
    SweepOptions sweep{};
    // When set, every sub-iteration additionally evaluates the current
    // iterate on these channels (e.g. true channels under imperfect CSI).
    const ChannelSet<Real>* eval_channels = nullptr;
};

// One problem instance: channels plus a feasible starting point. All three
// drivers started from the same instance see identical initial values.
template <class Real>
struct Instance {
    ChannelSet<Real> channels;
    Real power = Real(1);
    PhaseVector<Real> theta0;
    CovarianceSet<Real> sbar0;

    void validate() const {
        theta0.validate();
        if (theta0.size() != channels.u.rows())
            throw DimensionError("Instance: theta0 length mismatch");
        sbar0.validate(power);
    }
};

// Random feasible initialization: uniform phases; covariances either the
// deterministic uniform start (P/(K n_k)) I or, on request, random PSD
// matrices rescaled onto the power budget.
template <class Real>
Instance<Real> make_instance(ChannelSet<Real> channels, Real power, SeededRng& rng,
                             bool random_covariances = false) {
    Instance<Real> inst;
    inst.power = power;
    const Eigen::Index m = channels.u.rows();
    VecR<Real> phases(m);
    for (Eigen::Index i = 0; i < m; ++i)
        phases(i) = Real(2) * pi_v<Real> * Real(rng.uniform());
    inst.theta0 = PhaseVector<Real>::from_phases(phases);

    std::vector<int> dims(static_cast<size_t>(channels.users()));
    for (int k = 0; k < channels.users(); ++k)
        dims[static_cast<size_t>(k)] = channels.n_of(k);
    if (!random_covariances) {
        inst.sbar0 = CovarianceSet<Real>::uniform_mac(dims, power);
    } else {
        std::vector<MatC<Real>> mats;
        Real total = 0;
        for (int n : dims) {
            MatC<Real> w(n, n);
            for (Eigen::Index r = 0; r < n; ++r)
                for (Eigen::Index c = 0; c < n; ++c) {
                    const auto z = rng.cgaussian();
                    w(r, c) = Complex<Real>(Real(z.real()), Real(z.imag()));
                }
            MatC<Real> s = hermitize(w * w.adjoint());
            total += std::real(s.trace());
            mats.push_back(std::move(s));
        }
        for (auto& s : mats) s *= power / total;
        inst.sbar0 = CovarianceSet<Real>(CovDomain::mac, std::move(mats));
    }
    inst.channels = std::move(channels);
    inst.validate();
    return inst;
}

enum class StopDecision { keep_going, converged, max_outer_reached };

// Relative objective gain over the last completed outer iteration (the
// first outer iteration is compared against the initial objective).
template <class Real>
StopDecision stopping_check(const RunTrace<Real>& trace, Real tol, int max_outer) {
    if (trace.rows.empty()) throw SpecError("stopping_check: empty trace");
    const int outer = trace.rows.back().outer;
    Real before = trace.initial_bits;
    for (const auto& row : trace.rows)
        if (row.outer < outer) before = row.objective_bits;
    const Real after = trace.rows.back().objective_bits;
    const Real gain = (after - before) / std::max(Real(1), std::abs(after));
    if (gain < tol) return StopDecision::converged;
    if (outer >= max_outer) return StopDecision::max_outer_reached;
    return StopDecision::keep_going;
}

template <class Real>
struct CovGradientStepResult {
    CovarianceSet<Real> sbar;
    Real objective_nats = 0;
    int line_search_steps = 0; // I_S
};

// Projected gradient ascent on all covariances with backtracking against
// the quadratic model Q-bar; the water-filling projection keeps the trial
// inside S, and acceptance guarantees ascent.
template <class Real>
CovGradientStepResult<Real> covariance_gradient_step(const CovarianceSet<Real>& sbar,
                                                     const CompositeChannels<Real>& h,
                                                     Real power_budget,
                                                     SurrogateParams<Real>& params,
                                                     int max_halvings = 200) {
    params.validate();
    const MatC<Real> gram = mac_gram(h, sbar);
    const Real f0 = mac_sum_rate_nats_from_gram(gram);
    Eigen::LLT<MatC<Real>> llt(gram);
    if (llt.info() != Eigen::Success)
        throw NumericalError("covariance_gradient_step: Gram matrix not positive definite");

    const int k_users = h.users();
    std::vector<MatC<Real>> grad(static_cast<size_t>(k_users));
    Real grad_norm2 = 0;
    for (int k = 0; k < k_users; ++k) {
        const auto& hk = h.h[static_cast<size_t>(k)];
        grad[static_cast<size_t>(k)] = hermitize(hk * llt.solve(hk.adjoint()));
        grad_norm2 += grad[static_cast<size_t>(k)].squaredNorm();
    }

    CovGradientStepResult<Real> res;
    if (grad_norm2 == Real(0)) {
        res.sbar = sbar;
        res.objective_nats = f0;
        return res;
    }

    for (int step = 0; step < max_halvings; ++step) {
        CovarianceSet<Real> shifted = sbar;
        for (int k = 0; k < k_users; ++k)
            shifted.s[static_cast<size_t>(k)] += params.mu * grad[static_cast<size_t>(k)];
        CovarianceSet<Real> trial = project_feasible_covariances(shifted, power_budget);
        ++res.line_search_steps;
        const Real f1 = mac_sum_rate_nats(h, trial);
        Real linear = 0, quad = 0;
        for (int k = 0; k < k_users; ++k) {
            const MatC<Real> delta =
                trial.s[static_cast<size_t>(k)] - sbar.s[static_cast<size_t>(k)];
            linear += std::real((grad[static_cast<size_t>(k)] * delta).trace());
            quad += delta.squaredNorm();
        }
        const Real q = f0 + linear - quad / (Real(2) * params.mu);
        if (f1 >= q) {
            res.sbar = std::move(trial);
            res.objective_nats = f1;
            return res;
        }
        params.mu *= params.rho;
    }
    throw NumericalError("covariance_gradient_step: line search failed to terminate");
}

namespace detail {

template <class Real>
class TraceBuilder {
public:
    TraceBuilder(Algo algo, const DriverOptions<Real>& opts)
        : opts_(opts), start_(std::chrono::steady_clock::now()) {
        trace_.algo = algo;
    }

    void set_initial(Real nats) { trace_.initial_bits = nats / ln2_v<Real>(); }

    void record(int outer, SubIterKind kind, Real nats, const PhaseVector<Real>& theta,
                const CovarianceSet<Real>& sbar, int ls_steps, int dual_t,
                Real dual_i, Real dual_mu = Real(0)) {
        TraceRow<Real> row;
        row.outer = outer;
        row.kind = kind;
        row.dual_mu = dual_mu;
        row.objective_bits = nats / ln2_v<Real>();
        row.wall_ms = std::chrono::duration<double, std::milli>(
                          std::chrono::steady_clock::now() - start_)
                          .count();
        row.line_search_steps = ls_steps;
        row.dual_outer = dual_t;
        row.dual_inner_avg = dual_i;
        if (opts_.eval_channels != nullptr) {
            const auto h_eval = composite_channel(*opts_.eval_channels, theta);
            row.eval_bits = mac_sum_rate_nats(h_eval, sbar) / ln2_v<Real>();
        }
        trace_.rows.push_back(row);
    }

    RunTrace<Real>& trace() { return trace_; }

private:
    RunTrace<Real> trace_;
    const DriverOptions<Real>& opts_;
    std::chrono::steady_clock::time_point start_;
};

} // namespace detail

// Alternating optimization: exact covariance solve (dual decomposition)
// alternated with the sequential closed-form phase sweep. Both
// sub-iterations are exact maximizations, so the objective never drops.
template <class Real>
RunTrace<Real> run_ao(const Instance<Real>& inst, const DriverOptions<Real>& opts = {}) {
    inst.validate();
    detail::TraceBuilder<Real> tb(Algo::ao, opts);
    PhaseVector<Real> theta = inst.theta0;
    CovarianceSet<Real> sbar = inst.sbar0;
    CompositeChannels<Real> h = composite_channel(inst.channels, theta);
    tb.set_initial(mac_sum_rate_nats(h, sbar));

    for (int outer = 1; outer <= opts.max_outer; ++outer) {
        auto dual = dual_decomposition(h, inst.power, opts.dual_epsilon, sbar, opts.bcm);
        sbar = std::move(dual.sbar);
        tb.record(outer, SubIterKind::covariance, mac_sum_rate_nats(h, sbar), theta, sbar,
                  0, dual.state.outer_iterations, dual.state.avg_inner_iterations,
                  dual.state.mu);

        auto sweep = sequential_sweep(inst.channels, theta, sbar, opts.sweep);
        theta = std::move(sweep.theta);
        h = std::move(sweep.h);
        tb.record(outer, SubIterKind::phase, mac_sum_rate_nats(h, sbar), theta, sbar, 0, 0,
                  Real(0));

        const auto decision = stopping_check(tb.trace(), opts.tol, opts.max_outer);
        if (decision != StopDecision::keep_going) {
            tb.trace().converged = decision == StopDecision::converged;
            break;
        }
    }
    tb.trace().final_theta = std::move(theta);
    tb.trace().final_sbar = std::move(sbar);
    return tb.trace();
}

// Approximate AO: exact covariance solve alternated with one backtracked
// projected-gradient step on the phases.
template <class Real>
RunTrace<Real> run_approx_ao(const Instance<Real>& inst,
                             const DriverOptions<Real>& opts = {}) {
    inst.validate();
    detail::TraceBuilder<Real> tb(Algo::approx_ao, opts);
    PhaseVector<Real> theta = inst.theta0;
    CovarianceSet<Real> sbar = inst.sbar0;
    CompositeChannels<Real> h = composite_channel(inst.channels, theta);
    tb.set_initial(mac_sum_rate_nats(h, sbar));
    SurrogateParams<Real> theta_params{opts.theta_mu0, opts.rho};

    for (int outer = 1; outer <= opts.max_outer; ++outer) {
        auto dual = dual_decomposition(h, inst.power, opts.dual_epsilon, sbar, opts.bcm);
        sbar = std::move(dual.sbar);
        tb.record(outer, SubIterKind::covariance, mac_sum_rate_nats(h, sbar), theta, sbar,
                  0, dual.state.outer_iterations, dual.state.avg_inner_iterations,
                  dual.state.mu);

        auto step = theta_gradient_step(theta, sbar, inst.channels, theta_params);
        theta = std::move(step.theta);
        h = std::move(step.h);
        tb.record(outer, SubIterKind::phase, step.objective_nats, theta, sbar,
                  step.line_search_steps, 0, Real(0));

        const auto decision = stopping_check(tb.trace(), opts.tol, opts.max_outer);
        if (decision != StopDecision::keep_going) {
            tb.trace().converged = decision == StopDecision::converged;
            break;
        }
    }
    tb.trace().final_theta = std::move(theta);
    tb.trace().final_sbar = std::move(sbar);
    return tb.trace();
}

// APGM: projected gradient steps on the covariances and on the phases,
// each with its own persistent backtracked step size.
template <class Real>
RunTrace<Real> run_apgm(const Instance<Real>& inst, const DriverOptions<Real>& opts = {}) {
    inst.validate();
    detail::TraceBuilder<Real> tb(Algo::apgm, opts);
    PhaseVector<Real> theta = inst.theta0;
    CovarianceSet<Real> sbar = inst.sbar0;
    CompositeChannels<Real> h = composite_channel(inst.channels, theta);
    tb.set_initial(mac_sum_rate_nats(h, sbar));
    SurrogateParams<Real> theta_params{opts.theta_mu0, opts.rho};
    SurrogateParams<Real> cov_params{opts.cov_mu0, opts.rho};

    for (int outer = 1; outer <= opts.max_outer; ++outer) {
        auto cov = covariance_gradient_step(sbar, h, inst.power, cov_params);
        sbar = std::move(cov.sbar);
        tb.record(outer, SubIterKind::covariance, cov.objective_nats, theta, sbar,
                  cov.line_search_steps, 0, Real(0));

        auto step = theta_gradient_step(theta, sbar, inst.channels, theta_params);
        theta = std::move(step.theta);
        h = std::move(step.h);
        tb.record(outer, SubIterKind::phase, step.objective_nats, theta, sbar,
                  step.line_search_steps, 0, Real(0));

        const auto decision = stopping_check(tb.trace(), opts.tol, opts.max_outer);
        if (decision != StopDecision::keep_going) {
            tb.trace().converged = decision == StopDecision::converged;
            break;
        }
    }
    tb.trace().final_theta = std::move(theta);
    tb.trace().final_sbar = std::move(sbar);
    return tb.trace();
}

template <class Real>
RunTrace<Real> run_algorithm(Algo algo, const Instance<Real>& inst,
                             const DriverOptions<Real>& opts = {}) {
    switch (algo) {
        case Algo::ao: return run_ao(inst, opts);
        case Algo::approx_ao: return run_approx_ao(inst, opts);
        default: return run_apgm(inst, opts);
    }
}

// Per-iteration multiplication counts of the three algorithms as closed
// formulas in the problem dimensions and the measured loop counters.
struct ComplexityParams {
    std::uint64_t k = 0, nt = 0, nr = 0, ns = 0, nris = 0;
    std::uint64_t t = 0, i = 0, i_s = 0, i_theta = 0;

    void validate() const {
        if (k == 0 || nt == 0 || nr == 0)
            throw SpecError("ComplexityParams: dimensions must be positive");
    }
};

inline std::uint64_t predict_complexity(Algo algo, const ComplexityParams& p) {
    p.validate();
    const std::uint64_t inner_bcm = p.nt * p.nr * p.nr + p.nt * p.nt * p.nr +
                                    p.nr * p.nr * p.nr; // per-user BCM kernel
    const std::uint64_t theta_grad = p.i_theta * p.k * p.ns * p.nris * p.nt * p.nr;
    switch (algo) {
        case Algo::ao:
            return p.t * p.i * p.k * inner_bcm +
                   p.ns * p.nris *
                       (p.k * p.nt * p.nr * p.nr + p.k * p.nt * p.nt * p.nr +
                        p.nt * p.nt * p.nt);
        case Algo::approx_ao:
            return p.t * p.i * p.k * inner_bcm + theta_grad;
        default:
            return p.i_s * (p.k * p.nt * p.nr * p.nr + p.k * p.nt * p.nt * p.nr +
                            p.nt * p.nt * p.nt + p.k * p.k * p.nr * p.nr) +
                   theta_grad;
    }
}

} // namespace risbc

#endif
