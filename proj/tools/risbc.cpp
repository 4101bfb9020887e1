// SPDX-License-Identifier: Apache-2.0
//
// risbc - sum-rate optimization for RIS-aided MIMO broadcast channels
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
// ------------------------------------------------------------------------

#include "risbc/experiments.hpp"

#include <CLI11.hpp>

#include <iostream>

using Real = double;
using namespace risbc;

namespace {

constexpr int exit_ok = 0;
constexpr int exit_spec_error = 2;
constexpr int exit_invariant_violation = 3;

int cmd_run(const std::string& spec_path, std::optional<std::uint64_t> seed,
            std::optional<int> realizations, std::optional<std::string> algos,
            std::optional<std::string> out, std::optional<int> workers) {
    auto spec = spec_from_config<Real>(parse_config_file(spec_path));
    if (seed) spec.seed = *seed;
    if (realizations) spec.realizations = *realizations;
    if (algos) spec.algos = detail::parse_algos(*algos);
    if (out) spec.out_dir = *out;
    if (workers) spec.workers = *workers;
    if (spec.out_dir.empty()) spec.out_dir = "results";
    spec.validate();

    const auto rows = run_experiment(spec);
    const auto summary = summarize(rows);
    std::cout << "experiment " << spec.label() << ": " << rows.size()
              << " rows -> " << spec.out_dir << "/" << spec.label() << ".csv\n";
    for (const auto& s : summary)
        std::cout << "  " << s.algo << " " << s.sweep_var << "=" << s.sweep_value
                  << "  mean " << s.mean_objective_bits << " bit/s/Hz  (se "
                  << s.se_objective_bits << ", n=" << s.n << ")\n";
    return exit_ok;
}

int cmd_complexity_table(const std::string& out) {
    ExperimentSpec<Real> spec;
    spec.kind = ExperimentKind::complexity_table;
    spec.out_dir = out;
    const auto rows = run_experiment(spec);
    std::cout << "experiment,algo,K,T,I,I_S,I_Theta,predicted_mults\n";
    for (const auto& r : rows)
        std::cout << r.experiment << ',' << r.algo << ',' << r.sweep_value << ',' << r.t
                  << ',' << r.i << ',' << r.i_s << ',' << r.i_theta << ','
                  << r.predicted_mults << "\n";
    return exit_ok;
}

// Quick numerical shakedown on freshly sampled instances: gradient
// fidelity, projection sanity, monotone ascent, duality, and the dual
// multiplier bound.
int cmd_selftest(std::uint64_t seed) {
    int checks = 0, failures = 0;
    auto report = [&](const char* name, bool ok) {
        ++checks;
        if (!ok) ++failures;
        std::cout << (ok ? "  ok   " : "  FAIL ") << name << "\n";
    };

    SystemConfig<Real> c;
    c.nt = 4;
    c.set_uniform_users(2, 2);
    c.ns = 1;
    c.nris = 8;

    for (std::uint64_t r = 0; r < 2; ++r) {
        SeededRng geo(seed, derive_stream(r, RngPurpose::geometry));
        SeededRng chan(seed, derive_stream(r, RngPurpose::channels));
        SeededRng init(seed, derive_stream(r, RngPurpose::init));
        auto g = build_geometry(c, PlacementSpec<Real>::single_ris(), geo);
        auto cs = sample_channels(c, g, chan);
        auto inst = make_instance(cs, c.power, init);

        // gradient fidelity against central differences
        {
            auto sbar = CovarianceSet<Real>::uniform_mac({2, 2}, c.power);
            const auto h = composite_channel(inst.channels, inst.theta0);
            const auto gram = mac_gram(h, sbar);
            const auto gth = grad_theta(inst.channels, h, sbar, gram);
            VecC<Real> v(gth.size());
            SeededRng dir(seed, derive_stream(r, RngPurpose::csi_error));
            for (Eigen::Index i = 0; i < v.size(); ++i) {
                const auto z = dir.cgaussian();
                v(i) = Complex<Real>(z.real(), z.imag());
            }
            v /= v.norm();
            const Real h_fd = 1e-5;
            auto f_at = [&](Real t) {
                PhaseVector<Real> th{inst.theta0.theta + t * v};
                return mac_sum_rate_nats(composite_channel(inst.channels, th), sbar);
            };
            const Real numeric = (f_at(h_fd) - f_at(-h_fd)) / (2 * h_fd);
            const Real analytic = 2 * std::real(gth.dot(v));
            report("theta gradient matches finite differences",
                   std::abs(analytic - numeric) <= 1e-5 * std::max(Real(1), std::abs(numeric)));
        }

        // projections: idempotence and feasibility
        {
            SeededRng noise(seed, derive_stream(r, RngPurpose::blockage));
            MatC<Real> w(2, 2);
            for (int i = 0; i < 2; ++i)
                for (int j = 0; j < 2; ++j) {
                    const auto z = noise.cgaussian();
                    w(i, j) = Complex<Real>(z.real(), z.imag());
                }
            const MatC<Real> x = hermitize(w + w.adjoint());
            const auto p1 = project_psd(x);
            const auto p2 = project_psd(p1);
            report("psd projection idempotent", (p1 - p2).norm() <= 1e-12);
            CovarianceSet<Real> raw(CovDomain::mac, {x, 2 * x});
            const auto proj = project_feasible_covariances(raw, c.power);
            report("covariance projection feasible",
                   proj.min_eigenvalue() >= -1e-12 &&
                       proj.sum_trace() <= c.power + 1e-9);
        }

        // drivers: ascent, cross agreement, duality, dual bound
        const auto t_ao = run_ao(inst);
        const auto t_aao = run_approx_ao(inst);
        const auto t_apgm = run_apgm(inst);
        bool monotone = true;
        for (const auto* t : {&t_ao, &t_aao, &t_apgm}) {
            Real prev = t->initial_bits;
            for (const auto& row : t->rows) {
                monotone = monotone && row.objective_bits >= prev - 1e-9;
                prev = row.objective_bits;
            }
        }
        report("objective ascent across all sub-iterations", monotone);
        const Real a = t_ao.final_bits();
        report("cross-algorithm agreement within 2%",
               std::abs(t_aao.final_bits() - a) <= 0.02 * a &&
                   std::abs(t_apgm.final_bits() - a) <= 0.02 * a);

        const auto h_final = composite_channel(inst.channels, t_ao.final_theta);
        const auto pi = identity_ordering<Real>(c.users());
        const auto s_bc = mac_to_bc(h_final, t_ao.final_sbar, pi);
        const auto rep = verify_duality(h_final, t_ao.final_sbar, s_bc, pi);
        report("MAC->BC duality gaps within 1e-8", rep.rate_ok && rep.power_ok);

        const auto dd = dual_decomposition(h_final, c.power, Real(1e-5), inst.sbar0);
        report("dual multiplier within the K*Nt/P bound",
               dd.state.mu <= Real(c.users()) * Real(c.nt) / c.power + Real(1e-5));
    }

    std::cout << (failures == 0 ? "selftest passed" : "selftest FAILED") << " ("
              << checks - failures << "/" << checks << ")\n";
    return failures == 0 ? exit_ok : exit_invariant_violation;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"risbc: achievable sum-rate optimization for RIS-aided MIMO "
                 "broadcast channels"};
    app.require_subcommand(1);

    std::string spec_path;
    std::optional<std::uint64_t> seed;
    std::optional<int> realizations;
    std::optional<std::string> algos;
    std::optional<std::string> out;
    std::optional<int> workers;

    auto* run = app.add_subcommand("run", "run an experiment from a spec file");
    run->add_option("--spec", spec_path, "experiment spec file")->required();
    run->add_option("--seed", seed, "master seed override");
    run->add_option("--realizations", realizations, "realization count override");
    run->add_option("--algos", algos, "comma list: ao,aao,apgm");
    run->add_option("--out", out, "output directory");
    run->add_option("--workers", workers, "worker thread count");

    std::string table_out = "results";
    auto* table = app.add_subcommand("complexity-table",
                                     "emit the per-iteration complexity table");
    table->add_option("--out", table_out, "output directory");

    std::uint64_t selftest_seed = 1;
    auto* selftest = app.add_subcommand("selftest", "run numerical invariant checks");
    selftest->add_option("--seed", selftest_seed, "seed for the selftest instances");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? exit_ok : exit_spec_error;
    }

    try {
        if (run->parsed())
            return cmd_run(spec_path, seed, realizations, algos, out, workers);
        if (table->parsed()) return cmd_complexity_table(table_out);
        return cmd_selftest(selftest_seed);
    } catch (const SpecError& e) {
        std::cerr << "spec error: " << e.what() << "\n";
        return exit_spec_error;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
