// SPDX-License-Identifier: Apache-2.0
//
// risbc - sum-rate optimization for RIS-aided MIMO broadcast channels
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
// ------------------------------------------------------------------------

#ifndef RISBC_EXPERIMENTS_HPP
#define RISBC_EXPERIMENTS_HPP

#include "risbc/drivers.hpp"

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>

namespace risbc {

enum class ExperimentKind {
    convergence,
    sweep_nt,
    sweep_k,
    csi,
    blockage,
    multi_ris_distance,
    multi_ris_budget,
    complexity_table,
};

inline const char* kind_name(ExperimentKind k) {
    switch (k) {
        case ExperimentKind::convergence: return "convergence";
        case ExperimentKind::sweep_nt: return "sweep_nt";
        case ExperimentKind::sweep_k: return "sweep_k";
        case ExperimentKind::csi: return "csi";
        case ExperimentKind::blockage: return "blockage";
        case ExperimentKind::multi_ris_distance: return "multi_ris_distance";
        case ExperimentKind::multi_ris_budget: return "multi_ris_budget";
        default: return "complexity_table";
    }
}

enum class LinkMode { both, direct_only, ris_only };

// One detail-CSV row. For csi experiments objective_bits carries the rate
// of the current iterate evaluated on the true channels (the estimated
// channels only steer the optimizer); everywhere else it is the optimizer
// objective.
template <class Real>
struct ResultRow {
    std::string experiment;
    std::string algo;
    std::uint64_t seed = 0; // realization index under the master seed
    std::string sweep_var;
    Real sweep_value = 0;
    int subiter = 0;
    Real objective_bits = 0;
    double wall_ms = 0;
    int t = 0;          // dual bisection count of this sub-iteration
    Real i = 0;         // average inner block updates
    int i_s = 0;        // covariance line-search steps
    int i_theta = 0;    // phase line-search steps
    std::uint64_t predicted_mults = 0;
};

template <class Real>
struct ExperimentSpec {
    ExperimentKind kind = ExperimentKind::convergence;
    std::string name; // defaults to kind_name(kind)
    SystemConfig<Real> config{};
    int realizations = 100;
    std::uint64_t seed = 1;
    std::vector<Algo> algos = {Algo::ao, Algo::approx_ao, Algo::apgm};
    std::string out_dir;
    int workers = 1;

    std::vector<Real> sweep; // kind-specific values (see README)
    LinkMode link = LinkMode::both;
    Real tol = Real(1e-5);
    int max_outer = 30;
    Real dual_epsilon = Real(1e-5);

    // placement
    bool multi_ris = false;
    Real d_ris = Real(30);
    Real d_total = Real(300);
    int active_ris = 1;   // multi-RIS kinds: surfaces that actually reflect
    int budget = 400;     // multi_ris_budget: total elements across surfaces

    std::string label() const { return name.empty() ? kind_name(kind) : name; }

    void validate() const {
        config.validate();
        if (realizations < 1) throw SpecError("ExperimentSpec: realizations must be >= 1");
        if (algos.empty()) throw SpecError("ExperimentSpec: no algorithms selected");
        if (workers < 1) throw SpecError("ExperimentSpec: workers must be >= 1");
        switch (kind) {
            case ExperimentKind::sweep_nt:
            case ExperimentKind::sweep_k:
                if (sweep.empty()) throw SpecError("ExperimentSpec: sweep values required");
                for (Real v : sweep)
                    if (v < Real(1)) throw SpecError("ExperimentSpec: sweep values must be >= 1");
                break;
            case ExperimentKind::csi:
                if (sweep.empty()) throw SpecError("ExperimentSpec: sigma^2 sweep required");
                for (Real v : sweep)
                    if (v < Real(0)) throw SpecError("ExperimentSpec: sigma^2 must be >= 0");
                break;
            case ExperimentKind::blockage:
                if (sweep.empty()) throw SpecError("ExperimentSpec: probability sweep required");
                for (Real v : sweep)
                    if (v < Real(0) || v > Real(1))
                        throw SpecError("ExperimentSpec: probabilities must be in [0,1]");
                break;
            case ExperimentKind::multi_ris_distance:
            case ExperimentKind::multi_ris_budget:
                if (sweep.empty()) throw SpecError("ExperimentSpec: d_ris sweep required");
                if (active_ris < 1 || active_ris > 4)
                    throw SpecError("ExperimentSpec: active_ris must be in 1..4");
                if (kind == ExperimentKind::multi_ris_budget && budget % active_ris != 0)
                    throw SpecError("ExperimentSpec: budget must divide across active RISs");
                break;
            default: break;
        }
    }
};

// ---------------------------------------------------------------------------
// CSV

namespace detail {

template <class Real>
std::string format_real(Real v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", static_cast<double>(v));
    return buf;
}

inline std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream ss(line);
    while (std::getline(ss, cur, sep)) out.push_back(cur);
    return out;
}

} // namespace detail

inline const char* detail_csv_header() {
    return "experiment,algo,seed,sweep_var,sweep_value,subiter,objective_bits,"
           "wall_ms,T,I,I_S,I_Theta,predicted_mults";
}

template <class Real>
void write_detail_csv(const std::vector<ResultRow<Real>>& rows, const std::string& path) {
    if (rows.empty()) throw SpecError("write_detail_csv: no records");
    std::ofstream out(path);
    if (!out) throw SpecError("write_detail_csv: cannot open " + path);
    out << detail_csv_header() << "\n";
    for (const auto& r : rows) {
        out << r.experiment << ',' << r.algo << ',' << r.seed << ',' << r.sweep_var << ','
            << detail::format_real(r.sweep_value) << ',' << r.subiter << ','
            << detail::format_real(r.objective_bits) << ','
            << detail::format_real<Real>(Real(r.wall_ms)) << ',' << r.t << ','
            << detail::format_real(r.i) << ',' << r.i_s << ',' << r.i_theta << ','
            << r.predicted_mults << "\n";
    }
    if (!out) throw SpecError("write_detail_csv: write failed for " + path);
}

template <class Real>
std::vector<ResultRow<Real>> read_detail_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw SpecError("read_detail_csv: cannot open " + path);
    std::string line;
    if (!std::getline(in, line) || line != detail_csv_header())
        throw SpecError("read_detail_csv: bad header in " + path);
    std::vector<ResultRow<Real>> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto f = detail::split(line, ',');
        if (f.size() != 13) throw SpecError("read_detail_csv: bad row in " + path);
        ResultRow<Real> r;
        r.experiment = f[0];
        r.algo = f[1];
        r.seed = std::stoull(f[2]);
        r.sweep_var = f[3];
        r.sweep_value = Real(std::stod(f[4]));
        r.subiter = std::stoi(f[5]);
        r.objective_bits = Real(std::stod(f[6]));
        r.wall_ms = std::stod(f[7]);
        r.t = std::stoi(f[8]);
        r.i = Real(std::stod(f[9]));
        r.i_s = std::stoi(f[10]);
        r.i_theta = std::stoi(f[11]);
        r.predicted_mults = std::stoull(f[12]);
        rows.push_back(std::move(r));
    }
    return rows;
}

template <class Real>
struct SummaryRow {
    std::string experiment;
    std::string algo;
    std::string sweep_var;
    Real sweep_value = 0;
    long n = 0;
    Real mean_objective_bits = 0;
    Real se_objective_bits = 0;
    double mean_wall_ms = 0;
};

// Means and standard errors of each run's final objective, grouped by
// (experiment, algo, sweep point).
template <class Real>
std::vector<SummaryRow<Real>> summarize(const std::vector<ResultRow<Real>>& rows) {
    // final row per (experiment, algo, sweep_value, seed)
    std::map<std::tuple<std::string, std::string, Real, std::uint64_t>,
             const ResultRow<Real>*>
        finals;
    for (const auto& r : rows) {
        auto key = std::make_tuple(r.experiment, r.algo, r.sweep_value, r.seed);
        auto it = finals.find(key);
        if (it == finals.end() || r.subiter >= it->second->subiter) finals[key] = &r;
    }
    std::map<std::tuple<std::string, std::string, Real>,
             std::vector<const ResultRow<Real>*>>
        groups;
    for (const auto& [key, row] : finals)
        groups[std::make_tuple(std::get<0>(key), std::get<1>(key), std::get<2>(key))]
            .push_back(row);

    std::vector<SummaryRow<Real>> out;
    for (const auto& [key, members] : groups) {
        SummaryRow<Real> s;
        s.experiment = std::get<0>(key);
        s.algo = std::get<1>(key);
        s.sweep_value = std::get<2>(key);
        s.sweep_var = members.front()->sweep_var;
        s.n = static_cast<long>(members.size());
        Real acc = 0;
        double wall = 0;
        for (const auto* m : members) {
            acc += m->objective_bits;
            wall += m->wall_ms;
        }
        s.mean_objective_bits = acc / Real(s.n);
        s.mean_wall_ms = wall / double(s.n);
        if (s.n > 1) {
            Real var = 0;
            for (const auto* m : members) {
                const Real d = m->objective_bits - s.mean_objective_bits;
                var += d * d;
            }
            var /= Real(s.n - 1);
            s.se_objective_bits = std::sqrt(var / Real(s.n));
        }
        out.push_back(std::move(s));
    }
    return out;
}

template <class Real>
void write_summary_csv(const std::vector<SummaryRow<Real>>& rows, const std::string& path) {
    if (rows.empty()) throw SpecError("write_summary_csv: no records");
    std::ofstream out(path);
    if (!out) throw SpecError("write_summary_csv: cannot open " + path);
    out << "experiment,algo,sweep_var,sweep_value,n,mean_objective_bits,"
           "se_objective_bits,mean_wall_ms\n";
    for (const auto& r : rows)
        out << r.experiment << ',' << r.algo << ',' << r.sweep_var << ','
            << detail::format_real(r.sweep_value) << ',' << r.n << ','
            << detail::format_real(r.mean_objective_bits) << ','
            << detail::format_real(r.se_objective_bits) << ','
            << detail::format_real<Real>(Real(r.mean_wall_ms)) << "\n";
}

// emit_results: detail plus summary files; both require at least one record.
template <class Real>
void emit_results(const std::vector<ResultRow<Real>>& rows, const std::string& out_dir,
                  const std::string& stem) {
    if (rows.empty()) throw SpecError("emit_results: no records");
    std::filesystem::create_directories(out_dir);
    write_detail_csv(rows, out_dir + "/" + stem + ".csv");
    write_summary_csv(summarize(rows), out_dir + "/" + stem + "_summary.csv");
}

// ---------------------------------------------------------------------------
// experiment execution

namespace detail {

// Reference per-iteration loop counters (N_t=8, N_r=2, N_s=1, N_ris=225),
// averaged over the first five iterations, for the complexity table
// experiment: {K, T_ao, I_ao, T_aao, I_aao, ITh_aao, IS_apgm, ITh_apgm}.
struct ComplexityPreset {
    bool direct_link;
    std::uint64_t k, t_ao, i_ao, t_aao, i_aao, ith_aao, is_apgm, ith_apgm;
};

inline const std::vector<ComplexityPreset>& complexity_presets() {
    static const std::vector<ComplexityPreset> presets = {
        {true, 2, 24, 3, 21, 3, 1, 4, 1},   {true, 6, 26, 8, 23, 8, 1, 4, 1},
        {true, 12, 27, 14, 24, 14, 1, 5, 1}, {false, 2, 24, 3, 21, 3, 1, 3, 1},
        {false, 6, 26, 7, 23, 7, 1, 3, 1},   {false, 12, 27, 13, 24, 13, 1, 3, 2},
    };
    return presets;
}

template <class Real>
SystemConfig<Real> config_at(const ExperimentSpec<Real>& spec, Real sweep_value) {
    SystemConfig<Real> c = spec.config;
    switch (spec.kind) {
        case ExperimentKind::sweep_nt:
            c.nt = static_cast<int>(sweep_value);
            break;
        case ExperimentKind::sweep_k:
            c.set_uniform_users(static_cast<int>(sweep_value),
                                spec.config.n_k.empty() ? 2 : spec.config.n_k.front());
            break;
        case ExperimentKind::multi_ris_distance:
            c.ns = spec.active_ris;
            break;
        case ExperimentKind::multi_ris_budget:
            c.ns = spec.active_ris;
            c.nris = spec.budget / spec.active_ris;
            break;
        default: break;
    }
    if (spec.link == LinkMode::direct_only) {
        c.ns = 0;
        c.nris = 0;
    }
    return c;
}

template <class Real>
PlacementSpec<Real> placement_at(const ExperimentSpec<Real>& spec, Real sweep_value,
                                 const SystemConfig<Real>& c) {
    const bool multi = spec.multi_ris || spec.kind == ExperimentKind::multi_ris_distance ||
                       spec.kind == ExperimentKind::multi_ris_budget;
    const Real d = (spec.kind == ExperimentKind::multi_ris_distance ||
                    spec.kind == ExperimentKind::multi_ris_budget)
                       ? sweep_value
                       : spec.d_ris;
    PlacementSpec<Real> p = multi ? PlacementSpec<Real>::multi_ris(d, spec.d_total)
                                  : PlacementSpec<Real>::single_ris(d);
    p.ris.resize(static_cast<size_t>(c.ns), typename PlacementSpec<Real>::Vec3(d, 0, 5));
    return p;
}

// Counter averages over the first five outer iterations, for the
// Table-style complexity report attached to each run.
template <class Real>
ComplexityParams measured_complexity(const RunTrace<Real>& trace,
                                     const SystemConfig<Real>& c) {
    ComplexityParams p;
    p.k = static_cast<std::uint64_t>(std::max(c.users(), 1));
    p.nt = static_cast<std::uint64_t>(std::max(c.nt, 1));
    p.nr = static_cast<std::uint64_t>(std::max(c.n_k.empty() ? 1 : c.n_k.front(), 1));
    p.ns = static_cast<std::uint64_t>(c.ns);
    p.nris = static_cast<std::uint64_t>(c.nris);
    double t = 0, i = 0, is = 0, ith = 0;
    int n_cov = 0, n_phase = 0;
    for (const auto& row : trace.rows) {
        if (row.outer > 5) break;
        if (row.kind == SubIterKind::covariance) {
            t += row.dual_outer;
            i += row.dual_inner_avg;
            is += row.line_search_steps;
            ++n_cov;
        } else {
            ith += row.line_search_steps;
            ++n_phase;
        }
    }
    auto avg = [](double acc, int n) {
        return static_cast<std::uint64_t>(n > 0 ? std::llround(acc / n) : 0);
    };
    p.t = avg(t, n_cov);
    p.i = avg(i, n_cov);
    p.i_s = avg(is, n_cov);
    p.i_theta = avg(ith, n_phase);
    return p;
}

} // namespace detail

// Runs one experiment: for every (sweep point, realization) draw geometry
// and channels from per-realization streams, run the selected algorithms,
// and collect rows. Workers steal realizations; output order is
// deterministic regardless of the worker count. Writes detail and summary
// CSVs when out_dir is set.
template <class Real>
std::vector<ResultRow<Real>> run_experiment(const ExperimentSpec<Real>& spec) {
    spec.validate();
    std::vector<ResultRow<Real>> rows;

    if (spec.kind == ExperimentKind::complexity_table) {
        for (const auto& preset : detail::complexity_presets()) {
            ComplexityParams p;
            p.nt = 8;
            p.nr = 2;
            p.ns = 1;
            p.nris = 225;
            p.k = preset.k;
            const std::string tag =
                spec.label() + (preset.direct_link ? ":dl_present" : ":dl_blocked");
            auto push = [&](Algo algo, ComplexityParams q) {
                ResultRow<Real> r;
                r.experiment = tag;
                r.algo = algo_name(algo);
                r.sweep_var = "k";
                r.sweep_value = Real(preset.k);
                r.t = static_cast<int>(q.t);
                r.i = Real(q.i);
                r.i_s = static_cast<int>(q.i_s);
                r.i_theta = static_cast<int>(q.i_theta);
                r.predicted_mults = predict_complexity(algo, q);
                rows.push_back(std::move(r));
            };
            ComplexityParams q = p;
            q.t = preset.t_ao;
            q.i = preset.i_ao;
            push(Algo::ao, q);
            q = p;
            q.t = preset.t_aao;
            q.i = preset.i_aao;
            q.i_theta = preset.ith_aao;
            push(Algo::approx_ao, q);
            q = p;
            q.i_s = preset.is_apgm;
            q.i_theta = preset.ith_apgm;
            push(Algo::apgm, q);
        }
        if (!spec.out_dir.empty()) emit_results(rows, spec.out_dir, spec.label());
        return rows;
    }

    const std::vector<Real> sweep = spec.sweep.empty() ? std::vector<Real>{0} : spec.sweep;
    const long total = static_cast<long>(sweep.size()) * spec.realizations;
    std::vector<std::vector<ResultRow<Real>>> slots(static_cast<size_t>(total) *
                                                    spec.algos.size());

    std::atomic<long> next{0};
    std::atomic<bool> failed{false};
    std::string error_message;
    std::mutex error_mutex;

    auto worker = [&]() {
        for (;;) {
            const long job = next.fetch_add(1);
            if (job >= total || failed.load()) return;
            try {
                const size_t sweep_idx = static_cast<size_t>(job) / spec.realizations;
                const std::uint64_t realization =
                    static_cast<std::uint64_t>(job % spec.realizations);
                const Real value = sweep[sweep_idx];

                const auto c = detail::config_at(spec, value);
                const auto place = detail::placement_at(spec, value, c);

                SeededRng geo(spec.seed, derive_stream(realization, RngPurpose::geometry));
                SeededRng chan(spec.seed, derive_stream(realization, RngPurpose::channels));
                SeededRng init(spec.seed, derive_stream(realization, RngPurpose::init));

                auto geometry = build_geometry(c, place, geo);
                auto truth = sample_channels(c, geometry, chan);
                if (spec.link == LinkMode::ris_only) {
                    SeededRng block(spec.seed,
                                    derive_stream(realization, RngPurpose::blockage));
                    truth = apply_blockage(truth, Real(0), block);
                }
                if (spec.kind == ExperimentKind::blockage) {
                    SeededRng block(spec.seed,
                                    derive_stream(realization, RngPurpose::blockage));
                    truth = apply_blockage(truth, value, block);
                }

                ChannelSet<Real> working = truth;
                if (spec.kind == ExperimentKind::csi && value > Real(0)) {
                    SeededRng err(spec.seed,
                                  derive_stream(realization, RngPurpose::csi_error));
                    working = apply_csi_error(truth, value, err);
                }

                auto inst = make_instance(std::move(working), c.power, init);

                DriverOptions<Real> opts;
                opts.tol = spec.tol;
                opts.max_outer = spec.max_outer;
                opts.dual_epsilon = spec.dual_epsilon;
                if (spec.kind == ExperimentKind::csi) opts.eval_channels = &truth;

                const char* var = "";
                switch (spec.kind) {
                    case ExperimentKind::convergence: var = "none"; break;
                    case ExperimentKind::sweep_nt: var = "nt"; break;
                    case ExperimentKind::sweep_k: var = "k"; break;
                    case ExperimentKind::csi: var = "sigma2"; break;
                    case ExperimentKind::blockage: var = "p"; break;
                    default: var = "d_ris"; break;
                }

                for (size_t a = 0; a < spec.algos.size(); ++a) {
                    const Algo algo = spec.algos[a];
                    const auto trace = run_algorithm(algo, inst, opts);
                    const auto cx = detail::measured_complexity(trace, c);
                    const std::uint64_t mults = predict_complexity(algo, cx);

                    std::vector<ResultRow<Real>> local;
                    const bool full_trace = spec.kind == ExperimentKind::convergence ||
                                            spec.kind == ExperimentKind::csi;
                    for (size_t ri = 0; ri < trace.rows.size(); ++ri) {
                        if (!full_trace && ri + 1 != trace.rows.size()) continue;
                        const auto& row = trace.rows[ri];
                        ResultRow<Real> out;
                        out.experiment = spec.label();
                        out.algo = algo_name(algo);
                        out.seed = realization;
                        out.sweep_var = var;
                        out.sweep_value = value;
                        out.subiter = static_cast<int>(ri) + 1;
                        out.objective_bits = (spec.kind == ExperimentKind::csi &&
                                              std::isfinite(row.eval_bits))
                                                 ? row.eval_bits
                                                 : row.objective_bits;
                        out.wall_ms = row.wall_ms;
                        out.t = row.dual_outer;
                        out.i = row.dual_inner_avg;
                        out.i_s = row.kind == SubIterKind::covariance
                                      ? row.line_search_steps
                                      : 0;
                        out.i_theta =
                            row.kind == SubIterKind::phase ? row.line_search_steps : 0;
                        out.predicted_mults = mults;
                        local.push_back(std::move(out));
                    }
                    slots[static_cast<size_t>(job) * spec.algos.size() + a] =
                        std::move(local);
                }
            } catch (const std::exception& e) {
                std::lock_guard<std::mutex> lock(error_mutex);
                error_message = e.what();
                failed.store(true);
                return;
            }
        }
    };

    const int n_workers = std::max(1, std::min<int>(spec.workers, static_cast<int>(total)));
    if (n_workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < n_workers; ++w) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (failed.load()) throw NumericalError("run_experiment: " + error_message);

    for (auto& slot : slots)
        for (auto& r : slot) rows.push_back(std::move(r));

    if (!spec.out_dir.empty()) emit_results(rows, spec.out_dir, spec.label());
    return rows;
}

// ---------------------------------------------------------------------------
// config file: sections of key = value lines, '#' comments

struct ConfigFile {
    std::map<std::string, std::map<std::string, std::string>> sections;

    bool has(const std::string& sec, const std::string& key) const {
        auto s = sections.find(sec);
        return s != sections.end() && s->second.count(key) > 0;
    }
    std::string get(const std::string& sec, const std::string& key,
                    const std::string& fallback = "") const {
        auto s = sections.find(sec);
        if (s == sections.end()) return fallback;
        auto v = s->second.find(key);
        return v == s->second.end() ? fallback : v->second;
    }
};

namespace detail {

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

} // namespace detail

inline ConfigFile parse_config(std::istream& in) {
    ConfigFile cfg;
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw SpecError("config line " + std::to_string(lineno) + ": bad section");
            section = detail::trim(line.substr(1, line.size() - 2));
            cfg.sections[section];
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw SpecError("config line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string value = detail::trim(line.substr(eq + 1));
        if (key.empty()) throw SpecError("config line " + std::to_string(lineno) + ": empty key");
        cfg.sections[section][key] = value;
    }
    return cfg;
}

inline ConfigFile parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw SpecError("cannot open config file " + path);
    return parse_config(in);
}

namespace detail {

inline std::vector<Algo> parse_algos(const std::string& s) {
    std::vector<Algo> out;
    for (const auto& tok : split(s, ',')) {
        const std::string t = trim(tok);
        if (t == "ao")
            out.push_back(Algo::ao);
        else if (t == "aao" || t == "approx_ao")
            out.push_back(Algo::approx_ao);
        else if (t == "apgm")
            out.push_back(Algo::apgm);
        else
            throw SpecError("unknown algorithm '" + t + "'");
    }
    return out;
}

template <class Real>
std::vector<Real> parse_reals(const std::string& s) {
    std::vector<Real> out;
    for (const auto& tok : split(s, ','))
        if (!trim(tok).empty()) out.push_back(Real(std::stod(trim(tok))));
    return out;
}

} // namespace detail

template <class Real>
ExperimentSpec<Real> spec_from_config(const ConfigFile& cfg) {
    ExperimentSpec<Real> spec;

    const std::string kind = cfg.get("experiment", "kind", "convergence");
    if (kind == "convergence")
        spec.kind = ExperimentKind::convergence;
    else if (kind == "sweep_nt")
        spec.kind = ExperimentKind::sweep_nt;
    else if (kind == "sweep_k")
        spec.kind = ExperimentKind::sweep_k;
    else if (kind == "csi")
        spec.kind = ExperimentKind::csi;
    else if (kind == "blockage")
        spec.kind = ExperimentKind::blockage;
    else if (kind == "multi_ris_distance")
        spec.kind = ExperimentKind::multi_ris_distance;
    else if (kind == "multi_ris_budget")
        spec.kind = ExperimentKind::multi_ris_budget;
    else if (kind == "complexity_table")
        spec.kind = ExperimentKind::complexity_table;
    else
        throw SpecError("unknown experiment kind '" + kind + "'");

    spec.name = cfg.get("experiment", "name");
    if (cfg.has("experiment", "realizations"))
        spec.realizations = std::stoi(cfg.get("experiment", "realizations"));
    if (cfg.has("experiment", "seed"))
        spec.seed = std::stoull(cfg.get("experiment", "seed"));
    if (cfg.has("experiment", "algos"))
        spec.algos = detail::parse_algos(cfg.get("experiment", "algos"));
    if (cfg.has("experiment", "workers"))
        spec.workers = std::stoi(cfg.get("experiment", "workers"));
    if (cfg.has("experiment", "sweep"))
        spec.sweep = detail::parse_reals<Real>(cfg.get("experiment", "sweep"));
    if (cfg.has("experiment", "out")) spec.out_dir = cfg.get("experiment", "out");
    if (cfg.has("experiment", "tol")) spec.tol = Real(std::stod(cfg.get("experiment", "tol")));
    if (cfg.has("experiment", "max_outer"))
        spec.max_outer = std::stoi(cfg.get("experiment", "max_outer"));
    if (cfg.has("experiment", "dual_epsilon"))
        spec.dual_epsilon = Real(std::stod(cfg.get("experiment", "dual_epsilon")));

    const std::string link = cfg.get("experiment", "link", "both");
    if (link == "both")
        spec.link = LinkMode::both;
    else if (link == "direct")
        spec.link = LinkMode::direct_only;
    else if (link == "ris")
        spec.link = LinkMode::ris_only;
    else
        throw SpecError("unknown link mode '" + link + "'");

    auto& c = spec.config;
    if (cfg.has("system", "nt")) c.nt = std::stoi(cfg.get("system", "nt"));
    {
        const int k = cfg.has("system", "k") ? std::stoi(cfg.get("system", "k")) : c.users();
        const int nr = cfg.has("system", "nr") ? std::stoi(cfg.get("system", "nr"))
                                               : (c.n_k.empty() ? 2 : c.n_k.front());
        c.set_uniform_users(k, nr);
    }
    if (cfg.has("system", "ns")) c.ns = std::stoi(cfg.get("system", "ns"));
    if (cfg.has("system", "nris")) c.nris = std::stoi(cfg.get("system", "nris"));
    if (cfg.has("system", "power")) c.power = Real(std::stod(cfg.get("system", "power")));
    if (cfg.has("system", "noise_db"))
        c.noise = std::pow(Real(10), Real(std::stod(cfg.get("system", "noise_db"))) / 10);
    if (cfg.has("system", "noise")) c.noise = Real(std::stod(cfg.get("system", "noise")));
    if (cfg.has("system", "lambda")) {
        c.lambda = Real(std::stod(cfg.get("system", "lambda")));
        c.s_t = c.s_r = c.s_ris = c.lambda / 2;
    }
    if (cfg.has("system", "alpha_dir"))
        c.alpha_dir = Real(std::stod(cfg.get("system", "alpha_dir")));
    if (cfg.has("system", "rician"))
        c.rician_factor = Real(std::stod(cfg.get("system", "rician")));

    if (cfg.has("placement", "preset"))
        spec.multi_ris = cfg.get("placement", "preset") == "multi";
    if (cfg.has("placement", "d_ris"))
        spec.d_ris = Real(std::stod(cfg.get("placement", "d_ris")));
    if (cfg.has("placement", "d_total"))
        spec.d_total = Real(std::stod(cfg.get("placement", "d_total")));
    if (cfg.has("placement", "active_ris"))
        spec.active_ris = std::stoi(cfg.get("placement", "active_ris"));
    if (cfg.has("placement", "budget"))
        spec.budget = std::stoi(cfg.get("placement", "budget"));

    spec.validate();
    return spec;
}

} // namespace risbc

#endif
