// SPDX-License-Identifier: Apache-2.0
//
// risbc - sum-rate optimization for RIS-aided MIMO broadcast channels
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
// ------------------------------------------------------------------------

#ifndef RISBC_SCENARIO_HPP
#define RISBC_SCENARIO_HPP

#include "risbc/common.hpp"
#include "risbc/rng.hpp"

#include <limits>

namespace risbc {

// All scalar system parameters. Defaults follow the reference single-RIS
// setup: 2 GHz carrier, half-wavelength spacings, 1 W budget, -110 dB noise.
template <class Real>
struct SystemConfig {
    int nt = 8;                  // transmit antennas at the BS
    std::vector<int> n_k = {2, 2}; // receive antennas per user; K = n_k.size()
    int ns = 1;                  // number of RISs (0 = direct link only)
    int nris = 225;              // elements per RIS
    Real power = Real(1);        // total transmit power P [W]
    Real noise = Real(1e-11);    // noise power N_0 [W] (-110 dB)
    Real lambda = Real(0.15);    // carrier wavelength [m]
    Real s_t = Real(0.075);      // BS element spacing [m]
    Real s_r = Real(0.075);      // user element spacing [m]
    Real s_ris = Real(0.075);    // RIS element spacing [m]
    Real alpha_dir = Real(3);    // direct-link path loss exponent
    Real g_t = Real(2);          // transmit antenna gain (linear)
    Real g_r = Real(2);          // receive antenna gain (linear)
    Real rician_factor = Real(1); // K_R; 0 = Rayleigh, inf = pure LoS

    int users() const { return static_cast<int>(n_k.size()); }
    int total_elements() const { return ns * nris; }

    void set_uniform_users(int k, int nr) { n_k.assign(static_cast<size_t>(k), nr); }

    void validate() const {
        if (nt < 1) throw SpecError("SystemConfig: nt must be >= 1");
        if (n_k.empty()) throw SpecError("SystemConfig: at least one user");
        for (int n : n_k)
            if (n < 1) throw SpecError("SystemConfig: n_k must be >= 1");
        // ns/nris may be zero: that is the direct-link-only regime.
        if (ns < 0 || nris < 0) throw SpecError("SystemConfig: negative RIS count");
        if (!(power > Real(0))) throw SpecError("SystemConfig: P must be > 0");
        if (!(noise > Real(0))) throw SpecError("SystemConfig: N_0 must be > 0");
        if (!(lambda > Real(0))) throw SpecError("SystemConfig: lambda must be > 0");
        if (!(alpha_dir >= Real(2))) throw SpecError("SystemConfig: alpha_DIR must be >= 2");
        if (!(rician_factor >= Real(0))) throw SpecError("SystemConfig: K_R must be >= 0");
        if (!(s_t > Real(0) && s_r > Real(0) && s_ris > Real(0)))
            throw SpecError("SystemConfig: element spacings must be > 0");
    }
};

// Discrete uniform range {lo, lo+step, ..., hi}; lo == hi pins the value.
template <class Real>
struct GridRange {
    Real lo, hi, step;
    Real sample(SeededRng& rng) const {
        if (!(hi >= lo) || !(step > Real(0)))
            throw SpecError("GridRange: need hi >= lo and step > 0");
        if (hi == lo) return lo;
        return Real(rng.uniform_grid(double(lo), double(hi), double(step)));
    }
};

// BS/RIS coordinates plus the sampling grids for user midpoints.
template <class Real>
struct PlacementSpec {
    using Vec3 = Eigen::Matrix<Real, 3, 1>;

    Real l_t = Real(20), h_t = Real(10);
    std::vector<Vec3> ris; // midpoints; size must equal SystemConfig::ns
    GridRange<Real> user_d{Real(200), Real(500), Real(2)};
    GridRange<Real> user_l{Real(1), Real(70), Real(1)};
    GridRange<Real> user_h{Real(1.5), Real(2), Real(0.01)};

    static PlacementSpec single_ris(Real d_ris = Real(30), Real h_ris = Real(5)) {
        PlacementSpec p;
        p.ris = {Vec3(d_ris, Real(0), h_ris)};
        return p;
    }

    // Four-RIS layout: two surfaces near the BS line (y = 0) and two behind
    // the user area (y = 60 m), mirrored about the midpoint distance D.
    static PlacementSpec multi_ris(Real d_ris, Real d_total = Real(300)) {
        PlacementSpec p;
        p.l_t = Real(30);
        p.user_d = {Real(275), Real(325), Real(1)};
        p.user_l = {Real(5), Real(55), Real(1)};
        p.ris = {Vec3(d_ris, Real(0), Real(5)),
                 Vec3(d_total - d_ris, Real(0), Real(5)),
                 Vec3(d_ris, Real(60), Real(5)),
                 Vec3(d_total - d_ris, Real(60), Real(5))};
        return p;
    }
};

template <class Real>
struct Geometry {
    using Vec3 = Eigen::Matrix<Real, 3, 1>;

    Vec3 bs;
    std::vector<Vec3> ris;
    std::vector<Vec3> users;

    std::vector<Real> d_t_ris;              // [i]
    std::vector<std::vector<Real>> d_ris_k; // [i][k]
    std::vector<Real> d_t_k;                // [k]
    std::vector<Real> cos_gamma_t;          // [i]
    std::vector<std::vector<Real>> cos_gamma_r; // [i][k]
};

// Distances and incidence/reflection cosines from the closed-form
// expressions for this layout (BS ULA on the y axis at x = 0, RISs in
// planes of constant y, users at (d_k, l_k, h_k)). Each RIS faces the
// half-space containing the BS, so cos(gamma) is signed with respect to
// that normal.
template <class Real>
Geometry<Real> build_geometry(const SystemConfig<Real>& config,
                              const PlacementSpec<Real>& placement,
                              SeededRng& rng) {
    config.validate();
    if (static_cast<int>(placement.ris.size()) != config.ns)
        throw SpecError("build_geometry: placement must give one midpoint per RIS");

    Geometry<Real> g;
    g.bs = {Real(0), placement.l_t, placement.h_t};
    g.ris = placement.ris;
    const int k_users = config.users();
    g.users.reserve(k_users);
    for (int k = 0; k < k_users; ++k) {
        const Real d = placement.user_d.sample(rng);
        const Real l = placement.user_l.sample(rng);
        const Real h = placement.user_h.sample(rng);
        g.users.push_back({d, l, h});
    }

    g.d_t_k.resize(k_users);
    for (int k = 0; k < k_users; ++k) {
        const auto& u = g.users[static_cast<size_t>(k)];
        g.d_t_k[static_cast<size_t>(k)] = std::sqrt(
            u.x() * u.x() + (placement.l_t - u.y()) * (placement.l_t - u.y()) +
            (placement.h_t - u.z()) * (placement.h_t - u.z()));
    }

    const int ns = config.ns;
    g.d_t_ris.resize(ns);
    g.cos_gamma_t.resize(ns);
    g.d_ris_k.assign(static_cast<size_t>(ns), std::vector<Real>(k_users));
    g.cos_gamma_r.assign(static_cast<size_t>(ns), std::vector<Real>(k_users));
    for (int i = 0; i < ns; ++i) {
        const auto& r = g.ris[static_cast<size_t>(i)];
        const Real dtr = std::sqrt(r.x() * r.x() +
                                   (placement.l_t - r.y()) * (placement.l_t - r.y()) +
                                   (placement.h_t - r.z()) * (placement.h_t - r.z()));
        g.d_t_ris[static_cast<size_t>(i)] = dtr;
        const Real facing = (placement.l_t >= r.y()) ? Real(1) : Real(-1);
        g.cos_gamma_t[static_cast<size_t>(i)] = facing * (placement.l_t - r.y()) / dtr;
        for (int k = 0; k < k_users; ++k) {
            const auto& u = g.users[static_cast<size_t>(k)];
            const Real drk = std::sqrt((r.x() - u.x()) * (r.x() - u.x()) +
                                       (u.y() - r.y()) * (u.y() - r.y()) +
                                       (r.z() - u.z()) * (r.z() - u.z()));
            g.d_ris_k[static_cast<size_t>(i)][static_cast<size_t>(k)] = drk;
            g.cos_gamma_r[static_cast<size_t>(i)][static_cast<size_t>(k)] =
                facing * (u.y() - r.y()) / drk;
        }
    }

    for (Real d : g.d_t_k)
        if (!(d > Real(0))) throw NumericalError("build_geometry: zero BS-user distance");
    for (Real d : g.d_t_ris)
        if (!(d > Real(0))) throw NumericalError("build_geometry: zero BS-RIS distance");
    for (const auto& row : g.d_ris_k)
        for (Real d : row)
            if (!(d > Real(0))) throw NumericalError("build_geometry: zero RIS-user distance");
    return g;
}

// beta_DIR,k = (4 pi / lambda)^2 d^alpha  (a loss; channels carry 1/beta).
template <class Real>
Real path_loss_direct(const Geometry<Real>& geometry, int k,
                      const SystemConfig<Real>& config) {
    const Real d = geometry.d_t_k.at(static_cast<size_t>(k));
    const Real c = Real(4) * pi_v<Real> / config.lambda;
    return c * c * std::pow(d, config.alpha_dir);
}

// Inverse far-field loss of the BS -> RIS i -> user k reflection path.
// Grazing incidence (cos = 0) gives 0, i.e. infinite loss; a negative
// cosine means the RIS is illuminated or observed from behind.
template <class Real>
Real inv_path_loss_ris(const Geometry<Real>& geometry, int i, int k,
                       const SystemConfig<Real>& config) {
    const Real ct = geometry.cos_gamma_t.at(static_cast<size_t>(i));
    const Real cr = geometry.cos_gamma_r.at(static_cast<size_t>(i)).at(static_cast<size_t>(k));
    if (ct < Real(0) || cr < Real(0))
        throw NumericalError("inv_path_loss_ris: RIS illuminated from behind");
    const Real d1 = geometry.d_t_ris[static_cast<size_t>(i)];
    const Real d2 = geometry.d_ris_k[static_cast<size_t>(i)][static_cast<size_t>(k)];
    const Real l2 = config.lambda * config.lambda;
    return config.g_t * config.g_r * l2 * l2 * ct * cr /
           (Real(256) * pi_v<Real> * pi_v<Real> * d1 * d1 * d2 * d2);
}

template <class Real>
Real path_loss_ris(const Geometry<Real>& geometry, int i, int k,
                   const SystemConfig<Real>& config) {
    return Real(1) / inv_path_loss_ris(geometry, i, k, config);
}

// Noise-normalized channel realization. D_k and the per-RIS column blocks
// of G_k absorb sqrt(beta^-1 / N_0); U is left unscaled since the full
// product loss of the reflection path is carried in G_k.
template <class Real>
struct ChannelSet {
    std::vector<MatC<Real>> d; // n_k x N_t, per user
    MatC<Real> u;              // (N_s N_ris) x N_t
    std::vector<MatC<Real>> g; // n_k x (N_s N_ris), per user

    int ns = 0;
    int nris = 0;
    std::uint64_t seed = 0;
    std::uint64_t stream = 0;
    std::vector<bool> blocked;           // per user; true => D_k forced to 0
    Real csi_sigma2 = Real(0);           // estimation error variance (on fading)
    std::vector<Real> scale_dir;         // sqrt(beta_DIR^-1 / N_0), per user
    std::vector<std::vector<Real>> scale_ris; // [i][k]

    int users() const { return static_cast<int>(d.size()); }
    int nt() const { return d.empty() ? 0 : static_cast<int>(d.front().cols()); }
    int n_of(int k) const { return static_cast<int>(d[static_cast<size_t>(k)].rows()); }
    int total_elements() const { return ns * nris; }

    void validate(const SystemConfig<Real>& config) const {
        if (users() != config.users())
            throw DimensionError("ChannelSet: user count mismatch");
        const int m = config.total_elements();
        if (u.rows() != m || (m > 0 && u.cols() != config.nt))
            throw DimensionError("ChannelSet: U has wrong shape");
        for (int k = 0; k < users(); ++k) {
            const auto& dk = d[static_cast<size_t>(k)];
            const auto& gk = g[static_cast<size_t>(k)];
            if (dk.rows() != config.n_k[static_cast<size_t>(k)] || dk.cols() != config.nt)
                throw DimensionError("ChannelSet: D_k has wrong shape");
            if (gk.rows() != dk.rows() || gk.cols() != m)
                throw DimensionError("ChannelSet: G_k has wrong shape");
            if (!dk.allFinite() || !gk.allFinite())
                throw NumericalError("ChannelSet: non-finite entries");
        }
        if (m > 0 && !u.allFinite())
            throw NumericalError("ChannelSet: non-finite entries in U");
    }
};

namespace detail {

// Factor n into nx * nz with nz the largest divisor <= sqrt(n); a square
// count gives the square formation used by the reference setup.
inline std::pair<int, int> ura_shape(int n) {
    int nz = static_cast<int>(std::sqrt(static_cast<double>(n)));
    while (nz > 1 && n % nz != 0) --nz;
    return {n / std::max(nz, 1), std::max(nz, 1)};
}

// Planar-wave steering phase offsets for an array of element positions
// around midpoint `mid`, along unit propagation direction `dir`.
template <class Real>
VecC<Real> steering(const std::vector<Eigen::Matrix<Real, 3, 1>>& pos,
                    const Eigen::Matrix<Real, 3, 1>& mid,
                    const Eigen::Matrix<Real, 3, 1>& dir, Real lambda) {
    VecC<Real> a(pos.size());
    const Real k_wave = Real(2) * pi_v<Real> / lambda;
    for (size_t i = 0; i < pos.size(); ++i) {
        const Real phase = k_wave * dir.dot(pos[i] - mid);
        a(static_cast<Eigen::Index>(i)) = std::polar(Real(1), phase);
    }
    return a;
}

template <class Real>
std::vector<Eigen::Matrix<Real, 3, 1>> ula_y(const Eigen::Matrix<Real, 3, 1>& mid,
                                             int n, Real spacing) {
    std::vector<Eigen::Matrix<Real, 3, 1>> p(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
        p[static_cast<size_t>(i)] = mid;
        p[static_cast<size_t>(i)].y() += (Real(i) - Real(n - 1) / Real(2)) * spacing;
    }
    return p;
}

template <class Real>
std::vector<Eigen::Matrix<Real, 3, 1>> ura_xz(const Eigen::Matrix<Real, 3, 1>& mid,
                                              int n, Real spacing) {
    const auto [nx, nz] = ura_shape(n);
    std::vector<Eigen::Matrix<Real, 3, 1>> p(static_cast<size_t>(n));
    for (int iz = 0; iz < nz; ++iz)
        for (int ix = 0; ix < nx; ++ix) {
            auto& q = p[static_cast<size_t>(iz * nx + ix)];
            q = mid;
            q.x() += (Real(ix) - Real(nx - 1) / Real(2)) * spacing;
            q.z() += (Real(iz) - Real(nz - 1) / Real(2)) * spacing;
        }
    return p;
}

// Rank-one LoS matrix between two arrays: a_rx a_tx^T along the
// midpoint-to-midpoint direction. Entries have unit modulus so the Rician
// mixing weights preserve per-entry second moments.
template <class Real>
MatC<Real> los_matrix(const std::vector<Eigen::Matrix<Real, 3, 1>>& tx,
                      const Eigen::Matrix<Real, 3, 1>& tx_mid,
                      const std::vector<Eigen::Matrix<Real, 3, 1>>& rx,
                      const Eigen::Matrix<Real, 3, 1>& rx_mid, Real lambda) {
    Eigen::Matrix<Real, 3, 1> dir = rx_mid - tx_mid;
    dir /= dir.norm();
    const VecC<Real> at = steering<Real>(tx, tx_mid, dir, lambda);
    const VecC<Real> ar = steering<Real>(rx, rx_mid, dir, lambda);
    return ar * at.transpose();
}

template <class Real>
MatC<Real> rician(const MatC<Real>& los, Real k_r, SeededRng& rng) {
    Real w_los, w_nlos;
    if (std::isinf(k_r)) {
        w_los = Real(1);
        w_nlos = Real(0);
    } else {
        w_los = std::sqrt(k_r / (Real(1) + k_r));
        w_nlos = std::sqrt(Real(1) / (Real(1) + k_r));
    }
    MatC<Real> h(los.rows(), los.cols());
    for (Eigen::Index r = 0; r < h.rows(); ++r)
        for (Eigen::Index c = 0; c < h.cols(); ++c) {
            const auto w = rng.cgaussian();
            h(r, c) = w_los * los(r, c) +
                      w_nlos * Complex<Real>(Real(w.real()), Real(w.imag()));
        }
    return h;
}

} // namespace detail

// Draws one Rician channel realization. Pure in (config, geometry, rng
// state): the same seed and stream give a bitwise identical ChannelSet.
// Spatial correlation across RIS elements is neglected.
template <class Real>
ChannelSet<Real> sample_channels(const SystemConfig<Real>& config,
                                 const Geometry<Real>& geometry, SeededRng& rng) {
    config.validate();
    const int k_users = config.users();
    const int m = config.total_elements();

    ChannelSet<Real> cs;
    cs.ns = config.ns;
    cs.nris = config.nris;
    cs.blocked.assign(static_cast<size_t>(k_users), false);
    cs.scale_dir.resize(static_cast<size_t>(k_users));
    cs.scale_ris.assign(static_cast<size_t>(config.ns),
                        std::vector<Real>(static_cast<size_t>(k_users)));

    const auto bs_el = detail::ula_y<Real>(geometry.bs, config.nt, config.s_t);

    // Direct links.
    cs.d.resize(static_cast<size_t>(k_users));
    for (int k = 0; k < k_users; ++k) {
        const auto user_el = detail::ula_y<Real>(geometry.users[static_cast<size_t>(k)],
                                                 config.n_k[static_cast<size_t>(k)], config.s_r);
        const MatC<Real> los = detail::los_matrix<Real>(
            bs_el, geometry.bs, user_el, geometry.users[static_cast<size_t>(k)], config.lambda);
        const Real scale = std::sqrt(Real(1) / (path_loss_direct(geometry, k, config) * config.noise));
        cs.scale_dir[static_cast<size_t>(k)] = scale;
        cs.d[static_cast<size_t>(k)] = scale * detail::rician(los, config.rician_factor, rng);
    }

    // BS -> RIS stack (unscaled).
    cs.u.resize(m, config.nt);
    for (int i = 0; i < config.ns; ++i) {
        const auto ris_el = detail::ura_xz<Real>(geometry.ris[static_cast<size_t>(i)],
                                                 config.nris, config.s_ris);
        const MatC<Real> los = detail::los_matrix<Real>(
            bs_el, geometry.bs, ris_el, geometry.ris[static_cast<size_t>(i)], config.lambda);
        cs.u.middleRows(static_cast<Eigen::Index>(i) * config.nris, config.nris) =
            detail::rician(los, config.rician_factor, rng);
    }

    // RIS -> user stacks, scaled by the per-RIS reflection path loss.
    cs.g.resize(static_cast<size_t>(k_users));
    for (int k = 0; k < k_users; ++k) {
        const int nk = config.n_k[static_cast<size_t>(k)];
        MatC<Real> gk(nk, m);
        const auto user_el = detail::ula_y<Real>(geometry.users[static_cast<size_t>(k)], nk, config.s_r);
        for (int i = 0; i < config.ns; ++i) {
            const auto ris_el = detail::ura_xz<Real>(geometry.ris[static_cast<size_t>(i)],
                                                     config.nris, config.s_ris);
            const MatC<Real> los = detail::los_matrix<Real>(
                ris_el, geometry.ris[static_cast<size_t>(i)], user_el,
                geometry.users[static_cast<size_t>(k)], config.lambda);
            const Real scale =
                std::sqrt(inv_path_loss_ris(geometry, i, k, config) / config.noise);
            cs.scale_ris[static_cast<size_t>(i)][static_cast<size_t>(k)] = scale;
            gk.middleCols(static_cast<Eigen::Index>(i) * config.nris, config.nris) =
                scale * detail::rician(los, config.rician_factor, rng);
        }
        cs.g[static_cast<size_t>(k)] = std::move(gk);
    }

    cs.validate(config);
    return cs;
}

// Estimated channels = true channels + CN(0, sigma2) error on the unscaled
// fading; the path-loss scaling is untouched. The caller keeps the true set
// to evaluate rates achieved by solutions optimized on the estimates.
template <class Real>
ChannelSet<Real> apply_csi_error(const ChannelSet<Real>& channels, Real sigma2,
                                 SeededRng& rng) {
    if (!(sigma2 >= Real(0)))
        throw SpecError("apply_csi_error: sigma2 must be >= 0");
    ChannelSet<Real> est = channels;
    est.csi_sigma2 = sigma2;
    if (sigma2 == Real(0)) return est;

    const Real sd = std::sqrt(sigma2);
    auto perturb = [&](MatC<Real>& mat, Real scale) {
        for (Eigen::Index r = 0; r < mat.rows(); ++r)
            for (Eigen::Index c = 0; c < mat.cols(); ++c) {
                const auto w = rng.cgaussian();
                mat(r, c) += scale * sd * Complex<Real>(Real(w.real()), Real(w.imag()));
            }
    };
    for (int k = 0; k < est.users(); ++k)
        perturb(est.d[static_cast<size_t>(k)], est.scale_dir[static_cast<size_t>(k)]);
    perturb(est.u, Real(1));
    for (int k = 0; k < est.users(); ++k)
        for (int i = 0; i < est.ns; ++i) {
            auto block = est.g[static_cast<size_t>(k)].middleCols(
                static_cast<Eigen::Index>(i) * est.nris, est.nris);
            for (Eigen::Index r = 0; r < block.rows(); ++r)
                for (Eigen::Index c = 0; c < block.cols(); ++c) {
                    const auto w = rng.cgaussian();
                    block(r, c) += est.scale_ris[static_cast<size_t>(i)][static_cast<size_t>(k)] *
                                   sd * Complex<Real>(Real(w.real()), Real(w.imag()));
                }
        }
    return est;
}

// Independently per user, keep the direct link with probability p,
// otherwise zero it exactly. The mask is recorded.
template <class Real>
ChannelSet<Real> apply_blockage(const ChannelSet<Real>& channels, Real p,
                                SeededRng& rng) {
    if (!(p >= Real(0) && p <= Real(1)))
        throw SpecError("apply_blockage: p must be in [0, 1]");
    ChannelSet<Real> out = channels;
    for (int k = 0; k < out.users(); ++k) {
        const bool keep = rng.bernoulli(double(p));
        if (!keep) {
            out.d[static_cast<size_t>(k)].setZero();
            out.blocked[static_cast<size_t>(k)] = true;
        }
    }
    return out;
}

} // namespace risbc

#endif
