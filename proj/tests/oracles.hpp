// Test-only oracles: independent reference computations that the library is
// checked against. Nothing in here may call back into the solver paths it
// verifies.

#ifndef RISBC_TESTS_ORACLES_HPP
#define RISBC_TESTS_ORACLES_HPP

#include "risbc/drivers.hpp"

#include <algorithm>

namespace oracles {

using risbc::Complex;
using risbc::MatC;
using risbc::VecC;
using risbc::VecR;

using Real = double;
using Mat = MatC<Real>;
using Vec = VecC<Real>;
using Cx = Complex<Real>;

// ---------------------------------------------------------------------------
// random test fixtures

inline Mat random_matrix(risbc::SeededRng& rng, int rows, int cols, double scale = 1.0) {
    Mat m(rows, cols);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) m(r, c) = scale * rng.cgaussian();
    return m;
}

inline Mat random_hermitian(risbc::SeededRng& rng, int n, double scale = 1.0) {
    return risbc::hermitize(random_matrix(rng, n, n, scale));
}

inline Mat random_psd(risbc::SeededRng& rng, int n, double scale = 1.0) {
    const Mat w = random_matrix(rng, n, n, scale);
    return risbc::hermitize(w * w.adjoint());
}

// Synthetic channel set with unit scales (skips the geometry layer).
inline risbc::ChannelSet<Real> random_channels(risbc::SeededRng& rng, int nt,
                                               const std::vector<int>& n_k, int ns,
                                               int nris, double gain = 1.0) {
    risbc::ChannelSet<Real> cs;
    cs.ns = ns;
    cs.nris = nris;
    const int m = ns * nris;
    cs.u = random_matrix(rng, m, nt);
    for (int n : n_k) {
        cs.d.push_back(random_matrix(rng, n, nt, gain));
        cs.g.push_back(random_matrix(rng, n, m, gain));
    }
    cs.blocked.assign(n_k.size(), false);
    cs.scale_dir.assign(n_k.size(), 1.0);
    cs.scale_ris.assign(static_cast<size_t>(ns), std::vector<Real>(n_k.size(), 1.0));
    return cs;
}

inline risbc::CovarianceSet<Real> random_covariances(risbc::SeededRng& rng,
                                                     const std::vector<int>& n_k,
                                                     double total_trace) {
    std::vector<Mat> mats;
    double tr = 0;
    for (int n : n_k) {
        Mat s = random_psd(rng, n);
        tr += std::real(s.trace());
        mats.push_back(std::move(s));
    }
    for (auto& s : mats) s *= total_trace / tr;
    return risbc::CovarianceSet<Real>(risbc::CovDomain::mac, std::move(mats));
}

// ---------------------------------------------------------------------------
// transcription oracles

// Per-RIS composite channel, summed entry by entry (the uncompacted form).
inline Mat naive_composite(const risbc::ChannelSet<Real>& cs, const Vec& theta, int k) {
    Mat h = cs.d[static_cast<size_t>(k)];
    for (int i = 0; i < cs.ns; ++i)
        for (int l = 0; l < cs.nris; ++l) {
            const int col = i * cs.nris + l;
            h += theta(col) * (cs.g[static_cast<size_t>(k)].col(col) * cs.u.row(col));
        }
    return h;
}

// log2 det(I + sum H^H S H) through Hermitian eigenvalues (no Cholesky).
inline Real logdet_eig_bits(const risbc::CompositeChannels<Real>& h,
                            const risbc::CovarianceSet<Real>& sbar) {
    const int nt = h.nt();
    Mat m = Mat::Identity(nt, nt);
    for (int k = 0; k < h.users(); ++k)
        m += h.h[static_cast<size_t>(k)].adjoint() * sbar.s[static_cast<size_t>(k)] *
             h.h[static_cast<size_t>(k)];
    Eigen::SelfAdjointEigenSolver<Mat> es(risbc::hermitize(m),
                                          Eigen::EigenvaluesOnly);
    Real acc = 0;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
        acc += std::log2(es.eigenvalues()(i));
    return acc;
}

// Literal transcription of the per-user DPC rate quotient, via LU
// determinants.
inline VecR<Real> bc_rates_transcription(const risbc::CompositeChannels<Real>& h,
                                         const risbc::CovarianceSet<Real>& s,
                                         const std::vector<int>& pi) {
    const int k_users = h.users();
    VecR<Real> rates(k_users);
    for (int k = 0; k < k_users; ++k) {
        const int user = pi[static_cast<size_t>(k)];
        const auto& hu = h.h[static_cast<size_t>(user)];
        const int nu = static_cast<int>(hu.rows());
        Mat num = Mat::Identity(nu, nu), den = Mat::Identity(nu, nu);
        for (int j = 0; j < k_users; ++j) {
            const Mat term =
                hu * s.s[static_cast<size_t>(pi[static_cast<size_t>(j)])] * hu.adjoint();
            if (j >= k) num += term;
            if (j > k) den += term;
        }
        rates(user) = std::log2(std::abs(num.determinant())) -
                      std::log2(std::abs(den.determinant()));
    }
    return rates;
}

// ---------------------------------------------------------------------------
// finite differences (natural-log objective)

inline Real f_nats_at_theta(const risbc::ChannelSet<Real>& cs, const Vec& theta,
                            const risbc::CovarianceSet<Real>& sbar) {
    risbc::PhaseVector<Real> t{theta};
    return risbc::mac_sum_rate_nats(risbc::composite_channel(cs, t), sbar);
}

// Central difference of f along a complex direction v at theta.
inline Real fd_theta_directional(const risbc::ChannelSet<Real>& cs, const Vec& theta,
                                 const risbc::CovarianceSet<Real>& sbar, const Vec& v,
                                 Real h = 1e-5) {
    return (f_nats_at_theta(cs, theta + h * v, sbar) -
            f_nats_at_theta(cs, theta - h * v, sbar)) /
           (2 * h);
}

// Central difference of f along a Hermitian direction on user k.
inline Real fd_covariance_directional(const risbc::CompositeChannels<Real>& h,
                                      const risbc::CovarianceSet<Real>& sbar, int k,
                                      const Mat& dir, Real step = 1e-5) {
    auto shift = [&](Real s) {
        risbc::CovarianceSet<Real> c = sbar;
        c.s[static_cast<size_t>(k)] += s * dir;
        return risbc::mac_sum_rate_nats(h, c);
    };
    return (shift(step) - shift(-step)) / (2 * step);
}

// Central difference of the Lagrangian along a Hermitian direction.
inline Real fd_lagrangian_directional(Real mu, const risbc::CompositeChannels<Real>& h,
                                      const risbc::CovarianceSet<Real>& sbar, int k,
                                      const Mat& dir, Real power, Real step = 1e-5) {
    auto shift = [&](Real s) {
        risbc::CovarianceSet<Real> c = sbar;
        c.s[static_cast<size_t>(k)] += s * dir;
        return risbc::lagrangian(mu, c, h, power);
    };
    return (shift(step) - shift(-step)) / (2 * step);
}

// ---------------------------------------------------------------------------
// sort-based projection of eigenvalues onto {w >= 0, sum w <= P}
// (threshold form of the exact simplex projection; independent of the
// library's bisection).

inline std::vector<Real> simplex_clip_sorted(std::vector<Real> v, Real budget) {
    Real clipped = 0;
    for (Real x : v) clipped += std::max(x, 0.0);
    if (clipped <= budget) {
        for (auto& x : v) x = std::max(x, 0.0);
        return v;
    }
    std::vector<Real> s = v;
    std::sort(s.begin(), s.end(), std::greater<>());
    Real cum = 0, eta = 0;
    for (size_t i = 0; i < s.size(); ++i) {
        cum += s[i];
        const Real cand = (cum - budget) / Real(i + 1);
        if (cand < s[i]) eta = cand;
    }
    for (auto& x : v) x = std::max(x - eta, 0.0);
    return v;
}

// ---------------------------------------------------------------------------
// Hermitian parameterization shared by the barrier-Newton oracles

struct HermitianBasis {
    int n = 0;
    std::vector<Mat> e; // n^2 Hermitian basis matrices

    explicit HermitianBasis(int dim) : n(dim) {
        for (int i = 0; i < n; ++i) {
            Mat b = Mat::Zero(n, n);
            b(i, i) = 1;
            e.push_back(b);
        }
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) {
                Mat re = Mat::Zero(n, n);
                re(i, j) = 1;
                re(j, i) = 1;
                e.push_back(re);
                Mat im = Mat::Zero(n, n);
                im(i, j) = Cx(0, 1);
                im(j, i) = Cx(0, -1);
                e.push_back(im);
            }
    }

    int dim() const { return n * n; }

    Mat assemble(const Eigen::VectorXd& x, int offset) const {
        Mat m = Mat::Zero(n, n);
        for (int i = 0; i < dim(); ++i) m += x(offset + i) * e[static_cast<size_t>(i)];
        return m;
    }
};

// Barrier-Newton solve of the PSD-projection QP:
//   minimize ||Y - X||_F^2  subject to  Y >= 0.
inline Mat psd_projection_qp(const Mat& x, int newton_iters = 60) {
    const int n = static_cast<int>(x.rows());
    HermitianBasis basis(n);
    const int d = basis.dim();

    // start strictly inside the cone
    Eigen::VectorXd p = Eigen::VectorXd::Zero(d);
    {
        const Mat y0 = Mat::Identity(n, n) * (1.0 + x.norm());
        // coordinates of y0: diagonal entries only
        for (int i = 0; i < n; ++i) p(i) = std::real(y0(i, i));
    }

    for (double t = 1.0; t <= 1e12; t *= 8.0) {
        for (int it = 0; it < newton_iters; ++it) {
            const Mat y = basis.assemble(p, 0);
            Eigen::LLT<Mat> llt(y);
            if (llt.info() != Eigen::Success) throw std::runtime_error("qp oracle: left cone");
            Eigen::VectorXd grad(d);
            Eigen::MatrixXd hess(d, d);
            std::vector<Mat> yinv_e(static_cast<size_t>(d));
            for (int i = 0; i < d; ++i)
                yinv_e[static_cast<size_t>(i)] = llt.solve(basis.e[static_cast<size_t>(i)]);
            for (int i = 0; i < d; ++i) {
                grad(i) = 2.0 * t *
                              std::real(((y - x) * basis.e[static_cast<size_t>(i)]).trace()) -
                          std::real(yinv_e[static_cast<size_t>(i)].trace());
                for (int j = 0; j <= i; ++j) {
                    const double hij =
                        2.0 * t *
                            std::real((basis.e[static_cast<size_t>(i)] *
                                       basis.e[static_cast<size_t>(j)])
                                          .trace()) +
                        std::real((yinv_e[static_cast<size_t>(i)] *
                                   yinv_e[static_cast<size_t>(j)])
                                      .trace());
                    hess(i, j) = hij;
                    hess(j, i) = hij;
                }
            }
            const Eigen::VectorXd step = hess.ldlt().solve(grad);
            // backtrack to stay strictly inside the cone
            double alpha = 1.0;
            while (alpha > 1e-16) {
                const Mat y_try = basis.assemble(p - alpha * step, 0);
                Eigen::LLT<Mat> try_llt(y_try);
                if (try_llt.info() == Eigen::Success) break;
                alpha /= 2.0;
            }
            p -= alpha * step;
            if (step.norm() * alpha < 1e-14) break;
        }
    }
    return basis.assemble(p, 0);
}

// Barrier-Newton solve of the fixed-theta convex problem:
//   maximize ln det(I + sum_k H_k^H S_k H_k)
//   subject to S_k >= 0, sum_k tr(S_k) <= P.
inline risbc::CovarianceSet<Real> convex_mac_oracle(const risbc::CompositeChannels<Real>& h,
                                                    Real power, int newton_iters = 80) {
    const int k_users = h.users();
    const int nt = h.nt();
    std::vector<HermitianBasis> basis;
    std::vector<int> offset;
    int d = 0;
    for (int k = 0; k < k_users; ++k) {
        basis.emplace_back(h.n_of(k));
        offset.push_back(d);
        d += basis.back().dim();
    }

    // objective basis images: A_{k,i} = H_k^H E_i H_k
    std::vector<std::vector<Mat>> img(static_cast<size_t>(k_users));
    for (int k = 0; k < k_users; ++k) {
        const auto& hk = h.h[static_cast<size_t>(k)];
        for (const auto& e : basis[static_cast<size_t>(k)].e)
            img[static_cast<size_t>(k)].push_back(hk.adjoint() * e * hk);
    }

    Eigen::VectorXd p = Eigen::VectorXd::Zero(d);
    for (int k = 0; k < k_users; ++k) {
        const int nk = h.n_of(k);
        for (int i = 0; i < nk; ++i)
            p(offset[static_cast<size_t>(k)] + i) = power / (2.0 * k_users * nk);
    }

    auto assemble_all = [&](const Eigen::VectorXd& x) {
        std::vector<Mat> s(static_cast<size_t>(k_users));
        for (int k = 0; k < k_users; ++k)
            s[static_cast<size_t>(k)] =
                basis[static_cast<size_t>(k)].assemble(x, offset[static_cast<size_t>(k)]);
        return s;
    };
    auto trace_sum = [&](const std::vector<Mat>& s) {
        Real tr = 0;
        for (const auto& m : s) tr += std::real(m.trace());
        return tr;
    };
    auto feasible = [&](const std::vector<Mat>& s) {
        if (trace_sum(s) >= power) return false;
        for (const auto& m : s)
            if (Eigen::LLT<Mat>(m).info() != Eigen::Success) return false;
        return true;
    };

    for (double t = 1.0; t <= 4e10; t *= 8.0) {
        for (int it = 0; it < newton_iters; ++it) {
            const auto s = assemble_all(p);
            Mat big = Mat::Identity(nt, nt);
            for (int k = 0; k < k_users; ++k)
                big += h.h[static_cast<size_t>(k)].adjoint() * s[static_cast<size_t>(k)] *
                       h.h[static_cast<size_t>(k)];
            Eigen::LLT<Mat> big_llt(risbc::hermitize(big));
            const Real slack = power - trace_sum(s);

            Eigen::VectorXd grad = Eigen::VectorXd::Zero(d);
            Eigen::MatrixXd hess = Eigen::MatrixXd::Zero(d, d);

            // t * lndet(big): gradients through big^{-1}
            std::vector<Mat> big_inv_img(static_cast<size_t>(d));
            std::vector<double> tr_vec(static_cast<size_t>(d));
            for (int k = 0; k < k_users; ++k) {
                const auto& bk = basis[static_cast<size_t>(k)];
                for (int i = 0; i < bk.dim(); ++i) {
                    const int gi = offset[static_cast<size_t>(k)] + i;
                    big_inv_img[static_cast<size_t>(gi)] =
                        big_llt.solve(img[static_cast<size_t>(k)][static_cast<size_t>(i)]);
                    grad(gi) += t * std::real(big_inv_img[static_cast<size_t>(gi)].trace());
                    tr_vec[static_cast<size_t>(gi)] =
                        std::real(bk.e[static_cast<size_t>(i)].trace());
                }
            }
            for (int i = 0; i < d; ++i)
                for (int j = 0; j <= i; ++j) {
                    const double hij = -t * std::real((big_inv_img[static_cast<size_t>(i)] *
                                                       big_inv_img[static_cast<size_t>(j)])
                                                          .trace());
                    hess(i, j) += hij;
                    if (i != j) hess(j, i) += hij;
                }

            // + lndet(S_k) barriers
            for (int k = 0; k < k_users; ++k) {
                const auto& bk = basis[static_cast<size_t>(k)];
                Eigen::LLT<Mat> llt(s[static_cast<size_t>(k)]);
                std::vector<Mat> sinv_e(static_cast<size_t>(bk.dim()));
                for (int i = 0; i < bk.dim(); ++i)
                    sinv_e[static_cast<size_t>(i)] = llt.solve(bk.e[static_cast<size_t>(i)]);
                for (int i = 0; i < bk.dim(); ++i) {
                    const int gi = offset[static_cast<size_t>(k)] + i;
                    grad(gi) += std::real(sinv_e[static_cast<size_t>(i)].trace());
                    for (int j = 0; j <= i; ++j) {
                        const int gj = offset[static_cast<size_t>(k)] + j;
                        const double hij = -std::real((sinv_e[static_cast<size_t>(i)] *
                                                       sinv_e[static_cast<size_t>(j)])
                                                          .trace());
                        hess(gi, gj) += hij;
                        if (gi != gj) hess(gj, gi) += hij;
                    }
                }
            }

            // + ln(P - sum tr)
            for (int i = 0; i < d; ++i) grad(i) -= tr_vec[static_cast<size_t>(i)] / slack;
            for (int i = 0; i < d; ++i)
                for (int j = 0; j < d; ++j)
                    hess(i, j) -= tr_vec[static_cast<size_t>(i)] *
                                  tr_vec[static_cast<size_t>(j)] / (slack * slack);

            const Eigen::VectorXd step = (-hess).ldlt().solve(grad); // ascent on concave
            double alpha = 1.0;
            while (alpha > 1e-16 && !feasible(assemble_all(p + alpha * step))) alpha /= 2.0;
            if (alpha <= 1e-16) break;
            p += alpha * step;
            if (step.norm() * alpha < 1e-13) break;
        }
    }

    return risbc::CovarianceSet<Real>(risbc::CovDomain::mac, assemble_all(p));
}

} // namespace oracles

#endif
