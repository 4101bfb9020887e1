#include <doctest.h>

#include "oracles.hpp"

using namespace risbc;
using oracles::Mat;
using Real = double;

namespace {

SystemConfig<Real> small_config() {
    SystemConfig<Real> c;
    c.nt = 4;
    c.set_uniform_users(2, 2);
    c.ns = 1;
    c.nris = 8;
    return c;
}

Instance<Real> small_instance(std::uint64_t seed, const SystemConfig<Real>& c,
                              Real blockage_keep = 1.0) {
    SeededRng geo(seed, derive_stream(0, RngPurpose::geometry));
    SeededRng chan(seed, derive_stream(0, RngPurpose::channels));
    SeededRng init(seed, derive_stream(0, RngPurpose::init));
    auto place = PlacementSpec<Real>::single_ris();
    place.ris.resize(static_cast<size_t>(c.ns),
                     typename PlacementSpec<Real>::Vec3(30, 0, 5));
    auto g = build_geometry(c, place, geo);
    auto cs = sample_channels(c, g, chan);
    if (blockage_keep < 1.0) {
        SeededRng block(seed, derive_stream(0, RngPurpose::blockage));
        cs = apply_blockage(cs, blockage_keep, block);
    }
    return make_instance(std::move(cs), c.power, init);
}

bool trace_monotone(const RunTrace<Real>& t, Real slack = 1e-9) {
    Real prev = t.initial_bits;
    for (const auto& row : t.rows) {
        if (row.objective_bits < prev - slack) return false;
        prev = row.objective_bits;
    }
    return true;
}

} // namespace

TEST_CASE("stopping check") {
    RunTrace<Real> t;
    t.initial_bits = 1.0;
    SUBCASE("constant objective stops after the first full outer iteration") {
        t.rows.push_back({1, SubIterKind::covariance, 1.0, 0, 0, 0, 0, 0});
        t.rows.push_back({1, SubIterKind::phase, 1.0, 0, 0, 0, 0, 0});
        CHECK(stopping_check(t, 1e-5, 30) == StopDecision::converged);
    }
    SUBCASE("tol = 0 runs to max_outer") {
        t.rows.push_back({1, SubIterKind::covariance, 2.0, 0, 0, 0, 0, 0});
        t.rows.push_back({1, SubIterKind::phase, 2.5, 0, 0, 0, 0, 0});
        CHECK(stopping_check(t, 0.0, 30) == StopDecision::keep_going);
        t.rows.push_back({30, SubIterKind::covariance, 3.0, 0, 0, 0, 0, 0});
        t.rows.push_back({30, SubIterKind::phase, 3.5, 0, 0, 0, 0, 0});
        CHECK(stopping_check(t, 0.0, 30) == StopDecision::max_outer_reached);
    }
    SUBCASE("gain sequence {0.1, 1e-7} with tol 1e-5 stops at outer 2") {
        t.rows.push_back({1, SubIterKind::phase, 1.1, 0, 0, 0, 0, 0});
        CHECK(stopping_check(t, 1e-5, 30) == StopDecision::keep_going);
        t.rows.push_back({2, SubIterKind::phase, 1.1 + 1e-7, 0, 0, 0, 0, 0});
        CHECK(stopping_check(t, 1e-5, 30) == StopDecision::converged);
    }
    SUBCASE("empty trace is rejected") {
        CHECK_THROWS_AS(stopping_check(t, 1e-5, 30), SpecError);
    }
}

TEST_CASE("covariance gradient step") {
    SeededRng rng(60, 0);

    SUBCASE("zero channels are a fixed point") {
        CompositeChannels<Real> h;
        h.h = {Mat::Zero(2, 3), Mat::Zero(2, 3)};
        auto sbar = oracles::random_covariances(rng, {2, 2}, 0.5);
        SurrogateParams<Real> p{1e4, 0.5};
        const auto res = covariance_gradient_step(sbar, h, 1.0, p);
        CHECK(res.line_search_steps == 0);
        CHECK((res.sbar.s[0] - sbar.s[0]).norm() == 0.0);
    }
    SUBCASE("accepted steps never decrease the objective") {
        auto cs = oracles::random_channels(rng, 3, {2, 2}, 1, 4);
        const auto h = composite_channel(cs, PhaseVector<Real>::ones(4));
        auto sbar = CovarianceSet<Real>::uniform_mac({2, 2}, 1.0);
        SurrogateParams<Real> p{1e4, 0.5};
        Real prev = mac_sum_rate_nats(h, sbar);
        for (int i = 0; i < 30; ++i) {
            const auto res = covariance_gradient_step(sbar, h, 1.0, p);
            CHECK(res.objective_nats >= prev - 1e-10);
            prev = res.objective_nats;
            sbar = res.sbar;
        }
        sbar.validate(1.0);
    }
    SUBCASE("single-user scalar instance reaches the water-filling optimum") {
        CompositeChannels<Real> h;
        h.h = {(Mat(1, 1) << oracles::Cx(1.3, -0.4)).finished()};
        CovarianceSet<Real> sbar(CovDomain::mac, {Mat::Zero(1, 1)});
        SurrogateParams<Real> p{1e4, 0.5};
        const Real power = 1.0;
        int steps = 0;
        for (; steps < 200; ++steps) {
            const auto res = covariance_gradient_step(sbar, h, power, p);
            sbar = res.sbar;
            if (std::abs(std::real(sbar.s[0](0, 0)) - power) <= 1e-6) break;
        }
        CHECK(std::abs(std::real(sbar.s[0](0, 0)) - power) <= 1e-6);
        CHECK(steps < 200);
    }
}

TEST_CASE("AO driver") {
    auto c = small_config();

    SUBCASE("without an RIS path it reduces to the covariance solver") {
        auto c2 = c;
        c2.ns = 0;
        c2.nris = 0;
        auto inst = small_instance(7, c2);
        DriverOptions<Real> opts;
        const auto trace = run_ao(inst, opts);
        CHECK(trace_monotone(trace));
        // phase rows change nothing
        for (size_t i = 1; i < trace.rows.size(); i += 2)
            CHECK(trace.rows[i].objective_bits ==
                  doctest::Approx(trace.rows[i - 1].objective_bits).epsilon(1e-14));
        // final value equals a direct dual decomposition at theta0
        const auto h = composite_channel(inst.channels, inst.theta0);
        const auto dd = dual_decomposition(h, inst.power, opts.dual_epsilon, inst.sbar0);
        CHECK(trace.final_bits() ==
              doctest::Approx(mac_sum_rate(h, dd.sbar)).epsilon(1e-9));
    }
    SUBCASE("monotone trace and convergence flag") {
        for (std::uint64_t seed = 1; seed <= 5; ++seed) {
            auto inst = small_instance(seed, c);
            const auto trace = run_ao(inst);
            CHECK(trace_monotone(trace));
            CHECK(trace.rows.size() >= 2);
            CHECK(trace.rows.back().outer <= 30);
        }
    }
    SUBCASE("infeasible initialization is rejected") {
        auto inst = small_instance(3, c);
        inst.sbar0.s[0] *= 100.0; // blows the power budget
        CHECK_THROWS_AS(run_ao(inst), NumericalError);
    }
}

TEST_CASE("approximate AO and APGM drivers") {
    auto c = small_config();

    SUBCASE("monotone traces") {
        for (std::uint64_t seed = 1; seed <= 5; ++seed) {
            auto inst = small_instance(seed, c);
            CHECK(trace_monotone(run_approx_ao(inst)));
            CHECK(trace_monotone(run_apgm(inst)));
        }
    }
    SUBCASE("zero instance converges immediately") {
        auto inst = small_instance(2, c);
        for (auto& d : inst.channels.d) d.setZero();
        for (auto& g : inst.channels.g) g.setZero();
        inst.channels.u.setZero();
        const auto trace = run_apgm(inst);
        CHECK(trace.converged);
        CHECK(trace.rows.back().outer == 1);
        CHECK(trace.final_bits() == 0.0);
    }
    SUBCASE("the three drivers agree on the final rate") {
        for (std::uint64_t seed = 1; seed <= 3; ++seed) {
            auto inst = small_instance(seed, c);
            const Real a = run_ao(inst).final_bits();
            const Real b = run_approx_ao(inst).final_bits();
            const Real d = run_apgm(inst).final_bits();
            CHECK(std::abs(b - a) <= 0.02 * a);
            CHECK(std::abs(d - a) <= 0.02 * a);
        }
    }
    SUBCASE("identical seed and config reproduce the trace bitwise") {
        auto inst = small_instance(4, c);
        for (auto algo : {Algo::ao, Algo::approx_ao, Algo::apgm}) {
            const auto t1 = run_algorithm(algo, inst);
            const auto t2 = run_algorithm(algo, inst);
            REQUIRE(t1.rows.size() == t2.rows.size());
            for (size_t i = 0; i < t1.rows.size(); ++i)
                CHECK(t1.rows[i].objective_bits == t2.rows[i].objective_bits);
        }
    }
}

TEST_CASE("imperfect CSI never beats perfect CSI") {
    auto c = small_config();
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
        SeededRng geo(seed, derive_stream(0, RngPurpose::geometry));
        SeededRng chan(seed, derive_stream(0, RngPurpose::channels));
        SeededRng err(seed, derive_stream(0, RngPurpose::csi_error));
        SeededRng init(seed, derive_stream(0, RngPurpose::init));
        auto g = build_geometry(c, PlacementSpec<Real>::single_ris(), geo);
        auto truth = sample_channels(c, g, chan);
        auto estimated = apply_csi_error(truth, 0.5, err);

        auto inst_est = make_instance(estimated, c.power, init);
        DriverOptions<Real> opts;
        opts.eval_channels = &truth;
        const auto est_trace = run_apgm(inst_est, opts);
        const Real achieved = est_trace.rows.back().eval_bits;
        CHECK(std::isfinite(achieved));

        Instance<Real> inst_true;
        inst_true.channels = truth;
        inst_true.power = c.power;
        inst_true.theta0 = inst_est.theta0;
        inst_true.sbar0 = inst_est.sbar0;
        const Real ideal = run_apgm(inst_true).final_bits();
        CHECK(achieved <= ideal + 1e-3);
    }
}

TEST_CASE("complexity prediction") {
    // spot values from the reference complexity table (N_t=8, N_r=2,
    // N_ris=225, N_s=1)
    ComplexityParams p;
    p.nt = 8;
    p.nr = 2;
    p.ns = 1;
    p.nris = 225;

    p.k = 2;
    p.t = 24;
    p.i = 3;
    CHECK(predict_complexity(Algo::ao, p) == 211392);
    p.k = 2;
    p.i_s = 4;
    p.i_theta = 1;
    CHECK(predict_complexity(Algo::apgm, p) == 10592);
    p.k = 6;
    p.t = 23;
    p.i = 8;
    p.i_theta = 1;
    CHECK(predict_complexity(Algo::approx_ao, p) == 207072);
    p.k = 12;
    p.t = 27;
    p.i = 14;
    CHECK(predict_complexity(Algo::ao, p) == 1309248);
    p.k = 12;
    p.i_s = 3;
    p.i_theta = 2;
    CHECK(predict_complexity(Algo::apgm, p) == 95424);

    ComplexityParams bad;
    CHECK_THROWS_AS(predict_complexity(Algo::ao, bad), SpecError);
}
