#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "langevin/analytic.hpp"
#include "langevin/skeleton.hpp"
#include "langevin/stats.hpp"

using namespace langevin;

namespace {
const ModelParams kP = ModelParams::from_c(0.09016994374947428);
}

TEST_CASE("speed sampler matches the exact marginal") {
    RngStream rng(700);
    std::vector<double> v(20000);
    for (double& x : v) {
        x = sample_v(rng);
        REQUIRE(x > 0.0);
    }
    CHECK(ks_test(v, v_marginal_cdf).p_value > 0.01);
}

TEST_CASE("tilted speed sampler matches the tilted marginal") {
    RngStream rng(701);
    std::vector<double> v(20000);
    for (double& x : v) x = sample_tilted_v(rng, kP);
    const double two_k = 2.0 * kP.k;
    auto pdf = [&](double x) { return std::pow(x, two_k) * v_marginal_pdf(x); };
    const double norm = detail::integrate(pdf, 0.0, 1.0) + detail::integrate_to_inf(pdf, 1.0);
    auto cdf = [&](double x) {
        if (x <= 0.0) return 0.0;
        if (x <= 1.0) return detail::integrate(pdf, 0.0, x) / norm;
        return (norm - detail::integrate([&](double w) { return pdf(1.0 / w) / (w * w); },
                                         1e-12, 1.0 / x)) /
               norm;
    };
    CHECK(ks_test(v, cdf).p_value > 0.01);
}

TEST_CASE("conditional bounce-time sampler matches the joint density") {
    RngStream rng(702);
    const double v = 1.0;
    std::vector<double> t(5000);
    for (double& x : t) {
        x = sample_t_given_v(rng, v);
        REQUIRE(x > 0.0);
    }
    const double norm = v_marginal_pdf(v);
    auto cdf = [&](double s) {
        if (s <= 0.0) return 0.0;
        return detail::integrate([&](double q) { return mckean_joint_pdf(q, v); }, 0.0,
                                 s) /
               norm;
    };
    CHECK(ks_test(t, cdf).p_value > 0.01);
    CHECK_THROWS_AS(sample_t_given_v(rng, -1.0), std::invalid_argument);
}

TEST_CASE("step moments: drift, tilted drift, and the unit 2k-moment") {
    RngStream rng(703);
    const std::size_t n = 200000;
    std::vector<double> log_rho(n), log_rho_tilted(n), pow_rho(n), tilt_identity(n);
    for (std::size_t i = 0; i < n; ++i) {
        const SkeletonStep s = sample_step(rng, kP);
        const SkeletonStep st = sample_tilted_step(rng, kP);
        log_rho[i] = std::log(s.rho);
        log_rho_tilted[i] = std::log(st.rho);
        pow_rho[i] = std::pow(s.rho, 2.0 * kP.k);
        // tilt inversion: reweighting the tilted draw by rho^{-2k} recovers
        // the killed expectation of any bounded statistic; use 1/(1+rho)
        tilt_identity[i] = std::pow(st.rho, -2.0 * kP.k) / (1.0 + st.rho);
    }
    auto [m1, se1] = mean_stderr(log_rho);
    CHECK(std::abs(m1 - kP.drift) <= 3.0 * se1);
    auto [m2, se2] = mean_stderr(log_rho_tilted);
    CHECK(std::abs(m2 - kP.mu_up) <= 3.0 * se2);
    const double mom = median_of_means(pow_rho, 32);
    CHECK(std::abs(mom - 1.0) <= 3.0 * median_of_means_stderr(pow_rho, 32));

    auto killed_ref = [&](double rho) { return 1.0 / (1.0 + rho); };
    std::vector<double> direct(n);
    RngStream rng2(704);
    for (double& x : direct) x = killed_ref(sample_step(rng2, kP).rho);
    auto [mi, sei] = mean_stderr(tilt_identity);
    auto [md, sed] = mean_stderr(direct);
    CHECK(std::abs(mi - md) <= 3.0 * std::sqrt(sei * sei + sed * sed));
}

TEST_CASE("killed chain invariants and determinism") {
    ChainConfig cfg;
    RngStream rng(705, 9);
    const BounceChain chain = simulate_chain(rng, 1.0, kP, cfg);
    REQUIRE(chain.times.size() == chain.speeds.size());
    REQUIRE(chain.times.size() >= 2);
    CHECK(chain.times.front() == 0.0);
    CHECK(chain.speeds.front() == 1.0);
    for (std::size_t i = 1; i < chain.times.size(); ++i) {
        // late increments can drop below one ulp of a large running time
        CHECK(chain.times[i] >= chain.times[i - 1]);
        CHECK(chain.speeds[i] > 0.0);
    }
    CHECK(chain.zeta == chain.times.back());
    CHECK_FALSE(chain.capped);
    CHECK(chain.truncated_weight < cfg.truncation_epsilon);
    const double last = chain.speeds.back();
    CHECK(last * last == Catch::Approx(chain.truncated_weight).epsilon(1e-12));

    RngStream rng2(705, 9);
    const BounceChain again = simulate_chain(rng2, 1.0, kP, cfg);
    CHECK(again.zeta == chain.zeta);
    CHECK(again.times == chain.times);
}

TEST_CASE("chain config validation and the bounce cap") {
    ChainConfig bad;
    bad.truncation_epsilon = 0.0;
    RngStream rng(706);
    CHECK_THROWS_AS(simulate_chain(rng, 1.0, kP, bad), std::invalid_argument);
    bad.truncation_epsilon = 1.5;
    CHECK_THROWS_AS(simulate_chain(rng, 1.0, kP, bad), std::invalid_argument);
    CHECK_THROWS_AS(simulate_chain(rng, -1.0, kP, ChainConfig{}), std::invalid_argument);

    ChainConfig capped;
    capped.max_bounces = 3;
    const BounceChain chain = simulate_chain(rng, 1.0, kP, capped);
    if (chain.truncated_weight >= capped.truncation_epsilon) {
        CHECK(chain.capped);
        CHECK(chain.times.size() == 4);
    }
}

TEST_CASE("near-degenerate truncation stops at the first contracting bounce") {
    ChainConfig cfg;
    cfg.truncation_epsilon = 1.0 - 1e-12;
    RngStream rng(707);
    for (int i = 0; i < 200; ++i) {
        const BounceChain chain = simulate_chain(rng, 1.0, kP, cfg);
        // every bounce but the last must have kept the weight above the
        // threshold
        for (std::size_t j = 1; j + 1 < chain.speeds.size(); ++j)
            CHECK(chain.speeds[j] * chain.speeds[j] >= cfg.truncation_epsilon);
    }
}

TEST_CASE("absorption time scales like u0 squared") {
    ChainConfig cfg;
    const std::size_t n = 5000;
    std::vector<double> z1(n), z9(n);
    for (std::size_t i = 0; i < n; ++i) {
        RngStream a(708, i), b(709, i);
        z1[i] = simulate_chain(a, 1.0, kP, cfg).zeta;
        z9[i] = simulate_chain(b, 3.0, kP, cfg).zeta / 9.0;
    }
    CHECK(ks_test_2sample(z1, z9).p_value > 0.01);
}

TEST_CASE("perpetuity weight is a martingale along the chain") {
    // E[(V_n / u0)^{2k}] = 1 for each fixed n
    const std::size_t n = 100000;
    for (int steps : {1, 2, 3}) {
        std::vector<double> w(n);
        for (std::size_t i = 0; i < n; ++i) {
            RngStream rng(710 + steps, i);
            double rho = 1.0;
            for (int s = 0; s < steps; ++s) rho *= sample_step(rng, kP).rho;
            w[i] = std::pow(rho, 2.0 * kP.k);
        }
        const double m = median_of_means(w, 32);
        const double se = median_of_means_stderr(w, 32);
        CHECK(std::abs(m - 1.0) <= 3.5 * se);
    }
}

TEST_CASE("tilted chain grows and never absorbs") {
    // physical time grows like exp(2 mu_up n); 300 bounces stay within
    // double range, 400 would overflow
    ChainConfig cfg;
    cfg.max_bounces = 300;
    RngStream rng(712);
    const BounceChain chain = simulate_tilted_chain(rng, 1.0, kP, cfg);
    CHECK_FALSE(chain.capped);
    CHECK(chain.times.size() == 301);
    // positive tilted drift: the log speed after 300 bounces sits near 300 mu_up
    const double lv = std::log(chain.speeds.back());
    CHECK(lv > 300.0 * kP.mu_up * 0.5);
    CHECK(lv < 300.0 * kP.mu_up * 1.5);

    RngStream rng2(713);
    const BounceChain horizoned = simulate_tilted_chain(rng2, 1.0, kP, cfg, 1e6);
    CHECK(horizoned.zeta >= 1e6);
}

TEST_CASE("Goldie constant estimate is consistent with its ingredients") {
    RngStream rng(714);
    const C1Estimate c1 = estimate_C1(kP, 20000, rng);
    CHECK(c1.value > 0.8);
    CHECK(c1.value < 1.5);
    CHECK(c1.stderr_ > 0.0);
    RngStream rng2(714);
    CHECK(estimate_C1(kP, 20000, rng2).value == c1.value);
    CHECK_THROWS_AS(estimate_C1(kP, 10, rng), std::invalid_argument);

    // denominator identity: E[rho^{2k} ln rho^2] = 2 mu_up (tilt of the
    // unit-mean weight)
    std::vector<double> terms(200000);
    RngStream rng3(715);
    for (double& x : terms) {
        const double rho = sample_step(rng3, kP).rho;
        x = std::pow(rho, 2.0 * kP.k) * 2.0 * std::log(rho);
    }
    const double m = median_of_means(terms, 32);
    CHECK(std::abs(m - 2.0 * kP.mu_up) <= 4.0 * median_of_means_stderr(terms, 32));
}

TEST_CASE("stationary start wiring") {
    ChainConfig cfg;
    cfg.max_bounces = 10;
    RngStream rng(716);
    const double gate = 0.5;
    const BounceChain chain = sample_stationary_start(
        rng, gate, kP, cfg, [](RngStream& r) { return r.exponential(); });
    CHECK(chain.speeds.front() >= gate);

    RngStream rng2(717);
    const BounceChain degenerate = sample_stationary_start(
        rng2, gate, kP, cfg, [](RngStream&) { return 0.0; });
    CHECK(degenerate.speeds.front() == gate);
    CHECK_THROWS_AS(sample_stationary_start(rng, -1.0, kP, cfg,
                                            [](RngStream&) { return 0.0; }),
                    std::invalid_argument);
}
