#pragma once

/// The acceptance checks behind `verify`: each criterion runs a
/// self-contained experiment and reports measured values, the tolerance it
/// was held to, and a pass flag. The quick suite shrinks sample sizes (and
/// with them statistical power); tolerances stay fixed.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "langevin/analytic.hpp"
#include "langevin/ladder.hpp"
#include "langevin/path.hpp"
#include "langevin/rng.hpp"
#include "langevin/skeleton.hpp"
#include "langevin/stats.hpp"
#include "langevin/util.hpp"

namespace langevin {

struct CriterionMetric {
    std::string name;
    double value;
};

struct CriterionResult {
    int id = 0;
    std::string name;
    std::string statement;  ///< the identity or bound being checked
    std::vector<CriterionMetric> metrics;
    std::string tolerance;
    bool pass = false;
};

struct VerifySettings {
    ModelParams params;
    std::uint64_t seed = 1;
    bool quick = false;
    unsigned threads = 1;

    /// k_override breaks the internal consistency on purpose (the samplers
    /// keep the true law of c, the analytics use the injected k); used by
    /// the negative-control tests.
    static VerifySettings make(double c, std::uint64_t seed, bool quick, unsigned threads,
                               double k_override = -1.0) {
        VerifySettings s;
        s.params = ModelParams::from_c(c);
        if (k_override > 0.0) {
            s.params.k = k_override;
            s.params.mu_up = std::log(c) +
                             kPi / 3.0 * std::tan((2.0 * k_override + 1.0) / 3.0 * kPi);
            s.params.theta = std::exp(2.0 * k_override);
        }
        s.seed = seed;
        s.quick = quick;
        s.threads = std::max(1u, threads);
        return s;
    }
};

namespace detail {

inline std::uint64_t stream_id(int criterion, std::uint64_t item) {
    return (static_cast<std::uint64_t>(criterion) << 40) + item;
}

}  // namespace detail

/// 1. Exponent solver: moment residual, inverse-map round trip, and strict
/// monotonicity of k(c).
inline CriterionResult criterion_k_solver(const VerifySettings& s) {
    CriterionResult r{1, "k_solver",
                      "E[V1^{2k}] = 1 at k = k_of_c(c); c_of_k inverts it; k(c) decreasing"};
    const double c_cr = critical_elasticity();
    double max_residual = 0.0;
    const auto curve = kc_curve(0.01, c_cr - 1e-4, 50);
    bool decreasing = true;
    for (std::size_t i = 0; i < curve.size(); ++i) {
        max_residual =
            std::max(max_residual, std::abs(v_moment(curve[i].first, 2.0 * curve[i].second) - 1.0));
        if (i > 0 && curve[i].second >= curve[i - 1].second) decreasing = false;
    }
    double max_roundtrip = 0.0;
    for (double k : {0.02, 0.1, 0.2, 0.24})
        max_roundtrip = std::max(max_roundtrip, std::abs(k_of_c(c_of_k(k)) - k));
    r.metrics = {{"max_moment_residual", max_residual},
                 {"max_roundtrip_error", max_roundtrip},
                 {"curve_decreasing", decreasing ? 1.0 : 0.0}};
    r.tolerance = "residual < 1e-12; round trip < 1e-10; strictly decreasing";
    r.pass = max_residual < 1e-12 && max_roundtrip < 1e-10 && decreasing;
    return r;
}

/// 2. Moment identity E[(V1/u0)^{2k}] = 1 under the killed step law.
inline CriterionResult criterion_martingale(const VerifySettings& s) {
    CriterionResult r{2, "martingale_moment", "E[(V1/u0)^{2k}] = 1"};
    const std::size_t n = s.quick ? 100000 : 1000000;
    std::vector<double> vals(n);
    parallel_for(n, s.threads, [&](std::size_t i) {
        RngStream rng(s.seed, detail::stream_id(2, i));
        vals[i] = std::pow(s.params.c * sample_v(rng), 2.0 * s.params.k);
    });
    const double mom = median_of_means(vals, 32);
    const double se = median_of_means_stderr(vals, 32);
    r.metrics = {{"median_of_means", mom}, {"stderr", se}, {"n", static_cast<double>(n)}};
    r.tolerance = "|estimate - 1| <= 3 robust SE";
    r.pass = std::abs(mom - 1.0) <= 3.0 * se;
    return r;
}

/// 3. Absorption-time tail P(zeta > t) ~ C1 t^{-k}: log-log slope and Hill
/// agreement.
inline CriterionResult criterion_zeta_tail(const VerifySettings& s) {
    CriterionResult r{3, "zeta_tail", "P(zeta > t) ~ C1 t^{-k}"};
    const std::size_t n = s.quick ? 20000 : 100000;
    std::vector<double> zetas(n);
    ChainConfig cfg;
    parallel_for(n, s.threads, [&](std::size_t i) {
        RngStream rng(s.seed, detail::stream_id(3, i));
        zetas[i] = simulate_chain(rng, 1.0, s.params, cfg).zeta;
    });
    const TailFit fit = tail_exponent_loglog(zetas, 0.1, 0.001, 200, s.seed);
    const auto [hill, hill_se] = hill_estimator(zetas, 0.01);
    const double joint_se = std::sqrt(fit.stderr_ * fit.stderr_ + hill_se * hill_se);
    r.metrics = {{"loglog_exponent", fit.exponent}, {"loglog_stderr", fit.stderr_},
                 {"hill_exponent", hill},           {"hill_stderr", hill_se},
                 {"prefactor", fit.prefactor},      {"n", static_cast<double>(n)}};
    r.tolerance = "|exponent - k| <= 0.03; |exponent - hill| <= 2 joint SE";
    r.pass = std::abs(fit.exponent - s.params.k) <= 0.03 &&
             std::abs(fit.exponent - hill) <= 2.0 * joint_se;
    return r;
}

/// 4. First-bounce time tails: killed exponent 1/4, tilted exponent
/// 1/4 - k with the analytic prefactor.
inline CriterionResult criterion_t1_tails(const VerifySettings& s) {
    CriterionResult r{4, "t1_tails",
                      "killed P(T1 > t) ~ t^{-1/4}; tilted ~ c' t^{k-1/4}"};
    const std::size_t n = s.quick ? 20000 : 100000;
    std::vector<double> killed(n), tilted(n);
    parallel_for(n, s.threads, [&](std::size_t i) {
        RngStream rng(s.seed, detail::stream_id(4, i));
        killed[i] = sample_t_given_v(rng, sample_v(rng));
        tilted[i] = sample_t_given_v(rng, sample_tilted_v(rng, s.params));
    });
    const TailFit fk = tail_exponent_loglog(killed, 0.1, 0.001, 200, s.seed);
    const TailFit ft = tail_exponent_loglog(tilted, 0.1, 0.001, 200, s.seed + 1);
    const double cprime = t1_tail_const_up(s.params);
    const double prefactor_ratio = ft.prefactor / cprime;
    r.metrics = {{"killed_exponent", fk.exponent},
                 {"tilted_exponent", ft.exponent},
                 {"tilted_prefactor", ft.prefactor},
                 {"analytic_prefactor", cprime},
                 {"n", static_cast<double>(n)}};
    r.tolerance = "killed within 0.25 +- 0.03; tilted within (0.25 - k) +- 0.03; "
                  "prefactor ratio in [0.8, 1.25]";
    r.pass = std::abs(fk.exponent - 0.25) <= 0.03 &&
             std::abs(ft.exponent - (0.25 - s.params.k)) <= 0.03 &&
             prefactor_ratio >= 0.8 && prefactor_ratio <= 1.25;
    return r;
}

/// 5. Goldie constant consistency: the renewal-theoretic expression for C1
/// against the fitted prefactor of the zeta tail. Chains run with a deep
/// perpetuity truncation; the default threshold leaves a few percent of
/// tail mass on the table and biases both sides.
inline CriterionResult criterion_c1(const VerifySettings& s) {
    CriterionResult r{5, "c1_consistency",
                      "E[zeta^k - (zeta-T1)^k] / (2 k mu_up) matches the zeta tail prefactor"};
    const std::size_t n = s.quick ? 100000 : 1000000;
    ChainConfig cfg;
    cfg.truncation_epsilon = 1e-20;
    std::vector<double> terms(n), zetas(n);
    parallel_for(n, s.threads, [&](std::size_t i) {
        RngStream rng(s.seed, detail::stream_id(5, i));
        const BounceChain chain = simulate_chain(rng, 1.0, s.params, cfg);
        zetas[i] = chain.zeta;
        terms[i] = std::pow(chain.zeta, s.params.k) -
                   std::pow(chain.zeta - chain.times[1], s.params.k);
    });
    const double c1_renewal =
        median_of_means(terms, 32) / (2.0 * s.params.k * s.params.mu_up);
    const TailFit fit = tail_exponent_loglog(zetas, 0.1, 0.001, 200, s.seed);
    const double ratio = c1_renewal / fit.prefactor;
    r.metrics = {{"c1_renewal", c1_renewal},
                 {"c1_tail_prefactor", fit.prefactor},
                 {"ratio", ratio},
                 {"n", static_cast<double>(n)}};
    r.tolerance = "ratio within [0.85, 1.176] (15% agreement)";
    r.pass = ratio >= 0.85 && ratio <= 1.0 / 0.85;
    return r;
}

/// 6. Uniform bounce-speed bound: from any start, the first incoming speed
/// exceeds half the initial speed with probability at least 1 - sqrt(3)/pi.
inline CriterionResult criterion_harmonic_floor(const VerifySettings& s) {
    CriterionResult r{6, "harmonic_floor", "P_{x,u}(V1/c >= |u|/2) >= 1 - sqrt(3)/pi"};
    const std::size_t n = s.quick ? 1000 : 5000;
    PathConfig cfg;
    cfg.dt = s.quick ? 1e-3 : 1e-4;
    cfg.horizon = 1e12;
    cfg.adaptive_scaling = true;
    const double floor = 1.0 - std::sqrt(3.0) / kPi - 0.02;
    const double starts[3][2] = {{1.0, -1.0}, {0.5, 1.0}, {2.0, 0.1}};
    double worst = 1.0;
    for (int sidx = 0; sidx < 3; ++sidx) {
        const double x0 = starts[sidx][0], u0 = starts[sidx][1];
        std::vector<double> hit(n, 0.0);
        parallel_for(n, s.threads, [&](std::size_t i) {
            RngStream rng(s.seed, detail::stream_id(6, 10000 * sidx + i));
            const FirstBounce fb = first_bounce(rng, x0, u0, s.params, cfg);
            // censored runs count as misses
            hit[i] = (fb.hit && -fb.incoming >= 0.5 * std::abs(u0)) ? 1.0 : 0.0;
        });
        const double p = std::accumulate(hit.begin(), hit.end(), 0.0) / n;
        r.metrics.push_back({"p_start_" + std::to_string(sidx), p});
        worst = std::min(worst, p);
    }
    r.metrics.push_back({"floor", floor});
    r.metrics.push_back({"n_per_start", static_cast<double>(n)});
    r.tolerance = "every start >= 1 - sqrt(3)/pi - 0.02 (~0.4287)";
    r.pass = worst >= floor;
    return r;
}

/// 7. Discretization convergence of the first-bounce speed law toward the
/// exact marginal, across step sizes.
inline CriterionResult criterion_discretization(const VerifySettings& s) {
    CriterionResult r{7, "discretization",
                      "KS(first-bounce speed/c, exact marginal) shrinks with dt"};
    const std::size_t n = s.quick ? 8000 : 20000;
    const double dts[3] = {1e-2, 1e-3, 1e-4};
    double ks[3];
    for (int d = 0; d < 3; ++d) {
        PathConfig cfg;
        cfg.dt = dts[d];
        cfg.horizon = 1e12;
        cfg.adaptive_scaling = true;
        std::vector<double> speeds(n, -1.0);
        parallel_for(n, s.threads, [&](std::size_t i) {
            RngStream rng(s.seed, detail::stream_id(7, 100000 * d + i));
            const FirstBounce fb = first_bounce(rng, 0.0, 1.0, s.params, cfg);
            if (fb.hit) speeds[i] = -fb.incoming;
        });
        speeds.erase(std::remove(speeds.begin(), speeds.end(), -1.0), speeds.end());
        ks[d] = ks_test(speeds, v_marginal_cdf).statistic;
        r.metrics.push_back({"ks_dt_" + std::to_string(d), ks[d]});
    }
    // The integrator's distributional bias sits well below the KS sampling
    // noise at this n (measured < 0.002 even at dt = 1e-2), so monotonicity
    // is enforced up to three null-KS standard deviations; an integrator
    // whose error grew with refinement, or exceeded the noise floor, would
    // still fail.
    const double slack = 3.0 * 0.26 / std::sqrt(static_cast<double>(n));
    r.metrics.push_back({"n_per_dt", static_cast<double>(n)});
    r.metrics.push_back({"monotonicity_slack", slack});
    r.tolerance = "KS non-increasing over dt in {1e-2, 1e-3, 1e-4} up to noise slack; "
                  "< 0.02 at 1e-4";
    r.pass = ks[1] <= ks[0] + slack && ks[2] <= ks[1] + slack && ks[2] < 0.02;
    return r;
}

/// 8. Driving-noise reconstruction: W recovered from the killed path is a
/// Brownian motion. Paths are aggregated until ten units of simulated time
/// so absorption does not starve the statistics.
inline CriterionResult criterion_noise_reconstruction(const VerifySettings& s) {
    CriterionResult r{8, "noise_reconstruction",
                      "reconstructed W has Brownian quadratic variation, Gaussian "
                      "increments, and no macroscopic steps"};
    PathConfig cfg;
    cfg.dt = s.quick ? 1e-3 : 1e-4;
    cfg.horizon = 10.0;
    const double lag = 0.1;
    double qv = 0.0, total_time = 0.0, max_step = 0.0;
    std::size_t n_steps = 0, oversize_steps = 0;
    std::vector<double> lag_increments;
    for (std::uint64_t p = 0; total_time < 10.0 && p < 64; ++p) {
        RngStream rng(s.seed, detail::stream_id(8, p));
        PathSample path = integrate_sor(rng, 0.0, 1.0, s.params, cfg);
        path.w = reconstruct_w(path);
        std::size_t mark = 0;
        for (std::size_t i = 1; i < path.grid.size(); ++i) {
            const double dw = path.w[i] - path.w[i - 1];
            qv += dw * dw;
            max_step = std::max(max_step, std::abs(dw));
            if (std::abs(dw) > 6.0 * std::sqrt(cfg.dt)) ++oversize_steps;
            ++n_steps;
            while (path.grid[i] - path.grid[mark] >= lag) {
                lag_increments.push_back(path.w[i] - path.w[mark]);
                mark = i;
            }
        }
        total_time += path.grid.back();
    }
    const double qv_ratio = qv / total_time;
    const double ks_p =
        ks_test(lag_increments, [&](double z) {
            return 0.5 * std::erfc(-z / std::sqrt(2.0 * lag));
        }).p_value;
    const double oversize_fraction = static_cast<double>(oversize_steps) / n_steps;
    r.metrics = {{"qv_over_t", qv_ratio},
                 {"increment_ks_p", ks_p},
                 {"max_step", max_step},
                 {"oversize_step_fraction", oversize_fraction},
                 {"total_time", total_time}};
    r.tolerance = "QV/t in [0.98, 1.02]; increment KS p > 0.01; steps > 6 sqrt(dt) "
                  "rarer than 1e-6";
    r.pass = qv_ratio >= 0.98 && qv_ratio <= 1.02 && ks_p > 0.01 &&
             oversize_fraction < 1e-6;
    return r;
}

/// 9. Stationary overshoot law: the size-biased ladder construction against
/// brute-force level crossings, plus the tilted-walk drift.
inline CriterionResult criterion_overshoot(const VerifySettings& s) {
    CriterionResult r{9, "stationary_overshoot",
                      "size-biased ladder draw matches high-level overshoots; tilted "
                      "drift matches mu_up"};
    const std::size_t n = s.quick ? 4000 : 10000;
    const std::size_t table_size = s.quick ? 20000 : 100000;
    const LadderTable table(s.params, table_size, s.seed);
    RngStream rng_a(s.seed, detail::stream_id(9, 1));
    std::vector<double> biased(n);
    for (double& x : biased) x = table.sample_overshoot(rng_a);
    RngStream rng_b(s.seed, detail::stream_id(9, 2));
    const OvershootSample crossing =
        overshoot_at_level(rng_b, 15.0, n, s.params);
    const KsResult ks = ks_test_2sample(biased, crossing.values);

    const std::size_t n_drift = s.quick ? 20000 : 100000;
    RngStream rng_c(s.seed, detail::stream_id(9, 3));
    const auto [drift_hat, drift_se] =
        mean_stderr(walk_increments(rng_c, n_drift, s.params, true));
    r.metrics = {{"ks_p", ks.p_value},
                 {"drift_hat", drift_hat},
                 {"drift_se", drift_se},
                 {"mu_up", s.params.mu_up},
                 {"n", static_cast<double>(n)}};
    r.tolerance = "KS p > 0.01; |drift - mu_up| <= 3 SE";
    r.pass = ks.p_value > 0.01 && std::abs(drift_hat - s.params.mu_up) <= 3.0 * drift_se;
    return r;
}

/// 10. Recurrent extension: excursion lengths inherit the s^{-k} intensity,
/// and shrinking the resurrection speed increases the share of time spent
/// near the origin (monotone in eps).
inline CriterionResult criterion_resurrection(const VerifySettings& s) {
    CriterionResult r{10, "resurrection_scaling",
                      "excursion-length counts follow s^{-k}; near-origin occupation "
                      "fraction decreases in eps"};
    const double eps = 0.01;
    const std::size_t m = s.quick ? 1500 : 10000;
    PathConfig cfg;
    cfg.dt = 1e-3;
    cfg.adaptive_scaling = true;
    cfg.absorb_speed = 1e-3 * eps;
    cfg.horizon = 1e4;  // per-excursion cap; censored lengths sit above the fit window
    std::vector<double> lengths(m);
    parallel_for(m, s.threads, [&](std::size_t i) {
        RngStream rng(s.seed, detail::stream_id(10, i));
        lengths[i] = resurrect(rng, eps, s.params, cfg, 1).excursions.front().length;
    });
    const TailFit fit = tail_exponent_loglog(lengths, 0.5, 0.25, 100, s.seed);
    // decades actually spanned by the fit window
    std::vector<double> sorted = lengths;
    std::sort(sorted.begin(), sorted.end());
    const double s_lo = sorted[static_cast<std::size_t>(0.5 * m)];
    const double s_hi = sorted[static_cast<std::size_t>(0.75 * m)];
    const double decades = std::log10(s_hi / s_lo);

    const std::size_t m_frac = s.quick ? 400 : 2000;
    const double cap_frac = s.quick ? 30.0 : 100.0;
    double fracs[3];
    const double eps_grid[3] = {0.1, 0.03, 0.01};
    for (int e = 0; e < 3; ++e) {
        PathConfig fcfg = cfg;
        fcfg.absorb_speed = 1e-3 * eps_grid[e];
        fcfg.horizon = cap_frac;
        RngStream rng(s.seed, detail::stream_id(10, 1000000 + e));
        double near = 0.0, total = 0.0;
        for (std::size_t i = 0; i < m_frac; ++i) {
            const ResurrectResult res =
                resurrect(rng, eps_grid[e], s.params, fcfg, 1, cap_frac, 0);
            near += res.time_near_zero;
            total += res.total_time;
        }
        fracs[e] = near / total;
        r.metrics.push_back({"near_fraction_eps_" + std::to_string(e), fracs[e]});
    }
    r.metrics.push_back({"length_exponent", fit.exponent});
    r.metrics.push_back({"fit_decades", decades});
    r.metrics.push_back({"m", static_cast<double>(m)});
    r.tolerance = "|exponent - k| <= 0.05 over >= 2 decades; near fraction "
                  "increases as eps shrinks";
    r.pass = std::abs(fit.exponent - s.params.k) <= 0.05 && decades >= 2.0 &&
             fracs[0] < fracs[1] && fracs[1] < fracs[2];
    return r;
}

inline std::vector<CriterionResult> run_all_criteria(const VerifySettings& s) {
    return {criterion_k_solver(s),        criterion_martingale(s),
            criterion_zeta_tail(s),       criterion_t1_tails(s),
            criterion_c1(s),              criterion_harmonic_floor(s),
            criterion_discretization(s),  criterion_noise_reconstruction(s),
            criterion_overshoot(s),       criterion_resurrection(s)};
}

inline bool all_pass(const std::vector<CriterionResult>& results) {
    return std::all_of(results.begin(), results.end(),
                       [](const CriterionResult& r) { return r.pass; });
}

}  // namespace langevin
