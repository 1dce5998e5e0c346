#pragma once

/// Discretized simulation of the second-order-reflected dynamics: killed
/// path, driving-noise reconstruction, epsilon-resurrection of the
/// recurrent extension, and excursion statistics.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "langevin/analytic.hpp"
#include "langevin/rng.hpp"
#include "langevin/stats.hpp"

namespace langevin {

struct PathConfig {
    double dt = 1e-3;            ///< base step size
    double absorb_speed = 1e-4;  ///< declare absorption when an outgoing speed drops below
    double horizon = 10.0;       ///< max simulated time
    std::uint64_t seed = 0;
    bool deterministic_mode = false;  ///< disable noise (for tests)
    /// Scale steps by the local state magnitude, h = dt * max(v^2, x^{2/3}).
    /// The dynamics are self-similar, so this keeps the relative
    /// discretization error uniform across scales and makes the heavy
    /// first-passage tails affordable; the step returns to dt whenever the
    /// state is at unit scale. Off by default (fixed grid).
    bool adaptive_scaling = false;
};

struct BounceEvent {
    double time;
    double incoming;  ///< velocity just before reflection (< 0)
    double outgoing;  ///< -c * incoming
};

struct PathSample {
    std::vector<double> grid;  ///< times (nonuniform when steps split at bounces)
    std::vector<double> x;
    std::vector<double> v;
    std::vector<double> w;     ///< reconstructed driving noise; filled by reconstruct_w
    std::vector<BounceEvent> bounces;
    std::optional<double> absorbed_at;
    double elasticity = 0.0;
};

struct ExcursionRecord {
    double start = 0.0;
    double length = 0.0;
    double first_bounce_time = 0.0;
    double max_speed = 0.0;
    std::vector<double> outgoing_speeds;
    bool censored = false;  ///< hit the excursion cap before absorbing
};

namespace detail {

// Locate the earliest root of the in-step position interpolant
// q(theta) = x + v theta + dv theta^2 / (2h) on (0, theta_hi], given
// q(theta_hi) <= 0. Bisection to relative time tolerance 1e-6.
inline double locate_crossing(double x, double v, double dv, double h, double theta_hi) {
    auto q = [&](double th) { return x + v * th + 0.5 * dv * th * th / h; };
    double lo = 0.0, hi = theta_hi;
    // Guard against an earlier root: march a few panels to find the first
    // sign change (the quadratic has at most two roots, so 4 panels do).
    for (int p = 1; p <= 4; ++p) {
        const double th = theta_hi * p / 4.0;
        if (q(th) <= 0.0) {
            hi = th;
            lo = theta_hi * (p - 1) / 4.0;
            break;
        }
    }
    const double tol = h * 1e-6;
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        (q(mid) > 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

// Core stepping loop shared by the full-path, first-bounce, and
// resurrection drivers. Observer receives every accepted grid point and
// every bounce; returning false from on_bounce stops the run.
template <typename Observer>
void run_sor(RngStream& rng, double x0, double u0, double c, const PathConfig& cfg,
             Observer&& obs) {
    if (x0 < 0.0 || (x0 == 0.0 && u0 <= 0.0))
        throw std::invalid_argument("integrate_sor: start must lie in D");
    if (cfg.dt <= 0.0 || cfg.horizon <= 0.0 || cfg.absorb_speed < 0.0)
        throw std::invalid_argument("integrate_sor: invalid config");
    double t = 0.0, x = x0, v = u0;
    obs.on_grid(t, x, v);
    while (t < cfg.horizon) {
        double h = cfg.dt;
        if (cfg.adaptive_scaling) {
            const double s2 = std::max({v * v, std::cbrt(x * x), 1e-12});
            h = cfg.dt * s2;
        }
        h = std::min(h, cfg.horizon - t);
        const double dv = cfg.deterministic_mode ? 0.0 : std::sqrt(h) * rng.normal();
        const double v_new = v + dv;
        const double x_new = x + 0.5 * h * (v + v_new);

        // Crossing if the endpoint is below zero, or the in-step parabola
        // dips below zero at its interior vertex.
        double theta_hi = -1.0;
        if (x_new < 0.0) {
            theta_hi = h;
        } else if (dv != 0.0) {
            const double theta_min = -v * h / dv;
            if (theta_min > 0.0 && theta_min < h &&
                x + 0.5 * v * theta_min < 0.0)  // q(theta_min) = x + v theta_min / 2
                theta_hi = theta_min;
        }

        if (theta_hi < 0.0) {
            t += h;
            x = x_new;
            v = v_new;
            obs.on_grid(t, x, v);
            continue;
        }

        const double theta = locate_crossing(x, v, dv, h, theta_hi);
        double v_in = v + dv * theta / h;
        if (v_in > 0.0) v_in = 0.0;  // tangential graze
        const double v_out = -c * v_in;
        t += theta;
        x = 0.0;
        v = v_out;
        const bool absorbed = v_out < cfg.absorb_speed;
        if (!obs.on_bounce(t, v_in, v_out, absorbed) || absorbed) return;
        obs.on_grid(t, x, v);
    }
}

}  // namespace detail

/// Simulate the reflected dynamics from (x0, u0): Gaussian velocity
/// increments, trapezoidal position update, bisection-located bounces with
/// velocity reflection -c * incoming. Absorption is declared when an
/// outgoing speed falls below cfg.absorb_speed; otherwise the path runs to
/// the horizon.
inline PathSample integrate_sor(RngStream& rng, double x0, double u0, const ModelParams& params,
                                const PathConfig& cfg) {
    PathSample path;
    path.elasticity = params.c;
    struct Collector {
        PathSample& p;
        void on_grid(double t, double x, double v) {
            p.grid.push_back(t);
            p.x.push_back(x);
            p.v.push_back(v);
        }
        bool on_bounce(double t, double v_in, double v_out, bool absorbed) {
            p.bounces.push_back({t, v_in, v_out});
            if (absorbed) {
                p.absorbed_at = t;
                on_grid(t, 0.0, v_out);
            }
            return true;
        }
    } collector{path};
    detail::run_sor(rng, x0, u0, params.c, cfg, collector);
    return path;
}

struct FirstBounce {
    double time = 0.0;
    double incoming = 0.0;  ///< velocity just before the bounce (< 0)
    double outgoing = 0.0;
    bool hit = false;       ///< false when the horizon was reached first
};

/// First-passage summary without storing the path; used by the
/// distribution checks where many independent starts are needed.
inline FirstBounce first_bounce(RngStream& rng, double x0, double u0, const ModelParams& params,
                                const PathConfig& cfg) {
    FirstBounce fb;
    struct Watcher {
        FirstBounce& fb;
        void on_grid(double, double, double) {}
        bool on_bounce(double t, double v_in, double v_out, bool) {
            fb.time = t;
            fb.incoming = v_in;
            fb.outgoing = v_out;
            fb.hit = true;
            return false;
        }
    } watcher{fb};
    detail::run_sor(rng, x0, u0, params.c, cfg, watcher);
    return fb;
}

/// Driving noise W_t = v_t + (1+c) sum of incoming velocities at bounces
/// up to t, evaluated on the path's grid. The reflection jumps of the
/// velocity cancel against the jump sum, so W is continuous up to the
/// bisection tolerance.
inline std::vector<double> reconstruct_w(const PathSample& path) {
    std::vector<double> w(path.grid.size());
    const double jump_factor = 1.0 + path.elasticity;
    double jump_sum = 0.0;
    std::size_t next_bounce = 0;
    for (std::size_t i = 0; i < path.grid.size(); ++i) {
        // A grid entry at a bounce time carries the outgoing velocity, so
        // the bounce at exactly grid[i] is included in its jump sum.
        while (next_bounce < path.bounces.size() &&
               path.bounces[next_bounce].time <= path.grid[i]) {
            jump_sum += path.bounces[next_bounce].incoming;
            ++next_bounce;
        }
        w[i] = path.v[i] + jump_factor * jump_sum;
    }
    return w;
}

struct ResurrectResult {
    PathSample path;  ///< concatenated path (grid capped at max_grid_points)
    std::vector<ExcursionRecord> excursions;
    double total_time = 0.0;
    double time_near_zero = 0.0;  ///< time with max(|x|^{1/3}, |v|) below near_threshold
};

/// Epsilon-approximation of the recurrent extension: run from (0, eps)
/// until absorption, record the excursion, restart instantly. Stops at the
/// global horizon or after max_excursions. Individual excursions are
/// censored at excursion_cap (their length then reads as the cap).
/// Occupation near the origin is accumulated online (left-endpoint rule on
/// the step grid, scale-matched threshold), so it stays exact past the
/// grid-storage cap.
inline ResurrectResult resurrect(RngStream& rng, double eps, const ModelParams& params,
                                 PathConfig cfg,
                                 std::size_t max_excursions = SIZE_MAX,
                                 double excursion_cap = std::numeric_limits<double>::infinity(),
                                 std::size_t max_grid_points = 2000000,
                                 double near_threshold = 0.01) {
    if (eps <= 0.0) throw std::invalid_argument("resurrect: eps must be positive");
    ResurrectResult result;
    result.path.elasticity = params.c;
    double global_t = 0.0;
    const double global_horizon = cfg.horizon;
    while (global_t < global_horizon && result.excursions.size() < max_excursions) {
        ExcursionRecord rec;
        rec.start = global_t;
        PathConfig exc_cfg = cfg;
        exc_cfg.horizon = std::min(excursion_cap, global_horizon - global_t);
        struct Collector {
            ExcursionRecord& rec;
            PathSample& p;
            double offset;
            std::size_t cap;
            double near_thr;
            double end_t = 0.0;
            bool absorbed = false;
            bool prev_near = true;  // excursion starts at (0, eps); caller decides
            double near_time = 0.0;
            void advance(double t, double x, double v) {
                near_time += prev_near ? (t - end_t) : 0.0;
                prev_near = std::max(std::cbrt(x), std::abs(v)) < near_thr;
                end_t = t;
            }
            void on_grid(double t, double x, double v) {
                advance(t, x, v);
                rec.max_speed = std::max(rec.max_speed, std::abs(v));
                if (p.grid.size() < cap) {
                    p.grid.push_back(offset + t);
                    p.x.push_back(x);
                    p.v.push_back(v);
                }
            }
            bool on_bounce(double t, double v_in, double v_out, bool is_absorbed) {
                advance(t, 0.0, v_out);
                if (rec.outgoing_speeds.empty()) rec.first_bounce_time = t;
                rec.outgoing_speeds.push_back(v_out);
                p.bounces.push_back({offset + t, v_in, v_out});
                if (is_absorbed) absorbed = true;
                return true;
            }
        } collector{rec, result.path, global_t, max_grid_points, near_threshold};
        detail::run_sor(rng, 0.0, eps, params.c, exc_cfg, collector);
        rec.length = collector.end_t;
        rec.censored = !collector.absorbed;
        if (rec.outgoing_speeds.empty()) rec.first_bounce_time = rec.length;
        result.excursions.push_back(std::move(rec));
        global_t += collector.end_t;
        result.time_near_zero += collector.near_time;
        if (collector.end_t <= 0.0) break;  // defensive: no progress
    }
    result.total_time = global_t;
    if (result.excursions.empty())
        throw std::runtime_error("resurrect: horizon too small for a single excursion");
    return result;
}

struct BounceCountTable {
    std::vector<double> v_grid;
    std::vector<double> mean_counts;  ///< mean number of bounces with outgoing in [v, 1]
    double growth_exponent = 0.0;     ///< slope of ln(mean) vs ln(1/v) as v -> 0
};

/// Per-excursion mean counts of bounces with outgoing speed in [v, 1] for
/// each grid value, with a log-log fit of the small-v growth.
inline BounceCountTable excursion_bounce_counts(const std::vector<ExcursionRecord>& records,
                                                const std::vector<double>& v_grid) {
    if (records.empty())
        throw std::invalid_argument("excursion_bounce_counts: no excursion records");
    BounceCountTable table;
    table.v_grid = v_grid;
    table.mean_counts.resize(v_grid.size(), 0.0);
    for (const auto& rec : records)
        for (double speed : rec.outgoing_speeds)
            for (std::size_t i = 0; i < v_grid.size(); ++i)
                if (speed >= v_grid[i] && speed <= 1.0) table.mean_counts[i] += 1.0;
    for (double& m : table.mean_counts) m /= static_cast<double>(records.size());

    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < v_grid.size(); ++i) {
        if (v_grid[i] < 0.5 && table.mean_counts[i] > 0.0) {
            lx.push_back(std::log(1.0 / v_grid[i]));
            ly.push_back(std::log(table.mean_counts[i]));
        }
    }
    if (lx.size() >= 2) table.growth_exponent = detail::least_squares(lx, ly).slope;
    return table;
}

}  // namespace langevin
