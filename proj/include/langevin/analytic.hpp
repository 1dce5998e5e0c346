#pragma once

/// Closed-form quantities for the sub-critical reflected Langevin model:
/// the critical elasticity, speed-ratio moments, the tail exponent k(c),
/// the tilted drift, and quadrature-based densities of the free
/// Kolmogorov process (transition density, occupation density, first
/// hitting-speed density).

#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/gamma.hpp>

namespace langevin {

inline constexpr double kPi = 3.14159265358979323846;

/// c_cr = exp(-pi/sqrt(3)); below it the bounces accumulate in finite time.
inline double critical_elasticity() { return std::exp(-kPi / std::sqrt(3.0)); }

namespace detail {

template <typename F>
double integrate(F&& f, double a, double b, double tol = 1e-12) {
    using boost::math::quadrature::gauss_kronrod;
    return gauss_kronrod<double, 31>::integrate(std::forward<F>(f), a, b, 12, tol);
}

// Integral over (a, infinity); exp-sinh copes with slow algebraic decay
// that defeats a rational change of variables.
template <typename F>
double integrate_to_inf(F&& f, double a, double tol = 1e-10) {
    boost::math::quadrature::exp_sinh<double> integrator;
    return integrator.integrate(std::forward<F>(f), a,
                                std::numeric_limits<double>::infinity(), tol);
}

}  // namespace detail

/// E[V1^x] = c^x / (2 cos((x+1) pi / 3)) for x < 1/2; the moment diverges
/// at x = 1/2 where the cosine hits zero.
inline double v_moment(double c, double x) {
    if (x >= 0.5) throw std::invalid_argument("v_moment: divergent for x >= 1/2");
    return std::pow(c, x) / (2.0 * std::cos((x + 1.0) / 3.0 * kPi));
}

/// Inverse map c(k) = [2 cos((2k+1) pi / 3)]^{1/(2k)} on (0, 1/4).
inline double c_of_k(double k) {
    if (k <= 0.0 || k >= 0.25) throw std::invalid_argument("c_of_k: k must lie in (0, 1/4)");
    return std::pow(2.0 * std::cos((2.0 * k + 1.0) / 3.0 * kPi), 1.0 / (2.0 * k));
}

/// Solves E[V1^{2k}] = 1 for k in (0, 1/4). Bisection brackets the root,
/// then a secant refinement polishes it; |E[V1^{2k}] - 1| < 1e-12 at return.
inline double k_of_c(double c) {
    const double c_cr = critical_elasticity();
    if (!(c > 0.0 && c < c_cr))
        throw std::invalid_argument("k_of_c: c must lie in (0, " + std::to_string(c_cr) + ")");
    auto g = [c](double k) { return v_moment(c, 2.0 * k) - 1.0; };
    double lo = 1e-9, hi = 0.25 - 1e-9;
    // g is increasing in k: g(0+) < 0 (drift negative), g(1/4-) -> +inf.
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (g(mid) < 0.0 ? lo : hi) = mid;
        if (hi - lo < 1e-15) break;
    }
    double k = 0.5 * (lo + hi);
    for (int i = 0; i < 8; ++i) {
        const double gk = g(k);
        if (std::abs(gk) < 1e-14) break;
        const double h = 1e-9;
        const double slope = (g(k + h) - g(k - h)) / (2.0 * h);
        double next = k - gk / slope;
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        (g(next) < 0.0 ? lo : hi) = next;
        k = next;
    }
    return k;
}

/// Model constants derived from the elasticity c.
struct ModelParams {
    double c;       ///< elasticity, 0 < c < c_cr
    double k;       ///< tail exponent, root of E[V1^{2k}] = 1
    double drift;   ///< E[ln(V1)] = ln c + pi/sqrt(3), negative
    double mu_up;   ///< drift of ln(V1) under the 2k-tilted law, positive
    double theta;   ///< tilt base exp(2k)

    static ModelParams from_c(double c) {
        ModelParams p;
        p.c = c;
        p.k = k_of_c(c);  // validates the domain
        p.drift = std::log(c) + kPi / std::sqrt(3.0);
        p.mu_up = std::log(c) + kPi / 3.0 * std::tan((2.0 * p.k + 1.0) / 3.0 * kPi);
        p.theta = std::exp(2.0 * p.k);
        return p;
    }
};

/// Tilted-walk drift: derivative of x -> ln E[V1^x] at x = 2k. Equals the
/// mean of ln(V1) under the law tilted by V1^{2k}.
inline double mu_up(const ModelParams& params) { return params.mu_up; }

/// Graph of k(c) on [c_min, c_max], n_points values, strictly decreasing.
inline std::vector<std::pair<double, double>> kc_curve(double c_min, double c_max,
                                                       int n_points) {
    if (n_points < 2) throw std::invalid_argument("kc_curve: n_points must be >= 2");
    if (!(c_min < c_max)) throw std::invalid_argument("kc_curve: need c_min < c_max");
    std::vector<std::pair<double, double>> out;
    out.reserve(n_points);
    for (int i = 0; i < n_points; ++i) {
        const double c = c_min + (c_max - c_min) * i / (n_points - 1);
        out.emplace_back(c, k_of_c(c));
    }
    return out;
}

/// Density of V1/c: (3/2pi) v^{3/2} / (1 + v^3) on v >= 0.
inline double v_marginal_pdf(double v) {
    if (v < 0.0) return 0.0;
    if (v > 1e30) return 1.5 / kPi * std::pow(v, -1.5);
    return 1.5 / kPi * std::pow(v, 1.5) / (1.0 + v * v * v);
}

/// CDF of the V1/c marginal, by adaptive quadrature.
inline double v_marginal_cdf(double v) {
    if (v <= 0.0) return 0.0;
    if (v <= 1.0) return detail::integrate(v_marginal_pdf, 0.0, v);
    // Tail with v -> z^{-2}: int_v^inf pdf = (3/pi) int_0^{1/sqrt(v)} dz/(1+z^6).
    const double tail = detail::integrate(
        [](double z) { return 3.0 / kPi / (1.0 + std::pow(z, 6.0)); }, 0.0,
        1.0 / std::sqrt(v));
    return 1.0 - tail;
}

/// Inner integral of the McKean density, int_0^z exp(-3t/2) dt / sqrt(pi t).
/// Evaluates as sqrt(2/3) * erf(sqrt(3z/2)), removing the endpoint singularity.
inline double mckean_inner_integral(double z) {
    if (z <= 0.0) return 0.0;
    return std::sqrt(2.0 / 3.0) * std::erf(std::sqrt(1.5 * z));
}

/// Joint density of (T1, V1/c) started from (0, 1).
inline double mckean_joint_pdf(double s, double v) {
    if (s <= 0.0 || v <= 0.0) return 0.0;
    const double pref = 3.0 * v / (kPi * std::sqrt(2.0) * s * s);
    return pref * std::exp(-2.0 * (v * v - v + 1.0) / s) * mckean_inner_integral(4.0 * v / s);
}

/// Transition density of the free Kolmogorov process.
inline double kolmogorov_pt(double t, double x, double u, double y, double v) {
    if (t <= 0.0) throw std::invalid_argument("kolmogorov_pt: t must be positive");
    const double a = y - x - t * u;
    const double b = v - u;
    const double q = -6.0 * a * a / (t * t * t) + 6.0 * a * b / (t * t) - 2.0 * b * b / t;
    return std::sqrt(3.0) / (kPi * t * t) * std::exp(q);
}

/// Total occupation density Phi(x,u;y,v) = int_0^infty p_t dt.
/// The integral is split at t in {1e-3, 1}; the tail uses t -> 1/w. The
/// integrand is sharply peaked near t = 0 when the endpoints are close,
/// which the log-spaced head panel absorbs; coincident endpoints
/// ((x,u) == (y,v)) are outside the domain.
inline double occupation_phi(double x, double u, double y, double v) {
    if (x == y && u == v)
        throw std::invalid_argument("occupation_phi: coincident endpoints diverge");
    auto integrand = [&](double t) { return kolmogorov_pt(t, x, u, y, v); };
    // Head panel on log scale: t = exp(s), s in (-inf, ln 1e-3].
    auto head = [&](double s) {
        const double t = std::exp(s);
        return integrand(t) * t;
    };
    const double part_head = detail::integrate(head, -60.0, std::log(1e-3), 1e-10);
    const double part_mid = detail::integrate(integrand, 1e-3, 1.0, 1e-10);
    // Tail: t = 1/w maps [1, inf) to (0, 1].
    auto tail = [&](double w) { return integrand(1.0 / w) / (w * w); };
    const double part_tail = detail::integrate(tail, 0.0, 1.0, 1e-10);
    return part_head + part_mid + part_tail;
}

/// Gor'kov density of V1/c under the killed law started from (x, u) in D.
/// Starts with x = 0 and u < 0 are outside the domain (the boundary state
/// with incoming velocity is not in D).
inline double gorkov_hit_pdf(double x, double u, double v) {
    if (v <= 0.0) return 0.0;
    if (x < 0.0 || (x == 0.0 && u <= 0.0))
        throw std::invalid_argument("gorkov_hit_pdf: (x,u) must lie in D");
    // Large v makes the direct term and the mixture cancel far below the
    // quadrature accuracy. The self-similarity f_{x,u}(v) =
    // f_{x/v^3, u/v}(1) / v moves the evaluation to unit speed instead.
    if (v > 2.0) return gorkov_hit_pdf(x / (v * v * v), u / v, 1.0) / v;
    const double direct = occupation_phi(x, u, 0.0, -v);
    auto weighted = [&](double mu) {
        const double w = std::pow(mu, 1.5) / (mu * mu * mu + 1.0);
        // Boundary starts have an integrable log singularity at mu v = u;
        // nudge a node that lands exactly on it.
        double mv = mu * v;
        if (x == 0.0 && mv == u) mv *= 1.0 + 1e-12;
        return w * occupation_phi(x, u, 0.0, mv);
    };
    const double mix_low = detail::integrate(weighted, 0.0, 1.0, 1e-7);
    const double mix_high =
        detail::integrate([&](double w) { return w > 0.0 ? weighted(1.0 / w) / (w * w) : 0.0; },
                          0.0, 1.0, 1e-7);
    return v * (direct - 1.5 / kPi * (mix_low + mix_high));
}

/// Harmonic function H(x,u) = E_{x,u}[V1^{2k}]. Closed form u^{2k} on the
/// boundary; elsewhere integrates (cv)^{2k} against the Gor'kov density.
inline double harmonic_H(const ModelParams& params, double x, double u) {
    if (x == 0.0) {
        if (u <= 0.0) throw std::invalid_argument("harmonic_H: (0,u) requires u > 0");
        return std::pow(u, 2.0 * params.k);
    }
    if (x < 0.0) throw std::invalid_argument("harmonic_H: x must be >= 0");
    const double two_k = 2.0 * params.k;
    auto f = [&](double v) {
        return std::pow(params.c * v, two_k) * gorkov_hit_pdf(x, u, v);
    };
    const double low = detail::integrate(f, 0.0, 1.0, 1e-5);
    // The hit density decays like A v^{-3/2} (constant in v by v ~ 100), so
    // integrate on a log grid to v = 1000 and close the tail with
    // int_V^inf (cv)^{2k} A v^{-3/2} dv = (cV)^{2k} f(V) V / (1/2 - 2k).
    const double v_cut = 1000.0;
    const double high = detail::integrate(
        [&](double s) {
            const double v = std::exp(s);
            return f(v) * v;
        },
        0.0, std::log(v_cut), 1e-5);
    const double tail = std::pow(params.c * v_cut, two_k) *
                        gorkov_hit_pdf(x, u, v_cut) * v_cut / (0.5 - two_k);
    return low + high + tail;
}

/// Prefactor of the tilted first-bounce tail P(T1 > t) ~ c' t^{k - 1/4}:
/// c' = 3 c^{2k} / (pi^{3/2} 2^{3/4+k}) * (1+4k)/(1-4k) * Gamma(1/4 + k).
inline double t1_tail_const_up(const ModelParams& params) {
    const double k = params.k;
    return 3.0 * std::pow(params.c, 2.0 * k) /
           (std::pow(kPi, 1.5) * std::pow(2.0, 0.75 + k)) * (1.0 + 4.0 * k) /
           (1.0 - 4.0 * k) * boost::math::tgamma(0.25 + k);
}

}  // namespace langevin
