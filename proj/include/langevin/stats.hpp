#pragma once

/// Estimators and tests shared by the verification paths: one- and
/// two-sample Kolmogorov-Smirnov, log-log tail fits with bootstrap errors,
/// the Hill estimator, and heavy-tail-robust means.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "langevin/rng.hpp"

namespace langevin {

struct KsResult {
    double statistic;
    double p_value;
};

struct TailFit {
    double exponent;    ///< fitted tail index (positive)
    double prefactor;   ///< fitted constant in P(X > t) ~ prefactor * t^{-exponent}
    double q_lo;        ///< upper survival level of the fit window
    double q_hi;        ///< lower survival level of the fit window
    double stderr_;     ///< bootstrap standard error of the exponent
};

namespace detail {

// Asymptotic Kolmogorov survival function Q(lambda) = 2 sum (-1)^{j-1} e^{-2 j^2 lambda^2}.
inline double kolmogorov_q(double lambda) {
    if (lambda < 1e-3) return 1.0;
    double sum = 0.0;
    for (int j = 1; j <= 100; ++j) {
        const double term = 2.0 * std::exp(-2.0 * j * j * lambda * lambda);
        sum += (j % 2 == 1) ? term : -term;
        if (term < 1e-12) break;
    }
    return std::min(std::max(sum, 0.0), 1.0);
}

inline double ks_p_from_stat(double d, double n_eff) {
    const double rn = std::sqrt(n_eff);
    return kolmogorov_q((rn + 0.12 + 0.11 / rn) * d);
}

}  // namespace detail

/// One-sample KS test of `samples` against a CDF.
inline KsResult ks_test(std::vector<double> samples,
                        const std::function<double(double)>& cdf) {
    if (samples.size() < 20) throw std::invalid_argument("ks_test: need at least 20 samples");
    std::sort(samples.begin(), samples.end());
    const std::size_t n = samples.size();
    double d = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double f = cdf(samples[i]);
        d = std::max(d, std::abs(f - static_cast<double>(i) / n));
        d = std::max(d, std::abs(static_cast<double>(i + 1) / n - f));
    }
    return {d, detail::ks_p_from_stat(d, static_cast<double>(n))};
}

/// Two-sample KS test.
inline KsResult ks_test_2sample(std::vector<double> a, std::vector<double> b) {
    if (a.size() < 20 || b.size() < 20)
        throw std::invalid_argument("ks_test_2sample: need at least 20 samples per side");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    double d = 0.0;
    std::size_t i = 0, j = 0;
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    while (i < a.size() && j < b.size()) {
        if (a[i] <= b[j])
            ++i;
        else
            ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    const double n_eff = na * nb / (na + nb);
    return {d, detail::ks_p_from_stat(d, n_eff)};
}

/// Median of per-block means over a contiguous split; robust to heavy tails.
inline double median_of_means(const std::vector<double>& samples, std::size_t n_blocks) {
    if (samples.empty()) throw std::invalid_argument("median_of_means: empty sample");
    if (n_blocks < 1) throw std::invalid_argument("median_of_means: n_blocks must be >= 1");
    n_blocks = std::min(n_blocks, samples.size());
    std::vector<double> block_means(n_blocks);
    const std::size_t n = samples.size();
    for (std::size_t b = 0; b < n_blocks; ++b) {
        const std::size_t lo = b * n / n_blocks, hi = (b + 1) * n / n_blocks;
        block_means[b] =
            std::accumulate(samples.begin() + lo, samples.begin() + hi, 0.0) / (hi - lo);
    }
    std::sort(block_means.begin(), block_means.end());
    const std::size_t m = n_blocks / 2;
    return (n_blocks % 2 == 1) ? block_means[m] : 0.5 * (block_means[m - 1] + block_means[m]);
}

/// Robust standard error companion to median_of_means: the spread of the
/// block means divided by sqrt(n_blocks).
inline double median_of_means_stderr(const std::vector<double>& samples,
                                     std::size_t n_blocks) {
    if (samples.empty()) throw std::invalid_argument("median_of_means_stderr: empty sample");
    n_blocks = std::min(std::max<std::size_t>(n_blocks, 2), samples.size());
    std::vector<double> block_means(n_blocks);
    const std::size_t n = samples.size();
    for (std::size_t b = 0; b < n_blocks; ++b) {
        const std::size_t lo = b * n / n_blocks, hi = (b + 1) * n / n_blocks;
        block_means[b] =
            std::accumulate(samples.begin() + lo, samples.begin() + hi, 0.0) / (hi - lo);
    }
    const double mean =
        std::accumulate(block_means.begin(), block_means.end(), 0.0) / n_blocks;
    double ss = 0.0;
    for (double m : block_means) ss += (m - mean) * (m - mean);
    return std::sqrt(ss / (n_blocks - 1) / n_blocks);
}

namespace detail {

struct SlopeFit {
    double slope;
    double intercept;
};

inline SlopeFit least_squares(const std::vector<double>& xs, const std::vector<double>& ys) {
    const std::size_t n = xs.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sx += xs[i];
        sy += ys[i];
        sxx += xs[i] * xs[i];
        sxy += xs[i] * ys[i];
    }
    const double denom = n * sxx - sx * sx;
    const double slope = (n * sxy - sx * sy) / denom;
    return {slope, (sy - slope * sx) / n};
}

inline SlopeFit tail_fit_once(const std::vector<double>& sorted, double q_lo, double q_hi) {
    const std::size_t n = sorted.size();
    std::vector<double> lx, ly;
    lx.reserve(n);
    ly.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double surv = 1.0 - static_cast<double>(i + 1) / (n + 1);
        if (surv <= q_lo && surv >= q_hi && sorted[i] > 0.0) {
            lx.push_back(std::log(sorted[i]));
            ly.push_back(std::log(surv));
        }
    }
    if (lx.size() < 10) throw std::invalid_argument("tail fit: survival window is empty");
    return least_squares(lx, ly);
}

}  // namespace detail

/// Least-squares slope of ln(survival) against ln(t) over the survival
/// window (q_lo, q_hi); case-resampling bootstrap for the exponent error.
/// Bootstrap replicates run on a capped subsample, which overestimates the
/// error slightly for very large inputs.
inline TailFit tail_exponent_loglog(const std::vector<double>& samples, double q_lo = 0.1,
                                    double q_hi = 0.001, int n_boot = 200,
                                    std::uint64_t boot_seed = 12345) {
    if (samples.size() < 1000)
        throw std::invalid_argument("tail_exponent_loglog: need at least 1000 samples");
    if (!(0.0 < q_hi && q_hi < q_lo && q_lo < 1.0))
        throw std::invalid_argument("tail_exponent_loglog: need 0 < q_hi < q_lo < 1");
    std::vector<double> sorted = samples;
    std::sort(sorted.begin(), sorted.end());
    const auto fit = detail::tail_fit_once(sorted, q_lo, q_hi);

    const std::size_t n_sub = std::min<std::size_t>(samples.size(), 20000);
    RngStream rng(boot_seed);
    std::vector<double> boot_slopes;
    boot_slopes.reserve(n_boot);
    std::vector<double> resample(n_sub);
    for (int b = 0; b < n_boot; ++b) {
        for (std::size_t i = 0; i < n_sub; ++i)
            resample[i] = samples[rng.next_u64() % samples.size()];
        std::sort(resample.begin(), resample.end());
        try {
            boot_slopes.push_back(detail::tail_fit_once(resample, q_lo, q_hi).slope);
        } catch (const std::invalid_argument&) {
            // window can come up empty on a resample; skip it
        }
    }
    double se = 0.0;
    if (boot_slopes.size() > 1) {
        const double mean = std::accumulate(boot_slopes.begin(), boot_slopes.end(), 0.0) /
                            boot_slopes.size();
        double ss = 0.0;
        for (double s : boot_slopes) ss += (s - mean) * (s - mean);
        se = std::sqrt(ss / (boot_slopes.size() - 1));
    }
    return {-fit.slope, std::exp(fit.intercept), q_lo, q_hi, se};
}

/// Hill estimate of the tail index on the top order statistics.
inline std::pair<double, double> hill_estimator(const std::vector<double>& samples,
                                                double top_fraction) {
    if (!(top_fraction > 0.0 && top_fraction <= 0.1))
        throw std::invalid_argument("hill_estimator: top_fraction must lie in (0, 0.1]");
    std::vector<double> sorted = samples;
    std::sort(sorted.begin(), sorted.end(), std::greater<double>());
    const std::size_t k_top = static_cast<std::size_t>(top_fraction * samples.size());
    if (k_top < 10) throw std::invalid_argument("hill_estimator: fewer than 10 tail points");
    double sum = 0.0;
    for (std::size_t i = 0; i < k_top; ++i) sum += std::log(sorted[i] / sorted[k_top]);
    const double alpha = k_top / sum;
    return {alpha, alpha / std::sqrt(static_cast<double>(k_top))};
}

/// Plain mean and standard error, for light-tailed summaries.
inline std::pair<double, double> mean_stderr(const std::vector<double>& samples) {
    const double n = static_cast<double>(samples.size());
    const double mean = std::accumulate(samples.begin(), samples.end(), 0.0) / n;
    double ss = 0.0;
    for (double x : samples) ss += (x - mean) * (x - mean);
    return {mean, std::sqrt(ss / (n - 1) / n)};
}

}  // namespace langevin
