#pragma once

/// Log-speed random walk under the tilted law, its strictly ascending
/// ladder heights, and the stationary overshoot law.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "langevin/analytic.hpp"
#include "langevin/rng.hpp"
#include "langevin/skeleton.hpp"

namespace langevin {

struct LadderSample {
    std::vector<double> heights;      ///< H_1 < H_2 < ... (running maxima)
    std::vector<std::uint64_t> epochs;  ///< walk indices n_k of the records
    double mu_H_hat = 0.0;            ///< empirical mean ladder increment
};

struct OvershootSample {
    std::vector<double> values;  ///< nonnegative overshoots
    double level = 0.0;          ///< crossed level
};

/// i.i.d. increments ln(c rho) of the log-speed walk, killed or tilted.
inline std::vector<double> walk_increments(RngStream& rng, std::size_t n,
                                           const ModelParams& params, bool tilted) {
    if (n < 1) throw std::invalid_argument("walk_increments: n must be >= 1");
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double v = tilted ? sample_tilted_v(rng, params) : sample_v(rng);
        out[i] = std::log(params.c * v);
    }
    return out;
}

namespace detail {

constexpr std::uint64_t kLadderStepCap = 10000000;

}  // namespace detail

/// Strictly ascending ladder heights of the tilted walk. Positive drift
/// makes every ladder epoch a.s. finite; the step cap trips only on a
/// misconfigured (non-positive-drift) walk.
inline LadderSample ladder_heights(RngStream& rng, std::size_t n_ladders,
                                   const ModelParams& params) {
    if (n_ladders < 1) throw std::invalid_argument("ladder_heights: n_ladders must be >= 1");
    LadderSample out;
    out.heights.reserve(n_ladders);
    out.epochs.reserve(n_ladders);
    double s = 0.0, record = 0.0;
    std::uint64_t n = 0;
    while (out.heights.size() < n_ladders) {
        if (++n > detail::kLadderStepCap)
            throw std::runtime_error("ladder_heights: step cap exceeded (drift misconfigured?)");
        s += std::log(params.c * sample_tilted_v(rng, params));
        if (s > record) {
            record = s;
            out.heights.push_back(s);
            out.epochs.push_back(n);
        }
    }
    double prev = 0.0, sum = 0.0;
    for (double h : out.heights) {
        sum += h - prev;
        prev = h;
    }
    out.mu_H_hat = sum / static_cast<double>(out.heights.size());
    return out;
}

/// Overshoots of the tilted walk over a fixed level, one crossing per
/// replica, each started from 0.
inline OvershootSample overshoot_at_level(RngStream& rng, double level, std::size_t n,
                                          const ModelParams& params) {
    if (n < 1) throw std::invalid_argument("overshoot_at_level: n must be >= 1");
    if (level <= 0.0) throw std::invalid_argument("overshoot_at_level: level must be positive");
    OvershootSample out;
    out.level = level;
    out.values.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        std::uint64_t steps = 0;
        while (s <= level) {
            if (++steps > detail::kLadderStepCap)
                throw std::runtime_error("overshoot_at_level: step cap exceeded");
            s += std::log(params.c * sample_tilted_v(rng, params));
        }
        out.values.push_back(s - level);
    }
    return out;
}

/// Frozen empirical table of ladder increments, used by the stationary
/// overshoot sampler. Built once per parameter set; read-only afterwards.
class LadderTable {
  public:
    LadderTable(const ModelParams& params, std::size_t table_size, std::uint64_t seed)
        : c_(params.c) {
        RngStream rng(seed, 0x1adde7);
        const LadderSample sample = ladder_heights(rng, table_size, params);
        increments_.reserve(table_size);
        double prev = 0.0;
        for (double h : sample.heights) {
            increments_.push_back(h - prev);
            prev = h;
        }
        build_cumulative();
    }

    /// Load from a CSV cache written by save().
    explicit LadderTable(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw std::runtime_error("LadderTable: cannot open " + path);
        std::string header;
        std::getline(in, header);
        if (header.rfind("c,increment", 0) != 0)
            throw std::runtime_error("LadderTable: bad cache header in " + path);
        double c, inc;
        char comma;
        while (in >> c >> comma >> inc) {
            c_ = c;
            increments_.push_back(inc);
        }
        if (increments_.empty()) throw std::runtime_error("LadderTable: empty cache " + path);
        build_cumulative();
    }

    void save(const std::string& path) const {
        std::ofstream out(path);
        if (!out) throw std::runtime_error("LadderTable: cannot write " + path);
        out << "c,increment\n";
        out.precision(17);
        for (double inc : increments_) out << c_ << "," << inc << "\n";
    }

    /// Draw from the stationary overshoot law, density P(H1 > y) / mu_H:
    /// pick a ladder increment size-biased by its value, then scale by an
    /// independent uniform.
    double sample_overshoot(RngStream& rng) const {
        const double target = rng.uniform() * cumulative_.back();
        const auto it = std::lower_bound(cumulative_.begin(), cumulative_.end(), target);
        const std::size_t idx = static_cast<std::size_t>(it - cumulative_.begin());
        return rng.uniform() * increments_[idx];
    }

    double mean_increment() const {
        return cumulative_.back() / static_cast<double>(increments_.size());
    }

    const std::vector<double>& increments() const { return increments_; }
    double elasticity() const { return c_; }

  private:
    void build_cumulative() {
        cumulative_.resize(increments_.size());
        double acc = 0.0;
        for (std::size_t i = 0; i < increments_.size(); ++i) {
            acc += increments_[i];
            cumulative_[i] = acc;
        }
    }

    double c_ = 0.0;
    std::vector<double> increments_;
    std::vector<double> cumulative_;  ///< prefix sums; size-biased sampling + mean
};

}  // namespace langevin
