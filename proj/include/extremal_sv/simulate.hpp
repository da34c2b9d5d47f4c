#pragma once

// Sample-path generation for SV models with Gamma-type log-volatility and
// the empirical estimators used to validate the theory: joint exceedance
// ratios, the Hill/Ledford-Tawn estimator of the coefficient of tail
// dependence, a blocks estimator of the extremal index, and conditional
// exceedance probes.
//
// Replication r draws its log-volatility innovations from stream
// (seed, 2r) and its multiplicative innovations from stream (seed, 2r+1),
// so batches are bit-identical regardless of worker count or scheduling.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <stdexcept>
#include <thread>
#include <vector>

#include "extremal_sv/math.hpp"
#include "extremal_sv/model.hpp"
#include "extremal_sv/rng.hpp"

namespace extremal_sv {

struct SimulationConfig {
    SvModel model;
    long path_length = 0;      // T
    long truncation = -1;      // L; defaults to the coefficient support length
    long replications = 1;     // R
    std::uint64_t seed = 0;
    int workers = 0;           // <= 0: hardware concurrency

    long effective_truncation() const {
        const long support = static_cast<long>(model.coeffs.values.size()) - 1;
        return truncation < 0 ? support : truncation;
    }

    void validate() const {
        model.validate();
        if (path_length < 1) throw std::invalid_argument("simulation: path length must be >= 1");
        if (replications < 1) throw std::invalid_argument("simulation: replications must be >= 1");
        if (effective_truncation() < static_cast<long>(model.coeffs.values.size()) - 1)
            throw std::invalid_argument(
                "simulation: truncation must cover the coefficient support");
    }

    int resolved_workers() const {
        int w = workers;
        if (w <= 0) w = static_cast<int>(std::thread::hardware_concurrency());
        return std::max(1, w);
    }
};

/// Generate one replication into sigma/x (resized to T). The moving average
/// log sigma_t = c * sum_{i=0}^{L} alpha_i eta_{t-i} uses exactly T + L eta
/// draws and T eps draws for every replication.
inline void generate_path(const SimulationConfig& cfg, long replication,
                          std::vector<double>& sigma, std::vector<double>& x) {
    const long T = cfg.path_length;
    const long L = cfg.effective_truncation();
    const auto& coeffs = cfg.model.coeffs.values;
    const double scale = cfg.model.coeffs.scale;
    const auto r = static_cast<std::uint64_t>(replication);

    RandomStream eta_stream(cfg.seed, 2 * r);
    RandomStream eps_stream(cfg.seed, 2 * r + 1);

    std::vector<double> eta(static_cast<std::size_t>(T + L));
    for (auto& e : eta) e = cfg.model.eta.sample(eta_stream);

    sigma.resize(static_cast<std::size_t>(T));
    x.resize(static_cast<std::size_t>(T));
    const long support = static_cast<long>(coeffs.size());
    for (long t = 0; t < T; ++t) {
        // eta[t + L - i] is the innovation at time t - i
        double acc = 0.0;
        for (long i = 0; i < support; ++i) acc += coeffs[static_cast<std::size_t>(i)] *
                                                  eta[static_cast<std::size_t>(t + L - i)];
        const double s = std::exp(scale * acc);
        sigma[static_cast<std::size_t>(t)] = s;
        x[static_cast<std::size_t>(t)] = s * cfg.model.eps.sample(eps_stream);
    }
}

struct SimulationBatch {
    SimulationConfig config;
    std::vector<std::vector<double>> sigma;  // [replication][t]
    std::vector<std::vector<double>> x;
};

/// Run fn(replication, sigma, x) over all replications on a worker pool.
/// Results are collected by replication index, so the reduction order is
/// independent of scheduling.
template <class Result, class Fn>
std::vector<Result> map_replications(const SimulationConfig& cfg, Fn&& fn) {
    cfg.validate();
    const long R = cfg.replications;
    std::vector<Result> results(static_cast<std::size_t>(R));
    std::atomic<long> next{0};
    auto run = [&]() {
        std::vector<double> sigma, x;
        for (;;) {
            const long r = next.fetch_add(1);
            if (r >= R) return;
            generate_path(cfg, r, sigma, x);
            results[static_cast<std::size_t>(r)] = fn(r, sigma, x);
        }
    };
    const int workers = std::min<long>(cfg.resolved_workers(), R);
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(run);
    for (auto& t : pool) t.join();
    return results;
}

inline SimulationBatch simulate_paths(const SimulationConfig& cfg) {
    SimulationBatch batch;
    batch.config = cfg;
    batch.sigma.resize(static_cast<std::size_t>(cfg.replications));
    batch.x.resize(static_cast<std::size_t>(cfg.replications));
    map_replications<int>(cfg, [&](long r, const std::vector<double>& s,
                                   const std::vector<double>& x) {
        batch.sigma[static_cast<std::size_t>(r)] = s;
        batch.x[static_cast<std::size_t>(r)] = x;
        return 0;
    });
    return batch;
}

// ---------------------------------------------------------------------------
// Joint exceedance ratio: within each replication, the threshold x_u is the
// empirical u-quantile of the min-series m_t = min(X_t, X_{t+h}); the ratio
// pools #{X_t > s0 x_u, X_{t+h} > sh x_u} over #{m_t > x_u} across
// replications.

struct RatioEstimate {
    double ratio = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    std::uint64_t numerator = 0;
    std::uint64_t denominator = 0;
    bool low_power = false;  // fewer than 50 exceedances
};

namespace detail {

struct JointCounts {
    std::uint64_t num = 0, den = 0;
};

inline JointCounts joint_exceedance_counts(const std::vector<double>& xs, int h, double s0,
                                           double sh, double u) {
    const std::size_t T = xs.size();
    if (T <= static_cast<std::size_t>(h))
        throw std::invalid_argument("joint exceedance: path shorter than the lag");
    const std::size_t n = T - static_cast<std::size_t>(h);
    std::vector<double> mins(n);
    for (std::size_t t = 0; t < n; ++t)
        mins[t] = std::min(xs[t], xs[t + static_cast<std::size_t>(h)]);
    std::vector<double> work = mins;
    const double xu = empirical_quantile(work, u);
    JointCounts c;
    for (std::size_t t = 0; t < n; ++t) {
        if (mins[t] > xu) ++c.den;
        if (xs[t] > s0 * xu && xs[t + static_cast<std::size_t>(h)] > sh * xu) ++c.num;
    }
    return c;
}

}  // namespace detail

inline RatioEstimate make_ratio_estimate(std::uint64_t num, std::uint64_t den) {
    RatioEstimate est;
    est.numerator = num;
    est.denominator = den;
    est.low_power = den < 50;
    if (den == 0) return est;
    est.ratio = static_cast<double>(num) / static_cast<double>(den);
    if (num <= den) {
        const double hw = proportion_half_width(est.ratio, static_cast<double>(den));
        est.ci_low = est.ratio - hw;
        est.ci_high = est.ratio + hw;
    } else {
        // ratio above 1 (s < 1 corners): Poisson-style width
        const double hw = 1.959963984540054 * est.ratio *
                          std::sqrt(1.0 / static_cast<double>(num) + 1.0 / static_cast<double>(den));
        est.ci_low = est.ratio - hw;
        est.ci_high = est.ratio + hw;
    }
    return est;
}

inline RatioEstimate joint_exceedance_ratio(const SimulationBatch& batch, int h, double s0,
                                            double sh, double u) {
    std::uint64_t num = 0, den = 0;
    for (const auto& xs : batch.x) {
        const auto c = detail::joint_exceedance_counts(xs, h, s0, sh, u);
        num += c.num;
        den += c.den;
    }
    return make_ratio_estimate(num, den);
}

// ---------------------------------------------------------------------------
// Hill estimator of the coefficient of tail dependence on the structure
// variable T_t = min(1/(1 - F(first)), 1/(1 - F(second))) with empirical
// rank transforms (Ledford-Tawn convention).

struct HillEstimate {
    double eta = 0.0;
    double std_error = 0.0;
    std::size_t order_statistics = 0;
};

/// Default number of order statistics: floor(2 sqrt(N)).
inline std::size_t default_hill_k(std::size_t n) {
    return static_cast<std::size_t>(std::floor(2.0 * std::sqrt(static_cast<double>(n))));
}

namespace detail {

// ranks[i] = #{j: v_j <= v_i} computed by sorting; ties get distinct ranks
// in index order, which is immaterial for continuous samples.
inline std::vector<std::size_t> ranks_of(const std::vector<double>& v) {
    std::vector<std::size_t> order(v.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
        return v[x] < v[y];
    });
    std::vector<std::size_t> rank(v.size());
    for (std::size_t pos = 0; pos < order.size(); ++pos) rank[order[pos]] = pos + 1;
    return rank;
}

inline HillEstimate hill_on_structure(std::vector<double>& structure, std::size_t k) {
    const std::size_t n = structure.size();
    if (k == 0 || k >= n / 10)
        throw std::invalid_argument("hill_eta: k must satisfy 0 < k < n/10");
    std::sort(structure.begin(), structure.end());
    const double t_k = structure[n - k - 1];
    double sum = 0.0;
    for (std::size_t i = 0; i < k; ++i) sum += std::log(structure[n - 1 - i] / t_k);
    HillEstimate est;
    est.eta = sum / static_cast<double>(k);
    est.std_error = est.eta / std::sqrt(static_cast<double>(k));
    est.order_statistics = k;
    return est;
}

}  // namespace detail

/// Hill eta from explicit pairs; each margin is rank-transformed separately.
inline HillEstimate hill_eta_pairs(const std::vector<std::pair<double, double>>& pairs,
                                   std::size_t k) {
    const std::size_t n = pairs.size();
    std::vector<double> first(n), second(n);
    for (std::size_t t = 0; t < n; ++t) {
        first[t] = pairs[t].first;
        second[t] = pairs[t].second;
    }
    const auto r1 = detail::ranks_of(first);
    const auto r2 = detail::ranks_of(second);
    const double denom = static_cast<double>(n) + 1.0;
    std::vector<double> structure(n);
    for (std::size_t t = 0; t < n; ++t) {
        const double u1 = denom / (denom - static_cast<double>(r1[t]));
        const double u2 = denom / (denom - static_cast<double>(r2[t]));
        structure[t] = std::min(u1, u2);
    }
    return detail::hill_on_structure(structure, k);
}

/// Hill eta for lag-h pairs of a stationary series. One marginal empirical
/// CDF, estimated from the whole series, transforms both pair coordinates.
inline HillEstimate hill_eta_series(const std::vector<double>& xs, int h, std::size_t k) {
    const std::size_t T = xs.size();
    if (h < 1 || T <= static_cast<std::size_t>(h))
        throw std::invalid_argument("hill_eta: need h >= 1 and a path longer than the lag");
    const auto rank = detail::ranks_of(xs);
    const double denom = static_cast<double>(T) + 1.0;
    const std::size_t n = T - static_cast<std::size_t>(h);
    std::vector<double> structure(n);
    for (std::size_t t = 0; t < n; ++t) {
        const double u1 = denom / (denom - static_cast<double>(rank[t]));
        const double u2 = denom / (denom - static_cast<double>(rank[t + static_cast<std::size_t>(h)]));
        structure[t] = std::min(u1, u2);
    }
    return detail::hill_on_structure(structure, k);
}

/// Batch version: per-replication estimates averaged with independent-
/// replication standard errors.
inline HillEstimate hill_eta(const SimulationBatch& batch, int h, std::size_t k) {
    double sum = 0.0, varsum = 0.0;
    for (const auto& xs : batch.x) {
        const auto est = hill_eta_series(xs, h, k);
        sum += est.eta;
        varsum += est.std_error * est.std_error;
    }
    const double R = static_cast<double>(batch.x.size());
    return {sum / R, std::sqrt(varsum) / R, k};
}

// ---------------------------------------------------------------------------
// Blocks estimator of the extremal index:
//   theta_hat = log(1 - N_b / B) / (b * log(1 - N_e / T)),
// with N_e exceedances of the u-quantile threshold, B complete blocks of
// length b, and N_b blocks containing at least one exceedance. The standard
// error is a delta-method approximation treating N_b and N_e as binomial.

struct ExtremalIndexEstimate {
    double theta = 0.0;
    double std_error = 0.0;
    std::uint64_t exceedances = 0;
    std::uint64_t active_blocks = 0;
    std::uint64_t blocks = 0;
};

inline ExtremalIndexEstimate extremal_index_series(const std::vector<double>& xs, long block_length,
                                                   double u) {
    const auto T = static_cast<long>(xs.size());
    if (block_length < 1 || block_length > T)
        throw std::invalid_argument("extremal_index: block length out of range");
    const long B = T / block_length;
    if (B < 2) throw std::invalid_argument("extremal_index: need at least two blocks");
    std::vector<double> work(xs.begin(), xs.begin() + B * block_length);
    const double threshold = empirical_quantile(work, u);

    std::uint64_t n_exc = 0, n_blocks = 0;
    for (long blk = 0; blk < B; ++blk) {
        bool active = false;
        for (long t = blk * block_length; t < (blk + 1) * block_length; ++t) {
            if (xs[static_cast<std::size_t>(t)] > threshold) {
                ++n_exc;
                active = true;
            }
        }
        if (active) ++n_blocks;
    }
    ExtremalIndexEstimate est;
    est.exceedances = n_exc;
    est.active_blocks = n_blocks;
    est.blocks = static_cast<std::uint64_t>(B);
    if (n_exc == 0 || n_blocks == static_cast<std::uint64_t>(B)) {
        throw std::invalid_argument("extremal_index: degenerate exceedance counts at this u");
    }
    const double q = static_cast<double>(n_blocks) / static_cast<double>(B);
    const double p = static_cast<double>(n_exc) / static_cast<double>(B * block_length);
    est.theta = std::log1p(-q) / (static_cast<double>(block_length) * std::log1p(-p));
    const double dq = 1.0 / ((1.0 - q) * static_cast<double>(block_length) * std::abs(std::log1p(-p)));
    const double dp = est.theta / ((1.0 - p) * std::abs(std::log1p(-p)));
    const double var = dq * dq * q * (1.0 - q) / static_cast<double>(B) +
                       dp * dp * p * (1.0 - p) / static_cast<double>(B * block_length);
    est.std_error = std::sqrt(var);
    return est;
}

inline ExtremalIndexEstimate extremal_index(const SimulationBatch& batch, long block_length,
                                            double u = 0.99) {
    double sum = 0.0, varsum = 0.0;
    ExtremalIndexEstimate pooled;
    for (const auto& s : batch.sigma) {
        const auto est = extremal_index_series(s, block_length, u);
        sum += est.theta;
        varsum += est.std_error * est.std_error;
        pooled.exceedances += est.exceedances;
        pooled.active_blocks += est.active_blocks;
        pooled.blocks += est.blocks;
    }
    const double R = static_cast<double>(batch.sigma.size());
    pooled.theta = sum / R;
    pooled.std_error = std::sqrt(varsum) / R;
    return pooled;
}

// ---------------------------------------------------------------------------
// Conditional exceedance probe P(sigma_h > x_u | sigma_0 > x_u) across a
// grid of quantile levels. Vanishing probes indicate asymptotic
// independence; stabilization at a positive level indicates asymptotic
// dependence (possible only for beta < -1 with two unit coefficients at the
// probed lag).

struct ProbePoint {
    double u = 0.0;
    double probability = 0.0;
    double std_error = 0.0;
    std::uint64_t conditioning = 0;
};

inline std::vector<ProbePoint> conditional_exceedance_probe(const SimulationBatch& batch, int h,
                                                            const std::vector<double>& u_grid) {
    std::vector<ProbePoint> out;
    for (double u : u_grid) {
        std::uint64_t joint = 0, cond = 0;
        for (const auto& s : batch.sigma) {
            const std::size_t T = s.size();
            if (T <= static_cast<std::size_t>(h))
                throw std::invalid_argument("probe: path shorter than the lag");
            std::vector<double> work = s;
            const double xu = empirical_quantile(work, u);
            for (std::size_t t = 0; t + static_cast<std::size_t>(h) < T; ++t) {
                if (s[t] > xu) {
                    ++cond;
                    if (s[t + static_cast<std::size_t>(h)] > xu) ++joint;
                }
            }
        }
        ProbePoint pt;
        pt.u = u;
        pt.conditioning = cond;
        if (cond > 0) {
            pt.probability = static_cast<double>(joint) / static_cast<double>(cond);
            pt.std_error = std::sqrt(
                std::max(pt.probability * (1.0 - pt.probability), 0.0) / static_cast<double>(cond));
        }
        out.push_back(pt);
    }
    return out;
}

/// Lag-1 sample autocorrelation helper (used to validate path generation).
inline double sample_autocorrelation(const std::vector<double>& v, int lag) {
    const std::size_t n = v.size();
    if (n <= static_cast<std::size_t>(lag))
        throw std::invalid_argument("autocorrelation: series shorter than the lag");
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(n);
    double num = 0.0, den = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
        const double d = v[t] - mean;
        den += d * d;
        if (t + static_cast<std::size_t>(lag) < n)
            num += d * (v[t + static_cast<std::size_t>(lag)] - mean);
    }
    return num / den;
}

}  // namespace extremal_sv
