#pragma once

// Limit measures and constants attached to a solved tail LP: the closed-form
// rectangle law of interior pair solutions, the prefactor D entering the raw
// joint-exceedance limit, and the min-expectation ratio of one-factor
// solutions. All limit measures are normalized to value 1 at the corner
// (1, 1), matching the normalization by P(min > x).

#include <algorithm>
#include <atomic>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <thread>
#include <vector>

#include "extremal_sv/lp.hpp"
#include "extremal_sv/math.hpp"
#include "extremal_sv/model.hpp"
#include "extremal_sv/rng.hpp"

namespace extremal_sv {

namespace detail {

struct CanonicalPair {
    std::size_t i, j;  // ordered so a_i > a_j and b_j > b_i
    double det;        // a_i b_j - a_j b_i > 0 under that ordering
};

inline CanonicalPair canonical_pair(const LpSolution& sol, const TailLp& lp) {
    if (sol.case_tag != LpCase::two_factor || !sol.unique)
        throw std::invalid_argument("limit measure: requires a unique two-factor solution");
    std::size_t i = sol.support[0], j = sol.support[1];
    if (lp.a[i] < lp.a[j]) std::swap(i, j);
    const double det = lp.a[i] * lp.b[j] - lp.a[j] * lp.b[i];
    if (!(det > 0.0))
        throw std::invalid_argument("limit measure: degenerate support pair");
    return {i, j, det};
}

}  // namespace detail

/// Measure of the rectangle (s0, inf) x (s1, inf) under the limit law of a
/// unique two-factor solution: s0^{(b_i - b_j)/det} * s1^{(a_j - a_i)/det}.
/// Both exponents are negative and they sum to -(kappa_i + kappa_j).
inline double rectangle_measure(const LpSolution& sol, const TailLp& lp, double s0, double s1) {
    if (!(s0 > 0.0) || !(s1 > 0.0))
        throw std::invalid_argument("rectangle_measure: corner must be positive");
    const auto p = detail::canonical_pair(sol, lp);
    const double e0 = (lp.b[p.i] - lp.b[p.j]) / p.det;
    const double e1 = (lp.a[p.j] - lp.a[p.i]) / p.det;
    return std::pow(s0, e0) * std::pow(s1, e1);
}

/// Exponents (p, q) of the rectangle law s0^p s1^q.
inline std::pair<double, double> rectangle_exponents(const LpSolution& sol, const TailLp& lp) {
    const auto p = detail::canonical_pair(sol, lp);
    return {(lp.b[p.i] - lp.b[p.j]) / p.det, (lp.a[p.j] - lp.a[p.i]) / p.det};
}

// ---------------------------------------------------------------------------
// The constant D of the raw limit
//   P(Y0 > s0 x, Y1 > s1 x) / (P(X_i > x^{kappa_i}) P(X_j > x^{kappa_j})).
// Residual factors m outside the support contribute the moment
// E(X^{e_m}) with e_m = a_m k1 + b_m k2 < 1 (strict dual slack), where
// (k1, k2) is the dual pair.

struct ResidualFactor {
    enum class Kind { exp_eta, pareto };
    Kind kind = Kind::pareto;
    std::optional<EtaFamily> eta;  // factors X = e^eta
    double pareto_index = 1.0;     // factors X ~ Pareto(index) on [1, inf)

    static ResidualFactor exp_of(const EtaFamily& e) {
        ResidualFactor f;
        f.kind = Kind::exp_eta;
        f.eta = e;
        return f;
    }
    static ResidualFactor pareto(double index) {
        if (!(index > 0.0)) throw std::invalid_argument("residual factor: index must be positive");
        ResidualFactor f;
        f.kind = Kind::pareto;
        f.pareto_index = index;
        return f;
    }

    bool closed_moment() const { return kind == Kind::pareto || eta->closed_mgf(); }

    /// E(X^e), closed form; requires e < tail index (checked by caller as e < 1).
    double moment(double e) const {
        if (kind == Kind::pareto) {
            if (!(e < pareto_index))
                throw std::invalid_argument("residual factor: moment diverges");
            return pareto_index / (pareto_index - e);
        }
        return eta->mgf(e);
    }

    double sample_power(RandomStream& rs, double e) const {
        if (kind == Kind::pareto) return std::pow(rs.pareto(pareto_index), e);
        return std::exp(e * eta->sample(rs));
    }
};

inline MonteCarloValue constant_D(const LpSolution& sol, const TailLp& lp,
                                  const ResidualFactor& factor, std::uint64_t mc_samples = 0,
                                  std::uint64_t seed = 0) {
    const auto p = detail::canonical_pair(sol, lp);
    if (!sol.dual) throw std::invalid_argument("constant_D: missing dual certificate");
    const double k1 = sol.dual->first, k2 = sol.dual->second;
    const double prefactor = p.det / ((lp.a[p.i] - lp.a[p.j]) * (lp.b[p.j] - lp.b[p.i]));

    std::vector<double> exponents;
    for (std::size_t m = 0; m < lp.size(); ++m) {
        if (m == p.i || m == p.j) continue;
        if (lp.a[m] == 0.0 && lp.b[m] == 0.0) continue;  // exact unit factor
        const double e = lp.a[m] * k1 + lp.b[m] * k2;
        if (e >= 1.0)
            throw std::invalid_argument("constant_D: residual exponent >= 1, moment diverges");
        if (e != 0.0) exponents.push_back(e);
    }

    if (exponents.empty()) return {prefactor, 0.0, 0};

    if (factor.closed_moment()) {
        double prod = 1.0;
        for (double e : exponents) prod *= factor.moment(e);
        return {prefactor * prod, 0.0, 0};
    }

    if (mc_samples == 0)
        throw std::invalid_argument("constant_D: sampling required for this factor family");
    MeanAccumulator acc;
    RandomStream rs(seed, 0);
    for (std::uint64_t s = 0; s < mc_samples; ++s) {
        double v = 1.0;
        for (double e : exponents) v *= factor.sample_power(rs, e);
        acc.add(v);
    }
    return {prefactor * acc.mean(), prefactor * acc.std_error(), acc.n};
}

// ---------------------------------------------------------------------------
// One-factor limit: the ratio of min-expectations of Theorem-type case (ii),
// evaluated by common-random-number Monte Carlo. For the SV lag-h program
// with support {i} (requires alpha_i = alpha_{i-h}), the numerator draws
//
//   min( s0^{-1} eps0 * prod_{j >= h, j != i} e^{eta_j alpha_{j-h}},
//        sh^{-1} epsh * prod_{j != i}        e^{eta_j alpha_j} )^{1/alpha_i}
//
// and the denominator is the same expression at s = (1, 1) on the same
// draws, which makes the ratio exactly 1 at the normalization corner and
// exactly homogeneous under common scaling of (s0, sh).

struct OneFactorSettings {
    std::uint64_t mc_samples = 1'000'000;
    std::uint64_t seed = 0;
    int workers = 0;
};

inline MonteCarloValue one_factor_ratio(const CoefficientSequence& coeffs, int lag,
                                        std::size_t support_index, double s0, double sh,
                                        const EtaFamily& eta,
                                        const std::optional<EpsFamily>& eps,
                                        const OneFactorSettings& settings = {}) {
    coeffs.validate();
    if (!(s0 > 0.0) || !(sh > 0.0))
        throw std::invalid_argument("one_factor_ratio: corner must be positive");
    const auto lp = sv_lag_lp(coeffs, lag);
    const std::size_t i = support_index;
    if (i >= lp.size() || lp.a[i] != lp.b[i] || lp.a[i] == 0.0)
        throw std::invalid_argument(
            "one_factor_ratio: support must satisfy alpha_i = alpha_{i-h} > 0");
    const double inv_power = 1.0 / lp.b[i];

    // factors j != i with a nonzero exponent in either product
    std::vector<std::size_t> live;
    for (std::size_t j = 0; j < lp.size(); ++j)
        if (j != i && (lp.a[j] > 0.0 || lp.b[j] > 0.0)) live.push_back(j);

    constexpr std::uint64_t chunk = 1 << 14;
    const std::uint64_t nchunks = (settings.mc_samples + chunk - 1) / chunk;
    struct Partial {
        MeanAccumulator num, den;
        double cross = 0.0;
    };
    std::vector<Partial> partial(nchunks);

    int workers = settings.workers;
    if (workers <= 0) workers = static_cast<int>(std::thread::hardware_concurrency());
    workers = std::max(1, std::min<int>(workers, static_cast<int>(nchunks)));

    std::atomic<std::uint64_t> next{0};
    auto run = [&]() {
        for (;;) {
            const std::uint64_t c = next.fetch_add(1);
            if (c >= nchunks) return;
            RandomStream rs(settings.seed, c);
            Partial part;
            const std::uint64_t lo = c * chunk;
            const std::uint64_t hi = std::min(lo + chunk, settings.mc_samples);
            for (std::uint64_t s = lo; s < hi; ++s) {
                double log0 = 0.0, logh = 0.0;
                for (std::size_t j : live) {
                    const double e = eta.sample(rs);
                    log0 += lp.a[j] * e;
                    logh += lp.b[j] * e;
                }
                double f0 = std::exp(log0), fh = std::exp(logh);
                if (eps) {
                    f0 *= std::max(eps->sample(rs), 0.0);
                    fh *= std::max(eps->sample(rs), 0.0);
                }
                const double num = std::pow(std::min(f0 / s0, fh / sh), inv_power);
                const double den = std::pow(std::min(f0, fh), inv_power);
                part.num.add(num);
                part.den.add(den);
                part.cross += num * den;
            }
            partial[c] = part;
        }
    };
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(run);
    for (auto& t : pool) t.join();

    Partial total;
    for (const auto& p : partial) {
        total.num.merge(p.num);
        total.den.merge(p.den);
        total.cross += p.cross;
    }
    const double n = static_cast<double>(total.num.n);
    const double mn = total.num.mean(), md = total.den.mean();
    if (!(md > 0.0)) throw std::runtime_error("one_factor_ratio: degenerate denominator");
    const double ratio = mn / md;
    // delta-method standard error of a ratio of correlated means
    const double cov = (total.cross - n * mn * md) / std::max(n - 1.0, 1.0);
    const double var = ratio * ratio *
                       (total.num.variance() / (mn * mn) + total.den.variance() / (md * md) -
                        2.0 * cov / (mn * md)) /
                       n;
    return {ratio, std::sqrt(std::max(var, 0.0)), total.num.n};
}

}  // namespace extremal_sv
