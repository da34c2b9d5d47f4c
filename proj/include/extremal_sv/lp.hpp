#pragma once

// Exact solver for the tail-dependence linear programs
//
//     minimize   sum_i kappa_i
//     subject to sum_i a_i kappa_i >= 1,  sum_i b_i kappa_i >= 1,  kappa >= 0.
//
// With two coupling constraints every vertex of the feasible set has at
// most two positive entries, so the optimum is found by enumerating all
// feasible singletons and 2x2 basic solutions. The enumeration is exact,
// reports the dual certificate for interior pair solutions, and refuses to
// pick a winner when two distinct supports tie.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "extremal_sv/model.hpp"

namespace extremal_sv {

struct TailLp {
    std::vector<double> a;
    std::vector<double> b;

    void validate() const {
        if (a.size() != b.size() || a.empty())
            throw std::invalid_argument("tail LP: rows must be nonempty and of equal length");
        double ma = 0.0, mb = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) {
            if (!(a[i] >= 0.0) || !(b[i] >= 0.0))
                throw std::invalid_argument("tail LP: coefficients must be nonnegative");
            ma = std::max(ma, a[i]);
            mb = std::max(mb, b[i]);
        }
        if (!(ma > 0.0) || !(mb > 0.0))
            throw std::invalid_argument("tail LP: each constraint row needs a positive entry");
    }

    std::size_t size() const { return a.size(); }
};

enum class LpCase { two_factor, one_factor, non_unique };

inline const char* to_string(LpCase c) {
    switch (c) {
        case LpCase::two_factor: return "two_factor";
        case LpCase::one_factor: return "one_factor";
        case LpCase::non_unique: return "non_unique";
    }
    return "?";
}

struct LpSolution {
    std::vector<double> kappa;
    double objective = 0.0;
    std::vector<std::size_t> support;  // indices with kappa_i > 0, ascending
    bool unique = true;
    LpCase case_tag = LpCase::one_factor;
    std::optional<std::pair<double, double>> dual;   // interior pair solutions only
    std::vector<std::vector<std::size_t>> tied_supports;  // populated when non-unique
};

namespace detail {

struct BasicSolution {
    std::vector<std::size_t> support;
    std::vector<double> values;  // kappa on the support
    double objective;
};

// Relative objective tolerance under which two distinct supports count as a
// tie, and the determinant guard for 2x2 bases.
inline constexpr double kTieTolerance = 1e-9;
inline constexpr double kDetTolerance = 1e-14;

}  // namespace detail

inline LpSolution solve_lp(const TailLp& lp) {
    lp.validate();
    const std::size_t n = lp.size();
    std::vector<detail::BasicSolution> candidates;

    // Singletons: one variable must satisfy both constraints.
    for (std::size_t i = 0; i < n; ++i) {
        const double lo = std::min(lp.a[i], lp.b[i]);
        if (lo > 0.0) candidates.push_back({{i}, {1.0 / lo}, 1.0 / lo});
    }

    // Pairs: both constraints active, Cramer on the 2x2 system.
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double det = lp.a[i] * lp.b[j] - lp.a[j] * lp.b[i];
            if (std::abs(det) <= detail::kDetTolerance) continue;
            const double ki = (lp.b[j] - lp.a[j]) / det;
            const double kj = (lp.a[i] - lp.b[i]) / det;
            if (ki < 0.0 || kj < 0.0) continue;
            // Zero entries drop out of the support; a degenerate pair with
            // kappa_j = 0 keeps both constraints tight at kappa_i alone.
            detail::BasicSolution cand;
            if (ki > 0.0) {
                cand.support.push_back(i);
                cand.values.push_back(ki);
            }
            if (kj > 0.0) {
                cand.support.push_back(j);
                cand.values.push_back(kj);
            }
            cand.objective = ki + kj;
            candidates.push_back(std::move(cand));
        }
    }

    if (candidates.empty())
        throw std::logic_error("tail LP: no basic feasible solution (violated invariant)");

    const auto best = std::min_element(candidates.begin(), candidates.end(),
                                       [](const auto& x, const auto& y) {
                                           return x.objective < y.objective;
                                       });
    const double zstar = best->objective;

    // Optimal vertices up to the tie tolerance, deduplicated by support.
    std::vector<const detail::BasicSolution*> optimal;
    for (const auto& c : candidates) {
        if (c.objective > zstar * (1.0 + detail::kTieTolerance)) continue;
        const bool seen = std::any_of(optimal.begin(), optimal.end(), [&](const auto* o) {
            return o->support == c.support;
        });
        if (!seen) optimal.push_back(&c);
    }

    LpSolution out;
    out.kappa.assign(n, 0.0);
    const auto& winner = **std::min_element(
        optimal.begin(), optimal.end(),
        [](const auto* x, const auto* y) { return x->objective < y->objective; });
    for (std::size_t k = 0; k < winner.support.size(); ++k)
        out.kappa[winner.support[k]] = winner.values[k];
    out.objective = winner.objective;
    out.support = winner.support;

    if (optimal.size() > 1) {
        out.unique = false;
        out.case_tag = LpCase::non_unique;
        for (const auto* o : optimal) out.tied_supports.push_back(o->support);
        std::sort(out.tied_supports.begin(), out.tied_supports.end());
        return out;
    }

    out.unique = true;
    if (out.support.size() == 1) {
        out.case_tag = LpCase::one_factor;
        return out;
    }

    out.case_tag = LpCase::two_factor;
    // Dual multipliers of the two coupling constraints, from complementary
    // slackness on the support pair. Order the pair so both come out >= 0.
    std::size_t i = out.support[0], j = out.support[1];
    if (lp.a[i] < lp.a[j]) std::swap(i, j);
    const double det = lp.a[i] * lp.b[j] - lp.a[j] * lp.b[i];
    out.dual = std::make_pair((lp.b[j] - lp.b[i]) / det, (lp.a[i] - lp.a[j]) / det);
    return out;
}

// ---------------------------------------------------------------------------
// Reduction of the (conceptually infinite) program to a finite one. Indices
// whose coefficients in both rows are at most 1/(2/max(a) + 2/max(b)) cannot
// carry weight in any optimal solution, so the program may be truncated at
// the last index above that threshold. Inputs are finite lists; entries
// beyond the list are exactly zero by the data contract, hence always
// droppable.

struct LpReduction {
    TailLp lp;              // rows truncated to indices 0..n
    std::size_t n;          // last retained index
    double threshold;
};

inline LpReduction reduce_infinite(const TailLp& full) {
    full.validate();
    const double amax = *std::max_element(full.a.begin(), full.a.end());
    const double bmax = *std::max_element(full.b.begin(), full.b.end());
    const double threshold = 1.0 / (2.0 / amax + 2.0 / bmax);
    std::size_t n = 0;
    for (std::size_t i = 0; i < full.size(); ++i)
        if (std::max(full.a[i], full.b[i]) > threshold) n = i;
    LpReduction red;
    red.n = n;
    red.threshold = threshold;
    red.lp.a.assign(full.a.begin(), full.a.begin() + static_cast<std::ptrdiff_t>(n + 1));
    red.lp.b.assign(full.b.begin(), full.b.begin() + static_cast<std::ptrdiff_t>(n + 1));
    return red;
}

// ---------------------------------------------------------------------------
// The lag-h program of an SV model: row a_i = alpha_{i-h} (zero for i < h),
// row b_i = alpha_i, for i = 0..len+h-1.

inline TailLp sv_lag_lp(const CoefficientSequence& coeffs, int lag) {
    coeffs.validate();
    if (lag < 1) throw std::invalid_argument("sv_lag_lp: lag must be >= 1");
    const std::size_t len = coeffs.values.size();
    const std::size_t h = static_cast<std::size_t>(lag);
    TailLp lp;
    lp.a.assign(len + h, 0.0);
    lp.b.assign(len + h, 0.0);
    for (std::size_t i = 0; i < len; ++i) {
        lp.b[i] = coeffs.values[i];
        lp.a[i + h] = coeffs.values[i];
    }
    return lp;
}

// ---------------------------------------------------------------------------
// Coefficient of tail dependence per lag: eta_h = 1 / (optimal objective of
// the lag-h program). The objective (hence eta_h) is well defined even when
// the optimal vertex is not unique; non-unique lags are flagged and no limit
// measure is attached to them downstream.

struct LagDependence {
    int lag = 0;
    double eta = 0.0;
    double kappa_sum = 0.0;
    LpCase case_tag = LpCase::one_factor;
    bool unique = true;
    std::vector<std::size_t> support;
    LpSolution solution;
    TailLp reduced_lp;
};

struct TailDependenceProfile {
    std::vector<LagDependence> lags;
};

inline LagDependence analyze_lag(const CoefficientSequence& coeffs, int lag) {
    const auto red = reduce_infinite(sv_lag_lp(coeffs, lag));
    auto sol = solve_lp(red.lp);
    LagDependence d;
    d.lag = lag;
    d.kappa_sum = sol.objective;
    d.eta = 1.0 / sol.objective;
    d.case_tag = sol.case_tag;
    d.unique = sol.unique;
    d.support = sol.support;
    d.reduced_lp = red.lp;
    d.solution = std::move(sol);
    return d;
}

inline TailDependenceProfile eta_profile(const CoefficientSequence& coeffs,
                                         const std::vector<int>& lags) {
    TailDependenceProfile profile;
    profile.lags.reserve(lags.size());
    for (int h : lags) profile.lags.push_back(analyze_lag(coeffs, h));
    return profile;
}

// ---------------------------------------------------------------------------
// Inverse problem: coefficients realizing a prescribed dependence profile
// (eta_1, ..., eta_m) in [1/2, 1]^m. Nonzeros sit at 2m(i-1) (value 1) and
// 2m(i-1)+i (value 2 - 1/eta_i); the spacing keeps the lag programs of
// different targets from interacting.

inline CoefficientSequence construct_from_eta(const std::vector<double>& targets) {
    if (targets.empty()) throw std::invalid_argument("construct_from_eta: empty target vector");
    for (double e : targets)
        if (!(e >= 0.5 && e <= 1.0))
            throw std::invalid_argument("construct_from_eta: targets must lie in [1/2, 1]");
    const std::size_t m = targets.size();
    CoefficientSequence coeffs;
    coeffs.values.assign(m * (2 * m - 1) + 1, 0.0);
    for (std::size_t i = 1; i <= m; ++i) {
        const std::size_t base = 2 * m * (i - 1);
        coeffs.values[base] = 1.0;
        coeffs.values[base + i] = 2.0 - 1.0 / targets[i - 1];
    }
    coeffs.validate();
    return coeffs;
}

// ---------------------------------------------------------------------------
// JSON wire formats for the lp-solve CLI.

inline TailLp parse_tail_lp(const nlohmann::json& j) {
    if (!j.is_object()) throw std::invalid_argument("tail LP: expected JSON object");
    detail::require_keys(j, {"a", "b"}, "tail LP");
    if (!j.contains("a") || !j.at("a").is_array() || !j.contains("b") || !j.at("b").is_array())
        throw std::invalid_argument("tail LP: expected array fields 'a' and 'b'");
    TailLp lp;
    lp.a = j.at("a").get<std::vector<double>>();
    lp.b = j.at("b").get<std::vector<double>>();
    lp.validate();
    return lp;
}

inline nlohmann::json to_json(const TailLp& lp) { return {{"a", lp.a}, {"b", lp.b}}; }

inline nlohmann::json to_json(const LpSolution& sol) {
    nlohmann::json j{{"kappa", sol.kappa},
                     {"objective", sol.objective},
                     {"support", sol.support},
                     {"unique", sol.unique},
                     {"case", to_string(sol.case_tag)}};
    if (sol.dual) j["dual"] = {sol.dual->first, sol.dual->second};
    if (!sol.tied_supports.empty()) j["tied_supports"] = sol.tied_supports;
    return j;
}

}  // namespace extremal_sv
