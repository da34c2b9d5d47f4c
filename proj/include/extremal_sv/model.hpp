#pragma once

// Stochastic volatility models with Gamma-type log-volatility:
//
//     X_t = sigma_t * eps_t,     log(sigma_t) = c * sum_i alpha_i eta_{t-i},
//
// where the log-volatility innovations eta have a Weibull-like upper tail
// P(eta > z) ~ K z^beta exp(-z). This header defines the model types, their
// validation, sampling, and the closed-form marginal tail constants
// (beta_hat, K_hat) of the stationary volatility distribution.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "extremal_sv/math.hpp"
#include "extremal_sv/rng.hpp"

namespace extremal_sv {

// ---------------------------------------------------------------------------
// Coefficients of the log-volatility moving average.

struct CoefficientSequence {
    std::vector<double> values;               // alpha_0 .. alpha_n, zero beyond
    std::optional<double> decay_exponent;     // theta > 1, metadata only
    double scale = 1.0;                       // global multiplier c > 0

    void validate() const {
        if (values.empty()) throw std::invalid_argument("coefficients: empty sequence");
        double mx = 0.0;
        for (double a : values) {
            if (!(a >= 0.0 && a <= 1.0))
                throw std::invalid_argument("coefficients: entries must lie in [0,1]");
            mx = std::max(mx, a);
        }
        if (mx != 1.0)
            throw std::invalid_argument("coefficients: the largest entry must equal 1 exactly");
        if (!(scale > 0.0)) throw std::invalid_argument("coefficients: scale must be positive");
        if (decay_exponent && !(*decay_exponent > 1.0))
            throw std::invalid_argument("coefficients: decay exponent must exceed 1");
    }

    /// Indices with alpha_i == 1 (the set Lambda); its size is the
    /// multiplicity k entering the marginal tail constants.
    std::vector<std::size_t> one_indices() const {
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < values.size(); ++i)
            if (values[i] == 1.0) idx.push_back(i);
        return idx;
    }
};

// ---------------------------------------------------------------------------
// Log-volatility innovation families. All have the tail K z^beta exp(-z).

class EtaFamily {
  public:
    enum class Kind { gamma, laplace, custom_tail };

    static EtaFamily gamma(double shape) {
        if (!(shape > 0.0)) throw std::invalid_argument("eta gamma: shape must be positive");
        EtaFamily f;
        f.kind_ = Kind::gamma;
        f.shape_ = shape;
        f.tail_constant_ = std::exp(-std::lgamma(shape));
        f.tail_exponent_ = shape - 1.0;
        return f;
    }

    static EtaFamily laplace() {
        EtaFamily f;
        f.kind_ = Kind::laplace;
        f.tail_constant_ = 0.5;
        f.tail_exponent_ = 0.0;
        return f;
    }

    // Upper tail P(eta > z) = min(1, K z^beta e^{-z}) for z >= z0. Below z0
    // the distribution is completed with a uniform density chosen so the
    // total mass is one and both the CDF and the density are continuous at
    // z0. The fill is one admissible choice of the (unconstrained) lower
    // body, not a canonical one.
    static EtaFamily custom_tail(double tail_constant, double tail_exponent,
                                 std::optional<double> z0 = std::nullopt) {
        if (!(tail_constant > 0.0))
            throw std::invalid_argument("eta custom_tail: K must be positive");
        if (!(std::isfinite(tail_exponent)) || tail_exponent == -1.0)
            throw std::invalid_argument("eta custom_tail: beta must be finite and != -1");
        EtaFamily f;
        f.kind_ = Kind::custom_tail;
        f.tail_constant_ = tail_constant;
        f.tail_exponent_ = tail_exponent;
        f.init_custom(z0);
        return f;
    }

    Kind kind() const { return kind_; }
    double shape() const { return shape_; }
    double tail_constant() const { return tail_constant_; }
    double tail_exponent() const { return tail_exponent_; }
    double tail_start() const { return z0_; }

    bool closed_mgf() const { return kind_ != Kind::custom_tail; }

    /// E exp(s * eta) for s in [0, 1). s = 1 is allowed when beta < -1.
    double mgf(double s) const {
        if (!(s >= 0.0)) throw std::invalid_argument("eta mgf: argument must be >= 0");
        switch (kind_) {
            case Kind::gamma:
                if (s >= 1.0) throw std::invalid_argument("eta mgf: diverges for s >= 1");
                return std::pow(1.0 - s, -shape_);
            case Kind::laplace:
                if (s >= 1.0) throw std::invalid_argument("eta mgf: diverges for s >= 1");
                return 1.0 / ((1.0 - s) * (1.0 + s));
            case Kind::custom_tail:
                return custom_mgf(s);
        }
        throw std::logic_error("eta mgf: unreachable");
    }

    double sample(RandomStream& rs) const {
        switch (kind_) {
            case Kind::gamma:
                return rs.gamma(shape_);
            case Kind::laplace:
                return rs.laplace();
            case Kind::custom_tail:
                return custom_sample(rs.uniform());
        }
        throw std::logic_error("eta sample: unreachable");
    }

    /// Exact survival function. For custom_tail this is the piecewise law
    /// actually sampled; for gamma/laplace the textbook expression.
    double survival(double z) const {
        switch (kind_) {
            case Kind::gamma:
                return z <= 0.0 ? 1.0 : gamma_q(shape_, z);
            case Kind::laplace:
                return z >= 0.0 ? 0.5 * std::exp(-z) : 1.0 - 0.5 * std::exp(z);
            case Kind::custom_tail: {
                if (z >= z0_) return raw_tail(z);
                if (z <= body_lo_) return 1.0;
                return s0_ + (z0_ - z) * body_density_;
            }
        }
        throw std::logic_error("eta survival: unreachable");
    }

  private:
    double raw_tail(double z) const {
        return tail_constant_ * std::pow(z, tail_exponent_) * std::exp(-z);
    }
    // log of raw tail; strictly decreasing for z > max(0, beta)
    double log_raw_tail(double z) const {
        return std::log(tail_constant_) + tail_exponent_ * std::log(z) - z;
    }

    // Largest z with raw_tail(z) = target, searched on the decreasing branch.
    double solve_tail_level(double target) const {
        double lo = std::max(tail_exponent_, 0.0) + 1e-12;
        if (log_raw_tail(lo) < std::log(target))
            throw std::invalid_argument("eta custom_tail: tail level unreachable");
        double hi = lo + 1.0;
        while (log_raw_tail(hi) >= std::log(target)) hi = lo + 2.0 * (hi - lo);
        const double lt = std::log(target);
        for (int i = 0; i < 200; ++i) {
            const double mid = 0.5 * (lo + hi);
            (log_raw_tail(mid) >= lt ? lo : hi) = mid;
            if (hi - lo <= 1e-13 * std::max(1.0, std::abs(mid))) break;
        }
        return 0.5 * (lo + hi);
    }

    void init_custom(std::optional<double> z0) {
        const double beta = tail_exponent_;
        if (z0) {
            if (!(*z0 > 0.0) || !(*z0 > beta))
                throw std::invalid_argument("eta custom_tail: z0 must exceed max(0, beta)");
            z0_ = *z0;
            // If the raw tail still exceeds 1 at z0, mass only lives beyond
            // the crossing point; shift z0 there.
            if (raw_tail(z0_) > 1.0) z0_ = solve_tail_level(1.0);
        } else {
            // The decreasing branch starts at max(beta, 0); its supremum is
            // finite for beta >= 0 and may fall below the default level.
            double target = 0.9;
            if (beta >= 0.0) {
                const double sup = beta > 0.0 ? raw_tail(beta) : tail_constant_;
                if (!(sup >= target)) target = 0.9 * sup;
            }
            z0_ = solve_tail_level(target);
        }
        s0_ = std::min(1.0, raw_tail(z0_));
        const double body_mass = 1.0 - s0_;
        if (body_mass <= 0.0) {
            body_density_ = 0.0;
            body_lo_ = z0_;
        } else {
            // density of the parametric tail at z0; continuous extension
            body_density_ = raw_tail(z0_) * (z0_ - beta) / z0_;
            body_lo_ = z0_ - body_mass / body_density_;
        }
    }

    // Inverse survival: u in (0,1) -> quantile of the piecewise law.
    double custom_sample(double u) const {
        if (u >= s0_) return z0_ - (u - s0_) / body_density_;
        const double lu = std::log(u);
        double lo = z0_;
        double hi = z0_ + 1.0;
        while (log_raw_tail(hi) >= lu) hi = z0_ + 2.0 * (hi - z0_);
        for (int i = 0; i < 200; ++i) {
            const double mid = 0.5 * (lo + hi);
            (log_raw_tail(mid) >= lu ? lo : hi) = mid;
            if (hi - lo <= 1e-12 * std::abs(mid)) break;
        }
        return 0.5 * (lo + hi);
    }

    // E exp(s eta) by quadrature of the stored law; the body is closed form,
    // the tail reduces to int_{t z0}^inf v^beta e^{-v} dv with t = 1 - s.
    double custom_mgf(double s) const {
        const double beta = tail_exponent_;
        if (s > 1.0 || (s == 1.0 && beta >= -1.0))
            throw std::invalid_argument("eta mgf: diverges for this argument");
        double body;
        const double body_mass = 1.0 - s0_;
        if (body_mass <= 0.0) {
            body = 0.0;
        } else if (s == 0.0) {
            body = body_mass;
        } else {
            body = body_density_ * (std::exp(s * z0_) - std::exp(s * body_lo_)) / s;
        }
        if (s == 0.0) return body + s0_;
        if (s == 1.0) {
            // beta < -1 here: int_{z0}^inf z^beta dz = z0^{beta+1} / (-beta-1)
            return body + std::exp(z0_) * s0_ +
                   tail_constant_ * std::pow(z0_, beta + 1.0) / (-beta - 1.0);
        }
        const double t = 1.0 - s;
        const double a = t * z0_;
        const double vmax = std::max({a, 1.0, 2.0 * std::abs(beta)}) + 400.0;
        const double integral =
            integrate([&](double v) { return std::pow(v, beta) * std::exp(-v); }, a, vmax, 1e-12) *
            std::pow(t, -beta - 1.0);
        return body + std::exp(s * z0_) * s0_ + s * tail_constant_ * integral;
    }

    Kind kind_ = Kind::laplace;
    double shape_ = 0.0;
    double tail_constant_ = 0.5;
    double tail_exponent_ = 0.0;
    // custom_tail internals
    double z0_ = 0.0;
    double s0_ = 0.0;
    double body_density_ = 0.0;
    double body_lo_ = 0.0;
};

// ---------------------------------------------------------------------------
// Multiplicative innovations eps.

class EpsFamily {
  public:
    enum class Kind { standard_normal, student_t, symmetric_pareto, positive_constant };

    static EpsFamily standard_normal() { return EpsFamily(Kind::standard_normal, 0, 0); }

    static EpsFamily student_t(double nu) {
        if (!(nu > 1.0)) throw std::invalid_argument("eps student_t: nu must exceed 1");
        return EpsFamily(Kind::student_t, nu, 0);
    }

    static EpsFamily symmetric_pareto(double alpha, double balance) {
        if (!(alpha > 1.0))
            throw std::invalid_argument("eps symmetric_pareto: tail index must exceed 1");
        if (!(balance > 0.0 && balance <= 1.0))
            throw std::invalid_argument("eps symmetric_pareto: balance must lie in (0,1]");
        return EpsFamily(Kind::symmetric_pareto, alpha, balance);
    }

    static EpsFamily positive_constant() { return EpsFamily(Kind::positive_constant, 0, 0); }

    Kind kind() const { return kind_; }
    double nu() const { return param_; }
    double pareto_index() const { return param_; }
    double balance() const { return balance_; }

    /// Largest r with E|eps|^r < inf (inf for normal / constant).
    double moment_bound() const {
        switch (kind_) {
            case Kind::student_t:
            case Kind::symmetric_pareto:
                return param_;
            default:
                return inf;
        }
    }

    double sample(RandomStream& rs) const {
        switch (kind_) {
            case Kind::standard_normal:
                return rs.normal();
            case Kind::student_t:
                return rs.student_t(param_);
            case Kind::symmetric_pareto: {
                const double mag = rs.pareto(param_);
                return rs.uniform() < balance_ ? mag : -mag;
            }
            case Kind::positive_constant:
                return 1.0;
        }
        throw std::logic_error("eps sample: unreachable");
    }

    double mean_abs() const {
        switch (kind_) {
            case Kind::standard_normal:
                return std::sqrt(2.0 / std::numbers::pi);
            case Kind::student_t: {
                const double nu = param_;
                return 2.0 * std::sqrt(nu) * std::exp(std::lgamma(0.5 * (nu + 1.0))) /
                       (std::sqrt(std::numbers::pi) * (nu - 1.0) * std::exp(std::lgamma(0.5 * nu)));
            }
            case Kind::symmetric_pareto:
                return param_ / (param_ - 1.0);
            case Kind::positive_constant:
                return 1.0;
        }
        throw std::logic_error("eps mean_abs: unreachable");
    }

    double mean_positive_part() const {
        switch (kind_) {
            case Kind::symmetric_pareto:
                return balance_ * param_ / (param_ - 1.0);
            case Kind::positive_constant:
                return 1.0;
            default:
                return 0.5 * mean_abs();
        }
    }

  private:
    EpsFamily(Kind k, double param, double balance) : kind_(k), param_(param), balance_(balance) {}

    Kind kind_;
    double param_;
    double balance_;
};

// ---------------------------------------------------------------------------

struct SvModel {
    CoefficientSequence coeffs;
    EtaFamily eta = EtaFamily::laplace();
    EpsFamily eps = EpsFamily::standard_normal();

    void validate() const { coeffs.validate(); }

    /// Multiplicity of coefficients equal to one.
    int one_multiplicity() const { return static_cast<int>(coeffs.one_indices().size()); }
};

struct MarginalTailConstants {
    double beta_hat = 0.0;
    double k_hat = 0.0;
    int k = 0;
};

/// Constants of the stationary log-volatility tail
/// P(log sigma > z) ~ K_hat z^{beta_hat} e^{-z}, on the unscaled (c = 1)
/// log scale. Requires every coefficient below 1 to have a finite
/// eta-MGF there, which holds for all supported families.
inline MarginalTailConstants tail_constants(const SvModel& model) {
    model.validate();
    const auto ones = model.coeffs.one_indices();
    const int k = static_cast<int>(ones.size());
    const double beta = model.eta.tail_exponent();
    const double tail_k = model.eta.tail_constant();

    double partial_mgf = 1.0;  // E exp(sum over alpha_n < 1 of alpha_n eta_n)
    for (double a : model.coeffs.values) {
        if (a == 1.0 || a == 0.0) continue;
        partial_mgf *= model.eta.mgf(a);
    }

    MarginalTailConstants out;
    out.k = k;
    if (beta > -1.0) {
        out.beta_hat = k * beta + k - 1.0;
        out.k_hat = std::pow(tail_k, k) * std::pow(std::tgamma(beta + 1.0), k) /
                    std::tgamma(k * (beta + 1.0)) * partial_mgf;
    } else {
        out.beta_hat = beta;
        out.k_hat = k * tail_k * std::pow(model.eta.mgf(1.0), k - 1) * partial_mgf;
    }
    return out;
}

/// Asymptotic approximation of P(sigma_0 > x) for large x (not an exact
/// probability): K_hat (log x)^{beta_hat} / x.
inline double marginal_survival_asymptote(const SvModel& model, double x) {
    if (!(x > std::numbers::e))
        throw std::invalid_argument("marginal_survival_asymptote: requires x > e");
    const auto c = tail_constants(model);
    return c.k_hat * std::pow(std::log(x), c.beta_hat) / x;
}

/// Frechet norming constants a_n = K_hat n (log n)^{beta_hat}.
inline double normalizing_constant(const SvModel& model, long n) {
    if (n < 2) throw std::invalid_argument("normalizing_constant: requires n >= 2");
    const auto c = tail_constants(model);
    return c.k_hat * static_cast<double>(n) * std::pow(std::log(static_cast<double>(n)), c.beta_hat);
}

// ---------------------------------------------------------------------------
// JSON wire format. Unknown fields are rejected everywhere.

namespace detail {

inline void require_keys(const nlohmann::json& j, std::initializer_list<const char*> allowed,
                         const char* what) {
    for (const auto& [key, value] : j.items()) {
        bool ok = false;
        for (const char* a : allowed)
            if (key == a) ok = true;
        if (!ok)
            throw std::invalid_argument(std::string(what) + ": unknown field '" + key + "'");
    }
}

inline double require_number(const nlohmann::json& j, const char* key, const char* what) {
    if (!j.contains(key) || !j.at(key).is_number())
        throw std::invalid_argument(std::string(what) + ": missing numeric field '" + key + "'");
    return j.at(key).get<double>();
}

}  // namespace detail

inline EtaFamily parse_eta(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("kind") || !j.at("kind").is_string())
        throw std::invalid_argument("eta: expected object with string field 'kind'");
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "gamma") {
        detail::require_keys(j, {"kind", "shape"}, "eta");
        return EtaFamily::gamma(detail::require_number(j, "shape", "eta"));
    }
    if (kind == "laplace") {
        detail::require_keys(j, {"kind"}, "eta");
        return EtaFamily::laplace();
    }
    if (kind == "custom_tail") {
        detail::require_keys(j, {"kind", "K", "beta", "z0"}, "eta");
        std::optional<double> z0;
        if (j.contains("z0")) z0 = detail::require_number(j, "z0", "eta");
        return EtaFamily::custom_tail(detail::require_number(j, "K", "eta"),
                                      detail::require_number(j, "beta", "eta"), z0);
    }
    throw std::invalid_argument("eta: unknown kind '" + kind + "'");
}

inline EpsFamily parse_eps(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("kind") || !j.at("kind").is_string())
        throw std::invalid_argument("eps: expected object with string field 'kind'");
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "standard_normal") {
        detail::require_keys(j, {"kind"}, "eps");
        return EpsFamily::standard_normal();
    }
    if (kind == "student_t") {
        detail::require_keys(j, {"kind", "nu"}, "eps");
        return EpsFamily::student_t(detail::require_number(j, "nu", "eps"));
    }
    if (kind == "symmetric_pareto") {
        detail::require_keys(j, {"kind", "alpha", "p"}, "eps");
        return EpsFamily::symmetric_pareto(detail::require_number(j, "alpha", "eps"),
                                           detail::require_number(j, "p", "eps"));
    }
    if (kind == "positive_constant") {
        detail::require_keys(j, {"kind"}, "eps");
        return EpsFamily::positive_constant();
    }
    throw std::invalid_argument("eps: unknown kind '" + kind + "'");
}

inline SvModel parse_model(const nlohmann::json& j) {
    if (!j.is_object()) throw std::invalid_argument("model: expected JSON object");
    detail::require_keys(j, {"coeffs", "eta", "eps", "scale"}, "model");
    if (!j.contains("coeffs") || !j.at("coeffs").is_array())
        throw std::invalid_argument("model: missing array field 'coeffs'");
    SvModel m;
    m.coeffs.values = j.at("coeffs").get<std::vector<double>>();
    if (j.contains("scale")) m.coeffs.scale = detail::require_number(j, "scale", "model");
    if (j.contains("eta")) m.eta = parse_eta(j.at("eta"));
    if (j.contains("eps")) m.eps = parse_eps(j.at("eps"));
    m.validate();
    return m;
}

inline nlohmann::json to_json(const EtaFamily& eta) {
    switch (eta.kind()) {
        case EtaFamily::Kind::gamma:
            return {{"kind", "gamma"}, {"shape", eta.shape()}};
        case EtaFamily::Kind::laplace:
            return {{"kind", "laplace"}};
        case EtaFamily::Kind::custom_tail:
            return {{"kind", "custom_tail"},
                    {"K", eta.tail_constant()},
                    {"beta", eta.tail_exponent()},
                    {"z0", eta.tail_start()}};
    }
    throw std::logic_error("eta to_json: unreachable");
}

inline nlohmann::json to_json(const EpsFamily& eps) {
    switch (eps.kind()) {
        case EpsFamily::Kind::standard_normal:
            return {{"kind", "standard_normal"}};
        case EpsFamily::Kind::student_t:
            return {{"kind", "student_t"}, {"nu", eps.nu()}};
        case EpsFamily::Kind::symmetric_pareto:
            return {{"kind", "symmetric_pareto"},
                    {"alpha", eps.pareto_index()},
                    {"p", eps.balance()}};
        case EpsFamily::Kind::positive_constant:
            return {{"kind", "positive_constant"}};
    }
    throw std::logic_error("eps to_json: unreachable");
}

inline nlohmann::json to_json(const SvModel& m) {
    return {{"coeffs", m.coeffs.values},
            {"eta", to_json(m.eta)},
            {"eps", to_json(m.eps)},
            {"scale", m.coeffs.scale}};
}

}  // namespace extremal_sv
