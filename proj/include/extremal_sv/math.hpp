#pragma once

// Small numeric helpers shared across the library: adaptive quadrature,
// empirical quantiles, running moments and a stable hash for provenance.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <functional>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace extremal_sv {

inline constexpr double inf = std::numeric_limits<double>::infinity();

namespace detail {

template <class F>
double simpson(F&& f, double a, double b, double fa, double fm, double fb) {
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

template <class F>
double adaptive_simpson_rec(F&& f, double a, double b, double fa, double fm, double fb,
                            double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = simpson(f, a, m, fa, flm, fm);
    const double right = simpson(f, m, b, fm, frm, fb);
    const double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol) {
        return left + right + delta / 15.0;
    }
    return adaptive_simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           adaptive_simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace detail

/// Adaptive Simpson quadrature of f over [a, b] to absolute tolerance tol.
template <class F>
double integrate(F&& f, double a, double b, double tol = 1e-10) {
    if (!(a < b)) return 0.0;
    const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    const double whole = detail::simpson(f, a, b, fa, fm, fb);
    return detail::adaptive_simpson_rec(f, a, b, fa, fm, fb, whole, tol, 60);
}

/// k-th smallest with k = floor(u * n), clamped to [0, n-1]. Reorders xs.
inline double empirical_quantile(std::vector<double>& xs, double u) {
    if (xs.empty()) throw std::invalid_argument("empirical_quantile: empty sample");
    const auto n = static_cast<std::ptrdiff_t>(xs.size());
    auto k = static_cast<std::ptrdiff_t>(std::floor(u * static_cast<double>(n)));
    k = std::clamp<std::ptrdiff_t>(k, 0, n - 1);
    std::nth_element(xs.begin(), xs.begin() + k, xs.end());
    return xs[k];
}

/// Mean / standard error accumulator for Monte Carlo sums.
struct MeanAccumulator {
    double sum = 0.0;
    double sumsq = 0.0;
    std::uint64_t n = 0;

    void add(double v) {
        sum += v;
        sumsq += v * v;
        ++n;
    }
    void merge(const MeanAccumulator& o) {
        sum += o.sum;
        sumsq += o.sumsq;
        n += o.n;
    }
    double mean() const { return n ? sum / static_cast<double>(n) : 0.0; }
    double variance() const {
        if (n < 2) return 0.0;
        const double m = mean();
        const double v = (sumsq - static_cast<double>(n) * m * m) / static_cast<double>(n - 1);
        return std::max(v, 0.0);
    }
    double std_error() const { return n ? std::sqrt(variance() / static_cast<double>(n)) : 0.0; }
};

/// A Monte Carlo estimate with its standard error.
struct MonteCarloValue {
    double value = 0.0;
    double std_error = 0.0;
    std::uint64_t samples = 0;
};

/// Normal-approximation confidence half-width for a binomial proportion.
inline double proportion_half_width(double p, double n, double z = 1.959963984540054) {
    if (n <= 0.0) return inf;
    return z * std::sqrt(std::max(p * (1.0 - p), 0.0) / n);
}

/// Ordinary least squares slope of y on x.
inline double ols_slope(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("ols_slope: bad input");
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    const double denom = n * sxx - sx * sx;
    if (denom == 0.0) throw std::invalid_argument("ols_slope: degenerate abscissae");
    return (n * sxy - sx * sy) / denom;
}

/// Regularized upper incomplete gamma Q(a, x) = Gamma(a, x) / Gamma(a).
/// Series for x < a + 1, Lentz continued fraction otherwise.
inline double gamma_q(double a, double x) {
    if (a <= 0.0 || x < 0.0) throw std::invalid_argument("gamma_q: domain");
    if (x == 0.0) return 1.0;
    const double lg = std::lgamma(a);
    if (x < a + 1.0) {
        double term = 1.0 / a, sum = term, ap = a;
        for (int i = 0; i < 500; ++i) {
            ap += 1.0;
            term *= x / ap;
            sum += term;
            if (std::abs(term) < std::abs(sum) * 1e-16) break;
        }
        return 1.0 - sum * std::exp(-x + a * std::log(x) - lg);
    }
    const double tiny = 1e-300;
    double b = x + 1.0 - a, c = 1.0 / tiny, d = 1.0 / b, h = d;
    for (int i = 1; i <= 500; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < 1e-16) break;
    }
    return std::exp(-x + a * std::log(x) - lg) * h;
}

/// FNV-1a, used for provenance hashes of configurations and inputs.
inline std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t h = 0xcbf29ce484222325ull) {
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

}  // namespace extremal_sv
