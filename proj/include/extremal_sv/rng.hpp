#pragma once

// Counter-based random number generation (Philox4x64-10) plus the
// distribution layer used by the simulators. Each logical stream is
// identified by a 128-bit key; draws depend only on (key, counter), so
// replications can be generated on any worker in any order and still
// reproduce bit for bit.

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

#include "extremal_sv/math.hpp"

namespace extremal_sv {

/// Philox4x64 with 10 rounds. Output blocks match numpy.random.Philox.
class Philox4x64 {
  public:
    using result_type = std::uint64_t;

    Philox4x64(std::uint64_t key0, std::uint64_t key1) : key_{key0, key1} {}

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return ~result_type{0}; }

    result_type operator()() {
        if (pos_ == 4) {
            increment_counter();
            block_ = generate_block(counter_, key_);
            pos_ = 0;
        }
        return block_[pos_++];
    }

    static std::array<std::uint64_t, 4> generate_block(std::array<std::uint64_t, 4> ctr,
                                                       std::array<std::uint64_t, 2> key) {
        for (int round = 0; round < 10; ++round) {
            const auto p0 = mul128(kMult0, ctr[0]);
            const auto p1 = mul128(kMult1, ctr[2]);
            ctr = {p1.hi ^ ctr[1] ^ key[0], p1.lo, p0.hi ^ ctr[3] ^ key[1], p0.lo};
            key[0] += kWeyl0;
            key[1] += kWeyl1;
        }
        return ctr;
    }

  private:
    static constexpr std::uint64_t kMult0 = 0xD2E7470EE14C6C93ull;
    static constexpr std::uint64_t kMult1 = 0xCA5A826395121157ull;
    static constexpr std::uint64_t kWeyl0 = 0x9E3779B97F4A7C15ull;
    static constexpr std::uint64_t kWeyl1 = 0xBB67AE8584CAA73Bull;

    struct U128 {
        std::uint64_t hi, lo;
    };
    static U128 mul128(std::uint64_t a, std::uint64_t b) {
        const unsigned __int128 p = static_cast<unsigned __int128>(a) * b;
        return {static_cast<std::uint64_t>(p >> 64), static_cast<std::uint64_t>(p)};
    }

    void increment_counter() {
        for (auto& c : counter_) {
            if (++c != 0) break;
        }
    }

    std::array<std::uint64_t, 2> key_;
    std::array<std::uint64_t, 4> counter_{0, 0, 0, 0};
    std::array<std::uint64_t, 4> block_{};
    int pos_ = 4;
};

/// One deterministic stream of variates, keyed by (seed, stream id).
class RandomStream {
  public:
    RandomStream(std::uint64_t seed, std::uint64_t stream_id) : engine_(seed, stream_id) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform on the open interval (0, 1); never returns an endpoint.
    double uniform() {
        return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
    }

    double exponential() { return -std::log(uniform()); }

    /// Standard normal via Box-Muller; one spare value is cached.
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double r = std::sqrt(-2.0 * std::log(uniform()));
        const double theta = 2.0 * std::numbers::pi * uniform();
        spare_ = r * std::sin(theta);
        have_spare_ = true;
        return r * std::cos(theta);
    }

    /// Symmetric Laplace with unit rate: P(|L| > z) = exp(-z).
    double laplace() {
        const double u = uniform();
        return u < 0.5 ? std::log(2.0 * u) : -std::log(2.0 * (1.0 - u));
    }

    /// Gamma(shape, unit rate) via Marsaglia-Tsang squeeze.
    double gamma(double shape) {
        if (shape < 1.0) {
            const double g = gamma(shape + 1.0);
            return g * std::pow(uniform(), 1.0 / shape);
        }
        const double d = shape - 1.0 / 3.0;
        const double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            double x, v;
            do {
                x = normal();
                v = 1.0 + c * x;
            } while (v <= 0.0);
            v = v * v * v;
            const double u = uniform();
            if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
            if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
        }
    }

    /// Student-t with nu degrees of freedom.
    double student_t(double nu) {
        const double z = normal();
        const double chi2 = 2.0 * gamma(0.5 * nu);
        return z / std::sqrt(chi2 / nu);
    }

    /// Pareto on [1, inf) with survival x^{-alpha}.
    double pareto(double alpha) { return std::pow(uniform(), -1.0 / alpha); }

    double lognormal(double mu, double sigma) { return std::exp(mu + sigma * normal()); }

  private:
    Philox4x64 engine_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace extremal_sv
