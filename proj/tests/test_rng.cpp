#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "extremal_sv/rng.hpp"

using namespace extremal_sv;

// Reference outputs generated with numpy.random.Philox (Philox4x64-10).
TEST_CASE("philox matches published block values", "[rng]") {
    SECTION("zero key, zero counter") {
        Philox4x64 eng(0, 0);
        const std::uint64_t expected[8] = {
            0x02f4ba6408e4d89bull, 0x3dd62b0b9ca8c5b2ull, 0x1c8667a55d902e79ull,
            0x907d7a052fd5b4dcull, 0x809bf322883987c3ull, 0x471128b9e807f7ddull,
            0xf250ba0dbec065b7ull, 0xfc6ed66767a457bcull};
        for (auto e : expected) REQUIRE(eng() == e);
    }
    SECTION("all-ones key") {
        const auto ones = ~std::uint64_t{0};
        Philox4x64 eng(ones, ones);
        const std::uint64_t expected[8] = {
            0x6d46cc0e71f0be7eull, 0x924ea1693f9a8bc0ull, 0xfdc35f0198c91181ull,
            0xb4a311f17aa6568dull, 0x67e12c1eff8de57eull, 0x6877618422b87b0eull,
            0x0b6af2bc95a81510ull, 0x941b27e5d2440b04ull};
        for (auto e : expected) REQUIRE(eng() == e);
    }
    SECTION("arbitrary key") {
        Philox4x64 eng(0xdeadbeefcafef00dull, 0x1234567890abcdefull);
        const std::uint64_t expected[8] = {
            0xc80f69b3b828bae4ull, 0xf392c6ec904b96e2ull, 0x57fb6ec4568ff806ull,
            0xefd2a57a48dcb99bull, 0x5976ed6246ad544aull, 0x87e020957fa93c83ull,
            0x60b52a3e3d22f2bfull, 0xcb20340d2636033eull};
        for (auto e : expected) REQUIRE(eng() == e);
    }
    SECTION("stream key (42, 7)") {
        Philox4x64 eng(42, 7);
        const std::uint64_t expected[8] = {
            0xa64064f34e84b9a3ull, 0xe287959a866a08fdull, 0x8dc181f009b96c03ull,
            0xf3f6001d4fa83454ull, 0x69c633ee791df6b3ull, 0x89327f7a8f0127a4ull,
            0x1ed8260458996ff6ull, 0x4299f7433fb1683eull};
        for (auto e : expected) REQUIRE(eng() == e);
    }
}

TEST_CASE("streams are reproducible and distinct", "[rng]") {
    RandomStream a(123, 5), b(123, 5), c(123, 6);
    std::vector<double> va, vb, vc;
    for (int i = 0; i < 64; ++i) {
        va.push_back(a.uniform());
        vb.push_back(b.uniform());
        vc.push_back(c.uniform());
    }
    REQUIRE(va == vb);
    REQUIRE(va != vc);
    for (double u : va) {
        REQUIRE(u > 0.0);
        REQUIRE(u < 1.0);
    }
}

TEST_CASE("distribution moments", "[rng][mc]") {
    RandomStream rs(2024, 0);
    const int n = 2'000'000;
    double s_norm = 0, ss_norm = 0, s_lap = 0, ss_lap = 0, s_gam = 0, s_exp = 0;
    for (int i = 0; i < n; ++i) {
        const double z = rs.normal();
        s_norm += z;
        ss_norm += z * z;
        const double l = rs.laplace();
        s_lap += l;
        ss_lap += l * l;
        s_gam += rs.gamma(2.5);
        s_exp += rs.exponential();
    }
    const double inv_n = 1.0 / n;
    REQUIRE(std::abs(s_norm * inv_n) < 0.005);
    REQUIRE(std::abs(ss_norm * inv_n - 1.0) < 0.01);
    REQUIRE(std::abs(s_lap * inv_n) < 0.01);
    REQUIRE(std::abs(ss_lap * inv_n - 2.0) < 0.02);  // Var(Laplace) = 2
    REQUIRE(std::abs(s_gam * inv_n - 2.5) < 0.01);
    REQUIRE(std::abs(s_exp * inv_n - 1.0) < 0.01);
}

TEST_CASE("pareto and student_t tails", "[rng][mc]") {
    RandomStream rs(7, 1);
    const int n = 1'000'000;
    int pareto_exceed = 0;
    double abs_t_sum = 0.0;
    const double nu = 5.0;
    for (int i = 0; i < n; ++i) {
        if (rs.pareto(1.5) > 10.0) ++pareto_exceed;
        abs_t_sum += std::abs(rs.student_t(nu));
    }
    // P(X > 10) = 10^{-1.5}
    const double p = std::pow(10.0, -1.5);
    REQUIRE(std::abs(pareto_exceed / double(n) - p) < 5.0 * std::sqrt(p / n));
    // E|T_nu| = 2 sqrt(nu) Gamma((nu+1)/2) / (sqrt(pi) (nu-1) Gamma(nu/2))
    const double expected = 2.0 * std::sqrt(nu) * std::exp(std::lgamma(0.5 * (nu + 1.0))) /
                            (std::sqrt(std::numbers::pi) * (nu - 1.0) *
                             std::exp(std::lgamma(0.5 * nu)));
    REQUIRE(std::abs(abs_t_sum / n - expected) < 0.01);
}
