#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "extremal_sv/model.hpp"

using namespace extremal_sv;
using nlohmann::json;

namespace {
SvModel make_model(std::vector<double> coeffs, EtaFamily eta,
                   EpsFamily eps = EpsFamily::standard_normal()) {
    SvModel m;
    m.coeffs.values = std::move(coeffs);
    m.eta = eta;
    m.eps = eps;
    m.validate();
    return m;
}
}  // namespace

TEST_CASE("tail constants, single unit coefficient", "[model]") {
    const auto m = make_model({1.0}, EtaFamily::laplace());
    const auto c = tail_constants(m);
    REQUIRE(c.k == 1);
    REQUIRE(c.beta_hat == 0.0);
    REQUIRE(c.k_hat == Catch::Approx(0.5).margin(1e-15));
}

TEST_CASE("tail constants, two unit coefficients", "[model]") {
    // k = 2, beta = 0: beta_hat = k beta + k - 1 = 1,
    // K_hat = (1/2)^2 Gamma(1)^2 / Gamma(2) = 1/4.
    const auto m = make_model({1.0, 1.0}, EtaFamily::laplace());
    const auto c = tail_constants(m);
    REQUIRE(c.k == 2);
    REQUIRE(c.beta_hat == Catch::Approx(1.0).margin(1e-15));
    REQUIRE(c.k_hat == Catch::Approx(0.25).margin(1e-15));
}

TEST_CASE("tail constants pick up the partial MGF product", "[model]") {
    // alpha = (1, 0.5), eta = Gamma(2): K = 1/Gamma(2) = 1, beta = 1,
    // K_hat = Gamma(2)/Gamma(2) * (1 - 0.5)^{-2} = 4.
    const auto m = make_model({1.0, 0.5}, EtaFamily::gamma(2.0));
    const auto c = tail_constants(m);
    REQUIRE(c.k == 1);
    REQUIRE(c.beta_hat == Catch::Approx(1.0).margin(1e-15));
    REQUIRE(c.k_hat == Catch::Approx(4.0).epsilon(1e-12));
}

TEST_CASE("gamma MGF factor agrees with Monte Carlo", "[model][mc]") {
    // E exp(0.5 eta) for eta ~ Gamma(2) equals (1 - 0.5)^{-2} = 4. The
    // summand has tail index 2, so use a wide absolute tolerance.
    RandomStream rs(99, 0);
    const long n = 10'000'000;
    double sum = 0.0;
    for (long i = 0; i < n; ++i) sum += std::exp(0.5 * rs.gamma(2.0));
    REQUIRE(std::abs(sum / double(n) - 4.0) < 0.05);
}

TEST_CASE("trailing zero coefficients never change the constants", "[model]") {
    const auto base = make_model({1.0, 0.7, 0.3}, EtaFamily::gamma(1.5));
    auto padded = base;
    padded.coeffs.values.insert(padded.coeffs.values.end(), 40, 0.0);
    const auto c0 = tail_constants(base);
    const auto c1 = tail_constants(padded);
    REQUIRE(c0.beta_hat == c1.beta_hat);
    REQUIRE(c0.k_hat == c1.k_hat);  // exact: zero coefficients contribute factor 1
}

TEST_CASE("partial MGF products are Cauchy under decaying coefficients", "[model]") {
    // alpha_i = O(i^{-2}): successive partial products of MGF(alpha_i) settle.
    const auto eta = EtaFamily::laplace();
    double prod = 1.0;
    for (int i = 1; i <= 2000; ++i) {
        const double prev = prod;
        prod *= eta.mgf(0.999 * std::pow(double(i), -2.0));
        if (i > 100) REQUIRE(std::abs(prod - prev) < 1e-6 * prod);
    }
    REQUIRE(std::isfinite(prod));
}

TEST_CASE("marginal survival asymptote", "[model]") {
    const auto laplace1 = make_model({1.0}, EtaFamily::laplace());
    // K_hat = 1/2, beta_hat = 0, x = e^10 -> (1/2) e^{-10}
    REQUIRE(marginal_survival_asymptote(laplace1, std::exp(10.0)) ==
            Catch::Approx(0.5 * std::exp(-10.0)).epsilon(1e-12));

    const auto gamma2 = make_model({1.0, 0.5}, EtaFamily::gamma(2.0));
    // K_hat = 4, beta_hat = 1, x = e^20 -> 4 * 20 * e^{-20}
    REQUIRE(marginal_survival_asymptote(gamma2, std::exp(20.0)) ==
            Catch::Approx(4.0 * 20.0 * std::exp(-20.0)).epsilon(1e-12));

    REQUIRE_THROWS_AS(marginal_survival_asymptote(laplace1, 2.0), std::invalid_argument);

    // strictly decreasing in x beyond e^{max(beta_hat, 1)}
    const double lo = std::exp(std::max(1.0, tail_constants(gamma2).beta_hat));
    double prev = marginal_survival_asymptote(gamma2, lo * 1.001);
    for (double x = lo * 1.1; x < lo * 1e6; x *= 1.37) {
        const double cur = marginal_survival_asymptote(gamma2, x);
        REQUIRE(cur < prev);
        prev = cur;
    }
}

TEST_CASE("normalizing constants", "[model]") {
    const auto m1 = make_model({1.0}, EtaFamily::gamma(1.0));  // K = 1, beta = 0
    REQUIRE(normalizing_constant(m1, 100) == Catch::Approx(100.0).epsilon(1e-12));

    const auto m2 = make_model({1.0, 1.0}, EtaFamily::laplace());  // K_hat = 1/4, beta_hat = 1
    const long n = static_cast<long>(std::round(std::exp(4.0)));
    REQUIRE(normalizing_constant(m2, n) ==
            Catch::Approx(0.25 * n * std::log(double(n))).epsilon(1e-12));

    REQUIRE_THROWS_AS(normalizing_constant(m1, 1), std::invalid_argument);
}

TEST_CASE("gamma sampler matches its survival function", "[model][mc]") {
    // Gamma(1): P(eta > z) = e^{-z} exactly equals the tail form K z^0 e^{-z}.
    const auto eta = EtaFamily::gamma(1.0);
    RandomStream rs(4242, 0);
    const long n = 100'000'000;
    long c5 = 0, c10 = 0;
    for (long i = 0; i < n; ++i) {
        const double z = eta.sample(rs);
        if (z > 5.0) ++c5;
        if (z > 10.0) ++c10;
    }
    for (auto [z, count] : {std::pair{5.0, c5}, std::pair{10.0, c10}}) {
        const double p = std::exp(-z);
        const double se = std::sqrt(p * (1.0 - p) / double(n));
        REQUIRE(std::abs(count / double(n) - p) < 3.0 * se);
    }
}

TEST_CASE("gamma(2) sampler against the exact incomplete-gamma survival", "[model][mc]") {
    const auto eta = EtaFamily::gamma(2.0);
    RandomStream rs(4243, 0);
    const long n = 20'000'000;
    long c5 = 0;
    for (long i = 0; i < n; ++i)
        if (eta.sample(rs) > 5.0) ++c5;
    const double p = gamma_q(2.0, 5.0);
    REQUIRE(p == Catch::Approx(6.0 * std::exp(-5.0)).epsilon(1e-12));
    const double se = std::sqrt(p * (1.0 - p) / double(n));
    REQUIRE(std::abs(c5 / double(n) - p) < 3.0 * se);
}

TEST_CASE("custom tail law", "[model]") {
    const auto eta = EtaFamily::custom_tail(1.0, -2.0);
    const double z0 = eta.tail_start();

    SECTION("survival is continuous, monotone, and matches the tail form") {
        REQUIRE(eta.survival(z0) == Catch::Approx(0.9).margin(1e-10));
        double prev = 1.0 + 1e-12;
        for (double z = z0 - 2.0; z < z0 + 30.0; z += 0.01) {
            const double s = eta.survival(z);
            REQUIRE(s <= prev + 1e-12);
            prev = s;
        }
        REQUIRE(eta.survival(z0 + 5.0) ==
                Catch::Approx(std::pow(z0 + 5.0, -2.0) * std::exp(-(z0 + 5.0))).epsilon(1e-12));
    }

    SECTION("mgf at zero is exactly one") { REQUIRE(eta.mgf(0.0) == 1.0); }

    SECTION("mgf(1) is finite for beta < -1 and matches sampling") {
        const double m1 = eta.mgf(1.0);
        REQUIRE(std::isfinite(m1));
        RandomStream rs(11, 3);
        const long n = 4'000'000;
        double sum = 0.0;
        for (long i = 0; i < n; ++i) sum += std::exp(eta.sample(rs));
        // e^eta has tail index 1 with a log^{-2} correction: slow CLT, loose band
        REQUIRE(std::abs(sum / double(n) - m1) < 0.15 * m1);
    }

    SECTION("mgf below one matches Monte Carlo with finite variance") {
        const double s = 0.45;
        const double m = eta.mgf(s);
        RandomStream rs(12, 0);
        const long n = 2'000'000;
        MeanAccumulator acc;
        for (long i = 0; i < n; ++i) acc.add(std::exp(s * eta.sample(rs)));
        REQUIRE(std::abs(acc.mean() - m) < 3.0 * acc.std_error());
    }

    SECTION("sampled survival matches the stored survival") {
        RandomStream rs(13, 0);
        const long n = 2'000'000;
        const double zs[3] = {z0 - 0.01, z0 + 1.0, z0 + 4.0};
        long counts[3] = {0, 0, 0};
        for (long i = 0; i < n; ++i) {
            const double v = eta.sample(rs);
            for (int j = 0; j < 3; ++j)
                if (v > zs[j]) ++counts[j];
        }
        for (int j = 0; j < 3; ++j) {
            const double p = eta.survival(zs[j]);
            const double se = std::sqrt(p * (1 - p) / double(n));
            REQUIRE(std::abs(counts[j] / double(n) - p) < 4.0 * se);
        }
    }
}

TEST_CASE("custom tail with laplace parameters matches laplace beyond z0", "[model]") {
    const auto eta = EtaFamily::custom_tail(0.5, 0.0);
    const auto lap = EtaFamily::laplace();
    for (double z = eta.tail_start(); z < 20.0; z += 0.37)
        REQUIRE(eta.survival(z) == Catch::Approx(lap.survival(z)).epsilon(1e-12));
}

TEST_CASE("custom tail mgf for a positive exponent", "[model][mc]") {
    // beta > 0 exercises the peak-aware default z0 and the quadrature branch.
    const auto eta = EtaFamily::custom_tail(0.2, 1.5);
    REQUIRE(eta.mgf(0.0) == 1.0);
    const double s = 0.3;
    RandomStream rs(14, 0);
    MeanAccumulator acc;
    for (long i = 0; i < 2'000'000; ++i) acc.add(std::exp(s * eta.sample(rs)));
    REQUIRE(std::abs(acc.mean() - eta.mgf(s)) < 3.0 * acc.std_error());
}

TEST_CASE("family validation", "[model]") {
    REQUIRE_THROWS_AS(EtaFamily::gamma(0.0), std::invalid_argument);
    REQUIRE_THROWS_AS(EtaFamily::custom_tail(1.0, -1.0), std::invalid_argument);
    REQUIRE_THROWS_AS(EtaFamily::custom_tail(0.0, 2.0), std::invalid_argument);
    REQUIRE_THROWS_AS(EtaFamily::laplace().mgf(1.0), std::invalid_argument);
    REQUIRE_THROWS_AS(EtaFamily::gamma(2.0).mgf(1.5), std::invalid_argument);
    REQUIRE_THROWS_AS(EtaFamily::custom_tail(1.0, -2.0).mgf(1.5), std::invalid_argument);
    REQUIRE_THROWS_AS(EpsFamily::student_t(1.0), std::invalid_argument);
    REQUIRE_THROWS_AS(EpsFamily::symmetric_pareto(1.5, 0.0), std::invalid_argument);
    REQUIRE_THROWS_AS(EpsFamily::symmetric_pareto(0.9, 0.5), std::invalid_argument);

    CoefficientSequence bad;
    bad.values = {0.9, 0.5};
    REQUIRE_THROWS_AS(bad.validate(), std::invalid_argument);
    bad.values = {1.0, -0.1};
    REQUIRE_THROWS_AS(bad.validate(), std::invalid_argument);
    bad.values = {1.0, 0.5};
    bad.scale = 0.0;
    REQUIRE_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("eps family moments", "[model]") {
    REQUIRE(EpsFamily::standard_normal().mean_positive_part() ==
            Catch::Approx(1.0 / std::sqrt(2.0 * std::numbers::pi)).epsilon(1e-12));
    REQUIRE(EpsFamily::positive_constant().mean_abs() == 1.0);
    REQUIRE(EpsFamily::symmetric_pareto(2.0, 0.5).mean_abs() == Catch::Approx(2.0));
    REQUIRE(EpsFamily::symmetric_pareto(2.0, 0.25).mean_positive_part() == Catch::Approx(0.5));
    REQUIRE(EpsFamily::student_t(5.0).moment_bound() == 5.0);
    REQUIRE(EpsFamily::standard_normal().moment_bound() == inf);
}

TEST_CASE("model JSON round trip and strictness", "[model]") {
    const auto j = json::parse(R"({
        "coeffs": [1.0, 0.5],
        "eta": {"kind": "gamma", "shape": 2.0},
        "eps": {"kind": "student_t", "nu": 5.0},
        "scale": 1.0
    })");
    const auto m = parse_model(j);
    REQUIRE(m.coeffs.values == std::vector<double>{1.0, 0.5});
    REQUIRE(m.eta.kind() == EtaFamily::Kind::gamma);
    REQUIRE(m.eps.kind() == EpsFamily::Kind::student_t);
    REQUIRE(parse_model(to_json(m)).coeffs.values == m.coeffs.values);

    auto bad = j;
    bad["extra"] = 1;
    REQUIRE_THROWS_AS(parse_model(bad), std::invalid_argument);
    bad = j;
    bad["eta"]["rate"] = 1.0;
    REQUIRE_THROWS_AS(parse_model(bad), std::invalid_argument);
    bad = j;
    bad["eta"] = {{"kind", "normal"}};
    REQUIRE_THROWS_AS(parse_model(bad), std::invalid_argument);
    bad = j;
    bad["coeffs"] = {0.5, 0.2};
    REQUIRE_THROWS_AS(parse_model(bad), std::invalid_argument);
}
