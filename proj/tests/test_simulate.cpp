#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "extremal_sv/simulate.hpp"

using namespace extremal_sv;

namespace {

SvModel model_of(std::vector<double> coeffs, EtaFamily eta, EpsFamily eps) {
    SvModel m;
    m.coeffs.values = std::move(coeffs);
    m.eta = eta;
    m.eps = eps;
    m.validate();
    return m;
}

std::vector<double> geometric(double alpha, int len) {
    std::vector<double> v(len);
    double p = 1.0;
    for (auto& x : v) {
        x = p;
        p *= alpha;
    }
    return v;
}

}  // namespace

TEST_CASE("constant innovations make returns equal volatilities", "[simulate]") {
    SimulationConfig cfg;
    cfg.model = model_of({1.0, 0.5}, EtaFamily::laplace(), EpsFamily::positive_constant());
    cfg.path_length = 5000;
    cfg.replications = 2;
    cfg.seed = 3;
    const auto batch = simulate_paths(cfg);
    REQUIRE(batch.sigma == batch.x);
    for (const auto& rep : batch.sigma)
        for (double s : rep) REQUIRE(s > 0.0);
}

TEST_CASE("batches are bit-identical across worker counts", "[simulate]") {
    SimulationConfig cfg;
    cfg.model = model_of(geometric(0.7, 20), EtaFamily::gamma(1.5), EpsFamily::student_t(5.0));
    cfg.path_length = 20'000;
    cfg.replications = 6;
    cfg.seed = 99;
    cfg.workers = 1;
    const auto one = simulate_paths(cfg);
    cfg.workers = 4;
    const auto four = simulate_paths(cfg);
    REQUIRE(one.sigma == four.sigma);
    REQUIRE(one.x == four.x);

    // a different seed changes the draw
    cfg.seed = 100;
    const auto other = simulate_paths(cfg);
    REQUIRE(other.sigma != one.sigma);
}

TEST_CASE("log-volatility autocorrelation", "[simulate][mc]") {
    SECTION("white log-volatility for a single coefficient") {
        SimulationConfig cfg;
        cfg.model = model_of({1.0}, EtaFamily::laplace(), EpsFamily::standard_normal());
        cfg.path_length = 1'000'000;
        cfg.seed = 21;
        const auto batch = simulate_paths(cfg);
        std::vector<double> logsig(batch.sigma[0].size());
        for (std::size_t t = 0; t < logsig.size(); ++t) logsig[t] = std::log(batch.sigma[0][t]);
        REQUIRE(std::abs(sample_autocorrelation(logsig, 1)) <
                3.0 / std::sqrt(double(cfg.path_length)));
    }
    SECTION("AR(1) alpha = 0.6 truncated at L = 60") {
        const auto coeffs = geometric(0.6, 61);
        double num = 0.0, den = 0.0;
        for (std::size_t i = 0; i + 1 < coeffs.size(); ++i) num += coeffs[i] * coeffs[i + 1];
        for (double c : coeffs) den += c * c;
        const double expected = num / den;  // lag-1 ACF of the truncated MA

        SimulationConfig cfg;
        cfg.model = model_of(coeffs, EtaFamily::laplace(), EpsFamily::standard_normal());
        cfg.path_length = 1'000'000;
        cfg.seed = 22;
        const auto batch = simulate_paths(cfg);
        std::vector<double> logsig(batch.sigma[0].size());
        for (std::size_t t = 0; t < logsig.size(); ++t) logsig[t] = std::log(batch.sigma[0][t]);
        REQUIRE(std::abs(sample_autocorrelation(logsig, 1) - expected) < 0.02);
        REQUIRE(expected == Catch::Approx(0.6).margin(1e-3));
    }
}

TEST_CASE("joint exceedance ratio at the corner (1,1) is exactly one", "[simulate]") {
    SimulationConfig cfg;
    cfg.model = model_of({1.0, 0.5}, EtaFamily::laplace(), EpsFamily::standard_normal());
    cfg.path_length = 50'000;
    cfg.seed = 5;
    const auto batch = simulate_paths(cfg);
    const auto est = joint_exceedance_ratio(batch, 1, 1.0, 1.0, 0.99);
    REQUIRE(est.ratio == 1.0);
    REQUIRE(est.numerator == est.denominator);
    REQUIRE_FALSE(est.low_power);
}

TEST_CASE("joint exceedance ratio under independence is the product measure", "[simulate][mc]") {
    // alpha = (1): sigma_t are i.i.d., so the limit at (2, 2) is 2^{-1} 2^{-1}.
    SimulationConfig cfg;
    cfg.model = model_of({1.0}, EtaFamily::laplace(), EpsFamily::standard_normal());
    cfg.path_length = 1'000'000;
    cfg.replications = 4;
    cfg.seed = 6;
    const auto batch = simulate_paths(cfg);
    const auto est = joint_exceedance_ratio(batch, 1, 2.0, 2.0, 0.99);
    REQUIRE_FALSE(est.low_power);
    REQUIRE(std::abs(est.ratio - 0.25) < 0.03);
}

TEST_CASE("low power flag", "[simulate]") {
    SimulationConfig cfg;
    cfg.model = model_of({1.0}, EtaFamily::laplace(), EpsFamily::standard_normal());
    cfg.path_length = 2000;
    cfg.seed = 8;
    const auto batch = simulate_paths(cfg);
    const auto est = joint_exceedance_ratio(batch, 1, 1.0, 1.0, 0.999);
    REQUIRE(est.low_power);
}

TEST_CASE("hill estimator on synthetic pairs", "[simulate][mc]") {
    RandomStream rs(123, 0);
    const std::size_t n = 1'000'000;
    SECTION("independent unit Pareto pairs give eta = 1/2") {
        std::vector<std::pair<double, double>> pairs(n);
        for (auto& p : pairs) p = {rs.pareto(1.0), rs.pareto(1.0)};
        const auto est = hill_eta_pairs(pairs, 2000);
        REQUIRE(std::abs(est.eta - 0.5) < 0.05);
    }
    SECTION("perfectly dependent pairs give eta = 1") {
        std::vector<std::pair<double, double>> pairs(n);
        for (auto& p : pairs) {
            const double v = rs.pareto(1.0);
            p = {v, v};
        }
        const auto est = hill_eta_pairs(pairs, 2000);
        REQUIRE(std::abs(est.eta - 1.0) < 0.05);
    }
    SECTION("k out of range is rejected") {
        std::vector<std::pair<double, double>> pairs(100);
        for (auto& p : pairs) p = {rs.pareto(1.0), rs.pareto(1.0)};
        REQUIRE_THROWS_AS(hill_eta_pairs(pairs, 50), std::invalid_argument);
        REQUIRE_THROWS_AS(hill_eta_pairs(pairs, 0), std::invalid_argument);
    }
}

TEST_CASE("hill estimator tracks the AR(1) formula", "[simulate][mc]") {
    SimulationConfig cfg;
    cfg.model = model_of(geometric(0.6, 30), EtaFamily::laplace(), EpsFamily::standard_normal());
    cfg.path_length = 1'000'000;
    cfg.seed = 31;
    const auto batch = simulate_paths(cfg);
    const auto est = hill_eta(batch, 1, 2000);
    REQUIRE(std::abs(est.eta - 1.0 / 1.4) < 0.1);
    REQUIRE(default_hill_k(1'000'000) == 2000);
}

TEST_CASE("marginal tail index of |X| is one", "[simulate][mc]") {
    SimulationConfig cfg;
    cfg.model = model_of({1.0}, EtaFamily::laplace(), EpsFamily::standard_normal());
    cfg.path_length = 1'000'000;
    cfg.seed = 32;
    const auto batch = simulate_paths(cfg);
    std::vector<double> mags(batch.x[0].size());
    for (std::size_t t = 0; t < mags.size(); ++t) mags[t] = std::abs(batch.x[0][t]);
    std::sort(mags.begin(), mags.end());
    const std::size_t k = 2000;
    const double ref = mags[mags.size() - k - 1];
    double sum = 0.0;
    for (std::size_t i = 0; i < k; ++i) sum += std::log(mags[mags.size() - 1 - i] / ref);
    REQUIRE(std::abs(sum / double(k) - 1.0) < 0.05);
}

TEST_CASE("tail balance of symmetric innovations", "[simulate][mc]") {
    SimulationConfig cfg;
    cfg.model = model_of({1.0, 0.5}, EtaFamily::laplace(), EpsFamily::standard_normal());
    cfg.path_length = 2'000'000;
    cfg.seed = 33;
    const auto batch = simulate_paths(cfg);
    std::vector<double> mags(batch.x[0].size());
    for (std::size_t t = 0; t < mags.size(); ++t) mags[t] = std::abs(batch.x[0][t]);
    std::vector<double> work = mags;
    const double threshold = empirical_quantile(work, 0.999);
    std::uint64_t pos = 0, abs_count = 0;
    for (std::size_t t = 0; t < mags.size(); ++t) {
        if (mags[t] > threshold) {
            ++abs_count;
            if (batch.x[0][t] > threshold) ++pos;
        }
    }
    REQUIRE(std::abs(double(pos) / double(abs_count) - 0.5) < 0.03);
}

TEST_CASE("extremal index estimates", "[simulate][mc]") {
    SECTION("i.i.d. series has extremal index one") {
        RandomStream rs(77, 0);
        std::vector<double> xs(1'000'000);
        for (auto& v : xs) v = rs.pareto(1.0);
        const auto est = extremal_index_series(xs, 100, 0.99);
        REQUIRE(std::abs(est.theta - 1.0) < 0.1);
    }
    SECTION("strong clustering is detected") {
        // duplicate every value 4 times: clusters of size 4, theta near 1/4
        RandomStream rs(78, 0);
        std::vector<double> xs;
        xs.reserve(400'000);
        for (int i = 0; i < 100'000; ++i) {
            const double v = rs.pareto(1.0);
            for (int rep = 0; rep < 4; ++rep) xs.push_back(v);
        }
        const auto est = extremal_index_series(xs, 200, 0.99);
        REQUIRE(est.theta < 0.5);
    }
    SECTION("degenerate thresholds are rejected") {
        std::vector<double> xs(1000, 1.0);
        REQUIRE_THROWS_AS(extremal_index_series(xs, 10, 0.99), std::invalid_argument);
    }
}

TEST_CASE("normalized maxima approach the Frechet law", "[simulate][mc]") {
    // alpha = (1), Laplace eta: P(sigma > x) = 1/(2x) exactly for x >= 1,
    // a_n = n/2, and P(max <= a_n z) converges to exp(-1/z).
    SimulationConfig cfg;
    cfg.model = model_of({1.0}, EtaFamily::laplace(), EpsFamily::standard_normal());
    cfg.path_length = 10'000;
    cfg.replications = 400;
    cfg.seed = 55;
    const double an = normalizing_constant(cfg.model, cfg.path_length);
    REQUIRE(an == Catch::Approx(0.5 * cfg.path_length).epsilon(1e-12));

    const auto maxima = map_replications<double>(
        cfg, [](long, const std::vector<double>& sigma, const std::vector<double>&) {
            return *std::max_element(sigma.begin(), sigma.end());
        });
    for (double z : {1.0, 2.0}) {
        std::size_t below = 0;
        for (double m : maxima)
            if (m <= an * z) ++below;
        const double expected = std::exp(-1.0 / z);
        REQUIRE(std::abs(double(below) / double(maxima.size()) - expected) < 0.06);
    }
}

TEST_CASE("conditional exceedance probe under independence decays", "[simulate][mc]") {
    SimulationConfig cfg;
    cfg.model = model_of({1.0}, EtaFamily::laplace(), EpsFamily::standard_normal());
    cfg.path_length = 2'000'000;
    cfg.replications = 2;
    cfg.seed = 66;
    const auto batch = simulate_paths(cfg);
    const auto probe = conditional_exceedance_probe(batch, 1, {0.99, 0.999});
    REQUIRE(probe[0].probability < 0.03);
    REQUIRE(probe[1].probability < probe[0].probability + 0.01);
}

TEST_CASE("configuration validation", "[simulate]") {
    SimulationConfig cfg;
    cfg.model = model_of({1.0, 0.5}, EtaFamily::laplace(), EpsFamily::standard_normal());
    cfg.path_length = 0;
    REQUIRE_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg.path_length = 10;
    cfg.truncation = 0;  // below the support length
    REQUIRE_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg.truncation = 1;
    REQUIRE_NOTHROW(cfg.validate());
}
