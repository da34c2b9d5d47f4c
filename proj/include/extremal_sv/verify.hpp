#pragma once

// Theory-versus-Monte-Carlo battery. Each check pins its tolerances and
// sample sizes; a run reports pass/fail per check plus plot-ready rows
// (empirical value against the theoretical reference).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "extremal_sv/cone.hpp"
#include "extremal_sv/limits.hpp"
#include "extremal_sv/lp.hpp"
#include "extremal_sv/model.hpp"
#include "extremal_sv/simulate.hpp"

namespace extremal_sv {

struct PlotRow {
    std::string series;
    double x = 0.0;
    double empirical = 0.0;
    double reference = 0.0;
};

struct CheckResult {
    int id = 0;
    std::string name;
    bool pass = true;
    double seconds = 0.0;
    std::vector<std::string> notes;
    std::vector<PlotRow> plot;

    void require(bool ok, const std::string& note) {
        if (!ok) pass = false;
        notes.push_back((ok ? "ok: " : "VIOLATION: ") + note);
    }
};

namespace verify_detail {

inline std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

inline CoefficientSequence coeffs_of(std::vector<double> v) {
    CoefficientSequence c;
    c.values = std::move(v);
    c.validate();
    return c;
}

inline std::vector<double> geometric(double alpha, int len) {
    std::vector<double> v(len);
    double p = 1.0;
    for (auto& x : v) {
        x = p;
        p *= alpha;
    }
    return v;
}

inline SvModel model_of(std::vector<double> coeffs, EtaFamily eta,
                        EpsFamily eps = EpsFamily::standard_normal()) {
    SvModel m;
    m.coeffs.values = std::move(coeffs);
    m.eta = eta;
    m.eps = eps;
    m.validate();
    return m;
}

}  // namespace verify_detail

// --------------------------------------------------------------------------
// 1. Strictly decreasing coefficients: the lag-h program has the closed-form
//    solution kappa_0 = 1 - alpha_h, kappa_h = 1, objective 2 - alpha_h.

inline CheckResult check_monotone_solution() {
    using namespace verify_detail;
    CheckResult res{1, "closed-form solution for strictly decreasing coefficients"};
    std::mt19937_64 gen(101);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    double worst = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        const int len = 6 + int(gen() % 7);
        std::vector<double> v(len);
        v[0] = 1.0;
        for (int i = 1; i < len; ++i) v[i] = v[i - 1] * (0.35 + 0.6 * unif(gen));
        const auto coeffs = coeffs_of(std::move(v));
        for (int h = 1; h <= 5; ++h) {
            const auto d = analyze_lag(coeffs, h);
            const double ah = h < len ? coeffs.values[static_cast<std::size_t>(h)] : 0.0;
            worst = std::max(worst, std::abs(d.solution.kappa[0] - (1.0 - ah)));
            worst = std::max(worst,
                             std::abs(d.solution.kappa[static_cast<std::size_t>(h)] - 1.0));
            worst = std::max(worst, std::abs(d.kappa_sum - (2.0 - ah)));
            for (std::size_t i = 0; i < d.solution.kappa.size(); ++i)
                if (i != 0 && i != static_cast<std::size_t>(h))
                    worst = std::max(worst, std::abs(d.solution.kappa[i]));
        }
    }
    res.require(worst <= 1e-12, "max deviation from (1 - alpha_h, 1) form = " + fmt(worst) +
                                    " (tolerance 1e-12)");
    return res;
}

// --------------------------------------------------------------------------
// 2. AR(1) coefficients: eta_h = 1 / (2 - alpha^h).

inline CheckResult check_ar1_formula() {
    using namespace verify_detail;
    CheckResult res{2, "AR(1) tail dependence eta_h = 1/(2 - alpha^h)"};
    double worst = 0.0;
    for (double alpha : {0.3, 0.5, 0.9}) {
        const auto coeffs = coeffs_of(geometric(alpha, 60));
        for (int h = 1; h <= 6; ++h) {
            const auto d = analyze_lag(coeffs, h);
            const double expected = 1.0 / (2.0 - std::pow(alpha, h));
            worst = std::max(worst, std::abs(d.eta - expected));
            res.plot.push_back({"ar1_alpha=" + fmt(alpha), double(h), d.eta, expected});
        }
    }
    res.require(worst <= 1e-12, "max |eta - 1/(2 - alpha^h)| = " + fmt(worst) +
                                    " (tolerance 1e-12)");
    return res;
}

// --------------------------------------------------------------------------
// 3. Profile construction round trip, endpoints included.

inline CheckResult check_construction_round_trip() {
    using namespace verify_detail;
    CheckResult res{3, "eta profile construction round trip"};
    std::mt19937_64 gen(303);
    std::uniform_real_distribution<double> unif(0.5, 1.0);
    double worst = 0.0;
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t m = 1 + gen() % 6;
        std::vector<double> target(m);
        for (auto& t : target) {
            const auto roll = gen() % 5;
            t = roll == 0 ? 0.5 : roll == 1 ? 1.0 : unif(gen);
        }
        const auto coeffs = construct_from_eta(target);
        for (std::size_t h = 1; h <= m; ++h) {
            const auto d = analyze_lag(coeffs, static_cast<int>(h));
            worst = std::max(worst, std::abs(d.eta - target[h - 1]));
        }
    }
    res.require(worst <= 1e-12,
                "max round-trip error over 200 targets = " + fmt(worst) + " (tolerance 1e-12)");
    return res;
}

// --------------------------------------------------------------------------
// 4. Enumeration solver against an independent brute-force basis scan.

inline CheckResult check_lp_oracle_equivalence() {
    using namespace verify_detail;
    CheckResult res{4, "LP enumeration against brute-force basis scan"};
    std::mt19937_64 gen(404);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    double worst = 0.0;
    int verdict_mismatches = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        const int n = 1 + int(gen() % 12);
        TailLp lp;
        for (int i = 0; i < n; ++i) {
            lp.a.push_back(gen() % 3 == 0 ? 0.0 : unif(gen));
            lp.b.push_back(gen() % 3 == 0 ? 0.0 : unif(gen));
        }
        if (trial % 7 == 0 && n >= 2) {  // exercise ties
            lp.a[0] = lp.a[1] = 1.0;
            lp.b[0] = lp.b[1] = 1.0;
        }
        if (*std::max_element(lp.a.begin(), lp.a.end()) == 0.0) lp.a[0] = 0.5;
        if (*std::max_element(lp.b.begin(), lp.b.end()) == 0.0) lp.b[0] = 0.5;

        const auto sol = solve_lp(lp);

        // independent scan: all singletons and pairs from first principles
        double best = inf;
        std::vector<std::vector<int>> winners;
        auto consider = [&](std::vector<int> support, double objective) {
            if (objective < best * (1.0 - 1e-9)) {
                best = std::min(best, objective);
                winners.clear();
            }
            if (objective <= best * (1.0 + 1e-9)) {
                best = std::min(best, objective);
                if (std::find(winners.begin(), winners.end(), support) == winners.end())
                    winners.push_back(std::move(support));
            }
        };
        for (int i = 0; i < n; ++i) {
            if (lp.a[i] > 0.0 && lp.b[i] > 0.0)
                consider({i}, std::max(1.0 / lp.a[i], 1.0 / lp.b[i]));
            for (int j = i + 1; j < n; ++j) {
                const double det = lp.a[i] * lp.b[j] - lp.a[j] * lp.b[i];
                if (std::abs(det) <= 1e-14) continue;
                const double ki = (lp.b[j] - lp.a[j]) / det;
                const double kj = (lp.a[i] - lp.b[i]) / det;
                if (ki < 0.0 || kj < 0.0) continue;
                std::vector<int> support;
                if (ki > 0.0) support.push_back(i);
                if (kj > 0.0) support.push_back(j);
                consider(std::move(support), ki + kj);
            }
        }
        worst = std::max(worst, std::abs(sol.objective - best) / best);
        if (sol.unique != (winners.size() == 1)) ++verdict_mismatches;
    }
    res.require(worst <= 1e-9, "max relative objective gap = " + fmt(worst) + " (tolerance 1e-9)");
    res.require(verdict_mismatches == 0,
                std::to_string(verdict_mismatches) + " uniqueness verdict mismatches");
    return res;
}

// --------------------------------------------------------------------------
// 5. tau: inverse formula against the capped numeric supremum.

inline CheckResult check_tau_identity() {
    using namespace verify_detail;
    CheckResult res{5, "tau inverse formula against the numeric supremum"};
    res.require(tau(SquareMatrix::diagonal({2.0, 3.0})) == 3.0, "tau(diag(2,3)) == 3 exactly");
    res.require(tau(SquareMatrix::identity(3)) == 1.0, "tau(I) == 1 exactly");

    std::mt19937_64 gen(505);
    std::uniform_real_distribution<double> unif(0.05, 2.0);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t d = trial % 2 == 0 ? 2 : 3;
        SquareMatrix b(d);
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = 0; j < d; ++j) b(i, j) = unif(gen) + (i == j ? 1.0 : 0.0);
        const auto a = b.inverse();
        if (!a) continue;
        const double exact = tau(*a);
        const double numeric = tau_numeric_oracle(*a, d == 2 ? 1000 : 300);
        worst = std::max(worst, std::abs(numeric - exact) / exact);
        res.plot.push_back({"tau_d=" + std::to_string(d), double(trial), numeric, exact});
    }
    res.require(worst <= 1e-3,
                "max relative gap between routes = " + fmt(worst) + " (tolerance 1e-3)");
    return res;
}

// --------------------------------------------------------------------------
// 6. Reduction threshold: sub-threshold extensions never change the solution.

inline CheckResult check_truncation_stability() {
    using namespace verify_detail;
    CheckResult res{6, "reduction threshold stability"};
    std::mt19937_64 gen(606);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    int exact_matches = 0;
    const int cases = 500;
    for (int trial = 0; trial < cases; ++trial) {
        const int n = 2 + int(gen() % 6);
        TailLp lp;
        for (int i = 0; i < n; ++i) {
            lp.a.push_back(gen() % 3 == 0 ? 0.0 : unif(gen));
            lp.b.push_back(gen() % 3 == 0 ? 0.0 : unif(gen));
        }
        if (*std::max_element(lp.a.begin(), lp.a.end()) == 0.0) lp.a[0] = 0.7;
        if (*std::max_element(lp.b.begin(), lp.b.end()) == 0.0) lp.b[0] = 0.7;
        const auto red = reduce_infinite(lp);
        const auto base = solve_lp(red.lp);

        auto extended = lp;
        std::uniform_real_distribution<double> below(0.0, red.threshold * 0.999);
        for (int extra = 0; extra < 10; ++extra) {
            extended.a.push_back(below(gen));
            extended.b.push_back(below(gen));
        }
        const auto ext = solve_lp(extended);
        bool same = ext.objective == base.objective && ext.support == base.support;
        for (std::size_t i = 0; same && i < red.lp.size(); ++i)
            same = ext.kappa[i] == base.kappa[i];
        if (same) ++exact_matches;
    }
    res.require(exact_matches == cases, std::to_string(exact_matches) + "/" +
                                            std::to_string(cases) +
                                            " cases unchanged exactly under extension");
    return res;
}

// --------------------------------------------------------------------------
// 7. Hill estimates against LP profiles across the model zoo.

inline CheckResult check_hill_consistency(int workers) {
    using namespace verify_detail;
    CheckResult res{7, "Hill eta against LP eta across the model zoo"};
    struct ZooEntry {
        std::string name;
        CoefficientSequence coeffs;
        std::vector<int> lags;
    };
    const std::vector<ZooEntry> zoo{
        {"independence", coeffs_of({1.0}), {1}},
        {"ar1_0.6", coeffs_of(geometric(0.6, 30)), {1, 2}},
        {"decreasing", coeffs_of({1.0, 0.8, 0.3}), {1}},
        {"constructed_0.8_0.5", construct_from_eta({0.8, 0.5}), {1, 2}},
        {"one_factor", coeffs_of({1.0, 0.0, 1.0}), {2}},
    };
    double worst = 0.0;
    std::uint64_t seed = 700;
    for (const auto& entry : zoo) {
        SimulationConfig cfg;
        cfg.model = model_of(entry.coeffs.values, EtaFamily::laplace());
        cfg.path_length = 1'000'000;
        cfg.replications = 1;
        cfg.seed = seed++;
        cfg.workers = workers;
        const auto batch = simulate_paths(cfg);
        for (int h : entry.lags) {
            const auto d = analyze_lag(entry.coeffs, h);
            const auto est = hill_eta(batch, h, 2000);
            const double gap = std::abs(est.eta - d.eta);
            worst = std::max(worst, gap);
            res.plot.push_back({entry.name + "_h=" + std::to_string(h), double(h), est.eta, d.eta});
            res.notes.push_back("model " + entry.name + " h=" + std::to_string(h) +
                                ": hill=" + fmt(est.eta) + " lp=" + fmt(d.eta));
        }
    }
    res.require(worst <= 0.1, "max |hill - lp| = " + fmt(worst) + " (tolerance 0.1)");
    return res;
}

// --------------------------------------------------------------------------
// 8. Joint exceedance ratios against the rectangle law on a grid.

inline CheckResult check_joint_exceedance_measure(int workers) {
    using namespace verify_detail;
    CheckResult res{8, "joint exceedance ratio against the rectangle law"};
    const auto coeffs = coeffs_of({1.0, 0.5});
    const auto d = analyze_lag(coeffs, 1);
    const auto [p, q] = rectangle_exponents(d.solution, d.reduced_lp);

    SimulationConfig cfg;
    cfg.model = model_of(coeffs.values, EtaFamily::laplace());
    cfg.path_length = 1'000'000;
    cfg.replications = 100;  // 1e8 pairs in total
    cfg.seed = 800;
    cfg.workers = workers;

    const double grid[3] = {1.0, 2.0, 4.0};
    struct Counts {
        std::uint64_t num[3][3] = {};
        std::uint64_t den = 0;
    };
    const auto partials = map_replications<Counts>(
        cfg, [&](long, const std::vector<double>&, const std::vector<double>& xs) {
            Counts c;
            const std::size_t n = xs.size() - 1;
            std::vector<double> mins(n);
            for (std::size_t t = 0; t < n; ++t) mins[t] = std::min(xs[t], xs[t + 1]);
            std::vector<double> work = mins;
            const double xu = empirical_quantile(work, 0.999);
            for (std::size_t t = 0; t < n; ++t) {
                if (mins[t] > xu) ++c.den;
                for (int i = 0; i < 3; ++i) {
                    if (xs[t] <= grid[i] * xu) break;
                    for (int j = 0; j < 3; ++j) {
                        if (xs[t + 1] <= grid[j] * xu) break;
                        ++c.num[i][j];
                    }
                }
            }
            return c;
        });
    Counts total;
    for (const auto& c : partials) {
        total.den += c.den;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) total.num[i][j] += c.num[i][j];
    }
    double worst = 0.0;
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            const double ratio = double(total.num[i][j]) / double(total.den);
            const double expected = std::pow(grid[i], p) * std::pow(grid[j], q);
            worst = std::max(worst, std::abs(ratio - expected));
            res.plot.push_back({"s0=" + fmt(grid[i]), grid[j], ratio, expected});
        }
    }
    res.require(worst <= 0.08, "max |ratio - s0^{-1/2} sh^{-1}| = " + fmt(worst) +
                                   " at u = 0.999 (tolerance 0.08)");
    return res;
}

// --------------------------------------------------------------------------
// 9. Extremal index 1 and the Frechet limit of normalized maxima.

inline CheckResult check_extremal_index_and_maxima(int workers) {
    using namespace verify_detail;
    CheckResult res{9, "extremal index and normalized maxima"};
    const auto model = model_of(geometric(0.7, 40), EtaFamily::laplace());

    {
        SimulationConfig cfg;
        cfg.model = model;
        cfg.path_length = 1'000'000;
        cfg.replications = 1;
        cfg.seed = 900;
        cfg.workers = workers;
        const auto batch = simulate_paths(cfg);
        const auto theta = extremal_index(batch, 100, 0.99);
        res.plot.push_back({"extremal_index", 0.0, theta.theta, 1.0});
        res.require(theta.theta >= 0.85 && theta.theta <= 1.0,
                    "blocks estimator theta = " + fmt(theta.theta) + " in [0.85, 1.0]");
    }

    SimulationConfig cfg;
    cfg.model = model;
    cfg.path_length = 100'000;
    cfg.replications = 2000;
    cfg.seed = 901;
    cfg.workers = workers;
    const double an = normalizing_constant(model, cfg.path_length);
    const auto maxima = map_replications<double>(
        cfg, [](long, const std::vector<double>& sigma, const std::vector<double>&) {
            return *std::max_element(sigma.begin(), sigma.end());
        });
    for (double z : {0.5, 1.0, 2.0}) {
        std::size_t below = 0;
        for (double m : maxima)
            if (m <= an * z) ++below;
        const double frac = double(below) / double(maxima.size());
        const double expected = std::exp(-1.0 / z);
        res.plot.push_back({"maxima", z, frac, expected});
        res.require(std::abs(frac - expected) <= 0.03,
                    "P(max <= a_n z) at z=" + fmt(z) + ": " + fmt(frac) + " vs exp(-1/z)=" +
                        fmt(expected) + " (tolerance 0.03)");
    }
    return res;
}

// --------------------------------------------------------------------------
// 10. Marginal tail asymptote.

inline CheckResult check_marginal_asymptote(int workers) {
    using namespace verify_detail;
    CheckResult res{10, "marginal survival asymptote"};
    const auto model = model_of({1.0, 0.5}, EtaFamily::laplace());

    SimulationConfig cfg;
    cfg.model = model;
    cfg.path_length = 1'000'000;
    cfg.replications = 10;
    cfg.seed = 1000;
    cfg.workers = workers;
    const auto batch = simulate_paths(cfg);
    std::vector<double> pooled;
    pooled.reserve(static_cast<std::size_t>(cfg.path_length * cfg.replications));
    for (const auto& rep : batch.sigma) pooled.insert(pooled.end(), rep.begin(), rep.end());
    std::sort(pooled.begin(), pooled.end());
    const double n = double(pooled.size());

    const auto survival_at = [&](double x) {
        const auto it = std::upper_bound(pooled.begin(), pooled.end(), x);
        return double(pooled.end() - it) / n;
    };

    const double x_hi = pooled[static_cast<std::size_t>(std::floor(0.9999 * n))];
    std::vector<double> lx, ly;
    for (int i = 0; i <= 20; ++i) {
        const double x = x_hi / 10.0 * std::pow(10.0, i / 20.0);
        const double s = survival_at(x);
        lx.push_back(std::log(x));
        ly.push_back(std::log(s));
        res.plot.push_back({"survival", x, s, marginal_survival_asymptote(model, x)});
    }
    const double slope = ols_slope(lx, ly);
    res.require(std::abs(slope + 1.0) <= 0.05,
                "log-log survival slope over the top decade = " + fmt(slope) +
                    " (target -1, tolerance 0.05)");

    const double ratio = survival_at(x_hi) / marginal_survival_asymptote(model, x_hi);
    res.require(ratio >= 0.7 && ratio <= 1.4,
                "empirical/asymptote ratio at the 1e-4 tail = " + fmt(ratio) + " (band [0.7, 1.4])");
    return res;
}

// --------------------------------------------------------------------------
// 11. Asymptotic dependence dichotomy.

inline CheckResult check_dependence_dichotomy(int workers) {
    using namespace verify_detail;
    CheckResult res{11, "asymptotic dependence dichotomy"};
    const std::vector<double> u_grid{0.99, 0.999, 0.9999};

    struct ProbeCounts {
        std::uint64_t joint[3] = {};
        std::uint64_t cond[3] = {};
    };
    const auto run_probe = [&](const SvModel& model, long T, long R, std::uint64_t seed) {
        SimulationConfig cfg;
        cfg.model = model;
        cfg.path_length = T;
        cfg.replications = R;
        cfg.seed = seed;
        cfg.workers = workers;
        const auto partials = map_replications<ProbeCounts>(
            cfg, [&](long, const std::vector<double>& sigma, const std::vector<double>&) {
                ProbeCounts c;
                for (int gi = 0; gi < 3; ++gi) {
                    std::vector<double> work = sigma;
                    const double xu = empirical_quantile(work, u_grid[gi]);
                    for (std::size_t t = 0; t + 1 < sigma.size(); ++t) {
                        if (sigma[t] > xu) {
                            ++c.cond[gi];
                            if (sigma[t + 1] > xu) ++c.joint[gi];
                        }
                    }
                }
                return c;
            });
        std::vector<double> probs(3, 0.0);
        for (int gi = 0; gi < 3; ++gi) {
            std::uint64_t joint = 0, cond = 0;
            for (const auto& p : partials) {
                joint += p.joint[gi];
                cond += p.cond[gi];
            }
            probs[gi] = cond ? double(joint) / double(cond) : 0.0;
        }
        return probs;
    };

    const auto dependent =
        model_of({1.0, 1.0}, EtaFamily::custom_tail(1.0, -2.0), EpsFamily::standard_normal());
    const auto dep = run_probe(dependent, 1'000'000, 20, 1100);
    for (int i = 0; i < 3; ++i)
        res.plot.push_back({"custom_beta_-2", u_grid[i], dep[i], 0.05});
    res.require(dep[0] <= dep[1] + 1e-12 && dep[1] <= dep[2] + 1e-12,
                "probe non-decreasing: " + fmt(dep[0]) + " <= " + fmt(dep[1]) + " <= " +
                    fmt(dep[2]));
    res.require(dep[2] > 0.05, "final probe value " + fmt(dep[2]) + " > 0.05");

    const auto control =
        model_of({1.0, 1.0}, EtaFamily::laplace(), EpsFamily::standard_normal());
    const auto ctl = run_probe(control, 1'000'000, 40, 1101);
    for (int i = 0; i < 3; ++i)
        res.plot.push_back({"laplace_control", u_grid[i], ctl[i], 0.0});
    res.require(ctl[0] > ctl[1] && ctl[1] > ctl[2],
                "control probe strictly decreasing: " + fmt(ctl[0]) + " > " + fmt(ctl[1]) +
                    " > " + fmt(ctl[2]));
    return res;
}

// --------------------------------------------------------------------------

inline CheckResult run_check(int id, int workers = 0) {
    const auto start = std::chrono::steady_clock::now();
    CheckResult res;
    switch (id) {
        case 1: res = check_monotone_solution(); break;
        case 2: res = check_ar1_formula(); break;
        case 3: res = check_construction_round_trip(); break;
        case 4: res = check_lp_oracle_equivalence(); break;
        case 5: res = check_tau_identity(); break;
        case 6: res = check_truncation_stability(); break;
        case 7: res = check_hill_consistency(workers); break;
        case 8: res = check_joint_exceedance_measure(workers); break;
        case 9: res = check_extremal_index_and_maxima(workers); break;
        case 10: res = check_marginal_asymptote(workers); break;
        case 11: res = check_dependence_dichotomy(workers); break;
        default: throw std::invalid_argument("unknown check id");
    }
    res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return res;
}

inline constexpr int check_count = 11;

}  // namespace extremal_sv
