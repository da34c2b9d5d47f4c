// extremal-sv: command line front end.
//
// Subcommands: lp-solve, eta, construct, measure, simulate, estimate,
// verify, tau. Every run emits a provenance header (tool version, config
// hash, seed; timestamp unless --no-timestamp). Validation failures exit
// with code 2 and a JSON error object on stderr; a failed verify run exits
// with code 1.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "extremal_sv/cone.hpp"
#include "extremal_sv/limits.hpp"
#include "extremal_sv/lp.hpp"
#include "extremal_sv/model.hpp"
#include "extremal_sv/simulate.hpp"
#include "extremal_sv/verify.hpp"
#include "extremal_sv/version.hpp"

namespace esv = extremal_sv;
using nlohmann::json;

namespace {

struct GlobalOptions {
    std::uint64_t seed = 0;
    int workers = 0;
    std::string out_path;
    std::string format = "csv";
    bool no_timestamp = false;
};

std::string read_input(const std::string& path) {
    if (path == "-") {
        std::ostringstream ss;
        ss << std::cin.rdbuf();
        return ss.str();
    }
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::invalid_argument("cannot open input file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string format_double(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

struct Provenance {
    std::string command;
    std::uint64_t config_hash = 0;
    std::uint64_t seed = 0;
    bool with_timestamp = true;

    std::string hash_hex() const {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%016llx",
                      static_cast<unsigned long long>(config_hash));
        return buf;
    }
    std::vector<std::string> comment_lines() const {
        std::vector<std::string> lines;
        lines.push_back("# extremal-sv " + std::string(esv::version_string) +
                        " command=" + command);
        lines.push_back("# config_hash=" + hash_hex() + " seed=" + std::to_string(seed));
        if (with_timestamp) {
            const auto now = std::time(nullptr);
            char buf[64];
            std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
            lines.push_back(std::string("# timestamp=") + buf);
        }
        return lines;
    }
    json to_json() const {
        json j{{"tool", "extremal-sv"},
               {"version", esv::version_string},
               {"command", command},
               {"config_hash", hash_hex()},
               {"seed", seed}};
        if (with_timestamp) {
            const auto now = std::time(nullptr);
            char buf[64];
            std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
            j["timestamp"] = buf;
        }
        return j;
    }
};

Provenance make_provenance(const std::string& command, const GlobalOptions& opts,
                           const std::vector<std::string>& config_parts) {
    std::uint64_t h = esv::fnv1a64(command);
    for (const auto& part : config_parts) h = esv::fnv1a64(part, h);
    return Provenance{command, h, opts.seed, !opts.no_timestamp};
}

class OutputSink {
  public:
    explicit OutputSink(const std::string& path) {
        if (!path.empty()) {
            file_.open(path, std::ios::binary);
            if (!file_) throw std::invalid_argument("cannot open output file: " + path);
        }
    }
    std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }

  private:
    std::ofstream file_;
};

// A small column-named table rendered as CSV (with provenance comments) or
// as a JSON document with a provenance object.
struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    void write(std::ostream& os, const std::string& format, const Provenance& prov) const {
        if (format == "json") {
            json out{{"provenance", prov.to_json()}};
            json data = json::array();
            for (const auto& row : rows) {
                json obj;
                for (std::size_t c = 0; c < columns.size(); ++c) obj[columns[c]] = row[c];
                data.push_back(obj);
            }
            out["rows"] = data;
            os << out.dump(2) << "\n";
            return;
        }
        for (const auto& line : prov.comment_lines()) os << line << "\n";
        for (std::size_t c = 0; c < columns.size(); ++c)
            os << columns[c] << (c + 1 < columns.size() ? "," : "\n");
        for (const auto& row : rows) {
            for (std::size_t c = 0; c < row.size(); ++c)
                os << row[c] << (c + 1 < row.size() ? "," : "\n");
        }
    }
};

void write_json_document(std::ostream& os, json payload, const Provenance& prov) {
    payload["provenance"] = prov.to_json();
    os << payload.dump(2) << "\n";
}

// "1..5" or "1,3,7..9" -> sorted unique lag list
std::vector<int> parse_lags(const std::string& text) {
    std::vector<int> lags;
    std::stringstream ss(text);
    std::string token;
    while (std::getline(ss, token, ',')) {
        if (token.empty()) continue;
        const auto dots = token.find("..");
        if (dots == std::string::npos) {
            lags.push_back(std::stoi(token));
        } else {
            const int lo = std::stoi(token.substr(0, dots));
            const int hi = std::stoi(token.substr(dots + 2));
            if (hi < lo) throw std::invalid_argument("lag range must be ascending: " + token);
            for (int h = lo; h <= hi; ++h) lags.push_back(h);
        }
    }
    if (lags.empty()) throw std::invalid_argument("no lags given");
    for (int h : lags)
        if (h < 1) throw std::invalid_argument("lags must be >= 1");
    std::sort(lags.begin(), lags.end());
    lags.erase(std::unique(lags.begin(), lags.end()), lags.end());
    return lags;
}

std::vector<double> parse_double_list(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string token;
    while (std::getline(ss, token, ',')) {
        if (!token.empty()) out.push_back(std::stod(token));
    }
    if (out.empty()) throw std::invalid_argument("empty numeric list");
    return out;
}

std::string case_label(const esv::LagDependence& d) {
    switch (d.case_tag) {
        case esv::LpCase::two_factor:
            return "two_factor(" + std::to_string(d.support[0]) + "," +
                   std::to_string(d.support[1]) + ")";
        case esv::LpCase::one_factor:
            return "one_factor(" + std::to_string(d.support[0]) + ")";
        case esv::LpCase::non_unique:
            return "non_unique";
    }
    return "?";
}

// ---------------------------------------------------------------------
// Batch files written by `simulate` and read back by `estimate`.

struct BatchFile {
    std::vector<std::vector<double>> sigma, x;
};

BatchFile read_batch_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open batch file: " + path);
    BatchFile batch;
    std::string line;
    bool header_seen = false;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (!header_seen) {
            if (line != "rep,t,sigma,x")
                throw std::invalid_argument("batch file: unexpected header '" + line + "'");
            header_seen = true;
            continue;
        }
        std::stringstream ss(line);
        std::string cell;
        std::getline(ss, cell, ',');
        const auto rep = static_cast<std::size_t>(std::stoul(cell));
        std::getline(ss, cell, ',');  // t, implicit by order
        std::getline(ss, cell, ',');
        const double sigma = std::stod(cell);
        std::getline(ss, cell, ',');
        const double x = std::stod(cell);
        if (rep >= batch.sigma.size()) {
            batch.sigma.resize(rep + 1);
            batch.x.resize(rep + 1);
        }
        batch.sigma[rep].push_back(sigma);
        batch.x[rep].push_back(x);
    }
    if (!header_seen || batch.sigma.empty())
        throw std::invalid_argument("batch file: no data rows found");
    return batch;
}

int resolved_workers(const GlobalOptions& opts) {
    if (const char* env = std::getenv("EXTREMAL_SV_THREADS")) {
        const int v = std::atoi(env);
        if (v > 0) return v;
    }
    return opts.workers;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"extremal dependence toolkit for SV models with Gamma-type log-volatility"};
    app.require_subcommand(1);
    app.set_version_flag("--version", esv::version_string);

    GlobalOptions opts;
    app.add_option("--seed", opts.seed, "base seed for all stochastic commands")
        ->capture_default_str();
    app.add_option("--workers", opts.workers, "worker threads (0 = hardware)")
        ->capture_default_str();
    app.add_option("--out", opts.out_path, "output file (default stdout)");
    app.add_option("--format", opts.format, "output format for tabular commands")
        ->check(CLI::IsMember({"csv", "json"}))
        ->capture_default_str();
    app.add_flag("--no-timestamp", opts.no_timestamp,
                 "omit the timestamp line for byte-identical reruns");

    // ---- lp-solve ----------------------------------------------------
    auto* lp_cmd = app.add_subcommand("lp-solve", "solve a tail-dependence LP given as JSON");
    std::string lp_in = "-";
    lp_cmd->add_option("--in", lp_in, "input JSON {\"a\": [...], \"b\": [...]} ('-' = stdin)");

    // ---- eta ----------------------------------------------------------
    auto* eta_cmd = app.add_subcommand("eta", "tail-dependence profile of a model");
    std::string eta_model_path;
    std::string eta_lags = "1..5";
    eta_cmd->add_option("--model", eta_model_path, "model JSON file")->required();
    eta_cmd->add_option("--lags", eta_lags, "lags, e.g. 1..5 or 1,2,6");

    // ---- construct ------------------------------------------------------
    auto* con_cmd =
        app.add_subcommand("construct", "build a model realizing a target eta profile");
    std::string con_targets;
    std::string con_eta_kind = "laplace";
    double con_gamma_shape = 1.0;
    con_cmd->add_option("--eta", con_targets, "targets in [0.5, 1], e.g. 0.8,0.5")->required();
    con_cmd->add_option("--eta-family", con_eta_kind, "log-volatility innovations")
        ->check(CLI::IsMember({"laplace", "gamma"}));
    con_cmd->add_option("--gamma-shape", con_gamma_shape, "shape when --eta-family=gamma");

    // ---- measure --------------------------------------------------------
    auto* measure_cmd =
        app.add_subcommand("measure", "limit measure of joint exceedances on a grid");
    std::string measure_model_path;
    int measure_lag = 1;
    std::string measure_s0 = "1,2,4", measure_sh = "1,2,4";
    std::uint64_t measure_samples = 1'000'000;
    bool measure_with_eps = false;
    measure_cmd->add_option("--model", measure_model_path, "model JSON file")->required();
    measure_cmd->add_option("--lag", measure_lag, "lag h >= 1")->capture_default_str();
    measure_cmd->add_option("--s0", measure_s0, "grid for s0")->capture_default_str();
    measure_cmd->add_option("--sh", measure_sh, "grid for sh")->capture_default_str();
    measure_cmd->add_option("--samples", measure_samples, "Monte Carlo samples (one-factor case)")
        ->capture_default_str();
    measure_cmd->add_flag("--with-eps", measure_with_eps,
                          "include multiplicative innovations (X version, one-factor case)");

    // ---- simulate -------------------------------------------------------
    auto* sim_cmd = app.add_subcommand("simulate", "generate sample paths");
    std::string sim_model_path;
    long sim_T = 10'000, sim_R = 1, sim_L = -1;
    sim_cmd->add_option("--model", sim_model_path, "model JSON file")->required();
    sim_cmd->add_option("--T", sim_T, "path length")->capture_default_str();
    sim_cmd->add_option("--R", sim_R, "replications")->capture_default_str();
    sim_cmd->add_option("--L", sim_L, "moving-average truncation (default: support length)")
        ->capture_default_str();

    // ---- estimate -------------------------------------------------------
    auto* est_cmd = app.add_subcommand("estimate", "estimators on a simulated batch");
    std::string est_batch_path;
    std::string est_lags = "1";
    std::size_t est_k = 0;
    double est_u = 0.999;
    long est_block = 100;
    std::string est_s0 = "2", est_sh = "2";
    est_cmd->add_option("--batch", est_batch_path, "batch CSV from `simulate`")->required();
    est_cmd->add_option("--h", est_lags, "lags, e.g. 1..3")->capture_default_str();
    est_cmd->add_option("--k", est_k, "Hill order statistics (0 = floor(2 sqrt(N)))")
        ->capture_default_str();
    est_cmd->add_option("--u", est_u, "threshold quantile for exceedance ratios")
        ->capture_default_str();
    est_cmd->add_option("--block", est_block, "block length for the extremal index")
        ->capture_default_str();
    est_cmd->add_option("--s0", est_s0, "joint exceedance s0 grid")->capture_default_str();
    est_cmd->add_option("--sh", est_sh, "joint exceedance sh grid")->capture_default_str();

    // ---- verify ---------------------------------------------------------
    auto* verify_cmd =
        app.add_subcommand("verify", "run the theory-vs-Monte-Carlo acceptance battery");
    std::vector<int> verify_only;
    verify_cmd->add_option("--only", verify_only, "run only these check ids (1..11)");

    // ---- tau ------------------------------------------------------------
    auto* tau_cmd = app.add_subcommand("tau", "cone functional of a square matrix");
    std::string tau_matrix;
    int tau_oracle_resolution = 0;
    tau_cmd->add_option("--matrix", tau_matrix, "JSON rows, e.g. [[2,0],[0,3]]")->required();
    tau_cmd->add_option("--oracle-resolution", tau_oracle_resolution,
                        "also evaluate the capped numeric supremum at this grid resolution");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help / --version
        std::cerr << json{{"error", {{"code", "usage"}, {"message", e.what()}}}}.dump() << "\n";
        return 2;
    }

    try {
        OutputSink sink(opts.out_path);
        const int workers = resolved_workers(opts);

        if (*lp_cmd) {
            const std::string text = read_input(lp_in);
            const auto lp = esv::parse_tail_lp(json::parse(text));
            const auto sol = esv::solve_lp(lp);
            const auto prov = make_provenance("lp-solve", opts, {text});
            write_json_document(sink.stream(), esv::to_json(sol), prov);
            return 0;
        }

        if (*eta_cmd) {
            const std::string text = read_input(eta_model_path);
            const auto model = esv::parse_model(json::parse(text));
            const auto lags = parse_lags(eta_lags);
            const auto profile = esv::eta_profile(model.coeffs, lags);
            Table table;
            table.columns = {"lag", "eta", "kappa_sum", "case"};
            for (const auto& d : profile.lags)
                table.rows.push_back({std::to_string(d.lag), format_double(d.eta),
                                      format_double(d.kappa_sum), case_label(d)});
            const auto prov = make_provenance("eta", opts, {text, eta_lags});
            table.write(sink.stream(), opts.format, prov);
            return 0;
        }

        if (*con_cmd) {
            const auto targets = parse_double_list(con_targets);
            esv::SvModel model;
            model.coeffs = esv::construct_from_eta(targets);
            model.eta = con_eta_kind == "gamma" ? esv::EtaFamily::gamma(con_gamma_shape)
                                                : esv::EtaFamily::laplace();
            model.eps = esv::EpsFamily::standard_normal();
            const auto prov = make_provenance("construct", opts, {con_targets, con_eta_kind});
            write_json_document(sink.stream(), esv::to_json(model), prov);
            return 0;
        }

        if (*measure_cmd) {
            const std::string text = read_input(measure_model_path);
            const auto model = esv::parse_model(json::parse(text));
            const auto d = esv::analyze_lag(model.coeffs, measure_lag);
            const auto s0s = parse_double_list(measure_s0);
            const auto shs = parse_double_list(measure_sh);
            Table table;
            table.columns = {"s0", "sh", "value", "stderr"};
            if (d.case_tag == esv::LpCase::non_unique)
                throw std::invalid_argument(
                    "measure: the lag-" + std::to_string(measure_lag) +
                    " program is non-unique; no limit measure is attached");
            for (double s0 : s0s) {
                for (double sh : shs) {
                    double value, se;
                    if (d.case_tag == esv::LpCase::two_factor) {
                        value = esv::rectangle_measure(d.solution, d.reduced_lp, s0, sh);
                        se = 0.0;
                    } else {
                        esv::OneFactorSettings settings;
                        settings.mc_samples = measure_samples;
                        settings.seed = opts.seed;
                        settings.workers = workers;
                        const auto mv = esv::one_factor_ratio(
                            model.coeffs, measure_lag, d.support[0], s0, sh, model.eta,
                            measure_with_eps ? std::optional<esv::EpsFamily>(model.eps)
                                             : std::nullopt,
                            settings);
                        value = mv.value;
                        se = mv.std_error;
                    }
                    table.rows.push_back({format_double(s0), format_double(sh),
                                          format_double(value), format_double(se)});
                }
            }
            const auto prov = make_provenance(
                "measure", opts,
                {text, std::to_string(measure_lag), measure_s0, measure_sh});
            table.write(sink.stream(), opts.format, prov);
            return 0;
        }

        if (*sim_cmd) {
            const std::string text = read_input(sim_model_path);
            esv::SimulationConfig cfg;
            cfg.model = esv::parse_model(json::parse(text));
            cfg.path_length = sim_T;
            cfg.replications = sim_R;
            cfg.truncation = sim_L;
            cfg.seed = opts.seed;
            cfg.workers = workers;
            cfg.validate();
            const auto batch = esv::simulate_paths(cfg);
            Table table;
            table.columns = {"rep", "t", "sigma", "x"};
            for (std::size_t r = 0; r < batch.sigma.size(); ++r)
                for (std::size_t t = 0; t < batch.sigma[r].size(); ++t)
                    table.rows.push_back({std::to_string(r), std::to_string(t),
                                          format_double(batch.sigma[r][t]),
                                          format_double(batch.x[r][t])});
            const auto prov = make_provenance(
                "simulate", opts,
                {text, std::to_string(sim_T), std::to_string(sim_R), std::to_string(sim_L),
                 std::to_string(opts.seed)});
            table.write(sink.stream(), opts.format, prov);
            return 0;
        }

        if (*est_cmd) {
            const auto file = read_batch_csv(est_batch_path);
            esv::SimulationBatch batch;
            batch.sigma = file.sigma;
            batch.x = file.x;
            const auto lags = parse_lags(est_lags);
            const auto s0s = parse_double_list(est_s0);
            const auto shs = parse_double_list(est_sh);
            Table table;
            table.columns = {"statistic", "h", "param", "value", "std_error", "flag"};
            const std::size_t n = batch.x.front().size();
            const std::size_t k = est_k > 0 ? est_k : esv::default_hill_k(n);
            for (int h : lags) {
                const auto hill = esv::hill_eta(batch, h, k);
                table.rows.push_back({"hill_eta", std::to_string(h), std::to_string(k),
                                      format_double(hill.eta), format_double(hill.std_error),
                                      ""});
            }
            const auto theta = esv::extremal_index(batch, est_block, est_u);
            table.rows.push_back({"extremal_index", "", std::to_string(est_block),
                                  format_double(theta.theta), format_double(theta.std_error),
                                  ""});
            for (int h : lags) {
                for (double s0 : s0s) {
                    for (double sh : shs) {
                        const auto ratio = esv::joint_exceedance_ratio(batch, h, s0, sh, est_u);
                        table.rows.push_back(
                            {"joint_ratio_s0=" + format_double(s0) + "_sh=" + format_double(sh),
                             std::to_string(h), format_double(est_u),
                             format_double(ratio.ratio),
                             format_double(0.5 * (ratio.ci_high - ratio.ci_low)),
                             ratio.low_power ? "low_power" : ""});
                    }
                }
            }
            const auto prov = make_provenance("estimate", opts, {est_batch_path, est_lags});
            table.write(sink.stream(), opts.format, prov);
            return 0;
        }

        if (*verify_cmd) {
            std::vector<int> ids = verify_only;
            if (ids.empty())
                for (int id = 1; id <= esv::check_count; ++id) ids.push_back(id);
            Table plot;
            plot.columns = {"check", "series", "x", "empirical", "reference"};
            bool all_pass = true;
            for (int id : ids) {
                const auto res = esv::run_check(id, workers);
                all_pass = all_pass && res.pass;
                std::fprintf(stderr, "%s check %d: %s [%.2fs]\n", res.pass ? "PASS" : "FAIL",
                             res.id, res.name.c_str(), res.seconds);
                if (!res.pass)
                    for (const auto& note : res.notes) std::fprintf(stderr, "    %s\n", note.c_str());
                for (const auto& row : res.plot)
                    plot.rows.push_back({std::to_string(res.id), row.series,
                                         format_double(row.x), format_double(row.empirical),
                                         format_double(row.reference)});
            }
            const auto prov = make_provenance("verify", opts, {});
            plot.write(sink.stream(), opts.format, prov);
            return all_pass ? 0 : 1;
        }

        if (*tau_cmd) {
            const auto j = json::parse(tau_matrix);
            if (!j.is_array()) throw std::invalid_argument("tau: --matrix must be a JSON array");
            const auto rows = j.get<std::vector<std::vector<double>>>();
            const auto m = esv::SquareMatrix::from_rows(rows);
            const double t = esv::tau(m);
            const auto prov = make_provenance("tau", opts, {tau_matrix});
            if (opts.format == "json") {
                json payload{{"tau", std::isinf(t) ? json("inf") : json(t)}};
                if (tau_oracle_resolution > 0)
                    payload["oracle"] = esv::tau_numeric_oracle(m, tau_oracle_resolution);
                write_json_document(sink.stream(), payload, prov);
            } else {
                for (const auto& line : prov.comment_lines()) sink.stream() << line << "\n";
                sink.stream() << format_double(t) << "\n";
                if (tau_oracle_resolution > 0)
                    sink.stream() << format_double(
                                         esv::tau_numeric_oracle(m, tau_oracle_resolution))
                                  << "\n";
            }
            return 0;
        }
    } catch (const std::invalid_argument& e) {
        std::cerr << json{{"error", {{"code", "validation"}, {"message", e.what()}}}}.dump()
                  << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << json{{"error", {{"code", "internal"}, {"message", e.what()}}}}.dump()
                  << "\n";
        return 1;
    }
    return 2;
}
