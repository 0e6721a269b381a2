#pragma once

// The `esmc` command-line interface. run_cli() is the whole program; main()
// only forwards to it, so tests can drive commands in-process.
//
// Exit codes: 0 success, 1 a validation check failed, 2 usage or
// configuration error, 3 numerical or internal failure.

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "esmc/chain.hpp"
#include "esmc/densities.hpp"
#include "esmc/errors.hpp"
#include "esmc/estimators.hpp"
#include "esmc/parallel.hpp"
#include "esmc/problem.hpp"
#include "esmc/report.hpp"
#include "esmc/rng.hpp"
#include "esmc/validation.hpp"

namespace esmc::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitInternal = 3;

inline constexpr const char* kVersion = "1.0.0";
inline constexpr const char* kOutputDirEnv = "ESMC_OUTPUT_DIR";

/// Parses "a,b,c" or an inclusive range "start:stop:step".
inline std::vector<double> parse_grid(const std::string& text, const std::string& flag) {
    if (text.find_first_not_of(" \t") == std::string::npos) {
        throw ConfigError(flag + ": empty grid");
    }
    auto number = [&](const std::string& tok) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(tok, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        while (used < tok.size() && (tok[used] == ' ' || tok[used] == '\t')) ++used;
        if (used == 0 || used != tok.size() || !std::isfinite(v)) {
            throw ConfigError(flag + ": '" + tok + "' is not a number");
        }
        return v;
    };
    std::vector<double> out;
    if (text.find(':') != std::string::npos) {
        std::vector<std::string> parts;
        std::stringstream ss(text);
        for (std::string tok; std::getline(ss, tok, ':');) parts.push_back(tok);
        if (parts.size() != 3) throw ConfigError(flag + ": range must be start:stop:step");
        const double start = number(parts[0]);
        const double stop = number(parts[1]);
        const double step = number(parts[2]);
        if (!(step > 0.0) || stop < start) {
            throw ConfigError(flag + ": range needs step > 0 and stop >= start");
        }
        const auto count = static_cast<std::int64_t>(std::floor((stop - start) / step + 1e-9)) + 1;
        if (count > 100000) throw ConfigError(flag + ": range has too many points");
        for (std::int64_t k = 0; k < count; ++k) out.push_back(start + step * static_cast<double>(k));
        return out;
    }
    std::stringstream ss(text);
    for (std::string tok; std::getline(ss, tok, ',');) out.push_back(number(tok));
    if (text.back() == ',') throw ConfigError(flag + ": empty grid entry");
    return out;
}

inline std::vector<int> parse_int_grid(const std::string& text, const std::string& flag) {
    std::vector<int> out;
    for (double v : parse_grid(text, flag)) {
        if (v != std::floor(v) || std::abs(v) > 1e9) {
            throw ConfigError(flag + ": '" + format_number(v) + "' is not an integer");
        }
        out.push_back(static_cast<int>(v));
    }
    return out;
}

/// Validates theta early so the message names the flag and the range.
inline double checked_theta(double theta, const std::string& flag) {
    if (!(theta > 0.0 && theta < std::numbers::pi / 2)) {
        throw ConfigError(flag + ": theta must lie in the open interval (0, pi/2) = (0, " +
                          format_number(std::numbers::pi / 2) + "), got " + format_number(theta));
    }
    return theta;
}

inline int checked_lambda(int lambda, const std::string& flag) {
    if (lambda < 2) {
        throw ConfigError(flag + ": lambda must be an integer >= 2, got " + std::to_string(lambda));
    }
    return lambda;
}

/// Options shared by every command.
struct CommonOptions {
    std::uint64_t seed = 42;
    std::uint64_t stream = 0;
    std::string out;
    std::string format;
    unsigned jobs = 0;  // 0: hardware concurrency
};

inline unsigned worker_count(const CommonOptions& c) {
    return c.jobs == 0 ? default_workers() : c.jobs;
}

/// Output goes to --out if given, else to $ESMC_OUTPUT_DIR/<default_name>
/// if that variable is set, else to stdout.
class OutputSink {
public:
    OutputSink(const std::string& out, const std::string& default_name, std::ostream& fallback)
        : fallback_(fallback) {
        std::filesystem::path path;
        if (!out.empty() && out != "-") {
            path = out;
        } else if (out.empty()) {
            if (const char* dir = std::getenv(kOutputDirEnv); dir != nullptr && *dir != '\0') {
                path = std::filesystem::path(dir) / default_name;
            }
        }
        if (!path.empty()) {
            if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
            file_.open(path, std::ios::binary | std::ios::trunc);
            if (!file_) throw ConfigError("cannot open output file '" + path.string() + "'");
            path_ = path.string();
        }
    }

    std::ostream& stream() { return file_.is_open() ? file_ : fallback_; }
    const std::string& path() const noexcept { return path_; }

    void close() {
        if (file_.is_open()) {
            file_.close();
            if (!file_) throw InternalError("failed writing '" + path_ + "'");
        }
    }

private:
    std::ostream& fallback_;
    std::ofstream file_;
    std::string path_;
};

inline void write_json(std::ostream& os, const nlohmann::ordered_json& j) { os << j.dump(2) << '\n'; }

inline nlohmann::ordered_json table_json(const CsvTable& table, const Metadata& meta) {
    nlohmann::ordered_json j;
    j["metadata"] = meta.to_json();
    j["columns"] = table.columns();
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (const auto& row : table.rows()) {
        nlohmann::ordered_json r = nlohmann::ordered_json::array();
        for (const auto& cell : row) {
            if (const auto* d = std::get_if<double>(&cell)) r.push_back(json_number(*d));
            else if (const auto* i = std::get_if<std::int64_t>(&cell)) r.push_back(*i);
            else r.push_back(std::get<std::string>(cell));
        }
        rows.push_back(std::move(r));
    }
    j["rows"] = std::move(rows);
    return j;
}

inline void emit_table(const CommonOptions& common, const std::string& default_stem,
                       const CsvTable& table, const Metadata& meta, std::ostream& out) {
    const bool json = common.format == "json";
    OutputSink sink(common.out, default_stem + (json ? ".json" : ".csv"), out);
    if (json) {
        write_json(sink.stream(), table_json(table, meta));
    } else {
        table.write(sink.stream());
    }
    sink.close();
}

inline Metadata base_metadata(const std::string& command, const CommonOptions& common) {
    Metadata m;
    m.add("tool", std::string("esmc ") + kVersion);
    m.add("command", command);
    m.add("seed", common.seed);
    m.add("stream", common.stream);
    return m;
}

// ---------------------------------------------------------------------------
// Sweep commands

struct SweepOptions {
    std::optional<std::string> theta;
    std::optional<std::string> theta_grid;
    std::optional<std::string> lambda;
    std::optional<std::string> lambda_grid;
    double sigma = 1.0;
    std::int64_t steps = 1'000'000;
    std::int64_t burn_in = -1;
};

struct SweepCell {
    double theta;
    int lambda;
    std::uint64_t stream;
};

inline std::vector<SweepCell> sweep_cells(const SweepOptions& s, const CommonOptions& common) {
    if (s.theta && s.theta_grid) throw ConfigError("--theta and --theta-grid are mutually exclusive");
    if (s.lambda && s.lambda_grid) {
        throw ConfigError("--lambda and --lambda-grid are mutually exclusive");
    }
    const std::string theta_text = s.theta.value_or(s.theta_grid.value_or("0.1:1.5:0.1"));
    const std::string lambda_text = s.lambda.value_or(s.lambda_grid.value_or("5,10,20"));
    const std::string theta_flag = s.theta ? "--theta" : "--theta-grid";
    const std::string lambda_flag = s.lambda ? "--lambda" : "--lambda-grid";
    const std::vector<double> thetas = parse_grid(theta_text, theta_flag);
    const std::vector<int> lambdas = parse_int_grid(lambda_text, lambda_flag);
    if (s.theta && thetas.size() != 1) throw ConfigError("--theta takes one value");
    if (s.lambda && lambdas.size() != 1) throw ConfigError("--lambda takes one value");
    for (double th : thetas) checked_theta(th, theta_flag);
    for (int l : lambdas) checked_lambda(l, lambda_flag);
    if (s.steps <= 0) throw ConfigError("--steps must be > 0");
    if (!(s.sigma > 0.0) || !std::isfinite(s.sigma)) throw ConfigError("--sigma must be > 0");
    const std::int64_t burn = s.burn_in < 0 ? default_burn_in(s.steps) : s.burn_in;
    if (burn >= s.steps) throw ConfigError("--burn-in must be smaller than --steps");
    std::vector<SweepCell> cells;
    for (int l : lambdas) {
        for (double th : thetas) {
            cells.push_back({th, l, common.stream + cells.size()});
        }
    }
    return cells;
}

inline void add_sweep_options(CLI::App& cmd, SweepOptions& s) {
    cmd.add_option("--theta", s.theta, "Single constraint angle in (0, pi/2)");
    cmd.add_option("--theta-grid", s.theta_grid,
                   "Angles as a,b,c or start:stop:step (default 0.1:1.5:0.1)");
    cmd.add_option("--lambda", s.lambda, "Single offspring count >= 2");
    cmd.add_option("--lambda-grid", s.lambda_grid, "Offspring counts as a,b,c (default 5,10,20)");
    cmd.add_option("--steps", s.steps, "Chain length per cell")->capture_default_str();
    cmd.add_option("--burn-in", s.burn_in, "Discarded initial steps (default: 10% of steps)");
}

inline Metadata sweep_metadata(const std::string& command, const SweepOptions& s,
                               const CommonOptions& common) {
    Metadata m = base_metadata(command, common);
    m.add("theta", s.theta.value_or(s.theta_grid.value_or("0.1:1.5:0.1")));
    m.add("lambda", s.lambda.value_or(s.lambda_grid.value_or("5,10,20")));
    m.add("sigma", s.sigma);
    m.add("steps", s.steps);
    m.add("burn_in", s.burn_in < 0 ? default_burn_in(s.steps) : s.burn_in);
    m.add("delta0", 1.0);
    m.add("batch_count", kDefaultBatchCount);
    m.add("stream_assignment", "stream + cell index, lambda-major");
    return m;
}

inline int cmd_progress_rate(const SweepOptions& s, const CommonOptions& common, std::ostream& out) {
    const std::vector<SweepCell> cells = sweep_cells(s, common);
    const auto reports = parallel_map(
        cells.size(),
        [&](std::size_t i) {
            const ProblemConfig cfg(cells[i].theta, cells[i].lambda);
            RngStream rng(common.seed, cells[i].stream);
            return progress_rate(cfg, 1.0, s.steps, s.burn_in, rng);
        },
        worker_count(common));
    const Metadata meta = sweep_metadata("progress-rate", s, common);
    CsvTable table(meta, {"theta", "lambda", "phi_star", "phi_star_over_lambda", "se", "steps",
                          "seed", "sigma", "progress_rate", "burn_in", "stream"});
    for (std::size_t i = 0; i < cells.size(); ++i) {
        const EstimateReport& r = reports[i];
        const double lambda = cells[i].lambda;
        table.add_row({cells[i].theta, static_cast<std::int64_t>(cells[i].lambda), r.value,
                       r.value / lambda, r.std_error, s.steps, std::to_string(common.seed),
                       s.sigma, s.sigma * r.value, r.burn_in,
                       std::to_string(cells[i].stream)});
    }
    emit_table(common, "progress_rate", table, meta, out);
    return kExitOk;
}

inline int cmd_stationary_delta(const SweepOptions& s, const CommonOptions& common,
                                std::ostream& out) {
    const std::vector<SweepCell> cells = sweep_cells(s, common);
    const auto reports = parallel_map(
        cells.size(),
        [&](std::size_t i) {
            const ProblemConfig cfg(cells[i].theta, cells[i].lambda);
            RngStream rng(common.seed, cells[i].stream);
            return stationary_delta_mean(cfg, s.steps, s.burn_in, rng);
        },
        worker_count(common));
    const Metadata meta = sweep_metadata("stationary-delta", s, common);
    CsvTable table(meta, {"theta", "lambda", "mean_delta", "se", "steps", "seed", "burn_in",
                          "stream"});
    for (std::size_t i = 0; i < cells.size(); ++i) {
        const EstimateReport& r = reports[i];
        table.add_row({cells[i].theta, static_cast<std::int64_t>(cells[i].lambda), r.value,
                       r.std_error, s.steps, std::to_string(common.seed), r.burn_in,
                       std::to_string(cells[i].stream)});
    }
    emit_table(common, "stationary_delta", table, meta, out);
    return kExitOk;
}

// ---------------------------------------------------------------------------
// diverge

struct DivergeOptions {
    std::string rule = "constant";
    double theta = std::numbers::pi / 4;
    int lambda = 10;
    int dim = 2;
    double sigma = 1.0;
    std::optional<double> c;
    std::optional<double> d_sigma;
    std::string update = "squared-norm";
    std::int64_t steps = 1'000'000;
    std::int64_t burn_in = -1;
    std::int64_t trace_every = 0;
    std::string trace;
};

inline int cmd_diverge(const DivergeOptions& d, const CommonOptions& common, std::ostream& out) {
    checked_theta(d.theta, "--theta");
    checked_lambda(d.lambda, "--lambda");
    if (d.steps <= 0) throw ConfigError("--steps must be > 0");
    if (d.trace_every < 0) throw ConfigError("--trace-every must be >= 0");
    if (!d.trace.empty() && d.trace_every == 0) {
        throw ConfigError("--trace needs --trace-every > 0");
    }
    if (common.format == "csv") throw ConfigError("diverge writes a JSON report; use --format json");
    const ProblemConfig cfg(d.theta, d.lambda, d.dim);
    const std::int64_t trace_every = d.trace.empty() ? 0 : d.trace_every;
    RngStream rng(common.seed, common.stream);
    Metadata meta = base_metadata("diverge", common);
    meta.add("rule", d.rule);
    meta.add("theta", d.theta);
    meta.add("lambda", d.lambda);
    meta.add("dim", d.dim);
    meta.add("steps", d.steps);
    meta.add("burn_in", d.burn_in < 0 ? default_burn_in(d.steps) : d.burn_in);
    meta.add("delta0", 1.0);
    nlohmann::ordered_json report;
    std::vector<TraceRow> trace;
    bool csa_trace = false;
    if (d.rule == "constant") {
        if (d.c || d.d_sigma) throw ConfigError("--c and --d-sigma apply only to --rule csa");
        meta.add("sigma", d.sigma);
        ConstSigmaOptions opts;
        opts.sigma = d.sigma;
        opts.steps = d.steps;
        opts.burn_in = d.burn_in;
        opts.trace_every = trace_every;
        const ConstSigmaRun run = run_const_sigma(cfg, opts, rng);
        const EstimateReport r = to_report(run.stats.g1, run.burn_in, d.sigma);
        report = report_json("progress_rate", config_json(cfg, d.sigma), r, common.seed,
                             sign_verdict(r));
        report["steps"] = d.steps;
        report["stream"] = common.stream;
        trace = run.trace;
    } else if (d.rule == "csa") {
        if (!d.c || !d.d_sigma) throw ConfigError("--rule csa requires --c and --d-sigma");
        SigmaRule srule = SigmaRule::squared_norm;
        if (d.update == "norm") {
            srule = SigmaRule::norm;
        } else if (d.update != "squared-norm") {
            throw ConfigError("--update must be squared-norm or norm");
        }
        const CsaConfig csa(cfg, *d.c, *d.d_sigma, srule);
        meta.add("c", *d.c);
        meta.add("d_sigma", *d.d_sigma);
        meta.add("update", d.update);
        CsaRunOptions opts;
        opts.steps = d.steps;
        opts.burn_in = d.burn_in;
        opts.trace_every = trace_every;
        const CsaRun run = run_csa(csa, opts, rng);
        EstimateReport r = series_report(run.log_sigma_changes, run.burn_in);
        r.value = run.slope();
        report = report_json("log_sigma_slope", config_json(cfg, std::nullopt, &csa), r,
                             common.seed, sign_verdict(r));
        report["steps"] = d.steps;
        report["executed_steps"] = run.executed_steps;
        report["status"] = to_string(run.status);
        report["stream"] = common.stream;
        trace = run.trace;
        csa_trace = true;
    } else {
        throw ConfigError("--rule must be constant or csa, got '" + d.rule + "'");
    }
    if (!d.trace.empty()) {
        meta.add("trace_every", trace_every);
        OutputSink sink(d.trace, "trace.csv", out);
        trace_table(meta, trace, csa_trace, true).write(sink.stream());
        sink.close();
        report["trace"] = d.trace;
    }
    OutputSink sink(common.out, "diverge.json", out);
    write_json(sink.stream(), report);
    sink.close();
    return kExitOk;
}

// ---------------------------------------------------------------------------
// density

inline const std::vector<std::string>& density_names() {
    static const std::vector<std::string> names = {"feasible2d", "feasible1", "selected2d",
                                                   "selected1", "selected2"};
    return names;
}

struct DensityOptions {
    std::string name;
    double theta = std::numbers::pi / 4;
    int lambda = 10;
    double delta = 1.0;
    std::string range = "-5,5";
    int resolution = 200;
};

inline int cmd_density(const DensityOptions& o, const CommonOptions& common, std::ostream& out) {
    bool known = false;
    std::string choices;
    for (const auto& n : density_names()) {
        known = known || n == o.name;
        choices += (choices.empty() ? "" : ", ") + n;
    }
    if (!known) throw ConfigError("unknown density '" + o.name + "' (choices: " + choices + ")");
    checked_theta(o.theta, "--theta");
    checked_lambda(o.lambda, "--lambda");
    if (!(o.delta >= 0.0) || !std::isfinite(o.delta)) throw ConfigError("--delta must be >= 0");
    if (o.resolution < 1) throw ConfigError("--resolution must be >= 1");
    const std::vector<double> range = parse_grid(o.range, "--range");
    if (range.size() != 2 || !(range[1] > range[0])) {
        throw ConfigError("--range must be lo,hi with lo < hi");
    }
    const bool two_d = o.name == "feasible2d" || o.name == "selected2d";
    if (two_d && o.resolution > 2000) throw ConfigError("--resolution must be <= 2000 for 2-D densities");
    const ProblemConfig cfg(o.theta, o.lambda);
    const NormalizedDistance delta(o.delta);
    const double lo = range[0];
    const double h = (range[1] - range[0]) / o.resolution;
    std::vector<double> xs;
    for (int k = 0; k <= o.resolution; ++k) xs.push_back(k == o.resolution ? range[1] : lo + h * k);

    Metadata meta = base_metadata("density", common);
    meta.add("density", o.name);
    meta.add("theta", o.theta);
    meta.add("lambda", o.lambda);
    meta.add("delta", o.delta);
    meta.add("range", o.range);
    meta.add("resolution", o.resolution);
    CsvTable table(meta, two_d ? std::vector<std::string>{"x", "y", "pdf"}
                               : std::vector<std::string>{"x", "pdf"});
    if (two_d) {
        for (double x : xs) {
            for (double y : xs) {
                const Step2 p{x, y};
                const double v = o.name == "feasible2d" ? feasible_step_pdf(cfg, delta, p)
                                                        : selected_step_pdf(cfg, delta, p);
                table.add_row({x, y, v});
            }
        }
    } else {
        const auto values = parallel_map(
            xs.size(),
            [&](std::size_t i) {
                if (o.name == "feasible1") return feasible_step_marginal1_pdf(cfg, delta, xs[i]);
                if (o.name == "selected1") return selected_step_marginal1_pdf(cfg, delta, xs[i]);
                return selected_step_marginal2_pdf(cfg, delta, xs[i]);
            },
            worker_count(common));
        for (std::size_t i = 0; i < xs.size(); ++i) table.add_row({xs[i], values[i]});
    }
    emit_table(common, "density_" + o.name, table, meta, out);
    return kExitOk;
}

// ---------------------------------------------------------------------------
// validate

struct ValidateOptions {
    std::string suite;
    double inject_shift = 0.0;
    double scale = 1.0;
};

inline int cmd_validate(const ValidateOptions& v, const CommonOptions& common, std::ostream& out) {
    if (common.format == "csv") throw ConfigError("validate writes a JSON report; use --format json");
    std::vector<std::string> suites;
    if (v.suite.empty()) {
        suites = validation_suites();
    } else {
        std::stringstream ss(v.suite);
        for (std::string tok; std::getline(ss, tok, ',');) {
            bool known = false;
            for (const auto& s : validation_suites()) known = known || s == tok;
            if (!known) {
                std::string choices;
                for (const auto& s : validation_suites()) choices += (choices.empty() ? "" : ", ") + s;
                throw ConfigError("unknown suite '" + tok + "' (choices: " + choices + ")");
            }
            suites.push_back(tok);
        }
        if (suites.empty()) throw ConfigError("--suite: empty list");
    }
    if (!(v.scale > 0.0) || !std::isfinite(v.scale)) throw ConfigError("--scale must be > 0");
    if (!std::isfinite(v.inject_shift) || v.inject_shift < 0.0) {
        throw ConfigError("--inject-shift must be >= 0");
    }
    ValidationOptions opts;
    opts.seed = common.seed;
    opts.stream_base = common.stream;
    opts.sample_scale = v.scale;
    opts.inject_shift = v.inject_shift;
    opts.workers = worker_count(common);

    nlohmann::ordered_json report;
    report["tool"] = std::string("esmc ") + kVersion;
    report["seed"] = common.seed;
    report["stream"] = common.stream;
    report["scale"] = v.scale;
    report["inject_shift"] = v.inject_shift;
    nlohmann::ordered_json checks = nlohmann::ordered_json::array();
    int failed = 0;
    for (const std::string& suite : suites) {
        for (const CheckResult& c : run_validation_suite(suite, opts)) {
            if (!c.passed) ++failed;
            checks.push_back(to_json(c));
        }
    }
    report["suites"] = suites;
    report["checks"] = std::move(checks);
    report["failed"] = failed;
    report["passed"] = failed == 0;
    OutputSink sink(common.out, "validate.json", out);
    write_json(sink.stream(), report);
    sink.close();
    return failed == 0 ? kExitOk : kExitCheckFailed;
}

// ---------------------------------------------------------------------------

inline void add_common_options(CLI::App& cmd, CommonOptions& c, const std::string& formats) {
    cmd.add_option("--seed", c.seed, "Random seed")->capture_default_str();
    cmd.add_option("--stream", c.stream, "Base random stream id")->capture_default_str();
    cmd.add_option("--out", c.out,
                   std::string("Output path ('-' for stdout; default $") + kOutputDirEnv +
                       "/<name> when set, else stdout)");
    cmd.add_option("--format", c.format, "Output format")->check(CLI::IsMember(
        formats == "csv,json" ? std::vector<std::string>{"csv", "json"}
                              : std::vector<std::string>{formats}));
    cmd.add_option("--jobs", c.jobs, "Worker threads (default: hardware concurrency)");
}

inline int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app("Simulation and estimation for the (1,lambda)-ES with resampling on a linear "
                 "function under a linear constraint",
                 "esmc");
    app.set_version_flag("--version", std::string("esmc ") + kVersion);
    app.require_subcommand(1);

    CommonOptions common;
    SweepOptions sweep;
    DivergeOptions diverge;
    DensityOptions density;
    ValidateOptions validate;

    auto* pr = app.add_subcommand("progress-rate", "Normalized progress rate over a theta x lambda grid");
    add_sweep_options(*pr, sweep);
    pr->add_option("--sigma", sweep.sigma, "Step size for the progress_rate column")
        ->capture_default_str();
    add_common_options(*pr, common, "csv,json");

    auto* sd = app.add_subcommand("stationary-delta", "Stationary mean of delta over a theta x lambda grid");
    add_sweep_options(*sd, sweep);
    add_common_options(*sd, common, "csv,json");

    auto* dv = app.add_subcommand("diverge", "Divergence verdict under constant sigma or CSA");
    dv->add_option("--rule", diverge.rule, "Step-size rule: constant or csa")->capture_default_str();
    dv->add_option("--theta", diverge.theta, "Constraint angle in (0, pi/2)");
    dv->add_option("--lambda", diverge.lambda, "Offspring count >= 2")->capture_default_str();
    dv->add_option("--dim", diverge.dim, "Search-space dimension >= 2")->capture_default_str();
    dv->add_option("--sigma", diverge.sigma, "Constant step size")->capture_default_str();
    dv->add_option("--c", diverge.c, "CSA cumulation parameter in (0, 1]");
    dv->add_option("--d-sigma", diverge.d_sigma, "CSA damping > 0");
    dv->add_option("--update", diverge.update, "CSA sigma update: squared-norm or norm")
        ->capture_default_str();
    dv->add_option("--steps", diverge.steps, "Generations")->capture_default_str();
    dv->add_option("--burn-in", diverge.burn_in, "Discarded initial steps (default: 10% of steps)");
    dv->add_option("--trace-every", diverge.trace_every, "Trace row period");
    dv->add_option("--trace", diverge.trace, "Trace CSV path");
    add_common_options(*dv, common, "json");

    auto* dn = app.add_subcommand("density", "Tabulate a step density");
    dn->add_option("density", density.name,
                   "feasible2d, feasible1, selected2d, selected1 or selected2")
        ->required();
    dn->add_option("--theta", density.theta, "Constraint angle in (0, pi/2)");
    dn->add_option("--lambda", density.lambda, "Offspring count >= 2")->capture_default_str();
    dn->add_option("--delta", density.delta, "Normalized distance >= 0")->capture_default_str();
    dn->add_option("--range", density.range, "Axis range lo,hi")->capture_default_str();
    dn->add_option("--resolution", density.resolution, "Grid intervals per axis")
        ->capture_default_str();
    add_common_options(*dn, common, "csv,json");

    auto* va = app.add_subcommand("validate", "Run validation suites");
    va->add_option("--suite", validate.suite, "Comma-separated suites (default: all)");
    va->add_option("--inject-shift", validate.inject_shift,
                   "Self-test: run the oracle-suite sampler at delta + shift");
    va->add_option("--scale", validate.scale, "Sample size multiplier")->capture_default_str();
    add_common_options(*va, common, "json");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp& e) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::CallForVersion& e) {
        out << "esmc " << kVersion << '\n';
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "esmc: " << e.what() << '\n';
        return kExitUsage;
    }

    try {
        if (pr->parsed()) return cmd_progress_rate(sweep, common, out);
        if (sd->parsed()) return cmd_stationary_delta(sweep, common, out);
        if (dv->parsed()) return cmd_diverge(diverge, common, out);
        if (dn->parsed()) return cmd_density(density, common, out);
        if (va->parsed()) return cmd_validate(validate, common, out);
    } catch (const ConfigError& e) {
        err << "esmc: " << e.what() << '\n';
        return kExitUsage;
    } catch (const DomainError& e) {
        err << "esmc: " << e.what() << '\n';
        return kExitUsage;
    } catch (const QuadratureError& e) {
        err << "esmc: " << e.what() << " (best estimate " << format_number(e.best_estimate())
            << ", error bound " << format_number(e.error_bound()) << ")\n";
        return kExitInternal;
    } catch (const std::exception& e) {
        err << "esmc: " << e.what() << '\n';
        return kExitInternal;
    }
    err << "esmc: no command given\n";
    return kExitUsage;
}

}  // namespace esmc::cli
