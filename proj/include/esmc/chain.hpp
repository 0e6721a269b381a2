#pragma once

// Markov chain simulators for the (1, lambda)-ES with resampling:
//
//  * the constant step-size chain  delta' = delta - N*.n,
//  * the CSA chain (delta, p)       with cumulative step-size adaptation,
//  * the full trajectory X_t        in the reduced (e1, e2) coordinates.
//
// All three consume randomness in the same order per generation: lambda
// (u, z) driver pairs, then (CSA only) dim - 2 tail-coordinate normals.

#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "esmc/errors.hpp"
#include "esmc/problem.hpp"
#include "esmc/rng.hpp"
#include "esmc/sampling.hpp"
#include "esmc/statistics.hpp"

namespace esmc {

inline constexpr int kDefaultBatchCount = 100;
/// |ln sigma| beyond this ends a CSA run: sigma itself would leave double range.
inline constexpr double kLogSigmaGuard = 700.0;

/// Burn-in used when the caller passes a negative value: 10% of the steps.
inline std::int64_t default_burn_in(std::int64_t steps) { return steps / 10; }

struct TraceRow {
    std::int64_t t = 0;
    double delta = 0.0;
    double g_dot_n = 0.0;
    double g1 = 0.0;
    double g2 = 0.0;
    double log_sigma = std::numeric_limits<double>::quiet_NaN();
    double f_value = std::numeric_limits<double>::quiet_NaN();
};

namespace detail {

inline void check_run_lengths(std::int64_t steps, std::int64_t burn_in) {
    if (steps < 0) throw ConfigError("steps must be >= 0, got " + std::to_string(steps));
    if (burn_in < 0) throw ConfigError("burn_in must be >= 0, got " + std::to_string(burn_in));
    if (steps > 0 && burn_in >= steps) {
        throw ConfigError("burn_in (" + std::to_string(burn_in) + ") must be smaller than steps (" +
                          std::to_string(steps) + ")");
    }
}

inline BatchMeans make_batch_means(std::int64_t samples, int batch_count) {
    const auto usable = static_cast<int>(std::min<std::int64_t>(batch_count, samples / 2));
    if (usable < 2) return BatchMeans(4, 2);  // never completes: std_error() is NaN
    return BatchMeans(samples, usable);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Constant step-size chain

struct ConstSigmaState {
    double delta = 1.0;
    std::int64_t t = 0;
    double x1_sum = 0.0;  // sum of the e1 components of the selected steps
};

struct ConstSigmaStep {
    ConstSigmaState state;
    Selection selection;
};

/// One generation. `scratch` is reused storage for the driver batch.
inline ConstSigmaStep const_sigma_step(const ProblemConfig& cfg, const ConstSigmaState& state,
                                       RngStream& rng, ResampleBatch& scratch) {
    draw_batch(rng, cfg.lambda(), scratch);
    const Selection sel = select(cfg, NormalizedDistance(state.delta), scratch);
    ConstSigmaStep out;
    out.selection = sel;
    // delta - t >= 0 holds exactly for the sampled along-normal coordinate,
    // whereas re-projecting the rotated step would round.
    out.state.delta = state.delta - sel.along_normal;
    out.state.t = state.t + 1;
    out.state.x1_sum = state.x1_sum + sel.step.c1;
    if (!(out.state.delta >= 0.0)) throw InternalError("const_sigma_step: delta became negative");
    return out;
}

inline ConstSigmaStep const_sigma_step(const ProblemConfig& cfg, const ConstSigmaState& state,
                                       RngStream& rng) {
    ResampleBatch scratch;
    return const_sigma_step(cfg, state, rng, scratch);
}

struct ConstSigmaOptions {
    double sigma = 1.0;
    std::int64_t steps = 1'000'000;
    std::int64_t burn_in = -1;  // negative: default_burn_in(steps)
    std::int64_t trace_every = 0;  // 0: no trace
    double delta0 = 1.0;
    int batch_count = kDefaultBatchCount;
};

/// Post-burn-in running statistics of the selected steps and of delta.
struct ChainStatistics {
    BatchMeans g1;
    BatchMeans g2;
    BatchMeans g_dot_n;
    BatchMeans delta;
    BatchMeans g1_plus_tan_g2;  // [G]_1 + tan(theta) [G]_2
};

struct ConstSigmaRun {
    ConstSigmaState final_state;
    std::vector<TraceRow> trace;
    ChainStatistics stats;
    std::int64_t burn_in = 0;
    double sigma = 1.0;
};

inline ConstSigmaRun run_const_sigma(const ProblemConfig& cfg, const ConstSigmaOptions& opts,
                                     RngStream& rng) {
    if (!(opts.sigma > 0.0) || std::isinf(opts.sigma)) {
        throw ConfigError("sigma must be finite and > 0");
    }
    const std::int64_t burn = opts.burn_in < 0 ? default_burn_in(opts.steps) : opts.burn_in;
    detail::check_run_lengths(opts.steps, burn);
    if (opts.trace_every < 0) throw ConfigError("trace_every must be >= 0");

    ConstSigmaRun run;
    run.burn_in = burn;
    run.sigma = opts.sigma;
    run.final_state.delta = NormalizedDistance(opts.delta0).value();
    const std::int64_t samples = opts.steps - burn;
    run.stats = {detail::make_batch_means(samples, opts.batch_count),
                 detail::make_batch_means(samples, opts.batch_count),
                 detail::make_batch_means(samples, opts.batch_count),
                 detail::make_batch_means(samples, opts.batch_count),
                 detail::make_batch_means(samples, opts.batch_count)};
    const double tan_theta = cfg.sin_theta() / cfg.cos_theta();
    // f(X_t) in units where X_0 = -sigma delta0 n.
    const double f0 = -opts.sigma * run.final_state.delta * cfg.cos_theta();
    ResampleBatch scratch;
    for (std::int64_t k = 0; k < opts.steps; ++k) {
        const ConstSigmaStep step = const_sigma_step(cfg, run.final_state, rng, scratch);
        run.final_state = step.state;
        const Step2 s = step.selection.step;
        if (k >= burn) {
            run.stats.g1.add(s.c1);
            run.stats.g2.add(s.c2);
            run.stats.g_dot_n.add(step.selection.along_normal);
            run.stats.delta.add(step.state.delta);
            run.stats.g1_plus_tan_g2.add(s.c1 + tan_theta * s.c2);
        }
        if (opts.trace_every > 0 && step.state.t % opts.trace_every == 0) {
            TraceRow row;
            row.t = step.state.t;
            row.delta = step.state.delta;
            row.g_dot_n = step.selection.along_normal;
            row.g1 = s.c1;
            row.g2 = s.c2;
            row.f_value = f0 + opts.sigma * step.state.x1_sum;
            run.trace.push_back(row);
        }
    }
    return run;
}

// ---------------------------------------------------------------------------
// Cumulative step-size adaptation

enum class SigmaRule {
    squared_norm,  // ln sigma += (|p|^2 - n) / (2 d n)
    norm,          // ln sigma += (c / d) (|p| / E|N(0, I_n)| - 1)
};

class CsaConfig {
public:
    CsaConfig(ProblemConfig problem, double c, double d_sigma,
              SigmaRule rule = SigmaRule::squared_norm)
        : problem_(problem), c_(c), d_sigma_(d_sigma), rule_(rule) {
        if (!(c > 0.0 && c <= 1.0)) {
            throw ConfigError("cumulation parameter c must lie in (0, 1], got " + std::to_string(c));
        }
        if (!(d_sigma > 0.0) || std::isinf(d_sigma)) {
            throw ConfigError("damping d_sigma must be finite and > 0, got " +
                              std::to_string(d_sigma));
        }
    }

    const ProblemConfig& problem() const noexcept { return problem_; }
    double c() const noexcept { return c_; }
    double d_sigma() const noexcept { return d_sigma_; }
    SigmaRule rule() const noexcept { return rule_; }

    /// sqrt(c (2 - c)): keeps the path standard normal under random selection.
    double path_weight() const noexcept { return std::sqrt(c_ * (2.0 - c_)); }

    /// E|N(0, I_n)| = sqrt(2) Gamma((n+1)/2) / Gamma(n/2).
    double expected_norm() const noexcept {
        const double n = problem_.dim();
        return std::sqrt(2.0) * std::exp(std::lgamma(0.5 * (n + 1.0)) - std::lgamma(0.5 * n));
    }

    /// ln(sigma' / sigma) given the updated path.
    double log_sigma_change(double path_sq_norm) const noexcept {
        const double n = problem_.dim();
        if (rule_ == SigmaRule::squared_norm) return (path_sq_norm - n) / (2.0 * d_sigma_ * n);
        return c_ / d_sigma_ * (std::sqrt(path_sq_norm) / expected_norm() - 1.0);
    }

private:
    ProblemConfig problem_;
    double c_;
    double d_sigma_;
    SigmaRule rule_;
};

enum class CsaStatus {
    running,
    sigma_overflow,   // ln sigma > guard: geometric divergence of sigma
    sigma_underflow,  // ln sigma < -guard: geometric convergence of sigma
};

inline std::string to_string(CsaStatus s) {
    switch (s) {
        case CsaStatus::running: return "running";
        case CsaStatus::sigma_overflow: return "sigma_overflow";
        case CsaStatus::sigma_underflow: return "sigma_underflow";
    }
    return "unknown";
}

struct CsaState {
    double delta = 1.0;
    std::vector<double> path;  // p in R^n; entries 0, 1 are the (e1, e2) plane
    double log_sigma = 0.0;
    std::int64_t t = 0;

    static CsaState initial(const CsaConfig& cfg, double delta0 = 1.0) {
        CsaState s;
        s.delta = NormalizedDistance(delta0).value();
        s.path.assign(static_cast<std::size_t>(cfg.problem().dim()), 0.0);
        return s;
    }
};

/// What happened during one CSA generation, besides the new state.
struct CsaStepInfo {
    Selection selection;
    double step_sq_norm_2d = 0.0;    // |N*|^2 in the (e1, e2) plane
    double step_sq_norm_tail = 0.0;  // sum of squares of coordinates 3..n
    double path_sq_norm = 0.0;       // |p'|^2
    double log_sigma_change = 0.0;
    CsaStatus status = CsaStatus::running;
};

namespace detail {

// Advances `state` in place; `tail` receives the coordinates 3..n of N*.
inline CsaStepInfo advance_csa(const CsaConfig& cfg, CsaState& state, RngStream& rng,
                               ResampleBatch& scratch, std::vector<double>& tail) {
    const ProblemConfig& problem = cfg.problem();
    const auto n = static_cast<std::size_t>(problem.dim());
    if (state.path.size() != n) throw ConfigError("CsaState: path dimension does not match dim");
    draw_batch(rng, problem.lambda(), scratch);
    const Selection sel = select(problem, NormalizedDistance(state.delta), scratch);
    tail.resize(n - 2);
    for (double& z : tail) z = rng.normal();

    CsaStepInfo info;
    info.selection = sel;
    info.step_sq_norm_2d = sel.step.squared_norm();
    info.step_sq_norm_tail = std::inner_product(tail.begin(), tail.end(), tail.begin(), 0.0);

    const double keep = 1.0 - cfg.c();
    const double w = cfg.path_weight();
    state.path[0] = keep * state.path[0] + w * sel.step.c1;
    state.path[1] = keep * state.path[1] + w * sel.step.c2;
    for (std::size_t k = 2; k < n; ++k) state.path[k] = keep * state.path[k] + w * tail[k - 2];
    info.path_sq_norm =
        std::inner_product(state.path.begin(), state.path.end(), state.path.begin(), 0.0);

    info.log_sigma_change = cfg.log_sigma_change(info.path_sq_norm);
    state.log_sigma += info.log_sigma_change;
    state.delta = (state.delta - sel.along_normal) * std::exp(-info.log_sigma_change);
    ++state.t;
    if (!(state.delta >= 0.0)) throw InternalError("csa_step: delta became negative");
    if (state.log_sigma > kLogSigmaGuard) info.status = CsaStatus::sigma_overflow;
    if (state.log_sigma < -kLogSigmaGuard) info.status = CsaStatus::sigma_underflow;
    return info;
}

}  // namespace detail

struct CsaStep {
    CsaState state;
    CsaStepInfo info;
};

inline CsaStep csa_step(const CsaConfig& cfg, const CsaState& state, RngStream& rng) {
    CsaStep out{state, {}};
    ResampleBatch scratch;
    std::vector<double> tail;
    out.info = detail::advance_csa(cfg, out.state, rng, scratch, tail);
    return out;
}

struct CsaRunOptions {
    std::int64_t steps = 1'000'000;
    std::int64_t burn_in = -1;
    std::int64_t trace_every = 0;
    double delta0 = 1.0;
    int batch_count = kDefaultBatchCount;
};

struct CsaRun {
    CsaState final_state;
    std::vector<TraceRow> trace;
    CsaStatus status = CsaStatus::running;
    std::int64_t executed_steps = 0;
    /// Burn-in actually applied; shrinks to 10% of the executed steps when the
    /// sigma guard stops the run before the requested burn-in ends.
    std::int64_t burn_in = 0;
    double log_sigma_at_burn_in = 0.0;
    /// Per-step series over the post-burn-in window.
    std::vector<double> log_sigma_changes;
    std::vector<double> step_sq_norms_2d;
    std::vector<double> step_sq_norms_tail;
    std::vector<double> deltas;

    std::int64_t samples() const noexcept { return executed_steps - burn_in; }
    /// (ln sigma_T - ln sigma_B) / (T - B).
    double slope() const noexcept {
        return (final_state.log_sigma - log_sigma_at_burn_in) / static_cast<double>(samples());
    }
};

inline CsaRun run_csa(const CsaConfig& cfg, const CsaRunOptions& opts, RngStream& rng) {
    const std::int64_t burn = opts.burn_in < 0 ? default_burn_in(opts.steps) : opts.burn_in;
    detail::check_run_lengths(opts.steps, burn);
    if (opts.steps == 0) throw ConfigError("run_csa: steps must be > 0");
    if (opts.trace_every < 0) throw ConfigError("trace_every must be >= 0");

    CsaRun run;
    run.final_state = CsaState::initial(cfg, opts.delta0);
    // Series are recorded from the start, then trimmed to the burn-in that
    // applies once the run length is known.
    std::vector<double> log_sigma_path;
    ResampleBatch scratch;
    std::vector<double> tail;
    // f(X_t) with X_0 = -delta0 n and sigma_0 = 1.
    double f_value = -run.final_state.delta * cfg.problem().cos_theta();
    for (std::int64_t k = 0; k < opts.steps; ++k) {
        log_sigma_path.push_back(run.final_state.log_sigma);
        const double sigma = std::exp(run.final_state.log_sigma);
        const CsaStepInfo info = detail::advance_csa(cfg, run.final_state, rng, scratch, tail);
        f_value += sigma * info.selection.step.c1;
        run.log_sigma_changes.push_back(info.log_sigma_change);
        run.step_sq_norms_2d.push_back(info.step_sq_norm_2d);
        run.step_sq_norms_tail.push_back(info.step_sq_norm_tail);
        run.deltas.push_back(run.final_state.delta);
        ++run.executed_steps;
        if (opts.trace_every > 0 && run.final_state.t % opts.trace_every == 0) {
            TraceRow row;
            row.t = run.final_state.t;
            row.delta = run.final_state.delta;
            row.g_dot_n = info.selection.along_normal;
            row.g1 = info.selection.step.c1;
            row.g2 = info.selection.step.c2;
            row.log_sigma = run.final_state.log_sigma;
            row.f_value = f_value;
            run.trace.push_back(row);
        }
        if (info.status != CsaStatus::running) {
            run.status = info.status;
            break;
        }
    }
    run.burn_in = run.executed_steps < opts.steps ? std::min(burn, default_burn_in(run.executed_steps))
                                                  : burn;
    run.log_sigma_at_burn_in = log_sigma_path[static_cast<std::size_t>(run.burn_in)];
    const auto drop = static_cast<std::ptrdiff_t>(run.burn_in);
    for (auto* series : {&run.log_sigma_changes, &run.step_sq_norms_2d, &run.step_sq_norms_tail,
                         &run.deltas}) {
        series->erase(series->begin(), series->begin() + drop);
    }
    return run;
}

// ---------------------------------------------------------------------------
// Full trajectory in the (e1, e2) plane

struct ConstantStepSize {
    double sigma = 1.0;
};

using StepSizeRule = std::variant<ConstantStepSize, CsaConfig>;

struct FullEsOptions {
    std::int64_t steps = 1'000'000;
    std::int64_t burn_in = -1;
    std::int64_t trace_every = 0;
    double delta0 = 1.0;
    int batch_count = kDefaultBatchCount;
};

struct FullEsRun {
    Step2 position;            // X_T, reduced coordinates
    std::vector<double> path;  // CSA evolution path (empty for constant sigma)
    double log_sigma = 0.0;
    std::int64_t executed_steps = 0;
    std::int64_t burn_in = 0;
    CsaStatus status = CsaStatus::running;
    /// Rows for t = 0, trace_every, ...; the step columns are NaN at t = 0.
    std::vector<TraceRow> trajectory;
    OnlineRegression f_vs_t;  // least squares of f(X_t) on t, t = 0..T
    BatchMeans g1;            // post-burn-in [N*]_1
    double min_g_value = std::numeric_limits<double>::infinity();
};

/// Simulates X_{t+1} = X_t + sigma_t N*_t from X_0 = -sigma_0 delta0 n with
/// sigma_0 = 1 for CSA (so X_0 = -n by default). delta_t is recomputed from
/// the position as g(X_t) / sigma_t each generation; the state of the
/// normalized chains is never consulted.
inline FullEsRun run_full_es(const ProblemConfig& cfg, const StepSizeRule& rule,
                             const FullEsOptions& opts, RngStream& rng) {
    const std::int64_t burn = opts.burn_in < 0 ? default_burn_in(opts.steps) : opts.burn_in;
    detail::check_run_lengths(opts.steps, burn);
    const auto* csa = std::get_if<CsaConfig>(&rule);
    if (csa != nullptr && !(csa->problem() == cfg)) {
        throw ConfigError("run_full_es: CSA config belongs to a different problem");
    }
    double sigma = 1.0;
    if (const auto* constant = std::get_if<ConstantStepSize>(&rule)) {
        if (!(constant->sigma > 0.0) || std::isinf(constant->sigma)) {
            throw ConfigError("sigma must be finite and > 0");
        }
        sigma = constant->sigma;
    }
    FullEsRun run;
    run.burn_in = burn;
    run.log_sigma = std::log(sigma);
    const Step2 n = cfg.normal();
    const double start = -sigma * NormalizedDistance(opts.delta0).value();
    run.position = {start * n.c1, start * n.c2};
    if (csa != nullptr) run.path.assign(static_cast<std::size_t>(cfg.dim()), 0.0);
    run.g1 = detail::make_batch_means(opts.steps - burn, opts.batch_count);

    ResampleBatch scratch;
    std::vector<double> tail;
    constexpr double nan = std::numeric_limits<double>::quiet_NaN();
    auto record = [&](std::int64_t t, const Selection* sel) {
        const double g = cfg.constraint(run.position);
        run.min_g_value = std::min(run.min_g_value, g);
        run.f_vs_t.add(static_cast<double>(t), cfg.objective(run.position));
        if (opts.trace_every > 0 && t % opts.trace_every == 0) {
            TraceRow row;
            row.t = t;
            row.delta = g / std::exp(run.log_sigma);
            row.g_dot_n = sel != nullptr ? sel->along_normal : nan;
            row.g1 = sel != nullptr ? sel->step.c1 : nan;
            row.g2 = sel != nullptr ? sel->step.c2 : nan;
            row.log_sigma = run.log_sigma;
            row.f_value = cfg.objective(run.position);
            run.trajectory.push_back(row);
        }
    };
    record(0, nullptr);
    for (std::int64_t k = 0; k < opts.steps; ++k) {
        sigma = std::exp(run.log_sigma);
        // Rounding in X can push g a hair below zero when the parent sits on
        // the constraint; the sampler needs delta >= 0.
        const double delta = std::max(0.0, cfg.constraint(run.position) / sigma);
        draw_batch(rng, cfg.lambda(), scratch);
        const Selection sel = select(cfg, NormalizedDistance(delta), scratch);
        run.position.c1 += sigma * sel.step.c1;
        run.position.c2 += sigma * sel.step.c2;
        if (k >= burn) run.g1.add(sel.step.c1);
        if (csa != nullptr) {
            tail.resize(run.path.size() - 2);
            for (double& z : tail) z = rng.normal();
            const double keep = 1.0 - csa->c();
            const double w = csa->path_weight();
            run.path[0] = keep * run.path[0] + w * sel.step.c1;
            run.path[1] = keep * run.path[1] + w * sel.step.c2;
            double sq = run.path[0] * run.path[0] + run.path[1] * run.path[1];
            for (std::size_t j = 2; j < run.path.size(); ++j) {
                run.path[j] = keep * run.path[j] + w * tail[j - 2];
                sq += run.path[j] * run.path[j];
            }
            run.log_sigma += csa->log_sigma_change(sq);
        }
        ++run.executed_steps;
        record(k + 1, &sel);
        if (run.log_sigma > kLogSigmaGuard) run.status = CsaStatus::sigma_overflow;
        if (run.log_sigma < -kLogSigmaGuard) run.status = CsaStatus::sigma_underflow;
        if (run.status != CsaStatus::running) break;
    }
    return run;
}

}  // namespace esmc
