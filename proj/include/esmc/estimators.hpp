#pragma once

// Monte Carlo estimators over chain runs, each reported with a batch-means
// standard error.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "esmc/chain.hpp"
#include "esmc/densities.hpp"
#include "esmc/sampling.hpp"
#include "esmc/statistics.hpp"

namespace esmc {

struct EstimateReport {
    double value = 0.0;
    double std_error = 0.0;
    std::int64_t n_samples = 0;
    std::int64_t burn_in = 0;
    int batch_count = 0;
};

enum class Verdict { diverges, converges, inconclusive };

inline std::string to_string(Verdict v) {
    switch (v) {
        case Verdict::diverges: return "diverges";
        case Verdict::converges: return "converges";
        case Verdict::inconclusive: return "inconclusive";
    }
    return "inconclusive";
}

/// Sign of the estimate, reported only when it clears `k` standard errors.
inline Verdict sign_verdict(const EstimateReport& r, double k = 3.0) {
    if (!(r.std_error >= 0.0)) return Verdict::inconclusive;
    if (r.value > k * r.std_error) return Verdict::diverges;
    if (r.value < -k * r.std_error) return Verdict::converges;
    return Verdict::inconclusive;
}

inline EstimateReport to_report(const BatchMeans& bm, std::int64_t burn_in, double scale = 1.0) {
    return {scale * bm.mean(), std::abs(scale) * bm.std_error(), bm.count(), burn_in,
            bm.batch_count()};
}

/// Report for a stored series: mean plus batch-means SE.
inline EstimateReport series_report(std::span<const double> series, std::int64_t burn_in,
                                    int batch_count = kDefaultBatchCount) {
    EstimateReport r;
    CompensatedSum sum;
    for (double x : series) sum.add(x);
    r.n_samples = static_cast<std::int64_t>(series.size());
    r.burn_in = burn_in;
    r.value = r.n_samples > 0 ? sum.value() / static_cast<double>(r.n_samples) : 0.0;
    const auto usable = static_cast<int>(
        std::min<std::int64_t>(batch_count, r.n_samples / 2));
    if (usable >= 2) {
        r.batch_count = usable;
        r.std_error = batch_means_se(series, usable);
    } else {
        r.std_error = std::nan("");
    }
    return r;
}

namespace detail {

inline ConstSigmaRun run_chain_for_estimate(const ProblemConfig& cfg, double sigma,
                                            std::int64_t steps, std::int64_t burn_in,
                                            RngStream& rng, double delta0) {
    if (steps <= 0) throw ConfigError("steps must be > 0");
    ConstSigmaOptions opts;
    opts.sigma = sigma;
    opts.steps = steps;
    opts.burn_in = burn_in;
    opts.delta0 = delta0;
    return run_const_sigma(cfg, opts, rng);
}

}  // namespace detail

/// sigma * time-average of [N*]_1 after burn-in: the constant-speed divergence
/// rate of f(X_t).
inline EstimateReport progress_rate(const ProblemConfig& cfg, double sigma, std::int64_t steps,
                                    std::int64_t burn_in, RngStream& rng, double delta0 = 1.0) {
    const ConstSigmaRun run = detail::run_chain_for_estimate(cfg, sigma, steps, burn_in, rng, delta0);
    return to_report(run.stats.g1, run.burn_in, sigma);
}

inline EstimateReport stationary_delta_mean(const ProblemConfig& cfg, std::int64_t steps,
                                            std::int64_t burn_in, RngStream& rng) {
    const ConstSigmaRun run = detail::run_chain_for_estimate(cfg, 1.0, steps, burn_in, rng, 1.0);
    return to_report(run.stats.delta, run.burn_in);
}

/// Stationarity identities of the constant-sigma chain: E_pi[G.n] = 0 and
/// E_pi[G_1] + tan(theta) E_pi[G_2] = 0.
struct StationarityIdentities {
    EstimateReport g_dot_n;
    EstimateReport g1_plus_tan_g2;
    EstimateReport g1;
    EstimateReport g2;
};

inline StationarityIdentities stationarity_identities(const ConstSigmaRun& run) {
    return {to_report(run.stats.g_dot_n, run.burn_in),
            to_report(run.stats.g1_plus_tan_g2, run.burn_in), to_report(run.stats.g1, run.burn_in),
            to_report(run.stats.g2, run.burn_in)};
}

struct SlopeReport {
    EstimateReport estimate;  // (1/T) ln(sigma_T / sigma_B)
    CsaStatus status = CsaStatus::running;
    std::int64_t executed_steps = 0;
    double mean_sq_norm_2d = 0.0;    // time-average of |N*|^2 in the plane
    double mean_sq_norm_tail = 0.0;  // time-average of the tail coordinates' squares
};

/// Log step-size slope of a CSA run. Positive beyond 3 SE: sigma diverges
/// geometrically.
inline SlopeReport log_sigma_slope(const CsaConfig& cfg, std::int64_t steps, std::int64_t burn_in,
                                   RngStream& rng) {
    CsaRunOptions opts;
    opts.steps = steps;
    opts.burn_in = burn_in;
    const CsaRun run = run_csa(cfg, opts, rng);
    SlopeReport out;
    out.estimate = series_report(run.log_sigma_changes, run.burn_in);
    out.estimate.value = run.slope();
    out.status = run.status;
    out.executed_steps = run.executed_steps;
    out.mean_sq_norm_2d = series_report(run.step_sq_norms_2d, run.burn_in).value;
    out.mean_sq_norm_tail = series_report(run.step_sq_norms_tail, run.burn_in).value;
    return out;
}

struct DriftProbeResult {
    double alpha = 0.0;
    std::vector<double> delta_grid;
    std::vector<double> ratio;  // Delta V / V (delta) for V = exp(alpha delta)
    std::vector<double> std_errors;
};

/// Monte Carlo estimate of E[exp(-alpha G(delta, W).n)] - 1 at each grid point.
inline DriftProbeResult drift_probe(const ProblemConfig& cfg, double alpha,
                                    std::span<const double> delta_grid,
                                    std::int64_t samples_per_point, RngStream& rng) {
    if (!(alpha > 0.0)) throw ConfigError("drift_probe: alpha must be > 0");
    if (samples_per_point < 2) throw ConfigError("drift_probe: need at least 2 samples per point");
    DriftProbeResult out;
    out.alpha = alpha;
    out.delta_grid.assign(delta_grid.begin(), delta_grid.end());
    ResampleBatch batch;
    for (double d : delta_grid) {
        const NormalizedDistance delta(d);
        RunningMoments m;
        for (std::int64_t i = 0; i < samples_per_point; ++i) {
            draw_batch(rng, cfg.lambda(), batch);
            m.add(std::exp(-alpha * select(cfg, delta, batch).along_normal));
        }
        out.ratio.push_back(m.mean() - 1.0);
        out.std_errors.push_back(m.std_error());
    }
    return out;
}

/// Large-delta limit of the drift ratio: E[exp(-alpha cos(theta) N_{lambda:lambda})]
/// * exp(alpha^2 sin^2(theta) / 2) - 1, the order-statistic MGF by quadrature.
inline double drift_ratio_limit(const ProblemConfig& cfg, double alpha) {
    const double a = -alpha * cfg.cos_theta();
    const double mgf = max_order_statistic_expectation(cfg.lambda(), [a](double x) {
        return std::exp(a * x);
    });
    const double s = alpha * cfg.sin_theta();
    return mgf * std::exp(0.5 * s * s) - 1.0;
}

}  // namespace esmc
