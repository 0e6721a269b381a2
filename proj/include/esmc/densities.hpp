#pragma once

// Analytic densities of the feasible step (one resampled offspring) and of the
// selected step (best of lambda feasible offspring), given the normalized
// distance delta to the constraint.

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <utility>
#include <vector>

#include "esmc/normal.hpp"
#include "esmc/problem.hpp"
#include "esmc/quadrature.hpp"

namespace esmc {

/// Lower end of the truncated real line used by every quadrature here.
inline constexpr double kQuadLower = -9.0;
/// Upper end is max(kQuadUpper, delta); Gaussian mass beyond +-9 is < 1e-18.
inline constexpr double kQuadUpper = 9.0;

/// 2-D standard normal density restricted to the feasible half-plane
/// {x : x . n <= delta}, renormalized by Phi(delta).
inline double feasible_step_pdf(const ProblemConfig& cfg, NormalizedDistance delta, Step2 x) {
    const double d = delta.value();
    if (d - x.dot(cfg.normal()) < 0.0) return 0.0;
    return std_normal_pdf(x.c1) * std_normal_pdf(x.c2) / std_normal_cdf(d);
}

/// Marginal density of the e1 component of a feasible step.
inline double feasible_step_marginal1_pdf(const ProblemConfig& cfg, NormalizedDistance delta,
                                          double x1) {
    const double d = delta.value();
    return std_normal_pdf(x1) * std_normal_cdf((d - x1 * cfg.cos_theta()) / cfg.sin_theta()) /
           std_normal_cdf(d);
}

/// F_{1,delta}: CDF of the e1 component of a feasible step.
///
/// Tabulated once per (theta, delta) as cumulative sums over short panels,
/// each integrated adaptively; an evaluation is one table lookup plus a single
/// GK15 rule on the partial panel. Immutable after construction.
class FeasibleMarginalCdf {
public:
    FeasibleMarginalCdf(const ProblemConfig& cfg, NormalizedDistance delta)
        : cfg_(cfg), delta_(delta), lo_(kQuadLower), hi_(std::max(kQuadUpper, delta.value())) {
        // Panels must resolve the smoothed step Phi((delta - x cos)/sin),
        // whose width scales with sin(theta).
        const double target = std::min(0.25, 0.5 * cfg.sin_theta());
        const auto panels = static_cast<std::size_t>(std::ceil((hi_ - lo_) / target));
        width_ = (hi_ - lo_) / static_cast<double>(panels);
        cumulative_.assign(panels + 1, 0.0);
        const QuadOptions opts{1e-17, 1e-13, 200};
        for (std::size_t k = 0; k < panels; ++k) {
            const double a = lo_ + width_ * static_cast<double>(k);
            const double b = (k + 1 == panels) ? hi_ : a + width_;
            cumulative_[k + 1] = cumulative_[k] + integrate(density(), a, b, opts).value;
        }
    }

    double operator()(double x1) const {
        if (!(x1 > lo_)) return 0.0;
        if (x1 >= hi_) return 1.0;
        auto k = static_cast<std::size_t>((x1 - lo_) / width_);
        k = std::min(k, cumulative_.size() - 2);
        const double a = lo_ + width_ * static_cast<double>(k);
        const double value = cumulative_[k] + gk15_rule(density(), a, x1);
        return std::clamp(value, 0.0, 1.0);
    }

    double total_mass() const noexcept { return cumulative_.back(); }
    NormalizedDistance delta() const noexcept { return delta_; }

private:
    struct Density {
        const FeasibleMarginalCdf* self;
        double operator()(double x) const {
            return feasible_step_marginal1_pdf(self->cfg_, self->delta_, x);
        }
    };
    Density density() const { return {this}; }

    ProblemConfig cfg_;
    NormalizedDistance delta_;
    double lo_;
    double hi_;
    double width_ = 0.0;
    std::vector<double> cumulative_;
};

namespace detail {

// Process-wide memo of F_{1,delta} tables. Entries are immutable and handed
// out as shared_ptr<const>, so a reader never sees a partially built table.
class MarginalCdfCache {
public:
    std::shared_ptr<const FeasibleMarginalCdf> get(const ProblemConfig& cfg,
                                                   NormalizedDistance delta) {
        const Key key{cfg.theta(), delta.value()};
        {
            std::shared_lock lock(mutex_);
            if (auto it = entries_.find(key); it != entries_.end()) return it->second;
        }
        auto table = std::make_shared<const FeasibleMarginalCdf>(cfg, delta);
        std::unique_lock lock(mutex_);
        if (entries_.size() >= kCapacity) entries_.clear();
        return entries_.try_emplace(key, std::move(table)).first->second;
    }

private:
    using Key = std::pair<double, double>;
    static constexpr std::size_t kCapacity = 512;
    std::shared_mutex mutex_;
    std::map<Key, std::shared_ptr<const FeasibleMarginalCdf>> entries_;
};

inline MarginalCdfCache& marginal_cdf_cache() {
    static MarginalCdfCache cache;
    return cache;
}

}  // namespace detail

inline std::shared_ptr<const FeasibleMarginalCdf> feasible_marginal_cdf(
    const ProblemConfig& cfg, NormalizedDistance delta) {
    // Pointwise density evaluations hit the same table many times in a row.
    thread_local double last_theta = std::nan("");
    thread_local double last_delta = std::nan("");
    thread_local std::shared_ptr<const FeasibleMarginalCdf> last;
    if (last && last_theta == cfg.theta() && last_delta == delta.value()) return last;
    last = detail::marginal_cdf_cache().get(cfg, delta);
    last_theta = cfg.theta();
    last_delta = delta.value();
    return last;
}

inline double feasible_step_marginal1_cdf(const ProblemConfig& cfg, NormalizedDistance delta,
                                          double x1) {
    return (*feasible_marginal_cdf(cfg, delta))(x1);
}

/// Density of the selected step: lambda * p_delta(x) * F_{1,delta}(x_1)^(lambda-1).
inline double selected_step_pdf(const ProblemConfig& cfg, NormalizedDistance delta, Step2 x) {
    const double p = feasible_step_pdf(cfg, delta, x);
    if (p == 0.0) return 0.0;
    const double f = feasible_step_marginal1_cdf(cfg, delta, x.c1);
    return cfg.lambda() * p * std::pow(f, cfg.lambda() - 1);
}

inline double selected_step_marginal1_pdf(const ProblemConfig& cfg, NormalizedDistance delta,
                                          double x1) {
    const double f = feasible_step_marginal1_cdf(cfg, delta, x1);
    return cfg.lambda() * feasible_step_marginal1_pdf(cfg, delta, x1) *
           std::pow(f, cfg.lambda() - 1);
}

/// Marginal density of the e2 component of the selected step. The inner
/// integral over the e1 coordinate runs up to the constraint line.
inline double selected_step_marginal2_pdf(const ProblemConfig& cfg, NormalizedDistance delta,
                                          double x2) {
    const double d = delta.value();
    const double upper = std::min((d - x2 * cfg.sin_theta()) / cfg.cos_theta(),
                                  std::max(kQuadUpper, d));
    if (!(upper > kQuadLower)) return 0.0;
    const auto cdf = feasible_marginal_cdf(cfg, delta);
    const int power = cfg.lambda() - 1;
    auto inner = [&](double u) { return std_normal_pdf(u) * std::pow((*cdf)(u), power); };
    const QuadResult r = integrate(inner, kQuadLower, upper, {1e-15, 1e-11, 400});
    return cfg.lambda() * std_normal_pdf(x2) / std_normal_cdf(d) * r.value;
}

/// E[f(N*)] for the selected step N* at distance delta, by nested adaptive
/// quadrature over the feasible region. The inner integral over e2 stops
/// exactly at the constraint line, so the indicator never has to be resolved.
///
/// Throws QuadratureError (with the best estimate) when `tol` is not reached.
template <class F>
QuadResult quadrature_expectation(F&& f, const ProblemConfig& cfg, NormalizedDistance delta,
                                  double tol) {
    const double d = delta.value();
    const auto cdf = feasible_marginal_cdf(cfg, delta);
    const int power = cfg.lambda() - 1;
    const double norm = cfg.lambda() / std_normal_cdf(d);
    const double hi = std::max(kQuadUpper, d);
    // Since the integral of phi(x1) F(x1)^(lambda-1) is at most 1, an inner
    // error of e per point contributes at most norm * e to the total.
    const double inner_tol = 0.1 * tol / norm;
    double inner_error = 0.0;
    bool inner_ok = true;
    auto outer = [&](double x1) {
        const double weight = norm * std_normal_pdf(x1) * std::pow((*cdf)(x1), power);
        if (weight == 0.0) return 0.0;
        const double upper = std::min((d - x1 * cfg.cos_theta()) / cfg.sin_theta(), hi);
        auto inner = [&](double x2) { return f(Step2{x1, x2}) * std_normal_pdf(x2); };
        const QuadResult r = integrate(inner, kQuadLower, upper, {inner_tol, 1e-13, 400});
        inner_ok = inner_ok && r.converged;
        inner_error = std::max(inner_error, r.abs_error);
        return weight * r.value;
    };
    QuadResult r = integrate(outer, kQuadLower, hi, {0.5 * tol, 1e-13, 1000});
    r.abs_error += norm * inner_error;
    r.converged = r.converged && inner_ok && r.abs_error <= tol;
    if (!r.converged) {
        throw QuadratureError("quadrature_expectation did not reach the requested tolerance",
                              r.value, r.abs_error);
    }
    return r;
}

/// Density of the maximum of lambda i.i.d. standard normals: the large-delta
/// limit of the e1 marginal of the selected step.
inline double max_order_statistic_pdf(int lambda, double x) {
    return lambda * std_normal_pdf(x) * std::pow(std_normal_cdf(x), lambda - 1);
}

/// E[g(N_{lambda:lambda})] by adaptive quadrature of the order-statistic density.
template <class G>
double max_order_statistic_expectation(int lambda, G&& g, double tol = 1e-13) {
    auto integrand = [&](double x) { return g(x) * max_order_statistic_pdf(lambda, x); };
    return integrate_checked(integrand, -12.0, 12.0, {tol, 1e-13, 2000}).value;
}

}  // namespace esmc
