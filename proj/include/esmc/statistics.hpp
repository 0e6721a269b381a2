#pragma once

// Streaming moments, batch-means standard errors, online least squares, and
// Kolmogorov-Smirnov tests.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "esmc/errors.hpp"

namespace esmc {

/// Neumaier-compensated sum.
class CompensatedSum {
public:
    void add(double x) noexcept {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x)) {
            comp_ += (sum_ - t) + x;
        } else {
            comp_ += (x - t) + sum_;
        }
        sum_ = t;
    }
    double value() const noexcept { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

/// Welford accumulator; merge() is associative so partial results from
/// independent workers can be combined in any grouping.
class RunningMoments {
public:
    void add(double x) noexcept {
        ++count_;
        const double d = x - mean_;
        mean_ += d / static_cast<double>(count_);
        m2_ += d * (x - mean_);
    }

    void merge(const RunningMoments& o) noexcept {
        if (o.count_ == 0) return;
        if (count_ == 0) {
            *this = o;
            return;
        }
        const auto n = static_cast<double>(count_ + o.count_);
        const double d = o.mean_ - mean_;
        mean_ += d * static_cast<double>(o.count_) / n;
        m2_ += o.m2_ + d * d * static_cast<double>(count_) * static_cast<double>(o.count_) / n;
        count_ += o.count_;
    }

    std::int64_t count() const noexcept { return count_; }
    double mean() const noexcept { return mean_; }
    double variance() const noexcept {
        return count_ > 1 ? m2_ / static_cast<double>(count_ - 1) : 0.0;
    }
    /// Standard error of the mean assuming independent samples.
    double std_error() const noexcept {
        return count_ > 1 ? std::sqrt(variance() / static_cast<double>(count_)) : 0.0;
    }

private:
    std::int64_t count_ = 0;
    double mean_ = 0.0;
    double m2_ = 0.0;
};

/// Standard error of the mean of a correlated series from non-overlapping
/// batch means. The first batch_count * floor(n / batch_count) values are used.
inline double batch_means_se(std::span<const double> series, int batch_count) {
    if (batch_count < 2) throw ConfigError("batch_means_se: batch_count must be >= 2");
    if (series.size() < 2 * static_cast<std::size_t>(batch_count)) {
        throw ConfigError("batch_means_se: series shorter than 2 * batch_count");
    }
    const std::size_t m = series.size() / static_cast<std::size_t>(batch_count);
    RunningMoments means;
    for (int b = 0; b < batch_count; ++b) {
        CompensatedSum s;
        for (std::size_t i = 0; i < m; ++i) s.add(series[static_cast<std::size_t>(b) * m + i]);
        means.add(s.value() / static_cast<double>(m));
    }
    return means.std_error();
}

/// Streaming batch-means accumulator for a series of known total length.
class BatchMeans {
public:
    BatchMeans() = default;
    BatchMeans(std::int64_t expected, int batch_count) {
        if (batch_count < 2) throw ConfigError("BatchMeans: batch_count must be >= 2");
        if (expected < 2 * static_cast<std::int64_t>(batch_count)) {
            throw ConfigError("BatchMeans: need at least 2 samples per batch (" +
                              std::to_string(expected) + " samples for " +
                              std::to_string(batch_count) + " batches)");
        }
        batch_size_ = expected / batch_count;
        batch_count_ = batch_count;
    }

    void add(double x) noexcept {
        total_.add(x);
        ++count_;
        if (batches_.count() < batch_count_) {
            current_.add(x);
            if (++in_batch_ == batch_size_) {
                batches_.add(current_.value() / static_cast<double>(batch_size_));
                current_ = {};
                in_batch_ = 0;
            }
        }
    }

    std::int64_t count() const noexcept { return count_; }
    int batch_count() const noexcept { return static_cast<int>(batches_.count()); }
    double mean() const noexcept {
        return count_ > 0 ? total_.value() / static_cast<double>(count_) : 0.0;
    }
    double sum() const noexcept { return total_.value(); }
    /// NaN until at least two batches are complete.
    double std_error() const noexcept {
        return batches_.count() >= 2 ? batches_.std_error() : std::nan("");
    }

private:
    std::int64_t batch_size_ = 1;
    std::int64_t batch_count_ = 0;
    std::int64_t count_ = 0;
    std::int64_t in_batch_ = 0;
    CompensatedSum total_;
    CompensatedSum current_;
    RunningMoments batches_;
};

/// Online simple linear regression y = a + b t.
class OnlineRegression {
public:
    void add(double t, double y) noexcept {
        ++n_;
        const double dt = t - mean_t_;
        mean_t_ += dt / static_cast<double>(n_);
        const double dy = y - mean_y_;
        mean_y_ += dy / static_cast<double>(n_);
        stt_ += dt * (t - mean_t_);
        sty_ += dt * (y - mean_y_);
    }
    std::int64_t count() const noexcept { return n_; }
    double slope() const noexcept { return stt_ > 0.0 ? sty_ / stt_ : std::nan(""); }
    double intercept() const noexcept { return mean_y_ - slope() * mean_t_; }

private:
    std::int64_t n_ = 0;
    double mean_t_ = 0.0;
    double mean_y_ = 0.0;
    double stt_ = 0.0;
    double sty_ = 0.0;
};

/// Survival function of the Kolmogorov distribution, P(K > x).
inline double kolmogorov_sf(double x) {
    if (x <= 0.0) return 1.0;
    constexpr double pi2 = std::numbers::pi * std::numbers::pi;
    if (x < 1.18) {
        // Jacobi-theta form converges fast for small x.
        const double w = -pi2 / (8.0 * x * x);
        double s = 0.0;
        for (int k = 1; k <= 9; k += 2) s += std::exp(w * k * k);
        return std::clamp(1.0 - std::sqrt(2.0 * std::numbers::pi) / x * s, 0.0, 1.0);
    }
    double s = 0.0;
    double sign = 1.0;
    for (int k = 1; k <= 100; ++k) {
        const double term = std::exp(-2.0 * k * k * x * x);
        s += sign * term;
        if (term < 1e-18) break;
        sign = -sign;
    }
    return std::clamp(2.0 * s, 0.0, 1.0);
}

struct KsResult {
    double statistic = 0.0;
    double p_value = 1.0;
    bool passed = true;
};

namespace detail {

inline double ks_p_value(double statistic, double effective_n) {
    const double root = std::sqrt(effective_n);
    return kolmogorov_sf((root + 0.12 + 0.11 / root) * statistic);
}

}  // namespace detail

/// Two-sample KS test; passes when the p-value is at least `significance`.
inline KsResult ks_two_sample(std::span<const double> a, std::span<const double> b,
                              double significance) {
    if (a.empty() || b.empty()) throw ConfigError("ks_two_sample: both samples must be nonempty");
    std::vector<double> x(a.begin(), a.end());
    std::vector<double> y(b.begin(), b.end());
    std::sort(x.begin(), x.end());
    std::sort(y.begin(), y.end());
    const auto n = static_cast<double>(x.size());
    const auto m = static_cast<double>(y.size());
    std::size_t i = 0;
    std::size_t j = 0;
    double d = 0.0;
    while (i < x.size() && j < y.size()) {
        const double v = std::min(x[i], y[j]);
        while (i < x.size() && x[i] == v) ++i;
        while (j < y.size() && y[j] == v) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / n - static_cast<double>(j) / m));
    }
    KsResult r;
    r.statistic = d;
    r.p_value = detail::ks_p_value(d, n * m / (n + m));
    r.passed = r.p_value >= significance;
    return r;
}

/// One-sample KS test against a continuous CDF.
template <class Cdf>
KsResult ks_one_sample(std::span<const double> sample, Cdf&& cdf, double significance) {
    if (sample.empty()) throw ConfigError("ks_one_sample: sample must be nonempty");
    std::vector<double> x(sample.begin(), sample.end());
    std::sort(x.begin(), x.end());
    const auto n = static_cast<double>(x.size());
    double d = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double f = cdf(x[i]);
        d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
    }
    KsResult r;
    r.statistic = d;
    r.p_value = detail::ks_p_value(d, n);
    r.passed = r.p_value >= significance;
    return r;
}

}  // namespace esmc
