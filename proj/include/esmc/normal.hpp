#pragma once

// Scalar standard-normal primitives and the upper-truncated normal quantile
// that the samplers are built on.

#include <cmath>
#include <numbers>
#include <string>

#include "esmc/errors.hpp"

namespace esmc {

/// A probability in [0, 1].
class Probability {
public:
    constexpr Probability() = default;
    explicit Probability(double value) : value_(value) {
        if (!(value >= 0.0 && value <= 1.0)) {
            throw DomainError("probability must lie in [0, 1], got " + std::to_string(value));
        }
    }
    constexpr double value() const noexcept { return value_; }

private:
    double value_ = 0.0;
};

/// Distance of the parent to the constraint hyperplane in units of the step-size.
class NormalizedDistance {
public:
    constexpr NormalizedDistance() = default;
    explicit NormalizedDistance(double delta) : delta_(delta) {
        if (!(delta >= 0.0) || std::isinf(delta)) {
            throw DomainError("normalized distance must be finite and >= 0, got " +
                              std::to_string(delta));
        }
    }
    constexpr double value() const noexcept { return delta_; }

private:
    double delta_ = 0.0;
};

inline constexpr double kInvSqrt2Pi = 0.3989422804014326779399460599343818684758586311649;
inline constexpr double kSqrt2Pi = 2.5066282746310005024157652848110452530069867406099;
inline constexpr double kInvSqrt2 = 0.7071067811865475244008443621048490392848359376885;

inline double std_normal_pdf(double x) noexcept { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

/// Phi(x). Uses erfc on the side where it keeps full relative accuracy.
inline double std_normal_cdf(double x) noexcept {
    if (x < 0.0) return 0.5 * std::erfc(-x * kInvSqrt2);
    return 1.0 - 0.5 * std::erfc(x * kInvSqrt2);
}

/// 1 - Phi(x), accurate in the upper tail.
inline double std_normal_sf(double x) noexcept {
    if (x > 0.0) return 0.5 * std::erfc(x * kInvSqrt2);
    return 1.0 - 0.5 * std::erfc(-x * kInvSqrt2);
}

namespace detail {

// Acklam's rational approximation of the lower-tail quantile, valid for
// 0 < p <= 0.5 (relative error ~1.2e-9 before refinement).
inline double acklam_lower(double p) noexcept {
    static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                   -2.759285104469687e+02, 1.383577518672690e+02,
                                   -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                   -1.556989798598866e+02, 6.680131188771972e+01,
                                   -1.328068155288572e+01};
    static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                   -2.400758277161838e+00, -2.549732539343734e+00,
                                   4.374664141464968e+00,  2.938163982698783e+00};
    static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                   2.445134137142996e+00, 3.754408661907416e+00};
    constexpr double p_low = 0.02425;
    if (p < p_low) {
        const double q = std::sqrt(-2.0 * std::log(p));
        return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    const double q = p - 0.5;
    const double r = q * q;
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
           (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

// Quantile given both p and its complement q = 1 - p, each supplied to full
// precision by the caller. One Halley step against erfc brings the result to
// the accuracy of the CDF itself.
inline double normal_quantile_pq(double p, double q) noexcept {
    if (p <= 0.5) {
        double x = acklam_lower(p);
        const double u = (std_normal_cdf(x) - p) * kSqrt2Pi * std::exp(0.5 * x * x);
        x -= u / (1.0 + 0.5 * x * u);
        return x;
    }
    double x = -acklam_lower(q);
    const double u = (std_normal_sf(x) - q) * kSqrt2Pi * std::exp(0.5 * x * x);
    x += u / (1.0 - 0.5 * x * u);
    return x;
}

}  // namespace detail

/// Phi^{-1}(u). Throws DomainError at u in {0, 1}, where the quantile is infinite.
inline double std_normal_quantile(Probability u) {
    const double p = u.value();
    if (p <= 0.0 || p >= 1.0) {
        throw DomainError("std_normal_quantile requires 0 < u < 1");
    }
    return detail::normal_quantile_pq(p, 1.0 - p);
}

inline double std_normal_quantile(double u) { return std_normal_quantile(Probability(u)); }

/// Generalized inverse of F_delta(x) = min(1, Phi(x) / Phi(delta)), the CDF of
/// a standard normal truncated to (-inf, delta].
///
/// The tail mass 1 - Phi(delta) is kept separately so that the complement of
/// u * Phi(delta) is formed without cancellation near the upper support bound.
class TruncatedNormalQuantile {
public:
    explicit TruncatedNormalQuantile(NormalizedDistance delta)
        : delta_(delta.value()),
          mass_(std_normal_cdf(delta_)),
          tail_(std_normal_sf(delta_)) {}

    double delta() const noexcept { return delta_; }
    double mass() const noexcept { return mass_; }

    double operator()(Probability u) const {
        const double v = u.value();
        if (v <= 0.0) throw DomainError("trunc_normal_inverse: u = 0 maps to -infinity");
        if (v >= 1.0) return delta_;
        double p;
        double q;
        if (delta_ > 6.0) {
            const long double ul = v;
            p = static_cast<double>(ul * static_cast<long double>(mass_));
            q = static_cast<double>((1.0L - ul) + ul * static_cast<long double>(tail_));
        } else {
            p = v * mass_;
            q = (1.0 - v) + v * tail_;
        }
        const double x = detail::normal_quantile_pq(p, q);
        return x < delta_ ? x : delta_;
    }

private:
    double delta_;
    double mass_;
    double tail_;
};

inline double trunc_normal_inverse(NormalizedDistance delta, Probability u) {
    return TruncatedNormalQuantile(delta)(u);
}

}  // namespace esmc
