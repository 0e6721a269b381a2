#pragma once

// Geometry of the linear objective f(x) = x_1 under the linear constraint
// g(x) = -x . n >= 0, with n = (cos theta, sin theta) in the (e1, e2) plane.

#include <cmath>
#include <numbers>
#include <string>

#include "esmc/errors.hpp"

namespace esmc {

/// A vector in the (e1, e2) plane; e1 is the objective gradient.
struct Step2 {
    double c1 = 0.0;
    double c2 = 0.0;

    constexpr double dot(const Step2& o) const noexcept { return c1 * o.c1 + c2 * o.c2; }
    constexpr double squared_norm() const noexcept { return c1 * c1 + c2 * c2; }
    friend constexpr bool operator==(const Step2&, const Step2&) = default;
};

class ProblemConfig {
public:
    /// Throws ConfigError unless 0 < theta < pi/2, lambda >= 2, dim >= 2.
    ProblemConfig(double theta, int lambda, int dim = 2)
        : theta_(theta), lambda_(lambda), dim_(dim) {
        if (!(theta > 0.0 && theta < std::numbers::pi / 2)) {
            throw ConfigError("theta must lie in the open interval (0, pi/2), got " +
                              std::to_string(theta));
        }
        if (lambda < 2) {
            throw ConfigError("lambda (offspring count) must be >= 2, got " +
                              std::to_string(lambda));
        }
        if (dim < 2) {
            throw ConfigError("dim (search-space dimension) must be >= 2, got " +
                              std::to_string(dim));
        }
        cos_ = std::cos(theta);
        sin_ = std::sin(theta);
    }

    double theta() const noexcept { return theta_; }
    int lambda() const noexcept { return lambda_; }
    int dim() const noexcept { return dim_; }
    double cos_theta() const noexcept { return cos_; }
    double sin_theta() const noexcept { return sin_; }

    /// Unit normal of the constraint hyperplane, pointing into the unfeasible side.
    Step2 normal() const noexcept { return {cos_, sin_}; }
    /// Orthogonal complement used when rotating (n, n_perp) coordinates back to (e1, e2).
    Step2 normal_perp() const noexcept { return {sin_, -cos_}; }

    double objective(const Step2& x) const noexcept { return x.c1; }
    double constraint(const Step2& x) const noexcept { return -x.dot(normal()); }

    friend bool operator==(const ProblemConfig& a, const ProblemConfig& b) noexcept {
        return a.theta_ == b.theta_ && a.lambda_ == b.lambda_ && a.dim_ == b.dim_;
    }

private:
    double theta_;
    int lambda_;
    int dim_;
    double cos_ = 1.0;
    double sin_ = 0.0;
};

}  // namespace esmc
