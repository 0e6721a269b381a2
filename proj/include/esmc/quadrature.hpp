#pragma once

// Globally adaptive 15-point Gauss-Kronrod quadrature (QUADPACK qag scheme).

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <vector>

#include "esmc/errors.hpp"

namespace esmc {

struct QuadResult {
    double value = 0.0;
    double abs_error = 0.0;
    int evaluations = 0;
    bool converged = false;
};

struct QuadOptions {
    double abs_tol = 1e-12;
    double rel_tol = 1e-12;
    int max_intervals = 2000;
};

namespace detail {

struct GkPanel {
    double a;
    double b;
    double value;
    double error;
};

inline constexpr std::array<double, 8> kGkNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};

inline constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};

// 7-point Gauss weights at the odd-indexed Kronrod nodes (1, 3, 5, centre).
inline constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <class F>
GkPanel gk15(F& f, double a, double b) {
    const double centre = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    const double fc = f(centre);
    double kronrod = fc * kKronrodWeights[7];
    double gauss = fc * kGaussWeights[3];
    double resabs = std::abs(kronrod);
    std::array<double, 7> f1{};
    std::array<double, 7> f2{};
    for (int j = 0; j < 7; ++j) {
        const double dx = half * kGkNodes[j];
        f1[j] = f(centre - dx);
        f2[j] = f(centre + dx);
        const double sum = f1[j] + f2[j];
        kronrod += kKronrodWeights[j] * sum;
        resabs += kKronrodWeights[j] * (std::abs(f1[j]) + std::abs(f2[j]));
        if (j % 2 == 1) gauss += kGaussWeights[j / 2] * sum;
    }
    const double mean = 0.5 * kronrod;
    double resasc = kKronrodWeights[7] * std::abs(fc - mean);
    for (int j = 0; j < 7; ++j) {
        resasc += kKronrodWeights[j] * (std::abs(f1[j] - mean) + std::abs(f2[j] - mean));
    }
    const double scale = std::abs(half);
    resabs *= scale;
    resasc *= scale;
    double err = std::abs((kronrod - gauss) * half);
    if (resasc != 0.0 && err != 0.0) {
        err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
    }
    constexpr double eps = std::numeric_limits<double>::epsilon();
    if (resabs > std::numeric_limits<double>::min() / (50.0 * eps)) {
        err = std::max(50.0 * eps * resabs, err);
    }
    return {a, b, kronrod * half, err};
}

}  // namespace detail

/// Integrate f over [a, b]. Never throws on non-convergence; check
/// `converged`. An empty or reversed interval integrates to 0.
template <class F>
QuadResult integrate(F&& f, double a, double b, const QuadOptions& opts = {}) {
    QuadResult out;
    if (!(b > a)) {
        out.converged = true;
        return out;
    }
    auto by_error = [](const detail::GkPanel& x, const detail::GkPanel& y) {
        return x.error < y.error;
    };
    std::vector<detail::GkPanel> heap;
    heap.reserve(64);
    heap.push_back(detail::gk15(f, a, b));
    out.evaluations = 15;
    double total = heap.front().value;
    double total_err = heap.front().error;
    while (true) {
        const double target = std::max(opts.abs_tol, opts.rel_tol * std::abs(total));
        if (total_err <= target) {
            out.converged = true;
            break;
        }
        if (static_cast<int>(heap.size()) >= opts.max_intervals) break;
        std::pop_heap(heap.begin(), heap.end(), by_error);
        const detail::GkPanel worst = heap.back();
        heap.pop_back();
        const double mid = 0.5 * (worst.a + worst.b);
        if (!(mid > worst.a && mid < worst.b)) {
            // Interval can no longer be split in floating point.
            heap.push_back(worst);
            std::push_heap(heap.begin(), heap.end(), by_error);
            break;
        }
        const detail::GkPanel left = detail::gk15(f, worst.a, mid);
        const detail::GkPanel right = detail::gk15(f, mid, worst.b);
        out.evaluations += 30;
        heap.push_back(left);
        std::push_heap(heap.begin(), heap.end(), by_error);
        heap.push_back(right);
        std::push_heap(heap.begin(), heap.end(), by_error);
        total += left.value + right.value - worst.value;
        total_err += left.error + right.error - worst.error;
    }
    // Incremental updates accumulate rounding; report exact panel sums.
    total = 0.0;
    total_err = 0.0;
    for (const auto& p : heap) {
        total += p.value;
        total_err += p.error;
    }
    out.value = total;
    out.abs_error = total_err;
    return out;
}

/// As `integrate`, but throws QuadratureError carrying the best estimate.
template <class F>
QuadResult integrate_checked(F&& f, double a, double b, const QuadOptions& opts = {}) {
    QuadResult r = integrate(std::forward<F>(f), a, b, opts);
    if (!r.converged) {
        throw QuadratureError("adaptive quadrature did not converge within budget", r.value,
                              r.abs_error);
    }
    return r;
}

/// Single fixed GK15 rule; used on short panels that are already resolved.
template <class F>
double gk15_rule(F&& f, double a, double b) {
    if (!(b > a)) return 0.0;
    return detail::gk15(f, a, b).value;
}

}  // namespace esmc
