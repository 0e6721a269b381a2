#pragma once

// Exact samplers for the feasible step and the selected step.
//
// A feasible step is built from one (uniform, normal) driver pair: the uniform
// is pushed through the truncated-normal quantile to give the component along
// the constraint normal n, the normal is the untouched component along
// n_perp. The selected step is the driver whose feasible step has the largest
// e1 component. No rejection loop is involved, so one generation consumes
// exactly 2 * lambda draws.

#include <cstddef>
#include <span>
#include <vector>

#include "esmc/errors.hpp"
#include "esmc/normal.hpp"
#include "esmc/problem.hpp"
#include "esmc/rng.hpp"

namespace esmc {

struct Driver {
    Probability u;
    double z = 0.0;
};

/// The lambda i.i.d. (Uniform(0,1), N(0,1)) drivers of one generation.
struct ResampleBatch {
    std::vector<Driver> pairs;

    std::size_t size() const noexcept { return pairs.size(); }
};

/// Fill `out` with lambda fresh drivers. Draw order per offspring: u, then z.
inline void draw_batch(RngStream& rng, int lambda, ResampleBatch& out) {
    if (lambda < 2) throw ConfigError("draw_batch: lambda must be >= 2");
    out.pairs.resize(static_cast<std::size_t>(lambda));
    for (Driver& d : out.pairs) {
        d.u = Probability(rng.uniform01());
        d.z = rng.normal();
    }
}

inline ResampleBatch draw_batch(RngStream& rng, int lambda) {
    ResampleBatch batch;
    draw_batch(rng, lambda, batch);
    return batch;
}

namespace detail {

inline Step2 rotate_back(const ProblemConfig& cfg, double along_n, double along_perp) noexcept {
    return {along_n * cfg.cos_theta() + along_perp * cfg.sin_theta(),
            along_n * cfg.sin_theta() - along_perp * cfg.cos_theta()};
}

}  // namespace detail

/// Feasible step from one driver, given a quantile prepared for delta.
inline Step2 g_tilde(const ProblemConfig& cfg, const TruncatedNormalQuantile& quantile,
                     const Driver& w) {
    return detail::rotate_back(cfg, quantile(w.u), w.z);
}

inline Step2 g_tilde(const ProblemConfig& cfg, NormalizedDistance delta, const Driver& w) {
    return g_tilde(cfg, TruncatedNormalQuantile(delta), w);
}

struct Selection {
    Step2 step;
    std::size_t index = 0;      // 0-based position in the batch
    double along_normal = 0.0;  // step . n as sampled; <= delta exactly
};

/// The feasible step with the largest e1 component; ties go to the lowest index.
inline Selection select(const ProblemConfig& cfg, NormalizedDistance delta,
                        std::span<const Driver> batch) {
    if (batch.empty()) throw ConfigError("select: empty batch");
    const TruncatedNormalQuantile quantile(delta);
    Selection best;
    for (std::size_t i = 0; i < batch.size(); ++i) {
        const double t = quantile(batch[i].u);
        const Step2 s = detail::rotate_back(cfg, t, batch[i].z);
        if (i == 0 || s.c1 > best.step.c1) best = {s, i, t};
    }
    return best;
}

inline Selection select(const ProblemConfig& cfg, NormalizedDistance delta,
                        const ResampleBatch& batch) {
    return select(cfg, delta, std::span<const Driver>(batch.pairs));
}

/// Reference sampler: draw 2-D standard normals until one is feasible.
inline Step2 rejection_sample(const ProblemConfig& cfg, NormalizedDistance delta,
                              RngStream& rng) {
    constexpr int kMaxTrials = 1'000'000;
    const Step2 n = cfg.normal();
    for (int trial = 0; trial < kMaxTrials; ++trial) {
        const Step2 x{rng.normal(), rng.normal()};
        if (x.dot(n) <= delta.value()) return x;
    }
    throw InternalError("rejection_sample: trial cap exceeded");
}

/// Best of lambda rejection-sampled feasible steps (the literal algorithm).
inline Step2 rejection_select(const ProblemConfig& cfg, NormalizedDistance delta,
                              RngStream& rng) {
    Step2 best = rejection_sample(cfg, delta, rng);
    for (int i = 1; i < cfg.lambda(); ++i) {
        const Step2 s = rejection_sample(cfg, delta, rng);
        if (s.c1 > best.c1) best = s;
    }
    return best;
}

}  // namespace esmc
