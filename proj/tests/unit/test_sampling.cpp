#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <vector>

#include <gtest/gtest.h>

#include "esmc/densities.hpp"
#include "esmc/sampling.hpp"
#include "esmc/statistics.hpp"
#include "esmc/validation.hpp"
#include "oracles.hpp"

using namespace esmc;

namespace {
constexpr double kPi4 = std::numbers::pi / 4;
}

TEST(DrawBatch, DeterministicAndSized) {
    RngStream a(42, 5), b(42, 5);
    const ResampleBatch x = draw_batch(a, 7);
    const ResampleBatch y = draw_batch(b, 7);
    ASSERT_EQ(x.size(), 7u);
    for (std::size_t i = 0; i < 7; ++i) {
        EXPECT_EQ(x.pairs[i].u.value(), y.pairs[i].u.value());
        EXPECT_EQ(x.pairs[i].z, y.pairs[i].z);
        EXPECT_GT(x.pairs[i].u.value(), 0.0);
        EXPECT_LT(x.pairs[i].u.value(), 1.0);
    }
    EXPECT_EQ(a.counter(), 14u);
}

TEST(DrawBatch, LambdaBelowTwoIsConfigError) {
    RngStream r(1, 0);
    EXPECT_THROW(draw_batch(r, 1), ConfigError);
}

TEST(DrawBatch, DriversPassKs) {
    RngStream r(42, 0);
    std::vector<double> u, z;
    for (int i = 0; i < 10000; ++i) {
        for (const Driver& d : draw_batch(r, 10).pairs) {
            u.push_back(d.u.value());
            z.push_back(d.z);
        }
    }
    EXPECT_TRUE(ks_one_sample(u, [](double x) { return std::clamp(x, 0.0, 1.0); }, 0.001).passed);
    EXPECT_TRUE(ks_one_sample(z, [](double x) { return oracle::Phi(x); }, 0.001).passed);
}

TEST(GTilde, PerpendicularComponent) {
    const ProblemConfig cfg(0.4, 2);
    const Step2 s = g_tilde(cfg, NormalizedDistance(5.0), Driver{Probability(0.5), 1.0});
    EXPECT_NEAR(s.c1, cfg.normal_perp().c1, 1e-5);
    EXPECT_NEAR(s.c2, cfg.normal_perp().c2, 1e-5);
}

TEST(GTilde, AlongNormalIsTruncatedQuantileAndFeasible) {
    RngStream r(3, 0);
    for (double theta : {0.05, kPi4, 1.5}) {
        const ProblemConfig cfg(theta, 2);
        for (int i = 0; i < 1'000'000 / 3; ++i) {
            const double delta = i % 5 == 0 ? 0.0 : 10.0 * r.uniform01();
            const Driver w{Probability(r.uniform01()), r.normal()};
            const Step2 s = g_tilde(cfg, NormalizedDistance(delta), w);
            const double t = trunc_normal_inverse(NormalizedDistance(delta), w.u);
            ASSERT_NEAR(s.dot(cfg.normal()), t, 1e-14 * (1 + std::abs(t) + std::abs(w.z)));
            ASSERT_LE(t, delta);
        }
    }
}

TEST(GTilde, MatchesRejectionSamplerInDistribution) {
    const ProblemConfig cfg(kPi4, 2);
    const NormalizedDistance d(1.0);
    RngStream g(42, 0), rj(42, 1);
    std::vector<double> g1, g2, r1, r2;
    for (int i = 0; i < 100000; ++i) {
        const Step2 s = g_tilde(cfg, d, Driver{Probability(g.uniform01()), g.normal()});
        g1.push_back(s.c1);
        g2.push_back(s.c2);
        const Step2 x = rejection_sample(cfg, d, rj);
        r1.push_back(x.c1);
        r2.push_back(x.c2);
    }
    EXPECT_TRUE(ks_two_sample(g1, r1, 0.001).passed);
    EXPECT_TRUE(ks_two_sample(g2, r2, 0.001).passed);
}

TEST(RejectionSample, LargeDeltaAcceptsFirstDraw) {
    const ProblemConfig cfg(kPi4, 2);
    RngStream r(8, 0);
    for (int i = 0; i < 10000; ++i) {
        const std::uint64_t before = r.counter();
        rejection_sample(cfg, NormalizedDistance(30.0), r);
        ASSERT_EQ(r.counter() - before, 2u);
    }
}

TEST(RejectionSample, MeanAlongNormalAtZeroDelta) {
    const double closed = -std::sqrt(2.0 / std::numbers::pi);
    const double quad = oracle::integrate(
        [](double x) { return x * oracle::phi(x) / 0.5; }, -std::numeric_limits<double>::infinity(),
        0.0);
    ASSERT_NEAR(quad, closed, 1e-12);
    const ProblemConfig cfg(0.9, 2);
    RngStream r(42, 0);
    RunningMoments m;
    for (int i = 0; i < 1'000'000; ++i) m.add(rejection_sample(cfg, NormalizedDistance(0.0), r).dot(cfg.normal()));
    EXPECT_LT(std::abs(m.mean() - closed), 3 * m.std_error());
}

TEST(Select, ArgmaxOfFirstComponent) {
    const ProblemConfig cfg(kPi4, 2);
    const double s = cfg.sin_theta();
    // At delta = 30 and u = 1/2 the along-normal part is 0, so c1 = z sin(theta).
    ResampleBatch batch{{Driver{Probability(0.5), 0.3 / s}, Driver{Probability(0.5), 0.7 / s}}};
    const Selection sel = select(cfg, NormalizedDistance(30.0), batch);
    EXPECT_NEAR(sel.step.c1, 0.7, 1e-12);
    EXPECT_EQ(sel.index, 1u);  // 0-based: the second pair
}

TEST(Select, TiesGoToLowestIndex) {
    const ProblemConfig cfg(kPi4, 3);
    const Driver w{Probability(0.3), 0.2};
    ResampleBatch batch{{w, w, w}};
    EXPECT_EQ(select(cfg, NormalizedDistance(1.0), batch).index, 0u);
}

TEST(Select, PermutationInvariance) {
    const ProblemConfig cfg(0.6, 6);
    RngStream r(42, 0);
    for (int k = 0; k < 1000; ++k) {
        ResampleBatch batch = draw_batch(r, 6);
        const NormalizedDistance d(2.0 * r.uniform01());
        const Selection a = select(cfg, d, batch);
        std::vector<std::size_t> perm(6);
        std::iota(perm.begin(), perm.end(), 0);
        std::rotate(perm.begin(), perm.begin() + 1 + k % 5, perm.end());
        ResampleBatch shuffled;
        for (std::size_t i : perm) shuffled.pairs.push_back(batch.pairs[i]);
        const Selection b = select(cfg, d, shuffled);
        EXPECT_EQ(a.step, b.step);
        EXPECT_EQ(perm[b.index], a.index);
    }
}

TEST(Select, FeasibleAndAlongNormalReported) {
    const ProblemConfig cfg(1.2, 10);
    RngStream r(42, 0);
    ResampleBatch batch;
    for (int i = 0; i < 100000; ++i) {
        const double delta = i % 3 == 0 ? 0.0 : 3.0 * r.uniform01();
        draw_batch(r, 10, batch);
        const Selection s = select(cfg, NormalizedDistance(delta), batch);
        ASSERT_LE(s.along_normal, delta);
        ASSERT_NEAR(s.step.dot(cfg.normal()), s.along_normal, 1e-14 * (1 + std::abs(s.step.c1) + std::abs(s.step.c2)));
    }
}

TEST(Select, MeanOfMaxOfTwoNormals) {
    const ProblemConfig cfg(kPi4, 2);
    RngStream r(42, 0);
    RunningMoments m;
    ResampleBatch batch;
    for (int i = 0; i < 1'000'000; ++i) {
        draw_batch(r, 2, batch);
        m.add(select(cfg, NormalizedDistance(20.0), batch).step.c1);
    }
    EXPECT_LT(std::abs(m.mean() - 1.0 / std::sqrt(std::numbers::pi)), 3 * m.std_error());
}

TEST(Select, MeanMatchesQuadratureExpectation) {
    const ProblemConfig cfg(kPi4, 10);
    const NormalizedDistance d(1.0);
    const double ref = quadrature_expectation([](Step2 x) { return x.c1; }, cfg, d, 1e-9).value;
    RngStream r(42, 0);
    RunningMoments m;
    ResampleBatch batch;
    for (int i = 0; i < 1'000'000; ++i) {
        draw_batch(r, 10, batch);
        m.add(select(cfg, d, batch).step.c1);
    }
    EXPECT_LT(std::abs(m.mean() - ref), 3 * m.std_error()) << m.mean() << " vs " << ref;
}

TEST(OracleSuite, ReducedGridPassesAndShiftIsDetected) {
    ValidationOptions o;
    o.sample_scale = 0.2;
    o.workers = 1;
    for (const CheckResult& c : run_oracle_suite(o)) EXPECT_TRUE(c.passed) << c.name;
    o.inject_shift = 1.0;
    int failures = 0;
    for (const CheckResult& c : run_oracle_suite(o)) failures += c.passed ? 0 : 1;
    EXPECT_GT(failures, 0);
}

TEST(LargeDeltaSuite, ReducedSamplesPass) {
    ValidationOptions o;
    o.sample_scale = 0.2;
    o.workers = 1;
    for (const CheckResult& c : run_large_delta_suite(o)) EXPECT_TRUE(c.passed) << c.name;
}
