#include <cmath>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

#include "esmc/chain.hpp"
#include "esmc/statistics.hpp"

using namespace esmc;

namespace {
constexpr double kPi4 = std::numbers::pi / 4;

double combined_se(double a, double b) { return std::sqrt(a * a + b * b); }
}  // namespace

TEST(ConstSigmaStep, UpdatesDeltaAndSums) {
    const ProblemConfig cfg(kPi4, 10);
    RngStream r(42, 0);
    ConstSigmaState s;
    s.delta = 1.0;
    for (int i = 0; i < 100; ++i) {
        RngStream peek = r;
        const ConstSigmaStep step = const_sigma_step(cfg, s, r);
        const Selection expected =
            select(cfg, NormalizedDistance(s.delta), draw_batch(peek, cfg.lambda()));
        EXPECT_EQ(step.selection.step, expected.step);
        EXPECT_EQ(step.state.delta, s.delta - expected.along_normal);
        EXPECT_EQ(step.state.x1_sum, s.x1_sum + expected.step.c1);
        EXPECT_EQ(step.state.t, s.t + 1);
        s = step.state;
    }
}

TEST(ConstSigmaStep, DeltaStaysNonnegativeOverTenMillionSteps) {
    const ProblemConfig cfg(0.3, 2);
    RngStream r(42, 0);
    ConstSigmaState s;
    ResampleBatch scratch;
    double min_delta = s.delta;
    for (int i = 0; i < 10'000'000; ++i) {
        s = const_sigma_step(cfg, s, r, scratch).state;
        min_delta = std::min(min_delta, s.delta);
    }
    EXPECT_GE(min_delta, 0.0);
}

TEST(RunConstSigma, DriftOfDeltaVanishes) {
    const ProblemConfig cfg(kPi4, 10);
    ConstSigmaOptions opts;
    opts.steps = 1'100'000;
    opts.burn_in = 100'000;
    RngStream r(42, 0);
    const ConstSigmaRun run = run_const_sigma(cfg, opts, r);
    // delta_{t+1} - delta_t = -G.n, so its mean is minus the G.n mean.
    EXPECT_LT(std::abs(run.stats.g_dot_n.mean()), 3 * run.stats.g_dot_n.std_error());
    EXPECT_LT(std::abs(run.stats.g1_plus_tan_g2.mean()), 3 * run.stats.g1_plus_tan_g2.std_error());
}

TEST(RunConstSigma, ZeroStepsKeepsInitialState) {
    const ProblemConfig cfg(kPi4, 10);
    ConstSigmaOptions opts;
    opts.steps = 0;
    opts.delta0 = 2.5;
    RngStream r(1, 0);
    const ConstSigmaRun run = run_const_sigma(cfg, opts, r);
    EXPECT_EQ(run.final_state.delta, 2.5);
    EXPECT_EQ(run.final_state.t, 0);
    EXPECT_EQ(r.counter(), 0u);
}

TEST(RunConstSigma, InvalidArguments) {
    const ProblemConfig cfg(kPi4, 10);
    RngStream r(1, 0);
    ConstSigmaOptions opts;
    opts.steps = 10;
    opts.sigma = 0.0;
    EXPECT_THROW(run_const_sigma(cfg, opts, r), ConfigError);
    opts.sigma = 1.0;
    opts.steps = -1;
    EXPECT_THROW(run_const_sigma(cfg, opts, r), ConfigError);
    opts.steps = 10;
    opts.burn_in = 10;
    EXPECT_THROW(run_const_sigma(cfg, opts, r), ConfigError);
    opts.burn_in = 0;
    opts.delta0 = -1.0;
    EXPECT_THROW(run_const_sigma(cfg, opts, r), DomainError);
}

TEST(RunConstSigma, IdenticalSeedsGiveIdenticalTraces) {
    const ProblemConfig cfg(0.5, 5);
    ConstSigmaOptions opts;
    opts.steps = 5000;
    opts.trace_every = 7;
    RngStream a(9, 2), b(9, 2);
    const ConstSigmaRun x = run_const_sigma(cfg, opts, a);
    const ConstSigmaRun y = run_const_sigma(cfg, opts, b);
    ASSERT_EQ(x.trace.size(), 5000u / 7);
    for (std::size_t i = 0; i < x.trace.size(); ++i) {
        EXPECT_EQ(x.trace[i].t, y.trace[i].t);
        EXPECT_EQ(x.trace[i].delta, y.trace[i].delta);
        EXPECT_EQ(x.trace[i].g1, y.trace[i].g1);
        EXPECT_EQ(x.trace[i].f_value, y.trace[i].f_value);
    }
}

TEST(RunConstSigma, TwoSeedsAgreeOnProgress) {
    const ProblemConfig cfg(kPi4, 10);
    ConstSigmaOptions opts;
    opts.steps = 1'000'000;
    RngStream a(42, 0), b(43, 0);
    const ConstSigmaRun x = run_const_sigma(cfg, opts, a);
    const ConstSigmaRun y = run_const_sigma(cfg, opts, b);
    EXPECT_LT(std::abs(x.stats.g1.mean() - y.stats.g1.mean()),
              3 * combined_se(x.stats.g1.std_error(), y.stats.g1.std_error()));
    EXPECT_GT(x.stats.g1.mean(), 0.0);
}

TEST(RunConstSigma, HomogeneousTransitions) {
    // One-step successors of the same delta, reached at t = 0 and t = 10^4.
    const ProblemConfig cfg(kPi4, 10);
    ConstSigmaOptions opts;
    opts.steps = 10'000;
    RngStream r(42, 0);
    const ConstSigmaRun run = run_const_sigma(cfg, opts, r);
    const ConstSigmaState late = run.final_state;
    ConstSigmaState early;
    early.delta = late.delta;
    RngStream fresh(42, 1);
    std::vector<double> a, b;
    for (int i = 0; i < 100000; ++i) {
        a.push_back(const_sigma_step(cfg, late, r).state.delta);
        b.push_back(const_sigma_step(cfg, early, fresh).state.delta);
    }
    EXPECT_TRUE(ks_two_sample(a, b, 0.001).passed);
}

TEST(RunConstSigma, ConstantSpeedWindowsAgree) {
    const ProblemConfig cfg(kPi4, 10);
    ConstSigmaOptions opts;
    opts.steps = 400'000;
    opts.burn_in = 0;
    opts.trace_every = 1;
    RngStream r(42, 0);
    const ConstSigmaRun run = run_const_sigma(cfg, opts, r);
    auto window = [&](std::size_t from, std::size_t to) {
        std::vector<double> g;
        for (std::size_t i = from; i < to; ++i) g.push_back(run.trace[i].g1);
        CompensatedSum s;
        for (double v : g) s.add(v);
        return std::pair{s.value() / static_cast<double>(g.size()), batch_means_se(g, 100)};
    };
    const auto [late, late_se] = window(200'000, 400'000);
    const auto [mid, mid_se] = window(100'000, 200'000);
    EXPECT_LT(std::abs(late - mid), 3 * combined_se(late_se, mid_se));
}

TEST(CsaConfig, Validation) {
    const ProblemConfig cfg(kPi4, 10, 5);
    EXPECT_THROW(CsaConfig(cfg, 0.0, 1.0), ConfigError);
    EXPECT_THROW(CsaConfig(cfg, 1.1, 1.0), ConfigError);
    EXPECT_THROW(CsaConfig(cfg, 0.5, 0.0), ConfigError);
    const CsaConfig ok(cfg, 1.0, 2.0);
    EXPECT_EQ(ok.log_sigma_change(5.0), 0.0);
    const CsaConfig by_norm(cfg, 0.5, 2.0, SigmaRule::norm);
    const double en = by_norm.expected_norm();
    EXPECT_NEAR(by_norm.log_sigma_change(en * en), 0.0, 1e-15);
    // E|N(0, I_n)| = sqrt(2) Gamma((n + 1) / 2) / Gamma(n / 2).
    EXPECT_NEAR(en, std::sqrt(2.0) * std::tgamma(3.0) / std::tgamma(2.5), 1e-13);
}

TEST(CsaStep, FullCumulationCopiesTheStep) {
    const ProblemConfig problem(kPi4, 10, 6);
    const CsaConfig cfg(problem, 1.0, 1.0);
    RngStream r(42, 0);
    CsaState s = CsaState::initial(cfg);
    for (int i = 0; i < 50; ++i) {
        RngStream peek = r;
        const CsaStep step = csa_step(cfg, s, r);
        const Selection sel = select(problem, NormalizedDistance(s.delta), draw_batch(peek, 10));
        EXPECT_EQ(step.state.path[0], sel.step.c1);
        EXPECT_EQ(step.state.path[1], sel.step.c2);
        for (int k = 2; k < 6; ++k) EXPECT_EQ(step.state.path[static_cast<std::size_t>(k)], peek.normal());
        const double sq = step.info.step_sq_norm_2d + step.info.step_sq_norm_tail;
        EXPECT_NEAR(step.info.path_sq_norm, sq, 1e-13 * sq);
        EXPECT_NEAR(step.state.delta,
                    (s.delta - sel.along_normal) * std::exp(-(sq - 6.0) / (2.0 * 6.0)), 1e-12);
        s = step.state;
    }
}

TEST(CsaStep, ShadowFullTrajectoryAgrees) {
    const ProblemConfig problem(0.7, 8, 5);
    const CsaConfig cfg(problem, 0.3, 2.0);
    RngStream a(42, 0), b(42, 0);
    CsaRunOptions copts;
    copts.steps = 300;
    copts.trace_every = 1;
    const CsaRun chain = run_csa(cfg, copts, a);
    FullEsOptions fopts;
    fopts.steps = 300;
    fopts.trace_every = 1;
    const FullEsRun full = run_full_es(problem, cfg, fopts, b);
    ASSERT_EQ(full.trajectory.size(), 301u);
    for (std::size_t t = 1; t <= 300; ++t) {
        const TraceRow& row = chain.trace[t - 1];
        EXPECT_NEAR(row.delta, full.trajectory[t].delta, 1e-12 * (1 + row.delta)) << t;
        EXPECT_NEAR(row.log_sigma, full.trajectory[t].log_sigma, 1e-12) << t;
        EXPECT_NEAR(row.f_value, full.trajectory[t].f_value,
                    1e-12 * (1 + std::abs(row.f_value))) << t;
    }
}

TEST(RunCsa, TelescopingIdentityAtFullCumulation) {
    for (int dim : {2, 10}) {
        const ProblemConfig problem(kPi4, 10, dim);
        const CsaConfig cfg(problem, 1.0, 1.5);
        CsaRunOptions opts;
        opts.steps = 20000;
        RngStream r(42, 0);
        const CsaRun run = run_csa(cfg, opts, r);
        CompensatedSum g2, tail;
        for (double v : run.step_sq_norms_2d) g2.add(v);
        for (double v : run.step_sq_norms_tail) tail.add(v);
        const double m = static_cast<double>(run.samples());
        const double n = dim;
        const double identity = (g2.value() / m + tail.value() / m - n) / (2 * 1.5 * n);
        EXPECT_NEAR(run.slope(), identity, 1e-12) << dim;
        if (dim == 2) {
            EXPECT_NEAR(run.slope(), (g2.value() / m - 2.0) / (2 * 1.5 * n), 1e-12);
        }
    }
}

TEST(RunCsa, LargePopulationDiverges) {
    const ProblemConfig problem(kPi4, 20, 10);
    const CsaConfig cfg(problem, 1.0, 1.0);
    CsaRunOptions opts;
    opts.steps = 100'000;
    RngStream r(42, 0);
    const CsaRun run = run_csa(cfg, opts, r);
    EXPECT_GT(run.slope(), 0.0);
    EXPECT_EQ(run.status, CsaStatus::sigma_overflow);
    EXPECT_LT(run.executed_steps, opts.steps);
    EXPECT_EQ(run.burn_in, run.executed_steps / 10);
}

TEST(RunCsa, TwoSeedsAgree) {
    const ProblemConfig problem(kPi4, 10, 10);
    const CsaConfig cfg(problem, 1.0, 1.0);
    CsaRunOptions opts;
    opts.steps = 20'000;
    RngStream a(42, 0), b(43, 0);
    const CsaRun x = run_csa(cfg, opts, a);
    const CsaRun y = run_csa(cfg, opts, b);
    ASSERT_EQ(x.status, CsaStatus::running);
    ASSERT_EQ(y.status, CsaStatus::running);
    const double se = combined_se(batch_means_se(x.log_sigma_changes, 100),
                                  batch_means_se(y.log_sigma_changes, 100));
    EXPECT_LT(std::abs(x.slope() - y.slope()), 3 * se);
}

TEST(RunCsa, RequiresPositiveSteps) {
    const CsaConfig cfg(ProblemConfig(kPi4, 10, 3), 0.5, 1.0);
    CsaRunOptions opts;
    opts.steps = 0;
    RngStream r(1, 0);
    EXPECT_THROW(run_csa(cfg, opts, r), ConfigError);
}

TEST(RunFullEs, FeasibleIterates) {
    const ProblemConfig problem(0.2, 10);
    FullEsOptions opts;
    opts.steps = 100'000;
    RngStream r(42, 0);
    const FullEsRun run = run_full_es(problem, ConstantStepSize{1.0}, opts, r);
    EXPECT_GE(run.min_g_value, 0.0);
    const CsaConfig csa(ProblemConfig(0.2, 10, 4), 0.5, 1.0);
    RngStream r2(42, 1);
    const FullEsRun run2 = run_full_es(csa.problem(), csa, opts, r2);
    EXPECT_GE(run2.min_g_value, 0.0);
}

TEST(RunFullEs, ConstantSigmaMatchesNormalizedChain) {
    const ProblemConfig problem(kPi4, 10);
    for (double sigma : {0.5, 1.0, 2.0}) {
        RngStream a(42, 0), b(42, 0);
        ConstSigmaOptions copts;
        copts.sigma = sigma;
        copts.steps = 2000;
        copts.trace_every = 1;
        const ConstSigmaRun chain = run_const_sigma(problem, copts, a);
        FullEsOptions fopts;
        fopts.steps = 2000;
        fopts.trace_every = 1;
        const FullEsRun full = run_full_es(problem, ConstantStepSize{sigma}, fopts, b);
        EXPECT_EQ(full.trajectory[0].delta, 1.0);
        for (std::size_t t = 1; t <= 2000; ++t) {
            ASSERT_NEAR(chain.trace[t - 1].delta, full.trajectory[t].delta, 1e-12) << t;
            ASSERT_NEAR(chain.trace[t - 1].f_value, full.trajectory[t].f_value,
                        1e-12 * (1 + std::abs(chain.trace[t - 1].f_value)));
        }
    }
}

TEST(RunFullEs, LeastSquaresSlopeMatchesProgressRate) {
    const ProblemConfig problem(kPi4, 10);
    FullEsOptions opts;
    opts.steps = 200'000;
    RngStream r(42, 0);
    const FullEsRun run = run_full_es(problem, ConstantStepSize{2.0}, opts, r);
    const double rate = 2.0 * run.g1.mean();
    EXPECT_GT(run.f_vs_t.slope(), 0.0);
    EXPECT_LT(std::abs(run.f_vs_t.slope() - rate), 3 * 2.0 * run.g1.std_error());
}
