#include <cmath>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

#include "esmc/normal.hpp"
#include "esmc/rng.hpp"
#include "esmc/statistics.hpp"
#include "oracles.hpp"

using namespace esmc;

TEST(StdNormalPdf, ValueAtZero) { EXPECT_NEAR(std_normal_pdf(0.0), 0.3989422804, 1e-10); }

TEST(StdNormalPdf, Symmetric) {
    for (double x : {0.3, 1.0, 2.5, 7.0}) EXPECT_EQ(std_normal_pdf(x), std_normal_pdf(-x));
}

TEST(StdNormalPdf, MatchesDerivativeOfCdf) {
    const double h = 1e-5;
    const double fd = (std_normal_cdf(2.0 + h) - std_normal_cdf(2.0 - h)) / (2.0 * h);
    EXPECT_NEAR(std_normal_pdf(2.0), fd, 1e-8);
}

TEST(StdNormalCdf, Basics) {
    EXPECT_EQ(std_normal_cdf(0.0), 0.5);
    EXPECT_GE(std_normal_cdf(8.0), 1.0 - 1e-14);
}

TEST(StdNormalCdf, MatchesQuadratureOfPdf) {
    const double q = oracle::integrate([](double x) { return oracle::phi(x); },
                                       -std::numeric_limits<double>::infinity(), 1.0);
    EXPECT_NEAR(std_normal_cdf(1.0), q, 1e-10);
}

TEST(StdNormalCdf, AbsoluteErrorAgainstBoost) {
    double prev = 0.0;
    for (double x = -38.0; x <= 9.0; x += 0.01) {
        const double v = std_normal_cdf(x);
        EXPECT_NEAR(v, oracle::Phi(x), 1e-12) << "x=" << x;
        EXPECT_GE(v, prev);
        prev = v;
    }
}

TEST(StdNormalCdf, RelativeAccuracyInLowerTail) {
    for (double x : {-5.0, -10.0, -20.0, -30.0}) {
        EXPECT_NEAR(std_normal_cdf(x) / oracle::Phi(x), 1.0, 1e-12) << x;
        EXPECT_NEAR(std_normal_sf(-x) / oracle::Phi(x), 1.0, 1e-12) << x;
    }
}

TEST(StdNormalQuantile, Median) { EXPECT_EQ(std_normal_quantile(0.5), 0.0); }

TEST(StdNormalQuantile, MatchesBisection) {
    const double ref = oracle::bisect([](double x) { return oracle::Phi(x) - 0.975; }, 0.0, 5.0);
    EXPECT_NEAR(std_normal_quantile(0.975), ref, 1e-10);
    EXPECT_NEAR(std_normal_cdf(std_normal_quantile(0.975)), 0.975, 1e-10);
}

TEST(StdNormalQuantile, Antisymmetric) {
    for (double u : {1e-8, 0.001, 0.1, 0.3, 0.49}) {
        EXPECT_NEAR(std_normal_quantile(u), -std_normal_quantile(1.0 - u), 1e-9) << u;
    }
}

TEST(StdNormalQuantile, RoundTripAndMonotone) {
    double prev = -std::numeric_limits<double>::infinity();
    for (double e = -8.0; e <= -0.30103; e += 0.05) {
        for (double u : {std::pow(10.0, e), 1.0 - std::pow(10.0, e)}) {
            EXPECT_NEAR(std_normal_cdf(std_normal_quantile(u)), u, 1e-9) << u;
        }
    }
    for (double u = 1e-8; u < 1.0 - 1e-8; u += 0.001) {
        const double x = std_normal_quantile(u);
        EXPECT_GT(x, prev);
        prev = x;
    }
}

TEST(StdNormalQuantile, BoundariesAreDomainErrors) {
    EXPECT_THROW(std_normal_quantile(0.0), DomainError);
    EXPECT_THROW(std_normal_quantile(1.0), DomainError);
    EXPECT_THROW(Probability(1.5), DomainError);
    EXPECT_THROW(Probability(-0.1), DomainError);
}

TEST(TruncNormalInverse, DeltaZeroMedian) {
    const double ref = oracle::bisect([](double x) { return oracle::Phi(x) - 0.25; }, -3.0, 0.0);
    const double v = trunc_normal_inverse(NormalizedDistance(0.0), Probability(0.5));
    EXPECT_NEAR(v, ref, 1e-10);
    EXPECT_NEAR(v, -0.6745, 1e-4);
}

TEST(TruncNormalInverse, LargeDeltaIsUntruncated) {
    EXPECT_NEAR(trunc_normal_inverse(NormalizedDistance(30.0), Probability(0.5)), 0.0, 1e-9);
}

TEST(TruncNormalInverse, UpperEnd) {
    const NormalizedDistance d(1.0);
    EXPECT_EQ(trunc_normal_inverse(d, Probability(1.0)), 1.0);
    const double near_one = trunc_normal_inverse(d, Probability(1.0 - 0x1.0p-52));
    EXPECT_LE(near_one, 1.0);
    EXPECT_GT(near_one, 1.0 - 1e-6);
    EXPECT_THROW(trunc_normal_inverse(d, Probability(0.0)), DomainError);
}

TEST(TruncNormalInverse, NeverExceedsDeltaAndIncreasing) {
    RngStream rng(7, 0);
    for (double delta : {0.0, 1e-12, 0.5, 3.0, 6.0, 6.5, 12.0, 40.0}) {
        const NormalizedDistance d(delta);
        for (int i = 0; i < 20000; ++i) {
            const double u = rng.uniform01();
            EXPECT_LE(trunc_normal_inverse(d, Probability(u)), delta);
        }
        double prev = -std::numeric_limits<double>::infinity();
        for (double u = 1e-6; u < 1.0; u += 1e-3) {
            const double x = trunc_normal_inverse(d, Probability(u));
            EXPECT_GE(x, prev);
            prev = x;
        }
    }
}

TEST(TruncNormalInverse, MatchesBisectionOnTruncatedCdf) {
    for (double delta : {0.0, 1.0, 4.0, 7.0, 9.0}) {
        const double mass = oracle::Phi(delta);
        for (double u : {1e-6, 0.2, 0.5, 0.9, 0.999999}) {
            const double ref = oracle::bisect(
                [&](double x) { return oracle::Phi(x) / mass - u; }, -12.0, delta);
            EXPECT_NEAR(trunc_normal_inverse(NormalizedDistance(delta), Probability(u)), ref, 1e-9)
                << "delta=" << delta << " u=" << u;
        }
    }
}

TEST(TruncNormalInverse, KolmogorovSmirnovAgainstAnalyticCdf) {
    for (double delta : {0.0, 0.5, 2.0, 8.0}) {
        RngStream rng(11, static_cast<std::uint64_t>(delta * 10));
        const NormalizedDistance d(delta);
        std::vector<double> xs;
        for (int i = 0; i < 100000; ++i) xs.push_back(trunc_normal_inverse(d, Probability(rng.uniform01())));
        const double mass = oracle::Phi(delta);
        const KsResult ks = ks_one_sample(
            xs, [&](double x) { return std::min(1.0, oracle::Phi(x) / mass); }, 0.001);
        EXPECT_TRUE(ks.passed) << "delta=" << delta << " p=" << ks.p_value;
    }
}
