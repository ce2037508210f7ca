#include <gtest/gtest.h>

#include "evars/cpd/detector.hpp"
#include "evars/random.hpp"
#include "oracles.hpp"

using namespace evars;
using namespace evars::cpd;

TEST(SeasonalDifference, Examples) {
    EXPECT_EQ(seasonal_difference({1, 2, 3, 4}, 2), (std::vector<double>{2, 2}));
    std::vector<double> trend(20);
    for (std::size_t i = 0; i < trend.size(); ++i) trend[i] = static_cast<double>(i);
    for (double v : seasonal_difference(trend, 5)) EXPECT_EQ(v, 5.0);
    std::vector<double> periodic;
    for (int i = 0; i < 30; ++i) periodic.push_back(std::sin(0.7 * (i % 6)));
    for (double v : seasonal_difference(periodic, 6)) EXPECT_EQ(v, 0.0);
    EXPECT_THROW(seasonal_difference({1, 2}, 2), Error);
}

TEST(SeasonalDifference, IncrementalMatchesBatch) {
    std::vector<double> y;
    for (int i = 0; i < 40; ++i) y.push_back(std::cos(0.3 * i) * i);
    const auto batch = seasonal_difference(y, 7);
    SeasonalDifferencer d(7);
    std::vector<double> inc;
    for (double v : y) {
        double out = 0.0;
        if (d.push(v, out)) inc.push_back(out);
    }
    EXPECT_EQ(inc, batch);
}

TEST(Sdar, ConstantStreamConvergesToFloor) {
    Sdar s(1, 0.4);
    double last = -1e300;
    for (int i = 0; i < 200; ++i) {
        const double ll = s.update(5.0);
        if (i > 50) {
            EXPECT_GE(ll, last - 1e-9);
            last = ll;
        }
    }
    EXPECT_NEAR(s.predict(), 5.0, 1e-9);
    EXPECT_DOUBLE_EQ(s.variance(), kSdarVarianceFloor * 25.0);
}

TEST(Sdar, JumpIsUnlikely) {
    Sdar s(1, 0.4);
    std::vector<double> lls;
    for (int i = 0; i < 30; ++i) lls.push_back(s.update(0.0));
    const double jump = s.update(10.0);
    std::vector<double> tail(lls.begin() + 5, lls.end());
    std::sort(tail.begin(), tail.end());
    EXPECT_LT(jump, tail[tail.size() / 2]);
}

TEST(Sdar, LargerRateForgetsFaster) {
    Sdar fast(1, 0.9), slow(1, 0.1);
    for (int i = 0; i < 50; ++i) {
        fast.update(0.0);
        slow.update(0.0);
    }
    for (int i = 0; i < 3; ++i) {
        fast.update(10.0);
        slow.update(10.0);
    }
    EXPECT_LT(std::abs(fast.mean() - 10.0), std::abs(slow.mean() - 10.0));
}

TEST(Sdar, WarmupNeutralAndInputChecks) {
    Sdar s(2, 0.3);
    for (int i = 0; i < 4; ++i) EXPECT_EQ(s.update(i * 1.5), 0.0);
    EXPECT_NE(s.update(1.0), 0.0);
    EXPECT_EQ(s.coefficients().size(), 2u);
    EXPECT_THROW(s.update(std::numeric_limits<double>::infinity()), Error);
    EXPECT_THROW(Sdar(0, 0.5), Error);
    EXPECT_THROW(Sdar(1, 1.0), Error);
}

TEST(Sdar, IndependentInstancesAgree) {
    Sdar a(1, 0.4), b(1, 0.4), unrelated(2, 0.7);
    Rng rng(3);
    std::normal_distribution<double> n01;
    for (int i = 0; i < 100; ++i) {
        const double v = n01(rng);
        unrelated.update(-v);
        EXPECT_EQ(a.update(v), b.update(v));
    }
}

TEST(ChangeFinder, ScoreIsMeanOfStageTwoLosses) {
    ChangeFinder cf({0.4, 1, 4});
    Rng rng(5);
    std::normal_distribution<double> n01;
    for (int i = 0; i < 60; ++i) {
        const auto out = cf.step(n01(rng));
        EXPECT_LE(cf.outlier_scores().size(), 4u);
        EXPECT_LE(cf.second_stage_losses().size(), 4u);
        if (out.ready) {
            const auto& l = cf.second_stage_losses();
            EXPECT_DOUBLE_EQ(out.score, (l[0] + l[1] + l[2] + l[3]) / 4.0);
            EXPECT_TRUE(std::isfinite(out.score));
        } else {
            EXPECT_FALSE(out.is_change);
        }
    }
}

TEST(ChangeFinder, ConstantStreamNeverFires) {
    std::vector<double> offline(200, 3.0);
    ChangeFinder probe;
    std::vector<double> scores;
    for (double v : offline) {
        const auto o = probe.step(v);
        if (o.ready) scores.push_back(o.score);
    }
    probe.set_threshold(calibrate_cf_threshold(scores, 70));
    for (int i = 0; i < 500; ++i) EXPECT_FALSE(probe.step(3.0).is_change);
}

TEST(ChangeFinder, PeriodicStreamAfterDifferencingNeverFires) {
    std::vector<double> y;
    for (int i = 0; i < 600; ++i) y.push_back(5.0 + std::sin(2.0 * std::numbers::pi * (i % 12) / 12.0));
    const std::vector<double> offline(y.begin(), y.begin() + 300);
    DetectorConfig cfg;
    ChangePointDetector det(cfg, offline, 12);
    for (std::size_t i = 300; i < y.size(); ++i) EXPECT_FALSE(det.observe(y[i]).change);
}

TEST(ChangeFinder, DetectsLargeShift) {
    Rng rng(17);
    std::normal_distribution<double> n01;
    ChangeFinder probe;
    std::vector<double> scores;
    for (int i = 0; i < 1000; ++i) {
        const auto o = probe.step(n01(rng));
        if (o.ready) scores.push_back(o.score);
    }
    ChangeFinder& cf = probe;
    cf.set_threshold(calibrate_cf_threshold(scores, 100));
    int first = -1;
    for (int i = 0; i < 300; ++i) {
        const double v = n01(rng) + (i >= 200 ? 10.0 : 0.0);
        if (cf.step(v).is_change && i >= 200 && first < 0) first = i;
    }
    ASSERT_GE(first, 200);
    EXPECT_LE(first - 200, 2 * 4 + 5);
}

TEST(Calibration, PercentileConvention) {
    std::vector<double> s(100);
    for (int i = 0; i < 100; ++i) s[static_cast<std::size_t>(i)] = i + 1;
    EXPECT_NEAR(calibrate_cf_threshold(s, 70), 70.3, 1e-12);
    EXPECT_EQ(calibrate_cf_threshold(s, 100), 100.0);
    EXPECT_EQ(calibrate_cf_threshold(std::vector<double>(12, 2.5), 70), 2.5);
    try {
        calibrate_cf_threshold(std::vector<double>(9, 1.0), 70);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::Calibration);
    }
}

TEST(Bocpd, FirstObservationIsPointMass) {
    Bocpd b({100.0, {0.0, 1.0, 1.0, 1.0}});
    b.step(0.3);
    ASSERT_EQ(b.entries().size(), 1u);
    EXPECT_EQ(b.entries()[0].run_length, 0);
    EXPECT_EQ(b.entries()[0].probability, 1.0);
}

TEST(Bocpd, ConstantHazard) {
    // With a predictive that is identical for every run length (no data yet
    // distinguishes them), the change-point share is exactly 1/lambda.
    BocpdParams p{40.0, {0.0, 1.0, 1.0, 1.0}};
    p.truncation = 0.0;
    const double h = 1.0 / p.lambda;
    Bocpd b(p);
    b.step(0.0);
    b.step(0.0);
    // Two entries; recompute the changepoint mass from the oracle predictive.
    const auto& e = b.entries();
    const double pred_prior = std::exp(oracle::ng_log_predictive({}, 0, 1, 1, 1, 0.0));
    const double pred_run = std::exp(oracle::ng_log_predictive({0.0}, 0, 1, 1, 1, 0.0));
    const double cp = h * pred_prior;
    const double growth = (1 - h) * pred_run;
    EXPECT_NEAR(e[0].probability, cp / (cp + growth), 1e-14);
}

TEST(Bocpd, MatchesBruteForceWithoutTruncation) {
    Rng rng(21);
    std::normal_distribution<double> n01;
    std::vector<double> xs;
    for (int i = 0; i < 50; ++i) xs.push_back(n01(rng) + (i > 25 ? 3.0 : 0.0));
    BocpdParams p{20.0, {0.5, 1.0, 1.0, 2.0}};
    p.truncation = 0.0;
    Bocpd b(p);
    const auto ref = oracle::bocpd_posteriors(xs, 20.0, 0.5, 1.0, 1.0, 2.0);
    for (std::size_t t = 0; t < xs.size(); ++t) {
        b.step(xs[t]);
        const auto post = b.posterior();
        ASSERT_EQ(post.size(), ref[t].size());
        double total = 0.0;
        for (std::size_t r = 0; r < post.size(); ++r) {
            EXPECT_NEAR(post[r], ref[t][r], 1e-8);
            total += post[r];
        }
        EXPECT_NEAR(total, 1.0, 1e-9);
    }
}

TEST(Bocpd, TruncationBoundsRemovedMass) {
    Rng rng(2);
    std::normal_distribution<double> n01;
    Bocpd b({50.0, {0.0, 1.0, 1.0, 1.0}});
    for (int i = 0; i < 400; ++i) {
        const auto o = b.step(n01(rng) + (i >= 200 ? 10.0 : 0.0));
        EXPECT_LE(o.pruned_mass, 1e-6);
        double total = 0.0;
        for (const auto& e : b.entries()) {
            EXPECT_GE(e.probability, 0.0);
            total += e.probability;
        }
        EXPECT_NEAR(total, 1.0, 1e-9);
    }
    EXPECT_LT(b.entries().size(), 400u);
}

TEST(Bocpd, MapCollapsesAfterShift) {
    Rng rng(9);
    std::normal_distribution<double> n01;
    std::vector<double> offline;
    for (int i = 0; i < 100; ++i) offline.push_back(n01(rng));
    double var = 0.0;
    for (double v : offline) var += v * v;
    var /= offline.size();
    Bocpd b({250.0, {offline.front(), 1.0, 1.0, var}});
    long collapse = -1;
    bool fired = false;
    for (int t = 0; t < 200; ++t) {
        const auto o = b.step(n01(rng) + (t >= 150 ? 8.0 : 0.0));
        if (t >= 150 && collapse < 0 && o.map_run_length < 5) collapse = t;
        if (t >= 150 && o.change) fired = true;
    }
    ASSERT_GE(collapse, 150);
    EXPECT_LE(collapse - 150, 10);
    EXPECT_TRUE(fired);
}

TEST(Detector, BocpdBehindDifferencer) {
    std::vector<double> offline;
    Rng rng(4);
    std::normal_distribution<double> n01;
    for (int i = 0; i < 200; ++i) offline.push_back(10 + std::sin(i * 2.0 * std::numbers::pi / 10) + 0.1 * n01(rng));
    DetectorConfig cfg;
    cfg.kind = DetectorKind::Bocpd;
    ChangePointDetector det(cfg, offline, 10);
    EXPECT_EQ(det.name(), "bocpd");
    bool fired = false;
    for (int i = 200; i < 260; ++i) {
        const double v = (10 + std::sin(i * 2.0 * std::numbers::pi / 10)) * (i >= 220 ? 2.0 : 1.0) + 0.1 * n01(rng);
        fired = det.observe(v).change || fired;
    }
    EXPECT_TRUE(fired);
}
