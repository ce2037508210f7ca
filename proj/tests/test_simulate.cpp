#include <gtest/gtest.h>

#include <sstream>

#include "evars/simulate.hpp"

using namespace evars;

namespace {

ScenarioSpec quiet(double delta_max, double kappa) {
    ScenarioSpec s;
    s.n_seas = 20;
    s.length = 240;
    s.offline_fraction = 0.5;
    s.t_start = 140;
    s.t_end = 200;
    s.delta_max = delta_max;
    s.kappa = kappa;
    s.noise_x = 0.0;
    s.noise_y = 0.0;
    s.seed = 4;
    return s;
}

}  // namespace

TEST(Manipulation, RampExamples) {
    ScenarioSpec s;
    s.t_start = 100;
    s.t_end = 200;
    s.delta_max = 2.0;
    s.kappa = 0.5;
    EXPECT_EQ(manipulation_factor(99, s), 1.0);
    EXPECT_EQ(manipulation_factor(101, s), 1.5);
    EXPECT_EQ(manipulation_factor(102, s), 2.0);
    EXPECT_EQ(manipulation_factor(150, s), 2.0);
    EXPECT_EQ(manipulation_factor(199, s), 1.5);
    EXPECT_EQ(manipulation_factor(200, s), 1.0);
    EXPECT_THROW(manipulation_factor(-1, s), Error);
}

TEST(Manipulation, DecreaseMirrors) {
    ScenarioSpec s;
    s.t_start = 10;
    s.t_end = 20;
    s.delta_max = 0.5;
    s.kappa = 0.25;
    EXPECT_EQ(manipulation_factor(11, s), 0.75);
    EXPECT_EQ(manipulation_factor(15, s), 0.5);
}

TEST(Manipulation, SlopeBoundedEverywhere) {
    for (double kappa : {0.01, 0.3, 2.0}) {
        for (double dmax : {0.2, 1.5, 5.0}) {
            ScenarioSpec s;
            s.t_start = 30;
            s.t_end = 47;
            s.kappa = kappa;
            s.delta_max = dmax;
            for (Eigen::Index t = 0; t < 80; ++t) {
                EXPECT_LE(std::abs(manipulation_factor(t + 1, s) - manipulation_factor(t, s)), kappa + 1e-12);
            }
        }
    }
}

TEST(Manipulation, ShortWindowIsTruncatedNotRejected) {
    ScenarioSpec s;
    s.t_start = 450;
    s.t_end = 454;
    s.delta_max = 5.0;
    s.kappa = 0.5;
    EXPECT_TRUE(s.plateau_truncated());
    EXPECT_EQ(manipulation_factor(452, s), 2.0);
    EXPECT_FALSE(generate_scenario(s).warnings.empty());
}

TEST(Scenario, NullManipulationLeavesOnlineUntouched) {
    for (const auto& s : {quiet(1.0, 0.5), quiet(3.0, 0.0)}) {
        const auto sc = generate_scenario(s);
        EXPECT_EQ(sc.online.target, sc.online_unmanipulated);
    }
}

TEST(Scenario, PlateauDoublesTarget) {
    const auto s = quiet(2.0, 0.5);
    const auto sc = generate_scenario(s);
    const Eigen::Index i = 170 - s.offline_rows();
    EXPECT_EQ(sc.online.target(i), 2.0 * sc.online_unmanipulated(i));
}

TEST(Scenario, PeriodicAndPositive) {
    const auto sc = generate_scenario(quiet(1.0, 0.5));
    const auto all = concat(sc.offline, sc.online);
    for (Eigen::Index t = 0; t + 20 < all.rows(); ++t) {
        EXPECT_EQ(all.target(t + 20), all.target(t));
        EXPECT_EQ(all.covariates.row(t + 20), all.covariates.row(t));
    }
    ScenarioSpec noisy;
    noisy.delta_max = 0.2;
    const auto n = generate_scenario(noisy);
    EXPECT_GT(n.offline.target.minCoeff(), 0.0);
    EXPECT_GT(n.online.target.minCoeff(), 0.0);
}

TEST(Scenario, DeterministicUnderSeed) {
    ScenarioSpec s;
    const auto a = generate_scenario(s);
    const auto b = generate_scenario(s);
    EXPECT_EQ(dataset_hash(a.online), dataset_hash(b.online));
    EXPECT_EQ(dataset_hash(a.offline), dataset_hash(b.offline));
    s.seed = 1;
    EXPECT_NE(dataset_hash(generate_scenario(s).offline), dataset_hash(a.offline));
}

TEST(Scenario, SplitAndWindowChecks) {
    ScenarioSpec s;
    const auto sc = generate_scenario(s);
    EXPECT_EQ(sc.offline.rows(), 400);
    EXPECT_EQ(sc.online.timestamps.front(), 400);
    s.t_start = 300;
    try {
        generate_scenario(s);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::Spec);
    }
}

TEST(Scenario, GridRoundTrip) {
    std::ostringstream text;
    write_scenario(text, make_scenario(25, 2.0, 0.05, 1.0, 4.0, 9));
    text << "\n[scenario]\nname = rel\nn_seas = 10\nlength = 120\noffline_fraction = 0.5\nstart_season = 1\n"
            "end_season = 3\n";
    const auto grid = read_scenario_grid(ini::parse_string(text.str(), "grid"), "grid");
    ASSERT_EQ(grid.size(), 2u);
    EXPECT_EQ(grid[0].n_seas, 25);
    EXPECT_EQ(grid[0].t_start, 225);
    EXPECT_EQ(grid[0].t_end, 300);
    EXPECT_EQ(grid[0].seed, 9u);
    EXPECT_EQ(grid[1].t_start, 70);
    EXPECT_EQ(grid[1].t_end, 90);
    EXPECT_THROW(read_scenario_grid(ini::parse_string("[scenario]\nt_start = 1\nt_end = 5\n", "g"), "g"), Error);
}
