#include <gtest/gtest.h>

#include <sstream>

#include "evars/bench/sweep.hpp"

using namespace evars;
using namespace evars::bench;

namespace {

ScenarioSpec tiny(double delta_max, std::uint64_t seed = 3) {
    return make_scenario(10, delta_max, 0.5, 1.0, 3.0, seed, 8, 4);
}

RunConfig quick() {
    RunConfig cfg;
    cfg.tuning.budget = 3;
    cfg.evars.refit_budget = 3;
    return cfg;
}

}  // namespace

TEST(Rmse, Examples) {
    Eigen::VectorXd a(2), b(2);
    a << 1, 2;
    b << 2, 4;
    EXPECT_DOUBLE_EQ(rmse(a, b), std::sqrt(2.5));
    EXPECT_EQ(rmse(a, a), 0.0);
    EXPECT_DOUBLE_EQ(rmse(a, (a.array() + 1.0).matrix()), 1.0);
    EXPECT_THROW(rmse(a, Eigen::VectorXd::Zero(3)), Error);
    EXPECT_THROW(rmse(Eigen::VectorXd(), Eigen::VectorXd()), Error);
}

TEST(Methods, NamesRoundTrip) {
    for (auto m : kAllMethods) EXPECT_EQ(parse_method(to_string(m)), m);
    try {
        parse_method("arima");
        FAIL();
    } catch (const Error& e) {
        EXPECT_NE(std::string(e.what()).find("cpd_retrain"), std::string::npos);
    }
}

TEST(Methods, RefitCountsFollowDefinitions) {
    const auto c = prepare_cell(tiny(3.0), quick().tuning, 1);
    const auto& off = c.data.offline;
    const auto& on = c.data.online;
    const auto cfg = quick().evars;
    EXPECT_EQ(run_method(Method::MBase, c.base, off, on, cfg, 1).refits, 0);
    const auto pr1 = run_method(Method::PR1, c.base, off, on, cfg, 1);
    const auto pr2 = run_method(Method::PR2, c.base, off, on, cfg, 1);
    const auto ev = run_method(Method::Evars, c.base, off, on, cfg, 1);
    EXPECT_EQ(pr1.refits, on.rows());
    EXPECT_EQ(pr2.refits, on.rows() / 2);
    EXPECT_LE(ev.refits, pr2.refits);
    EXPECT_EQ(run_method(Method::MWGPR, c.base, off, on, cfg, 1).refits, on.rows());
    EXPECT_GE(pr1.cpu_seconds, 0.0);
}

TEST(Methods, CpdScaledWithoutEventsIsBase) {
    const auto c = prepare_cell(tiny(1.0), quick().tuning, 1);
    auto cfg = quick().evars;
    cfg.scale_thr = std::numeric_limits<double>::infinity();
    const auto base = run_method(Method::MBase, c.base, c.data.offline, c.data.online, cfg, 1);
    const auto scaled = run_method(Method::CpdScaled, c.base, c.data.offline, c.data.online, cfg, 1);
    EXPECT_EQ(scaled.refits, 0);
    EXPECT_EQ(scaled.predictions, base.predictions);
}

TEST(Methods, GatedMethodsShareTheDetector) {
    const auto c = prepare_cell(tiny(3.0), quick().tuning, 2);
    const auto cfg = quick().evars;
    const int d = run_method(Method::Evars, c.base, c.data.offline, c.data.online, cfg, 1).detections;
    EXPECT_GT(d, 0);
    for (auto m : {Method::CpdScaled, Method::CpdRetrain, Method::CpdMW}) {
        EXPECT_EQ(run_method(m, c.base, c.data.offline, c.data.online, cfg, 1).detections, d);
    }
}

TEST(Evaluate, BaseRatioIsExactlyOne) {
    const auto c = prepare_cell(tiny(2.0), quick().tuning, 1);
    const auto ev = evaluate("t", c.base, c.data.offline, c.data.online, {Method::MBase, Method::Evars},
                             quick().evars, 1);
    ASSERT_EQ(ev.rows.size(), 2u);
    EXPECT_EQ(ev.rows[0].rmse_ratio, 1.0);
    EXPECT_GT(ev.rows[1].rmse_ratio, 0.0);
}

TEST(Sweep, FailedCellIsIsolated) {
    auto bad = tiny(2.0);
    bad.t_start = 5;
    const auto report = sweep_grid({tiny(1.0), bad, tiny(2.0)}, {Method::Evars}, quick(), 1);
    ASSERT_EQ(report.cells.size(), 3u);
    EXPECT_TRUE(report.cells[0].ok);
    EXPECT_FALSE(report.cells[1].ok);
    EXPECT_FALSE(report.cells[1].error.empty());
    EXPECT_TRUE(report.cells[2].ok);
    EXPECT_TRUE(std::isfinite(report.mean_ratio(Method::Evars)));
    EXPECT_THROW(sweep_grid({}, {Method::Evars}, quick(), 1), Error);
}

TEST(Sweep, NullScenarioIsNeutral) {
    const auto report = sweep_grid({tiny(1.0)}, {Method::Evars}, quick(), 5);
    const double r = report.cells[0].ratio(Method::Evars);
    EXPECT_GE(r, 0.98);
    EXPECT_LE(r, 1.02);
}

TEST(Sweep, ReportsAreWellFormed) {
    const auto report = sweep_grid({tiny(1.0), tiny(2.0)}, {Method::MBase, Method::Evars}, quick(), 1);
    std::ostringstream rows, cells, matrix;
    write_rows_csv(rows, all_rows(report));
    write_cells_csv(cells, report, Method::Evars);
    write_matrix_csv(matrix, report, Method::Evars, "delta_max", "kappa");
    const auto text = rows.str();
    EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 5);
    EXPECT_NE(matrix.str().find("0.5"), std::string::npos);
    const auto j = rows_json(all_rows(report), {{"seed", 1}});
    EXPECT_EQ(j["datasets"].size(), 2u);
    EXPECT_EQ(j["datasets"].begin()->size(), 2u);
    EXPECT_THROW(write_matrix_csv(matrix, report, Method::Evars, "colour", "kappa"), Error);
}

TEST(TuneEvars, SingleCandidateIsTheDefault) {
    const auto r = tune_evars_params({tiny(2.0)}, 1, quick(), 1);
    EXPECT_EQ(r.best_index, 0u);
    EXPECT_EQ(r.scores.size(), 1u);
    EXPECT_EQ(r.best.scale_thr, quick().evars.scale_thr);
}

TEST(TuneEvars, ArgminAndDeterministic) {
    const auto a = tune_evars_params({tiny(2.0)}, 3, quick(), 4);
    const auto b = tune_evars_params({tiny(2.0)}, 3, quick(), 4);
    EXPECT_EQ(a.scores, b.scores);
    EXPECT_EQ(a.best_index, b.best_index);
    EXPECT_LE(a.scores[a.best_index], a.scores[0]);
    EXPECT_THROW(tune_evars_params({tiny(2.0)}, 0, quick(), 4), Error);
}
