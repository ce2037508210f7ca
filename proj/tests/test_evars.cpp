#include <gtest/gtest.h>

#include "evars/online/runner.hpp"
#include "evars/simulate.hpp"
#include "oracles.hpp"

using namespace evars;

namespace {

struct Fixture {
    Scenario scenario;
    gpr::GprModel base;
};

Fixture prepare(const ScenarioSpec& spec, int budget = 4) {
    auto sc = generate_scenario(spec);
    auto base = gpr::tune_base_model(sc.offline, budget, 3, spec.seed).model;
    return {std::move(sc), std::move(base)};
}

std::vector<double> base_means(const gpr::GprModel& m, const TimeSeriesDataset& online) {
    std::vector<double> out;
    for (Eigen::Index i = 0; i < online.rows(); ++i) out.push_back(m.predict(online.covariates.row(i).transpose()).mean);
    return out;
}

std::vector<double> means(const OnlineResult& r) {
    std::vector<double> out;
    for (const auto& p : r.predictions) out.push_back(p.mean);
    return out;
}

ScenarioSpec small(double delta_max, double noise = 0.1) {
    auto s = make_scenario(12, delta_max, 0.5, 1.0, 3.0, 21, 8, 4);
    s.noise_y = noise;
    s.noise_x = noise > 0.0 ? 0.01 : 0.0;
    return s;
}

}  // namespace

TEST(ScalingFactor, HandExamples) {
    std::vector<double> periodic;
    for (int i = 0; i < 40; ++i) periodic.push_back(3.0 + (i % 5));
    const Eigen::VectorXd p = Eigen::Map<Eigen::VectorXd>(periodic.data(), 40);
    EXPECT_EQ(output_scaling_factor(p, 39, 2, 2, 5), 1.0);

    Eigen::VectorXd y = Eigen::VectorXd::Ones(10);
    y(8) = y(9) = 2.0;
    EXPECT_EQ(output_scaling_factor(y, 9, 1, 2, 4), 2.0);

    y(4) = y(5) = 2.0;
    y(8) = y(9) = 4.0;
    EXPECT_EQ(output_scaling_factor(y, 9, 1, 2, 4), 3.0);
}

TEST(ScalingFactor, MatchesLiteralOracleBitwise) {
    Rng rng(99);
    std::uniform_real_distribution<double> u(0.5, 20.0);
    std::uniform_int_distribution<int> seas(2, 12), win(0, 5), eta(1, 3);
    for (int trial = 0; trial < 100; ++trial) {
        const int n_seas = seas(rng), n_w = win(rng), n_eta = eta(rng);
        const long t = long{n_eta} * n_seas + n_w + 3;
        std::vector<double> h(static_cast<std::size_t>(t + 1));
        for (auto& v : h) v = u(rng);
        const Eigen::VectorXd y = Eigen::Map<Eigen::VectorXd>(h.data(), static_cast<Eigen::Index>(h.size()));
        EXPECT_EQ(output_scaling_factor(y, t, n_w, n_eta, n_seas), oracle::scaling_factor(h, t, n_w, n_eta, n_seas));
    }
}

TEST(ScalingFactor, Errors) {
    Eigen::VectorXd y = Eigen::VectorXd::Ones(10);
    try {
        (void)output_scaling_factor(y, 9, 2, 2, 4);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::History);
    }
    y.head(4).setZero();
    try {
        (void)output_scaling_factor(y, 9, 1, 2, 4);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::DegenerateWindow);
    }
}

TEST(Config, DefaultsAndRoundTrip) {
    const EvarsConfig c;
    EXPECT_EQ(c.scale_window(50), 5);
    EXPECT_EQ(c.scale_window(12), 2);
    EXPECT_EQ(c.max_samples(12), 120);
    EXPECT_EQ(c.detector.kind, cpd::DetectorKind::ChangeFinder);
    EXPECT_EQ(c.detector.cf_threshold_percentile, 70.0);

    RunConfig cfg;
    cfg.evars.scale_thr = 0.25;
    cfg.evars.detector.kind = cpd::DetectorKind::Bocpd;
    cfg.evars.augment.method = augment::Method::Smogn;
    cfg.tuning.budget = 7;
    std::ostringstream out;
    write_run_config(out, cfg);
    const auto back = read_run_config(ini::parse_string(out.str(), "cfg"), "cfg");
    std::ostringstream again;
    write_run_config(again, back);
    EXPECT_EQ(out.str(), again.str());
    EXPECT_THROW(read_run_config(ini::parse_string("[evars]\nscale_thrx = 1\n", "c"), "c"), Error);
    EXPECT_THROW(read_run_config(ini::parse_string("[detector]\ncf_thr_perc = 0\n", "c"), "c"), Error);
}

TEST(Online, PeriodicContinuationIsBaseModel) {
    const auto f = prepare(small(1.0, 0.0));
    const auto r = run_online(f.base, f.scenario.offline, f.scenario.online, {}, 1);
    EXPECT_EQ(r.refits, 0);
    EXPECT_EQ(means(r), base_means(f.base, f.scenario.online));
}

TEST(Online, GateDisabledMeansNoRefits) {
    const auto f = prepare(small(3.0));
    EvarsConfig cfg;
    cfg.scale_thr = std::numeric_limits<double>::infinity();
    const auto r = run_online(f.base, f.scenario.offline, f.scenario.online, cfg, 1);
    EXPECT_EQ(r.refits, 0);
    EXPECT_EQ(means(r), base_means(f.base, f.scenario.online));
    for (const auto& e : r.events) EXPECT_NE(e.type, "refit");
}

TEST(Online, NoDetectionsMeansBaseModel) {
    const auto f = prepare(small(3.0));
    EvarsConfig cfg;
    cfg.detector.cf_threshold_percentile = 100.0;
    cfg.detector.changefinder.r = 0.01;
    const auto r = run_online(f.base, f.scenario.offline, f.scenario.online, cfg, 1);
    if (r.detections == 0) {
        EXPECT_EQ(means(r), base_means(f.base, f.scenario.online));
    }
    EXPECT_LE(r.refits, r.detections);
}

TEST(Online, RefitFiresDuringManipulation) {
    auto spec = make_scenario(50, 2.0, 0.5, 1.0, 3.0, 5, 8, 4);
    const auto f = prepare(spec);
    const auto r = run_online(f.base, f.scenario.offline, f.scenario.online, {}, 3);
    const long start = spec.t_start - spec.offline_rows();
    const long end = spec.t_end - spec.offline_rows();
    bool inside = false;
    for (const auto& e : r.events) inside = inside || (e.type == "refit" && e.step >= start && e.step <= end);
    EXPECT_TRUE(inside);
    EXPECT_LE(r.refits, r.detections);
    EXPECT_LE(r.detections, f.scenario.online.rows());
}

TEST(Online, EtaOldChangesOnlyAtRefits) {
    const auto f = prepare(small(3.0));
    const auto r = run_online(f.base, f.scenario.offline, f.scenario.online, {}, 2);
    ASSERT_GT(r.refits, 1);
    double eta_old = 1.0;
    for (const auto& e : r.events) {
        EXPECT_EQ(e.eta_old, eta_old);
        if (e.type == "refit") {
            EXPECT_GT(std::abs(e.eta - eta_old) / eta_old, EvarsConfig{}.scale_thr);
            eta_old = e.eta;
        }
        if (e.type == "skip" && std::isfinite(e.eta)) {
            EXPECT_FALSE(std::abs(e.eta - eta_old) / eta_old > EvarsConfig{}.scale_thr);
        }
    }
}

TEST(Online, CausalAndDeterministic) {
    const auto f = prepare(small(3.0));
    const auto a = run_online(f.base, f.scenario.offline, f.scenario.online, {}, 2);
    const auto b = run_online(f.base, f.scenario.offline, f.scenario.online, {}, 2);
    EXPECT_EQ(means(a), means(b));

    const Eigen::Index cut = f.scenario.online.rows() / 2;
    auto altered = f.scenario.online;
    for (Eigen::Index i = cut; i < altered.rows(); ++i) altered.target(i) = 1000.0 + static_cast<double>(i);
    const auto c = run_online(f.base, f.scenario.offline, altered, {}, 2);
    const auto ma = means(a), mc = means(c);
    for (Eigen::Index i = 0; i <= cut; ++i) EXPECT_EQ(ma[static_cast<std::size_t>(i)], mc[static_cast<std::size_t>(i)]);
}

TEST(Online, ScaleOutputMultipliesBasePredictions) {
    const auto f = prepare(small(3.0));
    const auto r = run_online(f.base, f.scenario.offline, f.scenario.online, {}, 2, EventAction::ScaleOutput);
    ASSERT_GT(r.refits, 0);
    const auto base = base_means(f.base, f.scenario.online);
    double mult = 1.0;
    std::size_t next = 0;
    const auto m = means(r);
    for (std::size_t i = 0; i < m.size(); ++i) {
        EXPECT_EQ(m[i], base[i] * mult);
        while (next < r.events.size() && r.events[next].step <= static_cast<long>(i)) {
            if (r.events[next].type == "refit") mult = r.events[next].eta;
            ++next;
        }
    }
}

TEST(Online, RejectsBadInput) {
    const auto f = prepare(small(1.0));
    auto wrong = f.scenario.online;
    wrong.covariates.conservativeResize(Eigen::NoChange, 1);
    wrong.covariate_names.resize(1);
    wrong.categorical.resize(1);
    try {
        run_online(f.base, f.scenario.offline, wrong, {}, 1);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::Config);
    }
    EvarsState state(f.base, f.scenario.offline, {}, 1);
    EXPECT_THROW(state.step(1000, Eigen::VectorXd::Zero(2), std::nan("")), Error);
}

TEST(Events, JsonLines) {
    Event e;
    e.step = 4;
    e.type = "skip";
    e.reason = "scaling factor change below threshold";
    std::ostringstream out;
    write_event_log(out, {e, e});
    std::istringstream in(out.str());
    std::string line;
    int n = 0;
    while (std::getline(in, line)) {
        const auto j = nlohmann::json::parse(line);
        EXPECT_TRUE(j["eta"].is_null());
        EXPECT_EQ(j["step"], 4);
        ++n;
    }
    EXPECT_EQ(n, 2);
}
