#pragma once

// Synthetic seasonal series with a multiplicative manipulation window.

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "evars/dataset.hpp"
#include "evars/ini.hpp"
#include "evars/random.hpp"

namespace evars {

struct ScenarioSpec {
    std::string name;
    int n_seas = 50;
    double amplitude = 10.0;
    Eigen::Index length = 600;
    double offline_fraction = 2.0 / 3.0;
    /// Manipulation window as absolute row indices; it must lie in the online part.
    Eigen::Index t_start = 450;
    Eigen::Index t_end = 550;
    double delta_base = 1.0;
    double delta_max = 2.0;
    double kappa = 0.5;
    double noise_y = 0.1;
    double noise_x = 0.01;
    int n_covariates = 2;
    std::uint64_t seed = 0;

    [[nodiscard]] Eigen::Index offline_rows() const {
        return static_cast<Eigen::Index>(std::floor(offline_fraction * static_cast<double>(length) + 1e-9));
    }

    void validate() const {
        if (n_seas < 2) fail(ErrorKind::Spec, "n_seas must be >= 2");
        if (length <= n_seas) fail(ErrorKind::Spec, "length must exceed n_seas");
        if (!(t_start < t_end) || t_end > length) fail(ErrorKind::Spec, "need t_start < t_end <= length");
        if (!(delta_base > 0.0) || !(delta_max > 0.0)) fail(ErrorKind::Spec, "manipulation factors must be > 0");
        if (!(kappa >= 0.0)) fail(ErrorKind::Spec, "kappa must be >= 0");
        if (noise_y < 0.0 || noise_x < 0.0) fail(ErrorKind::Spec, "noise levels must be >= 0");
        if (n_covariates < 1) fail(ErrorKind::Spec, "need at least one covariate");
        if (!(offline_fraction > 0.0 && offline_fraction < 1.0)) fail(ErrorKind::Spec, "offline_fraction must lie in (0, 1)");
        if (t_start < offline_rows()) {
            fail(ErrorKind::Spec, "manipulation window starts at " + std::to_string(t_start) +
                                      " inside the offline part (first online row " + std::to_string(offline_rows()) +
                                      ")");
        }
    }

    /// True when the ramps cannot reach delta_max inside the window.
    [[nodiscard]] bool plateau_truncated() const {
        if (kappa == 0.0) return false;
        return 2.0 * std::abs(delta_max - delta_base) / kappa > static_cast<double>(t_end - t_start);
    }
};

/// delta(t): delta_base outside [t_start, t_end]; inside, it moves toward
/// delta_max with slope kappa, holds, and returns with slope kappa so that
/// it is back at delta_base at t_end. Short windows peak early.
inline double manipulation_factor(Eigen::Index t, const ScenarioSpec& s) {
    if (t < 0) fail(ErrorKind::Spec, "negative time index");
    if (t < s.t_start || t > s.t_end) return s.delta_base;
    const double height = std::abs(s.delta_max - s.delta_base);
    const double up = s.kappa * static_cast<double>(t - s.t_start);
    const double down = s.kappa * static_cast<double>(s.t_end - t);
    const double m = std::min({height, up, down});
    return s.delta_max >= s.delta_base ? s.delta_base + m : s.delta_base - m;
}

struct Scenario {
    TimeSeriesDataset offline;
    TimeSeriesDataset online;
    /// Target before manipulation, for the online rows.
    Eigen::VectorXd online_unmanipulated;
    std::vector<std::string> warnings;
};

inline Scenario generate_scenario(const ScenarioSpec& s) {
    s.validate();
    Rng rng = make_rng(s.seed, "simulate");
    std::normal_distribution<double> noise(0.0, 1.0);
    const auto n = s.length;
    Eigen::MatrixXd x(n, s.n_covariates);
    Eigen::VectorXd clean(n);
    Eigen::VectorXd y(n);
    std::vector<std::int64_t> stamps(static_cast<std::size_t>(n));
    for (Eigen::Index t = 0; t < n; ++t) {
        const double phase = 2.0 * std::numbers::pi * static_cast<double>(t % s.n_seas) / s.n_seas;
        for (int j = 0; j < s.n_covariates; ++j) {
            x(t, j) = std::sin(phase + std::numbers::pi * j / s.n_covariates) + s.noise_x * noise(rng);
        }
        clean(t) = s.amplitude * std::sin(phase) + 2.0 * s.amplitude + s.noise_y * noise(rng);
        y(t) = clean(t) * manipulation_factor(t, s);
        stamps[static_cast<std::size_t>(t)] = t;
    }
    std::vector<std::string> names;
    for (int j = 0; j < s.n_covariates; ++j) names.push_back("x" + std::to_string(j));
    const auto all = make_dataset(stamps, x, y, s.n_seas, names);

    Scenario out;
    const auto n_off = s.offline_rows();
    out.offline = slice(all, 0, n_off);
    out.online = slice(all, n_off, n);
    out.online_unmanipulated = clean.tail(n - n_off);
    if (s.plateau_truncated()) {
        out.warnings.push_back("window too short for the full ramp; delta peaks below delta_max");
    }
    return out;
}

/// Reads repeated [scenario] sections. Each may set any ScenarioSpec field;
/// window positions may be given in seasons after the first online row with
/// start_season / end_season instead of t_start / t_end.
inline std::vector<ScenarioSpec> read_scenario_grid(const ini::Document& doc, const std::string& origin) {
    std::vector<ScenarioSpec> grid;
    for (const auto* sec : doc.all("scenario")) {
        ini::Reader r(*sec, origin);
        ScenarioSpec s;
        s.name = r.string("name").value_or("scenario_" + std::to_string(grid.size()));
        r.set_if("n_seas", s.n_seas);
        r.set_if("amplitude", s.amplitude);
        if (auto v = r.integer("length")) s.length = *v;
        r.set_if("offline_fraction", s.offline_fraction);
        if (auto v = r.integer("t_start")) s.t_start = *v;
        if (auto v = r.integer("t_end")) s.t_end = *v;
        if (auto v = r.real("start_season")) s.t_start = s.offline_rows() + std::llround(*v * s.n_seas);
        if (auto v = r.real("end_season")) s.t_end = s.offline_rows() + std::llround(*v * s.n_seas);
        r.set_if("delta_base", s.delta_base);
        r.set_if("delta_max", s.delta_max);
        r.set_if("kappa", s.kappa);
        r.set_if("noise_y", s.noise_y);
        r.set_if("noise_x", s.noise_x);
        r.set_if("n_covariates", s.n_covariates);
        if (auto v = r.integer("seed")) s.seed = static_cast<std::uint64_t>(*v);
        r.finish();
        try {
            s.validate();
        } catch (const Error& e) {
            fail(ErrorKind::Spec, origin + ":" + std::to_string(sec->line) + ": " + e.what());
        }
        grid.push_back(s);
    }
    if (grid.empty()) fail(ErrorKind::Parse, origin + ": no [scenario] sections");
    return grid;
}

inline void write_scenario(std::ostream& out, const ScenarioSpec& s) {
    out << "[scenario]\n"
        << "name = " << s.name << '\n'
        << "n_seas = " << s.n_seas << '\n'
        << "amplitude = " << ini::format_real(s.amplitude) << '\n'
        << "length = " << s.length << '\n'
        << "offline_fraction = " << ini::format_real(s.offline_fraction) << '\n'
        << "t_start = " << s.t_start << '\n'
        << "t_end = " << s.t_end << '\n'
        << "delta_base = " << ini::format_real(s.delta_base) << '\n'
        << "delta_max = " << ini::format_real(s.delta_max) << '\n'
        << "kappa = " << ini::format_real(s.kappa) << '\n'
        << "noise_y = " << ini::format_real(s.noise_y) << '\n'
        << "noise_x = " << ini::format_real(s.noise_x) << '\n'
        << "n_covariates = " << s.n_covariates << '\n'
        << "seed = " << s.seed << '\n';
}

/// Scenario with `offline_seasons` offline and `online_seasons` online
/// seasons; the window is given in seasons after the first online row.
inline ScenarioSpec make_scenario(int n_seas, double delta_max, double kappa, double start_season,
                                  double end_season, std::uint64_t seed, int offline_seasons = 8,
                                  int online_seasons = 4) {
    ScenarioSpec s;
    s.n_seas = n_seas;
    s.length = Eigen::Index{n_seas} * (offline_seasons + online_seasons);
    s.offline_fraction = static_cast<double>(offline_seasons) / (offline_seasons + online_seasons);
    const auto n_off = s.offline_rows();
    s.t_start = n_off + std::llround(start_season * n_seas);
    s.t_end = std::min<Eigen::Index>(s.length, n_off + std::llround(end_season * n_seas));
    s.delta_max = delta_max;
    s.kappa = kappa;
    s.seed = seed;
    char buf[96];
    std::snprintf(buf, sizeof buf, "n%d_d%g_k%g_w%g-%g", n_seas, delta_max, kappa, start_season, end_season);
    s.name = buf;
    return s;
}

}  // namespace evars
