#pragma once

#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "evars/bench/methods.hpp"
#include "evars/simulate.hpp"

namespace evars::bench {

struct BenchRow {
    std::string dataset;
    Method method = Method::MBase;
    double rmse = 0.0;
    double rmse_ratio = 1.0;
    int refits = 0;
    int detections = 0;
    double cpu_seconds = 0.0;
    double wall_seconds = 0.0;
};

struct Evaluation {
    std::vector<BenchRow> rows;
    std::vector<MethodResult> results;
};

/// Runs `methods` on one offline/online split. The frozen base model is
/// always evaluated so every row carries an RMSE-ratio against it.
inline Evaluation evaluate(const std::string& dataset, const gpr::GprModel& base, const TimeSeriesDataset& offline,
                           const TimeSeriesDataset& online, const std::vector<Method>& methods,
                           const EvarsConfig& config, std::uint64_t seed) {
    const auto reference = run_method(Method::MBase, base, offline, online, config, seed);
    const double base_rmse = rmse(online.target, reference.predictions);
    Evaluation ev;
    for (auto m : methods) {
        auto r = m == Method::MBase ? reference : run_method(m, base, offline, online, config, seed);
        BenchRow row;
        row.dataset = dataset;
        row.method = m;
        row.rmse = rmse(online.target, r.predictions);
        row.rmse_ratio = m == Method::MBase ? 1.0 : row.rmse / base_rmse;
        row.refits = r.refits;
        row.detections = r.detections;
        row.cpu_seconds = r.cpu_seconds;
        row.wall_seconds = r.wall_seconds;
        ev.rows.push_back(row);
        ev.results.push_back(std::move(r));
    }
    return ev;
}

struct SweepCell {
    ScenarioSpec spec;
    bool ok = false;
    std::string error;
    std::vector<BenchRow> rows;
    std::vector<std::string> warnings;

    /// RMSE-ratio of the given method, NaN when absent or failed.
    [[nodiscard]] double ratio(Method m) const {
        for (const auto& r : rows) {
            if (r.method == m) return r.rmse_ratio;
        }
        return std::numeric_limits<double>::quiet_NaN();
    }
};

struct SweepReport {
    std::vector<SweepCell> cells;

    [[nodiscard]] double mean_ratio(Method m) const {
        double s = 0.0;
        int n = 0;
        for (const auto& c : cells) {
            const double r = c.ratio(m);
            if (c.ok && std::isfinite(r)) {
                s += r;
                ++n;
            }
        }
        return n > 0 ? s / n : std::numeric_limits<double>::quiet_NaN();
    }
};

/// Offline base model of a scenario; cached so parameter searches reuse it.
struct PreparedCell {
    ScenarioSpec spec;
    Scenario data;
    gpr::GprModel base;
};

inline PreparedCell prepare_cell(const ScenarioSpec& spec, const TuningConfig& tuning, std::uint64_t seed) {
    PreparedCell c{spec, generate_scenario(spec), {}};
    c.base = gpr::tune_base_model(c.data.offline, tuning.budget, tuning.folds, seed).model;
    return c;
}

inline std::uint64_t cell_seed(std::uint64_t seed, std::size_t index) { return sub_seed(seed, "bench.cell", index); }

/// Generates each scenario, tunes its base model and runs the methods. A
/// failing cell is recorded and the sweep continues.
inline SweepReport sweep_grid(const std::vector<ScenarioSpec>& grid, const std::vector<Method>& methods,
                              const RunConfig& config, std::uint64_t seed) {
    if (grid.empty()) fail(ErrorKind::Config, "scenario grid is empty");
    SweepReport report;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        SweepCell cell;
        cell.spec = grid[i];
        try {
            const auto s = cell_seed(seed, i);
            const auto prepared = prepare_cell(grid[i], config.tuning, s);
            cell.warnings = prepared.data.warnings;
            cell.rows = evaluate(grid[i].name, prepared.base, prepared.data.offline, prepared.data.online, methods,
                                 config.evars, s)
                            .rows;
            cell.ok = true;
        } catch (const std::exception& e) {
            cell.error = e.what();
        }
        report.cells.push_back(std::move(cell));
    }
    return report;
}

/// Draws one configuration from the parameter space of the online method.
inline EvarsConfig sample_evars_config(Rng& rng, const EvarsConfig& defaults) {
    auto pick = [&rng](const auto& options) {
        std::uniform_int_distribution<std::size_t> d(0, options.size() - 1);
        return options[d(rng)];
    };
    EvarsConfig c = defaults;
    c.scale_window_factor = pick(std::vector<double>{0.05, 0.1, 0.15, 0.2});
    c.scale_window_minimum = pick(std::vector<int>{1, 2, 3});
    c.scale_seasons = pick(std::vector<int>{1, 2, 3});
    c.scale_thr = pick(std::vector<double>{0.05, 0.1, 0.2});
    c.detector.changefinder.r = pick(std::vector<double>{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9});
    c.detector.changefinder.order = pick(std::vector<int>{1, 2});
    c.detector.changefinder.smooth = pick(std::vector<int>{2, 3, 4, 5, 6, 8});
    c.detector.cf_threshold_percentile = pick(std::vector<double>{50, 60, 70, 80, 90});
    c.max_samples_factor = pick(std::vector<int>{5, 10, 20});
    return c;
}

struct EvarsTuningResult {
    EvarsConfig best;
    std::size_t best_index = 0;
    std::vector<double> scores;
};

/// Random search over online-method parameters scored by the mean evars
/// RMSE-ratio over the grid. Candidate 0 is `config.evars` itself; ties keep
/// the lower index. Base models are tuned once per cell.
inline EvarsTuningResult tune_evars_params(const std::vector<ScenarioSpec>& grid, int n_candidates,
                                           const RunConfig& config, std::uint64_t seed) {
    if (n_candidates < 1) fail(ErrorKind::Config, "need at least one candidate");
    if (grid.empty()) fail(ErrorKind::Config, "scenario grid is empty");
    std::vector<PreparedCell> cells;
    for (std::size_t i = 0; i < grid.size(); ++i) cells.push_back(prepare_cell(grid[i], config.tuning, cell_seed(seed, i)));

    Rng rng = make_rng(seed, "bench.evars_search");
    EvarsTuningResult out;
    double best = std::numeric_limits<double>::infinity();
    for (int k = 0; k < n_candidates; ++k) {
        const EvarsConfig cand = k == 0 ? config.evars : sample_evars_config(rng, config.evars);
        double total = 0.0;
        for (std::size_t i = 0; i < cells.size(); ++i) {
            const auto& c = cells[i];
            const auto ev = evaluate(c.spec.name, c.base, c.data.offline, c.data.online, {Method::Evars}, cand,
                                     cell_seed(seed, i));
            total += ev.rows.front().rmse_ratio;
        }
        const double score = total / static_cast<double>(cells.size());
        out.scores.push_back(score);
        if (score < best) {
            best = score;
            out.best = cand;
            out.best_index = static_cast<std::size_t>(k);
        }
    }
    return out;
}

// ---------------------------------------------------------------- reports

inline void write_rows_csv(std::ostream& out, const std::vector<BenchRow>& rows) {
    out << "dataset,method,rmse,rmse_ratio,refits,detections,cpu_seconds,wall_seconds\n";
    for (const auto& r : rows) {
        out << r.dataset << ',' << to_string(r.method) << ',' << ini::format_real(r.rmse) << ','
            << ini::format_real(r.rmse_ratio) << ',' << r.refits << ',' << r.detections << ','
            << ini::format_real(r.cpu_seconds) << ',' << ini::format_real(r.wall_seconds) << '\n';
    }
}

/// Table-shaped document: datasets -> methods -> metrics.
inline nlohmann::json rows_json(const std::vector<BenchRow>& rows, const nlohmann::json& metadata) {
    nlohmann::json j;
    j["metadata"] = metadata;
    auto& tables = j["datasets"];
    tables = nlohmann::json::object();
    for (const auto& r : rows) {
        tables[r.dataset][std::string(to_string(r.method))] = {{"rmse", r.rmse},
                                                              {"rmse_ratio", r.rmse_ratio},
                                                              {"refits", r.refits},
                                                              {"detections", r.detections},
                                                              {"cpu_seconds", r.cpu_seconds},
                                                              {"wall_seconds", r.wall_seconds}};
    }
    return j;
}

inline std::vector<BenchRow> all_rows(const SweepReport& report) {
    std::vector<BenchRow> rows;
    for (const auto& c : report.cells) rows.insert(rows.end(), c.rows.begin(), c.rows.end());
    return rows;
}

inline void write_cells_csv(std::ostream& out, const SweepReport& report, Method method) {
    out << "scenario,n_seas,delta_max,kappa,t_start,t_end,status,rmse_ratio,error\n";
    for (const auto& c : report.cells) {
        const auto& s = c.spec;
        out << s.name << ',' << s.n_seas << ',' << ini::format_real(s.delta_max) << ',' << ini::format_real(s.kappa)
            << ',' << s.t_start << ',' << s.t_end << ',' << (c.ok ? "ok" : "failed") << ','
            << (c.ok ? ini::format_real(c.ratio(method)) : "") << ',';
        std::string err = c.error;
        for (auto& ch : err) {
            if (ch == ',' || ch == '\n') ch = ' ';
        }
        out << err << '\n';
    }
}

/// Mean RMSE-ratio of `method` per (row key, column key) pair, for heatmaps.
inline void write_matrix_csv(std::ostream& out, const SweepReport& report, Method method, const std::string& row_axis,
                             const std::string& col_axis) {
    auto key = [](const ScenarioSpec& s, const std::string& axis) -> std::string {
        if (axis == "n_seas") return std::to_string(s.n_seas);
        if (axis == "delta_max") return ini::format_real(s.delta_max);
        if (axis == "kappa") return ini::format_real(s.kappa);
        if (axis == "t_start") return std::to_string(s.t_start - s.offline_rows());
        if (axis == "t_end") return std::to_string(s.t_end - s.offline_rows());
        fail(ErrorKind::Config, "unknown matrix axis '" + axis + "'");
    };
    auto numeric_less = [](const std::string& a, const std::string& b) { return std::stod(a) < std::stod(b); };
    std::set<std::string, decltype(numeric_less)> rows(numeric_less);
    std::set<std::string, decltype(numeric_less)> cols(numeric_less);
    std::map<std::pair<std::string, std::string>, std::pair<double, int>> acc;
    for (const auto& c : report.cells) {
        if (!c.ok) continue;
        const auto r = key(c.spec, row_axis);
        const auto k = key(c.spec, col_axis);
        rows.insert(r);
        cols.insert(k);
        auto& a = acc[{r, k}];
        a.first += c.ratio(method);
        a.second += 1;
    }
    out << row_axis << '\\' << col_axis;
    for (const auto& k : cols) out << ',' << k;
    out << '\n';
    for (const auto& r : rows) {
        out << r;
        for (const auto& k : cols) {
            out << ',';
            const auto it = acc.find({r, k});
            if (it != acc.end()) out << ini::format_real(it->second.first / it->second.second);
        }
        out << '\n';
    }
}

}  // namespace evars::bench
