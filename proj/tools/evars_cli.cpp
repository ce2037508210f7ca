#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <unistd.h>

#include "CLI11.hpp"
#include "evars/evars.hpp"

namespace fs = std::filesystem;
using namespace evars;

namespace {

struct Globals {
    std::uint64_t seed = 1;
    std::string out;
    std::string config;
    bool overwrite = false;
};

std::string read_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::Input, "cannot open " + path);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

std::string hex(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

/// Collects artifacts in a staging directory next to the target and moves it
/// into place only once everything has been written.
class OutputDir {
public:
    OutputDir(const Globals& g, const std::string& subcommand) : overwrite_(g.overwrite) {
        if (!g.out.empty()) {
            target_ = g.out;
        } else {
            const char* root = std::getenv("EVARS_OUT_ROOT");
            target_ = fs::path(root != nullptr && *root != '\0' ? root : "runs") /
                      (subcommand + "_seed" + std::to_string(g.seed));
        }
        check_target();
        staging_ = target_.parent_path() / ("." + target_.filename().string() + ".tmp" + std::to_string(::getpid()));
        if (staging_.has_parent_path()) fs::create_directories(staging_.parent_path());
        fs::remove_all(staging_);
        fs::create_directories(staging_);
    }

    OutputDir(const OutputDir&) = delete;
    OutputDir& operator=(const OutputDir&) = delete;

    ~OutputDir() {
        std::error_code ec;
        if (!committed_) fs::remove_all(staging_, ec);
    }

    std::ofstream open(const std::string& name) {
        std::ofstream out(staging_ / name, std::ios::binary);
        if (!out) fail(ErrorKind::Input, "cannot write " + (staging_ / name).string());
        return out;
    }

    void commit() {
        check_target();
        if (fs::exists(target_)) fs::remove_all(target_);
        fs::rename(staging_, target_);
        committed_ = true;
        std::cout << "wrote " << target_.string() << '\n';
    }

private:
    void check_target() const {
        if (fs::exists(target_) && !(fs::is_directory(target_) && fs::is_empty(target_)) && !overwrite_) {
            fail(ErrorKind::Config, "output directory " + target_.string() + " exists and is not empty (use --overwrite)");
        }
    }

    fs::path target_;
    fs::path staging_;
    bool overwrite_ = false;
    bool committed_ = false;
};

RunConfig load_config(const Globals& g) {
    if (g.config.empty()) return {};
    auto cfg = read_run_config(ini::parse_file(g.config), g.config);
    cfg.evars.validate();
    return cfg;
}

/// config.ini holds every effective setting (defaults included) and
/// provenance.json the seed and input hashes, which together reproduce a run.
void write_provenance(OutputDir& dir, const Globals& g, const std::string& subcommand, const RunConfig& cfg,
                      const std::vector<std::string>& inputs, nlohmann::json extra = {}) {
    auto ini_out = dir.open("config.ini");
    write_run_config(ini_out, cfg);
    nlohmann::json j;
    j["subcommand"] = subcommand;
    j["seed"] = g.seed;
    j["config_path"] = g.config;
    auto& files = j["inputs"];
    files = nlohmann::json::array();
    std::vector<std::string> all = inputs;
    if (!g.config.empty()) all.push_back(g.config);
    for (const auto& p : all) files.push_back({{"path", p}, {"fnv1a64", hex(fnv1a(read_bytes(p)))}});
    if (!extra.is_null()) j["details"] = std::move(extra);
    dir.open("provenance.json") << j.dump(2) << '\n';
}

int cmd_simulate(const Globals& g, const std::string& grid_path) {
    auto grid = read_scenario_grid(ini::parse_file(grid_path), grid_path);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (grid[i].seed == 0) grid[i].seed = sub_seed(g.seed, "simulate", i);
    }
    OutputDir dir(g, "simulate");
    auto echo = dir.open("grid.ini");
    nlohmann::json warnings = nlohmann::json::object();
    for (const auto& spec : grid) {
        const auto sc = generate_scenario(spec);
        auto off = dir.open(spec.name + "_offline.csv");
        write_csv(off, sc.offline, "t");
        auto on = dir.open(spec.name + "_online.csv");
        write_csv(on, sc.online, "t");
        write_scenario(echo, spec);
        echo << '\n';
        if (!sc.warnings.empty()) warnings[spec.name] = sc.warnings;
    }
    write_provenance(dir, g, "simulate", RunConfig{}, {grid_path}, {{"warnings", warnings}});
    dir.commit();
    return 0;
}

int cmd_run(const Globals& g, const std::string& manifest_path) {
    const auto cfg = load_config(g);
    const auto data = prepare_manifest(manifest_path);
    OutputDir dir(g, "run");
    const auto tuned = gpr::tune_base_model(data.offline, cfg.tuning.budget, cfg.tuning.folds, sub_seed(g.seed, "tuning"));
    const auto ev = bench::evaluate(data.manifest.name, tuned.model, data.offline, data.online,
                                    {bench::Method::MBase, bench::Method::Evars}, cfg.evars, sub_seed(g.seed, "online"));
    const auto& res = ev.results[1];

    dir.open("model.json") << gpr::snapshot(tuned.model, {data.offline.rows(), dataset_hash(data.offline),
                                                          data.manifest.name})
                                  .dump(2)
                           << '\n';
    auto pred = dir.open("predictions.csv");
    pred << "timestamp,y_true,y_pred,pred_variance,y_base\n";
    for (Eigen::Index i = 0; i < data.online.rows(); ++i) {
        pred << format_timestamp(data.online.timestamps[static_cast<std::size_t>(i)], data.full.frequency) << ','
             << ini::format_real(data.online.target(i)) << ',' << ini::format_real(res.predictions(i)) << ','
             << ini::format_real(res.variances(i)) << ',' << ini::format_real(ev.results[0].predictions(i)) << '\n';
    }
    auto events = dir.open("events.jsonl");
    write_event_log(events, res.events);
    nlohmann::json metrics = {{"dataset", data.manifest.name},
                              {"offline_rows", data.offline.rows()},
                              {"online_rows", data.online.rows()},
                              {"base_kernel", tuned.config.describe()},
                              {"base_cv_rmse", tuned.cv_rmse},
                              {"rmse_base", ev.rows[0].rmse},
                              {"rmse_evars", ev.rows[1].rmse},
                              {"rmse_ratio", ev.rows[1].rmse_ratio},
                              {"refits", res.refits},
                              {"detections", res.detections},
                              {"cpu_seconds", res.cpu_seconds}};
    dir.open("metrics.json") << metrics.dump(2) << '\n';
    write_provenance(dir, g, "run", cfg, {manifest_path, data.manifest.path},
                     {{"offline_hash", hex(dataset_hash(data.offline))}, {"online_hash", hex(dataset_hash(data.online))}});
    dir.commit();
    std::cout << data.manifest.name << ": rmse m_base " << ev.rows[0].rmse << ", evars " << ev.rows[1].rmse
              << " (refits " << res.refits << ")\n";
    return 0;
}

std::vector<bench::Method> parse_methods(const std::vector<std::string>& names) {
    if (names.empty()) return {bench::kAllMethods.begin(), bench::kAllMethods.end()};
    std::vector<bench::Method> out;
    for (const auto& n : names) out.push_back(bench::parse_method(n));
    return out;
}

int cmd_bench(const Globals& g, const std::string& manifest_path, const std::string& grid_path,
              const std::vector<std::string>& method_names) {
    const auto cfg = load_config(g);
    const auto methods = parse_methods(method_names);
    nlohmann::json meta = {{"seed", g.seed}};
    for (auto m : methods) meta["methods"].push_back(std::string(bench::to_string(m)));
    if (!manifest_path.empty()) {
        const auto data = prepare_manifest(manifest_path);
        OutputDir dir(g, "bench");
        const auto tuned =
            gpr::tune_base_model(data.offline, cfg.tuning.budget, cfg.tuning.folds, sub_seed(g.seed, "tuning"));
        const auto ev = bench::evaluate(data.manifest.name, tuned.model, data.offline, data.online, methods, cfg.evars,
                                        sub_seed(g.seed, "online"));
        auto csv = dir.open("report.csv");
        bench::write_rows_csv(csv, ev.rows);
        dir.open("report.json") << bench::rows_json(ev.rows, meta).dump(2) << '\n';
        write_provenance(dir, g, "bench", cfg, {manifest_path, data.manifest.path});
        dir.commit();
        bench::write_rows_csv(std::cout, ev.rows);
        return 0;
    }
    const auto grid = read_scenario_grid(ini::parse_file(grid_path), grid_path);
    OutputDir dir(g, "bench");
    const auto report = bench::sweep_grid(grid, methods, cfg, g.seed);
    const auto rows = bench::all_rows(report);
    auto csv = dir.open("report.csv");
    bench::write_rows_csv(csv, rows);
    dir.open("report.json") << bench::rows_json(rows, meta).dump(2) << '\n';
    auto cells = dir.open("cells.csv");
    bench::write_cells_csv(cells, report, bench::Method::Evars);
    const std::pair<const char*, const char*> axes[] = {
        {"delta_max", "kappa"}, {"n_seas", "delta_max"}, {"t_start", "t_end"}};
    for (const auto& [a, b] : axes) {
        auto m = dir.open(std::string("matrix_") + a + "_" + b + ".csv");
        bench::write_matrix_csv(m, report, bench::Method::Evars, a, b);
    }
    write_provenance(dir, g, "bench", cfg, {grid_path});
    dir.commit();
    int failed = 0;
    for (const auto& c : report.cells) failed += c.ok ? 0 : 1;
    std::cout << report.cells.size() << " cells, " << failed << " failed, mean evars ratio "
              << report.mean_ratio(bench::Method::Evars) << '\n';
    return 0;
}

int cmd_tune(const Globals& g, const std::string& grid_path, int candidates) {
    const auto cfg = load_config(g);
    const auto grid = read_scenario_grid(ini::parse_file(grid_path), grid_path);
    OutputDir dir(g, "tune");
    const auto result = bench::tune_evars_params(grid, candidates, cfg, g.seed);
    RunConfig best = cfg;
    best.evars = result.best;
    auto out = dir.open("best.ini");
    write_run_config(out, best);
    auto scores = dir.open("scores.csv");
    scores << "candidate,mean_rmse_ratio\n";
    for (std::size_t i = 0; i < result.scores.size(); ++i) scores << i << ',' << ini::format_real(result.scores[i]) << '\n';
    write_provenance(dir, g, "tune", cfg, {grid_path}, {{"best_index", result.best_index}});
    dir.commit();
    std::cout << "best candidate " << result.best_index << " mean ratio " << result.scores[result.best_index] << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Event-triggered augmented refitting of Gaussian process models for seasonal series"};
    app.require_subcommand(1);
    app.fallthrough();
    Globals g;
    app.add_option("--seed", g.seed, "Run seed; every random stream derives from it")->capture_default_str();
    app.add_option("--out", g.out, "Output directory (default $EVARS_OUT_ROOT/<subcommand>_seed<seed>)");
    app.add_option("--config", g.config, "INI file with [evars], [detector], [augment], [tuning]")
        ->check(CLI::ExistingFile);
    app.add_flag("--overwrite", g.overwrite, "Replace a non-empty output directory");

    std::string grid, manifest;
    std::vector<std::string> methods;
    int candidates = 20;

    auto* sim = app.add_subcommand("simulate", "Generate synthetic scenarios from a grid file");
    sim->add_option("--grid", grid, "Scenario grid INI")->required()->check(CLI::ExistingFile);

    auto* run = app.add_subcommand("run", "Tune a base model on a dataset and run the online loop");
    run->add_option("--dataset", manifest, "Dataset manifest INI")->required()->check(CLI::ExistingFile);

    auto* bench_cmd = app.add_subcommand("bench", "Compare methods on a dataset or a scenario grid");
    auto* ds_opt = bench_cmd->add_option("--dataset", manifest, "Dataset manifest INI")->check(CLI::ExistingFile);
    auto* grid_opt = bench_cmd->add_option("--grid", grid, "Scenario grid INI")->check(CLI::ExistingFile);
    ds_opt->excludes(grid_opt);
    bench_cmd->add_option("--methods", methods, "Methods to run (default: all)")->delimiter(',');

    auto* tune = app.add_subcommand("tune", "Random search over online-method parameters on a grid");
    tune->add_option("--grid", grid, "Scenario grid INI")->required()->check(CLI::ExistingFile);
    tune->add_option("--candidates", candidates, "Number of sampled configurations")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (*sim) return cmd_simulate(g, grid);
        if (*run) return cmd_run(g, manifest);
        if (*bench_cmd) {
            if (manifest.empty() == grid.empty()) fail(ErrorKind::Config, "bench needs exactly one of --dataset, --grid");
            return cmd_bench(g, manifest, grid, methods);
        }
        return cmd_tune(g, grid, candidates);
    } catch (const Error& e) {
        std::cerr << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}
