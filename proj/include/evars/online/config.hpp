#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "evars/augment/build.hpp"
#include "evars/cpd/detector.hpp"
#include "evars/ini.hpp"

namespace evars {

struct EvarsConfig {
    double scale_window_factor = 0.1;
    int scale_window_minimum = 2;
    /// n_eta: number of previous seasons averaged in the scaling factor.
    int scale_seasons = 2;
    /// pi_eta: relative change of the scaling factor needed to refit.
    double scale_thr = 0.1;
    cpd::DetectorConfig detector;
    augment::AugmentParams augment;
    int max_samples_factor = 10;
    /// Candidates in the parameter search of each refit.
    int refit_budget = 20;
    bool reset_detector_after_refit = false;

    /// n_w = max(minimum, floor(factor * n_seas)).
    [[nodiscard]] int scale_window(int n_seas) const {
        return std::max(scale_window_minimum, static_cast<int>(std::floor(scale_window_factor * n_seas)));
    }

    [[nodiscard]] Eigen::Index max_samples(int n_seas) const { return Eigen::Index{max_samples_factor} * n_seas; }

    void validate() const {
        if (scale_window_factor < 0.0 || scale_window_minimum < 1) fail(ErrorKind::Config, "scale window must be >= 1");
        if (scale_seasons < 1) fail(ErrorKind::Config, "scale_seasons must be >= 1");
        if (std::isnan(scale_thr) || scale_thr < 0.0) fail(ErrorKind::Config, "scale_thr must be >= 0");
        if (max_samples_factor < 1) fail(ErrorKind::Config, "max_samples_factor must be >= 1");
        if (refit_budget < 1) fail(ErrorKind::Config, "refit_budget must be >= 1");
        detector.changefinder.validate();
        const double p = detector.cf_threshold_percentile;
        if (!(p > 0.0 && p <= 100.0)) fail(ErrorKind::Config, "cf_thr_perc must lie in (0, 100]");
        augment.validate();
    }
};

/// Offline base-model search settings.
struct TuningConfig {
    int budget = 30;
    int folds = 3;
};

struct RunConfig {
    EvarsConfig evars;
    TuningConfig tuning;
};

/// Reads [evars], [detector], [augment] and [tuning]; absent keys keep their
/// defaults and unknown keys are rejected. Other sections are left to their
/// owners.
inline RunConfig read_run_config(const ini::Document& doc, const std::string& origin) {
    RunConfig cfg;
    auto& e = cfg.evars;
    if (const auto* sec = doc.first("evars")) {
        ini::Reader r(*sec, origin);
        r.set_if("scale_window_factor", e.scale_window_factor);
        r.set_if("scale_window_minimum", e.scale_window_minimum);
        r.set_if("scale_seasons", e.scale_seasons);
        r.set_if("scale_thr", e.scale_thr);
        r.set_if("max_samples_factor", e.max_samples_factor);
        r.set_if("refit_budget", e.refit_budget);
        r.set_if("reset_detector_after_refit", e.reset_detector_after_refit);
        r.finish();
    }
    if (const auto* sec = doc.first("detector")) {
        ini::Reader r(*sec, origin);
        auto& d = e.detector;
        if (auto kind = r.string("kind")) d.kind = cpd::parse_detector(*kind);
        r.set_if("cf_r", d.changefinder.r);
        r.set_if("cf_order", d.changefinder.order);
        r.set_if("cf_smooth", d.changefinder.smooth);
        r.set_if("cf_thr_perc", d.cf_threshold_percentile);
        r.set_if("bocpd_lambda", d.bocpd_lambda);
        r.set_if("bocpd_truncation", d.bocpd_truncation);
        if (auto g = r.integer("bocpd_guard")) d.bocpd_guard = static_cast<long>(*g);
        r.finish();
    }
    if (const auto* sec = doc.first("augment")) {
        ini::Reader r(*sec, origin);
        auto& a = e.augment;
        if (auto m = r.string("method")) a.method = augment::parse_method(*m);
        r.set_if("append_scaled", a.append_scaled);
        r.set_if("gn_oversample_percent", a.gn.oversample_percent);
        r.set_if("gn_undersample_percent", a.gn.undersample_percent);
        r.set_if("gn_relevance_threshold", a.gn.relevance_threshold);
        r.set_if("smogn_relevance_threshold", a.smogn.relevance_threshold);
        r.set_if("smogn_boxplot_coefficient", a.smogn.boxplot_coefficient);
        r.set_if("smogn_undersample", a.smogn.undersample);
        r.set_if("smogn_k_neighbors", a.smogn.k_neighbors);
        r.finish();
    }
    if (const auto* sec = doc.first("tuning")) {
        ini::Reader r(*sec, origin);
        r.set_if("budget", cfg.tuning.budget);
        r.set_if("folds", cfg.tuning.folds);
        r.finish();
    }
    e.validate();
    if (cfg.tuning.budget < 1 || cfg.tuning.folds < 1) fail(ErrorKind::Config, origin + ": tuning budget and folds must be >= 1");
    return cfg;
}

/// Writes every setting, defaults included, in the format read_run_config accepts.
inline void write_run_config(std::ostream& out, const RunConfig& cfg) {
    const auto& e = cfg.evars;
    const auto& d = e.detector;
    const auto& a = e.augment;
    auto real = [](double v) { return ini::format_real(v); };
    out << "[evars]\n"
        << "scale_window_factor = " << real(e.scale_window_factor) << '\n'
        << "scale_window_minimum = " << e.scale_window_minimum << '\n'
        << "scale_seasons = " << e.scale_seasons << '\n'
        << "scale_thr = " << real(e.scale_thr) << '\n'
        << "max_samples_factor = " << e.max_samples_factor << '\n'
        << "refit_budget = " << e.refit_budget << '\n'
        << "reset_detector_after_refit = " << (e.reset_detector_after_refit ? "true" : "false") << "\n\n"
        << "[detector]\n"
        << "kind = " << cpd::to_string(d.kind) << '\n'
        << "cf_r = " << real(d.changefinder.r) << '\n'
        << "cf_order = " << d.changefinder.order << '\n'
        << "cf_smooth = " << d.changefinder.smooth << '\n'
        << "cf_thr_perc = " << real(d.cf_threshold_percentile) << '\n'
        << "bocpd_lambda = " << real(d.bocpd_lambda) << '\n'
        << "bocpd_truncation = " << real(d.bocpd_truncation) << '\n'
        << "bocpd_guard = " << d.bocpd_guard << "\n\n"
        << "[augment]\n"
        << "method = " << augment::to_string(a.method) << '\n'
        << "append_scaled = " << (a.append_scaled ? "true" : "false") << '\n'
        << "gn_oversample_percent = " << real(a.gn.oversample_percent) << '\n'
        << "gn_undersample_percent = " << real(a.gn.undersample_percent) << '\n'
        << "gn_relevance_threshold = " << real(a.gn.relevance_threshold) << '\n'
        << "smogn_relevance_threshold = " << real(a.smogn.relevance_threshold) << '\n'
        << "smogn_boxplot_coefficient = " << real(a.smogn.boxplot_coefficient) << '\n'
        << "smogn_undersample = " << (a.smogn.undersample ? "true" : "false") << '\n'
        << "smogn_k_neighbors = " << a.smogn.k_neighbors << "\n\n"
        << "[tuning]\n"
        << "budget = " << cfg.tuning.budget << '\n'
        << "folds = " << cfg.tuning.folds << '\n';
}

}  // namespace evars
