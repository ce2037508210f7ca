#pragma once

#include <string>
#include <variant>

#include "evars/cpd/bocpd.hpp"
#include "evars/cpd/changefinder.hpp"
#include "evars/cpd/seasonal.hpp"

namespace evars::cpd {

enum class DetectorKind { ChangeFinder, Bocpd };

inline std::string_view to_string(DetectorKind k) { return k == DetectorKind::Bocpd ? "bocpd" : "changefinder"; }

inline DetectorKind parse_detector(std::string_view s) {
    if (s == "changefinder" || s == "cf") return DetectorKind::ChangeFinder;
    if (s == "bocpd") return DetectorKind::Bocpd;
    fail(ErrorKind::Config, "unknown detector '" + std::string(s) + "'");
}

struct DetectorConfig {
    DetectorKind kind = DetectorKind::ChangeFinder;
    ChangeFinderParams changefinder;
    double cf_threshold_percentile = 70.0;
    /// Hazard timescale; 0 selects 5 * n_seas.
    double bocpd_lambda = 0.0;
    double bocpd_truncation = 1e-12;
    long bocpd_guard = 5;
};

/// One step of detector output on the raw (undifferenced) stream.
struct DetectorOutput {
    bool ready = false;
    bool change = false;
    /// ChangeFinder score z_t, or the MAP run length for BOCPD.
    double score = 0.0;
    double threshold = 0.0;
};

/// Either detector behind an incremental seasonal differencer.
class ChangePointDetector {
public:
    /// Builds the detector and warm-starts it on the offline targets. The
    /// ChangeFinder threshold is the configured percentile of the offline
    /// scores; the BOCPD prior is centred on the first differenced offline value
    /// with scale from the offline differenced variance.
    ChangePointDetector(const DetectorConfig& config, const std::vector<double>& offline, int n_seas)
        : config_(config), differ_(n_seas) {
        const auto diffs = seasonal_difference(offline, n_seas);
        if (config.kind == DetectorKind::ChangeFinder) {
            ChangeFinder cf(config.changefinder);
            std::vector<double> scores;
            SeasonalDifferencer warm(n_seas);
            double d = 0.0;
            for (double y : offline) {
                if (!warm.push(y, d)) continue;
                const auto out = cf.step(d);
                if (out.ready) scores.push_back(out.score);
            }
            cf.set_threshold(calibrate_cf_threshold(scores, config.cf_threshold_percentile));
            state_ = std::move(cf);
            differ_ = warm;
        } else {
            double mean = 0.0;
            for (double v : diffs) mean += v;
            mean /= static_cast<double>(diffs.size());
            double var = 0.0;
            for (double v : diffs) var += (v - mean) * (v - mean);
            var /= static_cast<double>(diffs.size());
            BocpdParams p;
            p.lambda = config.bocpd_lambda > 0.0 ? config.bocpd_lambda : 5.0 * n_seas;
            p.prior = {diffs.front(), 1.0, 1.0, std::max(var, 1e-12 + 1e-8 * mean * mean)};
            p.truncation = config.bocpd_truncation;
            p.guard = config.bocpd_guard;
            Bocpd b(p);
            for (double v : diffs) b.step(v);
            state_ = std::move(b);
            for (double y : offline) {
                double ignored = 0.0;
                differ_.push(y, ignored);
            }
        }
    }

    DetectorOutput observe(double y) {
        double d = 0.0;
        if (!differ_.push(y, d)) return {};
        if (auto* cf = std::get_if<ChangeFinder>(&state_)) {
            const auto o = cf->step(d);
            return {o.ready, o.is_change, o.score, cf->threshold()};
        }
        auto& b = std::get<Bocpd>(state_);
        const auto o = b.step(d);
        return {true, o.change, static_cast<double>(o.map_run_length), 0.0};
    }

    [[nodiscard]] DetectorKind kind() const { return config_.kind; }
    [[nodiscard]] std::string_view name() const { return to_string(config_.kind); }
    [[nodiscard]] const DetectorConfig& config() const { return config_; }
    [[nodiscard]] double threshold() const {
        if (const auto* cf = std::get_if<ChangeFinder>(&state_)) return cf->threshold();
        return 0.0;
    }

private:
    DetectorConfig config_;
    SeasonalDifferencer differ_;
    std::variant<ChangeFinder, Bocpd> state_{ChangeFinder{}};
};

}  // namespace evars::cpd
