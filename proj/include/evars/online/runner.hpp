#pragma once

#include <memory>
#include <optional>
#include <ostream>

#include <json.hpp>

#include "evars/gpr/tuning.hpp"
#include "evars/online/config.hpp"
#include "evars/online/scaling.hpp"

namespace evars {

/// What a gated change event does to the forecaster.
enum class EventAction {
    /// Refit on the augmented (scaled) history.
    Augment,
    /// Multiply the base model's predictions by the event's scaling factor.
    ScaleOutput,
    /// Refit on the raw history.
    RetrainAll,
    /// Refit on the last season of raw history.
    RetrainSeason,
};

struct Event {
    long step = 0;
    /// "detect", "refit" or "skip".
    std::string type;
    double eta = std::numeric_limits<double>::quiet_NaN();
    double eta_old = 1.0;
    std::string reason;
    std::string detector;
    double score = 0.0;
    double threshold = 0.0;
};

inline nlohmann::json to_json(const Event& e) {
    nlohmann::json j;
    j["step"] = e.step;
    j["type"] = e.type;
    j["eta"] = std::isfinite(e.eta) ? nlohmann::json(e.eta) : nlohmann::json(nullptr);
    j["eta_old"] = e.eta_old;
    j["reason"] = e.reason;
    j["detector"] = e.detector;
    j["score"] = e.score;
    j["threshold"] = e.threshold;
    return j;
}

inline void write_event_log(std::ostream& out, const std::vector<Event>& events) {
    for (const auto& e : events) out << to_json(e).dump() << '\n';
}

/// State of one online stream: the forecaster in use, the observed history,
/// the detector and the last accepted scaling factor.
class EvarsState {
public:
    EvarsState(const gpr::GprModel& base, const TimeSeriesDataset& offline, const EvarsConfig& config,
               std::uint64_t seed, EventAction action = EventAction::Augment)
        : base_(base),
          current_(base),
          history_(offline),
          config_(config),
          seed_(seed),
          action_(action),
          detector_(make_detector(offline)) {
        config_.validate();
    }

    /// Predicts y_t from x_t with the current forecaster, then observes y_t.
    gpr::Prediction step(std::int64_t stamp, const Eigen::Ref<const Eigen::VectorXd>& x, double y) {
        if (!x.allFinite() || !std::isfinite(y)) fail(ErrorKind::Input, "non-finite online observation");
        gpr::Prediction p = current_.predict(x);
        if (action_ == EventAction::ScaleOutput) {
            p.mean *= multiplier_;
            p.variance *= multiplier_ * multiplier_;
        }
        append_row(history_, stamp, x, y);
        const long t = step_++;
        const auto out = detector_->observe(y);
        if (out.change) on_detection(t, out);
        return p;
    }

    [[nodiscard]] const std::vector<Event>& events() const { return events_; }
    [[nodiscard]] int refits() const { return refits_; }
    [[nodiscard]] int detections() const { return detections_; }
    [[nodiscard]] double eta_old() const { return eta_old_; }
    [[nodiscard]] const gpr::GprModel& current_model() const { return current_; }
    [[nodiscard]] const TimeSeriesDataset& history() const { return history_; }

private:
    std::unique_ptr<cpd::ChangePointDetector> make_detector(const TimeSeriesDataset& data) const {
        const std::vector<double> y(data.target.data(), data.target.data() + data.target.size());
        return std::make_unique<cpd::ChangePointDetector>(config_.detector, y, data.season_length);
    }

    void on_detection(long t, const cpd::DetectorOutput& out) {
        ++detections_;
        Event e;
        e.step = t;
        e.eta_old = eta_old_;
        e.detector = std::string(detector_->name());
        e.score = out.score;
        e.threshold = out.threshold;
        e.type = "detect";
        events_.push_back(e);

        const int n_seas = history_.season_length;
        auto skip = [&](std::string reason) {
            e.type = "skip";
            e.reason = std::move(reason);
            events_.push_back(e);
        };
        try {
            e.eta = output_scaling_factor(history_.target, history_.rows() - 1, config_.scale_window(n_seas),
                                          config_.scale_seasons, n_seas);
        } catch (const Error& err) {
            skip(err.what());
            return;
        }
        if (!std::isfinite(e.eta) || e.eta <= 0.0) {
            skip("scaling factor is not positive");
            return;
        }
        if (!(std::abs(e.eta - eta_old_) / eta_old_ > config_.scale_thr)) {
            skip("scaling factor change below threshold");
            return;
        }
        try {
            apply(e.eta);
        } catch (const Error& err) {
            skip(std::string("refit failed: ") + err.what());
            return;
        }
        ++refits_;
        eta_old_ = e.eta;
        e.type = "refit";
        events_.push_back(e);
        if (config_.reset_detector_after_refit) detector_ = make_detector(history_);
    }

    void apply(double eta) {
        const int n_seas = history_.season_length;
        const auto seed = sub_seed(seed_, "evars.refit", static_cast<std::uint64_t>(refits_));
        switch (action_) {
            case EventAction::ScaleOutput: multiplier_ = eta; return;
            case EventAction::Augment: {
                auto params = config_.augment;
                params.max_samples = config_.max_samples(n_seas);
                const auto data = augment::build_refit_dataset(history_, eta, params, seed);
                current_ = gpr::refit_model(base_, data.data, config_.refit_budget, seed);
                return;
            }
            case EventAction::RetrainAll:
                current_ = gpr::refit_model(base_, history_, config_.refit_budget, seed);
                return;
            case EventAction::RetrainSeason:
                current_ = gpr::refit_model(base_, tail(history_, n_seas), config_.refit_budget, seed);
                return;
        }
    }

    gpr::GprModel base_;
    gpr::GprModel current_;
    TimeSeriesDataset history_;
    EvarsConfig config_;
    std::uint64_t seed_;
    EventAction action_;
    std::unique_ptr<cpd::ChangePointDetector> detector_;
    std::vector<Event> events_;
    double eta_old_ = 1.0;
    double multiplier_ = 1.0;
    long step_ = 0;
    int refits_ = 0;
    int detections_ = 0;
};

struct OnlineResult {
    std::vector<gpr::Prediction> predictions;
    std::vector<Event> events;
    int refits = 0;
    int detections = 0;
};

/// Runs the stream: one step per online row, in order.
inline OnlineResult run_online(const gpr::GprModel& base, const TimeSeriesDataset& offline,
                               const TimeSeriesDataset& online, const EvarsConfig& config, std::uint64_t seed,
                               EventAction action = EventAction::Augment) {
    if (online.rows() == 0) fail(ErrorKind::Input, "online part is empty");
    try {
        require_same_columns(offline, online);
    } catch (const Error& e) {
        fail(ErrorKind::Config, e.what());
    }
    EvarsState state(base, offline, config, seed, action);
    OnlineResult out;
    out.predictions.reserve(static_cast<std::size_t>(online.rows()));
    for (Eigen::Index i = 0; i < online.rows(); ++i) {
        out.predictions.push_back(
            state.step(online.timestamps[static_cast<std::size_t>(i)], online.covariates.row(i).transpose(),
                       online.target(i)));
    }
    out.events = state.events();
    out.refits = state.refits();
    out.detections = state.detections();
    return out;
}

}  // namespace evars
