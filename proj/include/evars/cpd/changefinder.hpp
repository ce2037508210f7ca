#pragma once

#include <algorithm>
#include <deque>
#include <limits>
#include <numeric>
#include <vector>

#include "evars/cpd/sdar.hpp"

namespace evars::cpd {

struct ChangeFinderParams {
    double r = 0.4;
    int order = 1;
    int smooth = 4;

    void validate() const {
        if (smooth < 1) fail(ErrorKind::Parameter, "smoothing window must be >= 1");
        Sdar(order, r);
    }
};

struct ChangeFinderOutput {
    double score = 0.0;
    bool ready = false;
    bool is_change = false;
};

/// Two-stage ChangeFinder. Stage one scores each value by its negative log
/// predictive density; the scores are smoothed over a window of T, the
/// smoothed series feeds stage two, and the score z_t is the mean of the last
/// T stage-two log-losses. Scores are neutral (0, never a change) until both
/// windows are full.
class ChangeFinder {
public:
    explicit ChangeFinder(const ChangeFinderParams& p = {},
                          double threshold = std::numeric_limits<double>::infinity())
        : params_(p), stage1_(p.order, p.r), stage2_(p.order, p.r), threshold_(threshold) {
        p.validate();
    }

    ChangeFinderOutput step(double y) {
        ++updates_;
        const double ll1 = stage1_.update(y);
        if (stage1_.updates() <= params_.order + 2) return {};
        push(outlier_scores_, -ll1);
        if (outlier_scores_.size() < window()) return {};

        const double o = mean(outlier_scores_);
        const double ll2 = stage2_.update(o);
        if (stage2_.updates() <= params_.order + 2) return {};
        push(losses_, -ll2);
        if (losses_.size() < window()) return {};

        ChangeFinderOutput out;
        out.ready = true;
        out.score = mean(losses_);
        out.is_change = out.score > threshold_;
        return out;
    }

    [[nodiscard]] double threshold() const { return threshold_; }
    void set_threshold(double t) { threshold_ = t; }
    [[nodiscard]] const ChangeFinderParams& params() const { return params_; }
    [[nodiscard]] const std::deque<double>& outlier_scores() const { return outlier_scores_; }
    [[nodiscard]] const std::deque<double>& second_stage_losses() const { return losses_; }
    [[nodiscard]] const Sdar& stage1() const { return stage1_; }
    [[nodiscard]] const Sdar& stage2() const { return stage2_; }
    [[nodiscard]] long updates() const { return updates_; }

private:
    [[nodiscard]] std::size_t window() const { return static_cast<std::size_t>(params_.smooth); }

    void push(std::deque<double>& buf, double v) {
        buf.push_back(v);
        if (buf.size() > window()) buf.pop_front();
    }

    static double mean(const std::deque<double>& buf) {
        return std::accumulate(buf.begin(), buf.end(), 0.0) / static_cast<double>(buf.size());
    }

    ChangeFinderParams params_;
    Sdar stage1_;
    Sdar stage2_;
    std::deque<double> outlier_scores_;
    std::deque<double> losses_;
    double threshold_;
    long updates_ = 0;
};

/// Percentile of offline scores with linear interpolation between order
/// statistics (position p/100 * (n-1)).
inline double calibrate_cf_threshold(std::vector<double> scores, double percentile) {
    if (!(percentile > 0.0 && percentile <= 100.0)) {
        fail(ErrorKind::Calibration, "percentile must lie in (0, 100]");
    }
    if (scores.size() < 10) {
        fail(ErrorKind::Calibration,
             "need at least 10 offline scores to calibrate, got " + std::to_string(scores.size()));
    }
    for (double s : scores) {
        if (!std::isfinite(s)) fail(ErrorKind::Calibration, "non-finite offline score");
    }
    std::sort(scores.begin(), scores.end());
    const double pos = percentile / 100.0 * static_cast<double>(scores.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, scores.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return scores[lo] + frac * (scores[hi] - scores[lo]);
}

}  // namespace evars::cpd
