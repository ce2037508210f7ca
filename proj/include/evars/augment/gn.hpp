#pragma once

#include <algorithm>
#include <cmath>
#include <iterator>
#include <map>
#include <optional>
#include <string>

#include "evars/augment/relevance.hpp"
#include "evars/dataset.hpp"
#include "evars/random.hpp"

namespace evars::augment {

enum class Method { Scale, GaussianNoise, Smogn };

inline std::string_view to_string(Method m) {
    switch (m) {
        case Method::Scale: return "scale";
        case Method::GaussianNoise: return "gn";
        case Method::Smogn: return "smogn";
    }
    return "scale";
}

inline Method parse_method(std::string_view s) {
    if (s == "scale") return Method::Scale;
    if (s == "gn") return Method::GaussianNoise;
    if (s == "smogn") return Method::Smogn;
    fail(ErrorKind::Config, "unknown augmentation method '" + std::string(s) + "'");
}

struct GnParams {
    double oversample_percent = 100.0;
    double undersample_percent = 100.0;
    double relevance_threshold = 0.8;
};

struct SmognParams {
    double relevance_threshold = 0.8;
    double boxplot_coefficient = 1.5;
    bool undersample = true;
    int k_neighbors = 5;
};

struct AugmentParams {
    Method method = Method::Scale;
    /// Augment the history with its scaled copy appended instead of the scaled copy alone.
    bool append_scaled = false;
    GnParams gn;
    SmognParams smogn;
    /// Cap on refit rows (most recent rows kept); 0 means no cap.
    Eigen::Index max_samples = 0;

    void validate() const {
        if (gn.oversample_percent < 0.0 || gn.undersample_percent < 0.0) {
            fail(ErrorKind::Parameter, "sampling percentages must be >= 0");
        }
        for (double t : {gn.relevance_threshold, smogn.relevance_threshold}) {
            if (!(t > 0.0 && t < 1.0)) fail(ErrorKind::Parameter, "relevance thresholds must lie in (0, 1)");
        }
        if (smogn.k_neighbors < 1) fail(ErrorKind::Parameter, "k_neighbors must be >= 1");
        if (smogn.boxplot_coefficient < 0.0) fail(ErrorKind::Parameter, "boxplot coefficient must be >= 0");
        if (max_samples < 0) fail(ErrorKind::Parameter, "max_samples must be >= 0");
    }
};

/// Perturbation scale of synthetic noise, as a fraction of each column's standard deviation.
inline constexpr double kNoiseFraction = 0.02;

inline TimeSeriesDataset scale_dataset(const TimeSeriesDataset& history, double eta) {
    if (!std::isfinite(eta) || eta <= 0.0) fail(ErrorKind::Parameter, "scaling factor must be finite and > 0");
    TimeSeriesDataset out = history;
    out.target *= eta;
    return out;
}

/// Row indices of the normal and rare cases.
struct RelevanceSplit {
    std::vector<Eigen::Index> normal;
    std::vector<Eigen::Index> rare;
};

inline RelevanceSplit split_by_relevance(const Eigen::VectorXd& rel, double threshold,
                                         const std::vector<bool>& also_rare = {}) {
    RelevanceSplit s;
    for (Eigen::Index i = 0; i < rel.size(); ++i) {
        const bool extra = !also_rare.empty() && also_rare[static_cast<std::size_t>(i)];
        (rel(i) >= threshold || extra ? s.rare : s.normal).push_back(i);
    }
    return s;
}

inline std::size_t percent_count(double percent, std::size_t n) {
    return static_cast<std::size_t>(std::ceil(percent / 100.0 * static_cast<double>(n) - 1e-9));
}

/// Random subset of `count` indices, kept in their original order.
inline std::vector<Eigen::Index> undersample(const std::vector<Eigen::Index>& rows, std::size_t count, Rng& rng) {
    if (count >= rows.size()) return rows;
    std::vector<Eigen::Index> out;
    out.reserve(count);
    std::sample(rows.begin(), rows.end(), std::back_inserter(out), count, rng);
    return out;
}

namespace detail {

struct ColumnStats {
    Eigen::RowVectorXd sd;
    double target_sd = 0.0;
    /// Observed values of each categorical column, with their counts.
    std::vector<std::vector<std::pair<double, std::size_t>>> levels;
};

inline ColumnStats column_stats(const TimeSeriesDataset& ds) {
    ColumnStats s;
    const auto n = static_cast<double>(ds.rows());
    const Eigen::RowVectorXd mean = ds.covariates.colwise().mean();
    s.sd = ((ds.covariates.rowwise() - mean).array().square().colwise().sum() / n).sqrt();
    s.target_sd = std::sqrt((ds.target.array() - ds.target.mean()).square().sum() / n);
    s.levels.resize(static_cast<std::size_t>(ds.dims()));
    for (Eigen::Index j = 0; j < ds.dims(); ++j) {
        if (!ds.categorical[static_cast<std::size_t>(j)]) continue;
        std::map<double, std::size_t> counts;
        for (Eigen::Index i = 0; i < ds.rows(); ++i) ++counts[ds.covariates(i, j)];
        s.levels[static_cast<std::size_t>(j)].assign(counts.begin(), counts.end());
    }
    return s;
}

inline double sample_level(const std::vector<std::pair<double, std::size_t>>& levels, Rng& rng) {
    std::size_t total = 0;
    for (const auto& l : levels) total += l.second;
    std::uniform_int_distribution<std::size_t> pick(0, total - 1);
    std::size_t k = pick(rng);
    for (const auto& l : levels) {
        if (k < l.second) return l.first;
        k -= l.second;
    }
    return levels.back().first;
}

/// Copy of a seed row with additive Gaussian noise on numeric covariates
/// and the target; categorical columns are redrawn by observed frequency.
inline std::pair<Eigen::VectorXd, double> noisy_copy(const TimeSeriesDataset& ds, Eigen::Index seed,
                                                     const ColumnStats& stats, Rng& rng) {
    std::normal_distribution<double> noise(0.0, 1.0);
    Eigen::VectorXd x = ds.covariates.row(seed).transpose();
    for (Eigen::Index j = 0; j < ds.dims(); ++j) {
        if (ds.categorical[static_cast<std::size_t>(j)]) {
            x(j) = sample_level(stats.levels[static_cast<std::size_t>(j)], rng);
        } else {
            x(j) += kNoiseFraction * stats.sd(j) * noise(rng);
        }
    }
    const double y = ds.target(seed) + kNoiseFraction * stats.target_sd * noise(rng);
    return {x, y};
}

/// Kept rows followed by synthetic rows, stably sorted by timestamp.
inline TimeSeriesDataset assemble(const TimeSeriesDataset& base, std::vector<Eigen::Index> kept,
                                  const TimeSeriesDataset& synthetic) {
    std::sort(kept.begin(), kept.end());
    auto out = select_rows(base, kept);
    if (synthetic.rows() > 0) out = concat(out, synthetic);
    return sort_by_timestamp(out);
}

inline TimeSeriesDataset empty_like(const TimeSeriesDataset& ds) { return slice(ds, 0, 0); }

}  // namespace detail

/// Gaussian-noise oversampling. Normal rows are undersampled to
/// ceil(u% |N|), all rare rows are kept, and ceil(o% |R|) noisy copies of
/// rare rows (round-robin over the rare set) are added. Returns nothing when
/// the rare set is empty.
inline std::optional<TimeSeriesDataset> gn_augment(const TimeSeriesDataset& base, const GnParams& params,
                                                   std::uint64_t seed) {
    validate_shape(base);
    const auto rel = relevance(base.target);
    const auto split = split_by_relevance(rel, params.relevance_threshold);
    if (split.rare.empty()) return std::nullopt;

    Rng rng = make_rng(seed, "augment.gn");
    auto kept = undersample(split.normal, percent_count(params.undersample_percent, split.normal.size()), rng);
    kept.insert(kept.end(), split.rare.begin(), split.rare.end());

    const auto stats = detail::column_stats(base);
    auto synthetic = detail::empty_like(base);
    const auto count = percent_count(params.oversample_percent, split.rare.size());
    for (std::size_t i = 0; i < count; ++i) {
        const auto s = split.rare[i % split.rare.size()];
        auto [x, y] = detail::noisy_copy(base, s, stats, rng);
        append_row(synthetic, base.timestamps[static_cast<std::size_t>(s)], x, y);
    }
    return detail::assemble(base, std::move(kept), synthetic);
}

}  // namespace evars::augment
