#pragma once

// Calendric and statistical feature expansion. Every generated value at row t
// is computed from targets at rows < t plus the timestamp of row t. Rows whose
// look-back would reach before the series start are back-filled with the
// column's earliest computable value, so the row count never changes.

#include "evars/dataset.hpp"
#include "evars/ini.hpp"

namespace evars {

struct CalendricFlags {
    bool day_of_month = false;
    bool weekday = false;
    bool month = false;
    bool quarter = false;
    bool working_day = false;

    [[nodiscard]] int count() const {
        return int(day_of_month) + int(weekday) + int(month) + int(quarter) + int(working_day);
    }
};

struct FeatureSpec {
    std::vector<int> lags;
    /// Multiples k of the season length: y_{t - k * n_seas}.
    std::vector<int> seasonal_lags;
    std::vector<int> rolling_windows;
    /// Window w covers y_{t - n_seas}, ..., y_{t - w * n_seas}.
    std::vector<int> seasonal_rolling_windows;
    /// Window w covers the last w values at the same weekday (daily data only).
    std::vector<int> weekday_rolling_windows;
    CalendricFlags calendric;

    [[nodiscard]] bool empty() const { return feature_count() == 0; }

    [[nodiscard]] std::size_t feature_count() const {
        return lags.size() + seasonal_lags.size() + 2 * rolling_windows.size() +
               2 * seasonal_rolling_windows.size() + 2 * weekday_rolling_windows.size() +
               static_cast<std::size_t>(calendric.count());
    }
};

namespace detail {

inline void check_positive(const std::vector<int>& v, const char* what) {
    for (int x : v) {
        if (x < 1) fail(ErrorKind::Spec, std::string(what) + " entries must be >= 1");
    }
}

struct FeatureColumn {
    std::string name;
    Eigen::VectorXd values;
    bool categorical = false;
};

/// Trailing statistic over `count` past values spaced `stride` apart, the
/// nearest being `stride` rows back. Rows without a full look-back take the
/// first computable value.
inline std::pair<Eigen::VectorXd, Eigen::VectorXd> strided_mean_max(const Eigen::VectorXd& y, Eigen::Index stride,
                                                                    Eigen::Index count) {
    const auto n = y.size();
    const Eigen::Index first = stride * count;
    Eigen::VectorXd mean(n);
    Eigen::VectorXd max(n);
    for (Eigen::Index t = first; t < n; ++t) {
        double s = 0.0;
        double m = -std::numeric_limits<double>::infinity();
        for (Eigen::Index k = 1; k <= count; ++k) {
            const double v = y(t - k * stride);
            s += v;
            m = std::max(m, v);
        }
        mean(t) = s / static_cast<double>(count);
        max(t) = m;
    }
    for (Eigen::Index t = 0; t < first; ++t) {
        mean(t) = mean(first);
        max(t) = max(first);
    }
    return {mean, max};
}

}  // namespace detail

/// Index of the first row whose generated features need no back-fill.
inline Eigen::Index feature_warmup(const FeatureSpec& spec, int season_length) {
    Eigen::Index w = 0;
    for (int l : spec.lags) w = std::max<Eigen::Index>(w, l);
    for (int k : spec.seasonal_lags) w = std::max<Eigen::Index>(w, Eigen::Index{k} * season_length);
    for (int r : spec.rolling_windows) w = std::max<Eigen::Index>(w, r);
    for (int r : spec.seasonal_rolling_windows) w = std::max<Eigen::Index>(w, Eigen::Index{r} * season_length);
    for (int r : spec.weekday_rolling_windows) w = std::max<Eigen::Index>(w, Eigen::Index{r} * 7);
    return w;
}

inline TimeSeriesDataset add_features(const TimeSeriesDataset& ds, const FeatureSpec& spec) {
    validate_shape(ds);
    detail::check_positive(spec.lags, "lag");
    detail::check_positive(spec.seasonal_lags, "seasonal lag");
    detail::check_positive(spec.rolling_windows, "rolling window");
    detail::check_positive(spec.seasonal_rolling_windows, "seasonal rolling window");
    detail::check_positive(spec.weekday_rolling_windows, "weekday rolling window");
    const auto n = ds.rows();
    if (feature_warmup(spec, ds.season_length) >= n) {
        fail(ErrorKind::Spec, "largest lag/window must be shorter than the series (" + std::to_string(n) + " rows)");
    }
    if (ds.target_missing.any()) fail(ErrorKind::Input, "impute missing targets before adding features");

    const bool has_days = ds.frequency == Frequency::Daily || ds.frequency == Frequency::Weekly;
    const bool has_months = has_days || ds.frequency == Frequency::Monthly;
    const bool has_quarters = has_months || ds.frequency == Frequency::Quarterly;
    const auto& cal = spec.calendric;
    if ((cal.day_of_month || cal.weekday || cal.working_day) && !has_days) {
        fail(ErrorKind::Spec, "day-level calendric features need daily or weekly timestamps");
    }
    if (cal.month && !has_months) fail(ErrorKind::Spec, "month feature needs daily, weekly or monthly timestamps");
    if (cal.quarter && !has_quarters) fail(ErrorKind::Spec, "quarter feature needs calendar timestamps");
    if (!spec.weekday_rolling_windows.empty() && ds.frequency != Frequency::Daily) {
        fail(ErrorKind::Spec, "rolling weekday statistics are only defined for daily data");
    }

    const Eigen::VectorXd& y = ds.target;
    std::vector<detail::FeatureColumn> cols;

    auto shifted = [&](Eigen::Index offset) {
        Eigen::VectorXd v(n);
        for (Eigen::Index t = offset; t < n; ++t) v(t) = y(t - offset);
        for (Eigen::Index t = 0; t < offset; ++t) v(t) = y(0);
        return v;
    };
    for (int l : spec.lags) cols.push_back({"lag_" + std::to_string(l), shifted(l)});
    for (int k : spec.seasonal_lags) {
        cols.push_back({"seasonal_lag_" + std::to_string(k), shifted(Eigen::Index{k} * ds.season_length)});
    }
    auto push_stats = [&](const std::string& prefix, int w, Eigen::Index stride) {
        auto [mean, max] = detail::strided_mean_max(y, stride, w);
        cols.push_back({prefix + "mean_" + std::to_string(w), std::move(mean)});
        cols.push_back({prefix + "max_" + std::to_string(w), std::move(max)});
    };
    for (int w : spec.rolling_windows) push_stats("rolling_", w, 1);
    for (int w : spec.seasonal_rolling_windows) push_stats("seasonal_rolling_", w, ds.season_length);
    for (int w : spec.weekday_rolling_windows) push_stats("weekday_rolling_", w, 7);

    if (cal.count() > 0) {
        Eigen::VectorXd dom(n), wd(n), mon(n), qtr(n), work(n);
        for (Eigen::Index t = 0; t < n; ++t) {
            const auto d = calendar_date(ds.timestamps[static_cast<std::size_t>(t)], ds.frequency);
            dom(t) = d.day;
            wd(t) = d.weekday;
            mon(t) = d.month;
            qtr(t) = (d.month - 1) / 3 + 1;
            work(t) = (d.weekday >= 1 && d.weekday <= 5) ? 1.0 : 0.0;
        }
        if (cal.day_of_month) cols.push_back({"day_of_month", dom, true});
        if (cal.weekday) cols.push_back({"weekday", wd, true});
        if (cal.month) cols.push_back({"month", mon, true});
        if (cal.quarter) cols.push_back({"quarter", qtr, true});
        if (cal.working_day) cols.push_back({"working_day", work, true});
    }

    TimeSeriesDataset out = ds;
    const auto d0 = ds.dims();
    const auto extra = static_cast<Eigen::Index>(cols.size());
    out.covariates.conservativeResize(n, d0 + extra);
    out.covariate_missing.conservativeResize(n, d0 + extra);
    for (Eigen::Index j = 0; j < extra; ++j) {
        auto& c = cols[static_cast<std::size_t>(j)];
        out.covariates.col(d0 + j) = c.values;
        out.covariate_missing.col(d0 + j).setConstant(false);
        out.covariate_names.push_back(c.name);
        out.categorical.push_back(c.categorical);
    }
    return out;
}

/// Reads an optional [features] section:
///   lags = 1,2   seasonal_lags = 1   rolling_windows = 3
///   seasonal_rolling_windows = 2   weekday_rolling_windows = 4
///   calendric = month,quarter
inline FeatureSpec read_feature_spec(const ini::Document& doc, const std::string& origin) {
    FeatureSpec spec;
    const ini::Section* sec = doc.first("features");
    if (sec == nullptr) return spec;
    ini::Reader r(*sec, origin);
    auto ints = [&](std::string_view key, std::vector<int>& out) {
        if (auto v = r.integer_list(key)) {
            for (auto x : *v) out.push_back(static_cast<int>(x));
        }
    };
    ints("lags", spec.lags);
    ints("seasonal_lags", spec.seasonal_lags);
    ints("rolling_windows", spec.rolling_windows);
    ints("seasonal_rolling_windows", spec.seasonal_rolling_windows);
    ints("weekday_rolling_windows", spec.weekday_rolling_windows);
    if (auto cal = r.string_list("calendric")) {
        for (const auto& name : *cal) {
            if (name == "day_of_month") spec.calendric.day_of_month = true;
            else if (name == "weekday") spec.calendric.weekday = true;
            else if (name == "month") spec.calendric.month = true;
            else if (name == "quarter") spec.calendric.quarter = true;
            else if (name == "working_day") spec.calendric.working_day = true;
            else fail(ErrorKind::Parse, origin + ": unknown calendric feature '" + name + "'");
        }
    }
    r.finish();
    return spec;
}

}  // namespace evars
