#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "evars/error.hpp"
#include "evars/ini.hpp"

namespace evars {

/// Sampling frequency of a regular series. Timestamps are stored as integer
/// period indices whose meaning depends on the frequency:
///   Period    - bare integer index
///   Daily     - days since 1970-01-01 (spacing 1)
///   Weekly    - days since 1970-01-01 (spacing 7)
///   Monthly   - year * 12 + (month - 1)
///   Quarterly - year * 4 + (quarter - 1)
enum class Frequency { Period, Daily, Weekly, Monthly, Quarterly };

inline std::string_view to_string(Frequency f) {
    switch (f) {
        case Frequency::Period: return "period";
        case Frequency::Daily: return "daily";
        case Frequency::Weekly: return "weekly";
        case Frequency::Monthly: return "monthly";
        case Frequency::Quarterly: return "quarterly";
    }
    return "period";
}

inline Frequency parse_frequency(std::string_view s) {
    if (s == "period") return Frequency::Period;
    if (s == "daily") return Frequency::Daily;
    if (s == "weekly") return Frequency::Weekly;
    if (s == "monthly") return Frequency::Monthly;
    if (s == "quarterly") return Frequency::Quarterly;
    fail(ErrorKind::Config, "unknown frequency '" + std::string(s) + "'");
}

inline std::int64_t natural_spacing(Frequency f) { return f == Frequency::Weekly ? 7 : 1; }

/// Calendar date of a timestamp (day is 1 for monthly/quarterly data).
struct CalendarDate {
    int year = 1970;
    unsigned month = 1;
    unsigned day = 1;
    unsigned weekday = 0;  // 0 = Sunday
};

inline CalendarDate calendar_date(std::int64_t stamp, Frequency f) {
    using namespace std::chrono;
    switch (f) {
        case Frequency::Daily:
        case Frequency::Weekly: {
            const sys_days d{days{stamp}};
            const year_month_day ymd{d};
            return {int(ymd.year()), unsigned(ymd.month()), unsigned(ymd.day()), weekday{d}.c_encoding()};
        }
        case Frequency::Monthly: {
            const auto y = static_cast<int>(stamp >= 0 ? stamp / 12 : (stamp - 11) / 12);
            const auto m = static_cast<unsigned>(stamp - std::int64_t{y} * 12) + 1;
            const sys_days d{year{y} / month{m} / day{1}};
            return {y, m, 1, weekday{d}.c_encoding()};
        }
        case Frequency::Quarterly: {
            const auto y = static_cast<int>(stamp >= 0 ? stamp / 4 : (stamp - 3) / 4);
            const auto q = static_cast<unsigned>(stamp - std::int64_t{y} * 4);
            const sys_days d{year{y} / month{q * 3 + 1} / day{1}};
            return {y, q * 3 + 1, 1, weekday{d}.c_encoding()};
        }
        case Frequency::Period: break;
    }
    fail(ErrorKind::Spec, "calendar features need a calendar frequency");
}

inline std::string format_timestamp(std::int64_t stamp, Frequency f) {
    if (f == Frequency::Period) return std::to_string(stamp);
    const auto d = calendar_date(stamp, f);
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", d.year, d.month, d.day);
    return buf;
}

/// A regular multivariate series: covariate rows x_t, target y_t, aligned
/// timestamps. Missing cells carry an explicit flag; their numeric slot holds NaN.
struct TimeSeriesDataset {
    std::vector<std::int64_t> timestamps;
    Frequency frequency = Frequency::Period;
    Eigen::MatrixXd covariates;
    Eigen::VectorXd target;
    std::vector<std::string> covariate_names;
    std::string target_name = "y";
    int season_length = 2;
    /// Per covariate column: true for calendric (nominal) columns.
    std::vector<bool> categorical;
    Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> covariate_missing;
    Eigen::Array<bool, Eigen::Dynamic, 1> target_missing;

    [[nodiscard]] Eigen::Index rows() const { return target.size(); }
    [[nodiscard]] Eigen::Index dims() const { return covariates.cols(); }

    [[nodiscard]] std::size_t missing_count() const {
        return static_cast<std::size_t>(covariate_missing.count() + target_missing.count());
    }
};

/// Builds a dataset with cleared missing masks and numeric column flags.
inline TimeSeriesDataset make_dataset(std::vector<std::int64_t> timestamps, Eigen::MatrixXd covariates,
                                      Eigen::VectorXd target, int season_length,
                                      std::vector<std::string> names = {},
                                      Frequency frequency = Frequency::Period) {
    TimeSeriesDataset ds;
    const auto d = covariates.cols();
    if (names.empty()) {
        for (Eigen::Index j = 0; j < d; ++j) names.push_back("x" + std::to_string(j));
    }
    ds.timestamps = std::move(timestamps);
    ds.frequency = frequency;
    ds.covariates = std::move(covariates);
    ds.target = std::move(target);
    ds.covariate_names = std::move(names);
    ds.season_length = season_length;
    ds.categorical.assign(static_cast<std::size_t>(d), false);
    ds.covariate_missing.setConstant(ds.covariates.rows(), d, false);
    ds.target_missing.setConstant(ds.target.size(), false);
    return ds;
}

/// Row counts, column labels and masks agree.
inline void validate_shape(const TimeSeriesDataset& ds) {
    const auto n = ds.target.size();
    if (ds.covariates.rows() != n || static_cast<Eigen::Index>(ds.timestamps.size()) != n) {
        fail(ErrorKind::Shape, "covariate rows, target length and timestamp count differ");
    }
    if (static_cast<Eigen::Index>(ds.covariate_names.size()) != ds.dims() ||
        static_cast<Eigen::Index>(ds.categorical.size()) != ds.dims()) {
        fail(ErrorKind::Shape, "covariate label count does not match column count");
    }
    if (ds.covariate_missing.rows() != n || ds.covariate_missing.cols() != ds.dims() ||
        ds.target_missing.size() != n) {
        fail(ErrorKind::Shape, "missing-value mask has the wrong shape");
    }
}

/// Full invariants for a series used online: shape, strictly increasing and
/// equally spaced timestamps, season length in [2, n), every cell finite.
inline void validate_series(const TimeSeriesDataset& ds) {
    validate_shape(ds);
    const auto n = ds.rows();
    if (ds.season_length < 2 || ds.season_length >= n) {
        fail(ErrorKind::Spec, "season length must satisfy 2 <= n_seas < n");
    }
    for (std::size_t i = 1; i < ds.timestamps.size(); ++i) {
        if (ds.timestamps[i] <= ds.timestamps[i - 1]) fail(ErrorKind::Ordering, "timestamps not strictly increasing");
        if (ds.timestamps[i] - ds.timestamps[i - 1] != ds.timestamps[1] - ds.timestamps[0]) {
            fail(ErrorKind::Ordering, "timestamps not equally spaced");
        }
    }
    if (!ds.covariates.allFinite() || !ds.target.allFinite()) fail(ErrorKind::Input, "non-finite cell in dataset");
}

inline TimeSeriesDataset select_rows(const TimeSeriesDataset& ds, std::span<const Eigen::Index> rows) {
    TimeSeriesDataset out = ds;
    const auto m = static_cast<Eigen::Index>(rows.size());
    out.timestamps.resize(rows.size());
    out.covariates.resize(m, ds.dims());
    out.target.resize(m);
    out.covariate_missing.resize(m, ds.dims());
    out.target_missing.resize(m);
    for (Eigen::Index i = 0; i < m; ++i) {
        const auto r = rows[static_cast<std::size_t>(i)];
        out.timestamps[static_cast<std::size_t>(i)] = ds.timestamps[static_cast<std::size_t>(r)];
        out.covariates.row(i) = ds.covariates.row(r);
        out.target(i) = ds.target(r);
        out.covariate_missing.row(i) = ds.covariate_missing.row(r);
        out.target_missing(i) = ds.target_missing(r);
    }
    return out;
}

/// Rows [begin, end).
inline TimeSeriesDataset slice(const TimeSeriesDataset& ds, Eigen::Index begin, Eigen::Index end) {
    if (begin < 0 || end > ds.rows() || begin > end) fail(ErrorKind::Shape, "slice out of range");
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(end - begin));
    std::iota(idx.begin(), idx.end(), begin);
    return select_rows(ds, idx);
}

inline TimeSeriesDataset tail(const TimeSeriesDataset& ds, Eigen::Index count) {
    const auto n = ds.rows();
    return slice(ds, std::max<Eigen::Index>(0, n - count), n);
}

inline void require_same_columns(const TimeSeriesDataset& a, const TimeSeriesDataset& b) {
    if (a.dims() != b.dims() || a.covariate_names != b.covariate_names) {
        fail(ErrorKind::Schema, "datasets have different covariate columns");
    }
}

inline TimeSeriesDataset concat(const TimeSeriesDataset& a, const TimeSeriesDataset& b) {
    require_same_columns(a, b);
    TimeSeriesDataset out = a;
    const auto n = a.rows() + b.rows();
    out.timestamps.insert(out.timestamps.end(), b.timestamps.begin(), b.timestamps.end());
    out.covariates.resize(n, a.dims());
    out.covariates << a.covariates, b.covariates;
    out.target.resize(n);
    out.target << a.target, b.target;
    out.covariate_missing.resize(n, a.dims());
    out.covariate_missing << a.covariate_missing, b.covariate_missing;
    out.target_missing.resize(n);
    out.target_missing << a.target_missing, b.target_missing;
    return out;
}

inline void append_row(TimeSeriesDataset& ds, std::int64_t stamp, const Eigen::Ref<const Eigen::VectorXd>& x,
                       double y) {
    if (x.size() != ds.dims()) fail(ErrorKind::Shape, "row has wrong covariate count");
    const auto n = ds.rows();
    ds.timestamps.push_back(stamp);
    ds.covariates.conservativeResize(n + 1, Eigen::NoChange);
    ds.covariates.row(n) = x.transpose();
    ds.target.conservativeResize(n + 1);
    ds.target(n) = y;
    ds.covariate_missing.conservativeResize(n + 1, Eigen::NoChange);
    ds.covariate_missing.row(n).setConstant(false);
    ds.target_missing.conservativeResize(n + 1);
    ds.target_missing(n) = false;
}

/// Stable sort by timestamp; rows with equal stamps keep their relative order.
inline TimeSeriesDataset sort_by_timestamp(const TimeSeriesDataset& ds) {
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(ds.rows()));
    std::iota(idx.begin(), idx.end(), Eigen::Index{0});
    std::stable_sort(idx.begin(), idx.end(), [&](Eigen::Index a, Eigen::Index b) {
        return ds.timestamps[static_cast<std::size_t>(a)] < ds.timestamps[static_cast<std::size_t>(b)];
    });
    return select_rows(ds, idx);
}

/// Writes timestamp, covariates, target; missing cells are left empty.
/// Doubles are printed with 17 significant digits so files re-read exactly.
inline void write_csv(std::ostream& out, const TimeSeriesDataset& ds, std::string_view timestamp_name = "timestamp") {
    out << timestamp_name;
    for (const auto& n : ds.covariate_names) out << ',' << n;
    out << ',' << ds.target_name << '\n';
    for (Eigen::Index i = 0; i < ds.rows(); ++i) {
        out << format_timestamp(ds.timestamps[static_cast<std::size_t>(i)], ds.frequency);
        for (Eigen::Index j = 0; j < ds.dims(); ++j) {
            out << ',';
            if (!ds.covariate_missing(i, j)) out << ini::format_real(ds.covariates(i, j));
        }
        out << ',';
        if (!ds.target_missing(i)) out << ini::format_real(ds.target(i));
        out << '\n';
    }
}

/// Content hash over timestamps, covariates and targets (bit patterns).
inline std::uint64_t dataset_hash(const TimeSeriesDataset& ds) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto feed = [&h](const void* p, std::size_t bytes) {
        const auto* c = static_cast<const unsigned char*>(p);
        for (std::size_t i = 0; i < bytes; ++i) {
            h ^= c[i];
            h *= 0x100000001b3ULL;
        }
    };
    feed(ds.timestamps.data(), ds.timestamps.size() * sizeof(std::int64_t));
    for (Eigen::Index i = 0; i < ds.rows(); ++i) {
        for (Eigen::Index j = 0; j < ds.dims(); ++j) {
            const double v = ds.covariates(i, j);
            feed(&v, sizeof v);
        }
        const double y = ds.target(i);
        feed(&y, sizeof y);
    }
    return h;
}

}  // namespace evars
