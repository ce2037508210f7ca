#pragma once

// Ingestion, imputation and offline/online splitting of regular series.

#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <utility>

#include "evars/dataset.hpp"
#include "evars/ini.hpp"

namespace evars {

struct CsvOptions {
    std::string target_column;
    std::string timestamp_column;
    Frequency frequency = Frequency::Period;
    int season_length = 2;
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cell += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                cell += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            cells.push_back(ini::trim(cell));
            cell.clear();
        } else if (c != '\r') {
            cell += c;
        }
    }
    cells.push_back(ini::trim(cell));
    return cells;
}

inline bool is_missing_token(const std::string& s) {
    return s.empty() || s == "NA" || s == "NaN" || s == "nan" || s == "null";
}

inline std::optional<std::int64_t> parse_int(const std::string& s) {
    std::int64_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
    return v;
}

/// Integer period, YYYY-MM-DD, YYYY-MM or YYYY-Qn, mapped onto the frequency's index.
inline std::optional<std::int64_t> parse_timestamp(const std::string& s, Frequency f) {
    if (auto v = parse_int(s)) return v;
    int y = 0;
    unsigned m = 1;
    unsigned d = 1;
    unsigned q = 0;
    char tail = 0;
    if (std::sscanf(s.c_str(), "%d-Q%u%c", &y, &q, &tail) == 2 && q >= 1 && q <= 4) {
        m = (q - 1) * 3 + 1;
    } else if (std::sscanf(s.c_str(), "%d-%u-%u%c", &y, &m, &d, &tail) == 3) {
    } else if (std::sscanf(s.c_str(), "%d-%u%c", &y, &m, &tail) == 2) {
        d = 1;
    } else {
        return std::nullopt;
    }
    using namespace std::chrono;
    const year_month_day ymd{year{y}, month{m}, day{d}};
    if (!ymd.ok()) return std::nullopt;
    switch (f) {
        case Frequency::Daily:
        case Frequency::Weekly: return sys_days{ymd}.time_since_epoch().count();
        case Frequency::Monthly: return std::int64_t{y} * 12 + (m - 1);
        case Frequency::Quarterly: return std::int64_t{y} * 4 + (m - 1) / 3;
        case Frequency::Period: return std::nullopt;
    }
    return std::nullopt;
}

}  // namespace detail

/// Reads a header-led CSV. Rows come back in timestamp order; empty cells are
/// flagged missing. Remaining columns (other than the timestamp and target)
/// become covariates in file order.
inline TimeSeriesDataset load_csv(std::istream& in, const CsvOptions& opt, const std::string& origin = "<csv>") {
    std::string line;
    if (!std::getline(in, line)) fail(ErrorKind::Schema, origin + ": missing header row");
    if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF) line.erase(0, 3);  // UTF-8 BOM
    const auto header = detail::split_csv_line(line);

    std::optional<std::size_t> ts_col;
    std::optional<std::size_t> y_col;
    std::vector<std::size_t> x_cols;
    for (std::size_t c = 0; c < header.size(); ++c) {
        if (header[c] == opt.timestamp_column) {
            ts_col = c;
        } else if (header[c] == opt.target_column) {
            y_col = c;
        }
    }
    if (!ts_col) fail(ErrorKind::Schema, origin + ": timestamp column '" + opt.timestamp_column + "' not found");
    if (!y_col) fail(ErrorKind::Schema, origin + ": target column '" + opt.target_column + "' not found");
    std::vector<std::string> names;
    for (std::size_t c = 0; c < header.size(); ++c) {
        if (c != *ts_col && c != *y_col) {
            x_cols.push_back(c);
            names.push_back(header[c]);
        }
    }

    std::vector<std::int64_t> stamps;
    std::vector<std::vector<double>> xs;
    std::vector<double> ys;
    int row_no = 1;
    while (std::getline(in, line)) {
        ++row_no;
        if (ini::trim(line).empty()) continue;
        const auto cells = detail::split_csv_line(line);
        if (cells.size() != header.size()) {
            fail(ErrorKind::Parse, origin + ": row " + std::to_string(row_no) + ": expected " +
                                       std::to_string(header.size()) + " cells, got " + std::to_string(cells.size()));
        }
        auto stamp = detail::parse_timestamp(cells[*ts_col], opt.frequency);
        if (!stamp) {
            fail(ErrorKind::Parse, origin + ": row " + std::to_string(row_no) + ", column '" + opt.timestamp_column +
                                       "': bad timestamp '" + cells[*ts_col] + "'");
        }
        auto number = [&](std::size_t c) {
            if (detail::is_missing_token(cells[c])) return std::numeric_limits<double>::quiet_NaN();
            try {
                std::size_t pos = 0;
                const double v = std::stod(cells[c], &pos);
                if (pos == cells[c].size() && std::isfinite(v)) return v;
            } catch (const std::exception&) {
            }
            fail(ErrorKind::Parse, origin + ": row " + std::to_string(row_no) + ", column '" + header[c] +
                                       "': not numeric: '" + cells[c] + "'");
        };
        stamps.push_back(*stamp);
        std::vector<double> row;
        for (auto c : x_cols) row.push_back(number(c));
        xs.push_back(std::move(row));
        ys.push_back(number(*y_col));
    }

    const auto n = static_cast<Eigen::Index>(ys.size());
    const auto d = static_cast<Eigen::Index>(x_cols.size());
    Eigen::MatrixXd x(n, d);
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < d; ++j) x(i, j) = xs[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
        y(i) = ys[static_cast<std::size_t>(i)];
    }
    auto ds = make_dataset(std::move(stamps), std::move(x), std::move(y), opt.season_length, std::move(names),
                           opt.frequency);
    ds.target_name = opt.target_column;
    ds.covariate_missing = ds.covariates.array().isNaN();
    ds.target_missing = ds.target.array().isNaN();
    ds = sort_by_timestamp(ds);

    for (std::size_t i = 1; i < ds.timestamps.size(); ++i) {
        if (ds.timestamps[i] == ds.timestamps[i - 1]) {
            fail(ErrorKind::Ordering, origin + ": duplicate timestamp '" +
                                          format_timestamp(ds.timestamps[i], ds.frequency) + "'");
        }
        if (ds.timestamps[i] - ds.timestamps[i - 1] != ds.timestamps[1] - ds.timestamps[0]) {
            fail(ErrorKind::Ordering, origin + ": timestamps are not equally spaced near '" +
                                          format_timestamp(ds.timestamps[i], ds.frequency) + "'");
        }
    }
    return ds;
}

inline TimeSeriesDataset load_csv(const std::string& path, const CsvOptions& opt) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::Io, "cannot open '" + path + "'");
    return load_csv(in, opt, path);
}

/// Replaces every missing cell by the mean of the non-missing cells of its column.
inline TimeSeriesDataset impute_mean(const TimeSeriesDataset& ds) {
    validate_shape(ds);
    TimeSeriesDataset out = ds;
    auto fill = [&](auto col, auto mask, const std::string& name) {
        double sum = 0.0;
        Eigen::Index count = 0;
        for (Eigen::Index i = 0; i < col.size(); ++i) {
            if (!mask(i)) {
                sum += col(i);
                ++count;
            }
        }
        if (count == 0) fail(ErrorKind::Imputation, "column '" + name + "' has no observed values");
        const double mean = sum / static_cast<double>(count);
        for (Eigen::Index i = 0; i < col.size(); ++i) {
            if (mask(i)) col(i) = mean;
        }
    };
    for (Eigen::Index j = 0; j < out.dims(); ++j) {
        fill(out.covariates.col(j), out.covariate_missing.col(j), out.covariate_names[static_cast<std::size_t>(j)]);
    }
    fill(Eigen::Ref<Eigen::VectorXd>(out.target), out.target_missing, out.target_name);
    out.covariate_missing.setConstant(false);
    out.target_missing.setConstant(false);
    return out;
}

/// First floor(fraction * n) rows offline, the rest online, in order.
inline std::pair<TimeSeriesDataset, TimeSeriesDataset> split_offline_online(const TimeSeriesDataset& ds,
                                                                            double offline_fraction) {
    if (!(offline_fraction > 0.0 && offline_fraction < 1.0)) {
        fail(ErrorKind::Split, "offline fraction must lie in (0, 1)");
    }
    const auto n = ds.rows();
    const auto n_off = static_cast<Eigen::Index>(std::floor(offline_fraction * static_cast<double>(n)));
    if (n_off == 0 || n_off == n) fail(ErrorKind::Split, "split leaves an empty part");
    if (n_off < 2 * ds.season_length) {
        fail(ErrorKind::Split, "offline part has " + std::to_string(n_off) + " rows, fewer than two seasons (" +
                                   std::to_string(2 * ds.season_length) + ")");
    }
    return {slice(ds, 0, n_off), slice(ds, n_off, n)};
}

/// Key-value description of a dataset on disk ([dataset] section).
struct DatasetManifest {
    std::string name;
    std::string path;
    std::string target_column;
    std::string timestamp_column;
    Frequency frequency = Frequency::Period;
    int season_length = 2;
    double offline_fraction = 0.8;
};

inline DatasetManifest read_manifest(const ini::Document& doc, const std::string& origin,
                                     const std::filesystem::path& base_dir = {}) {
    const ini::Section* sec = doc.first("dataset");
    if (sec == nullptr) fail(ErrorKind::Parse, origin + ": missing [dataset] section");
    ini::Reader r(*sec, origin);
    DatasetManifest m;
    auto required = [&](std::string_view key) {
        auto v = r.string(key);
        if (!v) fail(ErrorKind::Parse, origin + ": [dataset] requires '" + std::string(key) + "'");
        return *v;
    };
    m.path = required("path");
    m.target_column = required("target_column");
    m.timestamp_column = required("timestamp_column");
    m.frequency = parse_frequency(r.string("frequency").value_or("period"));
    r.set_if("season_length", m.season_length);
    r.set_if("offline_fraction", m.offline_fraction);
    m.name = r.string("name").value_or(std::filesystem::path(m.path).stem().string());
    r.finish();
    if (!base_dir.empty() && std::filesystem::path(m.path).is_relative()) {
        m.path = (base_dir / m.path).lexically_normal().string();
    }
    return m;
}

inline DatasetManifest read_manifest_file(const std::string& path) {
    return read_manifest(ini::parse_file(path), path, std::filesystem::path(path).parent_path());
}

}  // namespace evars
