#pragma once

#include "evars/features.hpp"
#include "evars/timeseries.hpp"

namespace evars {

/// A real dataset after loading, mean imputation, feature expansion and the
/// offline/online split.
struct PreparedDataset {
    DatasetManifest manifest;
    FeatureSpec features;
    TimeSeriesDataset full;
    TimeSeriesDataset offline;
    TimeSeriesDataset online;
};

inline PreparedDataset prepare_manifest(const std::string& manifest_path) {
    const auto doc = ini::parse_file(manifest_path);
    PreparedDataset p;
    p.manifest = read_manifest(doc, manifest_path, std::filesystem::path(manifest_path).parent_path());
    p.features = read_feature_spec(doc, manifest_path);
    CsvOptions opt;
    opt.target_column = p.manifest.target_column;
    opt.timestamp_column = p.manifest.timestamp_column;
    opt.frequency = p.manifest.frequency;
    opt.season_length = p.manifest.season_length;
    p.full = add_features(impute_mean(load_csv(p.manifest.path, opt)), p.features);
    std::tie(p.offline, p.online) = split_offline_online(p.full, p.manifest.offline_fraction);
    return p;
}

}  // namespace evars
