#pragma once

// Self-describing JSON snapshot of a fitted model: kernel tree, parameters,
// preprocessing statistics and a reference (row count + content hash) to the
// training data. Doubles are written in shortest round-trip form, so
// parameters read back bit-identically.

#include <json.hpp>

#include "evars/gpr/model.hpp"

namespace evars::gpr {

using nlohmann::json;

inline std::string_view kind_name(KernelKind k) {
    switch (k) {
        case KernelKind::SquaredExponential: return "squared_exponential";
        case KernelKind::Periodic: return "periodic";
        case KernelKind::Linear: return "linear";
        case KernelKind::Constant: return "constant";
        case KernelKind::Sum: return "sum";
        case KernelKind::Product: return "product";
    }
    return "?";
}

inline KernelKind kind_from_name(const std::string& s) {
    for (auto k : {KernelKind::SquaredExponential, KernelKind::Periodic, KernelKind::Linear, KernelKind::Constant,
                   KernelKind::Sum, KernelKind::Product}) {
        if (kind_name(k) == s) return k;
    }
    fail(ErrorKind::Parse, "unknown kernel kind '" + s + "'");
}

inline json kernel_to_json(const Kernel& k) {
    json j;
    j["kind"] = kind_name(k.kind());
    if (k.is_leaf()) {
        j["parameters"] = k.leaf_parameters();
    } else {
        j["children"] = json::array({kernel_to_json(k.children()[0]), kernel_to_json(k.children()[1])});
    }
    return j;
}

inline Kernel kernel_from_json(const json& j) {
    const auto kind = kind_from_name(j.at("kind").get<std::string>());
    std::vector<double> params;
    std::vector<Kernel> children;
    if (j.contains("parameters")) params = j.at("parameters").get<std::vector<double>>();
    if (j.contains("children")) {
        for (const auto& c : j.at("children")) children.push_back(kernel_from_json(c));
    }
    return Kernel::from_parts(kind, std::move(params), std::move(children));
}

inline json vector_to_json(const Eigen::Ref<const Eigen::RowVectorXd>& v) {
    return std::vector<double>(v.data(), v.data() + v.size());
}

inline Eigen::RowVectorXd row_from_json(const json& j) {
    const auto v = j.get<std::vector<double>>();
    return Eigen::Map<const Eigen::RowVectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

struct TrainingReference {
    Eigen::Index rows = 0;
    std::uint64_t hash = 0;
    std::string dataset_id;
};

inline json snapshot(const GprModel& model, const TrainingReference& ref) {
    const auto& pre = model.preprocessing();
    json p;
    p["standardize_inputs"] = pre.options.standardize_inputs;
    p["pca"] = pre.options.pca;
    p["pca_variance"] = pre.options.pca_variance;
    p["standardize_target"] = pre.options.standardize_target;
    p["x_mean"] = vector_to_json(pre.x_mean);
    p["x_scale"] = vector_to_json(pre.x_scale);
    p["projection_rows"] = pre.projection.rows();
    p["projection_cols"] = pre.projection.cols();
    p["projection"] = std::vector<double>(pre.projection.data(), pre.projection.data() + pre.projection.size());
    p["y_mean"] = pre.y_mean;
    p["y_scale"] = pre.y_scale;

    json j;
    j["format"] = "evars-gpr-snapshot/1";
    j["kernel"] = kernel_to_json(model.kernel_spec().kernel);
    j["kernel_description"] = model.kernel_spec().kernel.describe();
    j["noise"] = model.kernel_spec().noise;
    j["mean_constant"] = model.mean_constant();
    j["jitter"] = model.jitter();
    j["preprocessing"] = p;
    j["training"] = {{"rows", ref.rows}, {"hash", ref.hash}, {"dataset_id", ref.dataset_id}};
    return j;
}

struct SnapshotContents {
    KernelSpec kernel;
    double mean_constant = 0.0;
    Preprocessing preprocessing;
    TrainingReference training;
};

inline SnapshotContents read_snapshot(const json& j) {
    if (j.value("format", "") != "evars-gpr-snapshot/1") fail(ErrorKind::Parse, "not a model snapshot");
    SnapshotContents s;
    s.kernel.kernel = kernel_from_json(j.at("kernel"));
    s.kernel.noise = j.at("noise").get<double>();
    s.mean_constant = j.at("mean_constant").get<double>();
    const auto& p = j.at("preprocessing");
    auto& pre = s.preprocessing;
    pre.options.standardize_inputs = p.at("standardize_inputs").get<bool>();
    pre.options.pca = p.at("pca").get<bool>();
    pre.options.pca_variance = p.at("pca_variance").get<double>();
    pre.options.standardize_target = p.at("standardize_target").get<bool>();
    pre.x_mean = row_from_json(p.at("x_mean"));
    pre.x_scale = row_from_json(p.at("x_scale"));
    const auto pr = p.at("projection_rows").get<Eigen::Index>();
    const auto pc = p.at("projection_cols").get<Eigen::Index>();
    const auto proj = p.at("projection").get<std::vector<double>>();
    pre.projection = Eigen::Map<const Eigen::MatrixXd>(proj.data(), pr, pc);
    pre.y_mean = p.at("y_mean").get<double>();
    pre.y_scale = p.at("y_scale").get<double>();
    const auto& t = j.at("training");
    s.training.rows = t.at("rows").get<Eigen::Index>();
    s.training.hash = t.at("hash").get<std::uint64_t>();
    s.training.dataset_id = t.at("dataset_id").get<std::string>();
    return s;
}

/// Rebuilds the model from a snapshot and the training data it references.
inline GprModel restore(const json& j, const TimeSeriesDataset& training) {
    const auto s = read_snapshot(j);
    if (training.rows() != s.training.rows || dataset_hash(training) != s.training.hash) {
        fail(ErrorKind::Schema, "training data does not match the snapshot reference");
    }
    return GprModel::fit(training.covariates, training.target, s.kernel, s.mean_constant, s.preprocessing);
}

}  // namespace evars::gpr
