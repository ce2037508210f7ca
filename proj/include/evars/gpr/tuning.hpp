#pragma once

// Random-search model selection for the offline base model, and the
// parameter-only refit used by online methods.

#include <array>
#include <limits>
#include <numeric>
#include <string>

#include "evars/dataset.hpp"
#include "evars/gpr/model.hpp"
#include "evars/random.hpp"

namespace evars::gpr {

/// Kernel structures sampled by the random search.
enum class Structure { SE, Periodic, Linear, SEPlusPeriodic, SETimesPeriodic, SEPlusLinear };

inline constexpr std::array<Structure, 6> kStructures = {Structure::SE,
                                                         Structure::Periodic,
                                                         Structure::Linear,
                                                         Structure::SEPlusPeriodic,
                                                         Structure::SETimesPeriodic,
                                                         Structure::SEPlusLinear};

struct ModelConfig {
    KernelSpec kernel;
    double mean_constant = 0.0;
    PreprocessOptions preprocess;

    [[nodiscard]] std::string describe() const {
        return kernel.kernel.describe() + (preprocess.pca ? " +pca" : "");
    }
};

/// Samples one configuration. Inputs and targets are standardized inside the
/// model, so all ranges are in standardized units.
inline ModelConfig sample_config(Rng& rng, Eigen::Index input_dims) {
    std::uniform_int_distribution<std::size_t> pick(0, kStructures.size() - 1);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    auto se = [&] { return Kernel::squared_exponential(log_uniform(rng, 0.1, 10.0), log_uniform(rng, 0.1, 20.0)); };
    auto per = [&] {
        return Kernel::periodic(log_uniform(rng, 0.1, 10.0), log_uniform(rng, 0.1, 10.0), log_uniform(rng, 0.5, 20.0));
    };
    auto lin = [&] { return Kernel::linear(log_uniform(rng, 0.01, 10.0), log_uniform(rng, 0.01, 1.0)); };

    ModelConfig c;
    switch (kStructures[pick(rng)]) {
        case Structure::SE: c.kernel.kernel = se(); break;
        case Structure::Periodic: c.kernel.kernel = per(); break;
        case Structure::Linear: c.kernel.kernel = lin(); break;
        case Structure::SEPlusPeriodic: c.kernel.kernel = se() + per(); break;
        case Structure::SETimesPeriodic: c.kernel.kernel = se() * per(); break;
        case Structure::SEPlusLinear: c.kernel.kernel = se() + lin(); break;
    }
    c.kernel.noise = log_uniform(rng, 1e-4, 0.3);
    c.mean_constant = unit(rng) < 0.5 ? 0.0 : 2.0 * unit(rng) - 1.0;
    c.preprocess.standardize_inputs = true;
    c.preprocess.standardize_target = true;
    c.preprocess.pca = input_dims >= 2 && unit(rng) < 0.5;
    return c;
}

inline GprModel fit_config(const Eigen::Ref<const Eigen::MatrixXd>& x, const Eigen::Ref<const Eigen::VectorXd>& y,
                           const ModelConfig& c) {
    return GprModel::fit(x, y, c.kernel, c.mean_constant, Preprocessing::fit_inputs(x, c.preprocess));
}

inline double rmse_of(const GprModel& model, const Eigen::Ref<const Eigen::MatrixXd>& x,
                      const Eigen::Ref<const Eigen::VectorXd>& y) {
    double sse = 0.0;
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        const double r = y(i) - model.predict(x.row(i).transpose()).mean;
        sse += r * r;
    }
    return std::sqrt(sse / static_cast<double>(x.rows()));
}

/// Expanding-window folds: the data is cut into folds + 1 contiguous
/// segments; fold i trains on segments [0, i] and validates on segment i + 1
/// (the last segment absorbs the remainder).
struct Fold {
    Eigen::Index train_end;
    Eigen::Index valid_end;
};

inline std::vector<Fold> rolling_origin_folds(Eigen::Index n, int folds) {
    if (folds < 1) fail(ErrorKind::Config, "need at least one fold");
    const Eigen::Index seg = n / (folds + 1);
    if (seg < 2) {
        fail(ErrorKind::Tuning, "too few rows (" + std::to_string(n) + ") for " + std::to_string(folds) + " folds");
    }
    std::vector<Fold> out;
    for (int i = 0; i < folds; ++i) {
        const Eigen::Index train_end = seg * (i + 1);
        const Eigen::Index valid_end = i + 1 == folds ? n : seg * (i + 2);
        out.push_back({train_end, valid_end});
    }
    return out;
}

/// Mean validation RMSE over rolling-origin folds; +inf when a fold fails to fit.
inline double cross_validate(const TimeSeriesDataset& data, const ModelConfig& config, int folds) {
    double total = 0.0;
    const auto plan = rolling_origin_folds(data.rows(), folds);
    for (const auto& f : plan) {
        try {
            const auto model = fit_config(data.covariates.topRows(f.train_end), data.target.head(f.train_end), config);
            const auto len = f.valid_end - f.train_end;
            total += rmse_of(model, data.covariates.middleRows(f.train_end, len), data.target.segment(f.train_end, len));
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::Conditioning) throw;
            return std::numeric_limits<double>::infinity();
        }
    }
    return total / static_cast<double>(plan.size());
}

struct TuningResult {
    GprModel model;
    ModelConfig config;
    double cv_rmse = 0.0;
    std::vector<double> candidate_scores;
};

/// Random search over `budget` sampled configurations; the one with the lowest
/// mean rolling-origin CV RMSE is refit on all offline rows. Ties keep the
/// lower candidate index.
inline TuningResult tune_base_model(const TimeSeriesDataset& offline, int budget, int folds, std::uint64_t seed) {
    if (budget < 1) fail(ErrorKind::Config, "tuning budget must be >= 1");
    validate_shape(offline);
    rolling_origin_folds(offline.rows(), folds);
    Rng rng = make_rng(seed, "gpr.tune");
    std::vector<ModelConfig> candidates;
    std::vector<double> scores;
    for (int i = 0; i < budget; ++i) {
        candidates.push_back(sample_config(rng, offline.dims()));
        scores.push_back(cross_validate(offline, candidates.back(), folds));
    }
    // Best finite candidates first; a candidate that cannot be fit on all rows
    // falls through to the next best.
    std::vector<std::size_t> order(candidates.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
    for (auto idx : order) {
        if (!std::isfinite(scores[idx])) break;
        try {
            auto model = fit_config(offline.covariates, offline.target, candidates[idx]);
            return {std::move(model), candidates[idx], scores[idx], scores};
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::Conditioning) throw;
        }
    }
    fail(ErrorKind::Tuning, "every sampled configuration failed to fit");
}

/// Refit keeping the structure and input preprocessing of `base`: candidate 0
/// reuses the base parameters, the others perturb each parameter by a
/// log-uniform factor in [1/2, 2]. The candidate with the highest marginal
/// likelihood on the new data wins.
inline GprModel refit_model(const GprModel& base, const Eigen::Ref<const Eigen::MatrixXd>& x,
                            const Eigen::Ref<const Eigen::VectorXd>& y, int budget, std::uint64_t seed) {
    if (x.rows() < 2) fail(ErrorKind::Input, "refit needs at least two rows");
    if (budget < 1) budget = 1;
    const Preprocessing& pre = base.preprocessing();
    const Eigen::MatrixXd z = pre.transform(x);
    const PairwiseGeometry geometry(z, z);
    const auto base_params = base.kernel_spec().kernel.parameters();
    Rng rng = make_rng(seed, "gpr.refit");
    std::uniform_real_distribution<double> factor(std::log(0.5), std::log(2.0));

    std::optional<GprModel> best;
    double best_lml = -std::numeric_limits<double>::infinity();
    for (int c = 0; c < budget; ++c) {
        KernelSpec spec = base.kernel_spec();
        if (c > 0) {
            auto params = base_params;
            for (auto& p : params) p *= std::exp(factor(rng));
            spec.kernel.set_parameters(params);
            spec.noise = base.kernel_spec().noise * std::exp(factor(rng));
        }
        try {
            auto m = GprModel::fit_transformed(z, geometry, y, spec, base.mean_constant(), pre);
            const double lml = m.log_marginal_likelihood();
            if (!best || lml > best_lml) {
                best_lml = lml;
                best = std::move(m);
            }
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::Conditioning) throw;
        }
    }
    if (!best) fail(ErrorKind::Conditioning, "no refit candidate could be factorized");
    return std::move(*best);
}

inline GprModel refit_model(const GprModel& base, const TimeSeriesDataset& data, int budget, std::uint64_t seed) {
    return refit_model(base, data.covariates, data.target, budget, seed);
}

}  // namespace evars::gpr
