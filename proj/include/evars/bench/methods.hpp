#pragma once

#include <array>
#include <chrono>
#include <ctime>
#include <string>
#include <vector>

#include "evars/online/runner.hpp"

namespace evars::bench {

inline double rmse(const Eigen::Ref<const Eigen::VectorXd>& y_true, const Eigen::Ref<const Eigen::VectorXd>& y_pred) {
    if (y_true.size() != y_pred.size()) fail(ErrorKind::Shape, "rmse inputs differ in length");
    if (y_true.size() == 0) fail(ErrorKind::Shape, "rmse of empty vectors");
    double sse = 0.0;
    for (Eigen::Index i = 0; i < y_true.size(); ++i) sse += (y_true(i) - y_pred(i)) * (y_true(i) - y_pred(i));
    return std::sqrt(sse / static_cast<double>(y_true.size()));
}

enum class Method { MBase, PR1, PR2, MWGPR, CpdScaled, CpdRetrain, CpdMW, Evars };

inline constexpr std::array<Method, 8> kAllMethods = {Method::MBase,     Method::PR1,        Method::PR2,
                                                      Method::MWGPR,     Method::CpdScaled,  Method::CpdRetrain,
                                                      Method::CpdMW,     Method::Evars};

inline std::string_view to_string(Method m) {
    switch (m) {
        case Method::MBase: return "m_base";
        case Method::PR1: return "pr1";
        case Method::PR2: return "pr2";
        case Method::MWGPR: return "mwgpr";
        case Method::CpdScaled: return "cpd_scaled";
        case Method::CpdRetrain: return "cpd_retrain";
        case Method::CpdMW: return "cpd_mw";
        case Method::Evars: return "evars";
    }
    return "?";
}

inline Method parse_method(std::string_view s) {
    for (auto m : kAllMethods) {
        if (to_string(m) == s) return m;
    }
    std::string valid;
    for (auto m : kAllMethods) valid += (valid.empty() ? "" : ", ") + std::string(to_string(m));
    fail(ErrorKind::Config, "unknown method '" + std::string(s) + "' (valid: " + valid + ")");
}

struct MethodResult {
    Method method = Method::MBase;
    Eigen::VectorXd predictions;
    Eigen::VectorXd variances;
    std::vector<Event> events;
    int refits = 0;
    int detections = 0;
    double cpu_seconds = 0.0;
    double wall_seconds = 0.0;
};

namespace detail {

/// Refit every `period` steps on the history so far; a positive `window`
/// restricts each refit to the most recent rows.
inline MethodResult periodic_refits(const gpr::GprModel& base, const TimeSeriesDataset& offline,
                                    const TimeSeriesDataset& online, const EvarsConfig& config, std::uint64_t seed,
                                    int period, Eigen::Index window) {
    MethodResult r;
    r.predictions.resize(online.rows());
    r.variances.resize(online.rows());
    gpr::GprModel current = base;
    TimeSeriesDataset history = offline;
    for (Eigen::Index i = 0; i < online.rows(); ++i) {
        const auto p = current.predict(online.covariates.row(i).transpose());
        r.predictions(i) = p.mean;
        r.variances(i) = p.variance;
        append_row(history, online.timestamps[static_cast<std::size_t>(i)], online.covariates.row(i).transpose(),
                   online.target(i));
        if ((i + 1) % period != 0) continue;
        const auto s = sub_seed(seed, "bench.periodic", static_cast<std::uint64_t>(i));
        try {
            current = gpr::refit_model(base, window > 0 ? tail(history, window) : history, config.refit_budget, s);
            ++r.refits;
        } catch (const Error& e) {
            Event ev;
            ev.step = static_cast<long>(i);
            ev.type = "skip";
            ev.reason = std::string("refit failed: ") + e.what();
            r.events.push_back(ev);
        }
    }
    return r;
}

}  // namespace detail

/// Runs one forecasting method over the online rows. CPU and wall time cover
/// the online loop only.
inline MethodResult run_method(Method method, const gpr::GprModel& base, const TimeSeriesDataset& offline,
                               const TimeSeriesDataset& online, const EvarsConfig& config, std::uint64_t seed) {
    const auto wall0 = std::chrono::steady_clock::now();
    const std::clock_t cpu0 = std::clock();
    MethodResult r;
    auto gated = [&](EventAction action) {
        auto o = run_online(base, offline, online, config, seed, action);
        MethodResult m;
        m.predictions.resize(online.rows());
        m.variances.resize(online.rows());
        for (Eigen::Index i = 0; i < online.rows(); ++i) {
            m.predictions(i) = o.predictions[static_cast<std::size_t>(i)].mean;
            m.variances(i) = o.predictions[static_cast<std::size_t>(i)].variance;
        }
        m.events = std::move(o.events);
        m.refits = o.refits;
        m.detections = o.detections;
        return m;
    };
    switch (method) {
        case Method::MBase:
            r.predictions.resize(online.rows());
            r.variances.resize(online.rows());
            for (Eigen::Index i = 0; i < online.rows(); ++i) {
                const auto p = base.predict(online.covariates.row(i).transpose());
                r.predictions(i) = p.mean;
                r.variances(i) = p.variance;
            }
            break;
        case Method::PR1: r = detail::periodic_refits(base, offline, online, config, seed, 1, 0); break;
        case Method::PR2: r = detail::periodic_refits(base, offline, online, config, seed, 2, 0); break;
        case Method::MWGPR:
            r = detail::periodic_refits(base, offline, online, config, seed, 1,
                                        config.max_samples(offline.season_length));
            break;
        case Method::CpdScaled: r = gated(EventAction::ScaleOutput); break;
        case Method::CpdRetrain: r = gated(EventAction::RetrainAll); break;
        case Method::CpdMW: r = gated(EventAction::RetrainSeason); break;
        case Method::Evars: r = gated(EventAction::Augment); break;
    }
    r.method = method;
    r.cpu_seconds = static_cast<double>(std::clock() - cpu0) / CLOCKS_PER_SEC;
    r.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - wall0).count();
    return r;
}

}  // namespace evars::bench
