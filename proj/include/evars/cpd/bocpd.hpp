#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "evars/error.hpp"

namespace evars::cpd {

/// Normal-Gamma posterior over (mean, precision) of a Gaussian.
struct NormalGamma {
    double mu = 0.0;
    double kappa = 1.0;
    double alpha = 1.0;
    double beta = 1.0;

    [[nodiscard]] NormalGamma updated(double y) const {
        NormalGamma p;
        p.mu = (kappa * mu + y) / (kappa + 1.0);
        p.kappa = kappa + 1.0;
        p.alpha = alpha + 0.5;
        p.beta = beta + kappa * (y - mu) * (y - mu) / (2.0 * (kappa + 1.0));
        return p;
    }

    /// Log density of the Student-t posterior predictive.
    [[nodiscard]] double log_predictive(double y) const {
        const double nu = 2.0 * alpha;
        const double scale2 = beta * (kappa + 1.0) / (alpha * kappa);
        const double z = (y - mu) * (y - mu) / (nu * scale2);
        return std::lgamma(0.5 * (nu + 1.0)) - std::lgamma(0.5 * nu) - 0.5 * std::log(nu * std::numbers::pi * scale2) -
               0.5 * (nu + 1.0) * std::log1p(z);
    }
};

struct BocpdParams {
    double lambda = 250.0;
    NormalGamma prior;
    /// Entries below this mass are pruned (0 disables pruning).
    double truncation = 1e-12;
    /// Upper bound on the total mass pruned in one step.
    double max_pruned_mass = 1e-6;
    /// A change fires when the MAP run length falls below this value after
    /// having been at least this value on the previous step.
    long guard = 5;

    void validate() const {
        if (!(lambda > 1.0) || !std::isfinite(lambda)) fail(ErrorKind::Parameter, "hazard timescale must be > 1");
        if (!(prior.kappa > 0.0 && prior.alpha > 0.0 && prior.beta > 0.0) || !std::isfinite(prior.mu)) {
            fail(ErrorKind::Parameter, "invalid Normal-Gamma prior");
        }
        if (truncation < 0.0 || max_pruned_mass < 0.0) fail(ErrorKind::Parameter, "negative truncation setting");
    }
};

struct RunLengthEntry {
    long run_length = 0;
    double probability = 0.0;
    NormalGamma posterior;
};

struct BocpdOutput {
    bool change = false;
    long map_run_length = 0;
    double pruned_mass = 0.0;
};

/// Bayesian online change-point detection with a constant hazard 1/lambda.
/// Run length r counts the observations of the current run after its first,
/// so the first observation yields a point mass at r = 0; entry r carries
/// the posterior after all r + 1 observations of its run.
class Bocpd {
public:
    explicit Bocpd(const BocpdParams& p) : params_(p) { p.validate(); }

    BocpdOutput step(double y) {
        if (!std::isfinite(y)) fail(ErrorKind::Input, "non-finite value fed to BOCPD");
        const double log_h = -std::log(params_.lambda);
        const double log_1mh = std::log1p(-1.0 / params_.lambda);

        std::vector<RunLengthEntry> next;
        if (entries_.empty()) {
            next.push_back({0, 1.0, params_.prior.updated(y)});
        } else {
            next.reserve(entries_.size() + 1);
            std::vector<double> logs;
            logs.reserve(entries_.size() + 1);
            // The hazard is constant, so the change-point mass is H times the
            // prior predictive regardless of the run-length distribution.
            logs.push_back(log_h + params_.prior.log_predictive(y));
            next.push_back({0, 0.0, params_.prior.updated(y)});
            for (const auto& e : entries_) {
                logs.push_back(std::log(e.probability) + log_1mh + e.posterior.log_predictive(y));
                next.push_back({e.run_length + 1, 0.0, e.posterior.updated(y)});
            }
            const double top = *std::max_element(logs.begin(), logs.end());
            double total = 0.0;
            for (double l : logs) total += std::exp(l - top);
            const double log_norm = top + std::log(total);
            for (std::size_t i = 0; i < next.size(); ++i) next[i].probability = std::exp(logs[i] - log_norm);
        }

        BocpdOutput out;
        out.pruned_mass = prune(next);
        entries_ = std::move(next);
        ++steps_;

        const auto best = std::max_element(entries_.begin(), entries_.end(), [](const auto& a, const auto& b) {
            return a.probability < b.probability;
        });
        out.map_run_length = best->run_length;
        out.change = out.map_run_length < params_.guard && previous_map_ >= params_.guard;
        previous_map_ = out.map_run_length;
        return out;
    }

    [[nodiscard]] const std::vector<RunLengthEntry>& entries() const { return entries_; }

    /// Dense posterior indexed by run length (pruned entries are 0).
    [[nodiscard]] std::vector<double> posterior() const {
        long max_r = 0;
        for (const auto& e : entries_) max_r = std::max(max_r, e.run_length);
        std::vector<double> p(static_cast<std::size_t>(max_r) + 1, 0.0);
        for (const auto& e : entries_) p[static_cast<std::size_t>(e.run_length)] = e.probability;
        return p;
    }

    [[nodiscard]] const BocpdParams& params() const { return params_; }
    [[nodiscard]] long steps() const { return steps_; }

private:
    // Removes the smallest entries below the truncation threshold while the
    // removed total stays within max_pruned_mass, then renormalizes.
    double prune(std::vector<RunLengthEntry>& v) const {
        if (params_.truncation <= 0.0 || v.size() < 2) return 0.0;
        std::vector<std::size_t> small;
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (v[i].probability < params_.truncation) small.push_back(i);
        }
        if (small.empty()) return 0.0;
        std::sort(small.begin(), small.end(), [&](auto a, auto b) { return v[a].probability < v[b].probability; });
        std::vector<bool> drop(v.size(), false);
        double removed = 0.0;
        std::size_t dropped = 0;
        for (auto i : small) {
            if (removed + v[i].probability > params_.max_pruned_mass || dropped + 1 >= v.size()) break;
            removed += v[i].probability;
            drop[i] = true;
            ++dropped;
        }
        std::vector<RunLengthEntry> kept;
        kept.reserve(v.size() - dropped);
        double total = 0.0;
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (!drop[i]) {
                total += v[i].probability;
                kept.push_back(v[i]);
            }
        }
        for (auto& e : kept) e.probability /= total;
        v = std::move(kept);
        return removed;
    }

    BocpdParams params_;
    std::vector<RunLengthEntry> entries_;
    long previous_map_ = 0;
    long steps_ = 0;
};

}  // namespace evars::cpd
