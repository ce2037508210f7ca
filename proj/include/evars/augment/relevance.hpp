#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <vector>

#include "evars/error.hpp"

namespace evars::augment {

namespace detail {

inline std::vector<double> sorted_copy(const Eigen::Ref<const Eigen::VectorXd>& y) {
    std::vector<double> v(y.data(), y.data() + y.size());
    std::sort(v.begin(), v.end());
    return v;
}

/// Linear-interpolation quantile of sorted, non-empty data.
inline double quantile(const std::vector<double>& sorted, double q) {
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(pos);
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

}  // namespace detail

/// Relevance of each target in [0, 1]: one minus its Gaussian kernel density
/// (Silverman bandwidth) relative to the densest sample. Rare, extreme
/// targets score near 1; the mode scores 0.
inline Eigen::VectorXd relevance(const Eigen::Ref<const Eigen::VectorXd>& y) {
    const auto n = y.size();
    if (n < 5) fail(ErrorKind::Input, "relevance needs at least 5 samples");
    const double mean = y.mean();
    const double sd = std::sqrt((y.array() - mean).square().sum() / static_cast<double>(n - 1));
    if (!(sd > 0.0)) return Eigen::VectorXd::Zero(n);

    const auto sorted = detail::sorted_copy(y);
    const double iqr = detail::quantile(sorted, 0.75) - detail::quantile(sorted, 0.25);
    double spread = sd;
    if (iqr > 0.0) spread = std::min(sd, iqr / 1.34);
    const double h = 0.9 * spread * std::pow(static_cast<double>(n), -0.2);

    Eigen::VectorXd density(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        double s = 0.0;
        for (Eigen::Index j = 0; j < n; ++j) {
            const double u = (y(i) - y(j)) / h;
            s += std::exp(-0.5 * u * u);
        }
        density(i) = s;
    }
    return (1.0 - density.array() / density.maxCoeff()).cwiseMax(0.0).cwiseMin(1.0);
}

/// Targets outside [Q1 - c IQR, Q3 + c IQR].
inline std::vector<bool> boxplot_outliers(const Eigen::Ref<const Eigen::VectorXd>& y, double coefficient) {
    const auto n = y.size();
    std::vector<bool> out(static_cast<std::size_t>(n), false);
    if (n < 2) return out;
    const auto sorted = detail::sorted_copy(y);
    const double q1 = detail::quantile(sorted, 0.25);
    const double q3 = detail::quantile(sorted, 0.75);
    const double lo = q1 - coefficient * (q3 - q1);
    const double hi = q3 + coefficient * (q3 - q1);
    for (Eigen::Index i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = y(i) < lo || y(i) > hi;
    return out;
}

}  // namespace evars::augment
