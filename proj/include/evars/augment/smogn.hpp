#pragma once

#include "evars/augment/gn.hpp"

namespace evars::augment {

/// Number of rows each class is brought to: ceil((|N| + |R|) / 2).
inline std::size_t smogn_balance_target(std::size_t normal, std::size_t rare) { return (normal + rare + 1) / 2; }

/// Synthetic row interpolated between a seed and a neighbor at fraction
/// `frac`. Distances are measured in the standardized space `z`. The target
/// is the inverse-distance weighted average of both parents' targets.
inline std::pair<Eigen::VectorXd, double> smoter_child(const TimeSeriesDataset& ds, const Eigen::MatrixXd& z,
                                                       Eigen::Index seed, Eigen::Index neighbor, double frac,
                                                       Rng& rng) {
    std::bernoulli_distribution coin(0.5);
    Eigen::VectorXd x(ds.dims());
    for (Eigen::Index j = 0; j < ds.dims(); ++j) {
        const double a = ds.covariates(seed, j);
        const double b = ds.covariates(neighbor, j);
        if (ds.categorical[static_cast<std::size_t>(j)]) {
            x(j) = coin(rng) ? a : b;
        } else {
            x(j) = a + frac * (b - a);
        }
    }
    const Eigen::RowVectorXd zc = z.row(seed) + frac * (z.row(neighbor) - z.row(seed));
    const double d1 = (zc - z.row(seed)).norm();
    const double d2 = (zc - z.row(neighbor)).norm();
    const double ys = ds.target(seed);
    const double yn = ds.target(neighbor);
    double y = ys;
    if (d1 > 0.0 && d2 > 0.0) {
        y = (ys / d1 + yn / d2) / (1.0 / d1 + 1.0 / d2);
    } else if (d2 == 0.0 && d1 > 0.0) {
        y = yn;
    }
    return {x, y};
}

/// SMOGN: rare cases are targets with relevance above the threshold or
/// outside the boxplot whiskers. Each class is balanced toward
/// ceil((|N| + |R|) / 2) rows: normal rows are undersampled to that size when
/// enabled, and rare rows are topped up with synthetic rows. A synthetic row
/// interpolates a rare seed with one of its k nearest rare neighbors when the
/// neighbor lies within half the median of the seed's neighbor distances,
/// and is a Gaussian-noise copy of the seed otherwise. Falls back to GN when
/// fewer than k + 1 rare rows exist.
inline std::optional<TimeSeriesDataset> smogn_augment(const TimeSeriesDataset& base, const SmognParams& params,
                                                      const GnParams& fallback, std::uint64_t seed) {
    validate_shape(base);
    const auto rel = relevance(base.target);
    const auto split =
        split_by_relevance(rel, params.relevance_threshold, boxplot_outliers(base.target, params.boxplot_coefficient));
    if (split.rare.size() < static_cast<std::size_t>(params.k_neighbors) + 1) {
        return gn_augment(base, fallback, seed);
    }

    Rng rng = make_rng(seed, "augment.smogn");
    const auto goal = smogn_balance_target(split.normal.size(), split.rare.size());
    auto kept = params.undersample ? undersample(split.normal, goal, rng) : split.normal;
    kept.insert(kept.end(), split.rare.begin(), split.rare.end());

    const Eigen::RowVectorXd mean = base.covariates.colwise().mean();
    const auto stats = detail::column_stats(base);
    Eigen::RowVectorXd sd = stats.sd;
    for (Eigen::Index j = 0; j < sd.size(); ++j) {
        if (!(sd(j) > 1e-12)) sd(j) = 1.0;
    }
    const Eigen::MatrixXd z = (base.covariates.rowwise() - mean).array().rowwise() / sd.array();

    // k nearest rare neighbors of each rare row, with distances.
    const auto k = static_cast<std::size_t>(params.k_neighbors);
    std::vector<std::vector<std::pair<double, Eigen::Index>>> neighbors(split.rare.size());
    std::vector<double> max_distance(split.rare.size());
    for (std::size_t a = 0; a < split.rare.size(); ++a) {
        auto& nb = neighbors[a];
        for (std::size_t b = 0; b < split.rare.size(); ++b) {
            if (a == b) continue;
            nb.emplace_back((z.row(split.rare[a]) - z.row(split.rare[b])).norm(), split.rare[b]);
        }
        std::partial_sort(nb.begin(), nb.begin() + static_cast<std::ptrdiff_t>(k), nb.end());
        nb.resize(k);
        std::vector<double> d;
        for (const auto& p : nb) d.push_back(p.first);
        std::sort(d.begin(), d.end());
        const double median = k % 2 == 1 ? d[k / 2] : 0.5 * (d[k / 2 - 1] + d[k / 2]);
        max_distance[a] = 0.5 * median;
    }

    auto synthetic = detail::empty_like(base);
    const std::size_t count = goal > split.rare.size() ? goal - split.rare.size() : 0;
    std::uniform_int_distribution<std::size_t> pick(0, k - 1);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (std::size_t i = 0; i < count; ++i) {
        const std::size_t a = i % split.rare.size();
        const auto s = split.rare[a];
        const auto& [dist, nb] = neighbors[a][pick(rng)];
        const auto stamp = base.timestamps[static_cast<std::size_t>(s)];
        if (dist <= max_distance[a]) {
            const double frac = unit(rng);
            auto [x, y] = smoter_child(base, z, s, nb, frac, rng);
            append_row(synthetic, stamp, x, y);
        } else {
            auto [x, y] = detail::noisy_copy(base, s, stats, rng);
            append_row(synthetic, stamp, x, y);
        }
    }
    return detail::assemble(base, std::move(kept), synthetic);
}

}  // namespace evars::augment
