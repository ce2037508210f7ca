#pragma once

#include "evars/augment/smogn.hpp"

namespace evars::augment {

struct RefitData {
    TimeSeriesDataset data;
    /// True when an oversampler found no rare rows and its input was used as is.
    bool fell_back = false;
};

/// Builds the refit dataset for a change event with scaling factor `eta`.
/// The scale method returns the scaled history. GN and SMOGN augment the
/// original history, or the history together with its scaled copy when
/// `append_scaled` is set. The result is sorted by timestamp and capped to
/// the most recent `max_samples` rows.
inline RefitData build_refit_dataset(const TimeSeriesDataset& history, double eta, const AugmentParams& params,
                                     std::uint64_t seed) {
    params.validate();
    const auto scaled = scale_dataset(history, eta);
    RefitData out{scaled, false};
    if (params.method != Method::Scale) {
        const auto source = params.append_scaled ? sort_by_timestamp(concat(history, scaled)) : history;
        auto augmented = params.method == Method::GaussianNoise ? gn_augment(source, params.gn, seed)
                                                                : smogn_augment(source, params.smogn, params.gn, seed);
        if (augmented) {
            out.data = std::move(*augmented);
        } else {
            out.data = source;
            out.fell_back = true;
        }
    }
    out.data = sort_by_timestamp(out.data);
    if (params.max_samples > 0 && out.data.rows() > params.max_samples) out.data = tail(out.data, params.max_samples);
    return out;
}

}  // namespace evars::augment
