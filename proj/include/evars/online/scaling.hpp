#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <string>

#include "evars/error.hpp"

namespace evars {

/// Output scaling factor at index t: the sum of the window y[t - n_w .. t]
/// divided by the sum of the same window k seasons earlier, averaged over
/// k = 1..n_eta. Both window ends are inclusive.
inline double output_scaling_factor(const Eigen::Ref<const Eigen::VectorXd>& y, Eigen::Index t, int n_w, int n_eta,
                                    int n_seas) {
    if (n_w < 0 || n_eta < 1 || n_seas < 1) fail(ErrorKind::Parameter, "invalid scaling window parameters");
    if (t < 0 || t >= y.size()) fail(ErrorKind::History, "index outside the observed history");
    const Eigen::Index earliest = t - Eigen::Index{n_eta} * n_seas - n_w;
    if (earliest < 0) {
        fail(ErrorKind::History, "need " + std::to_string(-earliest) + " more observations before index " +
                                     std::to_string(t) + " for the scaling windows");
    }
    // Plain left-to-right sums keep the result independent of vectorization.
    auto window_sum = [&](Eigen::Index end) {
        double s = 0.0;
        for (Eigen::Index i = end - n_w; i <= end; ++i) s += y(i);
        return s;
    };
    const double current = window_sum(t);
    double total = 0.0;
    for (int k = 1; k <= n_eta; ++k) {
        const double previous = window_sum(t - Eigen::Index{k} * n_seas);
        if (previous == 0.0) {
            fail(ErrorKind::DegenerateWindow, "seasonal window " + std::to_string(k) + " sums to zero");
        }
        total += current / previous;
    }
    return total / n_eta;
}

}  // namespace evars
