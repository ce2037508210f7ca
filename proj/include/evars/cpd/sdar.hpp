#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include "evars/error.hpp"

namespace evars::cpd {

/// Relative innovation-variance floor, as a fraction of the discounted second moment.
inline constexpr double kSdarVarianceFloor = 1e-8;
inline constexpr double kSdarAbsoluteFloor = 1e-12;

/// Sequentially discounting AR(k) model. Mean, autocovariances and innovation
/// variance are exponentially discounted with rate r; AR coefficients are
/// re-solved from the discounted autocovariances after every update.
class Sdar {
public:
    Sdar(int order, double r) : order_(order), r_(r) {
        if (order < 1) fail(ErrorKind::Parameter, "SDAR order must be >= 1");
        if (!(r > 0.0 && r < 1.0)) fail(ErrorKind::Parameter, "SDAR discount rate must lie in (0, 1)");
        c_.assign(static_cast<std::size_t>(order) + 1, 0.0);
        a_.assign(static_cast<std::size_t>(order), 0.0);
        history_.assign(static_cast<std::size_t>(order), 0.0);
    }

    [[nodiscard]] bool warming_up() const { return count_ < static_cast<long>(order_) + 2; }

    /// Log predictive density of y under the model before this update; 0 while warming up.
    double update(double y) {
        if (!std::isfinite(y)) fail(ErrorKind::Input, "non-finite value fed to SDAR");
        double log_density = 0.0;
        if (!warming_up()) {
            const double e = y - predict();
            const double v = variance();
            log_density = -0.5 * std::log(2.0 * std::numbers::pi * v) - 0.5 * e * e / v;
        }

        if (count_ == 0) mu_ = y;
        mu_ = (1.0 - r_) * mu_ + r_ * y;
        m2_ = (1.0 - r_) * m2_ + r_ * y * y;
        const auto filled = static_cast<std::size_t>(std::min<long>(count_, order_));
        c_[0] = (1.0 - r_) * c_[0] + r_ * (y - mu_) * (y - mu_);
        for (std::size_t j = 1; j <= filled; ++j) {
            c_[j] = (1.0 - r_) * c_[j] + r_ * (y - mu_) * (history_[j - 1] - mu_);
        }
        solve_yule_walker();
        double residual = y - mu_;
        for (std::size_t i = 0; i < filled; ++i) residual -= a_[i] * (history_[i] - mu_);
        sigma2_ = (1.0 - r_) * sigma2_ + r_ * residual * residual;

        for (std::size_t i = history_.size() - 1; i > 0; --i) history_[i] = history_[i - 1];
        history_[0] = y;
        ++count_;
        return log_density;
    }

    /// One-step-ahead predictive mean.
    [[nodiscard]] double predict() const {
        double x = mu_;
        const auto filled = static_cast<std::size_t>(std::min<long>(count_, order_));
        for (std::size_t i = 0; i < filled; ++i) x += a_[i] * (history_[i] - mu_);
        return x;
    }

    /// Innovation variance with the floor applied.
    [[nodiscard]] double variance() const {
        return std::max(sigma2_, std::max(kSdarVarianceFloor * m2_, kSdarAbsoluteFloor));
    }

    [[nodiscard]] double mean() const { return mu_; }
    [[nodiscard]] const std::vector<double>& coefficients() const { return a_; }
    [[nodiscard]] const std::vector<double>& autocovariances() const { return c_; }
    [[nodiscard]] long updates() const { return count_; }
    [[nodiscard]] int order() const { return order_; }
    [[nodiscard]] double rate() const { return r_; }

private:
    // Levinson-Durbin recursion on c_[0..order].
    void solve_yule_walker() {
        std::fill(a_.begin(), a_.end(), 0.0);
        if (c_[0] <= 1e-300) return;
        std::vector<double> prev(a_.size(), 0.0);
        double err = c_[0];
        for (std::size_t k = 0; k < a_.size(); ++k) {
            double acc = c_[k + 1];
            for (std::size_t j = 0; j < k; ++j) acc -= prev[j] * c_[k - j];
            const double kappa = acc / err;
            if (!std::isfinite(kappa) || std::abs(kappa) >= 1.0) return;
            a_[k] = kappa;
            for (std::size_t j = 0; j < k; ++j) a_[j] = prev[j] - kappa * prev[k - 1 - j];
            err *= 1.0 - kappa * kappa;
            prev = a_;
        }
    }

    int order_;
    double r_;
    double mu_ = 0.0;
    double m2_ = 0.0;
    double sigma2_ = 0.0;
    std::vector<double> c_;
    std::vector<double> a_;
    std::vector<double> history_;  // history_[0] is the most recent value
    long count_ = 0;
};

}  // namespace evars::cpd
