#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <optional>

#include "evars/dataset.hpp"
#include "evars/gpr/kernel.hpp"

namespace evars::gpr {

struct PreprocessOptions {
    bool standardize_inputs = false;
    /// Principal-component projection of the (standardized) inputs.
    bool pca = false;
    double pca_variance = 0.95;
    /// Targets are shifted/scaled to zero mean and unit variance before
    /// fitting, and predictions mapped back.
    bool standardize_target = false;

    friend bool operator==(const PreprocessOptions&, const PreprocessOptions&) = default;
};

/// Fitted preprocessing statistics. Input statistics are fitted once and can
/// be carried over to a refit; target statistics are recomputed at every fit.
struct Preprocessing {
    PreprocessOptions options;
    Eigen::RowVectorXd x_mean;
    Eigen::RowVectorXd x_scale;
    Eigen::MatrixXd projection;  // d x k, empty when PCA is off
    double y_mean = 0.0;
    double y_scale = 1.0;

    [[nodiscard]] Eigen::Index input_dims() const { return x_mean.size(); }

    [[nodiscard]] Eigen::MatrixXd transform(const Eigen::Ref<const Eigen::MatrixXd>& x) const {
        if (x.cols() != input_dims()) fail(ErrorKind::Shape, "input has wrong dimension for model");
        Eigen::MatrixXd z = (x.rowwise() - x_mean).array().rowwise() / x_scale.array();
        if (projection.size() > 0) return z * projection;
        return z;
    }

    static Preprocessing fit_inputs(const Eigen::Ref<const Eigen::MatrixXd>& x, const PreprocessOptions& opt) {
        Preprocessing p;
        p.options = opt;
        const auto d = x.cols();
        p.x_mean = Eigen::RowVectorXd::Zero(d);
        p.x_scale = Eigen::RowVectorXd::Ones(d);
        if ((opt.standardize_inputs || opt.pca) && x.rows() > 0) {
            p.x_mean = x.colwise().mean();
            for (Eigen::Index j = 0; j < d; ++j) {
                const double sd = std::sqrt((x.col(j).array() - p.x_mean(j)).square().mean());
                p.x_scale(j) = sd > 1e-12 ? sd : 1.0;
            }
        }
        if (opt.pca && d >= 2 && x.rows() >= 2) {
            const Eigen::MatrixXd z = (x.rowwise() - p.x_mean).array().rowwise() / p.x_scale.array();
            const Eigen::MatrixXd cov = (z.transpose() * z) / static_cast<double>(x.rows());
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
            const Eigen::VectorXd values = eig.eigenvalues().reverse().cwiseMax(0.0);
            const Eigen::MatrixXd vectors = eig.eigenvectors().rowwise().reverse();
            const double total = values.sum();
            Eigen::Index keep = d;
            if (total > 0.0) {
                double acc = 0.0;
                for (Eigen::Index k = 0; k < d; ++k) {
                    acc += values(k);
                    if (acc >= opt.pca_variance * total) {
                        keep = k + 1;
                        break;
                    }
                }
            }
            p.projection = vectors.leftCols(keep);
        }
        return p;
    }

    void fit_target(const Eigen::Ref<const Eigen::VectorXd>& y) {
        y_mean = 0.0;
        y_scale = 1.0;
        if (options.standardize_target && y.size() > 0) {
            y_mean = y.mean();
            const double sd = std::sqrt((y.array() - y_mean).square().mean());
            y_scale = sd > 1e-12 * std::max(1.0, std::abs(y_mean)) ? sd : 1.0;
        }
    }
};

struct Prediction {
    double mean = 0.0;
    double variance = 0.0;
};

/// Jitter schedule for the Cholesky factorization, as multiples of the mean
/// kernel diagonal. The first attempt adds nothing.
inline constexpr double kJitterStart = 1e-10;
inline constexpr double kJitterMax = 1e-4;

/// Exact Gaussian process regression with a constant mean function.
///
/// Stores L with L L^T = K(X, X) + noise * I (+ jitter) and
/// alpha = (L L^T)^{-1} (y - m) in the preprocessed target space.
class GprModel {
public:
    /// Fits on raw inputs; `pre` carries already-fitted input statistics.
    static GprModel fit(const Eigen::Ref<const Eigen::MatrixXd>& x, const Eigen::Ref<const Eigen::VectorXd>& y,
                        const KernelSpec& spec, double mean_constant, Preprocessing pre) {
        if (x.rows() != y.size()) fail(ErrorKind::Shape, "input rows and target length differ");
        if (x.rows() < 2) fail(ErrorKind::Input, "need at least two training points");
        if (!x.allFinite() || !y.allFinite()) fail(ErrorKind::Input, "non-finite training data");
        spec.validate();
        if (!std::isfinite(mean_constant)) fail(ErrorKind::Parameter, "mean constant must be finite");

        GprModel m;
        m.spec_ = spec;
        m.mean_constant_ = mean_constant;
        pre.fit_target(y);
        m.pre_ = std::move(pre);
        m.x_train_ = m.pre_.transform(x);
        m.y_train_ = (y.array() - m.pre_.y_mean) / m.pre_.y_scale;
        m.factorize(PairwiseGeometry(m.x_train_, m.x_train_));
        return m;
    }

    /// Same as fit() but reuses geometry of already-transformed inputs; used by
    /// parameter searches that refit many kernels on one design.
    static GprModel fit_transformed(const Eigen::MatrixXd& z, const PairwiseGeometry& geometry,
                                    const Eigen::Ref<const Eigen::VectorXd>& y, const KernelSpec& spec,
                                    double mean_constant, Preprocessing pre) {
        spec.validate();
        GprModel m;
        m.spec_ = spec;
        m.mean_constant_ = mean_constant;
        pre.fit_target(y);
        m.pre_ = std::move(pre);
        m.x_train_ = z;
        m.y_train_ = (y.array() - m.pre_.y_mean) / m.pre_.y_scale;
        m.factorize(geometry);
        return m;
    }

    [[nodiscard]] Prediction predict(const Eigen::Ref<const Eigen::VectorXd>& x) const {
        if (!x.allFinite()) fail(ErrorKind::Input, "non-finite prediction input");
        if (x.size() != pre_.input_dims()) fail(ErrorKind::Shape, "prediction input has wrong dimension");
        const Eigen::MatrixXd z = pre_.transform(x.transpose());
        return predict_transformed(z.row(0).transpose());
    }

    [[nodiscard]] std::vector<Prediction> predict_all(const Eigen::Ref<const Eigen::MatrixXd>& x) const {
        std::vector<Prediction> out;
        out.reserve(static_cast<std::size_t>(x.rows()));
        for (Eigen::Index i = 0; i < x.rows(); ++i) out.push_back(predict(x.row(i).transpose()));
        return out;
    }

    /// Log marginal likelihood of the (preprocessed) training targets.
    [[nodiscard]] double log_marginal_likelihood() const {
        const auto n = static_cast<double>(y_train_.size());
        const Eigen::VectorXd r = y_train_.array() - mean_constant_;
        return -0.5 * r.dot(alpha_) - chol_.diagonal().array().log().sum() -
               0.5 * n * std::log(2.0 * std::numbers::pi);
    }

    [[nodiscard]] const KernelSpec& kernel_spec() const { return spec_; }
    [[nodiscard]] double mean_constant() const { return mean_constant_; }
    [[nodiscard]] const Preprocessing& preprocessing() const { return pre_; }
    [[nodiscard]] const Eigen::MatrixXd& cholesky_factor() const { return chol_; }
    [[nodiscard]] const Eigen::VectorXd& alpha() const { return alpha_; }
    [[nodiscard]] const Eigen::MatrixXd& training_inputs() const { return x_train_; }
    [[nodiscard]] const Eigen::VectorXd& training_targets() const { return y_train_; }
    [[nodiscard]] double jitter() const { return jitter_; }
    [[nodiscard]] Eigen::Index training_size() const { return y_train_.size(); }

private:
    void factorize(const PairwiseGeometry& geometry) {
        const Eigen::MatrixXd k = spec_.kernel.gram(geometry);
        const auto n = k.rows();
        const double scale = std::max(k.diagonal().mean(), std::numeric_limits<double>::min());
        double jitter = 0.0;
        while (true) {
            Eigen::MatrixXd a = k;
            a.diagonal().array() += spec_.noise + jitter;
            Eigen::LLT<Eigen::MatrixXd> llt(a);
            if (llt.info() == Eigen::Success) {
                Eigen::MatrixXd l = llt.matrixL();
                if (l.allFinite() && (l.diagonal().array() > 0.0).all()) {
                    const Eigen::VectorXd r = y_train_.array() - mean_constant_;
                    Eigen::VectorXd alpha = llt.solve(r);
                    if (alpha.allFinite()) {
                        chol_ = std::move(l);
                        alpha_ = std::move(alpha);
                        jitter_ = jitter;
                        return;
                    }
                }
            }
            jitter = jitter == 0.0 ? kJitterStart * scale : jitter * 10.0;
            if (jitter > kJitterMax * scale * (1.0 + 1e-9)) {
                fail(ErrorKind::Conditioning, "Cholesky factorization failed for " + std::to_string(n) +
                                                  " points after jitter escalation (" + spec_.kernel.describe() + ")");
            }
        }
    }

    [[nodiscard]] Prediction predict_transformed(const Eigen::VectorXd& z) const {
        Eigen::VectorXd kx(x_train_.rows());
        for (Eigen::Index i = 0; i < x_train_.rows(); ++i) kx(i) = spec_.kernel(z, x_train_.row(i).transpose());
        const double mean = mean_constant_ + kx.dot(alpha_);
        const Eigen::VectorXd v = chol_.triangularView<Eigen::Lower>().solve(kx);
        const double var = std::max(0.0, spec_.kernel(z, z) - v.squaredNorm());
        return {pre_.y_mean + pre_.y_scale * mean, pre_.y_scale * pre_.y_scale * var};
    }

    KernelSpec spec_;
    double mean_constant_ = 0.0;
    Preprocessing pre_;
    Eigen::MatrixXd x_train_;
    Eigen::VectorXd y_train_;
    Eigen::MatrixXd chol_;
    Eigen::VectorXd alpha_;
    double jitter_ = 0.0;
};

/// Fits on a dataset's covariates and target.
inline GprModel fit(const TimeSeriesDataset& data, const KernelSpec& spec, double mean_constant,
                    const PreprocessOptions& options = {}) {
    return GprModel::fit(data.covariates, data.target, spec, mean_constant,
                         Preprocessing::fit_inputs(data.covariates, options));
}

inline Prediction predict(const GprModel& model, const Eigen::Ref<const Eigen::VectorXd>& x) {
    return model.predict(x);
}

}  // namespace evars::gpr
