#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "evars/error.hpp"

namespace evars::gpr {

enum class KernelKind { SquaredExponential, Periodic, Linear, Constant, Sum, Product };

/// Pairwise squared distances, inner products and coordinate differences
/// between two point sets (rows are points). Kernels are evaluated from
/// these, so a composition tree touches the raw coordinates only once.
struct PairwiseGeometry {
    Eigen::MatrixXd squared_distance;
    Eigen::MatrixXd inner_product;
    /// Column i + j * rows holds a.row(i) - b.row(j).
    Eigen::MatrixXd difference;

    PairwiseGeometry(const Eigen::Ref<const Eigen::MatrixXd>& a, const Eigen::Ref<const Eigen::MatrixXd>& b)
        : squared_distance(a.rows(), b.rows()),
          inner_product(a.rows(), b.rows()),
          difference(a.cols(), a.rows() * b.rows()) {
        for (Eigen::Index j = 0; j < b.rows(); ++j) {
            for (Eigen::Index i = 0; i < a.rows(); ++i) {
                double sq = 0.0;
                double ip = 0.0;
                for (Eigen::Index k = 0; k < a.cols(); ++k) {
                    const double u = a(i, k);
                    const double v = b(j, k);
                    difference(k, i + j * a.rows()) = u - v;
                    sq += (u - v) * (u - v);
                    ip += u * v;
                }
                squared_distance(i, j) = sq;
                inner_product(i, j) = ip;
            }
        }
    }
};

/// The quantities a kernel needs about one pair of points.
struct PointPair {
    double squared_distance;
    double inner_product;
    const double* difference;
    Eigen::Index dims;
};

/// Covariance function as a composition tree: primitive leaves joined by
/// sum and product nodes.
///
/// Leaf parameters, in order:
///   squared exponential  (variance, length_scale)   v * exp(-r^2 / (2 l^2))
///   periodic             (variance, length_scale, period)
///                                                   v * exp(-2 sum_k sin^2(pi d_k / p) / l^2)
///   linear               (variance, offset)         v * <x, x'> + offset
///   constant             (variance)                 v
/// where r is the Euclidean distance between the two inputs and d_k their
/// difference in coordinate k. Summing over coordinates keeps the periodic
/// kernel positive semi-definite in more than one dimension, which the
/// Euclidean form sin^2(pi r / p) is not.
class Kernel {
public:
    static Kernel squared_exponential(double variance, double length_scale) {
        return Kernel(KernelKind::SquaredExponential, {variance, length_scale});
    }
    static Kernel periodic(double variance, double length_scale, double period) {
        return Kernel(KernelKind::Periodic, {variance, length_scale, period});
    }
    static Kernel linear(double variance, double offset) { return Kernel(KernelKind::Linear, {variance, offset}); }
    static Kernel constant(double variance) { return Kernel(KernelKind::Constant, {variance}); }

    static Kernel sum(Kernel a, Kernel b) { return Kernel(KernelKind::Sum, std::move(a), std::move(b)); }
    static Kernel product(Kernel a, Kernel b) { return Kernel(KernelKind::Product, std::move(a), std::move(b)); }

    friend Kernel operator+(Kernel a, Kernel b) { return sum(std::move(a), std::move(b)); }
    friend Kernel operator*(Kernel a, Kernel b) { return product(std::move(a), std::move(b)); }

    [[nodiscard]] KernelKind kind() const { return kind_; }
    [[nodiscard]] const std::vector<double>& leaf_parameters() const { return params_; }
    [[nodiscard]] const std::vector<Kernel>& children() const { return children_; }
    [[nodiscard]] bool is_leaf() const { return children_.empty(); }

    [[nodiscard]] static std::size_t leaf_arity(KernelKind kind) {
        switch (kind) {
            case KernelKind::SquaredExponential: return 2;
            case KernelKind::Periodic: return 3;
            case KernelKind::Linear: return 2;
            case KernelKind::Constant: return 1;
            default: return 0;
        }
    }

    /// Assembles a node from its parts; used by deserialization.
    static Kernel from_parts(KernelKind kind, std::vector<double> params, std::vector<Kernel> children) {
        Kernel k(kind, std::move(params));
        k.children_ = std::move(children);
        if ((kind == KernelKind::Sum || kind == KernelKind::Product) != (k.children_.size() == 2)) {
            fail(ErrorKind::Spec, "sum/product nodes need exactly two children, leaves none");
        }
        if (k.params_.size() != leaf_arity(kind)) fail(ErrorKind::Spec, "wrong parameter count for kernel node");
        return k;
    }

    [[nodiscard]] double evaluate(const PointPair& p) const {
        switch (kind_) {
            case KernelKind::SquaredExponential:
                return params_[0] * std::exp(-p.squared_distance / (2.0 * params_[1] * params_[1]));
            case KernelKind::Periodic: {
                double s2 = 0.0;
                for (Eigen::Index k = 0; k < p.dims; ++k) {
                    const double s = std::sin(std::numbers::pi * p.difference[k] / params_[2]);
                    s2 += s * s;
                }
                return params_[0] * std::exp(-2.0 * s2 / (params_[1] * params_[1]));
            }
            case KernelKind::Linear: return params_[0] * p.inner_product + params_[1];
            case KernelKind::Constant: return params_[0];
            case KernelKind::Sum: return children_[0].evaluate(p) + children_[1].evaluate(p);
            case KernelKind::Product: return children_[0].evaluate(p) * children_[1].evaluate(p);
        }
        return 0.0;
    }

    [[nodiscard]] double operator()(const Eigen::Ref<const Eigen::VectorXd>& a,
                                    const Eigen::Ref<const Eigen::VectorXd>& b) const {
        const Eigen::VectorXd d = a - b;
        return evaluate({d.squaredNorm(), a.dot(b), d.data(), d.size()});
    }

    [[nodiscard]] Eigen::MatrixXd gram(const PairwiseGeometry& g) const {
        Eigen::MatrixXd k(g.squared_distance.rows(), g.squared_distance.cols());
        for (Eigen::Index j = 0; j < k.cols(); ++j) {
            for (Eigen::Index i = 0; i < k.rows(); ++i) {
                k(i, j) = evaluate({g.squared_distance(i, j), g.inner_product(i, j),
                                    g.difference.col(i + j * k.rows()).data(), g.difference.rows()});
            }
        }
        return k;
    }

    [[nodiscard]] Eigen::MatrixXd gram(const Eigen::Ref<const Eigen::MatrixXd>& a,
                                       const Eigen::Ref<const Eigen::MatrixXd>& b) const {
        return gram(PairwiseGeometry(a, b));
    }

    /// Depth-first flattening of all leaf parameters.
    [[nodiscard]] std::vector<double> parameters() const {
        std::vector<double> out;
        collect(out);
        return out;
    }

    [[nodiscard]] std::size_t parameter_count() const { return parameters().size(); }

    void set_parameters(std::span<const double> values) {
        std::size_t pos = 0;
        assign(values, pos);
        if (pos != values.size()) fail(ErrorKind::Parameter, "too many kernel parameters");
    }

    /// Variances and length-scales > 0, period > 0, linear offset >= 0.
    void validate() const {
        if (is_leaf()) {
            for (std::size_t i = 0; i < params_.size(); ++i) {
                const double p = params_[i];
                const bool offset = kind_ == KernelKind::Linear && i == 1;
                if (!std::isfinite(p) || (offset ? p < 0.0 : p <= 0.0)) {
                    fail(ErrorKind::Parameter, "kernel parameter out of range in " + describe());
                }
            }
        }
        for (const auto& c : children_) c.validate();
    }

    [[nodiscard]] std::string describe() const {
        switch (kind_) {
            case KernelKind::SquaredExponential: return "SE";
            case KernelKind::Periodic: return "Periodic";
            case KernelKind::Linear: return "Linear";
            case KernelKind::Constant: return "Constant";
            case KernelKind::Sum: return "(" + children_[0].describe() + "+" + children_[1].describe() + ")";
            case KernelKind::Product: return "(" + children_[0].describe() + "*" + children_[1].describe() + ")";
        }
        return "?";
    }

    friend bool operator==(const Kernel&, const Kernel&) = default;

private:
    Kernel(KernelKind kind, std::vector<double> params) : kind_(kind), params_(std::move(params)) {}
    Kernel(KernelKind kind, Kernel a, Kernel b) : kind_(kind) {
        children_.push_back(std::move(a));
        children_.push_back(std::move(b));
    }

    void collect(std::vector<double>& out) const {
        out.insert(out.end(), params_.begin(), params_.end());
        for (const auto& c : children_) c.collect(out);
    }

    void assign(std::span<const double> values, std::size_t& pos) {
        for (auto& p : params_) {
            if (pos >= values.size()) fail(ErrorKind::Parameter, "too few kernel parameters");
            p = values[pos++];
        }
        for (auto& c : children_) c.assign(values, pos);
    }

    KernelKind kind_;
    std::vector<double> params_;
    std::vector<Kernel> children_;
};

/// A covariance function plus additive white-noise variance on the training diagonal.
struct KernelSpec {
    Kernel kernel = Kernel::squared_exponential(1.0, 1.0);
    double noise = 0.0;

    void validate() const {
        kernel.validate();
        if (!std::isfinite(noise) || noise < 0.0) fail(ErrorKind::Parameter, "noise variance must be >= 0");
    }

    friend bool operator==(const KernelSpec&, const KernelSpec&) = default;
};

/// k(x1, x2); the noise term is not part of the covariance between two points.
inline double kernel_eval(const KernelSpec& spec, const Eigen::Ref<const Eigen::VectorXd>& x1,
                          const Eigen::Ref<const Eigen::VectorXd>& x2) {
    if (x1.size() != x2.size()) fail(ErrorKind::Shape, "kernel inputs differ in dimension");
    return spec.kernel(x1, x2);
}

}  // namespace evars::gpr
