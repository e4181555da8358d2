#pragma once

#include "geometry.hpp"

#include <Eigen/Core>

#include <stdexcept>
#include <vector>

namespace dcbnb {

/// Pairwise cost for 2D similarity registration: the squared residual of
/// the linearly parametrised similarity map against each target point.
/// The cost is convex in the parameters, so the concave part is zero and
/// the box minorant is the plain first-order expansion.
class Sim2DModel {
public:
    static constexpr bool concave_part_is_zero = true;

    Sim2DModel(PointSet source, PointSet target)
        : source_(std::move(source)), target_(std::move(target)) {
        if (source_.dim() != 2 || target_.dim() != 2)
            throw std::invalid_argument("Sim2DModel: point sets must be 2D");
        jacobians_.reserve(static_cast<std::size_t>(source_.size()));
        for (int i = 0; i < source_.size(); ++i)
            jacobians_.push_back(jacobian2d(source_.point(i)));
    }

    int param_dim() const { return 4; }
    int source_size() const { return source_.size(); }
    int target_size() const { return target_.size(); }
    const PointSet& source() const { return source_; }
    const PointSet& target() const { return target_; }
    const Eigen::Matrix<double, 2, 4>& jacobian(int i) const {
        return jacobians_[static_cast<std::size_t>(i)];
    }

    double eval_true(int i, int j, const Eigen::VectorXd& theta) const {
        return (jacobians_[static_cast<std::size_t>(i)] * theta -
                target_.point(j))
            .squaredNorm();
    }

    double eval_cvx(int i, int j, const Eigen::VectorXd& theta) const {
        return eval_true(i, j, theta);
    }

    double eval_cav(int, int, const Eigen::VectorXd&) const { return 0.0; }

    Eigen::VectorXd grad_cvx(int i, int j, const Eigen::VectorXd& theta) const {
        const auto& jac = jacobians_[static_cast<std::size_t>(i)];
        return 2.0 * jac.transpose() * (jac * theta - target_.point(j));
    }

    Eigen::MatrixXd eval_true_matrix(const Eigen::VectorXd& theta) const {
        const int n = source_size();
        const int m = target_size();
        Eigen::MatrixXd mapped(2, n);
        for (int i = 0; i < n; ++i)
            mapped.col(i) = jacobians_[static_cast<std::size_t>(i)] * theta;
        Eigen::MatrixXd costs(n, m);
        for (int i = 0; i < n; ++i)
            costs.row(i) =
                (target_.points().colwise() - Eigen::Vector2d(mapped.col(i)))
                    .colwise()
                    .squaredNorm();
        return costs;
    }

private:
    PointSet source_;
    PointSet target_;
    std::vector<Eigen::Matrix<double, 2, 4>> jacobians_;
};

/// Default parameter box for the similarity search. Scale and rotation
/// live in [-s_max, s_max]^2; the translation range comes from the target
/// bounding box widened by the largest rotated-and-scaled source radius,
/// then inflated 10%. Any transform placing the scaled source inside the
/// target bounding box is covered.
inline SearchBox sim2d_default_box(const PointSet& source, const PointSet& target,
                                   double s_max = 1.5) {
    if (source.dim() != 2 || target.dim() != 2)
        throw std::invalid_argument("sim2d_default_box: point sets must be 2D");
    const double reach = s_max * source.max_norm();
    Eigen::Vector4d lo, hi;
    lo << -s_max, -s_max, target.bbox_min()[0] - reach, target.bbox_min()[1] - reach;
    hi << s_max, s_max, target.bbox_max()[0] + reach, target.bbox_max()[1] + reach;
    return SearchBox(lo, hi).inflated(1.1);
}

} // namespace dcbnb
