#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace dcbnb {

/// Fixed set of 2D or 3D points, stored column-wise. Immutable after
/// construction. Optional per-point integer labels carry provenance
/// (e.g. index in a generating prototype, -1 for clutter).
class PointSet {
public:
    PointSet(Eigen::MatrixXd points, std::vector<int> labels = {})
        : points_(std::move(points)), labels_(std::move(labels)) {
        const auto dim = points_.rows();
        if (dim != 2 && dim != 3)
            throw std::invalid_argument("PointSet: dimension must be 2 or 3, got " +
                                        std::to_string(dim));
        if (points_.cols() < 1)
            throw std::invalid_argument("PointSet: need at least one point");
        if (!points_.allFinite())
            throw std::invalid_argument("PointSet: coordinates must be finite");
        if (!labels_.empty() && labels_.size() != static_cast<std::size_t>(points_.cols()))
            throw std::invalid_argument("PointSet: label count does not match point count");
    }

    int dim() const { return static_cast<int>(points_.rows()); }
    int size() const { return static_cast<int>(points_.cols()); }

    Eigen::VectorXd point(int i) const { return points_.col(i); }
    const Eigen::MatrixXd& points() const { return points_; }

    bool has_labels() const { return !labels_.empty(); }
    const std::vector<int>& labels() const { return labels_; }
    int label(int i) const { return labels_.at(static_cast<std::size_t>(i)); }

    Eigen::VectorXd bbox_min() const { return points_.rowwise().minCoeff(); }
    Eigen::VectorXd bbox_max() const { return points_.rowwise().maxCoeff(); }

    double max_norm() const { return points_.colwise().norm().maxCoeff(); }

    /// Largest pairwise distance. O(n^2); fine at the set sizes used here.
    double diameter() const {
        double best = 0.0;
        for (int i = 0; i < size(); ++i)
            for (int j = i + 1; j < size(); ++j)
                best = std::max(best, (points_.col(i) - points_.col(j)).norm());
        return best;
    }

private:
    Eigen::MatrixXd points_;  // dim x n
    std::vector<int> labels_; // empty or size n
};

/// Axis-aligned box over transformation parameters. Degenerate
/// (zero-width) edges are allowed.
class SearchBox {
public:
    SearchBox(Eigen::VectorXd lower, Eigen::VectorXd upper)
        : lower_(std::move(lower)), upper_(std::move(upper)) {
        if (lower_.size() == 0 || lower_.size() != upper_.size())
            throw std::invalid_argument("SearchBox: bound vectors empty or mismatched");
        if (!lower_.allFinite() || !upper_.allFinite())
            throw std::invalid_argument("SearchBox: bounds must be finite");
        if ((lower_.array() > upper_.array()).any())
            throw std::invalid_argument("SearchBox: lower bound exceeds upper bound");
        if (lower_.size() > 30)
            throw std::invalid_argument("SearchBox: parameter dimension too large");
    }

    int dim() const { return static_cast<int>(lower_.size()); }
    const Eigen::VectorXd& lower() const { return lower_; }
    const Eigen::VectorXd& upper() const { return upper_; }

    Eigen::VectorXd center() const { return 0.5 * (lower_ + upper_); }
    Eigen::VectorXd widths() const { return upper_ - lower_; }
    double width(int k) const { return upper_[k] - lower_[k]; }

    int longest_edge() const {
        int best = 0;
        for (int k = 1; k < dim(); ++k)
            if (width(k) > width(best)) best = k; // ties keep the lowest index
        return best;
    }

    double longest_width() const { return width(longest_edge()); }

    double volume() const { return widths().prod(); }

    bool contains(const Eigen::VectorXd& theta, double tol = 0.0) const {
        return (theta.array() >= lower_.array() - tol).all() &&
               (theta.array() <= upper_.array() + tol).all();
    }

    int vertex_count() const { return 1 << dim(); }

    /// Corner selected by a bitmask: bit k picks upper (1) or lower (0)
    /// along dimension k.
    Eigen::VectorXd vertex(int mask) const {
        Eigen::VectorXd v(dim());
        for (int k = 0; k < dim(); ++k)
            v[k] = (mask >> k) & 1 ? upper_[k] : lower_[k];
        return v;
    }

    /// Widen every edge by the given relative factor about the center.
    SearchBox inflated(double factor) const {
        const Eigen::VectorXd c = center();
        const Eigen::VectorXd h = 0.5 * factor * widths();
        return SearchBox(c - h, c + h);
    }

private:
    Eigen::VectorXd lower_;
    Eigen::VectorXd upper_;
};

/// All 2^dim corners in bitmask order. Duplicates are retained for
/// degenerate edges so the ordering is stable.
inline std::vector<Eigen::VectorXd> box_vertices(const SearchBox& box) {
    std::vector<Eigen::VectorXd> verts;
    verts.reserve(static_cast<std::size_t>(box.vertex_count()));
    for (int mask = 0; mask < box.vertex_count(); ++mask)
        verts.push_back(box.vertex(mask));
    return verts;
}

/// Split at the midpoint of the widest edge (lowest index on ties).
/// The children partition the parent. Throws for a point box.
inline std::pair<SearchBox, SearchBox> bisect_longest_edge(const SearchBox& box) {
    const int k = box.longest_edge();
    if (box.width(k) <= 0.0)
        throw std::invalid_argument("bisect_longest_edge: box has no positive-width edge");
    const double mid = 0.5 * (box.lower()[k] + box.upper()[k]);
    Eigen::VectorXd left_upper = box.upper();
    left_upper[k] = mid;
    Eigen::VectorXd right_lower = box.lower();
    right_lower[k] = mid;
    return {SearchBox(box.lower(), left_upper), SearchBox(right_lower, box.upper())};
}

/// Per-point design matrix of the 2D similarity map. The transform
/// parameters are theta = (s*cos(phi), s*sin(phi), tx, ty), so the mapped
/// point is jacobian2d(x) * theta.
inline Eigen::Matrix<double, 2, 4> jacobian2d(const Eigen::Vector2d& x) {
    Eigen::Matrix<double, 2, 4> j;
    j << x[0], -x[1], 1.0, 0.0,
         x[1],  x[0], 0.0, 1.0;
    return j;
}

inline Eigen::Vector2d apply_similarity(const Eigen::Vector4d& theta,
                                        const Eigen::Vector2d& x) {
    return jacobian2d(x) * theta;
}

/// 2D similarity transform in linear parametrisation.
struct Transform2DSimilarity {
    Eigen::Vector4d theta = Eigen::Vector4d::Zero();

    double scale() const { return std::hypot(theta[0], theta[1]); }
    double angle() const { return std::atan2(theta[1], theta[0]); }
    Eigen::Vector2d translation() const { return theta.tail<2>(); }

    Eigen::Vector2d apply(const Eigen::Vector2d& x) const {
        return apply_similarity(theta, x);
    }
};

/// Proper rigid motion in 3D; the rotation is validated on construction.
struct Transform3DRigid {
    Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
    Eigen::Vector3d translation = Eigen::Vector3d::Zero();

    Transform3DRigid() = default;
    Transform3DRigid(const Eigen::Matrix3d& r, const Eigen::Vector3d& t)
        : rotation(r), translation(t) {
        if ((r * r.transpose() - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() > 1e-9)
            throw std::invalid_argument("Transform3DRigid: rotation is not orthonormal");
        if (std::abs(r.determinant() - 1.0) > 1e-9)
            throw std::invalid_argument("Transform3DRigid: rotation must have determinant +1");
    }

    Eigen::Vector3d apply(const Eigen::Vector3d& x) const {
        return rotation * x + translation;
    }
};

} // namespace dcbnb
