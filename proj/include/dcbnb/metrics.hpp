#pragma once

#include "geometry.hpp"

#include <Eigen/Core>

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace dcbnb {

/// Registration quality summary. Fields that do not apply to a run are
/// left as NaN (e.g. rotation error for 2D).
struct EvalReport {
    double rmse = std::numeric_limits<double>::quiet_NaN();
    double translation_error = std::numeric_limits<double>::quiet_NaN();
    double rotation_error_deg = std::numeric_limits<double>::quiet_NaN();
    double runtime_seconds = 0.0;
    long iterations = 0;
    std::string certificate;
};

/// Root mean square residual of the transformed source points against
/// their paired targets.
template <typename TransformFn>
double rmse(TransformFn&& transform, const PointSet& source, const PointSet& target,
            const std::vector<std::pair<int, int>>& pairs) {
    if (pairs.empty()) throw std::invalid_argument("rmse: empty pair list");
    double sum = 0.0;
    for (const auto& [i, j] : pairs) {
        if (i < 0 || i >= source.size() || j < 0 || j >= target.size())
            throw std::invalid_argument("rmse: pair index out of range");
        const Eigen::VectorXd mapped = transform(source.point(i));
        sum += (mapped - target.point(j)).squaredNorm();
    }
    return std::sqrt(sum / static_cast<double>(pairs.size()));
}

/// Angle of the relative rotation between two orientation estimates,
/// in degrees within [0, 180].
inline double rotation_error_deg(const Eigen::Matrix3d& estimated,
                                 const Eigen::Matrix3d& reference) {
    const double c = ((estimated * reference.transpose()).trace() - 1.0) / 2.0;
    return std::acos(std::clamp(c, -1.0, 1.0)) * 180.0 / std::numbers::pi;
}

inline double translation_error(const Eigen::Vector3d& estimated,
                                const Eigen::Vector3d& reference) {
    return (estimated - reference).norm();
}

} // namespace dcbnb
