#pragma once

#include "geometry.hpp"
#include "klap.hpp"

#include <Eigen/Core>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <utility>
#include <vector>

namespace dcbnb {

namespace detail {

/// Exact k-cardinality assignment value for costs of the form
///   c(i,j) = row_base[i] + col_base[j] - 2 * s[i] * r[j]
/// with s and r sorted ascending. Such matrices satisfy the Monge
/// property, so some optimal selection is non-crossing and a cubic DP
/// over (rows, columns, matches) finds the optimum.
inline double monge_klap_value(const std::vector<double>& row_base,
                               const std::vector<double>& s,
                               const std::vector<double>& col_base,
                               const std::vector<double>& r, int k) {
    const int n = static_cast<int>(s.size());
    const int m = static_cast<int>(r.size());
    constexpr double inf = std::numeric_limits<double>::infinity();

    if (k == n && k == m) {
        // Full square matching: the non-crossing solution is the sorted pairing.
        double total = 0.0;
        for (int i = 0; i < n; ++i)
            total += row_base[static_cast<std::size_t>(i)] +
                     col_base[static_cast<std::size_t>(i)] -
                     2.0 * s[static_cast<std::size_t>(i)] * r[static_cast<std::size_t>(i)];
        return total;
    }

    // best[j][t]: minimum cost over the first i rows and first j columns
    // with exactly t matches; rolled over i.
    const int cols = m + 1;
    const int slots = k + 1;
    std::vector<double> prev(static_cast<std::size_t>(cols) * slots, inf);
    std::vector<double> cur(static_cast<std::size_t>(cols) * slots, inf);
    for (int j = 0; j <= m; ++j) prev[static_cast<std::size_t>(j) * slots] = 0.0;

    for (int i = 1; i <= n; ++i) {
        const double base = row_base[static_cast<std::size_t>(i - 1)];
        const double si = s[static_cast<std::size_t>(i - 1)];
        cur[0] = 0.0;
        for (int t = 1; t <= k; ++t) cur[static_cast<std::size_t>(t)] = inf;
        for (int j = 1; j <= m; ++j) {
            const double pair_cost =
                base + col_base[static_cast<std::size_t>(j - 1)] -
                2.0 * si * r[static_cast<std::size_t>(j - 1)];
            const std::size_t at = static_cast<std::size_t>(j) * slots;
            const std::size_t left = at - slots;
            cur[at] = 0.0;
            const int tmax = std::min(k, std::min(i, j));
            for (int t = 1; t <= tmax; ++t) {
                double best = prev[at + static_cast<std::size_t>(t)];
                best = std::min(best, cur[left + static_cast<std::size_t>(t)]);
                best = std::min(best, prev[left + static_cast<std::size_t>(t - 1)] + pair_cost);
                cur[at + static_cast<std::size_t>(t)] = best;
            }
            for (int t = tmax + 1; t <= k; ++t)
                cur[at + static_cast<std::size_t>(t)] = inf;
        }
        std::swap(prev, cur);
    }
    return prev[static_cast<std::size_t>(m) * slots + k];
}

} // namespace detail

/// Pairwise cost for rotation-free 3D translation estimation: the squared
/// mismatch between the norm of a translated source point and the norm of
/// a target point. Point norms are invariant to rotation, so the optimal
/// translation can be searched before any rotation is known.
///
/// DC split: ||x+t||^2 is convex; -2*||y||*||x+t|| + ||y||^2 is concave
/// (negated norm plus a constant). The concave part has a kink where
/// x + t = 0; it is only ever evaluated, never linearized, so the kink is
/// harmless. The convex part's gradient 2(x+t) is smooth everywhere.
class Rif3DModel {
public:
    Rif3DModel(PointSet source, const PointSet& target)
        : source_(std::move(source)),
          target_norms_(target.points().colwise().norm().transpose()) {
        if (source_.dim() != 3 || target.dim() != 3)
            throw std::invalid_argument("Rif3DModel: point sets must be 3D");
        sorted_norms_.assign(target_norms_.data(), target_norms_.data() + target_norms_.size());
        std::sort(sorted_norms_.begin(), sorted_norms_.end());
        sorted_norms_sq_.resize(sorted_norms_.size());
        for (std::size_t j = 0; j < sorted_norms_.size(); ++j)
            sorted_norms_sq_[j] = sorted_norms_[j] * sorted_norms_[j];
    }

    int param_dim() const { return 3; }
    int source_size() const { return source_.size(); }
    int target_size() const { return static_cast<int>(target_norms_.size()); }
    const PointSet& source() const { return source_; }
    const Eigen::VectorXd& target_norms() const { return target_norms_; }

    double eval_true(int i, int j, const Eigen::VectorXd& t) const {
        const double s = (source_.point(i) + t).norm();
        const double r = target_norms_[j];
        return (s - r) * (s - r);
    }

    double eval_cvx(int i, int, const Eigen::VectorXd& t) const {
        return (source_.point(i) + t).squaredNorm();
    }

    double eval_cav(int i, int j, const Eigen::VectorXd& t) const {
        const double r = target_norms_[j];
        return -2.0 * r * (source_.point(i) + t).norm() + r * r;
    }

    Eigen::VectorXd grad_cvx(int i, int, const Eigen::VectorXd& t) const {
        return 2.0 * (source_.point(i) + t);
    }

    Eigen::MatrixXd eval_cav_matrix(const Eigen::VectorXd& t) const {
        const Eigen::VectorXd s = translated_norms(t);
        return Eigen::VectorXd::Ones(source_size()) *
                   target_norms_.cwiseProduct(target_norms_).transpose() -
               2.0 * s * target_norms_.transpose();
    }

    Eigen::MatrixXd eval_true_matrix(const Eigen::VectorXd& t) const {
        const Eigen::VectorXd s = translated_norms(t);
        Eigen::MatrixXd diff = s * Eigen::VectorXd::Ones(target_size()).transpose() -
                               Eigen::VectorXd::Ones(source_size()) * target_norms_.transpose();
        return diff.cwiseProduct(diff);
    }

    /// Exact assignment value over the box minorant anchored at `anchor`,
    /// evaluated at translation `t`. The minorant decomposes per pair as
    /// row(i) + col(j) - 2*s_i*r_j, so the assignment reduces to the sorted
    /// Monge problem instead of a general solve. Matches the generic
    /// matrix-plus-assignment route to rounding.
    double minorant_assignment(const Eigen::VectorXd& anchor, const Eigen::VectorXd& t,
                               int n_p) const {
        const int n = source_size();
        const int m = target_size();
        if (n_p < 1 || n_p > std::min(n, m))
            throw std::invalid_argument("minorant_assignment: infeasible cardinality");

        const Eigen::Vector3d delta = Eigen::Vector3d(t) - Eigen::Vector3d(anchor);
        std::vector<std::pair<double, double>> rows(static_cast<std::size_t>(n)); // (s_i, p_i)
        for (int i = 0; i < n; ++i) {
            const Eigen::Vector3d at_anchor = Eigen::Vector3d(source_.point(i)) +
                                              Eigen::Vector3d(anchor);
            rows[static_cast<std::size_t>(i)] = {
                (at_anchor + delta).norm(),
                at_anchor.squaredNorm() + 2.0 * at_anchor.dot(delta)};
        }
        std::sort(rows.begin(), rows.end());
        std::vector<double> s(static_cast<std::size_t>(n)), p(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
            s[static_cast<std::size_t>(i)] = rows[static_cast<std::size_t>(i)].first;
            p[static_cast<std::size_t>(i)] = rows[static_cast<std::size_t>(i)].second;
        }
        return detail::monge_klap_value(p, s, sorted_norms_sq_, sorted_norms_, n_p);
    }

private:
    Eigen::VectorXd translated_norms(const Eigen::VectorXd& t) const {
        return (source_.points().colwise() + Eigen::Vector3d(t)).colwise().norm().transpose();
    }

    PointSet source_;
    Eigen::VectorXd target_norms_;
    std::vector<double> sorted_norms_;
    std::vector<double> sorted_norms_sq_;
};

/// Default translation box: per coordinate, every offset mapping some
/// source coordinate into the target range, inflated 10%.
inline SearchBox rif3d_default_box(const PointSet& source, const PointSet& target) {
    if (source.dim() != 3 || target.dim() != 3)
        throw std::invalid_argument("rif3d_default_box: point sets must be 3D");
    const Eigen::VectorXd lo = target.bbox_min() - source.bbox_max();
    const Eigen::VectorXd hi = target.bbox_max() - source.bbox_min();
    return SearchBox(lo, hi).inflated(1.1);
}

/// Recover the rotation left open by the translation-only search.
/// Correspondences come from the optimal norm-residual assignment at the
/// recovered translation; the rotation is then the orthogonal-Procrustes
/// fit (SVD, determinant corrected to +1) mapping the translated source
/// points onto their matched targets. The returned transform maps source
/// points directly into the target frame.
///
/// Norm-based matching cannot distinguish points that share a norm, so
/// this is a best-effort completion: accuracy guarantees attach to the
/// translation, not to the rotation.
inline Transform3DRigid recover_rotation(const PointSet& source, const PointSet& target,
                                         const Eigen::Vector3d& t_star, int n_p) {
    if (source.dim() != 3 || target.dim() != 3)
        throw std::invalid_argument("recover_rotation: point sets must be 3D");
    if (!t_star.allFinite())
        throw std::invalid_argument("recover_rotation: translation must be finite");

    const Eigen::VectorXd src_norms =
        (source.points().colwise() + t_star).colwise().norm().transpose();
    const Eigen::VectorXd tgt_norms = target.points().colwise().norm().transpose();
    Eigen::MatrixXd diff = src_norms * Eigen::VectorXd::Ones(target.size()).transpose() -
                           Eigen::VectorXd::Ones(source.size()) * tgt_norms.transpose();
    const AssignmentResult match = solve_klap(diff.cwiseProduct(diff), n_p);

    const int k = static_cast<int>(match.pairs.size());
    if (k < 3)
        throw std::invalid_argument("recover_rotation: need at least 3 matched pairs");

    Eigen::MatrixXd a(3, k), b(3, k);
    for (int p = 0; p < k; ++p) {
        a.col(p) = source.point(match.pairs[static_cast<std::size_t>(p)].first) + t_star;
        b.col(p) = target.point(match.pairs[static_cast<std::size_t>(p)].second);
    }
    const Eigen::Vector3d a_mean = a.rowwise().mean();
    const Eigen::Vector3d b_mean = b.rowwise().mean();
    a.colwise() -= a_mean;
    b.colwise() -= b_mean;

    const Eigen::Matrix3d h = a * b.transpose();
    Eigen::JacobiSVD<Eigen::Matrix3d> svd(h, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Eigen::VectorXd& sv = svd.singularValues();
    if (sv[1] <= 1e-12 * std::max(1.0, sv[0]))
        throw std::invalid_argument("recover_rotation: matched pairs are collinear");

    Eigen::Matrix3d d = Eigen::Matrix3d::Identity();
    d(2, 2) = (svd.matrixV() * svd.matrixU().transpose()).determinant() < 0 ? -1.0 : 1.0;
    const Eigen::Matrix3d rotation = svd.matrixV() * d * svd.matrixU().transpose();

    // y ~ R*(x + t_star) + residual shift between the matched centroids.
    const Eigen::Vector3d translation = b_mean - rotation * a_mean + rotation * t_star;
    return Transform3DRigid(rotation, translation);
}

} // namespace dcbnb
