#pragma once

#include "geometry.hpp"
#include "klap.hpp"
#include "parallel.hpp"

#include <Eigen/Core>

#include <concepts>
#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

namespace dcbnb {

/// Pairwise registration cost split into a convex and a concave part:
///   eval_true(i,j,t) == eval_cvx(i,j,t) + eval_cav(i,j,t)
/// with grad_cvx a (sub)gradient of the convex part. Models are immutable
/// and safe to share across threads.
template <typename M>
concept CostModel = requires(const M& m, int i, int j, const Eigen::VectorXd& theta) {
    { m.param_dim() } -> std::convertible_to<int>;
    { m.source_size() } -> std::convertible_to<int>;
    { m.target_size() } -> std::convertible_to<int>;
    { m.eval_true(i, j, theta) } -> std::convertible_to<double>;
    { m.eval_cvx(i, j, theta) } -> std::convertible_to<double>;
    { m.eval_cav(i, j, theta) } -> std::convertible_to<double>;
    { m.grad_cvx(i, j, theta) } -> std::convertible_to<Eigen::VectorXd>;
};

/// Concave minorant of every pairwise cost over a box, anchored at the box
/// center: the convex part is replaced by its tangent plane there, the
/// concave part is kept exact. Agrees with the true cost at the anchor.
class Underestimator {
public:
    template <CostModel Model>
    Underestimator(const Model& model, Eigen::VectorXd anchor)
        : anchor_(std::move(anchor)),
          cvx_at_anchor_(model.source_size(), model.target_size()),
          grad_rows_(static_cast<Eigen::Index>(model.source_size()) * model.target_size(),
                     model.param_dim()) {
        const int n = model.source_size();
        const int m = model.target_size();
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < m; ++j) {
                cvx_at_anchor_(i, j) = model.eval_cvx(i, j, anchor_);
                grad_rows_.row(static_cast<Eigen::Index>(i) * m + j) =
                    model.grad_cvx(i, j, anchor_).transpose();
            }
    }

    const Eigen::VectorXd& anchor() const { return anchor_; }

    double linear_part(int i, int j, const Eigen::VectorXd& theta) const {
        const Eigen::Index idx = static_cast<Eigen::Index>(i) * cvx_at_anchor_.cols() + j;
        return cvx_at_anchor_(i, j) + grad_rows_.row(idx).dot(theta - anchor_);
    }

    /// Matrix of minorant values at theta, one entry per (source, target) pair.
    template <CostModel Model>
    Eigen::MatrixXd cost_matrix(const Model& model, const Eigen::VectorXd& theta) const {
        const int n = static_cast<int>(cvx_at_anchor_.rows());
        const int m = static_cast<int>(cvx_at_anchor_.cols());
        Eigen::VectorXd lin = grad_rows_ * (theta - anchor_);
        Eigen::MatrixXd costs =
            cvx_at_anchor_ +
            Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                           Eigen::RowMajor>>(lin.data(), n, m);
        if constexpr (requires { Model::concave_part_is_zero; }) {
            if constexpr (Model::concave_part_is_zero) return costs;
        }
        if constexpr (requires { model.eval_cav_matrix(theta); }) {
            costs += model.eval_cav_matrix(theta);
        } else {
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < m; ++j) costs(i, j) += model.eval_cav(i, j, theta);
        }
        return costs;
    }

private:
    Eigen::VectorXd anchor_;
    Eigen::MatrixXd cvx_at_anchor_; // n x m convex values at the anchor
    Eigen::MatrixXd grad_rows_;     // (n*m) x param_dim gradients at the anchor
};

/// Build the minorant for a box, anchored at its center.
template <CostModel Model>
Underestimator underestimate(const Model& model, const SearchBox& box) {
    if (box.dim() != model.param_dim())
        throw std::invalid_argument("underestimate: box dimension does not match model");
    return Underestimator(model, box.center());
}

/// Minorant value for one pair.
template <CostModel Model>
double eval_m(const Underestimator& u, const Model& model, int i, int j,
              const Eigen::VectorXd& theta) {
    return u.linear_part(i, j, theta) + model.eval_cav(i, j, theta);
}

/// True pairwise costs at theta as a matrix.
template <CostModel Model>
Eigen::MatrixXd true_cost_matrix(const Model& model, const Eigen::VectorXd& theta) {
    if constexpr (requires { model.eval_true_matrix(theta); }) {
        return model.eval_true_matrix(theta);
    } else {
        Eigen::MatrixXd costs(model.source_size(), model.target_size());
        for (int i = 0; i < model.source_size(); ++i)
            for (int j = 0; j < model.target_size(); ++j)
                costs(i, j) = model.eval_true(i, j, theta);
        return costs;
    }
}

/// Marginalized objective: optimal n_p-cardinality assignment cost over the
/// true pairwise costs at theta.
template <CostModel Model>
double eval_objective(const Model& model, const Eigen::VectorXd& theta, int n_p) {
    return solve_klap(true_cost_matrix(model, theta), n_p).total_cost;
}

/// Assignment realizing eval_objective, for reporting selected pairs.
template <CostModel Model>
AssignmentResult best_assignment(const Model& model, const Eigen::VectorXd& theta, int n_p) {
    return solve_klap(true_cost_matrix(model, theta), n_p);
}

struct LowerBoundResult {
    double value = 0.0;            // valid lower bound on the objective over the box
    Eigen::VectorXd minimizer;     // vertex attaining it (first in bitmask order on ties)
    int lap_solves = 0;            // assignment problems solved (one per vertex)
};

/// Box lower bound: the minorant of each pair is concave, a nonnegative
/// combination of concave functions is concave, and the pointwise minimum
/// over assignments stays concave -- so the minimum over the box sits at a
/// vertex. One assignment solve per vertex, minimum taken in bitmask order.
/// A pool parallelizes the vertex evaluations; each lands in its own slot
/// and the reduction stays in vertex order, so results match serial runs
/// exactly.
template <CostModel Model>
LowerBoundResult lower_bound(const Model& model, const SearchBox& box, int n_p,
                             ThreadPool* pool = nullptr) {
    if (box.dim() != model.param_dim())
        throw std::invalid_argument("lower_bound: box dimension does not match model");
    const int n_vertices = box.vertex_count();
    std::vector<double> z(static_cast<std::size_t>(n_vertices));

    std::function<void(int)> eval_vertex;
    [[maybe_unused]] std::optional<Underestimator> u;
    constexpr bool structured =
        requires(const Model& mm, const Eigen::VectorXd& th) {
            { mm.minorant_assignment(th, th, 0) } -> std::convertible_to<double>;
        };
    if constexpr (structured) {
        const Eigen::VectorXd anchor = box.center();
        eval_vertex = [&model, &box, &z, n_p, anchor](int mask) {
            z[static_cast<std::size_t>(mask)] =
                model.minorant_assignment(anchor, box.vertex(mask), n_p);
        };
    } else {
        u.emplace(model, box.center());
        eval_vertex = [&model, &box, &z, &u, n_p](int mask) {
            const Eigen::VectorXd v = box.vertex(mask);
            z[static_cast<std::size_t>(mask)] =
                solve_klap(u->cost_matrix(model, v), n_p).total_cost;
        };
    }
    if (pool) {
        pool->run(n_vertices, eval_vertex);
    } else {
        for (int mask = 0; mask < n_vertices; ++mask) eval_vertex(mask);
    }

    LowerBoundResult result;
    int best = 0;
    for (int mask = 1; mask < n_vertices; ++mask)
        if (z[static_cast<std::size_t>(mask)] < z[static_cast<std::size_t>(best)]) best = mask;
    result.value = z[static_cast<std::size_t>(best)];
    result.minimizer = box.vertex(best);
    result.lap_solves = n_vertices;
    return result;
}

} // namespace dcbnb
