#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace dcbnb {

/// A partial one-to-one matching of fixed cardinality with its cost.
/// Pairs are (row, col), sorted by row; total_cost is the sum of the
/// original matrix entries over the pairs.
struct AssignmentResult {
    std::vector<std::pair<int, int>> pairs;
    double total_cost = 0.0;
};

namespace detail {

inline void check_klap_input(const Eigen::MatrixXd& cost, int n_p) {
    if (!cost.allFinite())
        throw std::invalid_argument("solve_klap: cost matrix has non-finite entries");
    const int n = static_cast<int>(cost.rows());
    const int m = static_cast<int>(cost.cols());
    if (n_p < 1) throw std::invalid_argument("solve_klap: cardinality must be positive");
    if (n_p > std::min(n, m))
        throw std::invalid_argument("solve_klap: cardinality " + std::to_string(n_p) +
                                    " exceeds min(" + std::to_string(n) + "," +
                                    std::to_string(m) + ")");
}

} // namespace detail

/// Minimum-cost selection of exactly n_p pairs under partial one-to-one
/// constraints (each row and column used at most once). Entries may be
/// negative.
///
/// Successive shortest augmenting paths with dual potentials: every free
/// row acts as a source of each Dijkstra pass, so the matching after k
/// augmentations is the optimal matching of cardinality k; stopping after
/// n_p of them solves the fixed-cardinality problem exactly. Entries are
/// shifted by the global minimum beforehand so reduced costs stay
/// nonnegative; the shift only offsets the total by n_p * shift.
inline AssignmentResult solve_klap(const Eigen::MatrixXd& cost, int n_p) {
    detail::check_klap_input(cost, n_p);
    const int n = static_cast<int>(cost.rows());
    const int m = static_cast<int>(cost.cols());
    const double shift = cost.minCoeff();
    constexpr double inf = std::numeric_limits<double>::infinity();

    // Row-major copy of the shifted (nonnegative) costs for tight loops.
    std::vector<double> c(static_cast<std::size_t>(n) * static_cast<std::size_t>(m));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j)
            c[static_cast<std::size_t>(i) * m + j] = cost(i, j) - shift;

    std::vector<double> u(static_cast<std::size_t>(n), 0.0);  // row potentials
    std::vector<double> v(static_cast<std::size_t>(m), 0.0);  // column potentials
    std::vector<int> row_match(static_cast<std::size_t>(n), -1);
    std::vector<int> col_match(static_cast<std::size_t>(m), -1);

    // Cheapest free-row offer per column (before subtracting v). Free rows
    // keep their potentials while free and the free set only shrinks, so the
    // offers stay valid until their source row gets matched.
    std::vector<double> offer(static_cast<std::size_t>(m), inf);
    std::vector<int> offer_row(static_cast<std::size_t>(m), -1);
    for (int j = 0; j < m; ++j)
        for (int i = 0; i < n; ++i) {
            const double d = c[static_cast<std::size_t>(i) * m + j];
            if (d < offer[static_cast<std::size_t>(j)]) {
                offer[static_cast<std::size_t>(j)] = d;
                offer_row[static_cast<std::size_t>(j)] = i;
            }
        }

    std::vector<double> dist(static_cast<std::size_t>(m));
    std::vector<double> dist_row(static_cast<std::size_t>(n));
    std::vector<int> pred(static_cast<std::size_t>(m));  // row preceding each column
    std::vector<char> done(static_cast<std::size_t>(m));

    for (int round = 0; round < n_p; ++round) {
        std::fill(done.begin(), done.end(), char{0});
        for (int j = 0; j < m; ++j) {
            dist[static_cast<std::size_t>(j)] = std::max(
                0.0, offer[static_cast<std::size_t>(j)] -
                         u[static_cast<std::size_t>(offer_row[static_cast<std::size_t>(j)])] -
                         v[static_cast<std::size_t>(j)]);
            pred[static_cast<std::size_t>(j)] = offer_row[static_cast<std::size_t>(j)];
        }

        int free_col = -1;
        double free_dist = inf;
        while (true) {
            int jbest = -1;
            double dbest = inf;
            for (int j = 0; j < m; ++j)
                if (!done[static_cast<std::size_t>(j)] && dist[static_cast<std::size_t>(j)] < dbest) {
                    dbest = dist[static_cast<std::size_t>(j)];
                    jbest = j;
                }
            if (jbest == -1) break; // no reachable column left
            done[static_cast<std::size_t>(jbest)] = 1;
            const int owner = col_match[static_cast<std::size_t>(jbest)];
            if (owner == -1) {
                free_col = jbest;
                free_dist = dbest;
                break;
            }
            // Matched edge back to its row costs nothing, then relax onward.
            dist_row[static_cast<std::size_t>(owner)] = dbest;
            const double* crow = c.data() + static_cast<std::size_t>(owner) * m;
            const double uo = u[static_cast<std::size_t>(owner)];
            for (int j = 0; j < m; ++j) {
                if (done[static_cast<std::size_t>(j)]) continue;
                const double rc = crow[j] - uo - v[static_cast<std::size_t>(j)];
                const double nd = dbest + (rc > 0.0 ? rc : 0.0);
                if (nd < dist[static_cast<std::size_t>(j)]) {
                    dist[static_cast<std::size_t>(j)] = nd;
                    pred[static_cast<std::size_t>(j)] = owner;
                }
            }
        }
        if (free_col == -1)
            throw std::logic_error("solve_klap: no augmenting path found");

        // Fold the shortest-path distances into the potentials; distances
        // are capped at the path length so unreached nodes keep valid duals.
        for (int j = 0; j < m; ++j)
            v[static_cast<std::size_t>(j)] += std::min(dist[static_cast<std::size_t>(j)], free_dist);
        for (int i = 0; i < n; ++i) {
            if (row_match[static_cast<std::size_t>(i)] == -1) continue;
            const int j = row_match[static_cast<std::size_t>(i)];
            const double di = done[static_cast<std::size_t>(j)]
                                  ? dist_row[static_cast<std::size_t>(i)]
                                  : free_dist;
            u[static_cast<std::size_t>(i)] -= std::min(di, free_dist);
        }

        // Augment along the predecessor chain.
        int j = free_col;
        while (j != -1) {
            const int i = pred[static_cast<std::size_t>(j)];
            const int prev = row_match[static_cast<std::size_t>(i)];
            row_match[static_cast<std::size_t>(i)] = j;
            col_match[static_cast<std::size_t>(j)] = i;
            j = prev;
        }

        // Refresh the offers whose source row just left the free set.
        if (round + 1 < n_p) {
            for (int j = 0; j < m; ++j) {
                const int src = offer_row[static_cast<std::size_t>(j)];
                if (row_match[static_cast<std::size_t>(src)] == -1) continue;
                double best = inf;
                int best_row = -1;
                for (int i = 0; i < n; ++i) {
                    if (row_match[static_cast<std::size_t>(i)] != -1) continue;
                    const double d = c[static_cast<std::size_t>(i) * m + j];
                    if (d < best) {
                        best = d;
                        best_row = i;
                    }
                }
                offer[static_cast<std::size_t>(j)] = best;
                offer_row[static_cast<std::size_t>(j)] = best_row;
            }
        }
    }

    AssignmentResult result;
    result.pairs.reserve(static_cast<std::size_t>(n_p));
    for (int i = 0; i < n; ++i)
        if (row_match[static_cast<std::size_t>(i)] != -1)
            result.pairs.emplace_back(i, row_match[static_cast<std::size_t>(i)]);
    for (const auto& [i, j] : result.pairs) result.total_cost += cost(i, j);
    return result;
}

/// Exhaustive reference solver for the same problem. Enumerates every
/// size-n_p partial one-to-one pair set; refuses instances beyond the
/// stated enumeration budget. Independent of solve_klap by construction.
inline AssignmentResult brute_force_klap(const Eigen::MatrixXd& cost, int n_p,
                                         double enumeration_guard = 1e7) {
    detail::check_klap_input(cost, n_p);
    const int n = static_cast<int>(cost.rows());
    const int m = static_cast<int>(cost.cols());

    // #row-subsets * #injective column arrangements
    double subsets = 1.0, injections = 1.0;
    for (int k = 0; k < n_p; ++k) {
        subsets *= static_cast<double>(n - k) / static_cast<double>(k + 1);
        injections *= static_cast<double>(m - k);
    }
    if (subsets * injections > enumeration_guard)
        throw std::invalid_argument("brute_force_klap: instance too large to enumerate");

    std::vector<int> chosen_cols;
    std::vector<char> col_used(static_cast<std::size_t>(m), char{0});
    std::vector<std::pair<int, int>> current, best;
    double best_cost = std::numeric_limits<double>::infinity();

    auto recurse = [&](auto&& self, int row, int remaining, double acc) -> void {
        if (remaining == 0) {
            if (acc < best_cost) {
                best_cost = acc;
                best = current;
            }
            return;
        }
        if (n - row < remaining) return;
        self(self, row + 1, remaining, acc); // leave this row unmatched
        for (int j = 0; j < m; ++j) {
            if (col_used[static_cast<std::size_t>(j)]) continue;
            col_used[static_cast<std::size_t>(j)] = 1;
            current.emplace_back(row, j);
            self(self, row + 1, remaining - 1, acc + cost(row, j));
            current.pop_back();
            col_used[static_cast<std::size_t>(j)] = 0;
        }
    };
    recurse(recurse, 0, n_p, 0.0);

    AssignmentResult result;
    result.pairs = std::move(best);
    result.total_cost = best_cost;
    return result;
}

} // namespace dcbnb
