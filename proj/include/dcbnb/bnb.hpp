#pragma once

#include "dc_bound.hpp"
#include "geometry.hpp"
#include "parallel.hpp"

#include <Eigen/Core>

#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace dcbnb {

struct BnBProgress {
    long iteration = 0;
    std::size_t active_boxes = 0;
    double incumbent_value = 0.0;
    double min_active_lb = 0.0; // NaN when the active set is empty
    double elapsed_seconds = 0.0;
};

struct BnBConfig {
    double epsilon = 1e-6;    // absolute optimality gap
    long max_iterations = std::numeric_limits<long>::max();
    double max_seconds = std::numeric_limits<double>::infinity();
    int n_p = 1;              // assignment cardinality
    int threads = 1;          // parallel vertex evaluations per bound
    std::function<void(const BnBProgress&)> on_progress;
    std::function<void(const SearchBox&, double)> on_prune; // box and its stored bound
};

struct BnBStats {
    long iterations = 0;
    long boxes_bounded = 0;
    long boxes_pruned = 0;
    long vertex_lap_solves = 0;
    long objective_evaluations = 0;
    double elapsed_seconds = 0.0;
};

struct BnBResult {
    Eigen::VectorXd theta;
    double value = std::numeric_limits<double>::infinity();
    std::string certificate;     // "eps-optimal" or "budget"
    double min_active_lb = std::numeric_limits<double>::quiet_NaN();
    double certified_lb = -std::numeric_limits<double>::infinity();
    BnBStats stats;
};

/// Active-box collection for best-first branching: ordered by lower bound,
/// ties resolved toward the earlier insertion.
class BnBState {
public:
    struct Entry {
        double lb;
        long seq;
        SearchBox box;
    };

    void push(SearchBox box, double lb) {
        entries_.insert(Entry{lb, next_seq_++, std::move(box)});
    }

    bool empty() const { return entries_.empty(); }
    std::size_t size() const { return entries_.size(); }

    double min_lb() const {
        return entries_.empty() ? std::numeric_limits<double>::quiet_NaN()
                                : entries_.begin()->lb;
    }

    const Entry& select_branch_box() const {
        if (entries_.empty())
            throw std::logic_error("BnBState: no active box to branch");
        return *entries_.begin();
    }

    Entry pop_best() {
        if (entries_.empty())
            throw std::logic_error("BnBState: no active box to branch");
        auto it = entries_.begin();
        Entry e = *it;
        entries_.erase(it);
        return e;
    }

    /// Remove every entry whose bound reaches the threshold; reports each
    /// removal. Returns the number removed.
    template <typename Callback>
    long prune_at_or_above(double threshold, Callback&& report) {
        long removed = 0;
        while (!entries_.empty()) {
            auto last = std::prev(entries_.end());
            if (last->lb < threshold) break;
            report(last->box, last->lb);
            entries_.erase(last);
            ++removed;
        }
        return removed;
    }

private:
    struct Order {
        bool operator()(const Entry& a, const Entry& b) const {
            if (a.lb != b.lb) return a.lb < b.lb;
            return a.seq < b.seq;
        }
    };
    std::set<Entry, Order> entries_;
    long next_seq_ = 0;
};

// Boxes thinner than this along every axis are treated as converged
// points: their bound already matches their evaluation to rounding.
inline constexpr double kAtomEdge = 1e-12;

/// Best-first branch-and-bound over the box minorant. Each iteration
/// bounds the newest boxes, refreshes the incumbent from their minimizing
/// vertices, prunes everything within epsilon of the incumbent, and
/// bisects the active box with the smallest bound. Natural exhaustion
/// certifies the incumbent to within epsilon of the global minimum; budget
/// exits report the smallest still-active bound instead.
template <CostModel Model>
BnBResult solve(const Model& model, const SearchBox& initial_box, const BnBConfig& cfg) {
    if (!(cfg.epsilon > 0.0)) throw std::invalid_argument("solve: epsilon must be positive");
    if (cfg.n_p < 1) throw std::invalid_argument("solve: n_p must be at least 1");
    if (cfg.n_p > std::min(model.source_size(), model.target_size()))
        throw std::invalid_argument("solve: n_p exceeds the smaller point-set size");
    if (initial_box.dim() != model.param_dim())
        throw std::invalid_argument("solve: box dimension does not match model");

    const auto t0 = std::chrono::steady_clock::now();
    auto elapsed = [&t0] {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    };

    ThreadPool pool(std::max(0, cfg.threads - 1));
    ThreadPool* vertex_pool = cfg.threads > 1 ? &pool : nullptr;

    BnBResult result;
    BnBState active;
    std::vector<SearchBox> newest{initial_box};
    auto drop = [&](const SearchBox& box, double lb) {
        ++result.stats.boxes_pruned;
        if (cfg.on_prune) cfg.on_prune(box, lb);
    };

    for (long iter = 1;; ++iter) {
        result.stats.iterations = iter;

        for (const SearchBox& box : newest) {
            const LowerBoundResult lbres = lower_bound(model, box, cfg.n_p, vertex_pool);
            ++result.stats.boxes_bounded;
            result.stats.vertex_lap_solves += lbres.lap_solves;

            const double value = eval_objective(model, lbres.minimizer, cfg.n_p);
            ++result.stats.objective_evaluations;
            if (value < result.value) {
                result.value = value;
                result.theta = lbres.minimizer;
            }

            if (box.longest_width() < kAtomEdge)
                drop(box, lbres.value);
            else
                active.push(box, lbres.value);
        }
        newest.clear();

        result.stats.boxes_pruned +=
            active.prune_at_or_above(result.value - cfg.epsilon,
                                     [&](const SearchBox& box, double lb) {
                                         if (cfg.on_prune) cfg.on_prune(box, lb);
                                     });

        if (cfg.on_progress)
            cfg.on_progress(BnBProgress{iter, active.size(), result.value,
                                        active.min_lb(), elapsed()});

        if (active.empty()) {
            result.certificate = "eps-optimal";
            result.certified_lb = result.value - cfg.epsilon;
            break;
        }
        if (iter >= cfg.max_iterations || elapsed() >= cfg.max_seconds) {
            result.certificate = "budget";
            result.min_active_lb = active.min_lb();
            result.certified_lb = std::min(result.min_active_lb, result.value - cfg.epsilon);
            break;
        }

        const BnBState::Entry branched = active.pop_best();
        auto [left, right] = bisect_longest_edge(branched.box);
        newest.push_back(std::move(left));
        newest.push_back(std::move(right));
    }

    result.stats.elapsed_seconds = elapsed();
    return result;
}

} // namespace dcbnb
