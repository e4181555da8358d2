#pragma once

#include "geometry.hpp"
#include "point_io.hpp"

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <numbers>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace dcbnb {

enum class Regime {
    deformation,
    noise,
    mixed_outliers,
    separate_outliers,
    occlusion_outliers,
};

inline const char* to_string(Regime r) {
    switch (r) {
        case Regime::deformation: return "deformation";
        case Regime::noise: return "noise";
        case Regime::mixed_outliers: return "mixed_outliers";
        case Regime::separate_outliers: return "separate_outliers";
        case Regime::occlusion_outliers: return "occlusion_outliers";
    }
    return "?";
}

inline Regime parse_regime(const std::string& name) {
    if (name == "deformation") return Regime::deformation;
    if (name == "noise") return Regime::noise;
    if (name == "mixed_outliers") return Regime::mixed_outliers;
    if (name == "separate_outliers") return Regime::separate_outliers;
    if (name == "occlusion_outliers") return Regime::occlusion_outliers;
    throw std::invalid_argument("unknown regime: " + name);
}

struct SynthConfig {
    std::uint64_t seed = 0;
    Regime regime = Regime::noise;
    double level = 0.0;      // regime-specific severity, scaled by prototype diameter
    double scale_min = 0.5;  // ground-truth scale range
    double scale_max = 1.5;
    int dims = 2;
};

/// Scaled rotation plus translation, the transform family used for
/// ground truths (scale fixed to 1 makes it rigid).
struct GroundTruth {
    int dim = 2;
    double scale = 1.0;
    Eigen::MatrixXd rotation;     // dim x dim
    Eigen::VectorXd translation;  // dim

    Eigen::VectorXd apply(const Eigen::VectorXd& x) const {
        return scale * rotation * x + translation;
    }

    /// Linear similarity parameters (2D only).
    Eigen::Vector4d theta2d() const {
        if (dim != 2) throw std::logic_error("theta2d: ground truth is not 2D");
        return {scale * rotation(0, 0), scale * rotation(1, 0), translation[0],
                translation[1]};
    }
};

struct SynthInstance {
    PointSet source;
    PointSet target;
    GroundTruth truth;
    std::vector<std::pair<int, int>> inlier_pairs; // (source index, target index)
    int n_p_truth = 0;
};

namespace detail {

inline Eigen::MatrixXd random_rotation(int dim, std::mt19937_64& rng) {
    if (dim == 2) {
        std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
        const double phi = angle(rng);
        Eigen::Matrix2d r;
        r << std::cos(phi), -std::sin(phi), std::sin(phi), std::cos(phi);
        return r;
    }
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::Vector4d q;
    do {
        for (int k = 0; k < 4; ++k) q[k] = gauss(rng);
    } while (q.norm() < 1e-6);
    q.normalize();
    return Eigen::Quaterniond(q[0], q[1], q[2], q[3]).toRotationMatrix();
}

inline Eigen::VectorXd random_unit_vector(int dim, std::mt19937_64& rng) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::VectorXd v(dim);
    do {
        for (int k = 0; k < dim; ++k) v[k] = gauss(rng);
    } while (v.norm() < 1e-6);
    return v / v.norm();
}

inline Eigen::MatrixXd sample_in_box(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi,
                                     int count, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    Eigen::MatrixXd pts(lo.size(), count);
    for (int i = 0; i < count; ++i)
        for (int k = 0; k < lo.size(); ++k)
            pts(k, i) = lo[k] + (hi[k] - lo[k]) * unit(rng);
    return pts;
}

} // namespace detail

/// Build one synthetic registration instance from a prototype shape.
/// Deterministic: identical (prototype, config) inputs give bit-identical
/// instances. The target side is perturbed per the regime, then the
/// ground-truth transform is applied to everything on the target side.
inline SynthInstance generate(const PointSet& prototype, const SynthConfig& cfg) {
    if (cfg.dims != prototype.dim())
        throw std::invalid_argument("generate: config dims do not match prototype");
    if (cfg.level < 0.0) throw std::invalid_argument("generate: level must be >= 0");
    if (!(cfg.scale_min > 0.0) || cfg.scale_max < cfg.scale_min)
        throw std::invalid_argument("generate: bad scale range");

    const int n = prototype.size();
    const int dim = prototype.dim();
    const double diam = prototype.diameter();
    std::mt19937_64 rng(cfg.seed);

    GroundTruth truth;
    truth.dim = dim;
    {
        std::uniform_real_distribution<double> scale_draw(cfg.scale_min, cfg.scale_max);
        truth.scale = scale_draw(rng);
        truth.rotation = detail::random_rotation(dim, rng);
        std::uniform_real_distribution<double> shift(-0.25 * diam, 0.25 * diam);
        truth.translation.resize(dim);
        for (int k = 0; k < dim; ++k) truth.translation[k] = shift(rng);
    }

    Eigen::MatrixXd inliers = prototype.points();       // target-side copies, pre-transform
    std::vector<int> inlier_origin(static_cast<std::size_t>(n));
    std::iota(inlier_origin.begin(), inlier_origin.end(), 0);

    Eigen::MatrixXd source_extra(dim, 0), target_extra(dim, 0);

    const Eigen::VectorXd box_c = 0.5 * (prototype.bbox_min() + prototype.bbox_max());
    const Eigen::VectorXd box_h = 0.6 * (prototype.bbox_max() - prototype.bbox_min());
    const Eigen::VectorXd out_lo = box_c - box_h; // 1.2x inflated prototype bounding box
    const Eigen::VectorXd out_hi = box_c + box_h;

    switch (cfg.regime) {
        case Regime::deformation: {
            constexpr int n_centers = 5;
            const double bandwidth = 0.5 * diam;
            const Eigen::MatrixXd centers =
                detail::sample_in_box(prototype.bbox_min(), prototype.bbox_max(), n_centers, rng);
            std::normal_distribution<double> gauss(0.0, 1.0);
            Eigen::MatrixXd coeffs(dim, n_centers);
            for (int c = 0; c < n_centers; ++c)
                for (int k = 0; k < dim; ++k) coeffs(k, c) = gauss(rng);

            Eigen::MatrixXd raw = Eigen::MatrixXd::Zero(dim, n);
            for (int i = 0; i < n; ++i)
                for (int c = 0; c < n_centers; ++c) {
                    const double d2 = (inliers.col(i) - centers.col(c)).squaredNorm();
                    raw.col(i) += coeffs.col(c) * std::exp(-d2 / (2.0 * bandwidth * bandwidth));
                }
            const double peak = raw.colwise().norm().maxCoeff();
            if (peak > 0.0) inliers += raw * (cfg.level * diam / peak);
            break;
        }
        case Regime::noise: {
            std::normal_distribution<double> gauss(0.0, cfg.level * diam);
            for (int i = 0; i < n; ++i)
                for (int k = 0; k < dim; ++k) inliers(k, i) += gauss(rng);
            break;
        }
        case Regime::mixed_outliers: {
            const int count = static_cast<int>(std::llround(cfg.level * n));
            const Eigen::MatrixXd shared = detail::sample_in_box(out_lo, out_hi, count, rng);
            source_extra = shared; // the same clutter superimposed on both sides
            target_extra = shared;
            break;
        }
        case Regime::separate_outliers: {
            const int count = static_cast<int>(std::llround(cfg.level * n));
            source_extra = detail::sample_in_box(out_lo, out_hi, count, rng);
            target_extra = detail::sample_in_box(out_lo, out_hi, count, rng);
            break;
        }
        case Regime::occlusion_outliers: {
            const int removed = static_cast<int>(std::ceil(cfg.level * n));
            if (removed >= n)
                throw std::invalid_argument("generate: occlusion would remove every point");
            const Eigen::VectorXd dir = detail::random_unit_vector(dim, rng);
            std::vector<int> order(static_cast<std::size_t>(n));
            std::iota(order.begin(), order.end(), 0);
            std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
                return prototype.points().col(a).dot(dir) > prototype.points().col(b).dot(dir);
            });
            std::vector<char> gone(static_cast<std::size_t>(n), char{0});
            for (int r = 0; r < removed; ++r) gone[static_cast<std::size_t>(order[r])] = 1;

            Eigen::MatrixXd kept(dim, n - removed);
            std::vector<int> kept_origin;
            kept_origin.reserve(static_cast<std::size_t>(n - removed));
            for (int i = 0, w = 0; i < n; ++i)
                if (!gone[static_cast<std::size_t>(i)]) {
                    kept.col(w++) = prototype.points().col(i);
                    kept_origin.push_back(i);
                }
            inliers = std::move(kept);
            inlier_origin = std::move(kept_origin);

            const int src_out = static_cast<int>(std::llround(0.5 * n));
            const int tgt_out = static_cast<int>(std::llround(0.5 * (n - removed)));
            source_extra = detail::sample_in_box(out_lo, out_hi, src_out, rng);
            target_extra = detail::sample_in_box(out_lo, out_hi, tgt_out, rng);
            break;
        }
    }

    const int n_kept = static_cast<int>(inliers.cols());

    Eigen::MatrixXd src(dim, n + source_extra.cols());
    src.leftCols(n) = prototype.points();
    src.rightCols(source_extra.cols()) = source_extra;
    std::vector<int> src_labels(static_cast<std::size_t>(src.cols()), -1);
    for (int i = 0; i < n; ++i) src_labels[static_cast<std::size_t>(i)] = i;

    Eigen::MatrixXd tgt(dim, n_kept + target_extra.cols());
    tgt.leftCols(n_kept) = inliers;
    tgt.rightCols(target_extra.cols()) = target_extra;
    std::vector<int> tgt_labels(static_cast<std::size_t>(tgt.cols()), -1);
    for (int q = 0; q < n_kept; ++q)
        tgt_labels[static_cast<std::size_t>(q)] = inlier_origin[static_cast<std::size_t>(q)];

    // Ground-truth transform moves the whole target side, clutter included.
    tgt = (truth.scale * truth.rotation * tgt).colwise() +
          Eigen::VectorXd(truth.translation);

    SynthInstance inst{PointSet(std::move(src), std::move(src_labels)),
                       PointSet(std::move(tgt), std::move(tgt_labels)),
                       std::move(truth),
                       {},
                       n_kept};
    inst.inlier_pairs.reserve(static_cast<std::size_t>(n_kept));
    for (int q = 0; q < n_kept; ++q)
        inst.inlier_pairs.emplace_back(inlier_origin[static_cast<std::size_t>(q)], q);
    return inst;
}

/// Write source.txt, target.txt, and a truth.json sidecar into a directory
/// (which must exist).
inline void write_instance(const std::string& dir, const SynthInstance& inst) {
    write_point_file(dir + "/source.txt", inst.source);
    write_point_file(dir + "/target.txt", inst.target);

    nlohmann::json truth;
    truth["dim"] = inst.truth.dim;
    truth["scale"] = inst.truth.scale;
    std::vector<double> rot;
    for (int r = 0; r < inst.truth.dim; ++r)
        for (int c = 0; c < inst.truth.dim; ++c) rot.push_back(inst.truth.rotation(r, c));
    truth["rotation"] = rot;
    truth["translation"] =
        std::vector<double>(inst.truth.translation.data(),
                            inst.truth.translation.data() + inst.truth.translation.size());
    if (inst.truth.dim == 2) {
        const Eigen::Vector4d theta = inst.truth.theta2d();
        truth["theta"] = std::vector<double>(theta.data(), theta.data() + 4);
    }
    truth["n_p_truth"] = inst.n_p_truth;
    nlohmann::json pairs = nlohmann::json::array();
    for (const auto& [i, j] : inst.inlier_pairs) pairs.push_back({i, j});
    truth["inlier_pairs"] = pairs;

    std::ofstream out(dir + "/truth.json");
    if (!out) throw std::runtime_error("cannot write truth sidecar in " + dir);
    out << truth.dump(2) << '\n';
}

} // namespace dcbnb
