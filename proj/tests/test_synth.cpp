#include "test_helpers.hpp"

#include <dcbnb/metrics.hpp>
#include <dcbnb/synth.hpp>

#include <catch2/catch_amalgamated.hpp>

#include <json.hpp>

#include <filesystem>
#include <fstream>

using namespace dcbnb;
using Catch::Approx;

namespace {

PointSet grid_prototype(int per_side) {
    Eigen::MatrixXd pts(2, per_side * per_side);
    int w = 0;
    for (int i = 0; i < per_side; ++i)
        for (int j = 0; j < per_side; ++j) pts.col(w++) << 0.3 * i, 0.2 * j;
    return PointSet(pts);
}

PointSet prototype3d(int count, unsigned seed) {
    auto rng = testutil::seeded(seed);
    return testutil::random_point_set(3, count, -1.0, 1.0, rng);
}

} // namespace

TEST_CASE("generation is deterministic in the seed") {
    const PointSet proto = grid_prototype(4);
    SynthConfig cfg;
    cfg.seed = 99;
    cfg.regime = Regime::mixed_outliers;
    cfg.level = 0.5;
    cfg.dims = 2;

    const SynthInstance a = generate(proto, cfg);
    const SynthInstance b = generate(proto, cfg);
    CHECK((a.source.points() - b.source.points()).cwiseAbs().maxCoeff() == 0.0);
    CHECK((a.target.points() - b.target.points()).cwiseAbs().maxCoeff() == 0.0);
    CHECK(a.truth.scale == b.truth.scale);
    CHECK((a.truth.rotation - b.truth.rotation).cwiseAbs().maxCoeff() == 0.0);
    CHECK(a.inlier_pairs == b.inlier_pairs);

    cfg.seed = 100;
    const SynthInstance c = generate(proto, cfg);
    CHECK((a.target.points() - c.target.points()).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("noise level zero reproduces the prototype exactly") {
    const PointSet proto = grid_prototype(3);
    SynthConfig cfg;
    cfg.seed = 7;
    cfg.regime = Regime::noise;
    cfg.level = 0.0;
    cfg.dims = 2;

    const SynthInstance inst = generate(proto, cfg);
    CHECK(inst.n_p_truth == proto.size());
    REQUIRE(inst.inlier_pairs.size() == static_cast<std::size_t>(proto.size()));
    const auto apply = [&](const Eigen::VectorXd& x) { return inst.truth.apply(x); };
    CHECK(rmse(apply, inst.source, inst.target, inst.inlier_pairs) ==
          Approx(0.0).margin(1e-12));
    CHECK(inst.truth.scale >= 0.5);
    CHECK(inst.truth.scale <= 1.5);
}

TEST_CASE("occlusion removes the stated count and caps at everything") {
    const PointSet proto = grid_prototype(4); // 16 points
    Eigen::MatrixXd ten = proto.points().leftCols(10);
    const PointSet proto10{std::move(ten)};

    SynthConfig cfg;
    cfg.seed = 13;
    cfg.regime = Regime::occlusion_outliers;
    cfg.level = 0.3;
    cfg.dims = 2;
    const SynthInstance inst = generate(proto10, cfg);
    CHECK(inst.n_p_truth == 7); // ceil(0.3 * 10) = 3 removed
    CHECK(inst.inlier_pairs.size() == 7);
    // Outliers at the fixed 0.5 ratio on both sides.
    CHECK(inst.source.size() == 10 + 5);
    CHECK(inst.target.size() == 7 + 4);

    SynthConfig all = cfg;
    all.level = 1.0;
    CHECK_THROWS_AS(generate(proto10, all), std::invalid_argument);
}

TEST_CASE("mixed outliers share one clutter cloud across both sides") {
    const PointSet proto = grid_prototype(4);
    SynthConfig cfg;
    cfg.seed = 5;
    cfg.regime = Regime::mixed_outliers;
    cfg.level = 0.25;
    cfg.dims = 2;
    const SynthInstance inst = generate(proto, cfg);

    const int n = proto.size();
    const int extra = static_cast<int>(std::llround(0.25 * n));
    REQUIRE(inst.source.size() == n + extra);
    REQUIRE(inst.target.size() == n + extra);
    for (int k = 0; k < extra; ++k) {
        const Eigen::VectorXd in_source = inst.source.point(n + k);
        const Eigen::VectorXd in_target = inst.target.point(n + k);
        CHECK((inst.truth.apply(in_source) - in_target).norm() < 1e-12);
        CHECK(inst.source.label(n + k) == -1);
        CHECK(inst.target.label(n + k) == -1);
    }
}

TEST_CASE("separate outliers draw independent clutter") {
    const PointSet proto = grid_prototype(4);
    SynthConfig cfg;
    cfg.seed = 6;
    cfg.regime = Regime::separate_outliers;
    cfg.level = 0.25;
    cfg.dims = 2;
    const SynthInstance inst = generate(proto, cfg);

    const int n = proto.size();
    const int extra = static_cast<int>(std::llround(0.25 * n));
    REQUIRE(inst.source.size() == n + extra);
    REQUIRE(inst.target.size() == n + extra);
    bool any_differs = false;
    for (int k = 0; k < extra; ++k) {
        const Eigen::VectorXd in_source = inst.source.point(n + k);
        const Eigen::VectorXd in_target = inst.target.point(n + k);
        if ((inst.truth.apply(in_source) - in_target).norm() > 1e-9) any_differs = true;
    }
    CHECK(any_differs);
}

TEST_CASE("deformation magnitude is normalised to the severity level") {
    const PointSet proto = grid_prototype(5);
    SynthConfig cfg;
    cfg.seed = 17;
    cfg.regime = Regime::deformation;
    cfg.level = 0.1;
    cfg.dims = 2;
    const SynthInstance inst = generate(proto, cfg);

    // Undo the ground-truth transform, then compare against the prototype.
    const double diam = proto.diameter();
    double max_disp = 0.0;
    for (const auto& [i, j] : inst.inlier_pairs) {
        const Eigen::VectorXd y = inst.target.point(j);
        const Eigen::VectorXd pre =
            inst.truth.rotation.transpose() * (y - inst.truth.translation) /
            inst.truth.scale;
        max_disp = std::max(max_disp, (pre - proto.point(i)).norm());
    }
    CHECK(max_disp == Approx(cfg.level * diam).epsilon(1e-6));
}

TEST_CASE("3D generation with unit scale stays rigid") {
    const PointSet proto = prototype3d(12, 77);
    SynthConfig cfg;
    cfg.seed = 3;
    cfg.regime = Regime::noise;
    cfg.level = 0.0;
    cfg.dims = 3;
    cfg.scale_min = 1.0;
    cfg.scale_max = 1.0;
    const SynthInstance inst = generate(proto, cfg);
    CHECK(inst.truth.scale == 1.0);
    const Eigen::Matrix3d r = inst.truth.rotation;
    CHECK((r * r.transpose() - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(r.determinant() == Approx(1.0));

    const auto apply = [&](const Eigen::VectorXd& x) { return inst.truth.apply(x); };
    CHECK(rmse(apply, inst.source, inst.target, inst.inlier_pairs) ==
          Approx(0.0).margin(1e-12));
}

TEST_CASE("labels carry prototype provenance") {
    const PointSet proto = grid_prototype(3);
    SynthConfig cfg;
    cfg.seed = 23;
    cfg.regime = Regime::occlusion_outliers;
    cfg.level = 0.2;
    cfg.dims = 2;
    const SynthInstance inst = generate(proto, cfg);

    for (const auto& [i, j] : inst.inlier_pairs) {
        CHECK(inst.source.label(i) == i);
        CHECK(inst.target.label(j) == i);
    }
    CHECK(inst.source.label(inst.source.size() - 1) == -1);
    CHECK(inst.target.label(inst.target.size() - 1) == -1);
}

TEST_CASE("instances round-trip through the on-disk format") {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "dcbnb_synth_io";
    fs::create_directories(dir);

    const PointSet proto = grid_prototype(4);
    SynthConfig cfg;
    cfg.seed = 31;
    cfg.regime = Regime::separate_outliers;
    cfg.level = 0.5;
    cfg.dims = 2;
    const SynthInstance inst = generate(proto, cfg);
    write_instance(dir.string(), inst);

    const PointSet src = read_point_file((dir / "source.txt").string());
    const PointSet tgt = read_point_file((dir / "target.txt").string());
    CHECK((src.points() - inst.source.points()).cwiseAbs().maxCoeff() == 0.0);
    CHECK((tgt.points() - inst.target.points()).cwiseAbs().maxCoeff() == 0.0);

    std::ifstream in(dir / "truth.json");
    REQUIRE(in.good());
    const nlohmann::json truth = nlohmann::json::parse(in);
    CHECK(truth.at("dim") == 2);
    CHECK(truth.at("n_p_truth") == inst.n_p_truth);
    CHECK(truth.at("scale").get<double>() == Approx(inst.truth.scale));
    CHECK(truth.at("inlier_pairs").size() == inst.inlier_pairs.size());
    REQUIRE(truth.contains("theta"));
    const auto theta = truth.at("theta").get<std::vector<double>>();
    CHECK(theta.size() == 4);
    CHECK(theta[0] == Approx(inst.truth.theta2d()[0]));
}

TEST_CASE("regime names parse both ways") {
    for (const Regime r :
         {Regime::deformation, Regime::noise, Regime::mixed_outliers,
          Regime::separate_outliers, Regime::occlusion_outliers})
        CHECK(parse_regime(to_string(r)) == r);
    CHECK_THROWS_AS(parse_regime("florbs"), std::invalid_argument);
}

TEST_CASE("generate validates its configuration") {
    const PointSet proto = grid_prototype(3);
    SynthConfig cfg;
    cfg.dims = 3; // prototype is 2D
    CHECK_THROWS_AS(generate(proto, cfg), std::invalid_argument);

    cfg.dims = 2;
    cfg.level = -0.5;
    CHECK_THROWS_AS(generate(proto, cfg), std::invalid_argument);

    cfg.level = 0.0;
    cfg.scale_min = 0.0;
    CHECK_THROWS_AS(generate(proto, cfg), std::invalid_argument);
}
