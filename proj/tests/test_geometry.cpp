#include "test_helpers.hpp"

#include <dcbnb/geometry.hpp>
#include <dcbnb/point_io.hpp>

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

using namespace dcbnb;
using Catch::Approx;

TEST_CASE("jacobian2d matches the closed form") {
    const auto j1 = jacobian2d({1.0, 0.0});
    Eigen::Matrix<double, 2, 4> expected1;
    expected1 << 1, 0, 1, 0, 0, 1, 0, 1;
    CHECK((j1 - expected1).cwiseAbs().maxCoeff() == 0.0);

    const auto j0 = jacobian2d({0.0, 0.0});
    Eigen::Matrix<double, 2, 4> expected0;
    expected0 << 0, 0, 1, 0, 0, 0, 0, 1;
    CHECK((j0 - expected0).cwiseAbs().maxCoeff() == 0.0);

    const auto j23 = jacobian2d({2.0, 3.0});
    Eigen::Matrix<double, 2, 4> expected23;
    expected23 << 2, -3, 1, 0, 3, 2, 0, 1;
    CHECK((j23 - expected23).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("apply_similarity frozen examples") {
    CHECK(apply_similarity({1, 0, 0, 0}, {3, 4}).isApprox(Eigen::Vector2d(3, 4)));
    CHECK(apply_similarity({0, 1, 0, 0}, {1, 0}).isApprox(Eigen::Vector2d(0, 1)));
    CHECK(apply_similarity({2, 0, 1, 1}, {1, 1}).isApprox(Eigen::Vector2d(3, 3)));
}

TEST_CASE("apply_similarity equals scaled rotation plus translation") {
    auto rng = testutil::seeded(11);
    std::uniform_real_distribution<double> dist(-3.0, 3.0);
    for (int trial = 0; trial < 200; ++trial) {
        const double a = dist(rng), b = dist(rng), t1 = dist(rng), t2 = dist(rng);
        const Eigen::Vector2d x(dist(rng), dist(rng));
        const Eigen::Vector2d via_jacobian = apply_similarity({a, b, t1, t2}, x);
        const Eigen::Vector2d direct(a * x[0] - b * x[1] + t1, b * x[0] + a * x[1] + t2);
        CHECK((via_jacobian - direct).norm() < 1e-12);
        CHECK((jacobian2d(x) * Eigen::Vector4d(a, b, t1, t2) - via_jacobian).norm() == 0.0);
    }
}

TEST_CASE("box_vertices uses bitmask order and keeps duplicates") {
    const SearchBox unit(Eigen::Vector2d(0, 0), Eigen::Vector2d(1, 1));
    const auto verts = box_vertices(unit);
    REQUIRE(verts.size() == 4);
    CHECK(verts[0].isApprox(Eigen::Vector2d(0, 0)));
    CHECK(verts[1].isApprox(Eigen::Vector2d(1, 0)));
    CHECK(verts[2].isApprox(Eigen::Vector2d(0, 1)));
    CHECK(verts[3].isApprox(Eigen::Vector2d(1, 1)));

    const SearchBox point(Eigen::Vector2d(2, 2), Eigen::Vector2d(2, 2));
    const auto dup = box_vertices(point);
    REQUIRE(dup.size() == 4);
    for (const auto& v : dup) CHECK(v.isApprox(Eigen::Vector2d(2, 2)));

    Eigen::VectorXd lo(1), hi(1);
    lo << 0;
    hi << 1;
    const auto line = box_vertices(SearchBox(lo, hi));
    REQUIRE(line.size() == 2);
    CHECK(line[0][0] == 0.0);
    CHECK(line[1][0] == 1.0);
}

TEST_CASE("bisect_longest_edge splits at the midpoint of the widest edge") {
    const auto [a, b] =
        bisect_longest_edge(SearchBox(Eigen::Vector2d(0, 0), Eigen::Vector2d(4, 1)));
    CHECK(a.lower().isApprox(Eigen::Vector2d(0, 0)));
    CHECK(a.upper().isApprox(Eigen::Vector2d(2, 1)));
    CHECK(b.lower().isApprox(Eigen::Vector2d(2, 0)));
    CHECK(b.upper().isApprox(Eigen::Vector2d(4, 1)));

    // Ties pick the lowest dimension index.
    const auto [c, d] =
        bisect_longest_edge(SearchBox(Eigen::Vector2d(0, 0), Eigen::Vector2d(1, 1)));
    CHECK(c.upper()[0] == Approx(0.5));
    CHECK(c.upper()[1] == Approx(1.0));
    CHECK(d.lower()[0] == Approx(0.5));

    const auto [e, f] =
        bisect_longest_edge(SearchBox(Eigen::Vector3d(0, 0, 0), Eigen::Vector3d(1, 1, 2)));
    CHECK(e.upper()[2] == Approx(1.0));
    CHECK(f.lower()[2] == Approx(1.0));

    CHECK_THROWS_AS(
        bisect_longest_edge(SearchBox(Eigen::Vector2d(1, 1), Eigen::Vector2d(1, 1))),
        std::invalid_argument);
}

TEST_CASE("bisection partitions the parent box") {
    auto rng = testutil::seeded(7);
    for (int trial = 0; trial < 100; ++trial) {
        const int dim = 1 + static_cast<int>(rng() % 4);
        Eigen::VectorXd lo = testutil::random_vector(dim, -5.0, 5.0, rng);
        Eigen::VectorXd widths = testutil::random_vector(dim, 0.01, 4.0, rng);
        const SearchBox parent(lo, lo + widths);
        const auto [left, right] = bisect_longest_edge(parent);

        CHECK(left.volume() + right.volume() ==
              Approx(parent.volume()).epsilon(1e-12));
        for (const auto& v : box_vertices(left)) CHECK(parent.contains(v, 1e-12));
        for (const auto& v : box_vertices(right)) CHECK(parent.contains(v, 1e-12));
        CHECK(parent.contains(parent.center()));
    }
}

TEST_CASE("PointSet validates its invariants") {
    CHECK_THROWS_AS(PointSet(Eigen::MatrixXd(2, 0)), std::invalid_argument);
    CHECK_THROWS_AS(PointSet(Eigen::MatrixXd::Zero(4, 3)), std::invalid_argument);

    Eigen::MatrixXd bad = Eigen::MatrixXd::Zero(2, 2);
    bad(1, 1) = std::nan("");
    CHECK_THROWS_AS(PointSet(bad), std::invalid_argument);

    CHECK_THROWS_AS(PointSet(Eigen::MatrixXd::Zero(2, 3), std::vector<int>{1, 2}),
                    std::invalid_argument);

    const PointSet ok(Eigen::MatrixXd::Identity(3, 3));
    CHECK(ok.dim() == 3);
    CHECK(ok.size() == 3);
    CHECK(ok.diameter() == Approx(std::sqrt(2.0)));
}

TEST_CASE("SearchBox validates bounds") {
    CHECK_THROWS_AS(SearchBox(Eigen::Vector2d(1, 0), Eigen::Vector2d(0, 1)),
                    std::invalid_argument);
    CHECK_THROWS_AS(SearchBox(Eigen::VectorXd(), Eigen::VectorXd()),
                    std::invalid_argument);
    const SearchBox box(Eigen::Vector2d(-1, 2), Eigen::Vector2d(3, 2));
    CHECK(box.center().isApprox(Eigen::Vector2d(1, 2)));
    CHECK(box.longest_edge() == 0);
}

TEST_CASE("Transform3DRigid rejects improper rotations") {
    CHECK_NOTHROW(Transform3DRigid(Eigen::Matrix3d::Identity(), Eigen::Vector3d::Zero()));

    Eigen::Matrix3d reflection = Eigen::Matrix3d::Identity();
    reflection(2, 2) = -1.0;
    CHECK_THROWS_AS(Transform3DRigid(reflection, Eigen::Vector3d::Zero()),
                    std::invalid_argument);

    Eigen::Matrix3d skew = Eigen::Matrix3d::Identity();
    skew(0, 1) = 0.1;
    CHECK_THROWS_AS(Transform3DRigid(skew, Eigen::Vector3d::Zero()),
                    std::invalid_argument);
}

TEST_CASE("Transform2DSimilarity exposes scale and angle") {
    Transform2DSimilarity t;
    t.theta << 0.0, 2.0, 3.0, -1.0;
    CHECK(t.scale() == Approx(2.0));
    CHECK(t.angle() == Approx(std::numbers::pi / 2));
    CHECK(t.apply({1, 0}).isApprox(Eigen::Vector2d(3, 1)));
}

TEST_CASE("point files round-trip and reject malformed input") {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "dcbnb_geometry_io";
    fs::create_directories(dir);

    auto rng = testutil::seeded(3);
    const PointSet original = testutil::random_point_set(3, 17, -2.0, 2.0, rng);
    const std::string path = (dir / "pts.txt").string();
    write_point_file(path, original, "test cloud");
    const PointSet back = read_point_file(path);
    REQUIRE(back.dim() == 3);
    REQUIRE(back.size() == original.size());
    CHECK((back.points() - original.points()).cwiseAbs().maxCoeff() == 0.0);

    const std::string mixed = (dir / "mixed.txt").string();
    {
        std::ofstream out(mixed);
        out << "# leading comment\n\n  # indented comment\n1 2\n3 4\n";
    }
    const PointSet two = read_point_file(mixed);
    CHECK(two.dim() == 2);
    CHECK(two.size() == 2);

    const std::string ragged = (dir / "ragged.txt").string();
    {
        std::ofstream out(ragged);
        out << "1 2\n3 4 5\n";
    }
    CHECK_THROWS_AS(read_point_file(ragged), std::runtime_error);

    const std::string junk = (dir / "junk.txt").string();
    {
        std::ofstream out(junk);
        out << "1 banana\n";
    }
    CHECK_THROWS_AS(read_point_file(junk), std::runtime_error);

    const std::string empty = (dir / "empty.txt").string();
    {
        std::ofstream out(empty);
        out << "# nothing here\n";
    }
    CHECK_THROWS_AS(read_point_file(empty), std::runtime_error);

    CHECK_THROWS_AS(read_point_file((dir / "missing.txt").string()), std::runtime_error);
}
