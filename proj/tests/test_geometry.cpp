#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "refill3d/geometry.hpp"

#include "test_support.hpp"

#include <cmath>

using namespace refill3d;

namespace {

constexpr double kPi = 3.14159265358979323846;

Intrinsics test_intrinsics() { return Intrinsics{750.0, 750.0, 256.0, 256.0}; }

}  // namespace

TEST_CASE("euler_to_rotation matches hand-computed axis rotations") {
    // Rz(pi/2) maps +x to +y.
    const Mat3 rz = euler_to_rotation({0.0, 0.0, kPi / 2.0});
    const Vec3 mapped = rz * Vec3{1.0, 0.0, 0.0};
    CHECK(std::abs(mapped.x) < 1e-15);
    CHECK(mapped.y == doctest::Approx(1.0));
    CHECK(std::abs(mapped.z) < 1e-15);

    // Rx(pi/2) maps +y to +z.
    const Mat3 rx = euler_to_rotation({kPi / 2.0, 0.0, 0.0});
    const Vec3 my = rx * Vec3{0.0, 1.0, 0.0};
    CHECK(std::abs(my.x) < 1e-15);
    CHECK(my.z == doctest::Approx(1.0));

    // Ry(pi/2) maps +z to +x.
    const Mat3 ry = euler_to_rotation({0.0, kPi / 2.0, 0.0});
    const Vec3 mz = ry * Vec3{0.0, 0.0, 1.0};
    CHECK(mz.x == doctest::Approx(1.0));
    CHECK(std::abs(mz.z) < 1e-15);
}

TEST_CASE("euler_to_rotation full matrix for mixed angles") {
    // Reference values computed independently for angles (0.1, -0.2, 0.3)
    // under the z*y*x composition order this module uses.
    const Mat3 r = euler_to_rotation({0.1, -0.2, 0.3});
    CHECK(r(0, 0) == doctest::Approx(0.9362933635841992).epsilon(1e-12));
    CHECK(r(0, 1) == doctest::Approx(-0.31299182578546797).epsilon(1e-12));
    CHECK(r(0, 2) == doctest::Approx(-0.1593450793079779).epsilon(1e-12));
    CHECK(r(1, 0) == doctest::Approx(0.28962947762551555).epsilon(1e-12));
    CHECK(r(1, 1) == doctest::Approx(0.9447024859948943).epsilon(1e-12));
    CHECK(r(1, 2) == doctest::Approx(-0.1537919979889642).epsilon(1e-12));
    CHECK(r(2, 0) == doctest::Approx(0.19866933079506122).epsilon(1e-12));
    CHECK(r(2, 1) == doctest::Approx(0.09784339500725571).epsilon(1e-12));
    CHECK(r(2, 2) == doctest::Approx(0.975170327201816).epsilon(1e-12));
}

TEST_CASE("rotation matrices are orthonormal with unit determinant") {
    SplitmixRng rng(41);
    for (int trial = 0; trial < 50; ++trial) {
        const std::array<double, 3> angles{rng.signed_range(0.0, kPi),
                                           rng.signed_range(0.0, 1.4),
                                           rng.signed_range(0.0, kPi)};
        const Mat3 r = euler_to_rotation(angles);
        const Mat3 rtr = r.transposed() * r;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                CHECK(rtr(i, j) == doctest::Approx(i == j ? 1.0 : 0.0).epsilon(1e-12));
        CHECK(r.det() == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("pose_from_matrix inverts euler_to_rotation away from gimbal lock") {
    SplitmixRng rng(42);
    for (int trial = 0; trial < 100; ++trial) {
        const std::array<double, 3> angles{rng.signed_range(0.0, 1.2),
                                           rng.signed_range(0.0, 1.2),
                                           rng.signed_range(0.0, 1.2)};
        const Vec3 t{rng.signed_range(0.0, 2.0), rng.signed_range(0.0, 2.0),
                     rng.signed_range(0.0, 2.0)};
        const Pose6D pose = pose_from_matrix(euler_to_rotation(angles), t);
        for (int i = 0; i < 3; ++i)
            CHECK(pose.euler_xyz[i] == doctest::Approx(angles[i]).epsilon(1e-10));
        CHECK(pose.translation[0] == doctest::Approx(t.x));
        CHECK(pose.translation[1] == doctest::Approx(t.y));
        CHECK(pose.translation[2] == doctest::Approx(t.z));
    }
}

TEST_CASE("backproject and project are mutually consistent") {
    const Intrinsics k = test_intrinsics();

    SUBCASE("hand-computed point") {
        const Vec3 p = backproject(406.0, 256.0, 3.0, k);
        CHECK(p.x == doctest::Approx(0.6));
        CHECK(p.y == doctest::Approx(0.0));
        CHECK(p.z == doctest::Approx(3.0));

        const auto uv = project({0.6, 0.0, 4.5}, k);
        REQUIRE(uv.has_value());
        CHECK(uv->u == doctest::Approx(356.0));
        CHECK(uv->v == doctest::Approx(256.0));
        CHECK(uv->z == doctest::Approx(4.5));
    }

    SUBCASE("round trip over random pixels") {
        SplitmixRng rng(7);
        for (int trial = 0; trial < 200; ++trial) {
            const double u = rng.uniform(0.0, 511.0);
            const double v = rng.uniform(0.0, 511.0);
            const double z = rng.uniform(0.5, 20.0);
            const auto uv = project(backproject(u, v, z, k), k);
            REQUIRE(uv.has_value());
            CHECK(uv->u == doctest::Approx(u).epsilon(1e-9));
            CHECK(uv->v == doctest::Approx(v).epsilon(1e-9));
            CHECK(uv->z == doctest::Approx(z));
        }
    }

    SUBCASE("invalid depth is rejected") {
        CHECK_THROWS_AS(backproject(10.0, 10.0, 0.0, k), std::invalid_argument);
        CHECK_THROWS_AS(backproject(10.0, 10.0, -1.0, k), std::invalid_argument);
        CHECK_FALSE(project({0.0, 0.0, 0.0}, k).has_value());
        CHECK_FALSE(project({0.0, 0.0, -2.0}, k).has_value());
        CHECK_FALSE(project({0.0, 0.0, 1e-9}, k).has_value());
    }
}

TEST_CASE("transform_point applies rotation then translation") {
    Pose6D pose;
    pose.euler_xyz = {0.0, 0.0, kPi / 2.0};
    pose.translation = {1.0, 2.0, 3.0};
    const Vec3 out = transform_point({1.0, 0.0, 0.0}, pose);
    CHECK(out.x == doctest::Approx(1.0));
    CHECK(out.y == doctest::Approx(3.0));
    CHECK(out.z == doctest::Approx(3.0));
}

TEST_CASE("pose inverse undoes the transform") {
    Pose6D pose;
    pose.euler_xyz = {0.1, -0.2, 0.3};
    pose.translation = {0.4, -0.3, 1.2};

    const Pose6D inv = pose.inverse();
    CHECK(inv.translation[0] == doctest::Approx(-0.5260316991000985).epsilon(1e-12));
    CHECK(inv.translation[1] == doctest::Approx(0.2911954021039486).epsilon(1e-12));
    CHECK(inv.translation[2] == doctest::Approx(-1.152603960315677).epsilon(1e-12));

    SplitmixRng rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        const Vec3 p{rng.signed_range(0.0, 5.0), rng.signed_range(0.0, 5.0),
                     rng.uniform(0.5, 8.0)};
        const Vec3 back = transform_point(transform_point(p, pose), inv);
        CHECK(back.x == doctest::Approx(p.x).epsilon(1e-10));
        CHECK(back.y == doctest::Approx(p.y).epsilon(1e-10));
        CHECK(back.z == doctest::Approx(p.z).epsilon(1e-10));
    }
}

TEST_CASE("compose_poses chains two transforms") {
    SplitmixRng rng(13);
    for (int trial = 0; trial < 50; ++trial) {
        Pose6D first;
        first.euler_xyz = {rng.signed_range(0.0, 0.8), rng.signed_range(0.0, 0.8),
                           rng.signed_range(0.0, 0.8)};
        first.translation = {rng.signed_range(0.0, 2.0), rng.signed_range(0.0, 2.0),
                             rng.signed_range(0.0, 2.0)};
        Pose6D second;
        second.euler_xyz = {rng.signed_range(0.0, 0.8), rng.signed_range(0.0, 0.8),
                            rng.signed_range(0.0, 0.8)};
        second.translation = {rng.signed_range(0.0, 2.0), rng.signed_range(0.0, 2.0),
                              rng.signed_range(0.0, 2.0)};

        const Pose6D combined = compose_poses(second, first);
        const Vec3 p{rng.signed_range(0.0, 4.0), rng.signed_range(0.0, 4.0),
                     rng.uniform(1.0, 6.0)};
        const Vec3 direct = transform_point(p, combined);
        const Vec3 chained = transform_point(transform_point(p, first), second);
        CHECK(direct.x == doctest::Approx(chained.x).epsilon(1e-10));
        CHECK(direct.y == doctest::Approx(chained.y).epsilon(1e-10));
        CHECK(direct.z == doctest::Approx(chained.z).epsilon(1e-10));
    }
}

TEST_CASE("reproject_grid at identity reproduces the pixel grid") {
    const Intrinsics k = default_intrinsics(64, 48, 90.0);
    const DepthMap depth = testsupport::constant_depth(64, 48, 2.5);
    const PixelFlow flow = reproject_grid(depth, Pose6D::identity(), k);

    REQUIRE(flow.width == 64);
    REQUIRE(flow.height == 48);
    for (int y = 0; y < 48; ++y) {
        for (int x = 0; x < 64; ++x) {
            const std::size_t i = flow.index(x, y);
            REQUIRE(flow.valid.data()[i] == 1);
            CHECK(flow.u[i] == doctest::Approx(static_cast<double>(x)).epsilon(1e-9));
            CHECK(flow.v[i] == doctest::Approx(static_cast<double>(y)).epsilon(1e-9));
            CHECK(flow.depth_ref[i] == doctest::Approx(2.5));
        }
    }
}

TEST_CASE("reproject_grid hand-computed forward translation") {
    // Pixel (406, 256) at depth 3 backprojects to (0.6, 0, 3); pushing the
    // camera by t=(0,0,1.5) lands the point at depth 4.5 and pixel (356, 256).
    const Intrinsics k = test_intrinsics();
    const DepthMap depth = testsupport::constant_depth(512, 512, 3.0f);

    Pose6D pose;
    pose.translation = {0.0, 0.0, 1.5};
    const PixelFlow flow = reproject_grid(depth, pose, k);
    const std::size_t i = flow.index(406, 256);
    REQUIRE(flow.valid.data()[i] == 1);
    CHECK(flow.u[i] == doctest::Approx(356.0).epsilon(1e-12));
    CHECK(flow.v[i] == doctest::Approx(256.0).epsilon(1e-12));
    CHECK(flow.depth_ref[i] == doctest::Approx(4.5));
}

TEST_CASE("reproject_grid marks out-of-bounds and behind-camera pixels invalid") {
    const Intrinsics k = test_intrinsics();
    const DepthMap depth = testsupport::constant_depth(512, 512, 3.0f);

    SUBCASE("pulling the camera back pushes border pixels outside") {
        Pose6D pose;
        pose.translation = {0.0, 0.0, -1.5};
        const PixelFlow flow = reproject_grid(depth, pose, k);
        // (406,256) maps to u = 750*0.6/1.5 + 256 = 556 > 511: invalid.
        const std::size_t i = flow.index(406, 256);
        CHECK(flow.valid.data()[i] == 0);
        CHECK(flow.u[i] == doctest::Approx(556.0).epsilon(1e-12));
        // The optical center stays put and remains valid.
        CHECK(flow.valid.at(256, 256) == 1);
    }

    SUBCASE("points moved behind the camera are invalid with zeroed coordinates") {
        Pose6D pose;
        pose.translation = {0.0, 0.0, -3.5};
        const PixelFlow flow = reproject_grid(depth, pose, k);
        for (int y = 0; y < flow.height; ++y) {
            for (int x = 0; x < flow.width; ++x) {
                const std::size_t i = flow.index(x, y);
                CHECK(flow.valid.data()[i] == 0);
                CHECK(flow.u[i] == 0.0);
                CHECK(flow.v[i] == 0.0);
            }
        }
    }

    SUBCASE("nonpositive depth invalidates only the affected pixel") {
        DepthMap holes = depth;
        holes.at(10, 10) = 0.0f;
        holes.at(20, 20) = -2.0f;
        const PixelFlow flow = reproject_grid(holes, Pose6D::identity(), k);
        CHECK(flow.valid.at(10, 10) == 0);
        CHECK(flow.valid.at(20, 20) == 0);
        CHECK(flow.valid.at(11, 10) == 1);
    }
}

TEST_CASE("reproject_grid keeps coordinates inside image bounds when valid") {
    const Intrinsics k = default_intrinsics(96, 80, 120.0);
    SplitmixRng rng(29);
    DepthMap depth(96, 80);
    for (auto& d : depth.data()) d = static_cast<float>(rng.uniform(2.0, 6.0));

    for (int trial = 0; trial < 20; ++trial) {
        Pose6D pose;
        pose.euler_xyz = {rng.signed_range(0.0, 0.1), rng.signed_range(0.0, 0.1),
                          rng.signed_range(0.0, 0.05)};
        pose.translation = {rng.signed_range(0.0, 0.4), rng.signed_range(0.0, 0.4),
                            rng.signed_range(0.0, 0.3)};
        const PixelFlow flow = reproject_grid(depth, pose, k);
        for (int y = 0; y < flow.height; ++y) {
            for (int x = 0; x < flow.width; ++x) {
                const std::size_t i = flow.index(x, y);
                if (!flow.valid.data()[i]) continue;
                CHECK(flow.u[i] >= 0.0);
                CHECK(flow.u[i] <= 95.0);
                CHECK(flow.v[i] >= 0.0);
                CHECK(flow.v[i] <= 79.0);
                CHECK(flow.depth_ref[i] > 0.0);
            }
        }
    }
}

TEST_CASE("default_intrinsics centers the principal point") {
    const Intrinsics k = default_intrinsics(640, 480, 525.0);
    CHECK(k.fx == doctest::Approx(525.0));
    CHECK(k.fy == doctest::Approx(525.0));
    CHECK(k.cx == doctest::Approx(320.0));
    CHECK(k.cy == doctest::Approx(240.0));
}
