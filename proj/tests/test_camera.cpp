#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "mvpr/camera.hpp"
#include "mvpr/errors.hpp"
#include "mvpr/rng.hpp"

using namespace mvpr;

namespace {

Intrinsics test_intrinsics() {
    Intrinsics k;
    k.fx = 100.0;
    k.fy = 120.0;
    k.cx = 32.0;
    k.cy = 24.0;
    k.width = 64;
    k.height = 48;
    return k;
}

}  // namespace

TEST_CASE("world_to_camera basics") {
    Extrinsics e;
    SUBCASE("identity") {
        const Vec3 p(0.3, -0.2, 1.7);
        CHECK((world_to_camera(e, p) - p).norm() == 0.0);
    }
    SUBCASE("pure translation") {
        e.translation = Vec3(0, 0, 5);
        CHECK((world_to_camera(e, Vec3::Zero()) - Vec3(0, 0, 5)).norm() == 0.0);
    }
}

TEST_CASE("world_to_camera round trip") {
    Rng rng(7);
    for (int i = 0; i < 100; ++i) {
        Extrinsics e;
        e.rotation = rng.rotation();
        e.translation = Vec3(rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(-3, 3));
        const Vec3 p(rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2));
        const Vec3 q = world_to_camera(e, p);
        const Vec3 back = e.rotation.matrix().transpose() * (q - e.translation);
        CHECK((back - p).norm() < 1e-12);
    }
}

TEST_CASE("world_to_camera preserves distances") {
    Rng rng(13);
    for (int i = 0; i < 100; ++i) {
        Extrinsics e;
        e.rotation = rng.rotation();
        e.translation = Vec3(rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(-3, 3));
        const Vec3 p1(rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2));
        const Vec3 p2(rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2));
        const double before = (p1 - p2).norm();
        const double after = (world_to_camera(e, p1) - world_to_camera(e, p2)).norm();
        CHECK(std::abs(before - after) < 1e-9);
    }
}

TEST_CASE("project basics") {
    const Intrinsics k = test_intrinsics();
    SUBCASE("optical axis lands on principal point") {
        for (double z : {0.5, 1.0, 7.3}) {
            const Vec2 uv = project(k, Vec3(0, 0, z));
            CHECK(uv.x() == doctest::Approx(k.cx));
            CHECK(uv.y() == doctest::Approx(k.cy));
        }
    }
    SUBCASE("x offset moves u only") {
        const Vec2 uv = project(k, Vec3(0.5, 0, 2.0));
        CHECK(uv.x() == doctest::Approx(k.cx + k.fx * 0.25));
        CHECK(uv.y() == doctest::Approx(k.cy));
    }
    SUBCASE("behind camera throws") {
        CHECK_THROWS_AS(project(k, Vec3(0, 0, 0.0)), BehindCameraError);
        CHECK_THROWS_AS(project(k, Vec3(0, 0, -1.0)), BehindCameraError);
        CHECK_THROWS_AS(project(k, Vec3(0.1, 0.1, 1e-10)), BehindCameraError);
    }
}

TEST_CASE("projection is scale-invariant along rays") {
    const Intrinsics k = test_intrinsics();
    Rng rng(19);
    for (int i = 0; i < 100; ++i) {
        const Vec3 p(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(0.1, 5.0));
        const double lambda = rng.uniform(0.1, 10.0);
        const Vec2 a = project(k, p);
        const Vec2 b = project(k, lambda * p);
        CHECK((a - b).norm() < 1e-9);
    }
}

TEST_CASE("intrinsics validation") {
    Intrinsics k = test_intrinsics();
    CHECK_NOTHROW(k.validate());
    k.fx = 0.0;
    CHECK_THROWS_AS(k.validate(), InputError);
    k = test_intrinsics();
    k.cx = 64.0;  // must be < width
    CHECK_THROWS_AS(k.validate(), InputError);
    k = test_intrinsics();
    k.height = 0;
    CHECK_THROWS_AS(k.validate(), InputError);
}

TEST_CASE("view validation checks target dimensions") {
    View v;
    v.intrinsics = test_intrinsics();
    v.target = BinaryMask(64, 48);
    CHECK_NOTHROW(v.validate());
    v.target = BinaryMask(32, 48);
    CHECK_THROWS_AS(v.validate(), InputError);
}

TEST_CASE("camera_center inverts extrinsics") {
    Rng rng(23);
    for (int i = 0; i < 50; ++i) {
        Extrinsics e;
        e.rotation = rng.rotation();
        e.translation = Vec3(rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(-3, 3));
        const Vec3 c = camera_center(e);
        CHECK(world_to_camera(e, c).norm() < 1e-12);
    }
}
