#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "aeromag/frames.hpp"

using namespace aeromag;

namespace {

// Independent single-axis rotations for cross-checking the composed
// attitude matrix.
Mat3 rot_x(double a) {
    Mat3 r;
    r << 1, 0, 0, 0, std::cos(a), -std::sin(a), 0, std::sin(a), std::cos(a);
    return r;
}
Mat3 rot_y(double a) {
    Mat3 r;
    r << std::cos(a), 0, std::sin(a), 0, 1, 0, -std::sin(a), 0, std::cos(a);
    return r;
}
Mat3 rot_z(double a) {
    Mat3 r;
    r << std::cos(a), -std::sin(a), 0, std::sin(a), std::cos(a), 0, 0, 0, 1;
    return r;
}

}  // namespace

TEST_CASE("zero attitude maps to the identity rotation") {
    const Mat3 r = euler_to_rotation({0.0, 0.0, 0.0});
    REQUIRE((r - Mat3::Identity()).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("pure 90-degree yaw sends body-x to earth-y") {
    const Mat3 r = euler_to_rotation({0.0, 0.0, kPi / 2.0});
    const Vec3 earth = r * Vec3(1.0, 0.0, 0.0);
    REQUIRE(earth.x() == Catch::Approx(0.0).margin(1e-15));
    REQUIRE(earth.y() == Catch::Approx(1.0).margin(1e-15));
    REQUIRE(earth.z() == Catch::Approx(0.0).margin(1e-15));
}

TEST_CASE("composed attitude matches the product of single-axis rotations") {
    const EulerAttitude att{0.1, 0.2, 0.3};
    const Mat3 r = euler_to_rotation(att);
    const Mat3 oracle = rot_z(att.yaw) * rot_y(att.pitch) * rot_x(att.roll);
    REQUIRE((r - oracle).cwiseAbs().maxCoeff() < 1e-14);
    REQUIRE((r * r.transpose() - Mat3::Identity()).cwiseAbs().maxCoeff() < 1e-12);
    REQUIRE(r.determinant() == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("rotations stay orthonormal over random attitudes") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-1.4, 1.4);
    for (int i = 0; i < 200; ++i) {
        const Mat3 r = euler_to_rotation({u(rng), u(rng), u(rng)});
        REQUIRE(is_rotation(r, 1e-12));
    }
}

TEST_CASE("rotate_to_body with identity is pass-through") {
    const Vec3 v = rotate_to_body(Mat3::Identity(), Vec3(50000.0, 0.0, 0.0));
    REQUIRE(v.isApprox(Vec3(50000.0, 0.0, 0.0)));
}

TEST_CASE("rotate_to_body preserves the norm") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-1.4, 1.4);
    std::uniform_real_distribution<double> comp(-5e4, 5e4);
    for (int i = 0; i < 200; ++i) {
        const Mat3 r = euler_to_rotation({u(rng), u(rng), u(rng)});
        const Vec3 v(comp(rng), comp(rng), comp(rng));
        REQUIRE(rotate_to_body(r, v).norm() == Catch::Approx(v.norm()).epsilon(1e-9));
    }
}

TEST_CASE("rotate_to_body under pure yaw matches the hand-evaluated transpose") {
    const Mat3 r = euler_to_rotation({0.0, 0.0, kPi / 2.0});
    const Vec3 v = rotate_to_body(r, Vec3(1.0, 0.0, 0.0));
    REQUIRE(v.x() == Catch::Approx(0.0).margin(1e-15));
    REQUIRE(v.y() == Catch::Approx(-1.0).margin(1e-15));
    REQUIRE(v.z() == Catch::Approx(0.0).margin(1e-15));
}

TEST_CASE("rotate_to_body composed with the inverse rotation is identity") {
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> u(-1.4, 1.4);
    for (int i = 0; i < 100; ++i) {
        const Mat3 r = euler_to_rotation({u(rng), u(rng), u(rng)});
        const Vec3 v(1234.5, -678.9, 42.0);
        const Vec3 back = r * rotate_to_body(r, v);
        REQUIRE((back - v).norm() < 1e-12 * v.norm() + 1e-12);
    }
}

TEST_CASE("angle_between basics") {
    REQUIRE(angle_between(Vec3(1, 0, 0), Vec3(1, 0, 0)) == Catch::Approx(0.0).margin(1e-15));
    REQUIRE(angle_between(Vec3(1, 0, 0), Vec3(0, 1, 0)) == Catch::Approx(kPi / 2.0));
    REQUIRE(angle_between(Vec3(1, 0, 0), Vec3(1, 1, 0)) == Catch::Approx(kPi / 4.0).margin(1e-12));
    REQUIRE_THROWS_AS(angle_between(Vec3::Zero(), Vec3(1, 0, 0)), std::domain_error);
}

TEST_CASE("euler angles survive a rotation round trip away from gimbal lock") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(-1.4, 1.4);
    for (int i = 0; i < 500; ++i) {
        const EulerAttitude in{u(rng), u(rng) * 0.9, u(rng)};
        const EulerAttitude out = rotation_to_euler(euler_to_rotation(in));
        REQUIRE(out.roll == Catch::Approx(in.roll).margin(1e-9));
        REQUIRE(out.pitch == Catch::Approx(in.pitch).margin(1e-9));
        REQUIRE(out.yaw == Catch::Approx(in.yaw).margin(1e-9));
    }
}

TEST_CASE("small_angle_rotation produces valid rotations") {
    std::mt19937_64 rng(19);
    std::uniform_real_distribution<double> u(-0.01, 0.01);
    for (int i = 0; i < 100; ++i) {
        const Mat3 r = small_angle_rotation(Vec3(u(rng), u(rng), u(rng)));
        REQUIRE(is_rotation(r, 1e-12));
    }
    REQUIRE(small_angle_rotation(Vec3::Zero()).isApprox(Mat3::Identity()));
}
