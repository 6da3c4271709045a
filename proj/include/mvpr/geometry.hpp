#pragma once

#include <Eigen/Dense>
#include <vector>

namespace mvpr {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Vec2 = Eigen::Vector2d;

Mat3 skew(const Vec3& w);

// Rotation matrix constrained to SO(3): R'R = I and det R = +1, both within 1e-9.
class Rotation {
public:
    Rotation() : m_(Mat3::Identity()) {}

    static Rotation identity() { return Rotation(); }

    // Validates the SO(3) invariants; throws InputError on failure.
    static Rotation from_matrix(const Mat3& m);

    // For products of already-valid rotations and other internally generated matrices.
    static Rotation from_matrix_unchecked(const Mat3& m) { return Rotation(m); }

    static bool is_valid(const Mat3& m, double tol = 1e-9);

    const Mat3& matrix() const { return m_; }
    Rotation inverse() const { return Rotation(m_.transpose()); }
    Rotation operator*(const Rotation& o) const { return Rotation(m_ * o.m_); }
    Vec3 operator*(const Vec3& v) const { return m_ * v; }

private:
    explicit Rotation(const Mat3& m) : m_(m) {}
    Mat3 m_;
};

// 9-DoF similarity pose: per-axis scale, rotation, translation.
// Points map as R * (s .* x) + t (scale applied in the model frame).
struct Pose {
    Vec3 scale{1.0, 1.0, 1.0};
    Rotation rotation;
    Vec3 translation{0.0, 0.0, 0.0};

    static Pose identity() { return Pose{}; }

    // Checks scale positivity and finiteness; throws InputError.
    void validate() const;
};

Vec3 transform_point(const Pose& pose, const Vec3& p);
std::vector<Vec3> transform_points(const Pose& pose, const std::vector<Vec3>& points);

// Rodrigues exponential map; omega = 0 gives the identity.
Rotation so3_exp(const Vec3& omega);

// Inverse of so3_exp for rotation angle in [0, pi]. Near pi the axis is taken
// from the symmetric part (R + I)/2 (largest-diagonal column) with the sign
// fixed against vee(R - R'); the standard sin-formula is ill-conditioned there.
Vec3 so3_log(const Rotation& r);

// Intrinsic Z-Y-X composition: Rz(yaw) * Ry(pitch) * Rx(roll).
Rotation euler_to_rotation(double yaw, double pitch, double roll);

// Rotation angle of a'b in [0, pi].
double geodesic_angle(const Rotation& a, const Rotation& b);

}  // namespace mvpr
