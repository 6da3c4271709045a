#include "mvpr/geometry.hpp"

#include <cmath>

#include "mvpr/errors.hpp"

namespace mvpr {

Mat3 skew(const Vec3& w) {
    Mat3 m;
    m << 0.0, -w.z(), w.y(),
         w.z(), 0.0, -w.x(),
        -w.y(), w.x(), 0.0;
    return m;
}

bool Rotation::is_valid(const Mat3& m, double tol) {
    if (!m.allFinite()) return false;
    Mat3 err = m.transpose() * m - Mat3::Identity();
    if (err.cwiseAbs().maxCoeff() > tol) return false;
    return std::abs(m.determinant() - 1.0) <= tol;
}

Rotation Rotation::from_matrix(const Mat3& m) {
    if (!is_valid(m)) throw InputError("matrix is not a rotation: R'R != I or det != +1");
    return Rotation(m);
}

void Pose::validate() const {
    if (!scale.allFinite() || !translation.allFinite() || !rotation.matrix().allFinite())
        throw InputError("pose has non-finite components");
    if (!(scale.x() > 0.0 && scale.y() > 0.0 && scale.z() > 0.0))
        throw InputError("pose scale components must be positive");
    if (!Rotation::is_valid(rotation.matrix()))
        throw InputError("pose rotation violates SO(3) invariants");
}

Vec3 transform_point(const Pose& pose, const Vec3& p) {
    return pose.rotation.matrix() * pose.scale.cwiseProduct(p) + pose.translation;
}

std::vector<Vec3> transform_points(const Pose& pose, const std::vector<Vec3>& points) {
    std::vector<Vec3> out;
    out.reserve(points.size());
    for (const Vec3& p : points) out.push_back(transform_point(pose, p));
    return out;
}

Rotation so3_exp(const Vec3& omega) {
    const double theta2 = omega.squaredNorm();
    const double theta = std::sqrt(theta2);
    const Mat3 w = skew(omega);
    Mat3 r;
    if (theta < 1e-8) {
        // second-order Taylor; exact enough at this magnitude
        r = Mat3::Identity() + w + 0.5 * w * w;
    } else {
        r = Mat3::Identity() + w * (std::sin(theta) / theta) +
            w * w * ((1.0 - std::cos(theta)) / theta2);
    }
    return Rotation::from_matrix_unchecked(r);
}

Vec3 so3_log(const Rotation& rot) {
    const Mat3& r = rot.matrix();
    double cos_theta = 0.5 * (r.trace() - 1.0);
    cos_theta = std::min(1.0, std::max(-1.0, cos_theta));
    const double theta = std::acos(cos_theta);
    const Vec3 vee(r(2, 1) - r(1, 2), r(0, 2) - r(2, 0), r(1, 0) - r(0, 1));

    if (theta < 1e-8) return 0.5 * vee;

    if (theta < 3.0) return (theta / (2.0 * std::sin(theta))) * vee;

    // Near pi both the sin formula and acos are ill-conditioned; recover the
    // angle from |vee| = 2 sin(theta) instead, and the axis from the symmetric
    // part (R + R')/2 = cos(theta) I + (1-cos(theta)) uu': isolate uu', take
    // its largest-diagonal column, and orient it along vee(R - R').
    const double theta_pi = M_PI - std::asin(std::clamp(0.5 * vee.norm(), 0.0, 1.0));
    const Mat3 uut =
        (0.5 * (r + r.transpose()) - cos_theta * Mat3::Identity()) / (1.0 - cos_theta);
    int col = 0;
    uut.diagonal().maxCoeff(&col);
    Vec3 axis = uut.col(col);
    axis.normalize();
    if (axis.dot(vee) < 0.0) axis = -axis;
    return theta_pi * axis;
}

Rotation euler_to_rotation(double yaw, double pitch, double roll) {
    return so3_exp(Vec3(0, 0, yaw)) * so3_exp(Vec3(0, pitch, 0)) * so3_exp(Vec3(roll, 0, 0));
}

double geodesic_angle(const Rotation& a, const Rotation& b) {
    const double tr = (a.matrix().transpose() * b.matrix()).trace();
    const double c = std::min(1.0, std::max(-1.0, 0.5 * (tr - 1.0)));
    return std::acos(c);
}

}  // namespace mvpr
