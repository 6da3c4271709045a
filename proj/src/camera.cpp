#include "mvpr/camera.hpp"

#include "mvpr/errors.hpp"

namespace mvpr {

void Intrinsics::validate() const {
    if (!(fx > 0.0) || !(fy > 0.0)) throw InputError("intrinsics: focal lengths must be positive");
    if (width <= 0 || height <= 0) throw InputError("intrinsics: image size must be positive");
    if (!(cx >= 0.0 && cx < width) || !(cy >= 0.0 && cy < height))
        throw InputError("intrinsics: principal point must lie inside the image");
}

Vec3 world_to_camera(const Extrinsics& e, const Vec3& p) {
    return e.rotation.matrix() * p + e.translation;
}

Vec2 project(const Intrinsics& k, const Vec3& p_cam) {
    if (p_cam.z() <= 1e-9)
        throw BehindCameraError("point behind camera (z <= 1e-9)");
    return Vec2(k.cx + k.fx * p_cam.x() / p_cam.z(),
                k.cy + k.fy * p_cam.y() / p_cam.z());
}

void View::validate() const {
    intrinsics.validate();
    if (!Rotation::is_valid(extrinsics.rotation.matrix()))
        throw InputError("view extrinsics rotation violates SO(3) invariants");
    if (target.width != intrinsics.width || target.height != intrinsics.height)
        throw InputError("view target dimensions do not match intrinsics");
}

Vec3 camera_center(const Extrinsics& e) {
    return -(e.rotation.matrix().transpose() * e.translation);
}

}  // namespace mvpr
