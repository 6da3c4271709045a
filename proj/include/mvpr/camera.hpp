#pragma once

#include "mvpr/geometry.hpp"
#include "mvpr/image.hpp"

namespace mvpr {

// Ideal pinhole, no distortion. Camera frame: +z forward, x right, y down.
// Pixel (i,j) covers [i,i+1) x [j,j+1); its center is (i+0.5, j+0.5).
struct Intrinsics {
    double fx = 0.0, fy = 0.0;
    double cx = 0.0, cy = 0.0;
    int width = 0, height = 0;

    void validate() const;
};

// World -> camera rigid transform.
struct Extrinsics {
    Rotation rotation;
    Vec3 translation{0.0, 0.0, 0.0};
};

Vec3 world_to_camera(const Extrinsics& e, const Vec3& p);

// Perspective projection to real-valued pixel coordinates; the result may lie
// outside the image. Throws BehindCameraError when z <= 1e-9.
Vec2 project(const Intrinsics& k, const Vec3& p_cam);

// One observation: target silhouette plus the camera that produced it.
struct View {
    Intrinsics intrinsics;
    Extrinsics extrinsics;
    BinaryMask target;

    void validate() const;
};

// Position of the camera center in world coordinates.
Vec3 camera_center(const Extrinsics& e);

}  // namespace mvpr
