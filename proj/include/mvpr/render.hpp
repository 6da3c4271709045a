#pragma once

#include <vector>

#include "mvpr/camera.hpp"
#include "mvpr/geometry.hpp"
#include "mvpr/image.hpp"
#include "mvpr/mesh.hpp"

namespace mvpr {

// Soft rasterization constants. sigma is the sharpness of the boundary
// sigmoid in squared-pixel units; cull_eps the near-plane depth in meters.
struct SoftParams {
    double sigma = 1e-2;
    double cull_eps = 1e-4;

    void validate() const;
};

// Gradient of a scalar loss with respect to the 9 pose parameters.
// d_rotation is taken with respect to omega in R * so3_exp(omega) at omega = 0.
struct PoseGradient {
    Vec3 d_scale{0.0, 0.0, 0.0};
    Vec3 d_rotation{0.0, 0.0, 0.0};
    Vec3 d_translation{0.0, 0.0, 0.0};

    PoseGradient& operator+=(const PoseGradient& o);
    PoseGradient& operator*=(double k);
    bool all_finite() const;
    double norm() const;
};

// Soft silhouette: per pixel j, A(j) = 1 - prod_f (1 - sigmoid(D(j,f)/sigma))
// where D is the signed squared pixel distance to face f's projected triangle
// (positive inside). Faces with any camera-space vertex at z <= cull_eps are
// culled whole; throws BehindCameraError when no face survives.
SilhouetteImage render_silhouette(const TriMesh& mesh, const Pose& pose, const View& view,
                                  const SoftParams& sp);

// Hard mask: pixel set iff its center is inside at least one surviving
// projected triangle (edge functions, top-left fill rule on boundaries).
BinaryMask render_hard_mask(const TriMesh& mesh, const Pose& pose, const View& view,
                            double cull_eps = 1e-4);

// Exact chain-rule gradient of L = sum_j upstream(j) * A(j) with respect to
// (scale, local so(3) increment, translation). upstream has width*height entries.
PoseGradient backward_pose(const TriMesh& mesh, const Pose& pose, const View& view,
                           const SoftParams& sp, const std::vector<double>& upstream);

}  // namespace mvpr
