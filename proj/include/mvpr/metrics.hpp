#pragma once

#include <utility>
#include <vector>

#include "mvpr/camera.hpp"
#include "mvpr/geometry.hpp"

namespace mvpr {

// Oriented image-plane rectangle describing a parallel-jaw grasp.
// angle is normalized to [0, pi): a gripper rotated by pi is the same grasp.
struct GraspRect {
    Vec2 center{0.0, 0.0};  // pixels
    double width = 0.0;     // gripper opening, pixels
    double height = 0.0;    // finger extent, pixels
    double angle = 0.0;     // radians

    void validate() const;
};

double normalize_grasp_angle(double angle);

// One scored detection with the IoU against its matched ground truth.
struct DetectionRecord {
    double score = 0.0;
    double iou = 0.0;
};

// Mean paired-point distance between the two transformed models, meters.
double add(const std::vector<Vec3>& points, const Pose& gt, const Pose& pred);

// Mean nearest-point distance (exact O(m^2) nearest neighbor), meters.
double add_s(const std::vector<Vec3>& points, const Pose& gt, const Pose& pred);

// Intersection-over-union of two oriented rectangles (convex polygon clipping
// + shoelace areas).
double rect_iou(const GraspRect& a, const GraspRect& b);

// True iff some ground truth is matched with angle difference (mod pi)
// strictly below 30 degrees AND rect_iou strictly above 0.25. With
// mod_pi_symmetry = false the angle difference is taken mod 2*pi instead.
bool grasp_correct(const GraspRect& pred, const std::vector<GraspRect>& gts,
                   bool mod_pi_symmetry = true);

struct Prf {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

// Greedy matching per image in descending score, each ground truth used at
// most once; TP requires iou > threshold.
Prf detection_prf(const std::vector<std::vector<DetectionRecord>>& records,
                  const std::vector<int>& gt_counts, double threshold);

// |hand - object| / |object - base|, clamped to [0, 1].
double normalized_reach(const Vec3& hand, const Vec3& object, const Vec3& base);

// Projects an object-frame grasp annotation (3D center + angle about the
// object z axis) into a view through the given pose. The rectangle extents
// are passed through unchanged.
GraspRect grasp_to_camera(const Vec3& grasp_center_obj, double grasp_angle_obj, const Pose& pose,
                          const View& view, double width_px, double height_px);

// Corners of the rotated rectangle in counter-clockwise (positive shoelace) order.
std::vector<Vec2> grasp_rect_corners(const GraspRect& r);

}  // namespace mvpr
