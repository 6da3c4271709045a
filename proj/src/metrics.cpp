#include "mvpr/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "mvpr/errors.hpp"

namespace mvpr {

double normalize_grasp_angle(double angle) {
    double a = std::fmod(angle, M_PI);
    if (a < 0.0) a += M_PI;
    return a;
}

void GraspRect::validate() const {
    if (!(width > 0.0) || !(height > 0.0))
        throw InputError("grasp rectangle extents must be positive");
    if (!center.allFinite() || !std::isfinite(angle))
        throw InputError("grasp rectangle has non-finite fields");
}

double add(const std::vector<Vec3>& points, const Pose& gt, const Pose& pred) {
    if (points.empty()) throw InputError("ADD of empty point set");
    double sum = 0.0;
    for (const Vec3& x : points)
        sum += (transform_point(gt, x) - transform_point(pred, x)).norm();
    return sum / static_cast<double>(points.size());
}

double add_s(const std::vector<Vec3>& points, const Pose& gt, const Pose& pred) {
    if (points.empty()) throw InputError("ADD-S of empty point set");
    std::vector<Vec3> gt_pts = transform_points(gt, points);
    std::vector<Vec3> pred_pts = transform_points(pred, points);
    double sum = 0.0;
    for (const Vec3& g : gt_pts) {
        double best = std::numeric_limits<double>::infinity();
        for (const Vec3& p : pred_pts) best = std::min(best, (g - p).squaredNorm());
        sum += std::sqrt(best);
    }
    return sum / static_cast<double>(points.size());
}

std::vector<Vec2> grasp_rect_corners(const GraspRect& r) {
    const double c = std::cos(r.angle);
    const double s = std::sin(r.angle);
    const double hw = 0.5 * r.width;
    const double hh = 0.5 * r.height;
    // CCW in the mathematical sense (positive shoelace area)
    const Vec2 local[4] = {{hw, hh}, {-hw, hh}, {-hw, -hh}, {hw, -hh}};
    std::vector<Vec2> out(4);
    for (int i = 0; i < 4; ++i)
        out[i] = r.center + Vec2(c * local[i].x() - s * local[i].y(),
                                 s * local[i].x() + c * local[i].y());
    return out;
}

namespace {

double shoelace_area(const std::vector<Vec2>& poly) {
    double a = 0.0;
    const size_t n = poly.size();
    for (size_t i = 0; i < n; ++i) {
        const Vec2& p = poly[i];
        const Vec2& q = poly[(i + 1) % n];
        a += p.x() * q.y() - q.x() * p.y();
    }
    return 0.5 * a;
}

// Sutherland-Hodgman clip of a convex polygon against the half-plane on the
// left of a->b (for CCW clip polygons that is the interior side).
std::vector<Vec2> clip_halfplane(const std::vector<Vec2>& poly, const Vec2& a, const Vec2& b) {
    std::vector<Vec2> out;
    const size_t n = poly.size();
    if (n == 0) return out;
    auto side = [&](const Vec2& p) {
        return (b.x() - a.x()) * (p.y() - a.y()) - (b.y() - a.y()) * (p.x() - a.x());
    };
    for (size_t i = 0; i < n; ++i) {
        const Vec2& cur = poly[i];
        const Vec2& nxt = poly[(i + 1) % n];
        const double sc = side(cur);
        const double sn = side(nxt);
        if (sc >= 0.0) out.push_back(cur);
        if ((sc > 0.0 && sn < 0.0) || (sc < 0.0 && sn > 0.0)) {
            const double t = sc / (sc - sn);
            out.push_back(cur + t * (nxt - cur));
        }
    }
    return out;
}

}  // namespace

double rect_iou(const GraspRect& a, const GraspRect& b) {
    a.validate();
    b.validate();
    const std::vector<Vec2> pa = grasp_rect_corners(a);
    const std::vector<Vec2> pb = grasp_rect_corners(b);

    std::vector<Vec2> inter = pa;
    for (int i = 0; i < 4 && !inter.empty(); ++i)
        inter = clip_halfplane(inter, pb[i], pb[(i + 1) % 4]);
    const double ai = inter.size() >= 3 ? std::abs(shoelace_area(inter)) : 0.0;

    const double area_a = a.width * a.height;
    const double area_b = b.width * b.height;
    const double uni = area_a + area_b - ai;
    if (uni <= 0.0) return 0.0;
    return std::clamp(ai / uni, 0.0, 1.0);
}

bool grasp_correct(const GraspRect& pred, const std::vector<GraspRect>& gts,
                   bool mod_pi_symmetry) {
    if (gts.empty()) throw InputError("grasp_correct needs at least one ground truth");
    const double angle_thresh = M_PI / 6.0;  // 30 degrees
    for (const GraspRect& gt : gts) {
        double diff;
        if (mod_pi_symmetry) {
            diff = std::fmod(std::abs(pred.angle - gt.angle), M_PI);
            diff = std::min(diff, M_PI - diff);
        } else {
            diff = std::fmod(std::abs(pred.angle - gt.angle), 2.0 * M_PI);
            diff = std::min(diff, 2.0 * M_PI - diff);
        }
        if (diff < angle_thresh && rect_iou(pred, gt) > 0.25) return true;
    }
    return false;
}

Prf detection_prf(const std::vector<std::vector<DetectionRecord>>& records,
                  const std::vector<int>& gt_counts, double threshold) {
    if (records.size() != gt_counts.size())
        throw InputError("detection_prf: records and gt_counts must have one entry per image");
    if (!(threshold > 0.0 && threshold < 1.0))
        throw InputError("detection_prf: threshold must lie in (0, 1)");

    long tp = 0;
    long n_pred = 0;
    long n_gt = 0;
    for (size_t img = 0; img < records.size(); ++img) {
        std::vector<DetectionRecord> sorted = records[img];
        std::stable_sort(sorted.begin(), sorted.end(),
                         [](const DetectionRecord& a, const DetectionRecord& b) {
                             return a.score > b.score;
                         });
        int remaining = gt_counts[img];
        for (const DetectionRecord& r : sorted) {
            if (r.iou > threshold && remaining > 0) {
                ++tp;
                --remaining;
            }
        }
        n_pred += static_cast<long>(sorted.size());
        n_gt += gt_counts[img];
    }
    Prf out;
    out.precision = n_pred > 0 ? static_cast<double>(tp) / n_pred : 0.0;
    out.recall = n_gt > 0 ? static_cast<double>(tp) / n_gt : 0.0;
    out.f1 = (out.precision + out.recall) > 0.0
                 ? 2.0 * out.precision * out.recall / (out.precision + out.recall)
                 : 0.0;
    return out;
}

double normalized_reach(const Vec3& hand, const Vec3& object, const Vec3& base) {
    const double denom = (object - base).norm();
    if (denom <= 0.0) throw InputError("normalized_reach: object coincides with robot base");
    return std::clamp((hand - object).norm() / denom, 0.0, 1.0);
}

GraspRect grasp_to_camera(const Vec3& grasp_center_obj, double grasp_angle_obj, const Pose& pose,
                          const View& view, double width_px, double height_px) {
    const Vec3 center_world = transform_point(pose, grasp_center_obj);
    const Vec3 center_cam = world_to_camera(view.extrinsics, center_world);
    const Vec2 center_px = project(view.intrinsics, center_cam);  // throws behind camera

    // Unit grasp direction in the object frame, rotated about object z.
    const Vec3 dir_obj(std::cos(grasp_angle_obj), std::sin(grasp_angle_obj), 0.0);
    // Directions transform without the translation: R * (s .* d), then into
    // camera coordinates and through the projection Jacobian at the center.
    const Vec3 dir_cam = view.extrinsics.rotation.matrix() *
                         (pose.rotation.matrix() * pose.scale.cwiseProduct(dir_obj));
    const Intrinsics& k = view.intrinsics;
    const double z = center_cam.z();
    const Vec2 dir_px(k.fx * (dir_cam.x() / z - center_cam.x() * dir_cam.z() / (z * z)),
                      k.fy * (dir_cam.y() / z - center_cam.y() * dir_cam.z() / (z * z)));

    GraspRect out;
    out.center = center_px;
    out.width = width_px;
    out.height = height_px;
    out.angle = dir_px.norm() > 0.0 ? normalize_grasp_angle(std::atan2(dir_px.y(), dir_px.x()))
                                    : 0.0;
    return out;
}

}  // namespace mvpr
