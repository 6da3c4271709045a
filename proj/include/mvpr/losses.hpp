#pragma once

#include <vector>

#include "mvpr/camera.hpp"
#include "mvpr/image.hpp"
#include "mvpr/mesh.hpp"
#include "mvpr/render.hpp"

namespace mvpr {

struct LossWeights {
    double lambda1 = 1.0;   // soft IoU term
    double lambda2 = 0.1;   // chamfer contour term (normalized by image diagonal)

    void validate() const;
};

// Exact Euclidean distance (pixels) to the nearest foreground pixel center;
// zero on foreground.
struct DistanceField {
    int width = 0;
    int height = 0;
    std::vector<double> values;

    double at(int x, int y) const { return values[static_cast<size_t>(y) * width + x]; }
};

// 1 - |pred * target| / |pred + target - pred * target| over pixels; 1 when the
// denominator is zero.
double soft_iou_loss(const SilhouetteImage& pred, const BinaryMask& target);

// Exact Euclidean distance transform (Felzenszwalb-Huttenlocher two-pass).
DistanceField distance_transform(const BinaryMask& mask);

// Foreground pixels with at least one 4-neighbor background or on the border.
BinaryMask contour_mask(const BinaryMask& mask);

// Symmetric Hausdorff distance between the contours of two masks, in pixels.
double hausdorff_distance(const BinaryMask& a, const BinaryMask& b);

// Mean distance of predicted soft mass to the target region:
// sum_j pred(j) * df(j) / sum_j pred(j). Differentiable stand-in for the
// contour term; the exact Hausdorff is reported, never differentiated.
double chamfer_surrogate(const SilhouetteImage& pred, const DistanceField& target_df);

// lambda1 * soft_iou + lambda2 * chamfer / diag, diag = sqrt(w^2 + h^2).
double combined_loss(const SilhouetteImage& pred, const BinaryMask& target,
                     const LossWeights& w);

// Mean of combined_loss over views; views that fail near-plane culling are
// excluded with a warning; error if all are excluded.
double multiview_loss(const TriMesh& mesh, const Pose& pose, const std::vector<View>& views,
                      const SoftParams& sp, const LossWeights& w);

struct LossAndGradient {
    double loss = 0.0;
    PoseGradient gradient;
};

LossAndGradient multiview_loss_gradient(const TriMesh& mesh, const Pose& pose,
                                        const std::vector<View>& views, const SoftParams& sp,
                                        const LossWeights& w);

namespace detail {
// combined loss plus d(loss)/d(pred pixel) for one view's prediction
double combined_loss_with_upstream(const SilhouetteImage& pred, const BinaryMask& target,
                                   const LossWeights& w, std::vector<double>* upstream);
}  // namespace detail

}  // namespace mvpr
