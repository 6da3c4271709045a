#include "mvpr/losses.hpp"

#include <cmath>
#include <cstdio>
#include <limits>

#include "mvpr/errors.hpp"

namespace mvpr {

void LossWeights::validate() const {
    if (!(lambda1 >= 0.0) || !(lambda2 >= 0.0) || !std::isfinite(lambda1) || !std::isfinite(lambda2))
        throw InputError("loss weights must be finite and non-negative");
}

namespace {

void require_same_dims(int wa, int ha, int wb, int hb) {
    if (wa != wb || ha != hb) throw InputError("image dimension mismatch");
}

// background sentinel: large but finite so parabola intersections stay finite
constexpr double kFar = 1e20;

// 1D squared distance transform over a sampled function (Felzenszwalb &
// Huttenlocher lower-envelope-of-parabolas pass).
void dt_1d(const double* f, int n, double* d, int* v, double* z) {
    int k = 0;
    v[0] = 0;
    z[0] = -kFar;
    z[1] = kFar;
    for (int q = 1; q < n; ++q) {
        double s = ((f[q] + q * q) - (f[v[k]] + v[k] * v[k])) / (2.0 * q - 2.0 * v[k]);
        while (s <= z[k]) {
            --k;
            s = ((f[q] + q * q) - (f[v[k]] + v[k] * v[k])) / (2.0 * q - 2.0 * v[k]);
        }
        ++k;
        v[k] = q;
        z[k] = s;
        z[k + 1] = kFar;
    }
    k = 0;
    for (int q = 0; q < n; ++q) {
        while (z[k + 1] < q) ++k;
        const double dq = q - v[k];
        d[q] = dq * dq + f[v[k]];
    }
}

}  // namespace

double soft_iou_loss(const SilhouetteImage& pred, const BinaryMask& target) {
    require_same_dims(pred.width, pred.height, target.width, target.height);
    double inter = 0.0;
    double uni = 0.0;
    for (size_t j = 0; j < pred.values.size(); ++j) {
        const double p = pred.values[j];
        const double t = target.values[j] ? 1.0 : 0.0;
        inter += p * t;
        uni += p + t - p * t;
    }
    if (uni == 0.0) return 1.0;
    return 1.0 - inter / uni;
}

DistanceField distance_transform(const BinaryMask& mask) {
    if (mask.empty_mask()) throw InputError("distance transform of empty mask");
    const int w = mask.width;
    const int h = mask.height;
    const int n = std::max(w, h);

    std::vector<double> grid(static_cast<size_t>(w) * h);
    for (size_t j = 0; j < grid.size(); ++j) grid[j] = mask.values[j] ? 0.0 : kFar;

    std::vector<double> f(n), d(n), z(n + 1);
    std::vector<int> v(n);

    // columns, then rows
    for (int x = 0; x < w; ++x) {
        for (int y = 0; y < h; ++y) f[y] = grid[static_cast<size_t>(y) * w + x];
        dt_1d(f.data(), h, d.data(), v.data(), z.data());
        for (int y = 0; y < h; ++y) grid[static_cast<size_t>(y) * w + x] = d[y];
    }
    for (int y = 0; y < h; ++y) {
        double* row = &grid[static_cast<size_t>(y) * w];
        for (int x = 0; x < w; ++x) f[x] = row[x];
        dt_1d(f.data(), w, d.data(), v.data(), z.data());
        for (int x = 0; x < w; ++x) row[x] = d[x];
    }

    DistanceField df;
    df.width = w;
    df.height = h;
    df.values.resize(grid.size());
    for (size_t j = 0; j < grid.size(); ++j) df.values[j] = std::sqrt(grid[j]);
    return df;
}

BinaryMask contour_mask(const BinaryMask& mask) {
    BinaryMask out(mask.width, mask.height);
    for (int y = 0; y < mask.height; ++y) {
        for (int x = 0; x < mask.width; ++x) {
            if (!mask.at(x, y)) continue;
            const bool border = x == 0 || y == 0 || x == mask.width - 1 || y == mask.height - 1;
            const bool exposed = border || !mask.at(x - 1, y) || !mask.at(x + 1, y) ||
                                 !mask.at(x, y - 1) || !mask.at(x, y + 1);
            if (exposed) out.set(x, y, true);
        }
    }
    return out;
}

double hausdorff_distance(const BinaryMask& a, const BinaryMask& b) {
    require_same_dims(a.width, a.height, b.width, b.height);
    if (a.empty_mask() || b.empty_mask()) throw InputError("Hausdorff distance of empty mask");
    const BinaryMask ca = contour_mask(a);
    const BinaryMask cb = contour_mask(b);
    const DistanceField da = distance_transform(ca);
    const DistanceField db = distance_transform(cb);
    double worst = 0.0;
    for (size_t j = 0; j < ca.values.size(); ++j) {
        if (ca.values[j]) worst = std::max(worst, db.values[j]);
        if (cb.values[j]) worst = std::max(worst, da.values[j]);
    }
    return worst;
}

double chamfer_surrogate(const SilhouetteImage& pred, const DistanceField& target_df) {
    require_same_dims(pred.width, pred.height, target_df.width, target_df.height);
    double mass = 0.0;
    double weighted = 0.0;
    for (size_t j = 0; j < pred.values.size(); ++j) {
        mass += pred.values[j];
        weighted += pred.values[j] * target_df.values[j];
    }
    if (mass == 0.0) throw NumericError("chamfer surrogate undefined for all-zero prediction");
    return weighted / mass;
}

double combined_loss(const SilhouetteImage& pred, const BinaryMask& target,
                     const LossWeights& w) {
    double loss = w.lambda1 == 0.0 ? 0.0 : w.lambda1 * soft_iou_loss(pred, target);
    if (w.lambda2 != 0.0) {
        const double diag = std::hypot(static_cast<double>(pred.width),
                                       static_cast<double>(pred.height));
        loss += w.lambda2 * chamfer_surrogate(pred, distance_transform(target)) / diag;
    }
    return loss;
}

namespace detail {

double combined_loss_with_upstream(const SilhouetteImage& pred, const BinaryMask& target,
                                   const LossWeights& w, std::vector<double>* upstream) {
    require_same_dims(pred.width, pred.height, target.width, target.height);
    const size_t n = pred.values.size();
    upstream->assign(n, 0.0);

    double loss = 0.0;
    if (w.lambda1 != 0.0) {
        double inter = 0.0;
        double uni = 0.0;
        for (size_t j = 0; j < n; ++j) {
            const double p = pred.values[j];
            const double t = target.values[j] ? 1.0 : 0.0;
            inter += p * t;
            uni += p + t - p * t;
        }
        if (uni == 0.0) {
            loss += w.lambda1;  // gradient is zero at this plateau
        } else {
            loss += w.lambda1 * (1.0 - inter / uni);
            const double inv_u = 1.0 / uni;
            const double i_over_u2 = inter * inv_u * inv_u;
            for (size_t j = 0; j < n; ++j) {
                const double t = target.values[j] ? 1.0 : 0.0;
                // d/dp_j (1 - I/U) = (I*(1-t) - t*U) / U^2
                (*upstream)[j] += w.lambda1 * (i_over_u2 * (1.0 - t) - t * inv_u);
            }
        }
    }
    if (w.lambda2 != 0.0) {
        const DistanceField df = distance_transform(target);
        double mass = 0.0;
        double weighted = 0.0;
        for (size_t j = 0; j < n; ++j) {
            mass += pred.values[j];
            weighted += pred.values[j] * df.values[j];
        }
        if (mass == 0.0) throw NumericError("chamfer surrogate undefined for all-zero prediction");
        const double chamfer = weighted / mass;
        const double diag = std::hypot(static_cast<double>(pred.width),
                                       static_cast<double>(pred.height));
        loss += w.lambda2 * chamfer / diag;
        const double k = w.lambda2 / (diag * mass);
        for (size_t j = 0; j < n; ++j)
            (*upstream)[j] += k * (df.values[j] - chamfer);
    }
    return loss;
}

}  // namespace detail

double multiview_loss(const TriMesh& mesh, const Pose& pose, const std::vector<View>& views,
                      const SoftParams& sp, const LossWeights& w) {
    if (views.empty()) throw InputError("multiview loss needs at least one view");
    double sum = 0.0;
    int used = 0;
    for (size_t n = 0; n < views.size(); ++n) {
        try {
            const SilhouetteImage pred = render_silhouette(mesh, pose, views[n], sp);
            sum += combined_loss(pred, views[n].target, w);
            ++used;
        } catch (const BehindCameraError&) {
            std::fprintf(stderr, "warning: view %zu fully behind camera, excluded from loss\n", n);
        }
    }
    if (used == 0) throw NumericError("all views degenerate: object behind every camera");
    return sum / used;
}

LossAndGradient multiview_loss_gradient(const TriMesh& mesh, const Pose& pose,
                                        const std::vector<View>& views, const SoftParams& sp,
                                        const LossWeights& w) {
    if (views.empty()) throw InputError("multiview loss needs at least one view");
    LossAndGradient out;
    std::vector<double> upstream;
    int used = 0;
    for (size_t n = 0; n < views.size(); ++n) {
        try {
            const SilhouetteImage pred = render_silhouette(mesh, pose, views[n], sp);
            out.loss += detail::combined_loss_with_upstream(pred, views[n].target, w, &upstream);
            out.gradient += backward_pose(mesh, pose, views[n], sp, upstream);
            ++used;
        } catch (const BehindCameraError&) {
            std::fprintf(stderr, "warning: view %zu fully behind camera, excluded from loss\n", n);
        }
    }
    if (used == 0) throw NumericError("all views degenerate: object behind every camera");
    out.loss /= used;
    out.gradient *= 1.0 / used;
    return out;
}

}  // namespace mvpr
