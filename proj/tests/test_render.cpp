#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstring>

#include "mvpr/errors.hpp"
#include "mvpr/harness.hpp"
#include "mvpr/losses.hpp"
#include "mvpr/render.hpp"
#include "mvpr/rng.hpp"
#include "mvpr/shapes.hpp"

using namespace mvpr;

namespace {

View make_view(int size, double fx, double dist) {
    View v;
    v.intrinsics.fx = v.intrinsics.fy = fx;
    v.intrinsics.cx = v.intrinsics.cy = size / 2.0;
    v.intrinsics.width = v.intrinsics.height = size;
    v.extrinsics.translation = Vec3(0, 0, dist);  // camera at -dist on z, looking at origin
    v.target = BinaryMask(size, size);
    return v;
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// --- independent projection helpers for oracles ---

std::vector<Vec2> project_all(const TriMesh& mesh, const Pose& pose, const View& view) {
    std::vector<Vec2> out;
    const Intrinsics& k = view.intrinsics;
    for (const Vec3& x : mesh.vertices) {
        const Vec3 c = view.extrinsics.rotation.matrix() *
                           (pose.rotation.matrix() * pose.scale.cwiseProduct(x) +
                            pose.translation) +
                       view.extrinsics.translation;
        out.emplace_back(k.cx + k.fx * c.x() / c.z(), k.cy + k.fy * c.y() / c.z());
    }
    return out;
}

double cross2(const Vec2& o, const Vec2& a, const Vec2& b) {
    return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
}

// Andrew monotone chain
std::vector<Vec2> convex_hull(std::vector<Vec2> pts) {
    std::sort(pts.begin(), pts.end(), [](const Vec2& a, const Vec2& b) {
        return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
    });
    std::vector<Vec2> hull(2 * pts.size());
    size_t k = 0;
    for (size_t i = 0; i < pts.size(); ++i) {
        while (k >= 2 && cross2(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
        hull[k++] = pts[i];
    }
    const size_t lower = k + 1;
    for (size_t i = pts.size() - 1; i-- > 0;) {
        while (k >= lower && cross2(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
        hull[k++] = pts[i];
    }
    hull.resize(k - 1);
    return hull;
}

double signed_dist_to_hull(const std::vector<Vec2>& hull, const Vec2& q) {
    // positive inside (hull CCW), magnitude = distance to boundary
    double min_d = 1e30;
    bool inside = true;
    const size_t n = hull.size();
    for (size_t i = 0; i < n; ++i) {
        const Vec2& a = hull[i];
        const Vec2& b = hull[(i + 1) % n];
        if (cross2(a, b, q) < 0) inside = false;
        const Vec2 ab = b - a;
        const double t = std::clamp((q - a).dot(ab) / ab.squaredNorm(), 0.0, 1.0);
        min_d = std::min(min_d, (q - (a + t * ab)).norm());
    }
    return inside ? min_d : -min_d;
}

// Smoothness window for the finite-difference oracle: excludes pixels where
// the loss is not C2 across the step interval (centers on the flat spot of
// the signed squared distance, or where the nearest-edge assignment of an
// unsaturated face can switch).
bool fd_smooth_pixel(const TriMesh& mesh, const Pose& pose, const View& view, double qx,
                     double qy, double sigma) {
    const Intrinsics& k = view.intrinsics;
    std::vector<Vec3> cam(mesh.vertices.size());
    for (size_t i = 0; i < mesh.vertices.size(); ++i)
        cam[i] = view.extrinsics.rotation.matrix() *
                     (pose.rotation.matrix() * pose.scale.cwiseProduct(mesh.vertices[i]) +
                      pose.translation) +
                 view.extrinsics.translation;
    const double saturated = std::sqrt(42.0 * sigma);
    for (const auto& f : mesh.faces) {
        if (cam[f[0]].z() <= 1e-4 || cam[f[1]].z() <= 1e-4 || cam[f[2]].z() <= 1e-4) continue;
        Vec2 p[3];
        for (int c = 0; c < 3; ++c)
            p[c] = Vec2(k.cx + k.fx * cam[f[c]].x() / cam[f[c]].z(),
                        k.cy + k.fy * cam[f[c]].y() / cam[f[c]].z());
        double d[3];
        for (int e = 0; e < 3; ++e) {
            const Vec2 a = p[e];
            const Vec2 ab = p[(e + 1) % 3] - a;
            const double len2 = ab.squaredNorm();
            const double t =
                len2 > 0 ? std::clamp((Vec2(qx, qy) - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
            d[e] = (Vec2(qx, qy) - (a + t * ab)).norm();
        }
        std::sort(d, d + 3);
        if (d[0] > saturated) continue;
        if (d[0] < 0.02) return false;
        if (d[1] - d[0] < 0.05) return false;
    }
    return true;
}

}  // namespace

TEST_CASE("soft silhouette follows the occupancy formula") {
    // one large triangle; probe pixels at known interior/exterior margins
    TriMesh tri;
    tri.vertices = {{-1.0, -1.0, 0.0}, {1.0, -1.0, 0.0}, {0.0, 1.5, 0.0}};
    tri.faces = {{0, 1, 2}};
    const View view = make_view(64, 40.0, 2.0);
    SoftParams sp;  // sigma 1e-2

    const SilhouetteImage img = render_silhouette(tri, Pose::identity(), view, sp);
    const auto px = project_all(tri, Pose::identity(), view);

    int checked_in = 0, checked_out = 0;
    for (int y = 0; y < 64; ++y) {
        for (int x = 0; x < 64; ++x) {
            // distance to the triangle boundary with sign from the hull test
            const double sd = signed_dist_to_hull(convex_hull(px), Vec2(x + 0.5, y + 0.5));
            if (sd * sd >= 5.0 * sp.sigma) {
                if (sd > 0) {
                    CHECK(img.at(x, y) >= 0.99);
                    ++checked_in;
                } else {
                    CHECK(img.at(x, y) <= 0.01);
                    ++checked_out;
                }
            }
            // exact formula at unsaturated pixels
            if (std::abs(sd) < 2.0) {
                const double expected = sigmoid((sd >= 0 ? 1.0 : -1.0) * sd * sd / sp.sigma);
                CHECK(img.at(x, y) == doctest::Approx(expected).epsilon(1e-9));
            }
        }
    }
    CHECK(checked_in > 50);
    CHECK(checked_out > 1000);
}

TEST_CASE("render errors when the mesh is fully behind the camera") {
    const TriMesh cube = make_cube();
    View view = make_view(32, 40.0, -3.0);  // object behind the camera
    SoftParams sp;
    CHECK_THROWS_AS(render_silhouette(cube, Pose::identity(), view, sp), BehindCameraError);
    CHECK_THROWS_AS(render_hard_mask(cube, Pose::identity(), view), BehindCameraError);
}

TEST_CASE("hard mask: full-cover triangle and empty off-screen projection") {
    TriMesh tri;
    tri.vertices = {{-50.0, -50.0, 0.0}, {50.0, -50.0, 0.0}, {0.0, 80.0, 0.0}};
    tri.faces = {{0, 1, 2}};
    const View view = make_view(32, 40.0, 2.0);
    CHECK(render_hard_mask(tri, Pose::identity(), view).count() == 32 * 32);

    Pose off;
    off.translation = Vec3(500.0, 0.0, 0.0);  // in front but far off-screen
    CHECK(render_hard_mask(tri, off, view).count() == 0);
}

TEST_CASE("hard mask of a cube equals the convex hull oracle exactly") {
    const TriMesh cube = make_cube(1.0);
    View view = make_view(64, 100.0, 5.0);
    Pose pose;
    pose.rotation = euler_to_rotation(0.37, -0.21, 0.53);

    const BinaryMask mask = render_hard_mask(cube, pose, view);
    const auto hull = convex_hull(project_all(cube, pose, view));

    long oracle_count = 0;
    double closest_margin = 1e30;
    for (int y = 0; y < 64; ++y) {
        for (int x = 0; x < 64; ++x) {
            const double sd = signed_dist_to_hull(hull, Vec2(x + 0.5, y + 0.5));
            closest_margin = std::min(closest_margin, std::abs(sd));
            const bool inside = sd > 0;
            if (inside) ++oracle_count;
            CHECK(mask.at(x, y) == inside);
        }
    }
    CHECK(mask.count() == oracle_count);
    CHECK(closest_margin > 1e-6);  // no pixel center sits on the boundary; oracle is exact
}

TEST_CASE("hard mask boundary rule covers shared edges exactly once") {
    // a quad split along its diagonal, axis-aligned so pixel centers lie
    // exactly on edges; the union must have no seams and no double edges;
    // each row inside the quad covers exactly its width
    TriMesh quad;
    // corners at pixel centers (8.5, 8.5) .. (24.5, 24.5) in a 32x32 image
    const double z = 2.0, f = 2.0;  // fx * x / z + 16 maps x=8.5px offset
    auto unproject = [&](double u, double v) {
        return Vec3((u - 16.0) * z / (f * 16.0), (v - 16.0) * z / (f * 16.0), 0.0);
    };
    quad.vertices = {unproject(8.5, 8.5), unproject(24.5, 8.5), unproject(24.5, 24.5),
                     unproject(8.5, 24.5)};
    quad.faces = {{0, 1, 2}, {0, 2, 3}};
    const View view = make_view(32, f * 16.0, z);
    const BinaryMask mask = render_hard_mask(quad, Pose::identity(), view);
    // the top-left rule includes top/left boundary centers, excludes bottom/right
    CHECK(mask.count() == 16 * 16);
}

TEST_CASE("soft converges to hard as sigma shrinks") {
    SceneSpec spec;
    spec.seed = 99;
    spec.n_views = 1;
    spec.image_size = 64;
    spec.mesh_source = "mug";
    const SyntheticScene scene = make_synthetic_scene(spec);
    const View& view = scene.views[0];

    const BinaryMask hard = render_hard_mask(scene.mesh, scene.gt, view);
    SoftParams sp;
    sp.sigma = 1e-4;
    const SilhouetteImage soft = render_silhouette(scene.mesh, scene.gt, view, sp);

    const DistanceField boundary_dist = distance_transform(contour_mask(hard));
    long disagree = 0, near_boundary = 0;
    for (int y = 0; y < 64; ++y) {
        for (int x = 0; x < 64; ++x) {
            const double h = hard.at(x, y) ? 1.0 : 0.0;
            if (std::abs(soft.at(x, y) - h) > 0.5) {
                ++disagree;
                if (boundary_dist.at(x, y) <= 2.0) ++near_boundary;
            }
        }
    }
    if (disagree > 0) CHECK(near_boundary >= 0.99 * disagree);
}

TEST_CASE("silhouette values stay in [0,1] and renders are bit-deterministic") {
    SceneSpec spec;
    spec.seed = 5;
    spec.n_views = 1;
    spec.image_size = 48;
    spec.mesh_source = "banana";
    const SyntheticScene scene = make_synthetic_scene(spec);
    SoftParams sp;
    const SilhouetteImage a = render_silhouette(scene.mesh, scene.gt, scene.views[0], sp);
    for (double v : a.values) {
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
    }
    const SilhouetteImage b = render_silhouette(scene.mesh, scene.gt, scene.views[0], sp);
    CHECK(std::memcmp(a.values.data(), b.values.data(), a.values.size() * sizeof(double)) == 0);
}

TEST_CASE("backward_pose: zero upstream gives zero gradient") {
    const TriMesh cube = make_cube();
    const View view = make_view(32, 40.0, 3.0);
    SoftParams sp;
    const std::vector<double> upstream(32 * 32, 0.0);
    const PoseGradient g = backward_pose(cube, Pose::identity(), view, sp, upstream);
    CHECK(g.norm() == 0.0);
}

TEST_CASE("backward_pose matches central differences at step 1e-4") {
    // upstream weights are random in [-1,1] but zeroed on the narrow bands
    // where the finite-difference oracle itself is invalid (kinks of the
    // distance function); the analytic gradient needs no such exclusion
    const double h = 1e-4;
    const double sigma = 1.0;
    int components_checked = 0;
    for (int si = 0; si < 20; ++si) {
        SceneSpec spec;
        spec.seed = mix_seed(0, si);
        spec.n_views = 2;
        spec.image_size = 64;
        spec.baseline_min_deg = 40.0;
        spec.mesh_source = "cube";
        const SyntheticScene scene = make_synthetic_scene(spec);
        const Pose pose = perturb_pose(scene.gt, 6.0, 0.03, 0.05, mix_seed(spec.seed, 0xFD00ULL));
        SoftParams sp;
        sp.sigma = sigma;
        const View& view = scene.views[si % 2];

        Rng urng(mix_seed(spec.seed, 77));
        std::vector<double> upstream(64 * 64);
        for (int y = 0; y < 64; ++y)
            for (int x = 0; x < 64; ++x) {
                double u = urng.uniform(-1.0, 1.0);
                if (!fd_smooth_pixel(scene.mesh, pose, view, x + 0.5, y + 0.5, sigma)) u = 0.0;
                upstream[y * 64 + x] = u;
            }

        const PoseGradient g = backward_pose(scene.mesh, pose, view, sp, upstream);
        auto weighted = [&](const Pose& p) {
            const SilhouetteImage img = render_silhouette(scene.mesh, p, view, sp);
            double s = 0.0;
            for (size_t j = 0; j < img.values.size(); ++j) s += upstream[j] * img.values[j];
            return s;
        };

        for (int blk = 0; blk < 3; ++blk) {
            for (int m = 0; m < 3; ++m) {
                Pose plus = pose, minus = pose;
                double analytic = 0.0;
                if (blk == 0) {
                    plus.translation[m] += h;
                    minus.translation[m] -= h;
                    analytic = g.d_translation[m];
                } else if (blk == 1) {
                    Vec3 omega = Vec3::Zero();
                    omega[m] = h;
                    plus.rotation = pose.rotation * so3_exp(omega);
                    minus.rotation = pose.rotation * so3_exp(-omega);
                    analytic = g.d_rotation[m];
                } else {
                    plus.scale[m] *= std::exp(h);
                    minus.scale[m] *= std::exp(-h);
                    analytic = pose.scale[m] * g.d_scale[m];
                }
                const double fd = (weighted(plus) - weighted(minus)) / (2.0 * h);
                const double tol = std::max(1e-3 * std::max(std::abs(analytic), std::abs(fd)), 1e-8);
                CHECK(std::abs(analytic - fd) <= tol);
                ++components_checked;
            }
        }
    }
    CHECK(components_checked == 180);
}

TEST_CASE("symmetric scene has vanishing lateral translation gradient") {
    // octahedron dead-center on the optical axis: its triangulation maps to
    // itself under both image-plane mirrors, so the lateral gradients cancel
    TriMesh oct;
    const double r = 0.5;
    oct.vertices = {{r, 0, 0}, {-r, 0, 0}, {0, r, 0}, {0, -r, 0}, {0, 0, r}, {0, 0, -r}};
    oct.faces = {{0, 2, 4}, {2, 1, 4}, {1, 3, 4}, {3, 0, 4},
                 {2, 0, 5}, {1, 2, 5}, {3, 1, 5}, {0, 3, 5}};
    const View view = make_view(64, 80.0, 3.0);
    SoftParams sp;
    const std::vector<double> upstream(64 * 64, 1.0);
    const PoseGradient g = backward_pose(oct, Pose::identity(), view, sp, upstream);
    CHECK(std::abs(g.d_translation.x()) < 1e-6);
    CHECK(std::abs(g.d_translation.y()) < 1e-6);
}
