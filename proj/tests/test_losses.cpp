#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "mvpr/errors.hpp"
#include "mvpr/harness.hpp"
#include "mvpr/losses.hpp"
#include "mvpr/rng.hpp"
#include "mvpr/shapes.hpp"

using namespace mvpr;

namespace {

BinaryMask random_mask(Rng& rng, int w, int h, double fg_prob) {
    BinaryMask m(w, h);
    for (auto& v : m.values) v = rng.uniform() < fg_prob ? 1 : 0;
    return m;
}

// O(n^2) brute-force exact distance transform
DistanceField brute_dt(const BinaryMask& mask) {
    DistanceField df;
    df.width = mask.width;
    df.height = mask.height;
    df.values.resize(mask.values.size());
    for (int y = 0; y < mask.height; ++y) {
        for (int x = 0; x < mask.width; ++x) {
            long best = std::numeric_limits<long>::max();
            for (int v = 0; v < mask.height; ++v)
                for (int u = 0; u < mask.width; ++u)
                    if (mask.at(u, v)) {
                        const long d = static_cast<long>(x - u) * (x - u) +
                                       static_cast<long>(y - v) * (y - v);
                        best = std::min(best, d);
                    }
            df.values[static_cast<size_t>(y) * mask.width + x] =
                std::sqrt(static_cast<double>(best));
        }
    }
    return df;
}

// independent contour rule (4-neighbor or border)
BinaryMask brute_contour(const BinaryMask& m) {
    BinaryMask out(m.width, m.height);
    for (int y = 0; y < m.height; ++y)
        for (int x = 0; x < m.width; ++x) {
            if (!m.at(x, y)) continue;
            bool edge = x == 0 || y == 0 || x == m.width - 1 || y == m.height - 1;
            if (!edge)
                edge = !m.at(x - 1, y) || !m.at(x + 1, y) || !m.at(x, y - 1) || !m.at(x, y + 1);
            if (edge) out.set(x, y, true);
        }
    return out;
}

double brute_hausdorff(const BinaryMask& a, const BinaryMask& b) {
    const BinaryMask ca = brute_contour(a), cb = brute_contour(b);
    std::vector<std::pair<int, int>> pa, pb;
    for (int y = 0; y < a.height; ++y)
        for (int x = 0; x < a.width; ++x) {
            if (ca.at(x, y)) pa.emplace_back(x, y);
            if (cb.at(x, y)) pb.emplace_back(x, y);
        }
    auto one_sided = [](const auto& from, const auto& to) {
        long worst = 0;
        for (const auto& p : from) {
            long best = std::numeric_limits<long>::max();
            for (const auto& q : to) {
                const long d = static_cast<long>(p.first - q.first) * (p.first - q.first) +
                               static_cast<long>(p.second - q.second) * (p.second - q.second);
                best = std::min(best, d);
            }
            worst = std::max(worst, best);
        }
        return worst;
    };
    return std::sqrt(static_cast<double>(std::max(one_sided(pa, pb), one_sided(pb, pa))));
}

SilhouetteImage random_pred(Rng& rng, int w, int h) {
    SilhouetteImage img(w, h);
    for (auto& v : img.values) v = rng.uniform();
    return img;
}

}  // namespace

TEST_CASE("soft_iou_loss basics") {
    SilhouetteImage pred(10, 10);
    BinaryMask target(10, 10);
    SUBCASE("identical binary images give zero loss") {
        for (int i = 20; i < 60; ++i) {
            pred.values[i] = 1.0;
            target.values[i] = 1;
        }
        CHECK(soft_iou_loss(pred, target) == doctest::Approx(0.0));
    }
    SUBCASE("disjoint masks give loss one") {
        for (int i = 0; i < 20; ++i) pred.values[i] = 1.0;
        for (int i = 50; i < 70; ++i) target.values[i] = 1;
        CHECK(soft_iou_loss(pred, target) == doctest::Approx(1.0));
    }
    SUBCASE("10x10 squares overlapping in 50 px") {
        // pred covers columns 0..9 of rows 0..9 in a 20x10 canvas... use two
        // 10x10 squares on a 15x10 canvas overlapping in a 5x10 strip
        SilhouetteImage p(15, 10);
        BinaryMask t(15, 10);
        for (int y = 0; y < 10; ++y)
            for (int x = 0; x < 10; ++x) p.at(x, y) = 1.0;
        for (int y = 0; y < 10; ++y)
            for (int x = 5; x < 15; ++x) t.set(x, y, true);
        CHECK(soft_iou_loss(p, t) == doctest::Approx(1.0 - 50.0 / 150.0).epsilon(1e-12));
    }
    SUBCASE("dimension mismatch throws") {
        SilhouetteImage small(5, 5);
        CHECK_THROWS_AS(soft_iou_loss(small, target), InputError);
    }
}

TEST_CASE("distance_transform basics") {
    SUBCASE("all-foreground is all zeros") {
        BinaryMask m(7, 5);
        for (auto& v : m.values) v = 1;
        const DistanceField df = distance_transform(m);
        for (double v : df.values) CHECK(v == 0.0);
    }
    SUBCASE("single pixel pythagorean distance") {
        BinaryMask m(8, 8);
        m.set(0, 0, true);
        const DistanceField df = distance_transform(m);
        CHECK(df.at(3, 4) == doctest::Approx(5.0));
        CHECK(df.at(0, 0) == 0.0);
        CHECK(df.at(6, 0) == doctest::Approx(6.0));
    }
    SUBCASE("empty mask throws") {
        BinaryMask m(4, 4);
        CHECK_THROWS_AS(distance_transform(m), InputError);
    }
}

TEST_CASE("distance_transform equals brute force exactly") {
    Rng rng(101);
    // exhaustive over all masks up to 3x3
    for (int w = 1; w <= 3; ++w)
        for (int h = 1; h <= 3; ++h) {
            const int cells = w * h;
            for (int bits = 1; bits < (1 << cells); ++bits) {
                BinaryMask m(w, h);
                for (int i = 0; i < cells; ++i) m.values[i] = (bits >> i) & 1;
                const DistanceField fast = distance_transform(m);
                const DistanceField slow = brute_dt(m);
                for (size_t j = 0; j < fast.values.size(); ++j)
                    CHECK(fast.values[j] == slow.values[j]);
            }
        }
    // random rectangular masks
    for (int trial = 0; trial < 60; ++trial) {
        const int w = 1 + static_cast<int>(rng.uniform(0, 32));
        const int h = 1 + static_cast<int>(rng.uniform(0, 32));
        BinaryMask m = random_mask(rng, w, h, 0.2);
        if (m.empty_mask()) m.set(0, 0, true);
        const DistanceField fast = distance_transform(m);
        const DistanceField slow = brute_dt(m);
        for (size_t j = 0; j < fast.values.size(); ++j) CHECK(fast.values[j] == slow.values[j]);
    }
}

TEST_CASE("hausdorff_distance basics") {
    SUBCASE("identical masks") {
        Rng rng(7);
        BinaryMask m = random_mask(rng, 12, 12, 0.3);
        m.set(3, 3, true);
        CHECK(hausdorff_distance(m, m) == 0.0);
    }
    SUBCASE("two single pixels 7 apart") {
        BinaryMask a(10, 3), b(10, 3);
        a.set(1, 1, true);
        b.set(8, 1, true);
        CHECK(hausdorff_distance(a, b) == doctest::Approx(7.0));
    }
    SUBCASE("empty mask throws") {
        BinaryMask a(4, 4), b(4, 4);
        b.set(0, 0, true);
        CHECK_THROWS_AS(hausdorff_distance(a, b), InputError);
    }
}

TEST_CASE("hausdorff equals brute force exactly, is symmetric, triangle inequality") {
    Rng rng(103);
    std::vector<BinaryMask> masks;
    for (int i = 0; i < 30; ++i) {
        BinaryMask m = random_mask(rng, 16, 16, 0.15);
        if (m.empty_mask()) m.set(static_cast<int>(rng.uniform(0, 16)), 3, true);
        masks.push_back(m);
    }
    for (int i = 0; i + 1 < 30; ++i) {
        const double fast = hausdorff_distance(masks[i], masks[i + 1]);
        CHECK(fast == brute_hausdorff(masks[i], masks[i + 1]));
        CHECK(fast == hausdorff_distance(masks[i + 1], masks[i]));
    }
    for (int t = 0; t < 100; ++t) {
        const BinaryMask& a = masks[static_cast<size_t>(rng.uniform(0, 30))];
        const BinaryMask& b = masks[static_cast<size_t>(rng.uniform(0, 30))];
        const BinaryMask& c = masks[static_cast<size_t>(rng.uniform(0, 30))];
        CHECK(hausdorff_distance(a, c) <=
              hausdorff_distance(a, b) + hausdorff_distance(b, c) + 1e-9);
    }
}

TEST_CASE("chamfer_surrogate") {
    BinaryMask target(16, 16);
    for (int y = 4; y < 12; ++y)
        for (int x = 4; x < 12; ++x) target.set(x, y, true);
    const DistanceField df = distance_transform(target);

    SUBCASE("prediction inside the target has zero chamfer") {
        SilhouetteImage pred(16, 16);
        pred.at(5, 5) = 0.7;
        pred.at(8, 9) = 0.3;
        CHECK(chamfer_surrogate(pred, df) == 0.0);
    }
    SUBCASE("single pixel at known distance") {
        BinaryMask t(16, 16);
        t.set(2, 2, true);
        SilhouetteImage pred(16, 16);
        pred.at(2, 7) = 1.0;  // 5 pixels below
        CHECK(chamfer_surrogate(pred, distance_transform(t)) == doctest::Approx(5.0));
    }
    SUBCASE("weighted average oracle") {
        Rng rng(11);
        for (int trial = 0; trial < 20; ++trial) {
            const SilhouetteImage pred = random_pred(rng, 16, 16);
            double mass = 0.0, weighted = 0.0;
            for (size_t j = 0; j < pred.values.size(); ++j) {
                mass += pred.values[j];
                weighted += pred.values[j] * df.values[j];
            }
            CHECK(chamfer_surrogate(pred, df) == doctest::Approx(weighted / mass).epsilon(1e-9));
        }
    }
    SUBCASE("all-zero prediction throws") {
        SilhouetteImage pred(16, 16);
        CHECK_THROWS_AS(chamfer_surrogate(pred, df), NumericError);
    }
}

TEST_CASE("combined_loss") {
    Rng rng(13);
    BinaryMask target = random_mask(rng, 12, 12, 0.4);
    target.set(5, 5, true);
    const SilhouetteImage pred = random_pred(rng, 12, 12);

    SUBCASE("lambda2 = 0 reduces to weighted IoU") {
        LossWeights w;
        w.lambda1 = 0.7;
        w.lambda2 = 0.0;
        CHECK(combined_loss(pred, target, w) ==
              doctest::Approx(0.7 * soft_iou_loss(pred, target)).epsilon(1e-12));
    }
    SUBCASE("both weights zero gives zero") {
        LossWeights w;
        w.lambda1 = 0.0;
        w.lambda2 = 0.0;
        CHECK(combined_loss(pred, target, w) == 0.0);
    }
    SUBCASE("component-sum oracle") {
        LossWeights w;
        w.lambda1 = 1.3;
        w.lambda2 = 0.4;
        const double diag = std::hypot(12.0, 12.0);
        const double expected =
            1.3 * soft_iou_loss(pred, target) +
            0.4 * chamfer_surrogate(pred, distance_transform(target)) / diag;
        CHECK(combined_loss(pred, target, w) == doctest::Approx(expected).epsilon(1e-12));
    }
    SUBCASE("monotone in lambda2") {
        LossWeights lo, hi;
        lo.lambda2 = 0.1;
        hi.lambda2 = 0.9;
        CHECK(combined_loss(pred, target, lo) <= combined_loss(pred, target, hi));
    }
}

TEST_CASE("multiview_loss") {
    SceneSpec spec;
    spec.seed = 21;
    spec.n_views = 3;
    spec.image_size = 48;
    spec.mesh_source = "cube";
    const SyntheticScene scene = make_synthetic_scene(spec);
    SoftParams sp;
    LossWeights w;
    const Pose pose = perturb_pose(scene.gt, 8.0, 0.05, 0.05, 4);

    SUBCASE("single view equals combined loss") {
        const std::vector<View> one = {scene.views[0]};
        const SilhouetteImage pred = render_silhouette(scene.mesh, pose, one[0], sp);
        CHECK(multiview_loss(scene.mesh, pose, one, sp, w) ==
              doctest::Approx(combined_loss(pred, one[0].target, w)).epsilon(1e-15));
    }
    SUBCASE("duplicated view equals single view") {
        const std::vector<View> one = {scene.views[0]};
        const std::vector<View> two = {scene.views[0], scene.views[0]};
        CHECK(multiview_loss(scene.mesh, pose, two, sp, w) ==
              doctest::Approx(multiview_loss(scene.mesh, pose, one, sp, w)).epsilon(1e-15));
    }
    SUBCASE("three views average the per-view losses") {
        double sum = 0.0;
        for (const View& v : scene.views)
            sum += combined_loss(render_silhouette(scene.mesh, pose, v, sp), v.target, w);
        CHECK(multiview_loss(scene.mesh, pose, scene.views, sp, w) ==
              doctest::Approx(sum / 3.0).epsilon(1e-12));
    }
    SUBCASE("permutation invariance") {
        std::vector<View> shuffled = {scene.views[2], scene.views[0], scene.views[1]};
        CHECK(multiview_loss(scene.mesh, pose, scene.views, sp, w) ==
              doctest::Approx(multiview_loss(scene.mesh, pose, shuffled, sp, w)).epsilon(1e-12));
    }
    SUBCASE("views behind the camera are skipped; all-degenerate errors") {
        Pose behind = pose;
        behind.translation = camera_center(scene.views[0].extrinsics) -
                             10.0 * (pose.translation -
                                     camera_center(scene.views[0].extrinsics));
        // a pose behind every camera is hard to construct generically; use
        // a single view and push the object behind it
        const Vec3 cam_c = camera_center(scene.views[0].extrinsics);
        const Vec3 fwd = scene.views[0].extrinsics.rotation.matrix().row(2).transpose();
        Pose back_pose = pose;
        back_pose.translation = cam_c - 5.0 * fwd;
        const std::vector<View> one = {scene.views[0]};
        CHECK_THROWS_AS(multiview_loss(scene.mesh, back_pose, one, sp, w), NumericError);
    }
    SUBCASE("empty view list throws") {
        CHECK_THROWS_AS(multiview_loss(scene.mesh, pose, {}, sp, w), InputError);
    }
}

TEST_CASE("multiview_loss_gradient") {
    SceneSpec spec;
    spec.seed = 23;
    spec.n_views = 2;
    spec.image_size = 48;
    spec.mesh_source = "cube";
    const SyntheticScene scene = make_synthetic_scene(spec);
    SoftParams sp;
    const Pose pose = perturb_pose(scene.gt, 8.0, 0.05, 0.05, 5);

    SUBCASE("zero weights give exactly zero gradient") {
        LossWeights w;
        w.lambda1 = 0.0;
        w.lambda2 = 0.0;
        const LossAndGradient lg = multiview_loss_gradient(scene.mesh, pose, scene.views, sp, w);
        CHECK(lg.loss == 0.0);
        CHECK(lg.gradient.norm() == 0.0);
    }
    SUBCASE("loss equals multiview_loss") {
        LossWeights w;
        const LossAndGradient lg = multiview_loss_gradient(scene.mesh, pose, scene.views, sp, w);
        CHECK(lg.loss ==
              doctest::Approx(multiview_loss(scene.mesh, pose, scene.views, sp, w)).epsilon(1e-15));
    }
}

TEST_CASE("gradient nearly vanishes at a pose rendering pixel-identical to the target") {
    // face-on cube whose silhouette edges land exactly on pixel borders: every
    // center is half a pixel from the boundary, so the soft render saturates
    // to the binary target everywhere (differences ~1e-11 at sigma 1e-2)
    const TriMesh cube = make_cube(1.0);
    View view;
    view.intrinsics.width = view.intrinsics.height = 48;
    view.intrinsics.cx = view.intrinsics.cy = 24.0;
    const double dist = 4.0;
    view.intrinsics.fx = view.intrinsics.fy = 10.0 * (dist - 0.5) / 0.5;  // front face -> 20 px
    view.extrinsics.translation = Vec3(0, 0, dist);
    const Pose gt = Pose::identity();
    view.target = render_hard_mask(cube, gt, view);
    REQUIRE(view.target.count() == 20 * 20);

    SoftParams sp;  // sigma 1e-2
    LossWeights w;
    const SilhouetteImage pred = render_silhouette(cube, gt, view, sp);
    double max_diff = 0.0;
    for (size_t j = 0; j < pred.values.size(); ++j)
        max_diff = std::max(max_diff, std::abs(pred.values[j] - double(view.target.values[j])));
    REQUIRE(max_diff < 1e-9);  // pixel-identical within noise

    const std::vector<View> views = {view};
    const LossAndGradient at_gt = multiview_loss_gradient(cube, gt, views, sp, w);
    Pose off = gt;
    off.rotation = gt.rotation * so3_exp(Vec3(0, 0, 5.0 * M_PI / 180.0));
    const LossAndGradient at_off = multiview_loss_gradient(cube, off, views, sp, w);

    CHECK(at_gt.gradient.norm() < 1e-3 * at_off.gradient.norm());
}
