#include "mvpr/render.hpp"

#include <algorithm>
#include <cmath>

#include "mvpr/errors.hpp"

namespace mvpr {

void SoftParams::validate() const {
    if (!(sigma > 0.0)) throw InputError("soft params: sigma must be positive");
    if (!(cull_eps > 0.0)) throw InputError("soft params: cull_eps must be positive");
}

PoseGradient& PoseGradient::operator+=(const PoseGradient& o) {
    d_scale += o.d_scale;
    d_rotation += o.d_rotation;
    d_translation += o.d_translation;
    return *this;
}

PoseGradient& PoseGradient::operator*=(double k) {
    d_scale *= k;
    d_rotation *= k;
    d_translation *= k;
    return *this;
}

bool PoseGradient::all_finite() const {
    return d_scale.allFinite() && d_rotation.allFinite() && d_translation.allFinite();
}

double PoseGradient::norm() const {
    return std::sqrt(d_scale.squaredNorm() + d_rotation.squaredNorm() +
                     d_translation.squaredNorm());
}

namespace {

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Beyond this distance (squared, in units of sigma) the face occupancy is
// below 2^-54, so 1-p rounds to exactly 1.0 and the face cannot change the
// pixel; skipping it keeps the result bit-identical to the full face product.
constexpr double kSkipSq = 38.0;

struct ProjectedFace {
    int face;        // index into mesh.faces
    Vec2 px[3];      // projected pixel positions
    Vec3 cam[3];     // camera-space positions
    double xmin, xmax, ymin, ymax;
};

struct ProjectedScene {
    std::vector<ProjectedFace> faces;               // ascending face index
    std::vector<std::vector<int>> row_buckets;      // per image row, indices into faces
};

ProjectedScene project_mesh(const TriMesh& mesh, const Pose& pose, const View& view,
                            double cull_eps, double influence_radius) {
    const Intrinsics& k = view.intrinsics;
    const Mat3& r_pose = pose.rotation.matrix();
    const Mat3& r_cam = view.extrinsics.rotation.matrix();
    const Vec3& t_cam = view.extrinsics.translation;

    // camera-space map fused: c = Rc * (Rp * (s.*x) + tp) + tc
    const Mat3 a = r_cam * r_pose;
    const Vec3 b = r_cam * pose.translation + t_cam;

    std::vector<Vec3> cam(mesh.vertices.size());
    for (size_t i = 0; i < mesh.vertices.size(); ++i)
        cam[i] = a * pose.scale.cwiseProduct(mesh.vertices[i]) + b;

    ProjectedScene scene;
    scene.faces.reserve(mesh.faces.size());
    for (size_t fi = 0; fi < mesh.faces.size(); ++fi) {
        const auto& f = mesh.faces[fi];
        if (cam[f[0]].z() <= cull_eps || cam[f[1]].z() <= cull_eps || cam[f[2]].z() <= cull_eps)
            continue;
        ProjectedFace pf;
        pf.face = static_cast<int>(fi);
        for (int c = 0; c < 3; ++c) {
            pf.cam[c] = cam[f[c]];
            pf.px[c] = Vec2(k.cx + k.fx * pf.cam[c].x() / pf.cam[c].z(),
                            k.cy + k.fy * pf.cam[c].y() / pf.cam[c].z());
        }
        pf.xmin = std::min({pf.px[0].x(), pf.px[1].x(), pf.px[2].x()});
        pf.xmax = std::max({pf.px[0].x(), pf.px[1].x(), pf.px[2].x()});
        pf.ymin = std::min({pf.px[0].y(), pf.px[1].y(), pf.px[2].y()});
        pf.ymax = std::max({pf.px[0].y(), pf.px[1].y(), pf.px[2].y()});
        scene.faces.push_back(pf);
    }
    if (scene.faces.empty())
        throw BehindCameraError("object fully behind camera: zero faces survive culling");

    scene.row_buckets.resize(view.intrinsics.height);
    const double r = influence_radius;
    for (size_t i = 0; i < scene.faces.size(); ++i) {
        const ProjectedFace& pf = scene.faces[i];
        // rows whose center y+0.5 falls within [ymin-r, ymax+r]
        int y0 = static_cast<int>(std::ceil(pf.ymin - r - 0.5));
        int y1 = static_cast<int>(std::floor(pf.ymax + r - 0.5));
        y0 = std::max(y0, 0);
        y1 = std::min(y1, view.intrinsics.height - 1);
        for (int y = y0; y <= y1; ++y) scene.row_buckets[y].push_back(static_cast<int>(i));
    }
    return scene;
}

// Where the gradient of the signed squared distance attaches.
struct EdgeHit {
    int edge;       // nearest edge index e: segment (px[e], px[(e+1)%3])
    double tau;     // clamped projection parameter along that segment
    Vec2 diff;      // q - closest point
    double sign;    // +1 inside, -1 outside
};

inline double edge_fn(const Vec2& a, const Vec2& b, double qx, double qy) {
    return (b.x() - a.x()) * (qy - a.y()) - (b.y() - a.y()) * (qx - a.x());
}

// Signed squared distance from pixel center q to the projected triangle:
// squared distance to the nearest boundary segment, positive inside.
double signed_sq_distance(const ProjectedFace& f, double qx, double qy, EdgeHit* hit) {
    double best = std::numeric_limits<double>::infinity();
    int best_edge = 0;
    double best_tau = 0.0;
    Vec2 best_diff(0, 0);
    for (int e = 0; e < 3; ++e) {
        const Vec2& a = f.px[e];
        const Vec2& b = f.px[(e + 1) % 3];
        const double abx = b.x() - a.x();
        const double aby = b.y() - a.y();
        const double len2 = abx * abx + aby * aby;
        double tau = 0.0;
        if (len2 > 0.0) {
            tau = ((qx - a.x()) * abx + (qy - a.y()) * aby) / len2;
            tau = std::clamp(tau, 0.0, 1.0);
        }
        const double dx = qx - (a.x() + tau * abx);
        const double dy = qy - (a.y() + tau * aby);
        const double d2 = dx * dx + dy * dy;
        if (d2 < best) {
            best = d2;
            best_edge = e;
            best_tau = tau;
            best_diff = Vec2(dx, dy);
        }
    }

    const double e0 = edge_fn(f.px[0], f.px[1], qx, qy);
    const double e1 = edge_fn(f.px[1], f.px[2], qx, qy);
    const double e2 = edge_fn(f.px[2], f.px[0], qx, qy);
    const bool inside = (e0 >= 0.0 && e1 >= 0.0 && e2 >= 0.0) ||
                        (e0 <= 0.0 && e1 <= 0.0 && e2 <= 0.0);
    const double sign = inside ? 1.0 : -1.0;
    if (hit) {
        hit->edge = best_edge;
        hit->tau = best_tau;
        hit->diff = best_diff;
        hit->sign = sign;
    }
    return sign * best;
}

// Hard-rasterization boundary rule: include top and left edges only, so a
// pixel center lying exactly on a shared edge belongs to exactly one triangle.
inline bool top_left(const Vec2& a, const Vec2& b) {
    const double ex = b.x() - a.x();
    const double ey = b.y() - a.y();
    return (ey == 0.0 && ex > 0.0) || ey < 0.0;
}

bool inside_hard(const ProjectedFace& f, double qx, double qy) {
    Vec2 v0 = f.px[0], v1 = f.px[1], v2 = f.px[2];
    const double area2 = edge_fn(v0, v1, v2.x(), v2.y());
    if (area2 == 0.0) return false;  // degenerate projection has no interior
    if (area2 < 0.0) std::swap(v1, v2);
    const Vec2* vs[3] = {&v0, &v1, &v2};
    for (int e = 0; e < 3; ++e) {
        const Vec2& a = *vs[e];
        const Vec2& b = *vs[(e + 1) % 3];
        const double w = edge_fn(a, b, qx, qy);
        if (w < 0.0) return false;
        if (w == 0.0 && !top_left(a, b)) return false;
    }
    return true;
}

}  // namespace

SilhouetteImage render_silhouette(const TriMesh& mesh, const Pose& pose, const View& view,
                                  const SoftParams& sp) {
    const double r = std::sqrt(kSkipSq * sp.sigma);
    const ProjectedScene scene = project_mesh(mesh, pose, view, sp.cull_eps, r);
    const int w = view.intrinsics.width;
    const int h = view.intrinsics.height;
    const double inv_sigma = 1.0 / sp.sigma;

    SilhouetteImage img(w, h);
    for (int y = 0; y < h; ++y) {
        const double qy = y + 0.5;
        const auto& bucket = scene.row_buckets[y];
        double* row = &img.values[static_cast<size_t>(y) * w];
        for (int x = 0; x < w; ++x) {
            const double qx = x + 0.5;
            double prod = 1.0;
            for (int idx : bucket) {
                const ProjectedFace& f = scene.faces[idx];
                if (qx < f.xmin - r || qx > f.xmax + r) continue;
                const double d = signed_sq_distance(f, qx, qy, nullptr);
                prod *= 1.0 - sigmoid(d * inv_sigma);
            }
            row[x] = 1.0 - prod;
        }
    }
    return img;
}

BinaryMask render_hard_mask(const TriMesh& mesh, const Pose& pose, const View& view,
                            double cull_eps) {
    const ProjectedScene scene = project_mesh(mesh, pose, view, cull_eps, 0.5);
    const int w = view.intrinsics.width;
    const int h = view.intrinsics.height;

    BinaryMask mask(w, h);
    for (int y = 0; y < h; ++y) {
        const double qy = y + 0.5;
        const auto& bucket = scene.row_buckets[y];
        std::uint8_t* row = &mask.values[static_cast<size_t>(y) * w];
        for (int x = 0; x < w; ++x) {
            const double qx = x + 0.5;
            for (int idx : bucket) {
                const ProjectedFace& f = scene.faces[idx];
                if (qx < f.xmin || qx > f.xmax) continue;
                if (inside_hard(f, qx, qy)) {
                    row[x] = 1;
                    break;
                }
            }
        }
    }
    return mask;
}

PoseGradient backward_pose(const TriMesh& mesh, const Pose& pose, const View& view,
                           const SoftParams& sp, const std::vector<double>& upstream) {
    const int w = view.intrinsics.width;
    const int h = view.intrinsics.height;
    if (upstream.size() != static_cast<size_t>(w) * h)
        throw InputError("upstream gradient size does not match image");

    const double r = std::sqrt(kSkipSq * sp.sigma);
    const ProjectedScene scene = project_mesh(mesh, pose, view, sp.cull_eps, r);
    const double inv_sigma = 1.0 / sp.sigma;
    const Intrinsics& k = view.intrinsics;
    const Mat3 r_cam_t = view.extrinsics.rotation.matrix().transpose();
    const Mat3 r_pose_t = pose.rotation.matrix().transpose();

    PoseGradient grad;

    struct Entry {
        int idx;       // into scene.faces
        double p;
        EdgeHit hit;
    };
    std::vector<Entry> entries;
    std::vector<double> suffix;

    // routes a pixel-space gradient g2 on one projected vertex back to the pose
    auto accumulate_vertex = [&](const ProjectedFace& f, int corner, const Vec2& g2) {
        const Vec3& c = f.cam[corner];
        const double inv_z = 1.0 / c.z();
        const Vec3 gc(k.fx * inv_z * g2.x(),
                      k.fy * inv_z * g2.y(),
                      -(k.fx * c.x() * g2.x() + k.fy * c.y() * g2.y()) * inv_z * inv_z);
        const Vec3 gw = r_cam_t * gc;
        const Vec3 z = r_pose_t * gw;
        const Vec3& x = mesh.vertices[mesh.faces[f.face][corner]];
        grad.d_translation += gw;
        grad.d_scale += z.cwiseProduct(x);
        grad.d_rotation += pose.scale.cwiseProduct(x).cross(z);
    };

    for (int y = 0; y < h; ++y) {
        const double qy = y + 0.5;
        const auto& bucket = scene.row_buckets[y];
        if (bucket.empty()) continue;
        const double* urow = &upstream[static_cast<size_t>(y) * w];
        for (int x = 0; x < w; ++x) {
            const double u = urow[x];
            if (u == 0.0) continue;
            const double qx = x + 0.5;

            entries.clear();
            for (int idx : bucket) {
                const ProjectedFace& f = scene.faces[idx];
                if (qx < f.xmin - r || qx > f.xmax + r) continue;
                EdgeHit hit;
                const double d = signed_sq_distance(f, qx, qy, &hit);
                const double p = sigmoid(d * inv_sigma);
                if (p == 0.0) continue;
                entries.push_back({idx, p, hit});
            }
            if (entries.empty()) continue;

            // leave-one-out products of (1-p) via prefix/suffix sweeps
            const size_t n = entries.size();
            suffix.assign(n + 1, 1.0);
            for (size_t i = n; i-- > 0;) suffix[i] = suffix[i + 1] * (1.0 - entries[i].p);
            double prefix = 1.0;
            for (size_t i = 0; i < n; ++i) {
                const Entry& en = entries[i];
                const double loo = prefix * suffix[i + 1];
                prefix *= 1.0 - en.p;
                // dA/dp_i = loo; dp/dD = p(1-p)/sigma
                const double g_d = u * loo * en.p * (1.0 - en.p) * inv_sigma;
                if (g_d == 0.0) continue;
                const ProjectedFace& f = scene.faces[en.idx];
                // D = sign * |q - closest(a,b)|^2, closest = a + tau*(b-a)
                const Vec2 ga = (g_d * en.hit.sign * -2.0 * (1.0 - en.hit.tau)) * en.hit.diff;
                const Vec2 gb = (g_d * en.hit.sign * -2.0 * en.hit.tau) * en.hit.diff;
                accumulate_vertex(f, en.hit.edge, ga);
                accumulate_vertex(f, (en.hit.edge + 1) % 3, gb);
            }
        }
    }
    return grad;
}

}  // namespace mvpr
