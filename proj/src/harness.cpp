#include "mvpr/harness.hpp"

#include <chrono>
#include <cmath>

#include "mvpr/errors.hpp"
#include "mvpr/metrics.hpp"
#include "mvpr/parallel.hpp"
#include "mvpr/rng.hpp"
#include "mvpr/shapes.hpp"

namespace mvpr {

void SceneSpec::validate() const {
    if (n_views < 1) throw InputError("scene spec: n_views must be >= 1");
    if (image_size < 4) throw InputError("scene spec: image_size must be >= 4");
    if (!(camera_distance > 0.0)) throw InputError("scene spec: camera_distance must be positive");
    if (!(baseline_min_deg >= 0.0 && baseline_min_deg < 180.0))
        throw InputError("scene spec: baseline_min_deg must lie in [0, 180)");
    if (mesh_source.empty()) throw InputError("scene spec: mesh_source is empty");
}

namespace {

TriMesh resolve_mesh(const std::string& source) {
    if (source.find('/') != std::string::npos || source.find(".obj") != std::string::npos)
        return load_obj(source);
    return builtin_shape(source);
}

Extrinsics look_at(const Vec3& cam_pos, const Vec3& target) {
    Vec3 z = (target - cam_pos).normalized();
    Vec3 up(0, 0, 1);
    if (std::abs(z.dot(up)) > 0.99) up = Vec3(1, 0, 0);
    const Vec3 x = z.cross(up).normalized();  // right; y = z cross x points "down"
    const Vec3 y = z.cross(x);
    Mat3 r;
    r.row(0) = x;
    r.row(1) = y;
    r.row(2) = z;
    Extrinsics e;
    e.rotation = Rotation::from_matrix_unchecked(r);
    e.translation = -(r * cam_pos);
    return e;
}

std::vector<Vec3> fibonacci_directions(int n) {
    std::vector<Vec3> dirs(n);
    const double golden = M_PI * (3.0 - std::sqrt(5.0));
    for (int i = 0; i < n; ++i) {
        const double z = 1.0 - 2.0 * (i + 0.5) / n;
        const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
        const double a = golden * i;
        dirs[i] = Vec3(r * std::cos(a), r * std::sin(a), z);
    }
    return dirs;
}

}  // namespace

SyntheticScene make_synthetic_scene(const SceneSpec& spec) {
    spec.validate();
    SyntheticScene scene;
    scene.mesh = resolve_mesh(spec.mesh_source);

    Rng rng(spec.seed);
    scene.gt.rotation = rng.rotation();
    const double t_range = 0.1 * spec.camera_distance;
    scene.gt.translation = Vec3(rng.uniform(-t_range, t_range), rng.uniform(-t_range, t_range),
                                rng.uniform(-t_range, t_range));
    scene.gt.scale = Vec3::Constant(rng.uniform(0.8, 1.25));

    // seeded rotation of the deterministic candidate directions
    const Rotation spin = rng.rotation();
    std::vector<Vec3> candidates = fibonacci_directions(std::max(128, 16 * spec.n_views));
    for (Vec3& d : candidates) d = spin * d;

    const double min_cos = std::cos(spec.baseline_min_deg * M_PI / 180.0);
    std::vector<Vec3> chosen;
    for (const Vec3& c : candidates) {
        bool ok = true;
        for (const Vec3& s : chosen)
            if (c.dot(s) > min_cos) {
                ok = false;
                break;
            }
        if (ok) {
            chosen.push_back(c);
            if (static_cast<int>(chosen.size()) == spec.n_views) break;
        }
    }
    if (static_cast<int>(chosen.size()) < spec.n_views)
        throw InputError("infeasible baseline constraint: cannot place " +
                         std::to_string(spec.n_views) + " cameras " +
                         std::to_string(spec.baseline_min_deg) + " degrees apart");

    Intrinsics intr;
    intr.width = intr.height = spec.image_size;
    intr.fx = intr.fy = 1.3 * spec.image_size;
    intr.cx = intr.cy = 0.5 * spec.image_size;

    for (const Vec3& dir : chosen) {
        View view;
        view.intrinsics = intr;
        view.extrinsics = look_at(scene.gt.translation + spec.camera_distance * dir,
                                  scene.gt.translation);
        view.target = render_hard_mask(scene.mesh, scene.gt, view);
        scene.views.push_back(std::move(view));
    }
    return scene;
}

Pose perturb_pose(const Pose& pose, double rot_deg, double trans_frac, double scale_frac,
                  std::uint64_t seed) {
    if (rot_deg < 0.0 || trans_frac < 0.0 || scale_frac < 0.0)
        throw InputError("perturbation magnitudes must be non-negative");
    Rng rng(seed);
    Pose out = pose;

    const Vec3 axis = rng.unit_vector();
    out.rotation = pose.rotation * so3_exp(axis * (rot_deg * M_PI / 180.0));

    const Vec3 dir = rng.unit_vector();
    out.translation = pose.translation + trans_frac * pose.translation.norm() * dir;

    for (int m = 0; m < 3; ++m)
        out.scale[m] = pose.scale[m] * std::exp(rng.uniform(-scale_frac, scale_frac));
    return out;
}

std::vector<ConvergenceRow> convergence_study(const SceneSpec& base,
                                              const std::vector<int>& frame_counts, int trials,
                                              const PerturbationSpec& perturbation,
                                              const RefineConfig& cfg) {
    if (trials < 2) throw InputError("convergence study needs at least 2 trials");
    std::vector<ConvergenceRow> rows;
    for (const int frames : frame_counts) {
        std::vector<double> losses(trials);
        parallel_for(trials, [&](int t) {
            SceneSpec spec = base;
            spec.n_views = frames;
            spec.seed = mix_seed(base.seed, static_cast<std::uint64_t>(t));
            const SyntheticScene scene = make_synthetic_scene(spec);
            const Pose start = perturb_pose(scene.gt, perturbation.rot_deg,
                                            perturbation.trans_frac, perturbation.scale_frac,
                                            mix_seed(spec.seed, 0x5eedULL));
            auto [pose, report] = estimate_pose(scene.mesh, scene.views, start, cfg);
            losses[t] = report.final_loss;
        });
        ConvergenceRow row;
        row.n_views = frames;
        row.trials = trials;
        double sum = 0.0;
        for (double l : losses) sum += l;
        row.mean_final_loss = sum / trials;
        double sq = 0.0;
        for (double l : losses) sq += (l - row.mean_final_loss) * (l - row.mean_final_loss);
        row.stddev_final_loss = std::sqrt(sq / (trials - 1));
        rows.push_back(row);
    }
    return rows;
}

namespace {

double max_scale_err(const Vec3& s, const Vec3& s_gt) {
    double worst = 0.0;
    for (int m = 0; m < 3; ++m) worst = std::max(worst, std::abs(s[m] / s_gt[m] - 1.0));
    return worst;
}

constexpr double TrialRecord::* kAggregateFields[] = {
    &TrialRecord::initial_geodesic_deg, &TrialRecord::final_geodesic_deg,
    &TrialRecord::initial_translation_err, &TrialRecord::final_translation_err,
    &TrialRecord::initial_scale_err, &TrialRecord::final_scale_err,
    &TrialRecord::add_err, &TrialRecord::final_loss, &TrialRecord::wall_time_s,
};

}  // namespace

void aggregate_benchmark(BenchmarkResult* result) {
    const int n = static_cast<int>(result->records.size());
    result->mean = TrialRecord{};
    result->stddev = TrialRecord{};
    if (n == 0) return;

    for (auto field : kAggregateFields) {
        double sum = 0.0;
        for (const TrialRecord& rec : result->records) sum += rec.*field;
        result->mean.*field = sum / n;
        if (n > 1) {
            double sq = 0.0;
            for (const TrialRecord& rec : result->records) {
                const double d = rec.*field - result->mean.*field;
                sq += d * d;
            }
            result->stddev.*field = std::sqrt(sq / (n - 1));
        }
    }
    double renders_sum = 0.0;
    for (const TrialRecord& rec : result->records) renders_sum += static_cast<double>(rec.renders_used);
    result->mean.renders_used = static_cast<long>(renders_sum / n + 0.5);
}

BenchmarkResult recovery_benchmark(const SceneSpec& spec, int trials,
                                   const PerturbationSpec& perturbation, const RefineConfig& cfg) {
    if (trials < 1) throw InputError("recovery benchmark needs at least 1 trial");
    BenchmarkResult result;
    result.records.resize(trials);
    parallel_for(trials, [&](int t) {
        SceneSpec trial_spec = spec;
        trial_spec.seed = mix_seed(spec.seed, static_cast<std::uint64_t>(t));
        const SyntheticScene scene = make_synthetic_scene(trial_spec);
        const Pose start = perturb_pose(scene.gt, perturbation.rot_deg, perturbation.trans_frac,
                                        perturbation.scale_frac,
                                        mix_seed(trial_spec.seed, 0x5eedULL));

        const auto t_start = std::chrono::steady_clock::now();
        auto [pose, report] = estimate_pose(scene.mesh, scene.views, start, cfg);
        const auto t_end = std::chrono::steady_clock::now();

        TrialRecord rec;
        rec.seed = trial_spec.seed;
        rec.initial_geodesic_deg = geodesic_angle(scene.gt.rotation, start.rotation) * 180.0 / M_PI;
        rec.final_geodesic_deg = geodesic_angle(scene.gt.rotation, pose.rotation) * 180.0 / M_PI;
        rec.initial_translation_err = (scene.gt.translation - start.translation).norm();
        rec.final_translation_err = (scene.gt.translation - pose.translation).norm();
        rec.initial_scale_err = max_scale_err(start.scale, scene.gt.scale);
        rec.final_scale_err = max_scale_err(pose.scale, scene.gt.scale);
        rec.add_err = add(scene.mesh.vertices, scene.gt, pose);
        rec.final_loss = report.final_loss;
        rec.renders_used = report.renders_used;
        rec.wall_time_s = std::chrono::duration<double>(t_end - t_start).count();
        result.records[t] = rec;
    });
    aggregate_benchmark(&result);
    return result;
}

}  // namespace mvpr
