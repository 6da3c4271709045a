// mvpr: multi-view silhouette pose refinement and evaluation tool.
// Exit codes: 0 success, 2 usage/input error, 3 numerical failure.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mvpr/errors.hpp"
#include "mvpr/gradcheck.hpp"
#include "mvpr/harness.hpp"
#include "mvpr/io.hpp"
#include "mvpr/parallel.hpp"
#include "mvpr/shapes.hpp"

namespace {

using namespace mvpr;

struct RefineFlags {
    std::string scene;
    std::string out;
    std::string init;
    std::string report;
    std::vector<double> t0;
    std::vector<double> s0;
    int k = 8;
    int n_best = 4;
    int fine_rounds = 3;
    int fine_subdiv = 3;
    int iters = 200;
    double lambda1 = 1.0;
    double lambda2 = 0.1;
    double sigma = 1e-2;
    std::uint64_t seed = 0;
    bool isotropic_scale = false;
    bool freeze_scale = false;
};

int cmd_refine(const RefineFlags& f) {
    const SceneData data = load_scene_manifest(f.scene);

    RefineConfig cfg = RefineConfig::defaults_for(data.mesh);
    cfg.k = f.k;
    cfg.n_best = f.n_best;
    cfg.fine_rounds = f.fine_rounds;
    cfg.fine_subdiv = f.fine_subdiv;
    cfg.max_iters = f.iters;
    cfg.weights.lambda1 = f.lambda1;
    cfg.weights.lambda2 = f.lambda2;
    cfg.soft.sigma = f.sigma;
    cfg.seed = f.seed;
    cfg.isotropic_scale = f.isotropic_scale;
    cfg.optimize_scale = !f.freeze_scale;

    std::optional<Pose> init;
    if (!f.init.empty()) init = load_pose_json(f.init);
    if (!f.t0.empty()) cfg.t0 = Vec3(f.t0[0], f.t0[1], f.t0[2]);
    if (!f.s0.empty()) cfg.s0 = Vec3(f.s0[0], f.s0[1], f.s0[2]);
    if (!init && !cfg.t0)
        throw InputError("refine needs --init, or --t0/--s0 for the bin-search path");
    if (cfg.t0 && !cfg.s0) cfg.s0 = Vec3(1.0, 1.0, 1.0);

    auto [pose, report] = estimate_pose(data.mesh, data.views, init, cfg);
    save_pose_json(f.out, pose);
    if (!f.report.empty()) save_refine_report_json(f.report, report);
    std::printf("final_loss,%.17g\nrenders_used,%ld\nconverged,%d\n", report.final_loss,
                report.renders_used, report.converged ? 1 : 0);
    return 0;
}

int cmd_render(const std::string& scene_path, const std::string& pose_path,
               const std::string& out_dir, bool soft, double sigma) {
    const SceneData data = load_scene_manifest(scene_path);
    const Pose pose = load_pose_json(pose_path);
    std::filesystem::create_directories(out_dir);
    for (size_t n = 0; n < data.views.size(); ++n) {
        char name[32];
        std::snprintf(name, sizeof(name), "view_%03zu.pgm", n);
        const std::string path = (std::filesystem::path(out_dir) / name).string();
        if (soft) {
            SoftParams sp;
            sp.sigma = sigma;
            write_pgm(path, render_silhouette(data.mesh, pose, data.views[n], sp));
        } else {
            write_pgm(path, render_hard_mask(data.mesh, pose, data.views[n]));
        }
        std::printf("%s\n", path.c_str());
    }
    return 0;
}

int cmd_eval_pose(const std::string& mesh_path, const std::string& gt_path,
                  const std::string& pred_path) {
    const TriMesh mesh = load_obj(mesh_path);
    const Pose gt = load_pose_json(gt_path);
    const Pose pred = load_pose_json(pred_path);
    std::printf("add,add_s,geodesic_deg,translation_err\n");
    std::printf("%.17g,%.17g,%.17g,%.17g\n", add(mesh.vertices, gt, pred),
                add_s(mesh.vertices, gt, pred),
                geodesic_angle(gt.rotation, pred.rotation) * 180.0 / M_PI,
                (gt.translation - pred.translation).norm());
    return 0;
}

int cmd_eval_grasp(const std::string& pred_path, const std::string& gt_path, bool strict_angle) {
    const std::vector<GraspRect> preds = load_grasps_json(pred_path);
    const std::vector<GraspRect> gts = load_grasps_json(gt_path);
    if (preds.empty()) throw InputError("no predictions in " + pred_path);
    long n_correct = 0;
    std::printf("prediction,result\n");
    for (size_t i = 0; i < preds.size(); ++i) {
        const bool ok = grasp_correct(preds[i], gts, !strict_angle);
        n_correct += ok ? 1 : 0;
        std::printf("%zu,%s\n", i, ok ? "correct" : "incorrect");
    }
    std::printf("accuracy,%.2f%%\n", 100.0 * static_cast<double>(n_correct) /
                                         static_cast<double>(preds.size()));
    return 0;
}

struct BenchFlags {
    std::string shape = "cube";
    int views = 3;
    int trials = 20;
    std::uint64_t seed = 7;
    std::string out;
    int image_size = 64;
    double camera_distance = 2.5;
    double baseline_min_deg = 45.0;
    double rot_deg = 10.0;
    double trans_frac = 0.05;
    double scale_frac = 0.10;
    int iters = 200;
    std::string frames = "1:5";
};

SceneSpec bench_spec(const BenchFlags& f) {
    SceneSpec spec;
    spec.seed = f.seed;
    spec.n_views = f.views;
    spec.image_size = f.image_size;
    spec.camera_distance = f.camera_distance;
    spec.baseline_min_deg = f.baseline_min_deg;
    spec.mesh_source = f.shape;
    return spec;
}

RefineConfig bench_config(const BenchFlags& f, const SceneSpec& spec) {
    RefineConfig cfg = RefineConfig::defaults_for(
        spec.mesh_source.find('/') == std::string::npos &&
                spec.mesh_source.find(".obj") == std::string::npos
            ? builtin_shape(spec.mesh_source)
            : load_obj(spec.mesh_source));
    cfg.max_iters = f.iters;
    cfg.seed = f.seed;
    return cfg;
}

int cmd_bench_synthetic(const BenchFlags& f) {
    const SceneSpec spec = bench_spec(f);
    const RefineConfig cfg = bench_config(f, spec);
    PerturbationSpec pert{f.rot_deg, f.trans_frac, f.scale_frac};
    const BenchmarkResult result = recovery_benchmark(spec, f.trials, pert, cfg);
    write_benchmark_csv(f.out, result);
    std::fprintf(stderr, "wrote %s (%d trials, mean wall time %.3fs)\n", f.out.c_str(), f.trials,
                 result.mean.wall_time_s);
    std::printf("mean_final_geodesic_deg,%.17g\nmean_final_translation_err,%.17g\n",
                result.mean.final_geodesic_deg, result.mean.final_translation_err);
    return 0;
}

std::vector<int> parse_frames(const std::string& s) {
    const size_t colon = s.find(':');
    try {
        if (colon == std::string::npos) return {std::stoi(s)};
        const int lo = std::stoi(s.substr(0, colon));
        const int hi = std::stoi(s.substr(colon + 1));
        if (lo < 1 || hi < lo) throw InputError("");
        std::vector<int> out;
        for (int v = lo; v <= hi; ++v) out.push_back(v);
        return out;
    } catch (const std::exception&) {
        throw InputError("invalid --frames range '" + s + "' (expected LO:HI with 1 <= LO <= HI)");
    }
}

int cmd_bench_convergence(const BenchFlags& f) {
    const SceneSpec spec = bench_spec(f);
    const RefineConfig cfg = bench_config(f, spec);
    PerturbationSpec pert{f.rot_deg, f.trans_frac, f.scale_frac};
    const auto rows = convergence_study(spec, parse_frames(f.frames), f.trials, pert, cfg);
    write_convergence_csv(f.out, rows);
    for (const auto& r : rows)
        std::printf("%d,%.17g,%.17g\n", r.n_views, r.mean_final_loss, r.stddev_final_loss);
    return 0;
}

int cmd_grad_check(const GradCheckParams& params) {
    const GradCheckResult r = grad_check(params);
    std::printf("scenes,%d\ncomponents,%d\nmax_rel_err,%.17g\n", r.scenes, r.components,
                r.max_rel_err);
    if (!(r.max_rel_err < 1e-3)) {
        std::fprintf(stderr, "grad-check FAILED: max relative error %.3g >= 1e-3\n",
                     r.max_rel_err);
        return 3;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multi-view silhouette pose refinement via differentiable rendering"};
    app.require_subcommand(1);
    app.fallthrough();
    int threads = 0;
    app.add_option("--threads", threads, "Worker thread cap (default: all cores)");

    RefineFlags rf;
    CLI::App* refine = app.add_subcommand("refine", "Estimate a pose from a scene manifest");
    refine->add_option("--scene", rf.scene, "Scene manifest JSON")->required();
    refine->add_option("--out", rf.out, "Output pose JSON")->required();
    refine->add_option("--init", rf.init, "Initial pose JSON (skips the bin search)");
    refine->add_option("--t0", rf.t0, "Bin-search translation (3 numbers)")->expected(3);
    refine->add_option("--s0", rf.s0, "Bin-search scale (3 numbers, default 1 1 1)")->expected(3);
    refine->add_option("--k", rf.k, "Euler bins per axis");
    refine->add_option("--n-best", rf.n_best, "Bins promoted to the fine stage");
    refine->add_option("--fine-rounds", rf.fine_rounds, "Subdivision rounds per promoted bin");
    refine->add_option("--fine-subdiv", rf.fine_subdiv, "Sub-bins per axis per round");
    refine->add_option("--iters", rf.iters, "Max gradient iterations");
    refine->add_option("--lambda1", rf.lambda1, "IoU loss weight");
    refine->add_option("--lambda2", rf.lambda2, "Chamfer loss weight");
    refine->add_option("--sigma", rf.sigma, "Soft rasterizer sigma (px^2)");
    refine->add_option("--seed", rf.seed, "Seed recorded in the config");
    refine->add_option("--report", rf.report, "Write a refinement report JSON here");
    refine->add_flag("--isotropic-scale", rf.isotropic_scale, "Tie scale updates across axes");
    refine->add_flag("--freeze-scale", rf.freeze_scale, "Do not optimize scale");

    std::string render_scene, render_pose, render_out;
    bool render_soft = false, render_hard = false;
    double render_sigma = 1e-2;
    CLI::App* render = app.add_subcommand("render", "Render silhouettes of a pose");
    render->add_option("--scene", render_scene, "Scene manifest JSON")->required();
    render->add_option("--pose", render_pose, "Pose JSON")->required();
    render->add_option("--out-dir", render_out, "Output directory for PGM masks")->required();
    render->add_flag("--soft", render_soft, "Soft silhouette (default: hard)");
    render->add_flag("--hard", render_hard, "Hard mask");
    render->add_option("--sigma", render_sigma, "Soft rasterizer sigma (px^2)");

    std::string ep_mesh, ep_gt, ep_pred;
    CLI::App* eval_pose = app.add_subcommand("eval-pose", "ADD / ADD-S / rotation / translation");
    eval_pose->add_option("--mesh", ep_mesh, "OBJ mesh")->required();
    eval_pose->add_option("--gt", ep_gt, "Ground-truth pose JSON")->required();
    eval_pose->add_option("--pred", ep_pred, "Predicted pose JSON")->required();

    std::string eg_pred, eg_gt;
    bool eg_strict = false;
    CLI::App* eval_grasp = app.add_subcommand("eval-grasp", "Grasping-rectangle accuracy");
    eval_grasp->add_option("--pred", eg_pred, "Predicted grasps JSON")->required();
    eval_grasp->add_option("--gt", eg_gt, "Ground-truth grasps JSON")->required();
    eval_grasp->add_flag("--strict-angle", eg_strict,
                         "Compare angles mod 360 deg instead of mod 180 deg");

    BenchFlags bs;
    CLI::App* bench_syn = app.add_subcommand("bench-synthetic", "Seeded pose-recovery benchmark");
    bench_syn->add_option("--shape", bs.shape, "cube|sphere|banana|mug|bowl or OBJ path");
    bench_syn->add_option("--views", bs.views, "Views per scene");
    bench_syn->add_option("--trials", bs.trials, "Trials");
    bench_syn->add_option("--seed", bs.seed, "Base seed");
    bench_syn->add_option("--out", bs.out, "Output CSV")->required();
    bench_syn->add_option("--image-size", bs.image_size, "Image size (pixels)");
    bench_syn->add_option("--camera-distance", bs.camera_distance, "Camera distance (m)");
    bench_syn->add_option("--baseline-min-deg", bs.baseline_min_deg, "Min camera separation");
    bench_syn->add_option("--rot-deg", bs.rot_deg, "Initial rotation perturbation (deg)");
    bench_syn->add_option("--trans-frac", bs.trans_frac, "Initial translation perturbation");
    bench_syn->add_option("--scale-frac", bs.scale_frac, "Initial scale perturbation");
    bench_syn->add_option("--iters", bs.iters, "Max gradient iterations");

    BenchFlags bc;
    CLI::App* bench_conv = app.add_subcommand("bench-convergence", "Loss vs number of frames");
    bench_conv->add_option("--frames", bc.frames, "Frame-count range LO:HI");
    bench_conv->add_option("--shape", bc.shape, "cube|sphere|banana|mug|bowl or OBJ path");
    bench_conv->add_option("--trials", bc.trials, "Trials per frame count");
    bench_conv->add_option("--seed", bc.seed, "Base seed");
    bench_conv->add_option("--out", bc.out, "Output CSV")->required();
    bench_conv->add_option("--image-size", bc.image_size, "Image size (pixels)");
    bench_conv->add_option("--camera-distance", bc.camera_distance, "Camera distance (m)");
    bench_conv->add_option("--baseline-min-deg", bc.baseline_min_deg, "Min camera separation");
    bench_conv->add_option("--rot-deg", bc.rot_deg, "Initial rotation perturbation (deg)");
    bench_conv->add_option("--trans-frac", bc.trans_frac, "Initial translation perturbation");
    bench_conv->add_option("--scale-frac", bc.scale_frac, "Initial scale perturbation");
    bench_conv->add_option("--iters", bc.iters, "Max gradient iterations");

    GradCheckParams gc;
    CLI::App* gradcheck = app.add_subcommand("grad-check", "Finite-difference gradient audit");
    gradcheck->add_option("--seed", gc.seed, "Base seed");
    gradcheck->add_option("--scenes", gc.scenes, "Number of random scenes");
    gradcheck->add_option("--image-size", gc.image_size, "Image size (pixels)");
    gradcheck->add_option("--shape", gc.shape, "Mesh for the scenes");
    gradcheck->add_option("--step", gc.step, "Central-difference step");
    gradcheck->add_option("--sigma", gc.sigma, "Soft rasterizer sigma (px^2)");
    gradcheck->add_option("--camera-distance", gc.camera_distance, "Camera distance (m)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;  // --help exits 0; any parse failure is a usage error
    }

    try {
        if (threads > 0) set_max_threads(threads);
        if (*refine) return cmd_refine(rf);
        if (*render) {
            if (render_soft && render_hard)
                throw InputError("choose one of --soft / --hard");
            return cmd_render(render_scene, render_pose, render_out, render_soft, render_sigma);
        }
        if (*eval_pose) return cmd_eval_pose(ep_mesh, ep_gt, ep_pred);
        if (*eval_grasp) return cmd_eval_grasp(eg_pred, eg_gt, eg_strict);
        if (*bench_syn) return cmd_bench_synthetic(bs);
        if (*bench_conv) return cmd_bench_convergence(bc);
        if (*gradcheck) return cmd_grad_check(gc);
    } catch (const InputError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const NumericError& e) {
        std::fprintf(stderr, "numerical failure: %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    }
    return 0;
}
