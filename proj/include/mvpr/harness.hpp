#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mvpr/refine.hpp"

namespace mvpr {

// Deterministic synthetic scene family. mesh_source is a builtin shape name
// (cube, sphere, banana, mug, bowl) or a path to an OBJ file.
struct SceneSpec {
    std::uint64_t seed = 0;
    int n_views = 3;
    int image_size = 64;
    double camera_distance = 2.5;   // meters from the object center
    double baseline_min_deg = 45.0; // minimum pairwise angular camera separation
    std::string mesh_source = "cube";

    void validate() const;
};

struct SyntheticScene {
    Pose gt;
    TriMesh mesh;
    std::vector<View> views;
};

// Cameras on a Fibonacci-sampled sphere of radius camera_distance around the
// object, randomly rotated per seed and greedily filtered by the baseline
// constraint, all looking at the object center. Ground truth: rotation
// uniform on SO(3), translation uniform within +-10% of camera_distance per
// axis, isotropic scale uniform in [0.8, 1.25]. Targets are hard-mask renders
// of the ground truth. Bit-reproducible for a fixed spec.
SyntheticScene make_synthetic_scene(const SceneSpec& spec);

// Deterministic perturbation: rotation composed with a random-axis rotation
// of exactly rot_deg; translation offset exactly trans_frac * |t| in a random
// direction; each scale axis multiplied by exp(u), u uniform in
// [-scale_frac, scale_frac].
Pose perturb_pose(const Pose& pose, double rot_deg, double trans_frac, double scale_frac,
                  std::uint64_t seed);

// Magnitudes of the initial offset handed to the refiner in studies.
struct PerturbationSpec {
    double rot_deg = 10.0;
    double trans_frac = 0.05;
    double scale_frac = 0.10;
};

struct ConvergenceRow {
    int n_views = 0;
    int trials = 0;
    double mean_final_loss = 0.0;
    double stddev_final_loss = 0.0;  // sample standard deviation
};

// Final multiview loss of refinement runs versus the number of frames. Trial
// t reuses the same ground-truth scene across frame counts (extra frames
// extend the camera set).
std::vector<ConvergenceRow> convergence_study(const SceneSpec& base,
                                              const std::vector<int>& frame_counts, int trials,
                                              const PerturbationSpec& perturbation,
                                              const RefineConfig& cfg);

struct TrialRecord {
    std::uint64_t seed = 0;
    double initial_geodesic_deg = 0.0;
    double final_geodesic_deg = 0.0;
    double initial_translation_err = 0.0;  // meters
    double final_translation_err = 0.0;
    double initial_scale_err = 0.0;  // max over axes of |s/s_gt - 1|
    double final_scale_err = 0.0;
    double add_err = 0.0;  // ADD of the final pose on mesh vertices, meters
    double final_loss = 0.0;
    long renders_used = 0;
    double wall_time_s = 0.0;
};

struct BenchmarkResult {
    std::vector<TrialRecord> records;  // ordered by trial index
    TrialRecord mean;                  // seed field zero
    TrialRecord stddev;
};

// Recomputes the aggregate fields from the records.
void aggregate_benchmark(BenchmarkResult* result);

// Seeded pose-recovery runs: perturbed ground truth in, refined pose out,
// errors against the ground truth recorded per trial.
BenchmarkResult recovery_benchmark(const SceneSpec& spec, int trials,
                                   const PerturbationSpec& perturbation, const RefineConfig& cfg);

}  // namespace mvpr
