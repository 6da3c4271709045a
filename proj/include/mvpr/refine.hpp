#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "mvpr/losses.hpp"

namespace mvpr {

struct RefineConfig {
    int k = 8;               // Euler bins per axis in the coarse search
    int n_best = 4;          // bins promoted to the fine stage
    int fine_rounds = 3;     // recursive subdivision rounds per promoted bin
    int fine_subdiv = 3;     // sub-bins per axis per round
    int max_iters = 200;     // gradient iterations
    double lr_translation = 0.01;   // meters per step scale
    double lr_rotation = 0.05;      // radians
    double lr_log_scale = 0.01;
    double rel_tol = 1e-6;
    int patience = 10;
    bool isotropic_scale = false;
    bool optimize_scale = true;
    LossWeights weights;
    SoftParams soft;
    std::uint64_t seed = 0;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
    // starting translation/scale for the bin-search path (no initial pose given)
    std::optional<Vec3> t0;
    std::optional<Vec3> s0;

    // Defaults with the translation rate tied to the object size.
    static RefineConfig defaults_for(const TriMesh& mesh);

    void validate() const;
};

// One cell of the k^3 Euler-angle grid over [-pi, pi)^3.
struct EulerBin {
    std::array<int, 3> index{0, 0, 0};
    Vec3 center{0.0, 0.0, 0.0};  // (yaw, pitch, roll)
    double half_width = 0.0;     // pi / k
};

struct RefineReport {
    std::vector<double> loss_trace;  // one entry per gradient evaluation
    long renders_used = 0;           // per-view render evaluations, all stages
    std::vector<std::pair<EulerBin, double>> coarse_losses;  // ascending
    Pose final_pose;
    double final_loss = std::numeric_limits<double>::quiet_NaN();
    bool converged = false;
};

// Evaluates the multiview loss at every bin center with fixed t0/s0; returns
// all k^3 bins ascending by loss, ties by lexicographic bin index.
std::vector<std::pair<EulerBin, double>> coarse_bin_search(const TriMesh& mesh,
                                                           const std::vector<View>& views,
                                                           const Vec3& t0, const Vec3& s0,
                                                           const RefineConfig& cfg);

// Recursive subdivision inside each promoted bin; returns the best rotation
// across all evaluations. Adds n_best * fine_rounds * fine_subdiv^3 per-view
// evaluations, reported through evals when given.
Rotation fine_bin_refine(const TriMesh& mesh, const std::vector<View>& views,
                         const std::vector<std::pair<EulerBin, double>>& bins, const Vec3& t0,
                         const Vec3& s0, const RefineConfig& cfg, long* evals = nullptr);

// Adam on (translation, local so(3) increment, log scale) driven by
// multiview_loss_gradient; returns the best-loss iterate, not the last.
std::pair<Pose, RefineReport> gradient_refine(const TriMesh& mesh,
                                              const std::vector<View>& views, const Pose& pose0,
                                              const RefineConfig& cfg);

// Full driver: from a given coarse pose, or coarse bin search + fine
// refinement + gradient descent using cfg.t0 / cfg.s0.
std::pair<Pose, RefineReport> estimate_pose(const TriMesh& mesh, const std::vector<View>& views,
                                            const std::optional<Pose>& coarse,
                                            const RefineConfig& cfg);

}  // namespace mvpr
