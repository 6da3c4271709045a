#pragma once

#include <string>
#include <vector>

#include "mvpr/camera.hpp"
#include "mvpr/harness.hpp"
#include "mvpr/image.hpp"
#include "mvpr/mesh.hpp"
#include "mvpr/metrics.hpp"
#include "mvpr/refine.hpp"

namespace mvpr {

// Binary PGM (P5, maxval 255). Masks store 0/255; soft silhouettes store
// round(255 * value). On read, bytes >= 128 count as foreground.
void write_pgm(const std::string& path, const BinaryMask& mask);
void write_pgm(const std::string& path, const SilhouetteImage& img);
BinaryMask read_pgm_mask(const std::string& path);

// Pose file: JSON {"s":[3], "R":[9 row-major], "t":[3]}, numbers written with
// 17 significant digits so write -> read -> write round-trips byte-identically.
void save_pose_json(const std::string& path, const Pose& pose);
Pose load_pose_json(const std::string& path);

struct SceneData {
    TriMesh mesh;
    std::vector<View> views;
};

// Scene manifest: JSON {"mesh": path, "views": [{"mask": path, "intrinsics":
// {fx,fy,cx,cy,width,height}, "extrinsics": {"R": [9 or 3x3], "t": [3]}}]}.
// Paths resolve relative to the manifest; rotations are validated; views with
// an empty target mask are rejected (object not visible).
SceneData load_scene_manifest(const std::string& path);

// Writes mesh.obj, one view_###.pgm per view, and scene.json into dir;
// returns the manifest path.
std::string export_scene(const std::string& dir, const TriMesh& mesh,
                         const std::vector<View>& views);

// Grasp list: JSON array of {"center":[u,v], "width", "height", "angle_deg"}.
// Angles are degrees in files, radians in memory.
std::vector<GraspRect> load_grasps_json(const std::string& path);
void save_grasps_json(const std::string& path, const std::vector<GraspRect>& grasps);

void save_refine_report_json(const std::string& path, const RefineReport& report);

// CSV emitters (comma separator, '.' decimal point, LF endings). Wall time is
// deliberately not a column: outputs must be byte-stable across reruns.
void write_benchmark_csv(const std::string& path, const BenchmarkResult& result);
void write_convergence_csv(const std::string& path, const std::vector<ConvergenceRow>& rows);

}  // namespace mvpr
