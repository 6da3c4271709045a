#pragma once

#include <array>
#include <string>
#include <vector>

#include "mvpr/geometry.hpp"

namespace mvpr {

// Triangle mesh in its canonical model frame.
struct TriMesh {
    std::vector<Vec3> vertices;
    std::vector<std::array<int, 3>> faces;

    // Face indices in range and distinct, at least 3 vertices; throws InputError.
    void validate() const;

    // Max vertex distance from the model origin.
    double bounding_radius() const;

    double surface_area() const;
};

// Wavefront OBJ subset: `v` and `f` lines; polygons fan-triangulated;
// vn/vt/usemtl/o/g/s/mtllib and comments ignored. 1-based indices (including
// negative relative ones) converted to 0-based.
TriMesh load_obj(const std::string& path);

void save_obj(const TriMesh& mesh, const std::string& path);

}  // namespace mvpr
