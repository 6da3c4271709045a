#pragma once

#include <string>

#include "mvpr/mesh.hpp"

namespace mvpr {

// Desk-scale analytic meshes, all roughly half a meter across, centered at
// the model origin.
TriMesh make_cube(double side = 0.8);
TriMesh make_icosphere(int level = 2, double radius = 0.5);
TriMesh make_banana();  // bent capsule
TriMesh make_mug();     // cylinder body + partial-torus handle
TriMesh make_bowl();    // hemispherical shell, opening up

// Dispatch by name: cube, sphere, banana, mug, bowl. Throws InputError on
// unknown names.
TriMesh builtin_shape(const std::string& name);

}  // namespace mvpr
