#include "mvpr/mesh.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "mvpr/errors.hpp"

namespace mvpr {

void TriMesh::validate() const {
    if (vertices.size() < 3) throw InputError("mesh needs at least 3 vertices");
    const int n = static_cast<int>(vertices.size());
    for (const Vec3& v : vertices)
        if (!v.allFinite()) throw InputError("mesh has non-finite vertex");
    for (size_t i = 0; i < faces.size(); ++i) {
        const auto& f = faces[i];
        for (int k = 0; k < 3; ++k)
            if (f[k] < 0 || f[k] >= n)
                throw InputError("face " + std::to_string(i) + " index out of range");
        if (f[0] == f[1] || f[1] == f[2] || f[0] == f[2])
            throw InputError("face " + std::to_string(i) + " has repeated vertex indices");
    }
}

double TriMesh::bounding_radius() const {
    double r2 = 0.0;
    for (const Vec3& v : vertices) r2 = std::max(r2, v.squaredNorm());
    return std::sqrt(r2);
}

double TriMesh::surface_area() const {
    double area = 0.0;
    for (const auto& f : faces) {
        const Vec3& a = vertices[f[0]];
        const Vec3& b = vertices[f[1]];
        const Vec3& c = vertices[f[2]];
        area += 0.5 * (b - a).cross(c - a).norm();
    }
    return area;
}

namespace {

// First slash-separated field of an OBJ face vertex ("7/1/3" -> 7), resolved
// against the current vertex count if negative.
int parse_face_index(const std::string& token, int vertex_count, int line_no) {
    size_t slash = token.find('/');
    const std::string head = slash == std::string::npos ? token : token.substr(0, slash);
    int idx = 0;
    try {
        size_t pos = 0;
        idx = std::stoi(head, &pos);
        if (pos != head.size()) throw std::invalid_argument(head);
    } catch (const std::exception&) {
        throw InputError("OBJ parse error at line " + std::to_string(line_no) +
                         ": bad face index '" + token + "'");
    }
    if (idx < 0) idx = vertex_count + idx;  // -1 refers to the last vertex
    else idx = idx - 1;
    if (idx < 0 || idx >= vertex_count)
        throw InputError("OBJ parse error at line " + std::to_string(line_no) +
                         ": face index out of range");
    return idx;
}

}  // namespace

TriMesh load_obj(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open OBJ file: " + path);

    TriMesh mesh;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::istringstream ss(line);
        std::string tag;
        if (!(ss >> tag) || tag[0] == '#') continue;
        if (tag == "v") {
            double x, y, z;
            if (!(ss >> x >> y >> z))
                throw InputError("OBJ parse error at line " + std::to_string(line_no) +
                                 ": vertex needs three coordinates");
            mesh.vertices.emplace_back(x, y, z);
        } else if (tag == "f") {
            std::vector<int> idx;
            std::string token;
            while (ss >> token)
                idx.push_back(parse_face_index(token, static_cast<int>(mesh.vertices.size()), line_no));
            if (idx.size() < 3)
                throw InputError("OBJ parse error at line " + std::to_string(line_no) +
                                 ": face needs at least three vertices");
            for (size_t k = 1; k + 1 < idx.size(); ++k)
                mesh.faces.push_back({idx[0], idx[k], idx[k + 1]});
        }
        // vn, vt, usemtl, o, g, s, mtllib: ignored
    }
    mesh.validate();
    return mesh;
}

void save_obj(const TriMesh& mesh, const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) throw InputError("cannot write OBJ file: " + path);
    for (const Vec3& v : mesh.vertices)
        std::fprintf(f, "v %.17g %.17g %.17g\n", v.x(), v.y(), v.z());
    for (const auto& face : mesh.faces)
        std::fprintf(f, "f %d %d %d\n", face[0] + 1, face[1] + 1, face[2] + 1);
    std::fclose(f);
}

}  // namespace mvpr
