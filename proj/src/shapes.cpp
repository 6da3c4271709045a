#include "mvpr/shapes.hpp"

#include <cmath>
#include <map>

#include "mvpr/errors.hpp"

namespace mvpr {

namespace {

// two rings of n vertices each -> 2n triangles
void connect_rings(TriMesh& m, const std::vector<int>& a, const std::vector<int>& b) {
    const int n = static_cast<int>(a.size());
    for (int i = 0; i < n; ++i) {
        const int j = (i + 1) % n;
        m.faces.push_back({a[i], a[j], b[j]});
        m.faces.push_back({a[i], b[j], b[i]});
    }
}

void fan(TriMesh& m, int apex, const std::vector<int>& ring, bool flip) {
    const int n = static_cast<int>(ring.size());
    for (int i = 0; i < n; ++i) {
        const int j = (i + 1) % n;
        if (flip)
            m.faces.push_back({apex, ring[j], ring[i]});
        else
            m.faces.push_back({apex, ring[i], ring[j]});
    }
}

std::vector<int> add_circle(TriMesh& m, const Vec3& center, const Vec3& u, const Vec3& v,
                            double radius, int n) {
    std::vector<int> idx(n);
    for (int i = 0; i < n; ++i) {
        const double a = 2.0 * M_PI * i / n;
        idx[i] = static_cast<int>(m.vertices.size());
        m.vertices.push_back(center + radius * (std::cos(a) * u + std::sin(a) * v));
    }
    return idx;
}

}  // namespace

TriMesh make_cube(double side) {
    TriMesh m;
    const double h = 0.5 * side;
    for (int i = 0; i < 8; ++i)
        m.vertices.emplace_back((i & 1) ? h : -h, (i & 2) ? h : -h, (i & 4) ? h : -h);
    const int quads[6][4] = {
        {0, 1, 3, 2}, {4, 6, 7, 5},  // z- z+
        {0, 4, 5, 1}, {2, 3, 7, 6},  // y- y+
        {0, 2, 6, 4}, {1, 5, 7, 3},  // x- x+
    };
    for (const auto& q : quads) {
        m.faces.push_back({q[0], q[1], q[2]});
        m.faces.push_back({q[0], q[2], q[3]});
    }
    m.validate();
    return m;
}

TriMesh make_icosphere(int level, double radius) {
    const double phi = 0.5 * (1.0 + std::sqrt(5.0));
    TriMesh m;
    const double raw[12][3] = {
        {-1, phi, 0}, {1, phi, 0},   {-1, -phi, 0}, {1, -phi, 0},
        {0, -1, phi}, {0, 1, phi},   {0, -1, -phi}, {0, 1, -phi},
        {phi, 0, -1}, {phi, 0, 1},   {-phi, 0, -1}, {-phi, 0, 1},
    };
    for (const auto& p : raw)
        m.vertices.push_back(radius * Vec3(p[0], p[1], p[2]).normalized());
    const int tris[20][3] = {
        {0, 11, 5},  {0, 5, 1},   {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
        {1, 5, 9},   {5, 11, 4},  {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
        {3, 9, 4},   {3, 4, 2},   {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
        {4, 9, 5},   {2, 4, 11},  {6, 2, 10},  {8, 6, 7},  {9, 8, 1},
    };
    for (const auto& t : tris) m.faces.push_back({t[0], t[1], t[2]});

    for (int l = 0; l < level; ++l) {
        std::map<std::pair<int, int>, int> midpoint;
        auto mid = [&](int a, int b) {
            const auto key = std::minmax(a, b);
            auto it = midpoint.find(key);
            if (it != midpoint.end()) return it->second;
            const int idx = static_cast<int>(m.vertices.size());
            m.vertices.push_back(radius * (m.vertices[a] + m.vertices[b]).normalized());
            midpoint.emplace(key, idx);
            return idx;
        };
        std::vector<std::array<int, 3>> next;
        next.reserve(m.faces.size() * 4);
        for (const auto& f : m.faces) {
            const int ab = mid(f[0], f[1]);
            const int bc = mid(f[1], f[2]);
            const int ca = mid(f[2], f[0]);
            next.push_back({f[0], ab, ca});
            next.push_back({f[1], bc, ab});
            next.push_back({f[2], ca, bc});
            next.push_back({ab, bc, ca});
        }
        m.faces = std::move(next);
    }
    m.validate();
    return m;
}

TriMesh make_banana() {
    TriMesh m;
    const double arc_radius = 0.42;
    const double half_span = 65.0 * M_PI / 180.0;
    const double tube = 0.13;
    const int n_rings = 12;
    const int n_seg = 10;

    // centered so the arc's mean point sits at the origin
    const double y_off = arc_radius * std::sin(half_span) / half_span;

    std::vector<std::vector<int>> rings;
    for (int i = 0; i <= n_rings; ++i) {
        const double th = -half_span + 2.0 * half_span * i / n_rings;
        const Vec3 c(arc_radius * std::sin(th), arc_radius * std::cos(th) - y_off, 0.0);
        const Vec3 normal(std::sin(th), std::cos(th), 0.0);
        const Vec3 binormal(0.0, 0.0, 1.0);
        rings.push_back(add_circle(m, c, normal, binormal, tube, n_seg));
    }
    for (int i = 0; i < n_rings; ++i) connect_rings(m, rings[i], rings[i + 1]);

    // pointy caps along the end tangents
    const Vec3 t0(std::cos(-half_span), -std::sin(-half_span), 0.0);
    const Vec3 t1(std::cos(half_span), -std::sin(half_span), 0.0);
    const Vec3 c0(arc_radius * std::sin(-half_span), arc_radius * std::cos(-half_span) - y_off, 0.0);
    const Vec3 c1(arc_radius * std::sin(half_span), arc_radius * std::cos(half_span) - y_off, 0.0);
    const int tip0 = static_cast<int>(m.vertices.size());
    m.vertices.push_back(c0 - 1.2 * tube * t0);
    const int tip1 = static_cast<int>(m.vertices.size());
    m.vertices.push_back(c1 + 1.2 * tube * t1);
    fan(m, tip0, rings.front(), true);
    fan(m, tip1, rings.back(), false);
    m.validate();
    return m;
}

TriMesh make_mug() {
    TriMesh m;
    const double body_r = 0.28;
    const double half_h = 0.375;
    const int n_seg = 20;
    const Vec3 ex(1, 0, 0), ey(0, 1, 0);

    const auto bottom = add_circle(m, Vec3(0, 0, -half_h), ex, ey, body_r, n_seg);
    const auto top = add_circle(m, Vec3(0, 0, half_h), ex, ey, body_r, n_seg);
    connect_rings(m, bottom, top);
    const int bottom_center = static_cast<int>(m.vertices.size());
    m.vertices.emplace_back(0, 0, -half_h);
    fan(m, bottom_center, bottom, true);

    // handle: partial torus in the x-z plane, attached at the +x side
    const double major_r = 0.16;
    const double minor_r = 0.05;
    const Vec3 torus_c(0.33, 0.0, 0.0);
    const int n_u = 10;
    const int n_v = 8;
    const double u0 = -125.0 * M_PI / 180.0;
    const double u1 = 125.0 * M_PI / 180.0;
    std::vector<std::vector<int>> loops;
    for (int i = 0; i <= n_u; ++i) {
        const double u = u0 + (u1 - u0) * i / n_u;
        const Vec3 spine = torus_c + major_r * Vec3(std::cos(u), 0.0, std::sin(u));
        const Vec3 out(std::cos(u), 0.0, std::sin(u));
        loops.push_back(add_circle(m, spine, out, ey, minor_r, n_v));
    }
    for (int i = 0; i < n_u; ++i) connect_rings(m, loops[i], loops[i + 1]);
    m.validate();
    return m;
}

TriMesh make_bowl() {
    TriMesh m;
    const double outer_r = 0.5;
    const double inner_r = 0.4;
    const int n_seg = 16;
    const int n_lat = 5;
    const Vec3 ex(1, 0, 0), ey(0, 1, 0);

    auto shell = [&](double radius, bool flip) {
        std::vector<std::vector<int>> rings;
        for (int i = 0; i < n_lat; ++i) {
            const double lat = 0.5 * M_PI * i / n_lat;  // 0 at the rim, pi/2 at the pole
            rings.push_back(add_circle(m, Vec3(0, 0, -radius * std::sin(lat)), ex, ey,
                                       radius * std::cos(lat), n_seg));
        }
        for (int i = 0; i + 1 < n_lat; ++i) connect_rings(m, rings[i], rings[i + 1]);
        const int pole = static_cast<int>(m.vertices.size());
        m.vertices.emplace_back(0, 0, -radius);
        fan(m, pole, rings.back(), flip);
        return rings.front();
    };
    const auto outer_rim = shell(outer_r, false);
    const auto inner_rim = shell(inner_r, true);
    connect_rings(m, outer_rim, inner_rim);
    m.validate();
    return m;
}

TriMesh builtin_shape(const std::string& name) {
    if (name == "cube") return make_cube();
    if (name == "sphere") return make_icosphere();
    if (name == "banana") return make_banana();
    if (name == "mug") return make_mug();
    if (name == "bowl") return make_bowl();
    throw InputError("unknown builtin shape: " + name +
                     " (expected cube, sphere, banana, mug, or bowl)");
}

}  // namespace mvpr
