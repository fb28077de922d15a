#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>

#include "ppsub/dyadic.hpp"
#include "ppsub/linalg.hpp"

namespace ppsub {

// The projective plane is represented by the four northern faces of the
// octahedron with vertices +-e1, +-e2, e3; antipodal points are identified
// and resolved only when solutions are reported.

struct Triangle {
    DyadicPoint v1, v2, v3;
    std::uint8_t face_id = 0;
    std::uint32_t generation = 0;
};

// Reference triangle of the local parametrization; every triangle is the
// image of this one under its affine frame, with the reference center (0,0)
// mapping to the triangle center.
inline constexpr Vec2d kRefP{-0.5, -0.5};
inline constexpr Vec2d kRefQ{1.0, 0.0};
inline constexpr Vec2d kRefR{-0.5, 0.5};
inline constexpr double kRefArea = 0.75;

// Affine map z -> origin + z.x * b1 + z.y * b2 from reference coordinates
// into the plane of a triangle.
struct LocalFrame {
    Vec3d origin;
    Vec3d b1;
    Vec3d b2;

    Vec3d map(const Vec2d& z) const { return origin + z.x * b1 + z.y * b2; }

    // Least-squares preimage; exact for points in the triangle's plane.
    Vec2d inverse_map(const Vec3d& p) const {
        const Vec3d d = p - origin;
        const double g11 = dot(b1, b1), g12 = dot(b1, b2), g22 = dot(b2, b2);
        const double detg = g11 * g22 - g12 * g12;
        const double c1 = dot(d, b1), c2 = dot(d, b2);
        return {(g22 * c1 - g12 * c2) / detg, (g11 * c2 - g12 * c1) / detg};
    }
};

// Frame mapping reference P, Q, R to v1, v2, v3; the reference center maps to
// the vertex centroid.
inline LocalFrame local_frame(const Triangle& t) {
    const Vec3d a = t.v1.to_vec3();
    const Vec3d b = t.v2.to_vec3();
    const Vec3d c = t.v3.to_vec3();
    const Vec3d centroid = (1.0 / 3.0) * (a + b + c);
    const Vec3d b1 = (1.0 / 3.0) * ((2.0 * b) - a - c);
    const Vec3d b2 = c - a;
    if (norm2(cross(b1, b2)) == 0.0) throw std::invalid_argument("degenerate triangle");
    return {centroid, b1, b2};
}

// Flat (within-face) area.
inline double triangle_area(const Triangle& t) {
    const Vec3d a = t.v1.to_vec3();
    const Vec3d b = t.v2.to_vec3();
    const Vec3d c = t.v3.to_vec3();
    return 0.5 * norm(cross(b - a, c - a));
}

inline double circumradius(const Triangle& t) {
    const Vec3d a = t.v1.to_vec3();
    const Vec3d b = t.v2.to_vec3();
    const Vec3d c = t.v3.to_vec3();
    const Vec3d m = (1.0 / 3.0) * (a + b + c);
    return std::sqrt(std::max({norm2(a - m), norm2(b - m), norm2(c - m)}));
}

// The four faces with z >= 0, counterclockwise seen from above, all marked
// "pass" by convention at generation 0.
inline std::array<Triangle, 4> northern_faces() {
    const DyadicPoint e1{1, 0, 0}, e2{0, 1, 0}, e3{0, 0, 1};
    const DyadicPoint m1{-1, 0, 0}, m2{0, -1, 0};
    return {Triangle{e1, e2, e3, 0, 0}, Triangle{e2, m1, e3, 1, 0},
            Triangle{m1, m2, e3, 2, 0}, Triangle{m2, e1, e3, 3, 0}};
}

// Midpoint 4-split; children keep the parent's orientation, corner children
// first, central child last.
inline std::array<Triangle, 4> regular_subdivide(const Triangle& t) {
    const DyadicPoint m12 = midpoint(t.v1, t.v2);
    const DyadicPoint m23 = midpoint(t.v2, t.v3);
    const DyadicPoint m31 = midpoint(t.v3, t.v1);
    const std::uint32_t g = t.generation + 1;
    return {Triangle{t.v1, m12, m31, t.face_id, g}, Triangle{m12, t.v2, m23, t.face_id, g},
            Triangle{m31, m23, t.v3, t.face_id, g}, Triangle{m12, m23, m31, t.face_id, g}};
}

// Split along one side (1: v1v2, 2: v2v3, 3: v3v1) by connecting its midpoint
// with the opposite vertex; the two children have equal area.
inline std::array<Triangle, 2> bisect(const Triangle& t, int side) {
    const std::uint32_t g = t.generation + 1;
    switch (side) {
    case 1: {
        const DyadicPoint m = midpoint(t.v1, t.v2);
        return {Triangle{t.v1, m, t.v3, t.face_id, g}, Triangle{m, t.v2, t.v3, t.face_id, g}};
    }
    case 2: {
        const DyadicPoint m = midpoint(t.v2, t.v3);
        return {Triangle{t.v1, t.v2, m, t.face_id, g}, Triangle{t.v1, m, t.v3, t.face_id, g}};
    }
    case 3: {
        const DyadicPoint m = midpoint(t.v3, t.v1);
        return {Triangle{t.v1, t.v2, m, t.face_id, g}, Triangle{m, t.v2, t.v3, t.face_id, g}};
    }
    default: throw std::invalid_argument("bisect: side must be 1, 2 or 3");
    }
}

// Antipodal canonicalization: unit norm, z >= 0; on the equator the first
// nonzero coordinate is made positive.
inline Vec3d canonical_normal(Vec3d w) {
    const double n = norm(w);
    w = (1.0 / n) * w;
    if (w.z < 0.0) return -w;
    if (w.z > 0.0) return w;
    if (w.x < 0.0 || (w.x == 0.0 && w.y < 0.0)) return -w;
    return w;
}

// Radial projection onto the octahedron surface (L1 normalization), folded
// onto the northern faces.
inline Vec3d octahedral_point(Vec3d w) {
    if (w.z < 0.0 || (w.z == 0.0 && (w.x < 0.0 || (w.x == 0.0 && w.y < 0.0)))) w = -w;
    const double l1 = std::abs(w.x) + std::abs(w.y) + std::abs(w.z);
    return (1.0 / l1) * w;
}

// Top-view containment test against the (x, y) projection of the triangle.
// Faces project bijectively onto quadrants of the diamond |x|+|y| <= 1, so
// the 2D test is equivalent to the in-face test. Inclusive of edges.
inline bool triangle_contains_oct(const Triangle& t, const Vec3d& oct_pt) {
    const Vec3d a3 = t.v1.to_vec3(), b3 = t.v2.to_vec3(), c3 = t.v3.to_vec3();
    const Vec2d a{a3.x, a3.y}, b{b3.x, b3.y}, c{c3.x, c3.y};
    const Vec2d p{oct_pt.x, oct_pt.y};
    const double eps = 1e-14;
    const double d1 = cross(b - a, p - a);
    const double d2 = cross(c - b, p - b);
    const double d3 = cross(a - c, p - c);
    const bool has_neg = d1 < -eps || d2 < -eps || d3 < -eps;
    const bool has_pos = d1 > eps || d2 > eps || d3 > eps;
    return !(has_neg && has_pos);
}

} // namespace ppsub
