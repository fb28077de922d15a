#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "ppsub/linalg.hpp"
#include "ppsub/octahedron.hpp"

namespace ppsub {

// Planar predicates for the oracle geometry. Signs are epsilon-guarded:
// whenever the determinant is below its floating-point error bound the sign
// is reported as 0 (uncertain), and the callers resolve uncertainty
// conservatively (not contained / not disjoint).

// +1 if a->b->c turns counterclockwise, -1 clockwise, 0 uncertain/collinear.
inline int orient2d(const Vec2d& a, const Vec2d& b, const Vec2d& c) {
    const double l = (b.x - a.x) * (c.y - a.y);
    const double r = (b.y - a.y) * (c.x - a.x);
    const double d = l - r;
    const double bound = 3.4e-16 * (std::abs(l) + std::abs(r));
    if (d > bound) return 1;
    if (d < -bound) return -1;
    return 0;
}

inline double polygon_area(const std::vector<Vec2d>& poly) {
    double s = 0.0;
    const std::size_t n = poly.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2d& p = poly[i];
        const Vec2d& q = poly[(i + 1) % n];
        s += cross(p, q);
    }
    return 0.5 * std::abs(s);
}

inline double triangle_area2d(const Vec2d& a, const Vec2d& b, const Vec2d& c) {
    return 0.5 * std::abs(cross(b - a, c - a));
}

// Andrew monotone chain; collinear points are dropped. Returns the hull in
// counterclockwise order.
inline std::vector<Vec2d> convex_hull(std::vector<Vec2d> pts) {
    std::sort(pts.begin(), pts.end(), [](const Vec2d& a, const Vec2d& b) {
        return a.x < b.x || (a.x == b.x && a.y < b.y);
    });
    pts.erase(std::unique(pts.begin(), pts.end(),
                          [](const Vec2d& a, const Vec2d& b) { return a.x == b.x && a.y == b.y; }),
              pts.end());
    const std::size_t n = pts.size();
    if (n < 3) return pts;
    std::vector<Vec2d> hull(2 * n);
    std::size_t k = 0;
    for (std::size_t i = 0; i < n; ++i) {
        while (k >= 2 && orient2d(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
        hull[k++] = pts[i];
    }
    const std::size_t lower = k + 1;
    for (std::size_t i = n - 1; i-- > 0;) {
        while (k >= lower && orient2d(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
        hull[k++] = pts[i];
    }
    hull.resize(k - 1);
    return hull;
}

// Strict interior test against a counterclockwise triangle; uncertain signs
// count as outside.
inline bool point_in_triangle(const Vec2d& p, const Vec2d& a, const Vec2d& b, const Vec2d& c) {
    return orient2d(a, b, p) > 0 && orient2d(b, c, p) > 0 && orient2d(c, a, p) > 0;
}

inline bool point_in_reference_triangle(const Vec2d& p) {
    return point_in_triangle(p, kRefP, kRefQ, kRefR);
}

// All vertices strictly inside; by convexity this contains the whole polygon.
inline bool polygon_in_triangle(const std::vector<Vec2d>& poly, const Vec2d& a, const Vec2d& b,
                                const Vec2d& c) {
    if (poly.empty()) return false;
    for (const Vec2d& p : poly)
        if (!point_in_triangle(p, a, b, c)) return false;
    return true;
}

namespace detail {
// Certain separation of two vertex sets along the axis normal to edge pq.
inline bool separates(const Vec2d& p, const Vec2d& q, const std::vector<Vec2d>& t1,
                      const std::vector<Vec2d>& t2) {
    const Vec2d axis{q.y - p.y, p.x - q.x};
    double min1 = INFINITY, max1 = -INFINITY, min2 = INFINITY, max2 = -INFINITY, scale = 0.0;
    for (const Vec2d& v : t1) {
        const double d = dot(axis, v);
        min1 = std::min(min1, d);
        max1 = std::max(max1, d);
        scale = std::max(scale, std::abs(d));
    }
    for (const Vec2d& v : t2) {
        const double d = dot(axis, v);
        min2 = std::min(min2, d);
        max2 = std::max(max2, d);
        scale = std::max(scale, std::abs(d));
    }
    const double margin = 1e-12 * std::max(1.0, scale);
    return min1 > max2 + margin || min2 > max1 + margin;
}
} // namespace detail

// Separating-axis test over the six edge normals. Only a certain separation
// reports disjoint; shared edges and uncertain cases do not.
inline bool triangles_disjoint(const std::vector<Vec2d>& t1, const std::vector<Vec2d>& t2) {
    for (std::size_t i = 0; i < 3; ++i) {
        if (detail::separates(t1[i], t1[(i + 1) % 3], t1, t2)) return true;
        if (detail::separates(t2[i], t2[(i + 1) % 3], t1, t2)) return true;
    }
    return false;
}

// First exit of the ray origin + t * dir (t > 0) through the boundary of the
// reference triangle. Empty when the direction is degenerate or no forward
// hit exists numerically.
inline std::optional<Vec2d> ray_exit_reference(const Vec2d& origin, const Vec2d& dir) {
    const Vec2d verts[3] = {kRefP, kRefQ, kRefR};
    double best = INFINITY;
    for (int i = 0; i < 3; ++i) {
        const Vec2d a = verts[i];
        const Vec2d b = verts[(i + 1) % 3];
        const Vec2d e = b - a;
        const double denom = cross(dir, e);
        if (std::abs(denom) < 1e-300) continue;
        const Vec2d ao = a - origin;
        const double t = cross(ao, e) / denom;
        const double s = cross(ao, dir) / denom;
        if (t > 1e-12 && s >= -1e-12 && s <= 1.0 + 1e-12) best = std::min(best, t);
    }
    if (!std::isfinite(best)) return std::nullopt;
    return origin + best * dir;
}

} // namespace ppsub
