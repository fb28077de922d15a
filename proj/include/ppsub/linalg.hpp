#pragma once

#include <array>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>

#include "ppsub/error.hpp"

namespace ppsub {

// Small fixed-size linear algebra, generic over the scalar type so the same
// pipeline code runs on double and on Interval.

template <class T>
struct Vec2 {
    T x{};
    T y{};
};

template <class T>
struct Vec3 {
    T x{};
    T y{};
    T z{};
};

// Row-major 2x2.
template <class T>
struct Mat2 {
    T a11{}, a12{};
    T a21{}, a22{};
};

using Vec2d = Vec2<double>;
using Vec3d = Vec3<double>;
using Mat2d = Mat2<double>;

template <class T>
Vec2<T> operator+(const Vec2<T>& a, const Vec2<T>& b) { return {a.x + b.x, a.y + b.y}; }
template <class T>
Vec2<T> operator-(const Vec2<T>& a, const Vec2<T>& b) { return {a.x - b.x, a.y - b.y}; }
template <class T>
Vec2<T> operator-(const Vec2<T>& a) { return {-a.x, -a.y}; }
template <class T, class S>
Vec2<T> operator*(const S& s, const Vec2<T>& a) { return {s * a.x, s * a.y}; }

template <class T>
T dot(const Vec2<T>& a, const Vec2<T>& b) { return a.x * b.x + a.y * b.y; }

// z-component of the 3D cross product of two planar vectors.
template <class T>
T cross(const Vec2<T>& a, const Vec2<T>& b) { return a.x * b.y - a.y * b.x; }

template <class T>
T norm2(const Vec2<T>& a) { return dot(a, a); }

template <class T>
T norm(const Vec2<T>& a) {
    using std::sqrt;
    return sqrt(norm2(a));
}

template <class T>
Vec3<T> operator+(const Vec3<T>& a, const Vec3<T>& b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
template <class T>
Vec3<T> operator-(const Vec3<T>& a, const Vec3<T>& b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
template <class T>
Vec3<T> operator-(const Vec3<T>& a) { return {-a.x, -a.y, -a.z}; }
template <class T, class S>
Vec3<T> operator*(const S& s, const Vec3<T>& a) { return {s * a.x, s * a.y, s * a.z}; }

template <class T>
T dot(const Vec3<T>& a, const Vec3<T>& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

template <class T>
Vec3<T> cross(const Vec3<T>& a, const Vec3<T>& b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

template <class T>
T norm2(const Vec3<T>& a) { return dot(a, a); }

template <class T>
T norm(const Vec3<T>& a) {
    using std::sqrt;
    return sqrt(norm2(a));
}

template <class T>
Vec2<T> operator*(const Mat2<T>& m, const Vec2<T>& v) {
    return {m.a11 * v.x + m.a12 * v.y, m.a21 * v.x + m.a22 * v.y};
}

template <class T>
Mat2<T> operator*(const Mat2<T>& l, const Mat2<T>& r) {
    return {l.a11 * r.a11 + l.a12 * r.a21, l.a11 * r.a12 + l.a12 * r.a22,
            l.a21 * r.a11 + l.a22 * r.a21, l.a21 * r.a12 + l.a22 * r.a22};
}

template <class T>
Mat2<T> operator-(const Mat2<T>& l, const Mat2<T>& r) {
    return {l.a11 - r.a11, l.a12 - r.a12, l.a21 - r.a21, l.a22 - r.a22};
}

template <class T>
T det(const Mat2<T>& m) { return m.a11 * m.a22 - m.a12 * m.a21; }

inline double frobenius_norm(const Mat2d& m) {
    return std::sqrt(m.a11 * m.a11 + m.a12 * m.a12 + m.a21 * m.a21 + m.a22 * m.a22);
}

// Largest singular value of a 2x2 matrix, closed form.
inline double spectral_norm(const Mat2d& m) {
    const double t = m.a11 * m.a11 + m.a12 * m.a12 + m.a21 * m.a21 + m.a22 * m.a22;
    const double d = det(m);
    const double disc = std::sqrt(std::max(0.0, t * t - 4.0 * d * d));
    return std::sqrt(0.5 * (t + disc));
}

// Inverse of a 2x2; empty when near-singular relative to its scale.
inline std::optional<Mat2d> inverse(const Mat2d& m) {
    const double d = det(m);
    const double scale = frobenius_norm(m);
    if (std::abs(d) <= 1e-14 * scale * scale) return std::nullopt;
    return Mat2d{m.a22 / d, -m.a12 / d, -m.a21 / d, m.a11 / d};
}

// Column-major 3x3 over double; only needed for fabricated rotations.
struct Mat3d {
    // rows
    Vec3d r1{}, r2{}, r3{};

    static Mat3d identity() { return {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}; }

    Vec3d operator*(const Vec3d& v) const { return {dot(r1, v), dot(r2, v), dot(r3, v)}; }

    Mat3d transpose() const {
        return {{r1.x, r2.x, r3.x}, {r1.y, r2.y, r3.y}, {r1.z, r2.z, r3.z}};
    }
};

inline Mat3d operator*(const Mat3d& a, const Mat3d& b) {
    const Mat3d bt = b.transpose();
    return {{dot(a.r1, bt.r1), dot(a.r1, bt.r2), dot(a.r1, bt.r3)},
            {dot(a.r2, bt.r1), dot(a.r2, bt.r2), dot(a.r2, bt.r3)},
            {dot(a.r3, bt.r1), dot(a.r3, bt.r2), dot(a.r3, bt.r3)}};
}

using Mat5d = std::array<std::array<double, 5>, 5>;

// Counts executions of the bottleneck step: factorizations of the 5x5 conic
// system (one per pipeline evaluation; the interval path counts its real
// midpoint preconditioner the same way).
struct SolveCounter {
    std::atomic<std::uint64_t> count{0};
    void bump() { count.fetch_add(1, std::memory_order_relaxed); }
    std::uint64_t value() const { return count.load(std::memory_order_relaxed); }
};

// LU with partial pivoting for the 5x5 conic system. factor() fails on a
// pivot that is zero relative to the matrix scale.
class Lu5 {
public:
    bool factor(const Mat5d& m) {
        lu_ = m;
        double maxabs = 0.0;
        for (const auto& row : lu_)
            for (double v : row) maxabs = std::max(maxabs, std::abs(v));
        if (!(maxabs > 0.0) || !std::isfinite(maxabs)) return false;
        for (int i = 0; i < 5; ++i) perm_[i] = i;
        for (int k = 0; k < 5; ++k) {
            int piv = k;
            for (int i = k + 1; i < 5; ++i)
                if (std::abs(lu_[i][k]) > std::abs(lu_[piv][k])) piv = i;
            if (piv != k) {
                std::swap(lu_[piv], lu_[k]);
                std::swap(perm_[piv], perm_[k]);
            }
            if (std::abs(lu_[k][k]) <= 1e-14 * maxabs) return false;
            for (int i = k + 1; i < 5; ++i) {
                lu_[i][k] /= lu_[k][k];
                for (int j = k + 1; j < 5; ++j) lu_[i][j] -= lu_[i][k] * lu_[k][j];
            }
        }
        return true;
    }

    std::array<double, 5> solve(const std::array<double, 5>& b) const {
        std::array<double, 5> x{};
        for (int i = 0; i < 5; ++i) x[i] = b[perm_[i]];
        for (int i = 1; i < 5; ++i)
            for (int j = 0; j < i; ++j) x[i] -= lu_[i][j] * x[j];
        for (int i = 4; i >= 0; --i) {
            for (int j = i + 1; j < 5; ++j) x[i] -= lu_[i][j] * x[j];
            x[i] /= lu_[i][i];
        }
        return x;
    }

private:
    Mat5d lu_{};
    std::array<int, 5> perm_{};
};

inline double inf_norm(const Mat5d& m) {
    double r = 0.0;
    for (const auto& row : m) {
        double s = 0.0;
        for (double v : row) s += std::abs(v);
        r = std::max(r, s);
    }
    return r;
}

inline double inf_norm(const std::array<double, 5>& v) {
    double r = 0.0;
    for (double x : v) r = std::max(r, std::abs(x));
    return r;
}

} // namespace ppsub
