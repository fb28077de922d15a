#pragma once

#include <array>
#include <cmath>
#include <type_traits>

#include "ppsub/error.hpp"
#include "ppsub/interval.hpp"
#include "ppsub/linalg.hpp"
#include "ppsub/octahedron.hpp"
#include "ppsub/scenario.hpp"

namespace ppsub {

// The master function F: R^2 -> R^2 for a fixed scenario and triangle, as a
// composition of six stages: local parametrization of the triangle, normal
// normalization, orthonormal frame completion, line/plane intersection,
// conic fit through the five planar points, and the two focus polynomials
// that vanish iff the origin is a focus.
//
// Every stage is generic over the scalar, so the same closed forms produce
// the real evaluation (double) and the certified enclosure (Interval). The
// Jacobian is assembled by the chain rule: each stage pushes the two local
// tangent vectors forward through its hand-derived differential.

inline constexpr double kEpsNorm = 1e-12;  // minimal |w| for normalization
inline constexpr double kEpsFrame = 1e-10; // minimal |w x u1| for the frame
inline constexpr double kEpsLos = 1e-10;   // minimal |u_i . w| for intersection
inline constexpr double kCondMax = 1e12;   // conic system conditioning cap

// Orthonormal frame (w, v1, v2), right-handed.
template <class S>
struct Frame3 {
    Vec3<S> w, v1, v2;
};
using Frame = Frame3<double>;

// Planar coordinates of the five intersection points in the (v1, v2) frame
// and the signed line parameters rho_i.
template <class S>
struct Planar5 {
    std::array<S, 5> x{}, y{}, rho{};
};
using PlanarPoints = Planar5<double>;

// Coefficients of a x^2 + b y^2 + c xy + d x + e y + 1 = 0, ordered like the
// columns of the fit matrix [x^2, y^2, xy, x, y].
template <class S>
struct Conic5 {
    S a{}, b{}, c{}, d{}, e{};
};
using ConicCoeffs = Conic5<double>;

namespace detail {

template <class S>
Vec3<S> to_scalar3(const Vec3d& v) {
    return {S(v.x), S(v.y), S(v.z)};
}

inline bool below_min(double v, double bound) { return !(v > bound); }
inline bool below_min(const Interval& v, double bound) { return !(v.lo() > bound); }

inline bool near_zero(double v, double eps) { return std::abs(v) <= eps; }
inline bool near_zero(const Interval& v, double eps) { return v.mig() <= eps; }

inline bool finite(double v) { return std::isfinite(v); }
inline bool finite(const Interval& v) { return std::isfinite(v.lo()) && std::isfinite(v.hi()); }

template <class S>
struct Normalized {
    Vec3<S> n;
    S inv_len;
};

template <class S>
Normalized<S> normalize_impl(const Vec3<S>& x) {
    using std::sqrt;
    const S n2 = norm2(x);
    if (below_min(n2, kEpsNorm * kEpsNorm)) throw NonEvaluableError{Stage::normalize};
    const S inv = S(1.0) / sqrt(n2);
    return {inv * x, inv};
}

template <class S>
struct FrameParts {
    Frame3<S> frame;
    S inv_c, inv_d; // reciprocal norms of the two cross products
};

// v2 = (w x u1)/|w x u1|, v1 = (v2 x w)/|v2 x w|.
template <class S>
FrameParts<S> frame_impl(const Vec3<S>& w, const Vec3<S>& u1) {
    using std::sqrt;
    const Vec3<S> c = cross(w, u1);
    const S c2 = norm2(c);
    if (below_min(c2, kEpsFrame * kEpsFrame)) throw NonEvaluableError{Stage::frame};
    const S inv_c = S(1.0) / sqrt(c2);
    const Vec3<S> v2 = inv_c * c;
    const Vec3<S> d = cross(v2, w);
    const S d2 = norm2(d);
    if (below_min(d2, kEpsFrame * kEpsFrame)) throw NonEvaluableError{Stage::frame};
    const S inv_d = S(1.0) / sqrt(d2);
    const Vec3<S> v1 = inv_d * d;
    return {{w, v1, v2}, inv_c, inv_d};
}

template <class S>
struct IntersectParts {
    Planar5<S> planar;
    std::array<Vec3<S>, 5> r;    // intersection points in R^3
    std::array<S, 5> p_dot_w{};  // numerator pieces, reused by the tangents
    std::array<S, 5> u_dot_w{};
};

// rho_i = -(p_i . w)/(u_i . w); r_i = p_i + rho_i u_i; planar coordinates in
// the (v1, v2) frame.
template <class S>
IntersectParts<S> intersect_impl(const Frame3<S>& f, const Scenario& sc) {
    IntersectParts<S> out;
    for (int i = 0; i < 5; ++i) {
        const Vec3<S> p = to_scalar3<S>(sc.p[i]);
        const Vec3<S> u = to_scalar3<S>(sc.u[i]);
        const S s = dot(p, f.w);
        const S q = dot(u, f.w);
        if (near_zero(q, kEpsLos)) throw NonEvaluableError{Stage::intersect};
        const S rho = -s / q;
        const Vec3<S> r = p + rho * u;
        out.planar.x[i] = dot(r, f.v1);
        out.planar.y[i] = dot(r, f.v2);
        out.planar.rho[i] = rho;
        out.r[i] = r;
        out.p_dot_w[i] = s;
        out.u_dot_w[i] = q;
        if (!finite(out.planar.x[i]) || !finite(out.planar.y[i]))
            throw NonEvaluableError{Stage::intersect};
    }
    return out;
}

template <class S>
std::array<S, 5> conic_row(const S& x, const S& y) {
    return {x * x, y * y, x * y, x, y};
}

// Differential of a row with respect to one tangent direction.
template <class S>
std::array<S, 5> conic_row_dot(const S& x, const S& y, const S& xd, const S& yd) {
    return {S(2.0) * x * xd, S(2.0) * y * yd, xd * y + x * yd, xd, yd};
}

// Solver facade over the two scalar paths. Both count one bottleneck
// factorization per constructed system.
template <class S>
class ConicSolver;

template <>
class ConicSolver<double> {
public:
    ConicSolver(const std::array<std::array<double, 5>, 5>& m, SolveCounter* counter) {
        if (counter) counter->bump();
        if (!lu_.factor(m)) throw NonEvaluableError{Stage::conic_fit};
        norm_m_ = inf_norm(m);
    }
    std::array<double, 5> solve(const std::array<double, 5>& b) const { return lu_.solve(b); }
    // Cheap lower-bound estimate kappa >= ||M||_inf ||theta||_inf / ||b||_inf.
    bool ill_conditioned(const std::array<double, 5>& theta) const {
        return norm_m_ * inf_norm(theta) > kCondMax;
    }

private:
    Lu5 lu_;
    double norm_m_ = 0.0;
};

template <>
class ConicSolver<Interval> {
public:
    ConicSolver(const std::array<std::array<Interval, 5>, 5>& m, SolveCounter* counter)
        : solver_(m, counter) {}
    std::array<Interval, 5> solve(const std::array<Interval, 5>& b) const {
        return solver_.solve(b);
    }
    bool ill_conditioned(const std::array<Interval, 5>&) const { return false; }

private:
    IntervalLinearSolver5 solver_;
};

template <class S>
Conic5<S> to_conic(const std::array<S, 5>& t) {
    return {t[0], t[1], t[2], t[3], t[4]};
}

template <class S>
Vec2<S> focus_impl(const Conic5<S>& t) {
    return {t.e * t.e - S(4.0) * t.b - t.d * t.d + S(4.0) * t.a,
            t.d * t.e - S(2.0) * t.c};
}

template <bool WithJ, class S>
struct MasterOut {
    Vec2<S> value;
    Mat2<S> jacobian; // populated only when WithJ
};

// Full pipeline with tangent propagation; throws NonEvaluableError.
template <bool WithJ, class S>
MasterOut<WithJ, S> master_impl(const Scenario& sc, const LocalFrame& fr, const Vec2<S>& z,
                                SolveCounter* counter) {
    // Stage 1: local parametrization. Constant Jacobian (b1 | b2).
    const Vec3<S> b1 = to_scalar3<S>(fr.b1);
    const Vec3<S> b2 = to_scalar3<S>(fr.b2);
    const Vec3<S> x0 = to_scalar3<S>(fr.origin) + z.x * b1 + z.y * b2;

    // Stage 2: normalization. dn = (dx - n (n.dx)) / |x|.
    const Normalized<S> nz = normalize_impl(x0);
    const Vec3<S>& n = nz.n;
    Vec3<S> n_t1{}, n_t2{};
    if constexpr (WithJ) {
        n_t1 = nz.inv_len * (b1 - dot(n, b1) * n);
        n_t2 = nz.inv_len * (b2 - dot(n, b2) * n);
    }

    // Stage 3: orthonormal frame.
    const Vec3<S> u1 = to_scalar3<S>(sc.u[0]);
    const FrameParts<S> fp = frame_impl(n, u1);
    const Vec3<S>& v1 = fp.frame.v1;
    const Vec3<S>& v2 = fp.frame.v2;
    Vec3<S> v1_t1{}, v1_t2{}, v2_t1{}, v2_t2{};
    if constexpr (WithJ) {
        const auto dv2 = [&](const Vec3<S>& dn) {
            const Vec3<S> dc = cross(dn, u1);
            return fp.inv_c * (dc - dot(v2, dc) * v2);
        };
        v2_t1 = dv2(n_t1);
        v2_t2 = dv2(n_t2);
        const auto dv1 = [&](const Vec3<S>& dn, const Vec3<S>& dv2v) {
            const Vec3<S> dd = cross(dv2v, n) + cross(v2, dn);
            return fp.inv_d * (dd - dot(v1, dd) * v1);
        };
        v1_t1 = dv1(n_t1, v2_t1);
        v1_t2 = dv1(n_t2, v2_t2);
    }

    // Stage 4: intersection with the orbital plane.
    const IntersectParts<S> ip = intersect_impl(fp.frame, sc);

    std::array<S, 5> x_t1{}, x_t2{}, y_t1{}, y_t2{};
    if constexpr (WithJ) {
        for (int i = 0; i < 5; ++i) {
            const Vec3<S> p = to_scalar3<S>(sc.p[i]);
            const Vec3<S> u = to_scalar3<S>(sc.u[i]);
            const S& s = ip.p_dot_w[i];
            const S& q = ip.u_dot_w[i];
            const auto d_planar = [&](const Vec3<S>& dn, const Vec3<S>& dv1, const Vec3<S>& dv2,
                                      S& dx, S& dy) {
                const S ds = dot(p, dn);
                const S dq = dot(u, dn);
                const S drho = (s * dq - ds * q) / (q * q);
                const Vec3<S> dr = drho * u;
                dx = dot(dr, v1) + dot(ip.r[i], dv1);
                dy = dot(dr, v2) + dot(ip.r[i], dv2);
            };
            d_planar(n_t1, v1_t1, v2_t1, x_t1[i], y_t1[i]);
            d_planar(n_t2, v1_t2, v2_t2, x_t2[i], y_t2[i]);
        }
    }

    // Stage 5: conic fit M theta = -1; d theta = M^-1 (-dM theta).
    std::array<std::array<S, 5>, 5> m;
    std::array<S, 5> rhs;
    for (int i = 0; i < 5; ++i) {
        m[i] = conic_row(ip.planar.x[i], ip.planar.y[i]);
        rhs[i] = S(-1.0);
    }
    const ConicSolver<S> solver(m, counter);
    const std::array<S, 5> theta = solver.solve(rhs);
    if (solver.ill_conditioned(theta)) throw NonEvaluableError{Stage::conic_fit};
    for (const S& v : theta)
        if (!finite(v)) throw NonEvaluableError{Stage::conic_fit};

    std::array<S, 5> theta_t1{}, theta_t2{};
    if constexpr (WithJ) {
        std::array<S, 5> rhs1, rhs2;
        for (int i = 0; i < 5; ++i) {
            const auto row1 = conic_row_dot(ip.planar.x[i], ip.planar.y[i], x_t1[i], y_t1[i]);
            const auto row2 = conic_row_dot(ip.planar.x[i], ip.planar.y[i], x_t2[i], y_t2[i]);
            S acc1{}, acc2{};
            for (int j = 0; j < 5; ++j) {
                acc1 += row1[j] * theta[j];
                acc2 += row2[j] * theta[j];
            }
            rhs1[i] = -acc1;
            rhs2[i] = -acc2;
        }
        theta_t1 = solver.solve(rhs1);
        theta_t2 = solver.solve(rhs2);
    }

    // Stage 6: focus polynomials.
    const Conic5<S> conic = to_conic(theta);
    MasterOut<WithJ, S> out;
    out.value = focus_impl(conic);
    if (!finite(out.value.x) || !finite(out.value.y)) throw NonEvaluableError{Stage::focus};
    if constexpr (WithJ) {
        const auto dfocus = [&](const std::array<S, 5>& dt) {
            return Vec2<S>{S(2.0) * conic.e * dt[4] - S(4.0) * dt[1] - S(2.0) * conic.d * dt[3] +
                               S(4.0) * dt[0],
                           dt[3] * conic.e + conic.d * dt[4] - S(2.0) * dt[2]};
        };
        const Vec2<S> j1 = dfocus(theta_t1);
        const Vec2<S> j2 = dfocus(theta_t2);
        out.jacobian = {j1.x, j2.x, j1.y, j2.y};
        if (!finite(out.jacobian.a11) || !finite(out.jacobian.a12) ||
            !finite(out.jacobian.a21) || !finite(out.jacobian.a22))
            throw NonEvaluableError{Stage::focus};
    }
    return out;
}

} // namespace detail

// --- Stage-level API ------------------------------------------------------

inline Fallible<Vec3d> normalize(const Vec3d& w) {
    try {
        return detail::normalize_impl(w).n;
    } catch (const NonEvaluableError& e) {
        return e;
    }
}

inline Fallible<Frame> build_frame(const Vec3d& w, const Vec3d& u1) {
    try {
        return detail::frame_impl(w, u1).frame;
    } catch (const NonEvaluableError& e) {
        return e;
    }
}

inline Fallible<PlanarPoints> intersect_plane(const Frame& f, const Scenario& sc) {
    try {
        return detail::intersect_impl(f, sc).planar;
    } catch (const NonEvaluableError& e) {
        return e;
    }
}

inline Fallible<ConicCoeffs> fit_conic(const PlanarPoints& pts, SolveCounter* counter = nullptr) {
    try {
        std::array<std::array<double, 5>, 5> m;
        std::array<double, 5> rhs;
        for (int i = 0; i < 5; ++i) {
            m[i] = detail::conic_row(pts.x[i], pts.y[i]);
            rhs[i] = -1.0;
        }
        const detail::ConicSolver<double> solver(m, counter);
        const auto theta = solver.solve(rhs);
        if (solver.ill_conditioned(theta)) throw NonEvaluableError{Stage::conic_fit};
        for (double v : theta)
            if (!std::isfinite(v)) throw NonEvaluableError{Stage::conic_fit};
        return detail::to_conic(theta);
    } catch (const NonEvaluableError& e) {
        return e;
    }
}

inline Vec2d focus_residual(const ConicCoeffs& c) { return detail::focus_impl(c); }

// --- Master function ------------------------------------------------------

struct ValueAndJacobian {
    Vec2d value;
    Mat2d jacobian;
};

inline Fallible<Vec2d> eval_F(const Scenario& sc, const LocalFrame& fr, const Vec2d& z,
                              SolveCounter* counter = nullptr) {
    try {
        return detail::master_impl<false>(sc, fr, z, counter).value;
    } catch (const NonEvaluableError& e) {
        return e;
    }
}

inline Fallible<ValueAndJacobian> eval_FJ(const Scenario& sc, const LocalFrame& fr, const Vec2d& z,
                                          SolveCounter* counter = nullptr) {
    try {
        const auto out = detail::master_impl<true>(sc, fr, z, counter);
        return ValueAndJacobian{out.value, out.jacobian};
    } catch (const NonEvaluableError& e) {
        return e;
    }
}

inline Fallible<Vec2d> eval_F(const Scenario& sc, const Triangle& t, const Vec2d& z,
                              SolveCounter* counter = nullptr) {
    return eval_F(sc, local_frame(t), z, counter);
}

inline Fallible<ValueAndJacobian> eval_FJ(const Scenario& sc, const Triangle& t, const Vec2d& z,
                                          SolveCounter* counter = nullptr) {
    return eval_FJ(sc, local_frame(t), z, counter);
}

inline Fallible<Mat2d> eval_J(const Scenario& sc, const Triangle& t, const Vec2d& z,
                              SolveCounter* counter = nullptr) {
    auto r = eval_FJ(sc, t, z, counter);
    if (!r.ok()) return NonEvaluableError{r.failed_stage()};
    return r->jacobian;
}

} // namespace ppsub
