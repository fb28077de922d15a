#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ppsub/boxmap.hpp"
#include "ppsub/geometry2d.hpp"
#include "ppsub/mastermap.hpp"
#include "ppsub/triangulation.hpp"

namespace ppsub {

// A triangle verdict: accept and reject are final, pass defers to
// subdivision. NonEvaluable inside any oracle always maps to pass; the
// failures live on measure-zero sets and subdividing past them is sound.
struct Label {
    TriLabel kind = TriLabel::pass;
    const char* oracle = "";
};

namespace oracle_names {
inline constexpr const char* intersection = "intersection";
inline constexpr const char* linear_approximation = "linear_approximation";
inline constexpr const char* gd_disjoint = "gd_disjoint";
inline constexpr const char* gd_converge = "gd_converge";
inline constexpr const char* newton = "newton";
inline constexpr const char* nonzero_certified = "nonzero_certified";
inline constexpr const char* krawczyk_certified = "krawczyk_certified";
} // namespace oracle_names

enum class NewtonVariant : std::uint8_t { three_vertex, six_point_hull };
enum class JacobianNorm : std::uint8_t { spectral, frobenius };
// Direction of the boundary probe that picks the Barzilai-Borwein rate:
// along -grad(O) (toward descent) or along +grad(O).
enum class GdProbe : std::uint8_t { descent, ascent };

struct OracleConfig {
    double c_max_int_norm = 10.0; // length units of p
    double c_safety = 1.0;
    double c_area_scaling = 0.9;
    NewtonVariant newton_variant = NewtonVariant::three_vertex;
    JacobianNorm jacobian_norm = JacobianNorm::spectral;
    GdProbe gd_probe = GdProbe::descent;
    // grad g = 2 J^T F when set; the paper's literal 2 J F otherwise.
    bool gd_grad_transpose = true;
    // One rate from the center ray (default) or one per mapped vertex.
    bool gd_per_vertex_rate = false;
    // Short secant step |s.y|/||y||^2 (default) or the long variant
    // ||s||^2/|s.y|.
    bool gd_long_step = false;
    // Only let gd_disjoint reject when the three vertex steps point the same
    // way (pairwise positive dot products). A disjoint image made of
    // near-parallel moves certifies "no stationary point inside" much more
    // reliably than one made of opposed moves straddling a zero.
    bool gd_coherent_steps = true;

    void validate() const {
        if (!(c_max_int_norm > 0.0)) throw std::invalid_argument("c_max_int_norm must be > 0");
        if (!(c_safety >= 0.0)) throw std::invalid_argument("c_safety must be >= 0");
        if (!(c_area_scaling > 0.0 && c_area_scaling <= 1.0))
            throw std::invalid_argument("c_area_scaling must be in (0, 1]");
    }
};

struct OracleSequence {
    std::vector<std::string> names;
};

// --- Newton and gradient-descent operators --------------------------------

inline std::optional<Vec2d> newton_step_from(const Vec2d& f, const Mat2d& j, const Vec2d& z) {
    const double d = det(j);
    const double scale = frobenius_norm(j);
    if (std::abs(d) <= 1e-14 * scale * scale) return std::nullopt;
    const Vec2d dz{(j.a22 * f.x - j.a12 * f.y) / d, (j.a11 * f.y - j.a21 * f.x) / d};
    return z - dz;
}

// N_f(z) = z - J_z^-1 f(z); callables return std::optional.
template <class FEval, class JEval>
std::optional<Vec2d> newton_step(FEval&& f, JEval&& j, const Vec2d& z) {
    const auto fv = f(z);
    const auto jv = j(z);
    if (!fv || !jv) return std::nullopt;
    return newton_step_from(*fv, *jv, z);
}

// Barzilai-Borwein learning rate probed along the gradient ray from the
// local center O: T is the boundary exit, M its midpoint, and
// gamma = |(M-O)^T (grad(M)-grad(O))| / ||grad(M)-grad(O)||^2.
template <class GradEval>
std::optional<double> gd_learning_rate(GradEval&& grad, GdProbe probe = GdProbe::descent,
                                       bool long_step = false) {
    const Vec2d origin{0.0, 0.0};
    const auto g0 = grad(origin);
    if (!g0 || norm2(*g0) == 0.0) return std::nullopt;
    const Vec2d dir = probe == GdProbe::descent ? -*g0 : *g0;
    const auto exit = ray_exit_reference(origin, dir);
    if (!exit) return std::nullopt;
    const Vec2d mid = 0.5 * *exit;
    const auto gm = grad(mid);
    if (!gm) return std::nullopt;
    const Vec2d dg = *gm - *g0;
    if (norm(dg) <= 1e-14) return std::nullopt;
    if (long_step) {
        const double sy = std::abs(dot(mid, dg));
        if (sy <= 1e-300) return std::nullopt;
        return norm2(mid) / sy;
    }
    return std::abs(dot(mid, dg)) / norm2(dg);
}

template <class GradEval>
std::optional<Vec2d> gd_step_with_rate(GradEval&& grad, const Vec2d& z, double gamma) {
    const auto g = grad(z);
    if (!g) return std::nullopt;
    return z - gamma * *g;
}

// GD_g(z) = z - gamma grad(z) with gamma derived from this triangle's ray.
template <class GradEval>
std::optional<Vec2d> gd_step(GradEval&& grad, const Vec2d& z) {
    const auto gamma = gd_learning_rate(grad);
    if (!gamma) return std::nullopt;
    return gd_step_with_rate(grad, z, *gamma);
}

namespace detail {

inline std::optional<Vec2d> newton_image(const Scenario& sc, const LocalFrame& fr, const Vec2d& z,
                                         SolveCounter* counter) {
    const auto fj = eval_FJ(sc, fr, z, counter);
    if (!fj.ok()) return std::nullopt;
    return newton_step_from(fj->value, fj->jacobian, z);
}

// Gradient of g = ||F||^2: 2 J^T F (or the literal 2 J F variant).
inline std::optional<Vec2d> grad_sq_norm(const Scenario& sc, const LocalFrame& fr, const Vec2d& z,
                                         bool transpose, SolveCounter* counter) {
    const auto fj = eval_FJ(sc, fr, z, counter);
    if (!fj.ok()) return std::nullopt;
    const Vec2d& f = fj->value;
    const Mat2d& j = fj->jacobian;
    if (transpose)
        return Vec2d{2.0 * (j.a11 * f.x + j.a21 * f.y), 2.0 * (j.a12 * f.x + j.a22 * f.y)};
    return Vec2d{2.0 * (j.a11 * f.x + j.a12 * f.y), 2.0 * (j.a21 * f.x + j.a22 * f.y)};
}

} // namespace detail

// --- Heuristic oracles ------------------------------------------------------

// Reject when any line/plane intersection point at the triangle center lies
// farther from the origin than physically plausible.
inline Label omega_intersection(const LocalFrame& fr, const Scenario& sc,
                                const OracleConfig& cfg) {
    try {
        const auto n = detail::normalize_impl(fr.origin);
        const auto fp = detail::frame_impl(n.n, sc.u[0]);
        const auto ip = detail::intersect_impl(fp.frame, sc);
        const double limit = cfg.c_max_int_norm * cfg.c_max_int_norm;
        for (int i = 0; i < 5; ++i) {
            const double r2 = ip.planar.x[i] * ip.planar.x[i] + ip.planar.y[i] * ip.planar.y[i];
            if (r2 > limit) return {TriLabel::reject, oracle_names::intersection};
        }
        return {};
    } catch (const NonEvaluableError&) {
        return {};
    }
}

// First-order Taylor bound at the center: reject when even a perturbation of
// size c_safety cannot bring F to zero under the linear model.
inline Label omega_linear_approximation(const LocalFrame& fr, const Scenario& sc,
                                        const OracleConfig& cfg, SolveCounter* counter) {
    const auto fj = eval_FJ(sc, fr, {0.0, 0.0}, counter);
    if (!fj.ok()) return {};
    const double jn = cfg.jacobian_norm == JacobianNorm::spectral ? spectral_norm(fj->jacobian)
                                                                  : frobenius_norm(fj->jacobian);
    if (norm(fj->value) - cfg.c_safety * jn > 0.0)
        return {TriLabel::reject, oracle_names::linear_approximation};
    return {};
}

// Accept when one Newton step pulls the sampled points strictly inside the
// triangle and shrinks their span.
inline Label omega_newton(const LocalFrame& fr, const Scenario& sc, const OracleConfig& cfg,
                          SolveCounter* counter) {
    std::vector<Vec2d> samples{kRefP, kRefQ, kRefR};
    if (cfg.newton_variant == NewtonVariant::six_point_hull) {
        samples.push_back(0.5 * (kRefP + kRefQ));
        samples.push_back(0.5 * (kRefQ + kRefR));
        samples.push_back(0.5 * (kRefP + kRefR));
    }
    std::vector<Vec2d> images;
    images.reserve(samples.size());
    for (const Vec2d& s : samples) {
        const auto img = detail::newton_image(sc, fr, s, counter);
        if (!img) return {};
        images.push_back(*img);
    }
    double area;
    if (cfg.newton_variant == NewtonVariant::six_point_hull) {
        const auto hull = convex_hull(images);
        if (!polygon_in_triangle(hull, kRefP, kRefQ, kRefR)) return {};
        area = polygon_area(hull);
    } else {
        if (!polygon_in_triangle(images, kRefP, kRefQ, kRefR)) return {};
        area = triangle_area2d(images[0], images[1], images[2]);
    }
    if (area <= cfg.c_area_scaling * kRefArea) return {TriLabel::accept, oracle_names::newton};
    return {};
}

namespace detail {

// Images of P, Q, R under one gradient-descent step; empty on any
// NonEvaluable. The learning rate comes from the center ray by default or
// from each vertex's own ray with gd_per_vertex_rate.
inline std::optional<std::vector<Vec2d>> gd_images(const LocalFrame& fr, const Scenario& sc,
                                                   const OracleConfig& cfg,
                                                   SolveCounter* counter) {
    const auto grad = [&](const Vec2d& z) {
        return grad_sq_norm(sc, fr, z, cfg.gd_grad_transpose, counter);
    };
    std::vector<Vec2d> images;
    images.reserve(3);
    if (cfg.gd_per_vertex_rate) {
        for (const Vec2d& v : {kRefP, kRefQ, kRefR}) {
            const auto g = grad(v);
            if (!g || norm2(*g) == 0.0) return std::nullopt;
            const Vec2d dir = cfg.gd_probe == GdProbe::descent ? -*g : *g;
            const auto exit = ray_exit_reference(v, dir);
            if (!exit) return std::nullopt;
            const Vec2d mid = 0.5 * (v + *exit);
            const auto gm = grad(mid);
            if (!gm) return std::nullopt;
            const Vec2d dg = *gm - *g;
            if (norm(dg) <= 1e-14) return std::nullopt;
            const double sy = std::abs(dot(mid - v, dg));
            double gamma;
            if (cfg.gd_long_step) {
                if (sy <= 1e-300) return std::nullopt;
                gamma = norm2(mid - v) / sy;
            } else {
                gamma = sy / norm2(dg);
            }
            images.push_back(v - gamma * *g);
        }
        return images;
    }
    const auto gamma = gd_learning_rate(grad, cfg.gd_probe, cfg.gd_long_step);
    if (!gamma) return std::nullopt;
    for (const Vec2d& v : {kRefP, kRefQ, kRefR}) {
        const auto img = gd_step_with_rate(grad, v, *gamma);
        if (!img) return std::nullopt;
        images.push_back(*img);
    }
    return images;
}

} // namespace detail

inline Label omega_gd_converge(const LocalFrame& fr, const Scenario& sc, const OracleConfig& cfg,
                               SolveCounter* counter) {
    const auto images = detail::gd_images(fr, sc, cfg, counter);
    if (!images) return {};
    if (polygon_in_triangle(*images, kRefP, kRefQ, kRefR) &&
        triangle_area2d((*images)[0], (*images)[1], (*images)[2]) <=
            cfg.c_area_scaling * kRefArea)
        return {TriLabel::accept, oracle_names::gd_converge};
    return {};
}

inline Label omega_gd_disjoint(const LocalFrame& fr, const Scenario& sc, const OracleConfig& cfg,
                               SolveCounter* counter) {
    const auto images = detail::gd_images(fr, sc, cfg, counter);
    if (!images) return {};
    if (!triangles_disjoint(*images, {kRefP, kRefQ, kRefR})) return {};
    if (cfg.gd_coherent_steps) {
        const Vec2d verts[3] = {kRefP, kRefQ, kRefR};
        for (int i = 0; i < 3; ++i)
            for (int j = i + 1; j < 3; ++j)
                if (dot((*images)[i] - verts[i], (*images)[j] - verts[j]) <= 0.0) return {};
    }
    return {TriLabel::reject, oracle_names::gd_disjoint};
}

// --- Certified oracles ------------------------------------------------------

inline Label omega_nonzero_certified(const LocalFrame& fr, const Scenario& sc,
                                     SolveCounter* counter) {
    const auto bf = box_F(sc, fr, reference_box(), counter);
    if (!bf.ok()) return {};
    if (!bf->x.contains_zero() || !bf->y.contains_zero())
        return {TriLabel::reject, oracle_names::nonzero_certified};
    return {};
}

struct KrawczykCertificate {
    bool exists = false; // K(I) strictly inside I
    bool unique = false; // ||1 - Y box_J(I)|| < 1
};

inline KrawczykCertificate krawczyk_certificate(const LocalFrame& fr, const Scenario& sc,
                                                SolveCounter* counter) {
    const IntervalBox box = reference_box();
    const Vec2d x0 = box_midpoint(box);
    const auto fj = eval_FJ(sc, fr, x0, counter);
    if (!fj.ok()) return {};
    const auto y = inverse(fj->jacobian);
    if (!y) return {};
    const auto k = krawczyk(sc, fr, box, x0, *y, counter);
    if (!k.ok()) return {};
    KrawczykCertificate cert;
    cert.exists = box_contains_strictly(box, *k);
    if (cert.exists) {
        const auto uq = krawczyk_unique(sc, fr, box, *y, counter);
        cert.unique = uq.ok() && *uq;
    }
    return cert;
}

inline Label omega_krawczyk_certified(const LocalFrame& fr, const Scenario& sc,
                                      SolveCounter* counter) {
    if (krawczyk_certificate(fr, sc, counter).exists)
        return {TriLabel::accept, oracle_names::krawczyk_certified};
    return {};
}

// --- Algorithm: LabelTriangle ----------------------------------------------

inline Label apply_oracle(const std::string& name, const LocalFrame& fr, const Scenario& sc,
                          const OracleConfig& cfg, SolveCounter* counter) {
    if (name == oracle_names::intersection) return omega_intersection(fr, sc, cfg);
    if (name == oracle_names::linear_approximation)
        return omega_linear_approximation(fr, sc, cfg, counter);
    if (name == oracle_names::gd_disjoint) return omega_gd_disjoint(fr, sc, cfg, counter);
    if (name == oracle_names::gd_converge) return omega_gd_converge(fr, sc, cfg, counter);
    if (name == oracle_names::newton) return omega_newton(fr, sc, cfg, counter);
    if (name == oracle_names::nonzero_certified) return omega_nonzero_certified(fr, sc, counter);
    if (name == oracle_names::krawczyk_certified)
        return omega_krawczyk_certified(fr, sc, counter);
    throw std::invalid_argument("unknown oracle: " + name);
}

// Runs the sequence in order and returns the first non-pass verdict.
inline Label label_triangle(const Triangle& t, const OracleSequence& seq, const Scenario& sc,
                            const OracleConfig& cfg, SolveCounter* counter = nullptr) {
    const LocalFrame fr = local_frame(t);
    for (const std::string& name : seq.names) {
        const Label l = apply_oracle(name, fr, sc, cfg, counter);
        if (l.kind != TriLabel::pass) return l;
    }
    return {};
}

} // namespace ppsub
