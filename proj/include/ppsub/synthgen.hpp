#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <stdexcept>
#include <vector>

#include "ppsub/linalg.hpp"
#include "ppsub/scenario.hpp"

namespace ppsub {

// Fabricated scenarios with known orbital-plane normals: five points sampled
// on an ellipse with a focus at the origin, lines of sight through them, and
// a rotation hiding the construction.

struct EllipseSpec {
    double a = 1.0;   // semi-major axis
    double ecc = 0.0; // eccentricity in [0, 1)
    std::array<double, 5> betas{};

    double c() const { return a * ecc; }
    double b() const { return std::sqrt(a * a - c() * c()); }

    void validate() const {
        if (!(a > 0.0)) throw std::invalid_argument("ellipse: semi-major axis must be > 0");
        if (!(ecc >= 0.0 && ecc < 1.0))
            throw std::invalid_argument("ellipse: eccentricity must be in [0, 1)");
        for (int i = 0; i < 5; ++i)
            for (int j = i + 1; j < 5; ++j)
                if (std::abs(std::sin(0.5 * (betas[i] - betas[j]))) < 1e-9)
                    throw std::invalid_argument("ellipse: sample angles must be distinct mod 2pi");
    }
};

// r_i = (a cos beta_i - c, b sin beta_i, 0): points on the ellipse with the
// focus shifted to the origin, in the z = 0 plane.
inline std::array<Vec3d, 5> sample_ellipse_points(const EllipseSpec& spec) {
    spec.validate();
    std::array<Vec3d, 5> out{};
    for (int i = 0; i < 5; ++i)
        out[i] = {spec.a * std::cos(spec.betas[i]) - spec.c(), spec.b() * std::sin(spec.betas[i]),
                  0.0};
    return out;
}

// Deterministic double stream independent of library distribution internals.
class SeededRng {
public:
    explicit SeededRng(std::uint64_t seed) : gen_(seed) {}

    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * uniform() - 1.0;
            v = 2.0 * uniform() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double f = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * f;
        have_spare_ = true;
        return u * f;
    }

    Vec3d unit_vector() {
        Vec3d v{normal(), normal(), normal()};
        double n = norm(v);
        while (!(n > 1e-6)) {
            v = {normal(), normal(), normal()};
            n = norm(v);
        }
        return (1.0 / n) * v;
    }

private:
    std::mt19937_64 gen_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

// Uniform random rotation from a normalized quaternion.
inline Mat3d random_rotation(SeededRng& rng) {
    double q0, q1, q2, q3, n;
    do {
        q0 = rng.normal();
        q1 = rng.normal();
        q2 = rng.normal();
        q3 = rng.normal();
        n = std::sqrt(q0 * q0 + q1 * q1 + q2 * q2 + q3 * q3);
    } while (!(n > 1e-6));
    q0 /= n;
    q1 /= n;
    q2 /= n;
    q3 /= n;
    return {{1 - 2 * (q2 * q2 + q3 * q3), 2 * (q1 * q2 - q3 * q0), 2 * (q1 * q3 + q2 * q0)},
            {2 * (q1 * q2 + q3 * q0), 1 - 2 * (q1 * q1 + q3 * q3), 2 * (q2 * q3 - q1 * q0)},
            {2 * (q1 * q3 - q2 * q0), 2 * (q2 * q3 + q1 * q0), 1 - 2 * (q1 * q1 + q2 * q2)}};
}

// Single known solution: lines through the ellipse points from the given
// observers, everything rotated by R. The returned normal is R e3 flipped to
// the northern hemisphere.
inline Scenario gen_single(const EllipseSpec& spec, const std::array<Vec3d, 5>& observers,
                           const Mat3d& rot) {
    const auto r = sample_ellipse_points(spec);
    std::array<Vec3d, 5> p{}, u{};
    for (int i = 0; i < 5; ++i) {
        const Vec3d dir = r[i] - observers[i];
        if (!(norm(dir) > 1e-9))
            throw std::invalid_argument("gen_single: observer coincides with an ellipse point");
        p[i] = rot * observers[i];
        u[i] = rot * dir;
    }
    const Vec3d w = rot * Vec3d{0.0, 0.0, 1.0};
    return Scenario::make(p, u, {w});
}

// Two known solutions: ellipse one in the z = 0 plane, ellipse two rotated by
// r2; the lines join corresponding points, with observers placed on the lines
// at parameters tau. r1 rotates the whole construction.
inline Scenario gen_two_solutions(const EllipseSpec& spec1, const EllipseSpec& spec2,
                                  const Mat3d& r1, const Mat3d& r2,
                                  const std::array<double, 5>& taus) {
    const auto ra = sample_ellipse_points(spec1);
    const auto rb = sample_ellipse_points(spec2);
    std::array<Vec3d, 5> p{}, u{};
    for (int i = 0; i < 5; ++i) {
        const Vec3d second = r2 * rb[i];
        const Vec3d dir = ra[i] - second;
        if (!(norm(dir) > 1e-9))
            throw std::invalid_argument("gen_two_solutions: coincident sample points");
        const Vec3d pos = second + taus[i] * dir;
        p[i] = r1 * pos;
        u[i] = r1 * dir;
    }
    const Vec3d w1 = r1 * Vec3d{0.0, 0.0, 1.0};
    const Vec3d w2 = r1 * (r2 * Vec3d{0.0, 0.0, 1.0});
    return Scenario::make(p, u, {w1, w2});
}

// Seed-deterministic conveniences used by the test corpus and the CLI.

inline EllipseSpec random_ellipse(SeededRng& rng) {
    EllipseSpec spec;
    spec.a = rng.uniform(1.0, 2.0);
    spec.ecc = rng.uniform(0.0, 0.8);
    for (int i = 0; i < 5; ++i)
        spec.betas[i] = 2.0 * std::numbers::pi * (i + 0.2 + 0.6 * rng.uniform()) / 5.0;
    return spec;
}

inline Scenario gen_single_random(std::uint64_t seed) {
    SeededRng rng(seed);
    const EllipseSpec spec = random_ellipse(rng);
    std::array<Vec3d, 5> observers{};
    for (auto& o : observers) o = rng.uniform(1.5 * spec.a, 3.0 * spec.a) * rng.unit_vector();
    const Mat3d rot = random_rotation(rng);
    return gen_single(spec, observers, rot);
}

inline Scenario gen_two_solutions_random(std::uint64_t seed) {
    SeededRng rng(seed);
    const EllipseSpec spec1 = random_ellipse(rng);
    const EllipseSpec spec2 = random_ellipse(rng);
    const Mat3d r1 = random_rotation(rng);
    const Mat3d r2 = random_rotation(rng);
    std::array<double, 5> taus{};
    for (auto& t : taus) t = rng.uniform(0.3, 0.7);
    return gen_two_solutions(spec1, spec2, r1, r2, taus);
}

// Joint rotation of a scenario; zeros of the master map rotate with it.
inline Scenario rotated(const Scenario& sc, const Mat3d& rot) {
    std::array<Vec3d, 5> p{}, u{};
    for (int i = 0; i < 5; ++i) {
        p[i] = rot * sc.p[i];
        u[i] = rot * sc.u[i];
    }
    std::vector<Vec3d> known;
    known.reserve(sc.known_solutions.size());
    for (const Vec3d& w : sc.known_solutions) known.push_back(rot * w);
    return Scenario::make(p, u, known, sc.length_unit);
}

} // namespace ppsub
