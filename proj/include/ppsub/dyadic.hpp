#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "ppsub/linalg.hpp"

namespace ppsub {

using BigInt = boost::multiprecision::cpp_int;

// Exact dyadic rational n / 2^k with k >= 0, kept in lowest terms.
// Closed under addition, negation and halving, which is everything the
// subdivision needs; numerators are arbitrary precision so deep refinement
// never rounds.
class Dyadic {
public:
    Dyadic() = default;
    Dyadic(long long n) : num_(n) {}
    Dyadic(BigInt n, unsigned k) : num_(std::move(n)), exp_(k) { normalize(); }

    const BigInt& numerator() const { return num_; }
    unsigned exponent() const { return exp_; }

    bool is_zero() const { return num_.is_zero(); }
    int sign() const { return num_.sign(); }

    Dyadic half() const { return Dyadic(num_, exp_ + 1); }

    Dyadic abs() const { return num_ < 0 ? Dyadic(-num_, exp_) : *this; }

    double to_double() const {
        return std::ldexp(num_.convert_to<double>(), -static_cast<int>(exp_));
    }

    friend Dyadic operator+(const Dyadic& a, const Dyadic& b) {
        const unsigned k = std::max(a.exp_, b.exp_);
        BigInt n = (a.num_ << (k - a.exp_)) + (b.num_ << (k - b.exp_));
        return Dyadic(std::move(n), k);
    }
    friend Dyadic operator-(const Dyadic& a) { return Dyadic(-a.num_, a.exp_); }
    friend Dyadic operator-(const Dyadic& a, const Dyadic& b) { return a + (-b); }

    friend bool operator==(const Dyadic& a, const Dyadic& b) {
        return a.exp_ == b.exp_ && a.num_ == b.num_;
    }
    friend bool operator!=(const Dyadic& a, const Dyadic& b) { return !(a == b); }
    friend bool operator<(const Dyadic& a, const Dyadic& b) {
        const unsigned k = std::max(a.exp_, b.exp_);
        return (a.num_ << (k - a.exp_)) < (b.num_ << (k - b.exp_));
    }

    std::string str() const {
        return num_.str() + (exp_ ? "/2^" + std::to_string(exp_) : "");
    }

private:
    void normalize() {
        if (num_.is_zero()) {
            exp_ = 0;
            return;
        }
        while (exp_ > 0 && !boost::multiprecision::bit_test(num_, 0)) {
            num_ >>= 1;
            --exp_;
        }
    }

    BigInt num_ = 0;
    unsigned exp_ = 0;
};

// A vertex on the northern half of the octahedron |x|+|y|+|z| = 1, z >= 0,
// with exact coordinates.
struct DyadicPoint {
    Dyadic x, y, z;

    Vec3d to_vec3() const { return {x.to_double(), y.to_double(), z.to_double()}; }

    // |x| + |y| + |z| == 1 holds exactly, z >= 0.
    bool on_octahedron() const {
        return (x.abs() + y.abs() + z.abs()) == Dyadic(1) && z.sign() >= 0;
    }

    friend bool operator==(const DyadicPoint& a, const DyadicPoint& b) {
        return a.x == b.x && a.y == b.y && a.z == b.z;
    }
};

// Exact component-wise average. Midpoints of points on a common face stay on
// that face, so the octahedron invariant is preserved.
inline DyadicPoint midpoint(const DyadicPoint& a, const DyadicPoint& b) {
    return {(a.x + b.x).half(), (a.y + b.y).half(), (a.z + b.z).half()};
}

} // namespace ppsub
