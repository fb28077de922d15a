#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "ppsub/error.hpp"
#include "ppsub/linalg.hpp"

namespace ppsub {

namespace detail {
inline double next_down(double x) {
    return std::nextafter(x, -std::numeric_limits<double>::infinity());
}
inline double next_up(double x) {
    return std::nextafter(x, std::numeric_limits<double>::infinity());
}
} // namespace detail

// Closed interval [lo, hi] with outward rounding. Every arithmetic result is
// widened by one ulp per endpoint, which dominates the half-ulp error of
// round-to-nearest, so the true real result set is always contained. This
// keeps enclosures platform-independent without touching the FPU rounding
// mode.
class Interval {
public:
    Interval() = default;
    Interval(double v) : lo_(v), hi_(v) {
        if (std::isnan(v)) throw NonEvaluableError{Stage::interval_op};
    }
    Interval(double lo, double hi) : lo_(lo), hi_(hi) {
        if (std::isnan(lo) || std::isnan(hi) || lo > hi)
            throw NonEvaluableError{Stage::interval_op};
    }

    double lo() const { return lo_; }
    double hi() const { return hi_; }
    double mid() const { return 0.5 * (lo_ + hi_); }
    double width() const { return hi_ - lo_; }

    // Largest and smallest absolute values over the interval.
    double mag() const { return std::max(std::abs(lo_), std::abs(hi_)); }
    double mig() const {
        if (lo_ <= 0.0 && hi_ >= 0.0) return 0.0;
        return std::min(std::abs(lo_), std::abs(hi_));
    }

    bool contains(double v) const { return lo_ <= v && v <= hi_; }
    bool contains_zero() const { return lo_ <= 0.0 && hi_ >= 0.0; }
    bool contains(const Interval& o) const { return lo_ <= o.lo_ && o.hi_ <= hi_; }
    // Containment with strict endpoint inequalities (interior containment).
    bool contains_strictly(const Interval& o) const { return lo_ < o.lo_ && o.hi_ < hi_; }

    static Interval hull(double a, double b) { return {std::min(a, b), std::max(a, b)}; }

    friend Interval operator-(const Interval& a) { return raw(-a.hi_, -a.lo_); }

    friend Interval operator+(const Interval& a, const Interval& b) {
        return outward(a.lo_ + b.lo_, a.hi_ + b.hi_);
    }
    friend Interval operator-(const Interval& a, const Interval& b) {
        return outward(a.lo_ - b.hi_, a.hi_ - b.lo_);
    }
    friend Interval operator*(const Interval& a, const Interval& b) {
        const std::array<double, 4> p{a.lo_ * b.lo_, a.lo_ * b.hi_, a.hi_ * b.lo_, a.hi_ * b.hi_};
        return outward(*std::min_element(p.begin(), p.end()),
                       *std::max_element(p.begin(), p.end()));
    }
    friend Interval operator/(const Interval& a, const Interval& b) {
        if (b.contains_zero()) throw NonEvaluableError{Stage::interval_op};
        const std::array<double, 4> q{a.lo_ / b.lo_, a.lo_ / b.hi_, a.hi_ / b.lo_, a.hi_ / b.hi_};
        return outward(*std::min_element(q.begin(), q.end()),
                       *std::max_element(q.begin(), q.end()));
    }

    Interval& operator+=(const Interval& o) { return *this = *this + o; }
    Interval& operator-=(const Interval& o) { return *this = *this - o; }
    Interval& operator*=(const Interval& o) { return *this = *this * o; }

    friend Interval sqrt(const Interval& a) {
        if (a.hi_ < 0.0) throw NonEvaluableError{Stage::interval_op};
        const double lo = a.lo_ <= 0.0 ? 0.0 : std::max(0.0, detail::next_down(std::sqrt(a.lo_)));
        return raw(lo, detail::next_up(std::sqrt(a.hi_)));
    }

    friend Interval intersect(const Interval& a, const Interval& b) {
        return {std::max(a.lo_, b.lo_), std::min(a.hi_, b.hi_)};
    }

    friend Interval hull(const Interval& a, const Interval& b) {
        return raw(std::min(a.lo_, b.lo_), std::max(a.hi_, b.hi_));
    }

private:
    static Interval raw(double lo, double hi) {
        Interval r;
        r.lo_ = lo;
        r.hi_ = hi;
        if (std::isnan(lo) || std::isnan(hi)) throw NonEvaluableError{Stage::interval_op};
        return r;
    }
    static Interval outward(double lo, double hi) {
        return raw(detail::next_down(lo), detail::next_up(hi));
    }

    double lo_ = 0.0;
    double hi_ = 0.0;
};

using IntervalBox = Vec2<Interval>;
using IntervalMatrix = Mat2<Interval>;

inline Vec2d box_midpoint(const IntervalBox& b) { return {b.x.mid(), b.y.mid()}; }

inline bool box_contains(const IntervalBox& outer, const IntervalBox& inner) {
    return outer.x.contains(inner.x) && outer.y.contains(inner.y);
}

inline bool box_contains_strictly(const IntervalBox& outer, const IntervalBox& inner) {
    return outer.x.contains_strictly(inner.x) && outer.y.contains_strictly(inner.y);
}

// max_{A in M} ||A||_inf: row sums of entry magnitudes.
inline double interval_matrix_norm(const IntervalMatrix& m) {
    return std::max(m.a11.mag() + m.a12.mag(), m.a21.mag() + m.a22.mag());
}

// Verified solve of the 5x5 interval system A x = b: precondition with the
// inverse of the midpoint matrix, bound the solution with a diagonal
// dominance estimate, then contract by interval Gauss-Seidel sweeps.
// NonEvaluable when the midpoint matrix is singular or the preconditioned
// system is not strictly diagonally dominant as intervals.
class IntervalLinearSolver5 {
public:
    using IMat5 = std::array<std::array<Interval, 5>, 5>;
    using IVec5 = std::array<Interval, 5>;

    IntervalLinearSolver5(const IMat5& m, SolveCounter* counter) {
        Mat5d mid{};
        for (int i = 0; i < 5; ++i)
            for (int j = 0; j < 5; ++j) mid[i][j] = m[i][j].mid();
        Lu5 lu;
        if (counter) counter->bump();
        if (!lu.factor(mid)) throw NonEvaluableError{Stage::conic_fit};
        for (int j = 0; j < 5; ++j) {
            std::array<double, 5> e{};
            e[j] = 1.0;
            const auto col = lu.solve(e);
            for (int i = 0; i < 5; ++i) precond_[i][j] = col[i];
        }
        // a = precond * m, evaluated in interval arithmetic.
        for (int i = 0; i < 5; ++i) {
            for (int j = 0; j < 5; ++j) {
                Interval s(0.0);
                for (int k = 0; k < 5; ++k) s += Interval(precond_[i][k]) * m[k][j];
                a_[i][j] = s;
            }
        }
        // Varah-style dominance gap, computed conservatively: if every point
        // matrix in a_ is strictly diagonally dominant with gap >= d, then
        // ||A^-1||_inf <= 1/d for all of them.
        Interval gap_min(std::numeric_limits<double>::infinity());
        for (int i = 0; i < 5; ++i) {
            Interval off(0.0);
            for (int j = 0; j < 5; ++j)
                if (j != i) off += Interval(a_[i][j].mag());
            const Interval gap = Interval(a_[i][i].mig()) - off;
            if (gap.lo() < gap_min.lo()) gap_min = gap;
        }
        dominance_gap_ = gap_min.lo();
        if (!(dominance_gap_ > 0.0)) throw NonEvaluableError{Stage::conic_fit};
    }

    IVec5 solve(const IVec5& b) const {
        IVec5 rhs;
        for (int i = 0; i < 5; ++i) {
            Interval s(0.0);
            for (int k = 0; k < 5; ++k) s += Interval(precond_[i][k]) * b[k];
            rhs[i] = s;
        }
        double bmax = 0.0;
        for (const auto& r : rhs) bmax = std::max(bmax, r.mag());
        const double bound = (Interval(bmax) / Interval(dominance_gap_)).hi();
        IVec5 x;
        x.fill(Interval(-bound, bound));
        for (int sweep = 0; sweep < 20; ++sweep) {
            double improvement = 0.0;
            for (int i = 0; i < 5; ++i) {
                Interval s = rhs[i];
                for (int j = 0; j < 5; ++j)
                    if (j != i) s -= a_[i][j] * x[j];
                const Interval refined = intersect(s / a_[i][i], x[i]);
                improvement = std::max(improvement, x[i].width() - refined.width());
                x[i] = refined;
            }
            if (improvement < 1e-15 * std::max(1.0, bound)) break;
        }
        return x;
    }

private:
    IMat5 a_{};
    Mat5d precond_{};
    double dominance_gap_ = 0.0;
};

} // namespace ppsub
