#pragma once

#include "ppsub/interval.hpp"
#include "ppsub/mastermap.hpp"

namespace ppsub {

// Interval enclosures of the master map and its Jacobian over boxes in local
// coordinates, and the Krawczyk existence operator built from them.

// Tight axis-aligned bounding box of the reference triangle; every triangle
// is covered by this box in its own local coordinates.
inline IntervalBox reference_box() {
    return {Interval(kRefP.x, kRefQ.x), Interval(kRefP.y, kRefR.y)};
}

inline Fallible<IntervalBox> box_F(const Scenario& sc, const LocalFrame& fr, const IntervalBox& box,
                                   SolveCounter* counter = nullptr) {
    try {
        return detail::master_impl<false>(sc, fr, box, counter).value;
    } catch (const NonEvaluableError& e) {
        return e;
    }
}

inline Fallible<IntervalMatrix> box_J(const Scenario& sc, const LocalFrame& fr,
                                      const IntervalBox& box, SolveCounter* counter = nullptr) {
    try {
        return detail::master_impl<true>(sc, fr, box, counter).jacobian;
    } catch (const NonEvaluableError& e) {
        return e;
    }
}

inline Fallible<IntervalBox> box_F(const Scenario& sc, const Triangle& t, const IntervalBox& box,
                                   SolveCounter* counter = nullptr) {
    return box_F(sc, local_frame(t), box, counter);
}

inline Fallible<IntervalMatrix> box_J(const Scenario& sc, const Triangle& t, const IntervalBox& box,
                                      SolveCounter* counter = nullptr) {
    return box_J(sc, local_frame(t), box, counter);
}

// K_{x0,Y}(I) = x0 - Y box_F([x0]) + (1 - Y box_J(I)) (I - x0).
inline Fallible<IntervalBox> krawczyk(const Scenario& sc, const LocalFrame& fr,
                                      const IntervalBox& box, const Vec2d& x0, const Mat2d& y,
                                      SolveCounter* counter = nullptr) {
    try {
        const IntervalBox f0 =
            detail::master_impl<false>(sc, fr, IntervalBox{Interval(x0.x), Interval(x0.y)}, counter)
                .value;
        const IntervalMatrix j = detail::master_impl<true>(sc, fr, box, counter).jacobian;
        const IntervalMatrix yi{Interval(y.a11), Interval(y.a12), Interval(y.a21),
                                Interval(y.a22)};
        const IntervalMatrix id{Interval(1.0), Interval(0.0), Interval(0.0), Interval(1.0)};
        const IntervalMatrix residual = id - yi * j;
        const IntervalBox centered{box.x - Interval(x0.x), box.y - Interval(x0.y)};
        const IntervalBox shift = yi * f0;
        const IntervalBox spread = residual * centered;
        return IntervalBox{Interval(x0.x) - shift.x + spread.x,
                           Interval(x0.y) - shift.y + spread.y};
    } catch (const NonEvaluableError& e) {
        return e;
    }
}

// Uniqueness certificate of Theorem-style Krawczyk tests:
// ||1 - Y box_J(I)|| < 1 in the interval matrix norm.
inline Fallible<bool> krawczyk_unique(const Scenario& sc, const LocalFrame& fr,
                                      const IntervalBox& box, const Mat2d& y,
                                      SolveCounter* counter = nullptr) {
    try {
        const IntervalMatrix j = detail::master_impl<true>(sc, fr, box, counter).jacobian;
        const IntervalMatrix yi{Interval(y.a11), Interval(y.a12), Interval(y.a21),
                                Interval(y.a22)};
        const IntervalMatrix id{Interval(1.0), Interval(0.0), Interval(0.0), Interval(1.0)};
        return interval_matrix_norm(id - yi * j) < 1.0;
    } catch (const NonEvaluableError& e) {
        return e;
    }
}

} // namespace ppsub
