#pragma once

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "ppsub/linalg.hpp"
#include "ppsub/octahedron.hpp"

namespace ppsub {

// Five lines of sight: observer positions p_i and unit direction vectors u_i.
// Directions are normalized on ingest; this rescales the line parameters but
// leaves the intersection points, and hence the zero set of the master
// function, unchanged.
struct Scenario {
    std::array<Vec3d, 5> p{};
    std::array<Vec3d, 5> u{};
    std::vector<Vec3d> known_solutions; // canonical unit normals, for testing
    std::string length_unit;

    static Scenario make(const std::array<Vec3d, 5>& positions,
                         const std::array<Vec3d, 5>& directions,
                         std::vector<Vec3d> known = {},
                         std::string unit = {}) {
        Scenario s;
        for (int i = 0; i < 5; ++i) {
            const Vec3d& pi = positions[i];
            const Vec3d& ui = directions[i];
            if (!std::isfinite(pi.x) || !std::isfinite(pi.y) || !std::isfinite(pi.z) ||
                !std::isfinite(ui.x) || !std::isfinite(ui.y) || !std::isfinite(ui.z))
                throw std::invalid_argument("scenario: non-finite entry in line of sight " +
                                            std::to_string(i + 1));
            const double n = norm(ui);
            if (!(n > 1e-12))
                throw std::invalid_argument("scenario: zero direction vector in line of sight " +
                                            std::to_string(i + 1));
            s.p[i] = pi;
            s.u[i] = (1.0 / n) * ui;
        }
        s.known_solutions.reserve(known.size());
        for (const Vec3d& w : known) {
            if (!(norm(w) > 1e-12))
                throw std::invalid_argument("scenario: zero known solution");
            s.known_solutions.push_back(canonical_normal(w));
        }
        s.length_unit = std::move(unit);
        return s;
    }
};

} // namespace ppsub
