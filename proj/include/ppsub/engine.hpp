#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "ppsub/oracles.hpp"
#include "ppsub/triangulation.hpp"

namespace ppsub {

struct EngineConfig {
    OracleSequence sequence;
    OracleConfig oracle;
    double max_area_to_label = 0.05; // subdivide freely above this
    double min_area_to_stop = 1e-3;  // freeze pass triangles below this
    double subdivision_ratio = 4.0;  // gamma of the combination rule
    bool certify = false;
    double certify_refine_area = 1e-9;
    bool audit_rejects = false; // sweep rejected leaves with the certified reject oracle
    std::uint32_t max_generations = 64;
    unsigned threads = 1;

    void validate() const {
        oracle.validate();
        if (sequence.names.empty()) throw std::invalid_argument("oracle sequence is empty");
        if (!(min_area_to_stop < max_area_to_label))
            throw std::invalid_argument("min_area_to_stop must be < max_area_to_label");
        if (!(subdivision_ratio > 2.0))
            throw std::invalid_argument("subdivision_ratio must be > 2");
        if (!(certify_refine_area > 0.0))
            throw std::invalid_argument("certify_refine_area must be > 0");
    }
};

struct RunStats {
    double area_accepted = 0.0;
    double area_passed = 0.0;                    // unresolved triangles at stop
    std::map<std::string, double> area_rejected; // by deciding oracle
    std::uint64_t bottleneck_calls = 0;          // 5x5 factorizations
    std::uint32_t generations = 0;
    bool generation_cap_hit = false;
    std::size_t certified_rejects = 0; // only with audit_rejects
    std::size_t audited_rejects = 0;

    double area_rejected_total() const {
        double s = 0.0;
        for (const auto& [name, a] : area_rejected) s += a;
        return s;
    }
    double total_area() const { return area_accepted + area_passed + area_rejected_total(); }
    double accept_pass_to_reject_ratio() const {
        return (area_accepted + area_passed) / area_rejected_total();
    }
};

struct Solution {
    Vec3d w{}; // canonical unit normal, z >= 0
    Frame frame{};
    ConicCoeffs conic{};
    double residual = std::numeric_limits<double>::infinity();
    bool polished = false;
    bool certified = false;
    bool certified_unique = false;
    std::size_t triangle = 0; // node index in the final triangulation
};

struct RunResult {
    Triangulation triangulation;
    std::vector<std::size_t> accepted; // node indices, discovery order
    std::vector<Solution> solutions;   // one per accepted triangle
    RunStats stats;
};

// --- Adaptive subdivision metric --------------------------------------------

// delta_i = (d_side / 2) ||J_{m_i} t_i|| per side, in local coordinates.
// A NonEvaluable midpoint forces attention to that side via +infinity.
inline std::array<double, 3> side_variation(const Scenario& sc, const Triangle& t,
                                            SolveCounter* counter = nullptr) {
    const LocalFrame fr = local_frame(t);
    const Vec2d ends[3][2] = {{kRefP, kRefQ}, {kRefQ, kRefR}, {kRefR, kRefP}};
    std::array<double, 3> delta{};
    for (int i = 0; i < 3; ++i) {
        const Vec2d mid = 0.5 * (ends[i][0] + ends[i][1]);
        const Vec2d edge = ends[i][1] - ends[i][0];
        const double len = norm(edge);
        const auto fj = eval_FJ(sc, fr, mid, counter);
        if (!fj.ok()) {
            delta[i] = std::numeric_limits<double>::infinity();
            continue;
        }
        const Vec2d dir = (1.0 / len) * edge;
        delta[i] = 0.5 * len * norm(fj->jacobian * dir);
    }
    return delta;
}

struct SubdivisionChoice {
    bool regular = true;
    int side = 0; // 1..3 when !regular
};

// delta_max >= ratio * delta_min selects bisection along the side of greatest
// variation; argmax ties break toward the lowest side index.
inline SubdivisionChoice choose_subdivision(const std::array<double, 3>& delta, double ratio) {
    int imax = 0, imin = 0;
    for (int i = 1; i < 3; ++i) {
        if (delta[i] > delta[imax]) imax = i;
        if (delta[i] < delta[imin]) imin = i;
    }
    if (delta[imax] >= ratio * delta[imin]) return {false, imax + 1};
    return {true, 0};
}

// --- Polishing ----------------------------------------------------------------

namespace detail {

// Frame, conic and residual of the orbit with plane normal w.
inline bool orbit_at_normal(const Scenario& sc, const Vec3d& w, Solution& sol) {
    try {
        const auto n = normalize_impl(w);
        const auto fp = frame_impl(n.n, sc.u[0]);
        const auto ip = intersect_impl(fp.frame, sc);
        std::array<std::array<double, 5>, 5> m;
        std::array<double, 5> rhs;
        for (int i = 0; i < 5; ++i) {
            m[i] = conic_row(ip.planar.x[i], ip.planar.y[i]);
            rhs[i] = -1.0;
        }
        const ConicSolver<double> solver(m, nullptr);
        const auto theta = solver.solve(rhs);
        sol.frame = fp.frame;
        sol.conic = to_conic(theta);
        sol.residual = norm(focus_impl(sol.conic));
        return true;
    } catch (const NonEvaluableError&) {
        return false;
    }
}

} // namespace detail

// Damped Newton from the triangle center; succeeds when ||F|| <= 1e-9 within
// 50 iterations while the iterate stays within twice the circumradius of the
// triangle center. Divergence leaves the solution flagged unpolished.
inline Solution polish(const Scenario& sc, const Triangle& t, std::size_t node_index = 0,
                       SolveCounter* counter = nullptr) {
    Solution sol;
    sol.triangle = node_index;
    const LocalFrame fr = local_frame(t);
    const double drift_limit = 2.0 * circumradius(t);

    Vec2d z{0.0, 0.0};
    bool converged = false;
    for (int iter = 0; iter < 50; ++iter) {
        const auto fj = eval_FJ(sc, fr, z, counter);
        if (!fj.ok()) break;
        const double res = norm(fj->value);
        if (res <= 1e-9) {
            converged = true;
            break;
        }
        const auto full = newton_step_from(fj->value, fj->jacobian, z);
        if (!full) break;
        const Vec2d dz = *full - z;
        bool stepped = false;
        double lambda = 1.0;
        for (int k = 0; k < 9; ++k, lambda *= 0.5) {
            const Vec2d trial = z + lambda * dz;
            if (norm(fr.map(trial) - fr.origin) > drift_limit) continue;
            const auto ft = eval_F(sc, fr, trial, counter);
            if (!ft.ok()) continue;
            if (norm(*ft) < res) {
                z = trial;
                stepped = true;
                break;
            }
        }
        if (!stepped) break;
    }

    sol.w = canonical_normal(fr.map(z));
    const bool described = detail::orbit_at_normal(sc, sol.w, sol);
    sol.polished = converged && described && sol.residual <= 1e-9;
    return sol;
}

// --- Certification pass --------------------------------------------------------

// Refine each accepted triangle toward its polished solution until children
// are below certify_refine_area, then try the Krawczyk oracle on the final
// siblings. Certification failure only leaves the flag false.
inline void certify_pass(RunResult& result, const Scenario& sc, const EngineConfig& cfg,
                         SolveCounter* counter = nullptr) {
    for (Solution& sol : result.solutions) {
        if (!sol.polished) continue;
        const Vec3d target = octahedral_point(sol.w);
        Triangle cur = result.triangulation[sol.triangle].tri;
        std::array<Triangle, 4> kids{};
        bool have_kids = false;
        for (int level = 0; level < 64 && triangle_area(cur) > cfg.certify_refine_area; ++level) {
            kids = regular_subdivide(cur);
            have_kids = true;
            int chosen = 3; // central child as fallback
            for (int i = 0; i < 4; ++i) {
                if (triangle_contains_oct(kids[i], target)) {
                    chosen = i;
                    break;
                }
            }
            cur = kids[chosen];
        }
        std::vector<Triangle> candidates{cur};
        if (have_kids)
            for (const Triangle& k : kids)
                if (!(k.v1 == cur.v1 && k.v2 == cur.v2 && k.v3 == cur.v3)) candidates.push_back(k);
        for (const Triangle& cand : candidates) {
            const auto cert = krawczyk_certificate(local_frame(cand), sc, counter);
            if (cert.exists) {
                sol.certified = true;
                sol.certified_unique = cert.unique;
                break;
            }
        }
    }
    if (cfg.audit_rejects) {
        for (std::size_t i = 0; i < result.triangulation.size(); ++i) {
            const TriNode& n = result.triangulation[i];
            if (!n.is_leaf() || n.label != TriLabel::reject) continue;
            ++result.stats.audited_rejects;
            const Label l = omega_nonzero_certified(local_frame(n.tri), sc, counter);
            if (l.kind == TriLabel::reject) ++result.stats.certified_rejects;
        }
    }
}

// --- Subdivision driver -----------------------------------------------------------

namespace detail {

template <class Fn>
void parallel_for(std::size_t n, unsigned threads, Fn&& fn) {
    if (threads <= 1 || n < 2) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
    };
    std::vector<std::thread> pool;
    const unsigned count = std::min<unsigned>(threads, std::thread::hardware_concurrency() * 4 + 4);
    pool.reserve(count);
    for (unsigned t = 0; t < count; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
}

enum class EngineAction : std::uint8_t { presubdivide, accept, reject, freeze, regular, bisect };

struct Decision {
    EngineAction action = EngineAction::presubdivide;
    const char* oracle = "";
    int side = 0;
};

} // namespace detail

// Breadth-first by generation: triangles above the labeling bound subdivide
// regularly without oracles, labeled pass triangles subdivide through the
// combination rule, and pass triangles below the stopping bound freeze as
// unresolved. Results are independent of the thread count: labeling is a
// pure per-triangle map and all mutation happens in a stable-order reduce.
inline RunResult run(const Scenario& sc, const EngineConfig& cfg) {
    cfg.validate();
    RunResult result;
    result.triangulation = initial_triangulation();
    SolveCounter counter;

    std::vector<std::size_t> frontier{0, 1, 2, 3};
    std::uint32_t gen = 0;
    for (; gen < cfg.max_generations && !frontier.empty(); ++gen) {
        std::vector<detail::Decision> decisions(frontier.size());
        detail::parallel_for(frontier.size(), cfg.threads, [&](std::size_t i) {
            const Triangle& tri = result.triangulation[frontier[i]].tri;
            detail::Decision d;
            const double area = triangle_area(tri);
            if (area > cfg.max_area_to_label) {
                // Above the labeling bound triangles subdivide oracle-free,
                // but still through the combination rule: the initial label
                // is "pass" and pass triangles split adaptively.
                const auto delta = side_variation(sc, tri, &counter);
                const auto choice = choose_subdivision(delta, cfg.subdivision_ratio);
                d.action = choice.regular ? detail::EngineAction::presubdivide
                                          : detail::EngineAction::bisect;
                d.side = choice.side;
            } else {
                const Label l = label_triangle(tri, cfg.sequence, sc, cfg.oracle, &counter);
                if (l.kind == TriLabel::accept) {
                    d.action = detail::EngineAction::accept;
                    d.oracle = l.oracle;
                } else if (l.kind == TriLabel::reject) {
                    d.action = detail::EngineAction::reject;
                    d.oracle = l.oracle;
                } else if (area < cfg.min_area_to_stop) {
                    d.action = detail::EngineAction::freeze;
                } else {
                    const auto delta = side_variation(sc, tri, &counter);
                    const auto choice = choose_subdivision(delta, cfg.subdivision_ratio);
                    d.action = choice.regular ? detail::EngineAction::regular
                                              : detail::EngineAction::bisect;
                    d.side = choice.side;
                }
            }
            decisions[i] = d;
        });

        std::vector<std::size_t> next;
        next.reserve(frontier.size() * 2);
        for (std::size_t i = 0; i < frontier.size(); ++i) {
            const std::size_t node = frontier[i];
            TriNode& tn = result.triangulation[node];
            switch (decisions[i].action) {
            case detail::EngineAction::presubdivide:
            case detail::EngineAction::regular: {
                const auto kids =
                    result.triangulation.add_children(node, regular_subdivide(tn.tri));
                next.insert(next.end(), kids.begin(), kids.end());
                break;
            }
            case detail::EngineAction::bisect: {
                const auto kids =
                    result.triangulation.add_children(node, bisect(tn.tri, decisions[i].side));
                next.insert(next.end(), kids.begin(), kids.end());
                break;
            }
            case detail::EngineAction::accept:
                tn.label = TriLabel::accept;
                tn.oracle = decisions[i].oracle;
                result.accepted.push_back(node);
                break;
            case detail::EngineAction::reject:
                tn.label = TriLabel::reject;
                tn.oracle = decisions[i].oracle;
                break;
            case detail::EngineAction::freeze:
                tn.label = TriLabel::unresolved;
                break;
            }
        }
        frontier = std::move(next);
    }

    if (!frontier.empty()) {
        result.stats.generation_cap_hit = true;
        for (std::size_t node : frontier) result.triangulation[node].label = TriLabel::unresolved;
    }
    result.stats.generations = gen;

    for (const TriNode& n : result.triangulation.nodes()) {
        if (!n.is_leaf()) continue;
        const double area = triangle_area(n.tri);
        switch (n.label) {
        case TriLabel::accept: result.stats.area_accepted += area; break;
        case TriLabel::reject: result.stats.area_rejected[n.oracle] += area; break;
        case TriLabel::unresolved: result.stats.area_passed += area; break;
        case TriLabel::pass: result.stats.area_passed += area; break;
        }
    }

    result.solutions.reserve(result.accepted.size());
    for (std::size_t node : result.accepted)
        result.solutions.push_back(polish(sc, result.triangulation[node].tri, node, &counter));

    if (cfg.certify) certify_pass(result, sc, cfg, &counter);

    result.stats.bottleneck_calls = counter.value();
    return result;
}

} // namespace ppsub
