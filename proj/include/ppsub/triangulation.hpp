#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ppsub/octahedron.hpp"

namespace ppsub {

// accept/reject are final verdicts, pass means no conclusion yet, unresolved
// marks pass triangles frozen at the minimal area bound.
enum class TriLabel : std::uint8_t { pass, accept, reject, unresolved };

constexpr const char* label_name(TriLabel l) {
    switch (l) {
    case TriLabel::pass: return "pass";
    case TriLabel::accept: return "accept";
    case TriLabel::reject: return "reject";
    case TriLabel::unresolved: return "unresolved";
    }
    return "unknown";
}

struct TriNode {
    Triangle tri;
    TriLabel label = TriLabel::pass;
    // Deciding oracle; empty while undecided. Points at static storage.
    const char* oracle = "";
    std::int32_t parent = -1;
    std::int32_t first_child = -1;
    std::int32_t child_count = 0;

    bool is_leaf() const { return child_count == 0; }
};

// Append-only subdivision history. Leaves of one face tile it exactly;
// children of a node are stored contiguously.
class Triangulation {
public:
    Triangulation() = default;

    std::size_t add_root(const Triangle& t) {
        nodes_.push_back(TriNode{t});
        return nodes_.size() - 1;
    }

    template <std::size_t N>
    std::array<std::size_t, N> add_children(std::size_t parent, const std::array<Triangle, N>& kids) {
        std::array<std::size_t, N> out{};
        nodes_[parent].first_child = static_cast<std::int32_t>(nodes_.size());
        nodes_[parent].child_count = static_cast<std::int32_t>(N);
        for (std::size_t i = 0; i < N; ++i) {
            out[i] = nodes_.size();
            nodes_.push_back(TriNode{kids[i]});
            nodes_.back().parent = static_cast<std::int32_t>(parent);
        }
        return out;
    }

    TriNode& operator[](std::size_t i) { return nodes_[i]; }
    const TriNode& operator[](std::size_t i) const { return nodes_[i]; }
    std::size_t size() const { return nodes_.size(); }

    const std::vector<TriNode>& nodes() const { return nodes_; }

    std::vector<std::size_t> leaves() const {
        std::vector<std::size_t> out;
        for (std::size_t i = 0; i < nodes_.size(); ++i)
            if (nodes_[i].is_leaf()) out.push_back(i);
        return out;
    }

    double leaf_area() const {
        double s = 0.0;
        for (const auto& n : nodes_)
            if (n.is_leaf()) s += triangle_area(n.tri);
        return s;
    }

private:
    std::vector<TriNode> nodes_;
};

// The four northern faces, all labeled "pass".
inline Triangulation initial_triangulation() {
    Triangulation t;
    for (const Triangle& f : northern_faces()) t.add_root(f);
    return t;
}

} // namespace ppsub
