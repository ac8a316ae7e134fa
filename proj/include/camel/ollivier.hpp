#pragma once

#include <cstdint>
#include <vector>

#include "camel/matrix.hpp"

namespace camel {

// Small weighted undirected graph for the exact curvature oracle. Hard-capped
// in size: this is a validation tool, not a production path.
struct SmallGraph {
    std::size_t n = 0;
    struct Edge {
        std::uint32_t u, v;
        double w;
    };
    std::vector<Edge> edges;

    void add_edge(std::uint32_t u, std::uint32_t v, double w = 1.0) { edges.push_back({u, v, w}); }
};

inline constexpr std::size_t kOllivierMaxNodes = 200;

// Exact Ollivier-Ricci curvature kappa = 1 - W(m_u, m_v)/d(u, v) with uniform
// mass 1/deg on each node's neighbors and W solved as an exact optimal
// transport over shortest-path costs. Works for non-adjacent pairs too
// (d = shortest-path distance).
double ollivier_ricci_pair(const SmallGraph& g, std::uint32_t u, std::uint32_t v);

// Per-edge curvatures in the graph's edge order.
std::vector<double> ollivier_ricci_exact(const SmallGraph& g);

// Exact transportation cost between two discrete distributions given the
// unit-cost matrix [supply x demand]. Masses must each sum to ~1.
double exact_transport_cost(const std::vector<double>& supply, const std::vector<double>& demand,
                            const Matrix& cost);

}  // namespace camel
