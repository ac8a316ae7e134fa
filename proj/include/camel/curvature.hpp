#pragma once

#include "camel/knn.hpp"
#include "camel/matrix.hpp"

namespace camel {

// Per-edge centroid curvature kappa_ij = 1 - ||c_i - c_j|| / d_ij, laid out as
// an [n_points x k] matrix aligned with the graph's neighbor ranks.
struct EdgeCurvature {
    std::size_t k = 0;
    Matrix kappa;

    double at(std::size_t i, std::size_t r) const { return kappa.at(i, r); }
};

// Pair distance below which curvature is defined as 0 (no usable direction).
inline constexpr double kCurvatureDistEps = 1e-8;

// Centroid curvature of a self graph evaluated over `coords`. The neighbor
// lists come from the graph; distances and centroids are recomputed from
// `coords`, so the same graph can be reused at embedding dimension during
// optimization.
EdgeCurvature camel_curvature(const Matrix& coords, const NeighborGraph& g);

// Query-graph variant: each edge connects a query point to a reference point.
// The reference side's centroid uses `anchor_graph` (the reference set's own
// neighbor lists) over `anchor_coords`.
EdgeCurvature camel_curvature(const Matrix& own_coords, const Matrix& anchor_coords,
                              const NeighborGraph& g, const NeighborGraph& anchor_graph);

// Unweighted mean over all n*k directed edges.
double mean_curvature(const EdgeCurvature& c);

}  // namespace camel
