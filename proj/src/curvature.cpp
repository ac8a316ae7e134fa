#include "camel/curvature.hpp"

#include <cmath>

#include "camel/error.hpp"

namespace camel {

namespace {

// Mean of each point's neighbor coordinates (the point itself excluded).
Matrix neighbor_centroids(const Matrix& anchor_coords, const NeighborGraph& g) {
    Matrix cent(g.n_points, anchor_coords.cols);
    for (std::size_t i = 0; i < g.n_points; ++i) {
        auto row = cent.row(i);
        for (std::size_t r = 0; r < g.k; ++r) {
            const auto j = g.neighbor(i, r);
            for (std::size_t c = 0; c < anchor_coords.cols; ++c) row[c] += anchor_coords.at(j, c);
        }
        for (std::size_t c = 0; c < anchor_coords.cols; ++c) row[c] /= double(g.k);
    }
    return cent;
}

EdgeCurvature curvature_from_centroids(const Matrix& own_coords, const Matrix& anchor_coords,
                                       const NeighborGraph& g, const Matrix& own_cent,
                                       const Matrix& anchor_cent) {
    EdgeCurvature out;
    out.k = g.k;
    out.kappa = Matrix(g.n_points, g.k);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t ii = 0; ii < std::ptrdiff_t(g.n_points); ++ii) {
        const std::size_t i = std::size_t(ii);
        for (std::size_t r = 0; r < g.k; ++r) {
            const auto j = g.neighbor(i, r);
            const double dij = euclidean_distance(own_coords.row(i), anchor_coords.row(j));
            if (dij < kCurvatureDistEps) {
                out.kappa.at(i, r) = 0.0;
                continue;
            }
            const double dc = euclidean_distance(own_cent.row(i), anchor_cent.row(j));
            out.kappa.at(i, r) = 1.0 - dc / dij;
        }
    }
    return out;
}

}  // namespace

EdgeCurvature camel_curvature(const Matrix& coords, const NeighborGraph& g) {
    if (!g.self) throw DataError("camel_curvature: query graphs need the anchor overload");
    if (coords.rows != g.n_points) throw DataError("camel_curvature: coordinate count mismatch");
    const Matrix cent = neighbor_centroids(coords, g);
    return curvature_from_centroids(coords, coords, g, cent, cent);
}

EdgeCurvature camel_curvature(const Matrix& own_coords, const Matrix& anchor_coords,
                              const NeighborGraph& g, const NeighborGraph& anchor_graph) {
    if (own_coords.rows != g.n_points || anchor_coords.rows != g.n_anchors)
        throw DataError("camel_curvature: coordinate count mismatch");
    if (anchor_graph.n_points != g.n_anchors)
        throw DataError("camel_curvature: anchor graph does not cover the reference set");
    const Matrix own_cent = neighbor_centroids(anchor_coords, g);
    const Matrix anchor_cent = neighbor_centroids(anchor_coords, anchor_graph);
    return curvature_from_centroids(own_coords, anchor_coords, g, own_cent, anchor_cent);
}

double mean_curvature(const EdgeCurvature& c) {
    double s = 0.0;
    for (double v : c.kappa.data) s += v;
    return c.kappa.data.empty() ? 0.0 : s / double(c.kappa.data.size());
}

}  // namespace camel
