#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "camel/matrix.hpp"

namespace camel {

// k-nearest-neighbor graph. For a self graph the sources and anchors are the
// same point set (no self loops); for a query graph (metric/inverse learning)
// neighbors index into a separate reference set.
struct NeighborGraph {
    std::size_t k = 0;
    std::size_t n_points = 0;   // source points
    std::size_t n_anchors = 0;  // target points; == n_points for self graphs
    bool self = true;
    std::vector<std::uint32_t> neighbors;  // [n_points * k], ascending distance
    std::vector<double> distances;         // matching build-space distances
    Matrix centroids;                      // per-point mean of neighbor coords
    std::vector<double> mean_neighbor_dist;

    std::uint32_t neighbor(std::size_t i, std::size_t r) const { return neighbors[i * k + r]; }
    double distance(std::size_t i, std::size_t r) const { return distances[i * k + r]; }
};

enum class KnnMode { exact, approx, automatic };

struct ApproxParams {
    std::size_t n_trees = 0;    // 0 = ceil(5 * log2(N))
    std::size_t leaf_size = 32;
    std::size_t search_k = 0;   // 0 = n_trees * leaf_size
};

// Cutover for KnnMode::automatic.
inline constexpr std::size_t kExactCutoverDefault = 5000;

NeighborGraph build_knn(const Matrix& x, std::size_t k, KnnMode mode, std::uint64_t seed,
                        const ApproxParams& params = {},
                        std::size_t exact_cutover = kExactCutoverDefault);

// kNN of query rows against a reference set (neighbors drawn from refs only).
NeighborGraph knn_of_queries(const Matrix& queries, const Matrix& refs, std::size_t k,
                             KnnMode mode, std::uint64_t seed, const ApproxParams& params = {},
                             std::size_t exact_cutover = kExactCutoverDefault);

// Replace a graph's cached geometry (distances, order, centroids, means) with
// values computed over `coords`, keeping each neighbor set fixed. Used after
// label-augmented construction drops the label columns.
void rebuild_geometry(NeighborGraph& g, const Matrix& coords);
void rebuild_geometry(NeighborGraph& g, const Matrix& own, const Matrix& anchors);

// Negative sampling: per point, m distinct anchor indices outside
// {self} U neighbors(i), uniform without replacement, plus cached
// build-space distances for the repulsive weight bracket.
struct PairSampling {
    std::size_t m = 0;
    std::uint64_t seed = 0;
    std::vector<std::uint32_t> distant;  // [n_points * m]
    std::vector<double> distances;       // matching build-space distances

    std::uint32_t sample(std::size_t i, std::size_t s) const { return distant[i * m + s]; }
};

PairSampling sample_distant(const NeighborGraph& g, const Matrix& own, const Matrix& anchors,
                            std::size_t m, std::uint64_t seed);

inline PairSampling sample_distant(const NeighborGraph& g, const Matrix& coords, std::size_t m,
                                   std::uint64_t seed) {
    return sample_distant(g, coords, coords, m, seed);
}

// Debug dump: CSV rows (i, j, rank, distance).
void dump_graph_csv(const std::string& path, const NeighborGraph& g);

}  // namespace camel
