#pragma once

#include <cstdint>
#include <vector>

#include "camel/curvature.hpp"
#include "camel/knn.hpp"
#include "camel/matrix.hpp"

namespace camel {

// Force-field coefficients. Scale/tail defaults follow the method's
// published settings: sigma 20 for neighbors, 1 for distant points,
// tail index 2; curvature weight 0.05 sits in the recommended 0.01-0.1 band.
struct ForceParams {
    double w_nn_base = 1.0;
    double w_cr_base = 0.05;
    double w_dp_base = 1.0;
    double sigma_nn = 20.0;
    double sigma_dp = 1.0;
    double alpha = 2.0;
    bool weight_mod = true;  // arctan brackets + k/m equilibrium factor + high/low curvature ratio
};

// Heavy-tailed Pareto kernel on the squared distance: (1 + d2/sigma)^-alpha.
double pareto_kernel(double d2, double sigma, double alpha);

// Scalar weight helpers (shared by edge_weights and the gradient).
double nn_weight(double dist_hd, double mean_dist_i, const ForceParams& p);
double dp_weight(double dist_hd, double mean_dist_global, std::size_t k, std::size_t m,
                 const ForceParams& p);
// Curvature weight ((C_high - k_low)/k_low) * w'_cr with the flat-geometry
// guard: for |k_low| < 1e-3 the ratio is clamped to +-10, keeping the
// resulting force bounded while still pulling k_low toward C_high.
double cr_weight(double c_high, double k_low, const ForceParams& p);

// Pairs below this distance contribute no force (no defined direction).
inline constexpr double kForceDistEps = 1e-8;

struct EdgeWeights {
    Matrix w_nn;  // [n x k]
    Matrix w_cr;  // [n x k]
    Matrix w_dp;  // [n x m]
};

EdgeWeights edge_weights(const NeighborGraph& g, const PairSampling& s,
                         const EdgeCurvature& c_high, const EdgeCurvature& c_low,
                         const ForceParams& p);

struct GradientField {
    Matrix grads;
    // optional diagnostics (--trace-forces)
    bool has_decomposition = false;
    Matrix attractive, curvature, repulsive;
};

// Frozen references for metric/inverse learning: neighbor and distant indices
// address `anchor_coords` rows, whose own neighbor lists (`anchor_graph`)
// supply the reference-side centroids.
struct BipartiteContext {
    const Matrix* anchor_coords = nullptr;
    const NeighborGraph* anchor_graph = nullptr;
};

// Per-edge curvature force scalars w_cr * kappa_low at the given Y; lets the
// optimizer stride the embedding-curvature recompute.
Matrix curvature_force_scalars(const Matrix& y, const NeighborGraph& g,
                               const EdgeCurvature& c_high, const ForceParams& p,
                               const BipartiteContext* ctx = nullptr);

// The CAMEL force field evaluated at Y. Positive sign = displacement
// direction: attraction moves a point toward its neighbor. Frozen points get
// a zero gradient but still exert forces through other points' edges.
// `cr_cached` substitutes precomputed curvature force scalars.
GradientField gradient(const Matrix& y, const NeighborGraph& g, const PairSampling& s,
                       const EdgeCurvature& c_high, const ForceParams& p,
                       const std::vector<std::uint8_t>* frozen = nullptr,
                       const BipartiteContext* ctx = nullptr, bool want_decomposition = false,
                       const Matrix* cr_cached = nullptr);

}  // namespace camel
