#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <vector>

#include "camel/force.hpp"
#include "camel/knn.hpp"
#include "camel/matrix.hpp"

namespace camel {

enum class InitMode { pca, random, interpolation };

struct OptimConfig {
    std::size_t max_iter = 400;
    double lr = 1.0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-7;
    InitMode init = InitMode::pca;
    std::uint64_t seed = 0;
    std::size_t resample_every = 0;   // 0 = negatives fixed for the whole run
    std::size_t curvature_every = 1;  // embedding-curvature recompute stride
};

struct OptimState {
    Matrix y;
    Matrix adam_m;
    Matrix adam_v;
    std::size_t iter = 0;
};

OptimState make_state(Matrix y0);

// Abort threshold for the divergence guard (mean |Y| component).
inline constexpr double kDivergenceGuard = 1e6;

// PCA scores (top-d components, unscaled). Covariance eigendecomposition for
// D <= 512, randomized range-finder sketch above.
Matrix pca_scores(const Matrix& x, std::size_t d, std::uint64_t seed);

// pca: component scores rescaled to std 0.01 per column; random: isotropic
// Gaussian, std 0.01.
Matrix init_embedding(const Matrix& x, std::size_t d, InitMode mode, std::uint64_t seed);

// Each query starts at the arithmetic mean of its reference neighbors.
Matrix init_interpolation(const NeighborGraph& queries_to_refs, const Matrix& ref_coords);

// Everything the force field needs across iterations. `sampling` is owned so
// the run can redraw negatives; the redraw distances use the input-space
// coordinates (`input_own` / `input_anchor`).
struct FieldInputs {
    const NeighborGraph* graph = nullptr;
    PairSampling sampling;
    const EdgeCurvature* c_high = nullptr;
    ForceParams force;
    const std::vector<std::uint8_t>* frozen = nullptr;
    const Matrix* anchor_coords = nullptr;       // frozen opt-space anchors (bipartite)
    const NeighborGraph* anchor_graph = nullptr;
    const Matrix* input_own = nullptr;
    const Matrix* input_anchor = nullptr;
};

struct RunHooks {
    std::function<void(std::size_t iter, double mean_grad)> progress;
    std::ostream* trace_forces = nullptr;  // per-iteration decomposition CSV
};

// ADAM over the force field: Y <- Y + lr * m_hat / (sqrt(v_hat) + eps).
// Throws DivergenceError when the iterate escapes the guard radius.
void run(OptimState& state, FieldInputs& inputs, const OptimConfig& cfg,
         const RunHooks& hooks = {});

}  // namespace camel
