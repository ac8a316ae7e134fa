#pragma once

#include <cstdint>
#include <string>

#include "camel/curvature.hpp"
#include "camel/dataset.hpp"
#include "camel/knn.hpp"
#include "camel/optimizer.hpp"

namespace camel {

struct CamelConfig {
    std::size_t n_neighbors = 10;  // k
    std::size_t n_negatives = 30;  // m
    std::size_t out_dim = 2;
    KnnMode knn_mode = KnnMode::automatic;
    std::size_t exact_cutover = kExactCutoverDefault;
    ApproxParams approx;
    ForceParams force;
    OptimConfig opt;
    std::uint64_t seed = 0;
    std::size_t label_sample_pairs = 1000;  // pair count for the Eq.-24 ratio estimate
};

struct LabelMeta {
    bool present = false;
    LabelKind kind = LabelKind::categorical;
    double w_label = 0.0;
    double scale = 0.0;        // label-distance scale actually applied
    double credibility = 1.0;  // semi-supervised imputation credibility factor
};

// Fitted model: everything transform/inverse_transform need. Immutable after
// fit; safe to share across concurrent transform calls.
struct CamelModel {
    PreprocessTransform transform;
    Matrix x;  // preprocessed training features
    Matrix y;  // embedding
    NeighborGraph graph;    // lists possibly label-informed; geometry over x
    EdgeCurvature c_high;   // feature-space edge curvature
    CamelConfig config;
    LabelMeta label_meta;
};

struct SemiConfig {
    double w_label = 0.5;
    double credibility_center = 0.05;
    double credibility_sharpness = 100.0;
};

struct FitHooks {
    RunHooks run;
};

CamelModel fit_unsupervised(const Matrix& x_raw, const CamelConfig& cfg, const FitHooks& hooks = {});

// All labels must be present; kNN is built over [X | scaled encoded labels]
// and the label columns are dropped before everything else.
CamelModel fit_supervised(const Matrix& x_raw, const LabelVector& labels, double w_label,
                          const CamelConfig& cfg, const FitHooks& hooks = {});

// kNN-imputes the missing labels from the labeled subset, then runs the
// supervised path with the label weight gated by the credibility factor.
CamelModel fit_semisupervised(const Matrix& x_raw, const LabelVector& partial,
                              const SemiConfig& semi, const CamelConfig& cfg,
                              const FitHooks& hooks = {});

// Project new points into the frozen trained embedding.
Matrix transform(const CamelModel& model, const Matrix& x_new_raw,
                 InitMode init = InitMode::interpolation, const FitHooks& hooks = {});

// Map embedding-space points back to feature space (spaces switched); returns
// de-preprocessed coordinates.
Matrix inverse_transform(const CamelModel& model, const Matrix& y_new,
                         InitMode init = InitMode::interpolation, const FitHooks& hooks = {});

// Eq.-25 gate: 1/2 + arctan(sharpness * (ratio - center)) / pi.
double credibility_factor(double label_ratio, const SemiConfig& semi);

// kNN label imputation against the labeled subset (numeric: neighbor mean;
// categorical: neighbor majority, ties to the smallest class index).
LabelVector impute_labels(const Matrix& x_pre, const LabelVector& partial, std::size_t k,
                          KnnMode mode, std::uint64_t seed);

// Single-file binary bundle (versioned header, f32 matrices, key=value config).
void save_model(const std::string& path, const CamelModel& model);
CamelModel load_model(const std::string& path);

// Stable content hash of a model's state (leakage guard in tests).
std::uint64_t model_state_hash(const CamelModel& model);

}  // namespace camel
