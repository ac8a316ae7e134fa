#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "camel/dataset.hpp"
#include "camel/knn.hpp"
#include "camel/matrix.hpp"

namespace camel {

// ---- Co-ranking ------------------------------------------------------------

// Q[r_hd-1, r_ld-1] = number of ordered pairs whose high/low-dimensional
// distance ranks are (r_hd, r_ld); ranks run 1..N-1, ties broken by index.
struct CoRankingMatrix {
    std::size_t n = 0;  // sample count N; matrix is (N-1) x (N-1)
    std::vector<std::uint32_t> q;

    std::uint32_t at(std::size_t r_hd, std::size_t r_ld) const {
        return q[(r_hd - 1) * (n - 1) + (r_ld - 1)];
    }
};

CoRankingMatrix coranking(const Matrix& x, const Matrix& y);

struct RankMetricScores {
    double trust, conti, lcmc, auc;
};

// Standard Lee-Verleysen definitions; trust/conti need k < N/2.
RankMetricScores trust_conti_lcmc_auc(const CoRankingMatrix& q, std::size_t k);

// ---- Classifier metrics ----------------------------------------------------

double knn_classify(const Matrix& y, const LabelVector& labels, std::size_t k, std::size_t folds,
                    std::uint64_t seed);

// Cross-validated linear one-vs-rest hinge-loss classifier accuracy.
double svm_classify(const Matrix& y, const LabelVector& labels, std::size_t folds,
                    std::uint64_t seed);

// ---- Rank / neighborhood metrics -------------------------------------------

double npp(const Matrix& x, const Matrix& y, std::size_t k);
double triplet_score(const Matrix& x, const Matrix& y, std::size_t n_triplets, std::uint64_t seed);
double spearman_corr(const Matrix& x, const Matrix& y, std::size_t n_pairs, std::uint64_t seed);
double centroid_knn(const Matrix& x, const Matrix& y, const LabelVector& labels, std::size_t k_c);
double centroid_dist(const Matrix& x, const Matrix& y, const LabelVector& labels);
double nnwr(const Matrix& x, const Matrix& y, std::size_t k);

// exp(-|mean curvature (X graph) - mean curvature (Y graph)|)
double curv_simi(const Matrix& x, const Matrix& y, const NeighborGraph& graph_hd,
                 const NeighborGraph& graph_ld);

// ---- Clustering ------------------------------------------------------------

struct OpticsResult {
    std::vector<std::size_t> ordering;
    std::vector<double> reachability;          // by original index
    std::vector<std::ptrdiff_t> predecessor;   // by original index, -1 = none
    std::vector<int> labels;                   // by original index, -1 = noise
    std::size_t n_clusters = 0;
};

OpticsResult optics_xi(const Matrix& y, std::size_t min_samples, double xi);

// Cluster count via OPTICS xi-extraction; N < min_samples counts as one
// cluster (degenerate).
std::size_t optics_cluster_count(const Matrix& y, std::size_t min_samples, double xi);

// exp(-|clusters_hd - clusters_ld|); pass hd = label class count, or 1 for
// continuous labels.
double cluster_ratio(const Matrix& y, std::size_t hd_cluster_count, std::size_t min_samples,
                     double xi);

// ---- Alignment -------------------------------------------------------------

// Normalized Procrustes disparity in [0, 1]: both matrices centered and
// scaled to unit Frobenius norm, optimal rotation/reflection and scaling
// applied, residual sum of squares returned.
double procrustes_disparity(const Matrix& a, const Matrix& b);

// ---- Suite -----------------------------------------------------------------

struct MetricParams {
    std::size_t k = 10;
    std::size_t knn_classify_k = 10;
    std::size_t folds = 5;
    std::size_t n_triplets = 0;       // 0 = 5N
    std::size_t n_pairs = 0;          // 0 = 5N
    std::size_t centroid_k = 0;       // 0 = min(3, C-1)
    std::size_t optics_min_samples = 0;  // 0 = max(5, N/200)
    double optics_xi = 0.05;
    std::size_t max_exact_rank_n = 10000;  // subsample cap for pairwise ranks
    std::uint64_t seed = 0;
    std::vector<std::string> selected;  // empty = every applicable metric
};

struct MetricReport {
    std::map<std::string, double> scores;
    std::map<std::string, std::string> params;
    std::map<std::string, double> artifacts;  // cluster counts, curvature means
};

extern const std::vector<std::string> kAllMetricNames;

MetricReport run_metric_suite(const Matrix& x, const Matrix& y, const LabelVector* labels,
                              const MetricParams& p);

std::string report_to_json(const MetricReport& r);
std::string report_to_table(const MetricReport& r);

}  // namespace camel
