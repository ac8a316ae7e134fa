#include "camel/force.hpp"

#include <cmath>

#include "camel/error.hpp"

namespace camel {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Mean of each point's neighbor coordinates over the anchor set.
Matrix list_centroids(const Matrix& anchors, const NeighborGraph& g) {
    Matrix cent(g.n_points, anchors.cols);
    for (std::size_t i = 0; i < g.n_points; ++i) {
        auto row = cent.row(i);
        for (std::size_t r = 0; r < g.k; ++r) {
            const auto j = g.neighbor(i, r);
            for (std::size_t c = 0; c < anchors.cols; ++c) row[c] += anchors.at(j, c);
        }
        for (std::size_t c = 0; c < anchors.cols; ++c) row[c] /= double(g.k);
    }
    return cent;
}

double global_mean(const std::vector<double>& v) {
    if (v.empty()) return 0.0;
    double s = 0.0;
    for (double x : v) s += x;
    return s / double(v.size());
}

}  // namespace

double pareto_kernel(double d2, double sigma, double alpha) {
    const double base = 1.0 / (1.0 + d2 / sigma);
    if (alpha == 2.0) return base * base;
    return std::pow(base, alpha);
}

double nn_weight(double dist_hd, double mean_dist_i, const ForceParams& p) {
    if (!p.weight_mod) return p.w_nn_base;
    if (mean_dist_i < kForceDistEps) return p.w_nn_base;
    return (1.0 - std::atan(dist_hd / mean_dist_i - 1.0) / kPi) * p.w_nn_base;
}

double dp_weight(double dist_hd, double mean_dist_global, std::size_t k, std::size_t m,
                 const ForceParams& p) {
    if (!p.weight_mod) return p.w_dp_base;
    const double bracket = mean_dist_global < kForceDistEps
                               ? 1.0
                               : 1.0 + std::atan(dist_hd / mean_dist_global - 1.0) / kPi;
    return bracket * (double(k) / double(m)) * p.w_dp_base;
}

double cr_weight(double c_high, double k_low, const ForceParams& p) {
    if (!p.weight_mod) return p.w_cr_base;
    const double diff = c_high - k_low;
    if (std::abs(k_low) < 1e-3) {
        const double sign = diff * k_low;  // sign of the ratio without dividing
        if (sign > 0.0) return 10.0 * p.w_cr_base;
        if (sign < 0.0) return -10.0 * p.w_cr_base;
        return 0.0;
    }
    return p.w_cr_base * diff / k_low;
}

EdgeWeights edge_weights(const NeighborGraph& g, const PairSampling& s,
                         const EdgeCurvature& c_high, const EdgeCurvature& c_low,
                         const ForceParams& p) {
    if (c_high.k != g.k || c_low.k != g.k) throw DataError("edge_weights: curvature rank mismatch");
    EdgeWeights w;
    w.w_nn = Matrix(g.n_points, g.k);
    w.w_cr = Matrix(g.n_points, g.k);
    w.w_dp = Matrix(g.n_points, s.m);
    const double dp_mean = global_mean(s.distances);
    for (std::size_t i = 0; i < g.n_points; ++i) {
        for (std::size_t r = 0; r < g.k; ++r) {
            w.w_nn.at(i, r) = nn_weight(g.distance(i, r), g.mean_neighbor_dist[i], p);
            w.w_cr.at(i, r) = cr_weight(c_high.at(i, r), c_low.at(i, r), p);
        }
        for (std::size_t j = 0; j < s.m; ++j)
            w.w_dp.at(i, j) = dp_weight(s.distances[i * s.m + j], dp_mean, g.k, s.m, p);
    }
    return w;
}

Matrix curvature_force_scalars(const Matrix& y, const NeighborGraph& g,
                               const EdgeCurvature& c_high, const ForceParams& p,
                               const BipartiteContext* ctx) {
    const Matrix& anchors = ctx ? *ctx->anchor_coords : y;
    const Matrix own_cent = list_centroids(anchors, g);
    Matrix anchor_cent_storage;
    const Matrix* anchor_cent = &own_cent;
    if (ctx) {
        anchor_cent_storage = list_centroids(anchors, *ctx->anchor_graph);
        anchor_cent = &anchor_cent_storage;
    }
    Matrix out(g.n_points, g.k);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t ii = 0; ii < std::ptrdiff_t(g.n_points); ++ii) {
        const std::size_t i = std::size_t(ii);
        for (std::size_t r = 0; r < g.k; ++r) {
            const auto j = g.neighbor(i, r);
            const double dij = euclidean_distance(y.row(i), anchors.row(j));
            if (dij < kForceDistEps) continue;
            const double k_low =
                1.0 - euclidean_distance(own_cent.row(i), anchor_cent->row(j)) / dij;
            out.at(i, r) = cr_weight(c_high.at(i, r), k_low, p) * k_low;
        }
    }
    return out;
}

GradientField gradient(const Matrix& y, const NeighborGraph& g, const PairSampling& s,
                       const EdgeCurvature& c_high, const ForceParams& p,
                       const std::vector<std::uint8_t>* frozen, const BipartiteContext* ctx,
                       bool want_decomposition, const Matrix* cr_cached) {
    if (!y.all_finite()) throw DataError("gradient: non-finite coordinates");
    if (y.rows != g.n_points) throw DataError("gradient: coordinate count mismatch");
    if (c_high.k != g.k) throw DataError("gradient: curvature rank mismatch");
    const Matrix& anchors = ctx ? *ctx->anchor_coords : y;
    if (anchors.rows != g.n_anchors) throw DataError("gradient: anchor count mismatch");

    Matrix own_cent;
    Matrix anchor_cent_storage;
    const Matrix* anchor_cent = nullptr;
    if (!cr_cached) {
        own_cent = list_centroids(anchors, g);
        anchor_cent = &own_cent;
        if (ctx) {
            anchor_cent_storage = list_centroids(anchors, *ctx->anchor_graph);
            anchor_cent = &anchor_cent_storage;
        }
    }
    const double dp_mean = global_mean(s.distances);
    const std::size_t d = y.cols;

    GradientField out;
    out.grads = Matrix(y.rows, d);
    if (want_decomposition) {
        out.has_decomposition = true;
        out.attractive = Matrix(y.rows, d);
        out.curvature = Matrix(y.rows, d);
        out.repulsive = Matrix(y.rows, d);
    }

#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t ii = 0; ii < std::ptrdiff_t(y.rows); ++ii) {
        const std::size_t i = std::size_t(ii);
        if (frozen && (*frozen)[i]) continue;
        auto gi = out.grads.row(i);
        const auto yi = y.row(i);
        for (std::size_t r = 0; r < g.k; ++r) {
            const auto j = g.neighbor(i, r);
            const auto yj = anchors.row(j);
            const double dij = euclidean_distance(yi, yj);
            if (dij < kForceDistEps) continue;
            const double att =
                nn_weight(g.distance(i, r), g.mean_neighbor_dist[i], p) *
                pareto_kernel(dij * dij, p.sigma_nn, p.alpha);
            double crv;
            if (cr_cached) {
                crv = cr_cached->at(i, r);
            } else {
                const double k_low =
                    1.0 - euclidean_distance(own_cent.row(i), anchor_cent->row(j)) / dij;
                crv = cr_weight(c_high.at(i, r), k_low, p) * k_low;
            }
            const double coef = (att + crv) / dij;
            for (std::size_t c = 0; c < d; ++c) gi[c] += coef * (yj[c] - yi[c]);
            if (want_decomposition) {
                auto ai = out.attractive.row(i);
                auto ci = out.curvature.row(i);
                for (std::size_t c = 0; c < d; ++c) {
                    ai[c] += att / dij * (yj[c] - yi[c]);
                    ci[c] += crv / dij * (yj[c] - yi[c]);
                }
            }
        }
        for (std::size_t sidx = 0; sidx < s.m; ++sidx) {
            const auto j = s.sample(i, sidx);
            const auto yj = anchors.row(j);
            const double dij = euclidean_distance(yi, yj);
            if (dij < kForceDistEps) continue;
            const double rep = dp_weight(s.distances[i * s.m + sidx], dp_mean, g.k, s.m, p) *
                               pareto_kernel(dij * dij, p.sigma_dp, p.alpha);
            const double coef = rep / dij;
            for (std::size_t c = 0; c < d; ++c) gi[c] -= coef * (yj[c] - yi[c]);
            if (want_decomposition) {
                auto ri = out.repulsive.row(i);
                for (std::size_t c = 0; c < d; ++c) ri[c] -= coef * (yj[c] - yi[c]);
            }
        }
    }
    return out;
}

}  // namespace camel
