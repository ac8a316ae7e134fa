#include "camel/metrics.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "camel/curvature.hpp"
#include "camel/error.hpp"
#include "camel/rng.hpp"

namespace camel {

namespace {

// ranks 1..N-1 of all j != i by distance from i, ties by lower index
void rank_row(const Matrix& m, std::size_t i, std::vector<std::uint32_t>& rank,
              std::vector<std::pair<double, std::uint32_t>>& scratch) {
    const std::size_t n = m.rows;
    scratch.clear();
    for (std::size_t j = 0; j < n; ++j) {
        if (j == i) continue;
        scratch.emplace_back(squared_distance(m.row(i), m.row(j)), std::uint32_t(j));
    }
    std::sort(scratch.begin(), scratch.end());
    rank.assign(n, 0);
    for (std::size_t r = 0; r < scratch.size(); ++r) rank[scratch[r].second] = std::uint32_t(r + 1);
}

// exact k nearest neighbor index set of each row (brute force)
std::vector<std::vector<std::uint32_t>> exact_knn_sets(const Matrix& m, std::size_t k) {
    std::vector<std::vector<std::uint32_t>> sets(m.rows);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t ii = 0; ii < std::ptrdiff_t(m.rows); ++ii) {
        const std::size_t i = std::size_t(ii);
        std::vector<std::pair<double, std::uint32_t>> cands;
        cands.reserve(m.rows - 1);
        for (std::size_t j = 0; j < m.rows; ++j)
            if (j != i) cands.emplace_back(squared_distance(m.row(i), m.row(j)), std::uint32_t(j));
        std::nth_element(cands.begin(), cands.begin() + std::ptrdiff_t(k) - 1, cands.end());
        cands.resize(k);
        std::sort(cands.begin(), cands.end());
        sets[i].reserve(k);
        for (const auto& [d, j] : cands) sets[i].push_back(j);
    }
    return sets;
}

std::vector<double> average_ranks(const std::vector<double>& v) {
    const std::size_t n = v.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> ranks(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
        const double avg = (double(i) + double(j)) / 2.0 + 1.0;
        for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = avg;
        i = j + 1;
    }
    return ranks;
}

double spearman_of(const std::vector<double>& a, const std::vector<double>& b) {
    const auto ra = average_ranks(a);
    const auto rb = average_ranks(b);
    const double n = double(a.size());
    double ma = 0, mb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ma += ra[i];
        mb += rb[i];
    }
    ma /= n;
    mb /= n;
    double cov = 0, va = 0, vb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        cov += (ra[i] - ma) * (rb[i] - mb);
        va += (ra[i] - ma) * (ra[i] - ma);
        vb += (rb[i] - mb) * (rb[i] - mb);
    }
    if (va < 1e-30 || vb < 1e-30) return 0.0;
    return cov / std::sqrt(va * vb);
}

std::vector<std::vector<std::uint32_t>> class_members(const LabelVector& labels) {
    std::vector<std::vector<std::uint32_t>> members(labels.n_classes());
    for (std::size_t i = 0; i < labels.size(); ++i)
        members[std::size_t(labels.raw[i])].push_back(std::uint32_t(i));
    return members;
}

Matrix class_centroids(const Matrix& m, const std::vector<std::vector<std::uint32_t>>& members) {
    Matrix cent(members.size(), m.cols);
    for (std::size_t c = 0; c < members.size(); ++c) {
        for (auto i : members[c])
            for (std::size_t f = 0; f < m.cols; ++f) cent.at(c, f) += m.at(i, f);
        if (!members[c].empty())
            for (std::size_t f = 0; f < m.cols; ++f) cent.at(c, f) /= double(members[c].size());
    }
    return cent;
}

}  // namespace

CoRankingMatrix coranking(const Matrix& x, const Matrix& y) {
    if (x.rows != y.rows) throw DataError("coranking: sample count mismatch");
    const std::size_t n = x.rows;
    if (n < 3) throw DataError("coranking needs N >= 3");
    CoRankingMatrix q;
    q.n = n;
    q.q.assign((n - 1) * (n - 1), 0);
    std::vector<std::uint32_t> rank_hd, rank_ld;
    std::vector<std::pair<double, std::uint32_t>> scratch;
    for (std::size_t i = 0; i < n; ++i) {
        rank_row(x, i, rank_hd, scratch);
        rank_row(y, i, rank_ld, scratch);
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            ++q.q[(rank_hd[j] - 1) * (n - 1) + (rank_ld[j] - 1)];
        }
    }
    return q;
}

RankMetricScores trust_conti_lcmc_auc(const CoRankingMatrix& q, std::size_t k) {
    const std::size_t n = q.n;
    if (k < 1 || k >= n) throw DataError("rank metrics need 1 <= k < N");
    RankMetricScores out{};

    // trust: intrusions (r_ld <= k < r_hd), conti: extrusions (r_hd <= k < r_ld)
    double intrusion = 0.0, extrusion = 0.0;
    for (std::size_t r_hd = 1; r_hd <= n - 1; ++r_hd)
        for (std::size_t r_ld = 1; r_ld <= n - 1; ++r_ld) {
            const double c = q.at(r_hd, r_ld);
            if (c == 0) continue;
            if (r_ld <= k && r_hd > k) intrusion += c * double(r_hd - k);
            if (r_hd <= k && r_ld > k) extrusion += c * double(r_ld - k);
        }
    const double norm = double(n) * double(k) * (2.0 * double(n) - 3.0 * double(k) - 1.0);
    if (norm <= 0.0) throw DataError("trust/conti need k < N/2");
    out.trust = 1.0 - 2.0 / norm * intrusion;
    out.conti = 1.0 - 2.0 / norm * extrusion;

    // LCMC at k plus AUC of the QNN curve over every neighborhood size
    double auc = 0.0;
    double f = 0.0;  // running count of pairs with max(r_hd, r_ld) <= kk
    for (std::size_t kk = 1; kk <= n - 1; ++kk) {
        for (std::size_t r = 1; r <= kk; ++r) {
            f += q.at(kk, r);
            if (r < kk) f += q.at(r, kk);
        }
        const double qnn = f / (double(n) * double(kk));
        if (kk == k) out.lcmc = qnn - double(k) / double(n - 1);
        auc += qnn;
    }
    out.auc = auc / double(n - 1);
    return out;
}

double knn_classify(const Matrix& y, const LabelVector& labels, std::size_t k, std::size_t folds,
                    std::uint64_t seed) {
    if (labels.kind != LabelKind::categorical)
        throw DataError("knn_classify needs categorical labels");
    const std::size_t n = y.rows;
    if (labels.size() != n) throw DataError("knn_classify: label count mismatch");
    folds = std::min(std::max<std::size_t>(folds, 2), n);

    std::vector<std::uint32_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    Rng rng(derive_seed(seed, "knn-folds"));
    for (std::size_t i = n; i > 1; --i) std::swap(perm[i - 1], perm[rng.below(i)]);

    std::size_t correct = 0;
    for (std::size_t fold = 0; fold < folds; ++fold) {
        std::vector<std::uint32_t> train, test;
        for (std::size_t i = 0; i < n; ++i)
            (i % folds == fold ? test : train).push_back(perm[i]);
        if (train.empty() || test.empty()) continue;
        const std::size_t k_eff = std::min(k, train.size());
        for (auto ti : test) {
            std::vector<std::pair<double, std::uint32_t>> cands;
            cands.reserve(train.size());
            for (auto tr : train)
                cands.emplace_back(squared_distance(y.row(ti), y.row(tr)), tr);
            std::nth_element(cands.begin(), cands.begin() + std::ptrdiff_t(k_eff) - 1, cands.end());
            cands.resize(k_eff);
            std::map<int, std::size_t> votes;
            for (const auto& [d, j] : cands) ++votes[int(labels.raw[j])];
            int best = -1;
            std::size_t best_count = 0;
            for (const auto& [cls, count] : votes)
                if (count > best_count) {
                    best = cls;
                    best_count = count;
                }
            if (best == int(labels.raw[ti])) ++correct;
        }
    }
    return double(correct) / double(n);
}

double npp(const Matrix& x, const Matrix& y, std::size_t k) {
    if (x.rows != y.rows) throw DataError("npp: sample count mismatch");
    if (k < 1 || k >= x.rows) throw DataError("npp needs 1 <= k < N");
    const auto hd = exact_knn_sets(x, k);
    const auto ld = exact_knn_sets(y, k);
    double total = 0.0;
    for (std::size_t i = 0; i < x.rows; ++i) {
        std::vector<std::uint32_t> a = hd[i], b = ld[i], common;
        std::sort(a.begin(), a.end());
        std::sort(b.begin(), b.end());
        std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(common));
        total += double(common.size()) / double(k);
    }
    return total / double(x.rows);
}

double nnwr(const Matrix& x, const Matrix& y, std::size_t k) {
    if (x.rows != y.rows) throw DataError("nnwr: sample count mismatch");
    if (k < 1 || k >= x.rows) throw DataError("nnwr needs 1 <= k < N");
    const auto hd = exact_knn_sets(x, k);
    const auto ld = exact_knn_sets(y, k);
    std::size_t wrong = 0;
    for (std::size_t i = 0; i < x.rows; ++i) {
        std::vector<std::uint32_t> a = hd[i], b = ld[i], common;
        std::sort(a.begin(), a.end());
        std::sort(b.begin(), b.end());
        std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(common));
        const double p_wrong = 1.0 - double(common.size()) / double(k);
        if (p_wrong > 0.5) ++wrong;  // strictly more than half the list disagrees
    }
    return 1.0 - double(wrong) / double(x.rows);
}

double triplet_score(const Matrix& x, const Matrix& y, std::size_t n_triplets, std::uint64_t seed) {
    if (x.rows != y.rows) throw DataError("triplet: sample count mismatch");
    const std::size_t n = x.rows;
    if (n < 3) throw DataError("triplet needs N >= 3");
    Rng rng(derive_seed(seed, "triplets"));
    std::size_t agree = 0;
    for (std::size_t t = 0; t < n_triplets; ++t) {
        std::size_t i, j, l;
        do {
            i = rng.below(n);
            j = rng.below(n);
            l = rng.below(n);
        } while (i == j || i == l || j == l);
        const bool hd = squared_distance(x.row(i), x.row(j)) < squared_distance(x.row(i), x.row(l));
        const bool ld = squared_distance(y.row(i), y.row(j)) < squared_distance(y.row(i), y.row(l));
        agree += (hd == ld);
    }
    return double(agree) / double(n_triplets);
}

double spearman_corr(const Matrix& x, const Matrix& y, std::size_t n_pairs, std::uint64_t seed) {
    if (x.rows != y.rows) throw DataError("spearman: sample count mismatch");
    const std::size_t n = x.rows;
    if (n < 2) throw DataError("spearman needs N >= 2");
    Rng rng(derive_seed(seed, "pairs"));
    std::vector<double> dx, dy;
    dx.reserve(n_pairs);
    dy.reserve(n_pairs);
    for (std::size_t t = 0; t < n_pairs; ++t) {
        std::size_t i, j;
        do {
            i = rng.below(n);
            j = rng.below(n);
        } while (i == j);
        dx.push_back(euclidean_distance(x.row(i), x.row(j)));
        dy.push_back(euclidean_distance(y.row(i), y.row(j)));
    }
    return spearman_of(dx, dy);
}

double centroid_knn(const Matrix& x, const Matrix& y, const LabelVector& labels, std::size_t k_c) {
    if (labels.kind != LabelKind::categorical)
        throw DataError("centroid_knn needs categorical labels");
    const auto members = class_members(labels);
    const std::size_t c = members.size();
    if (c < 2) throw DataError("centroid_knn needs >= 2 classes");
    k_c = std::min(std::max<std::size_t>(k_c, 1), c - 1);
    const Matrix cx = class_centroids(x, members);
    const Matrix cy = class_centroids(y, members);
    const auto hd = exact_knn_sets(cx, k_c);
    const auto ld = exact_knn_sets(cy, k_c);
    double total = 0.0;
    for (std::size_t i = 0; i < c; ++i) {
        std::vector<std::uint32_t> a = hd[i], b = ld[i], common;
        std::sort(a.begin(), a.end());
        std::sort(b.begin(), b.end());
        std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(common));
        total += double(common.size()) / double(k_c);
    }
    return total / double(c);
}

double centroid_dist(const Matrix& x, const Matrix& y, const LabelVector& labels) {
    if (labels.kind != LabelKind::categorical)
        throw DataError("centroid_dist needs categorical labels");
    const auto members = class_members(labels);
    const std::size_t c = members.size();
    if (c < 3) throw DataError("centroid_dist needs >= 3 classes for a meaningful rank correlation");
    const Matrix cx = class_centroids(x, members);
    const Matrix cy = class_centroids(y, members);
    std::vector<double> dx, dy;
    for (std::size_t i = 0; i < c; ++i)
        for (std::size_t j = i + 1; j < c; ++j) {
            dx.push_back(euclidean_distance(cx.row(i), cx.row(j)));
            dy.push_back(euclidean_distance(cy.row(i), cy.row(j)));
        }
    return spearman_of(dx, dy);
}

double curv_simi(const Matrix& x, const Matrix& y, const NeighborGraph& graph_hd,
                 const NeighborGraph& graph_ld) {
    const double c_hd = mean_curvature(camel_curvature(x, graph_hd));
    const double c_ld = mean_curvature(camel_curvature(y, graph_ld));
    return std::exp(-std::abs(c_hd - c_ld));
}

double cluster_ratio(const Matrix& y, std::size_t hd_cluster_count, std::size_t min_samples,
                     double xi) {
    const std::size_t ld = optics_cluster_count(y, min_samples, xi);
    const double diff = std::abs(double(hd_cluster_count) - double(ld));
    return std::exp(-diff);
}

double procrustes_disparity(const Matrix& a, const Matrix& b) {
    if (a.rows != b.rows || a.cols != b.cols)
        throw DataError("procrustes: shape mismatch");
    if (a.rows < 2) throw DataError("procrustes needs N >= 2");
    auto standardize = [](const Matrix& m) {
        Eigen::MatrixXd e(m.rows, m.cols);
        for (std::size_t r = 0; r < m.rows; ++r)
            for (std::size_t c = 0; c < m.cols; ++c) e(Eigen::Index(r), Eigen::Index(c)) = m.at(r, c);
        e.rowwise() -= e.colwise().mean();
        const double norm = e.norm();
        if (norm < 1e-300) throw DataError("procrustes: degenerate (all points coincide)");
        return Eigen::MatrixXd(e / norm);
    };
    const Eigen::MatrixXd ea = standardize(a);
    const Eigen::MatrixXd eb = standardize(b);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(ea.transpose() * eb);
    const double s = svd.singularValues().sum();
    return std::max(0.0, 1.0 - s * s);
}

// ---- Suite ------------------------------------------------------------------

const std::vector<std::string> kAllMetricNames = {
    "trust",    "conti",     "lcmc",    "auc",     "svm-classify", "knn-classify", "npp",
    "triplet",  "spear-corr", "cen-knn", "cen-dist", "curv-simi",   "nnwr",         "cluster-ratio"};

MetricReport run_metric_suite(const Matrix& x, const Matrix& y, const LabelVector* labels,
                              const MetricParams& p) {
    if (x.rows != y.rows) throw DataError("metric suite: sample count mismatch");
    MetricReport rep;

    // subsample beyond the exact-rank budget
    Matrix xs = x, ys = y;
    LabelVector ls;
    const LabelVector* lp = labels;
    if (x.rows > p.max_exact_rank_n) {
        Rng rng(derive_seed(p.seed, "metric-subsample"));
        std::vector<std::uint32_t> idx(x.rows);
        std::iota(idx.begin(), idx.end(), 0);
        for (std::size_t i = x.rows; i > 1; --i) std::swap(idx[i - 1], idx[rng.below(i)]);
        idx.resize(p.max_exact_rank_n);
        std::sort(idx.begin(), idx.end());
        xs = Matrix(idx.size(), x.cols);
        ys = Matrix(idx.size(), y.cols);
        for (std::size_t i = 0; i < idx.size(); ++i) {
            std::copy_n(x.row(idx[i]).data(), x.cols, xs.row(i).data());
            std::copy_n(y.row(idx[i]).data(), y.cols, ys.row(i).data());
        }
        if (labels) {
            ls = *labels;
            ls.raw.clear();
            for (auto i : idx) ls.raw.push_back(labels->raw[i]);
            lp = &ls;
        }
        rep.params["subsampled_to"] = std::to_string(idx.size());
    }
    const std::size_t n = xs.rows;
    const std::size_t k = std::min(p.k, n - 1);
    const std::size_t n_triplets = p.n_triplets ? p.n_triplets : 5 * n;
    const std::size_t n_pairs = p.n_pairs ? p.n_pairs : 5 * n;
    const std::size_t min_samples =
        p.optics_min_samples ? p.optics_min_samples : std::max<std::size_t>(5, n / 200);

    auto wanted = [&](const std::string& name) {
        if (p.selected.empty()) return true;
        return std::find(p.selected.begin(), p.selected.end(), name) != p.selected.end();
    };
    const bool has_cat = lp && lp->kind == LabelKind::categorical;

    std::optional<CoRankingMatrix> q;
    if (wanted("trust") || wanted("conti") || wanted("lcmc") || wanted("auc"))
        q = coranking(xs, ys);
    if (q) {
        const auto scores = trust_conti_lcmc_auc(*q, k);
        if (wanted("trust")) rep.scores["trust"] = scores.trust;
        if (wanted("conti")) rep.scores["conti"] = scores.conti;
        if (wanted("lcmc")) rep.scores["lcmc"] = scores.lcmc;
        if (wanted("auc")) rep.scores["auc"] = scores.auc;
    }
    if (wanted("knn-classify") && has_cat)
        rep.scores["knn-classify"] = knn_classify(ys, *lp, p.knn_classify_k, p.folds, p.seed);
    if (wanted("svm-classify") && has_cat)
        rep.scores["svm-classify"] = svm_classify(ys, *lp, p.folds, p.seed);
    if (wanted("npp")) rep.scores["npp"] = npp(xs, ys, k);
    if (wanted("triplet")) rep.scores["triplet"] = triplet_score(xs, ys, n_triplets, p.seed);
    if (wanted("spear-corr")) rep.scores["spear-corr"] = spearman_corr(xs, ys, n_pairs, p.seed);
    if (wanted("cen-knn") && has_cat && lp->n_classes() >= 2) {
        const std::size_t k_c = p.centroid_k ? p.centroid_k
                                             : std::min<std::size_t>(3, lp->n_classes() - 1);
        rep.scores["cen-knn"] = centroid_knn(xs, ys, *lp, k_c);
        rep.params["centroid_k"] = std::to_string(k_c);
    }
    if (wanted("cen-dist") && has_cat && lp->n_classes() >= 3)
        rep.scores["cen-dist"] = centroid_dist(xs, ys, *lp);
    if (wanted("curv-simi")) {
        const std::uint64_t seed = derive_seed(p.seed, "curv-simi-knn");
        const NeighborGraph ghd = build_knn(xs, k, KnnMode::automatic, seed);
        const NeighborGraph gld = build_knn(ys, k, KnnMode::automatic, seed);
        const double c_hd = mean_curvature(camel_curvature(xs, ghd));
        const double c_ld = mean_curvature(camel_curvature(ys, gld));
        rep.scores["curv-simi"] = std::exp(-std::abs(c_hd - c_ld));
        rep.artifacts["mean_curvature_hd"] = c_hd;
        rep.artifacts["mean_curvature_ld"] = c_ld;
    }
    if (wanted("nnwr")) rep.scores["nnwr"] = nnwr(xs, ys, k);
    if (wanted("cluster-ratio") && lp) {
        const std::size_t hd = lp->kind == LabelKind::categorical ? lp->n_classes() : 1;
        const std::size_t ld = optics_cluster_count(ys, min_samples, p.optics_xi);
        rep.scores["cluster-ratio"] = std::exp(-std::abs(double(hd) - double(ld)));
        rep.artifacts["clusters_hd"] = double(hd);
        rep.artifacts["clusters_ld"] = double(ld);
        rep.params["optics_min_samples"] = std::to_string(min_samples);
    }

    rep.params["k"] = std::to_string(k);
    rep.params["n"] = std::to_string(n);
    rep.params["n_triplets"] = std::to_string(n_triplets);
    rep.params["n_pairs"] = std::to_string(n_pairs);
    rep.params["seed"] = std::to_string(p.seed);
    return rep;
}

std::string report_to_json(const MetricReport& r) {
    nlohmann::ordered_json j;
    j["scores"] = r.scores;
    j["params"] = r.params;
    j["artifacts"] = r.artifacts;
    return j.dump(2);
}

std::string report_to_table(const MetricReport& r) {
    std::size_t width = 6;
    for (const auto& [name, v] : r.scores) width = std::max(width, name.size());
    std::ostringstream os;
    os << std::left;
    for (const auto& [name, v] : r.scores) {
        os.width(std::streamsize(width + 2));
        os << name;
        char buf[32];
        std::snprintf(buf, sizeof buf, "%10.6f", v);
        os << buf << "\n";
    }
    return os.str();
}

}  // namespace camel
