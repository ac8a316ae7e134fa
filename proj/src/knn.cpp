#include "camel/knn.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <memory>
#include <queue>
#include <unordered_set>

#include "camel/error.hpp"
#include "camel/rng.hpp"

namespace camel {

namespace {

struct Candidate {
    double d2;
    std::uint32_t idx;
    bool operator<(const Candidate& o) const {
        return d2 < o.d2 || (d2 == o.d2 && idx < o.idx);  // ties by lower index
    }
};

void select_top_k(std::vector<Candidate>& cands, std::size_t k) {
    if (cands.size() > k) {
        std::nth_element(cands.begin(), cands.begin() + std::ptrdiff_t(k) - 1, cands.end());
        cands.resize(k);
    }
    std::sort(cands.begin(), cands.end());
}

// ---- Random-projection tree forest (ANNOY-style) --------------------------

class RpForest {
public:
    RpForest(const Matrix& x, std::size_t n_trees, std::size_t leaf_size, std::uint64_t seed)
        : x_(x), leaf_size_(std::max<std::size_t>(leaf_size, 2)) {
        roots_.resize(n_trees);
        for (std::size_t t = 0; t < n_trees; ++t) {
            Rng rng(derive_seed(seed, "rp-tree", t));
            std::vector<std::uint32_t> idx(x.rows);
            for (std::size_t i = 0; i < x.rows; ++i) idx[i] = std::uint32_t(i);
            roots_[t] = build(idx, rng, 0);
        }
    }

    // Best-first search over all trees until ~search_k candidates collected.
    void query(std::span<const double> q, std::size_t search_k,
               std::vector<std::uint32_t>& out) const {
        out.clear();
        using Entry = std::pair<double, std::int32_t>;  // (path margin, node)
        std::priority_queue<Entry> pq;
        for (auto r : roots_) pq.emplace(std::numeric_limits<double>::infinity(), r);
        std::vector<char> seen(x_.rows, 0);
        while (!pq.empty() && out.size() < search_k) {
            auto [margin, node_id] = pq.top();
            pq.pop();
            std::int32_t nd = node_id;
            while (nodes_[std::size_t(nd)].left >= 0) {
                const Node& n = nodes_[std::size_t(nd)];
                double side = -n.offset;
                for (std::size_t c = 0; c < x_.cols; ++c) side += n.normal[c] * q[c];
                const std::int32_t near = side <= 0 ? n.left : n.right;
                const std::int32_t far = side <= 0 ? n.right : n.left;
                pq.emplace(std::min(margin, std::abs(side)), far);
                nd = near;
            }
            for (auto p : nodes_[std::size_t(nd)].points) {
                if (!seen[p]) {
                    seen[p] = 1;
                    out.push_back(p);
                }
            }
        }
    }

private:
    struct Node {
        std::int32_t left = -1, right = -1;
        std::vector<double> normal;
        double offset = 0.0;
        std::vector<std::uint32_t> points;  // leaves only
    };

    std::int32_t build(std::vector<std::uint32_t>& idx, Rng& rng, int depth) {
        if (idx.size() <= leaf_size_ || depth > 48) {
            Node leaf;
            leaf.points = idx;
            nodes_.push_back(std::move(leaf));
            return std::int32_t(nodes_.size() - 1);
        }
        Node n;
        n.normal.assign(x_.cols, 0.0);
        bool ok = false;
        for (int attempt = 0; attempt < 8 && !ok; ++attempt) {
            const auto a = idx[rng.below(idx.size())];
            const auto b = idx[rng.below(idx.size())];
            if (a == b) continue;
            double norm2 = 0.0;
            for (std::size_t c = 0; c < x_.cols; ++c) {
                n.normal[c] = x_.at(a, c) - x_.at(b, c);
                norm2 += n.normal[c] * n.normal[c];
            }
            ok = norm2 > 0.0;
        }
        std::vector<std::uint32_t> left, right;
        if (ok) {
            // split at the mean projection; balances better than the midpoint
            // of the two defining points on skewed data
            double mean_proj = 0.0;
            for (auto p : idx) {
                double d = 0.0;
                for (std::size_t c = 0; c < x_.cols; ++c) d += n.normal[c] * x_.at(p, c);
                mean_proj += d;
            }
            n.offset = mean_proj / double(idx.size());
            for (auto p : idx) {
                double d = -n.offset;
                for (std::size_t c = 0; c < x_.cols; ++c) d += n.normal[c] * x_.at(p, c);
                (d <= 0 ? left : right).push_back(p);
            }
        }
        if (!ok || left.empty() || right.empty()) {
            // degenerate data: split deterministically in half
            left.clear();
            right.clear();
            for (std::size_t i = 0; i < idx.size(); ++i)
                (i < idx.size() / 2 ? left : right).push_back(idx[i]);
        }
        idx.clear();
        idx.shrink_to_fit();
        const std::int32_t l = build(left, rng, depth + 1);
        const std::int32_t r = build(right, rng, depth + 1);
        n.left = l;
        n.right = r;
        nodes_.push_back(std::move(n));
        return std::int32_t(nodes_.size() - 1);
    }

    const Matrix& x_;
    std::size_t leaf_size_;
    std::vector<Node> nodes_;
    std::vector<std::int32_t> roots_;
};

void finalize_graph(NeighborGraph& g, const Matrix& own, const Matrix& anchors) {
    g.centroids = Matrix(g.n_points, anchors.cols);
    g.mean_neighbor_dist.assign(g.n_points, 0.0);
    for (std::size_t i = 0; i < g.n_points; ++i) {
        auto cent = g.centroids.row(i);
        double mean_d = 0.0;
        for (std::size_t r = 0; r < g.k; ++r) {
            const auto j = g.neighbor(i, r);
            for (std::size_t c = 0; c < anchors.cols; ++c) cent[c] += anchors.at(j, c);
            mean_d += g.distance(i, r);
        }
        for (std::size_t c = 0; c < anchors.cols; ++c) cent[c] /= double(g.k);
        g.mean_neighbor_dist[i] = mean_d / double(g.k);
    }
    (void)own;
}

}  // namespace

NeighborGraph build_knn(const Matrix& x, std::size_t k, KnnMode mode, std::uint64_t seed,
                        const ApproxParams& params, std::size_t exact_cutover) {
    const std::size_t n = x.rows;
    if (k < 1 || k >= n) throw DataError("build_knn requires 1 <= k < N");
    if (!x.all_finite()) throw DataError("build_knn: non-finite coordinates");
    if (mode == KnnMode::automatic) mode = n <= exact_cutover ? KnnMode::exact : KnnMode::approx;

    NeighborGraph g;
    g.k = k;
    g.n_points = n;
    g.n_anchors = n;
    g.self = true;
    g.neighbors.resize(n * k);
    g.distances.resize(n * k);

    if (mode == KnnMode::exact) {
#pragma omp parallel for schedule(static)
        for (std::ptrdiff_t ii = 0; ii < std::ptrdiff_t(n); ++ii) {
            const std::size_t i = std::size_t(ii);
            std::vector<Candidate> cands;
            cands.reserve(n - 1);
            for (std::size_t j = 0; j < n; ++j) {
                if (j == i) continue;
                cands.push_back({squared_distance(x.row(i), x.row(j)), std::uint32_t(j)});
            }
            select_top_k(cands, k);
            for (std::size_t r = 0; r < k; ++r) {
                g.neighbors[i * k + r] = cands[r].idx;
                g.distances[i * k + r] = std::sqrt(cands[r].d2);
            }
        }
    } else {
        ApproxParams p = params;
        if (p.n_trees == 0)
            p.n_trees = std::size_t(std::ceil(5.0 * std::log2(double(std::max<std::size_t>(n, 2)))));
        if (p.search_k == 0) p.search_k = p.n_trees * p.leaf_size;
        RpForest forest(x, p.n_trees, p.leaf_size, seed);
#pragma omp parallel for schedule(dynamic, 16)
        for (std::ptrdiff_t ii = 0; ii < std::ptrdiff_t(n); ++ii) {
            const std::size_t i = std::size_t(ii);
            std::vector<std::uint32_t> raw;
            forest.query(x.row(i), p.search_k + 1, raw);
            std::vector<Candidate> cands;
            cands.reserve(raw.size());
            for (auto j : raw) {
                if (j == i) continue;
                cands.push_back({squared_distance(x.row(i), x.row(j)), j});
            }
            if (cands.size() < k) {
                // starved leaf search: fall back to scanning everything
                cands.clear();
                for (std::size_t j = 0; j < n; ++j)
                    if (j != i) cands.push_back({squared_distance(x.row(i), x.row(j)), std::uint32_t(j)});
            }
            select_top_k(cands, k);
            for (std::size_t r = 0; r < k; ++r) {
                g.neighbors[i * k + r] = cands[r].idx;
                g.distances[i * k + r] = std::sqrt(cands[r].d2);
            }
        }
    }
    finalize_graph(g, x, x);
    return g;
}

NeighborGraph knn_of_queries(const Matrix& queries, const Matrix& refs, std::size_t k,
                             KnnMode mode, std::uint64_t seed, const ApproxParams& params,
                             std::size_t exact_cutover) {
    if (queries.cols != refs.cols) throw DataError("query/reference dimension mismatch");
    if (k < 1 || k > refs.rows) throw DataError("knn_of_queries requires 1 <= k <= n_refs");
    if (mode == KnnMode::automatic)
        mode = refs.rows <= exact_cutover ? KnnMode::exact : KnnMode::approx;

    NeighborGraph g;
    g.k = k;
    g.n_points = queries.rows;
    g.n_anchors = refs.rows;
    g.self = false;
    g.neighbors.resize(queries.rows * k);
    g.distances.resize(queries.rows * k);

    std::unique_ptr<RpForest> forest;
    ApproxParams p = params;
    if (mode == KnnMode::approx) {
        if (p.n_trees == 0)
            p.n_trees = std::size_t(
                std::ceil(5.0 * std::log2(double(std::max<std::size_t>(refs.rows, 2)))));
        if (p.search_k == 0) p.search_k = p.n_trees * p.leaf_size;
        forest = std::make_unique<RpForest>(refs, p.n_trees, p.leaf_size, seed);
    }

#pragma omp parallel for schedule(dynamic, 16)
    for (std::ptrdiff_t qq = 0; qq < std::ptrdiff_t(queries.rows); ++qq) {
        const std::size_t q = std::size_t(qq);
        std::vector<Candidate> cands;
        if (mode == KnnMode::exact) {
            cands.reserve(refs.rows);
            for (std::size_t j = 0; j < refs.rows; ++j)
                cands.push_back({squared_distance(queries.row(q), refs.row(j)), std::uint32_t(j)});
        } else {
            std::vector<std::uint32_t> raw;
            forest->query(queries.row(q), p.search_k, raw);
            for (auto j : raw)
                cands.push_back({squared_distance(queries.row(q), refs.row(j)), j});
            if (cands.size() < k) {
                cands.clear();
                for (std::size_t j = 0; j < refs.rows; ++j)
                    cands.push_back({squared_distance(queries.row(q), refs.row(j)), std::uint32_t(j)});
            }
        }
        select_top_k(cands, k);
        for (std::size_t r = 0; r < k; ++r) {
            g.neighbors[q * k + r] = cands[r].idx;
            g.distances[q * k + r] = std::sqrt(cands[r].d2);
        }
    }
    finalize_graph(g, queries, refs);
    return g;
}

void rebuild_geometry(NeighborGraph& g, const Matrix& own, const Matrix& anchors) {
    if (own.rows != g.n_points || anchors.rows != g.n_anchors)
        throw DataError("rebuild_geometry: coordinate shape mismatch");
    for (std::size_t i = 0; i < g.n_points; ++i) {
        std::vector<Candidate> cands(g.k);
        for (std::size_t r = 0; r < g.k; ++r) {
            const auto j = g.neighbor(i, r);
            cands[r] = {squared_distance(own.row(i), anchors.row(j)), j};
        }
        std::sort(cands.begin(), cands.end());
        for (std::size_t r = 0; r < g.k; ++r) {
            g.neighbors[i * g.k + r] = cands[r].idx;
            g.distances[i * g.k + r] = std::sqrt(cands[r].d2);
        }
    }
    finalize_graph(g, own, anchors);
}

void rebuild_geometry(NeighborGraph& g, const Matrix& coords) {
    rebuild_geometry(g, coords, coords);
}

PairSampling sample_distant(const NeighborGraph& g, const Matrix& own, const Matrix& anchors,
                            std::size_t m, std::uint64_t seed) {
    const std::size_t budget = g.n_anchors - g.k - (g.self ? 1 : 0);
    if (m > budget)
        throw DataError("sample_distant: m = " + std::to_string(m) + " exceeds available " +
                        std::to_string(budget) + " non-neighbors");
    PairSampling s;
    s.m = m;
    s.seed = seed;
    s.distant.resize(g.n_points * m);
    s.distances.resize(g.n_points * m);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t ii = 0; ii < std::ptrdiff_t(g.n_points); ++ii) {
        const std::size_t i = std::size_t(ii);
        Rng rng(derive_seed(seed, "negative", i));
        std::unordered_set<std::uint32_t> taken;
        if (g.self) taken.insert(std::uint32_t(i));
        for (std::size_t r = 0; r < g.k; ++r) taken.insert(g.neighbor(i, r));
        for (std::size_t sidx = 0; sidx < m; ++sidx) {
            std::uint32_t j;
            do {
                j = std::uint32_t(rng.below(g.n_anchors));
            } while (taken.count(j));
            taken.insert(j);
            s.distant[i * m + sidx] = j;
            s.distances[i * m + sidx] = euclidean_distance(own.row(i), anchors.row(j));
        }
    }
    return s;
}

void dump_graph_csv(const std::string& path, const NeighborGraph& g) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write '" + path + "'");
    out << "i,j,rank,distance\n";
    char buf[64];
    for (std::size_t i = 0; i < g.n_points; ++i)
        for (std::size_t r = 0; r < g.k; ++r) {
            const int n = std::snprintf(buf, sizeof buf, "%zu,%u,%zu,%.17g\n", i, g.neighbor(i, r),
                                        r, g.distance(i, r));
            out.write(buf, n);
        }
}

}  // namespace camel
