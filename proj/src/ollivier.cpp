#include "camel/ollivier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

#include "camel/error.hpp"

namespace camel {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kMassEps = 1e-12;

// Min-cost flow (successive shortest paths with Dijkstra + potentials).
// Real-valued capacities; each augmentation saturates at least one arc, so
// the loop terminates after O(V) rounds on transportation instances.
class MinCostFlow {
public:
    explicit MinCostFlow(std::size_t n) : head_(n, -1), dist_(n), pot_(n, 0.0), prev_edge_(n) {}

    void add_arc(int u, int v, double cap, double cost) {
        edges_.push_back({v, head_[std::size_t(u)], cap, cost});
        head_[std::size_t(u)] = int(edges_.size()) - 1;
        edges_.push_back({u, head_[std::size_t(v)], 0.0, -cost});
        head_[std::size_t(v)] = int(edges_.size()) - 1;
    }

    // Returns total cost of shipping as much flow as possible from s to t.
    double run(int s, int t) {
        double total_cost = 0.0;
        while (dijkstra(s, t)) {
            for (std::size_t i = 0; i < pot_.size(); ++i)
                if (dist_[i] < kInf) pot_[i] += dist_[i];
            double push = kInf;
            for (int v = t; v != s;) {
                const auto& e = edges_[std::size_t(prev_edge_[std::size_t(v)])];
                push = std::min(push, e.cap);
                v = edges_[std::size_t(prev_edge_[std::size_t(v)] ^ 1)].to;
            }
            for (int v = t; v != s;) {
                auto& e = edges_[std::size_t(prev_edge_[std::size_t(v)])];
                auto& rev = edges_[std::size_t(prev_edge_[std::size_t(v)] ^ 1)];
                e.cap -= push;
                rev.cap += push;
                total_cost += push * e.cost;
                v = rev.to;
            }
        }
        return total_cost;
    }

private:
    struct Edge {
        int to, next;
        double cap, cost;
    };

    bool dijkstra(int s, int t) {
        std::fill(dist_.begin(), dist_.end(), kInf);
        dist_[std::size_t(s)] = 0.0;
        using Item = std::pair<double, int>;
        std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
        pq.emplace(0.0, s);
        while (!pq.empty()) {
            auto [d, u] = pq.top();
            pq.pop();
            if (d > dist_[std::size_t(u)] + kMassEps) continue;
            for (int e = head_[std::size_t(u)]; e >= 0; e = edges_[std::size_t(e)].next) {
                const auto& ed = edges_[std::size_t(e)];
                if (ed.cap <= kMassEps) continue;
                const double nd =
                    dist_[std::size_t(u)] + ed.cost + pot_[std::size_t(u)] - pot_[std::size_t(ed.to)];
                if (nd < dist_[std::size_t(ed.to)] - kMassEps) {
                    dist_[std::size_t(ed.to)] = nd;
                    prev_edge_[std::size_t(ed.to)] = e;
                    pq.emplace(nd, ed.to);
                }
            }
        }
        return dist_[std::size_t(t)] < kInf;
    }

    std::vector<int> head_;
    std::vector<Edge> edges_;
    std::vector<double> dist_, pot_;
    std::vector<int> prev_edge_;
};

Matrix shortest_paths(const SmallGraph& g) {
    Matrix d(g.n, g.n, kInf);
    for (std::size_t i = 0; i < g.n; ++i) d.at(i, i) = 0.0;
    for (const auto& e : g.edges) {
        if (e.u >= g.n || e.v >= g.n) throw DataError("ollivier: edge endpoint out of range");
        if (e.w <= 0.0) throw DataError("ollivier: edge weights must be positive");
        d.at(e.u, e.v) = std::min(d.at(e.u, e.v), e.w);
        d.at(e.v, e.u) = std::min(d.at(e.v, e.u), e.w);
    }
    for (std::size_t m = 0; m < g.n; ++m)
        for (std::size_t i = 0; i < g.n; ++i) {
            if (d.at(i, m) == kInf) continue;
            for (std::size_t j = 0; j < g.n; ++j) {
                const double via = d.at(i, m) + d.at(m, j);
                if (via < d.at(i, j)) d.at(i, j) = via;
            }
        }
    return d;
}

std::vector<std::vector<std::uint32_t>> adjacency(const SmallGraph& g) {
    std::vector<std::vector<std::uint32_t>> adj(g.n);
    for (const auto& e : g.edges) {
        adj[e.u].push_back(e.v);
        adj[e.v].push_back(e.u);
    }
    for (auto& a : adj) {
        std::sort(a.begin(), a.end());
        a.erase(std::unique(a.begin(), a.end()), a.end());
    }
    return adj;
}

}  // namespace

double exact_transport_cost(const std::vector<double>& supply, const std::vector<double>& demand,
                            const Matrix& cost) {
    const std::size_t p = supply.size(), q = demand.size();
    if (cost.rows != p || cost.cols != q) throw DataError("transport: cost shape mismatch");
    MinCostFlow flow(p + q + 2);
    const int s = 0, t = int(p + q + 1);
    for (std::size_t i = 0; i < p; ++i) flow.add_arc(s, int(i + 1), supply[i], 0.0);
    for (std::size_t j = 0; j < q; ++j) flow.add_arc(int(p + 1 + j), t, demand[j], 0.0);
    for (std::size_t i = 0; i < p; ++i)
        for (std::size_t j = 0; j < q; ++j) flow.add_arc(int(i + 1), int(p + 1 + j), kInf, cost.at(i, j));
    return flow.run(s, t);
}

double ollivier_ricci_pair(const SmallGraph& g, std::uint32_t u, std::uint32_t v) {
    if (g.n > kOllivierMaxNodes)
        throw DataError("ollivier oracle capped at " + std::to_string(kOllivierMaxNodes) + " nodes");
    if (u >= g.n || v >= g.n || u == v) throw DataError("ollivier: bad node pair");
    const Matrix sp = shortest_paths(g);
    const auto adj = adjacency(g);
    if (sp.at(u, v) == kInf) throw DataError("ollivier: graph is not connected between the pair");
    const auto& nu = adj[u];
    const auto& nv = adj[v];
    if (nu.empty() || nv.empty()) throw DataError("ollivier: isolated endpoint");

    std::vector<double> supply(nu.size(), 1.0 / double(nu.size()));
    std::vector<double> demand(nv.size(), 1.0 / double(nv.size()));
    Matrix cost(nu.size(), nv.size());
    for (std::size_t i = 0; i < nu.size(); ++i)
        for (std::size_t j = 0; j < nv.size(); ++j) cost.at(i, j) = sp.at(nu[i], nv[j]);
    const double w = exact_transport_cost(supply, demand, cost);
    return 1.0 - w / sp.at(u, v);
}

std::vector<double> ollivier_ricci_exact(const SmallGraph& g) {
    std::vector<double> out;
    out.reserve(g.edges.size());
    for (const auto& e : g.edges) out.push_back(ollivier_ricci_pair(g, e.u, e.v));
    return out;
}

}  // namespace camel
