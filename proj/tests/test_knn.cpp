#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <set>

#include "camel/error.hpp"
#include "camel/knn.hpp"
#include "camel/rng.hpp"

using namespace camel;

namespace {

Matrix random_points(std::size_t n, std::size_t d, std::uint64_t seed) {
    Rng rng(seed);
    Matrix m(n, d);
    for (auto& v : m.data) v = rng.normal();
    return m;
}

// brute-force oracle with the same (distance, index) tie-break
std::vector<std::uint32_t> brute_knn(const Matrix& x, std::size_t i, std::size_t k) {
    std::vector<std::pair<double, std::uint32_t>> cands;
    for (std::size_t j = 0; j < x.rows; ++j)
        if (j != i) cands.emplace_back(squared_distance(x.row(i), x.row(j)), std::uint32_t(j));
    std::sort(cands.begin(), cands.end());
    std::vector<std::uint32_t> out;
    for (std::size_t r = 0; r < k; ++r) out.push_back(cands[r].second);
    return out;
}

}  // namespace

TEST_CASE("three collinear points, k=1") {
    Matrix x(3, 1);
    x.at(0, 0) = 0.0;
    x.at(1, 0) = 1.0;
    x.at(2, 0) = 3.0;
    const auto g = build_knn(x, 1, KnnMode::exact, 0);
    CHECK(g.neighbor(0, 0) == 1);
    CHECK(g.neighbor(1, 0) == 0);
    CHECK(g.neighbor(2, 0) == 1);
}

TEST_CASE("duplicate points: zero distances, no self loops") {
    Matrix x(4, 2);  // two coincident pairs
    x.at(0, 0) = 1.0;
    x.at(1, 0) = 1.0;
    x.at(2, 1) = 5.0;
    x.at(3, 1) = 5.0;
    const auto g = build_knn(x, 2, KnnMode::exact, 0);
    for (std::size_t i = 0; i < 4; ++i) {
        CHECK(g.distance(i, 0) == 0.0);
        for (std::size_t r = 0; r < g.k; ++r) CHECK(g.neighbor(i, r) != i);
    }
}

TEST_CASE("k >= N is rejected") {
    Matrix x(3, 1);
    x.at(1, 0) = 1;
    x.at(2, 0) = 2;
    CHECK_THROWS_AS(build_knn(x, 3, KnnMode::exact, 0), DataError);
}

TEST_CASE("exact mode equals brute force on random instances") {
    for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
        const Matrix x = random_points(200, 5, seed);
        const auto g = build_knn(x, 7, KnnMode::exact, seed);
        for (std::size_t i = 0; i < x.rows; ++i) {
            const auto oracle = brute_knn(x, i, 7);
            for (std::size_t r = 0; r < 7; ++r) CHECK(g.neighbor(i, r) == oracle[r]);
        }
    }
}

TEST_CASE("distances ascend and centroids match recomputation") {
    const Matrix x = random_points(120, 4, 9);
    const auto g = build_knn(x, 6, KnnMode::exact, 9);
    for (std::size_t i = 0; i < x.rows; ++i) {
        double mean = 0.0;
        for (std::size_t r = 0; r < g.k; ++r) {
            if (r > 0) CHECK(g.distance(i, r) >= g.distance(i, r - 1));
            mean += g.distance(i, r);
        }
        CHECK(g.mean_neighbor_dist[i] == doctest::Approx(mean / double(g.k)));
        for (std::size_t c = 0; c < x.cols; ++c) {
            double cent = 0.0;
            for (std::size_t r = 0; r < g.k; ++r) cent += x.at(g.neighbor(i, r), c);
            CHECK(g.centroids.at(i, c) == doctest::Approx(cent / double(g.k)));
        }
    }
}

TEST_CASE("approx recall vs exact oracle on 500 gaussian points") {
    const Matrix x = random_points(500, 8, 77);
    const std::size_t k = 10;
    const auto approx = build_knn(x, k, KnnMode::approx, 77);
    double hits = 0;
    for (std::size_t i = 0; i < x.rows; ++i) {
        const auto oracle = brute_knn(x, i, k);
        std::set<std::uint32_t> truth(oracle.begin(), oracle.end());
        for (std::size_t r = 0; r < k; ++r) hits += truth.count(approx.neighbor(i, r));
    }
    const double recall = hits / double(x.rows * k);
    CHECK(recall >= 0.9);
}

TEST_CASE("automatic mode cutover picks exact below the threshold") {
    const Matrix x = random_points(60, 3, 5);
    const auto g_auto = build_knn(x, 4, KnnMode::automatic, 5);
    const auto g_exact = build_knn(x, 4, KnnMode::exact, 5);
    CHECK(g_auto.neighbors == g_exact.neighbors);
}

TEST_CASE("query knn: identical point is nearest with distance zero") {
    const Matrix refs = random_points(50, 3, 21);
    Matrix q(1, 3);
    std::copy_n(refs.row(17).data(), 3, q.row(0).data());
    const auto g = knn_of_queries(q, refs, 3, KnnMode::exact, 0);
    CHECK(g.neighbor(0, 0) == 17);
    CHECK(g.distance(0, 0) == 0.0);
    CHECK_FALSE(g.self);
}

TEST_CASE("query knn: single reference point") {
    Matrix refs(1, 2);
    refs.at(0, 0) = 3.0;
    Matrix q(2, 2);
    q.at(1, 1) = -4.0;
    const auto g = knn_of_queries(q, refs, 1, KnnMode::exact, 0);
    CHECK(g.neighbor(0, 0) == 0);
    CHECK(g.neighbor(1, 0) == 0);
}

TEST_CASE("query knn matches brute force for 100 queries vs 500 refs") {
    const Matrix refs = random_points(500, 4, 31);
    const Matrix queries = random_points(100, 4, 32);
    const auto g = knn_of_queries(queries, refs, 5, KnnMode::exact, 0);
    for (std::size_t qi = 0; qi < queries.rows; ++qi) {
        std::vector<std::pair<double, std::uint32_t>> cands;
        for (std::size_t j = 0; j < refs.rows; ++j)
            cands.emplace_back(squared_distance(queries.row(qi), refs.row(j)), std::uint32_t(j));
        std::sort(cands.begin(), cands.end());
        for (std::size_t r = 0; r < 5; ++r) CHECK(g.neighbor(qi, r) == cands[r].second);
    }
}

TEST_CASE("query knn rejects dimension mismatch") {
    const Matrix refs = random_points(10, 3, 1);
    const Matrix q = random_points(2, 4, 2);
    CHECK_THROWS_AS(knn_of_queries(q, refs, 2, KnnMode::exact, 0), DataError);
}

TEST_CASE("negative sampling: forced complement when m fills the budget") {
    const Matrix x = random_points(5, 2, 3);
    const auto g = build_knn(x, 2, KnnMode::exact, 3);
    const auto s = sample_distant(g, x, 2, 11);
    for (std::size_t i = 0; i < 5; ++i) {
        std::set<std::uint32_t> excluded{std::uint32_t(i), g.neighbor(i, 0), g.neighbor(i, 1)};
        std::set<std::uint32_t> got{s.sample(i, 0), s.sample(i, 1)};
        CHECK(got.size() == 2);
        for (auto j : got) CHECK(excluded.count(j) == 0);
    }
}

TEST_CASE("negative sampling is reproducible and disjoint from neighbors") {
    const Matrix x = random_points(300, 3, 13);
    const auto g = build_knn(x, 10, KnnMode::exact, 13);
    const auto s1 = sample_distant(g, x, 20, 99);
    const auto s2 = sample_distant(g, x, 20, 99);
    CHECK(s1.distant == s2.distant);
    for (std::size_t i = 0; i < x.rows; ++i) {
        std::set<std::uint32_t> nbrs;
        for (std::size_t r = 0; r < g.k; ++r) nbrs.insert(g.neighbor(i, r));
        std::set<std::uint32_t> seen;
        for (std::size_t m = 0; m < s1.m; ++m) {
            const auto j = s1.sample(i, m);
            CHECK(j != i);
            CHECK(nbrs.count(j) == 0);
            CHECK(seen.insert(j).second);  // no replacement
        }
    }
}

TEST_CASE("negative sampling rejects oversized m") {
    const Matrix x = random_points(10, 2, 1);
    const auto g = build_knn(x, 3, KnnMode::exact, 1);
    CHECK_THROWS_AS(sample_distant(g, x, 7, 0), DataError);
}

TEST_CASE("negative sampling is uniform over non-neighbors") {
    // inclusion frequency of each eligible index within 3 sigma of binomial
    const Matrix x = random_points(1000, 2, 55);
    const auto g = build_knn(x, 10, KnnMode::exact, 55);
    const std::size_t m = 30, reseeds = 200;
    std::vector<std::size_t> counts(x.rows, 0);
    const std::size_t point = 0;
    for (std::size_t rep = 0; rep < reseeds; ++rep) {
        const auto s = sample_distant(g, x, m, 1000 + rep);
        for (std::size_t j = 0; j < m; ++j) ++counts[s.sample(point, j)];
    }
    const double eligible = double(x.rows - 1 - g.k);
    const double p = double(m) / eligible;
    const double mean = double(reseeds) * p;
    const double sigma = std::sqrt(double(reseeds) * p * (1 - p));
    std::set<std::uint32_t> excluded{std::uint32_t(point)};
    for (std::size_t r = 0; r < g.k; ++r) excluded.insert(g.neighbor(point, r));
    std::size_t beyond_3sigma = 0, eligible_count = 0;
    for (std::size_t j = 0; j < x.rows; ++j) {
        if (excluded.count(std::uint32_t(j))) {
            CHECK(counts[j] == 0);
            continue;
        }
        ++eligible_count;
        const double dev = std::abs(double(counts[j]) - mean);
        if (dev > 3.0 * sigma) ++beyond_3sigma;
        CHECK(dev <= 5.0 * sigma);  // hard cap: a biased sampler blows through this
    }
    // a uniform law leaves ~0.27% of indices outside 3 sigma; allow 1%
    CHECK(double(beyond_3sigma) <= 0.01 * double(eligible_count));
}

TEST_CASE("rebuild_geometry reorders lists by new-space distance") {
    const Matrix aug = random_points(40, 6, 8);
    Matrix plain(40, 3);
    for (std::size_t i = 0; i < 40; ++i)
        for (std::size_t c = 0; c < 3; ++c) plain.at(i, c) = aug.at(i, c);
    auto g = build_knn(aug, 5, KnnMode::exact, 8);
    auto sets_before = g.neighbors;
    rebuild_geometry(g, plain);
    // same sets per point, ascending distances in the plain space
    for (std::size_t i = 0; i < 40; ++i) {
        std::set<std::uint32_t> before(sets_before.begin() + std::ptrdiff_t(i * 5),
                                       sets_before.begin() + std::ptrdiff_t(i * 5 + 5));
        std::set<std::uint32_t> after;
        for (std::size_t r = 0; r < 5; ++r) {
            after.insert(g.neighbor(i, r));
            if (r > 0) CHECK(g.distance(i, r) >= g.distance(i, r - 1));
            CHECK(g.distance(i, r) ==
                  doctest::Approx(euclidean_distance(plain.row(i), plain.row(g.neighbor(i, r)))));
        }
        CHECK(before == after);
    }
}
