#include <algorithm>
#include <cmath>
#include <limits>

#include "camel/error.hpp"
#include "camel/metrics.hpp"

namespace camel {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct SteepDownArea {
    std::size_t start, end;
    double mib;
};

// Maximal steep region starting at `start`; tolerates up to min_samples
// consecutive non-steep points that still move in the same direction.
std::size_t extend_region(const std::vector<char>& steep, const std::vector<char>& xward,
                          std::size_t start, std::size_t min_samples) {
    const std::size_t n = steep.size();
    std::size_t non_xward = 0;
    std::size_t index = start;
    std::size_t end = start;
    while (index < n) {
        if (steep[index]) {
            non_xward = 0;
            end = index;
        } else if (!xward[index]) {
            ++non_xward;
            if (non_xward > min_samples) break;
        } else {
            return end;
        }
        ++index;
    }
    return end;
}

void update_filter_sdas(std::vector<SteepDownArea>& sdas, double mib, double xi_complement,
                        const std::vector<double>& plot) {
    if (std::isinf(mib)) {
        sdas.clear();
        return;
    }
    std::vector<SteepDownArea> kept;
    for (auto sda : sdas)
        if (mib <= plot[sda.start] * xi_complement) {
            sda.mib = std::max(sda.mib, mib);
            kept.push_back(sda);
        }
    sdas = std::move(kept);
}

// Walk the cluster end leftward until its predecessor lies inside the
// cluster; drops border artifacts of the reachability plot.
bool correct_predecessor(const std::vector<double>& plot,
                         const std::vector<std::ptrdiff_t>& pred_plot,
                         const std::vector<std::size_t>& ordering, std::size_t& s, std::size_t& e) {
    while (s < e) {
        if (plot[s] > plot[e]) return true;
        const std::ptrdiff_t p_e = pred_plot[e];
        bool found = false;
        for (std::size_t i = s; i < e && !found; ++i)
            if (p_e >= 0 && std::size_t(p_e) == ordering[i]) found = true;
        if (found) return true;
        --e;
    }
    return false;
}

}  // namespace

OpticsResult optics_xi(const Matrix& y, std::size_t min_samples, double xi) {
    const std::size_t n = y.rows;
    if (min_samples < 2) min_samples = 2;
    if (xi <= 0.0 || xi >= 1.0) throw DataError("optics: xi must lie in (0, 1)");

    OpticsResult res;
    res.reachability.assign(n, kInf);
    res.predecessor.assign(n, -1);
    res.labels.assign(n, -1);
    if (n == 0) return res;

    // core distance: min_samples-th nearest including the point itself
    std::vector<double> core(n, kInf);
    if (min_samples <= n) {
#pragma omp parallel for schedule(static)
        for (std::ptrdiff_t ii = 0; ii < std::ptrdiff_t(n); ++ii) {
            const std::size_t i = std::size_t(ii);
            std::vector<double> d(n);
            for (std::size_t j = 0; j < n; ++j) d[j] = squared_distance(y.row(i), y.row(j));
            std::nth_element(d.begin(), d.begin() + std::ptrdiff_t(min_samples) - 1, d.end());
            core[i] = std::sqrt(d[min_samples - 1]);
        }
    }

    std::vector<char> processed(n, 0);
    res.ordering.reserve(n);
    for (std::size_t step = 0; step < n; ++step) {
        // unprocessed point with the smallest reachability, ties to low index
        std::size_t point = n;
        double best = kInf;
        for (std::size_t i = 0; i < n; ++i) {
            if (processed[i]) continue;
            if (point == n || res.reachability[i] < best) {
                point = i;
                best = res.reachability[i];
            }
        }
        processed[point] = 1;
        res.ordering.push_back(point);
        if (std::isinf(core[point])) continue;
        for (std::size_t j = 0; j < n; ++j) {
            if (processed[j]) continue;
            const double rdist =
                std::max(core[point], euclidean_distance(y.row(point), y.row(j)));
            if (rdist < res.reachability[j]) {
                res.reachability[j] = rdist;
                res.predecessor[j] = std::ptrdiff_t(point);
            }
        }
    }

    // ---- xi cluster extraction over the reachability plot ----
    std::vector<double> plot(n + 1);
    std::vector<std::ptrdiff_t> pred_plot(n);
    for (std::size_t t = 0; t < n; ++t) {
        plot[t] = res.reachability[res.ordering[t]];
        pred_plot[t] = res.predecessor[res.ordering[t]];
    }
    plot[n] = kInf;  // sentinel closes the final cluster

    const double xi_complement = 1.0 - xi;
    std::vector<char> steep_up(n, 0), steep_down(n, 0), up(n, 0), down(n, 0);
    for (std::size_t t = 0; t < n; ++t) {
        const double a = plot[t], b = plot[t + 1];
        if (std::isinf(a) && std::isinf(b)) continue;  // nan ratio: no direction
        if (a == 0.0 && b == 0.0) continue;
        const double ratio = a / b;
        steep_up[t] = ratio <= xi_complement;
        steep_down[t] = ratio >= 1.0 / xi_complement;
        up[t] = ratio < 1.0;
        down[t] = ratio > 1.0;
    }

    const std::size_t min_cluster_size = min_samples;
    std::vector<SteepDownArea> sdas;
    std::vector<std::pair<std::size_t, std::size_t>> clusters;
    std::size_t index = 0;
    double mib = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
        if (!(steep_up[t] || steep_down[t])) continue;
        if (t < index) continue;
        for (std::size_t i = index; i <= t; ++i) mib = std::max(mib, plot[i]);
        if (steep_down[t]) {
            update_filter_sdas(sdas, mib, xi_complement, plot);
            const std::size_t d_start = t;
            const std::size_t d_end = extend_region(steep_down, up, d_start, min_samples);
            sdas.push_back({d_start, d_end, 0.0});
            index = d_end + 1;
            mib = plot[index];
        } else {
            update_filter_sdas(sdas, mib, xi_complement, plot);
            const std::size_t u_start = t;
            const std::size_t u_end = extend_region(steep_up, down, u_start, min_samples);
            index = u_end + 1;
            mib = plot[index];
            std::vector<std::pair<std::size_t, std::size_t>> u_clusters;
            for (const auto& d : sdas) {
                std::size_t c_start = d.start;
                std::size_t c_end = u_end;
                if (plot[c_end + 1] * xi_complement < d.mib) continue;
                const double d_max = plot[d.start];
                if (d_max * xi_complement >= plot[c_end + 1]) {
                    while (c_start < d.end && plot[c_start + 1] > plot[c_end + 1]) ++c_start;
                } else if (plot[c_end + 1] * xi_complement >= d_max) {
                    while (c_end > u_start && plot[c_end] > d_max) --c_end;
                }
                if (!correct_predecessor(plot, pred_plot, res.ordering, c_start, c_end)) continue;
                if (c_end < c_start || c_end - c_start + 1 < min_cluster_size) continue;
                if (c_start > d.end) continue;
                if (c_end < u_start) continue;
                u_clusters.emplace_back(c_start, c_end);
            }
            std::reverse(u_clusters.begin(), u_clusters.end());  // nested clusters first
            clusters.insert(clusters.end(), u_clusters.begin(), u_clusters.end());
        }
    }

    std::vector<int> plot_labels(n, -1);
    int next_label = 0;
    for (const auto& [s, e] : clusters) {
        bool free_range = true;
        for (std::size_t i = s; i <= e && free_range; ++i)
            if (plot_labels[i] != -1) free_range = false;
        if (!free_range) continue;
        for (std::size_t i = s; i <= e; ++i) plot_labels[i] = next_label;
        ++next_label;
    }
    for (std::size_t t = 0; t < n; ++t) res.labels[res.ordering[t]] = plot_labels[t];
    res.n_clusters = std::size_t(next_label);
    return res;
}

std::size_t optics_cluster_count(const Matrix& y, std::size_t min_samples, double xi) {
    if (y.rows < std::max<std::size_t>(min_samples, 2)) return 1;  // degenerate: one cluster
    return optics_xi(y, min_samples, xi).n_clusters;
}

}  // namespace camel
