#include "camel/optimizer.hpp"

#include <cmath>
#include <ostream>

#include "camel/error.hpp"
#include "camel/rng.hpp"

namespace camel {

OptimState make_state(Matrix y0) {
    OptimState st;
    st.adam_m = Matrix(y0.rows, y0.cols);
    st.adam_v = Matrix(y0.rows, y0.cols);
    st.y = std::move(y0);
    return st;
}

namespace {

double mean_row_norm(const Matrix& m) {
    if (m.rows == 0) return 0.0;
    double s = 0.0;
    for (std::size_t i = 0; i < m.rows; ++i) {
        double n2 = 0.0;
        for (double v : m.row(i)) n2 += v * v;
        s += std::sqrt(n2);
    }
    return s / double(m.rows);
}

double mean_abs(const Matrix& m) {
    double s = 0.0;
    for (double v : m.data) s += std::abs(v);
    return m.data.empty() ? 0.0 : s / double(m.data.size());
}

}  // namespace

void run(OptimState& state, FieldInputs& in, const OptimConfig& cfg, const RunHooks& hooks) {
    if (!in.graph || !in.c_high) throw UsageError("run: missing field inputs");
    if (state.y.rows != in.graph->n_points) throw DataError("run: state/graph size mismatch");

    BipartiteContext ctx;
    const BipartiteContext* ctx_ptr = nullptr;
    if (in.anchor_coords) {
        ctx.anchor_coords = in.anchor_coords;
        ctx.anchor_graph = in.anchor_graph;
        ctx_ptr = &ctx;
    }

    Matrix cr_cache;
    const bool trace = hooks.trace_forces != nullptr;
    if (trace)
        *hooks.trace_forces << "iter,mean_attractive,mean_curvature,mean_repulsive,mean_total\n";

    for (; state.iter < cfg.max_iter; ++state.iter) {
        const std::size_t t = state.iter;
        if (cfg.resample_every > 0 && t > 0 && t % cfg.resample_every == 0) {
            const Matrix& own = in.input_own ? *in.input_own : state.y;
            const Matrix& anch = in.input_anchor ? *in.input_anchor : own;
            in.sampling = sample_distant(*in.graph, own, anch, in.sampling.m,
                                         derive_seed(in.sampling.seed, "resample", t));
        }
        const std::size_t stride = std::max<std::size_t>(cfg.curvature_every, 1);
        if (t % stride == 0)
            cr_cache = curvature_force_scalars(state.y, *in.graph, *in.c_high, in.force, ctx_ptr);

        GradientField field = gradient(state.y, *in.graph, in.sampling, *in.c_high, in.force,
                                       in.frozen, ctx_ptr, trace, &cr_cache);

        const double b1t = 1.0 - std::pow(cfg.beta1, double(t + 1));
        const double b2t = 1.0 - std::pow(cfg.beta2, double(t + 1));
#pragma omp parallel for schedule(static)
        for (std::ptrdiff_t ii = 0; ii < std::ptrdiff_t(state.y.rows); ++ii) {
            const std::size_t i = std::size_t(ii);
            if (in.frozen && (*in.frozen)[i]) continue;
            for (std::size_t c = 0; c < state.y.cols; ++c) {
                const std::size_t idx = i * state.y.cols + c;
                const double g = field.grads.data[idx];
                double& m = state.adam_m.data[idx];
                double& v = state.adam_v.data[idx];
                m = cfg.beta1 * m + (1.0 - cfg.beta1) * g;
                v = cfg.beta2 * v + (1.0 - cfg.beta2) * g * g;
                state.y.data[idx] += cfg.lr * (m / b1t) / (std::sqrt(v / b2t) + cfg.eps);
            }
        }

        if (mean_abs(state.y) > kDivergenceGuard)
            throw DivergenceError("embedding diverged at iteration " + std::to_string(t) +
                                  " (mean |Y| exceeds 1e6); lower --lr or check the input scale");

        if (hooks.progress) hooks.progress(t, mean_row_norm(field.grads));
        if (trace) {
            char buf[160];
            const int n = std::snprintf(buf, sizeof buf, "%zu,%.8g,%.8g,%.8g,%.8g\n", t,
                                        mean_row_norm(field.attractive),
                                        mean_row_norm(field.curvature),
                                        mean_row_norm(field.repulsive), mean_row_norm(field.grads));
            hooks.trace_forces->write(buf, n);
        }
    }
}

}  // namespace camel
