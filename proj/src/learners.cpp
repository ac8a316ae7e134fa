#include "camel/learners.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "camel/error.hpp"
#include "camel/rng.hpp"

namespace camel {

namespace {

constexpr double kPi = 3.14159265358979323846;

Matrix concat_columns(const Matrix& a, const Matrix& b, double b_scale) {
    Matrix out(a.rows, a.cols + b.cols);
    for (std::size_t r = 0; r < a.rows; ++r) {
        for (std::size_t c = 0; c < a.cols; ++c) out.at(r, c) = a.at(r, c);
        for (std::size_t c = 0; c < b.cols; ++c) out.at(r, a.cols + c) = b_scale * b.at(r, c);
    }
    return out;
}

// Shared tail of Algorithms 1-2: graph -> curvature -> negatives -> init ->
// ADAM. `augmented` carries the label-concatenated coordinates when the label
// scale is nonzero; neighbor sets come from it, all geometry from x_pre.
CamelModel fit_core(Matrix x_pre, PreprocessTransform trans, const Matrix* augmented,
                    const CamelConfig& cfg, LabelMeta meta, const FitHooks& hooks) {
    if (cfg.n_neighbors + 1 >= x_pre.rows)
        throw DataError("fit: need n_neighbors < N - 1");
    CamelModel model;
    model.transform = std::move(trans);
    model.config = cfg;
    model.label_meta = meta;

    NeighborGraph g = build_knn(augmented ? *augmented : x_pre, cfg.n_neighbors, cfg.knn_mode,
                                derive_seed(cfg.seed, "knn"), cfg.approx, cfg.exact_cutover);
    if (augmented) rebuild_geometry(g, x_pre);

    EdgeCurvature c_high = camel_curvature(x_pre, g);
    PairSampling sampling =
        sample_distant(g, x_pre, cfg.n_negatives, derive_seed(cfg.seed, "sampling"));
    Matrix y0 = init_embedding(x_pre, cfg.out_dim, cfg.opt.init, derive_seed(cfg.seed, "init"));

    OptimState state = make_state(std::move(y0));
    FieldInputs inputs;
    inputs.graph = &g;
    inputs.sampling = std::move(sampling);
    inputs.c_high = &c_high;
    inputs.force = cfg.force;
    inputs.input_own = &x_pre;
    run(state, inputs, cfg.opt, hooks.run);

    model.x = std::move(x_pre);
    model.y = std::move(state.y);
    model.graph = std::move(g);
    model.c_high = std::move(c_high);
    return model;
}

double clamp_w_label(double w) {
    if (w < 0.0) throw UsageError("label weight must be >= 0");
    if (w >= 1.0) {
        std::cerr << "camel: label weight " << w << " clamped to 0.99\n";
        return 0.99;
    }
    return w;
}

}  // namespace

CamelModel fit_unsupervised(const Matrix& x_raw, const CamelConfig& cfg, const FitHooks& hooks) {
    auto [x_pre, trans] = preprocess(x_raw);
    return fit_core(std::move(x_pre), std::move(trans), nullptr, cfg, LabelMeta{}, hooks);
}

CamelModel fit_supervised(const Matrix& x_raw, const LabelVector& labels, double w_label,
                          const CamelConfig& cfg, const FitHooks& hooks) {
    if (labels.size() != x_raw.rows) throw DataError("label length does not match sample count");
    if (!labels.all_present())
        throw DataError("missing labels: use fit_semisupervised for partially labeled data");
    w_label = clamp_w_label(w_label);
    auto [x_pre, trans] = preprocess(x_raw);
    EncodedLabels enc =
        encode_labels(labels, x_pre, w_label, cfg.label_sample_pairs, derive_seed(cfg.seed, "label"));
    LabelMeta meta;
    meta.present = true;
    meta.kind = labels.kind;
    meta.w_label = w_label;
    meta.scale = enc.scale;
    if (enc.scale == 0.0) {
        // zero label scale contributes nothing to any distance; skipping the
        // concatenation keeps the run bit-identical to unsupervised
        return fit_core(std::move(x_pre), std::move(trans), nullptr, cfg, meta, hooks);
    }
    const Matrix augmented = concat_columns(x_pre, enc.matrix, enc.scale);
    return fit_core(std::move(x_pre), std::move(trans), &augmented, cfg, meta, hooks);
}

double credibility_factor(double label_ratio, const SemiConfig& semi) {
    return 0.5 +
           std::atan(semi.credibility_sharpness * (label_ratio - semi.credibility_center)) / kPi;
}

LabelVector impute_labels(const Matrix& x_pre, const LabelVector& partial, std::size_t k,
                          KnnMode mode, std::uint64_t seed) {
    const std::size_t n = partial.size();
    if (x_pre.rows != n) throw DataError("impute: label/sample count mismatch");
    std::vector<std::uint32_t> labeled, unlabeled;
    for (std::size_t i = 0; i < n; ++i) (partial.has(i) ? labeled : unlabeled).push_back(std::uint32_t(i));
    if (labeled.empty()) throw DataError("impute: zero labeled samples");

    LabelVector full = partial;
    full.mask.clear();
    if (unlabeled.empty()) return full;

    Matrix refs(labeled.size(), x_pre.cols);
    for (std::size_t i = 0; i < labeled.size(); ++i)
        std::copy_n(x_pre.row(labeled[i]).data(), x_pre.cols, refs.row(i).data());
    Matrix queries(unlabeled.size(), x_pre.cols);
    for (std::size_t i = 0; i < unlabeled.size(); ++i)
        std::copy_n(x_pre.row(unlabeled[i]).data(), x_pre.cols, queries.row(i).data());

    const std::size_t k_imp = std::min(k, labeled.size());
    NeighborGraph g = knn_of_queries(queries, refs, k_imp, mode, derive_seed(seed, "impute"));

    for (std::size_t qi = 0; qi < unlabeled.size(); ++qi) {
        if (partial.kind == LabelKind::numerical) {
            double s = 0.0;
            for (std::size_t r = 0; r < k_imp; ++r) s += partial.raw[labeled[g.neighbor(qi, r)]];
            full.raw[unlabeled[qi]] = s / double(k_imp);
        } else {
            std::map<int, std::size_t> votes;
            for (std::size_t r = 0; r < k_imp; ++r)
                ++votes[int(partial.raw[labeled[g.neighbor(qi, r)]])];
            int best = -1;
            std::size_t best_count = 0;
            for (const auto& [cls, count] : votes)
                if (count > best_count) {  // map iterates ascending: ties go to the smallest class
                    best = cls;
                    best_count = count;
                }
            full.raw[unlabeled[qi]] = double(best);
        }
    }
    return full;
}

CamelModel fit_semisupervised(const Matrix& x_raw, const LabelVector& partial,
                              const SemiConfig& semi, const CamelConfig& cfg,
                              const FitHooks& hooks) {
    if (partial.size() != x_raw.rows) throw DataError("label length does not match sample count");
    if (partial.n_labeled() == 0) throw DataError("semi-supervised fit needs at least one label");
    const double w_label = clamp_w_label(semi.w_label);
    auto [x_pre, trans] = preprocess(x_raw);

    LabelVector full =
        impute_labels(x_pre, partial, cfg.n_neighbors, cfg.knn_mode, derive_seed(cfg.seed, "semi"));
    const double ratio = double(partial.n_labeled()) / double(partial.size());
    const double cred = credibility_factor(ratio, semi);
    const double w_eff = cred * w_label;

    EncodedLabels enc =
        encode_labels(full, x_pre, w_eff, cfg.label_sample_pairs, derive_seed(cfg.seed, "label"));
    LabelMeta meta;
    meta.present = true;
    meta.kind = partial.kind;
    meta.w_label = w_eff;
    meta.scale = enc.scale;
    meta.credibility = cred;
    if (enc.scale == 0.0)
        return fit_core(std::move(x_pre), std::move(trans), nullptr, cfg, meta, hooks);
    const Matrix augmented = concat_columns(x_pre, enc.matrix, enc.scale);
    return fit_core(std::move(x_pre), std::move(trans), &augmented, cfg, meta, hooks);
}

Matrix transform(const CamelModel& model, const Matrix& x_new_raw, InitMode init,
                 const FitHooks& hooks) {
    if (x_new_raw.rows == 0) return Matrix(0, model.y.cols);
    if (x_new_raw.cols != model.x.cols)
        throw DataError("transform: feature dimension mismatch with training data");
    const CamelConfig& cfg = model.config;
    const Matrix xq = apply_transform(x_new_raw, model.transform);

    const std::size_t k = std::min(cfg.n_neighbors, model.x.rows);
    NeighborGraph qg = knn_of_queries(xq, model.x, k, cfg.knn_mode,
                                      derive_seed(cfg.seed, "transform-knn"), cfg.approx,
                                      cfg.exact_cutover);
    EdgeCurvature c_high = camel_curvature(xq, model.x, qg, model.graph);
    const std::size_t m = std::min(cfg.n_negatives, model.x.rows - k);
    PairSampling sampling =
        sample_distant(qg, xq, model.x, m, derive_seed(cfg.seed, "transform-sampling"));

    Matrix y0;
    if (init == InitMode::interpolation)
        y0 = init_interpolation(qg, model.y);
    else
        y0 = init_embedding(xq, model.y.cols, init, derive_seed(cfg.seed, "transform-init"));

    OptimState state = make_state(std::move(y0));
    FieldInputs inputs;
    inputs.graph = &qg;
    inputs.sampling = std::move(sampling);
    inputs.c_high = &c_high;
    inputs.force = cfg.force;
    inputs.anchor_coords = &model.y;
    inputs.anchor_graph = &model.graph;
    inputs.input_own = &xq;
    inputs.input_anchor = &model.x;
    run(state, inputs, cfg.opt, hooks.run);
    return std::move(state.y);
}

Matrix inverse_transform(const CamelModel& model, const Matrix& y_new, InitMode init,
                         const FitHooks& hooks) {
    if (y_new.rows == 0) return Matrix(0, model.transform.means.size());
    if (y_new.cols != model.y.cols) throw DataError("inverse: embedding dimension mismatch");
    const CamelConfig& cfg = model.config;

    // spaces switched: the graph lives in embedding space and steers the
    // force field in feature space
    const std::size_t k = std::min(cfg.n_neighbors, model.y.rows - 1);
    NeighborGraph anchor_g = build_knn(model.y, k, cfg.knn_mode,
                                       derive_seed(cfg.seed, "inverse-anchor-knn"), cfg.approx,
                                       cfg.exact_cutover);
    NeighborGraph qg = knn_of_queries(y_new, model.y, k, cfg.knn_mode,
                                      derive_seed(cfg.seed, "inverse-knn"), cfg.approx,
                                      cfg.exact_cutover);
    EdgeCurvature c_high = camel_curvature(y_new, model.y, qg, anchor_g);
    const std::size_t m = std::min(cfg.n_negatives, model.y.rows - k);
    PairSampling sampling =
        sample_distant(qg, y_new, model.y, m, derive_seed(cfg.seed, "inverse-sampling"));

    Matrix x0;
    if (init == InitMode::interpolation) {
        x0 = init_interpolation(qg, model.x);
    } else {
        Rng rng(derive_seed(cfg.seed, "inverse-init"));
        x0 = Matrix(y_new.rows, model.x.cols);
        for (auto& v : x0.data) v = 0.01 * rng.normal();
    }

    OptimState state = make_state(std::move(x0));
    FieldInputs inputs;
    inputs.graph = &qg;
    inputs.sampling = std::move(sampling);
    inputs.c_high = &c_high;
    inputs.force = cfg.force;
    inputs.anchor_coords = &model.x;
    inputs.anchor_graph = &anchor_g;
    inputs.input_own = &y_new;
    inputs.input_anchor = &model.y;
    run(state, inputs, cfg.opt, hooks.run);
    return invert_transform(state.y, model.transform);
}

// ---- Persistence -----------------------------------------------------------

namespace {

constexpr char kModelMagic[4] = {'C', 'M', 'L', 'M'};

void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(char((v >> (8 * i)) & 0xff));
}

void put_u64(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(char((v >> (8 * i)) & 0xff));
}

std::uint32_t get_u32(const std::string& s, std::size_t& off) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= std::uint32_t(static_cast<unsigned char>(s.at(off++))) << (8 * i);
    return v;
}

std::uint64_t get_u64(const std::string& s, std::size_t& off) {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= std::uint64_t(static_cast<unsigned char>(s.at(off++))) << (8 * i);
    return v;
}

std::string pack_matrix(const Matrix& m) {
    std::string out;
    put_u32(out, std::uint32_t(m.rows));
    put_u32(out, std::uint32_t(m.cols));
    for (double v : m.data) {
        float f = float(v);
        std::uint32_t bits;
        std::memcpy(&bits, &f, 4);
        put_u32(out, bits);
    }
    return out;
}

Matrix unpack_matrix(const std::string& s) {
    std::size_t off = 0;
    const std::uint32_t rows = get_u32(s, off);
    const std::uint32_t cols = get_u32(s, off);
    Matrix m(rows, cols);
    for (auto& v : m.data) {
        const std::uint32_t bits = get_u32(s, off);
        float f;
        std::memcpy(&f, &bits, 4);
        v = f;
    }
    return m;
}

std::string pack_u32s(const std::vector<std::uint32_t>& v) {
    std::string out;
    put_u64(out, v.size());
    for (auto x : v) put_u32(out, x);
    return out;
}

std::vector<std::uint32_t> unpack_u32s(const std::string& s) {
    std::size_t off = 0;
    const std::uint64_t n = get_u64(s, off);
    std::vector<std::uint32_t> v(n);
    for (auto& x : v) x = get_u32(s, off);
    return v;
}

std::string pack_doubles(const std::vector<double>& v) {
    std::string out;
    put_u64(out, v.size());
    for (double d : v) {
        std::uint64_t bits;
        std::memcpy(&bits, &d, 8);
        put_u64(out, bits);
    }
    return out;
}

std::vector<double> unpack_doubles(const std::string& s) {
    std::size_t off = 0;
    const std::uint64_t n = get_u64(s, off);
    std::vector<double> v(n);
    for (auto& d : v) {
        const std::uint64_t bits = get_u64(s, off);
        std::memcpy(&d, &bits, 8);
    }
    return v;
}

std::string config_text(const CamelModel& m) {
    std::ostringstream os;
    os.precision(17);
    const CamelConfig& c = m.config;
    os << "n_neighbors = " << c.n_neighbors << "\n";
    os << "n_negatives = " << c.n_negatives << "\n";
    os << "out_dim = " << c.out_dim << "\n";
    os << "seed = " << c.seed << "\n";
    os << "exact_cutover = " << c.exact_cutover << "\n";
    os << "knn_mode = "
       << (c.knn_mode == KnnMode::exact ? "exact"
                                        : c.knn_mode == KnnMode::approx ? "approx" : "auto")
       << "\n";
    os << "w_nn = " << c.force.w_nn_base << "\n";
    os << "w_cr = " << c.force.w_cr_base << "\n";
    os << "w_dp = " << c.force.w_dp_base << "\n";
    os << "sigma_nn = " << c.force.sigma_nn << "\n";
    os << "sigma_dp = " << c.force.sigma_dp << "\n";
    os << "alpha = " << c.force.alpha << "\n";
    os << "weight_mod = " << (c.force.weight_mod ? 1 : 0) << "\n";
    os << "max_iter = " << c.opt.max_iter << "\n";
    os << "lr = " << c.opt.lr << "\n";
    os << "beta1 = " << c.opt.beta1 << "\n";
    os << "beta2 = " << c.opt.beta2 << "\n";
    os << "eps = " << c.opt.eps << "\n";
    os << "init = "
       << (c.opt.init == InitMode::pca ? "pca"
                                       : c.opt.init == InitMode::random ? "random" : "interpolation")
       << "\n";
    os << "resample_every = " << c.opt.resample_every << "\n";
    os << "curvature_every = " << c.opt.curvature_every << "\n";
    os << "label_sample_pairs = " << c.label_sample_pairs << "\n";
    os << "transform_scale = " << m.transform.scale << "\n";
    os << "label_present = " << (m.label_meta.present ? 1 : 0) << "\n";
    os << "label_kind = " << (m.label_meta.kind == LabelKind::numerical ? "numerical" : "categorical")
       << "\n";
    os << "label_weight = " << m.label_meta.w_label << "\n";
    os << "label_scale = " << m.label_meta.scale << "\n";
    os << "label_credibility = " << m.label_meta.credibility << "\n";
    os << "graph_k = " << m.graph.k << "\n";
    return os.str();
}

std::map<std::string, std::string> parse_config_text(const std::string& text) {
    std::map<std::string, std::string> kv;
    std::istringstream is(text);
    std::string line;
    while (std::getline(is, line)) {
        const auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        auto strip = [](std::string s) {
            while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.erase(s.begin());
            while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.pop_back();
            return s;
        };
        kv[strip(line.substr(0, eq))] = strip(line.substr(eq + 1));
    }
    return kv;
}

}  // namespace

void save_model(const std::string& path, const CamelModel& m) {
    std::map<std::string, std::string> sections;
    sections["config"] = config_text(m);
    sections["transform.means"] = pack_doubles(m.transform.means);
    sections["x"] = pack_matrix(m.x);
    sections["y"] = pack_matrix(m.y);
    sections["graph.neighbors"] = pack_u32s(m.graph.neighbors);
    sections["graph.distances"] = pack_doubles(m.graph.distances);
    sections["graph.meandist"] = pack_doubles(m.graph.mean_neighbor_dist);
    sections["graph.centroids"] = pack_matrix(m.graph.centroids);
    sections["c_high"] = pack_matrix(m.c_high.kappa);

    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write '" + path + "'");
    std::string header;
    header.append(kModelMagic, 4);
    put_u32(header, 1);  // version
    put_u32(header, std::uint32_t(sections.size()));
    out.write(header.data(), std::streamsize(header.size()));
    for (const auto& [name, payload] : sections) {
        std::string meta;
        put_u32(meta, std::uint32_t(name.size()));
        meta += name;
        put_u64(meta, payload.size());
        out.write(meta.data(), std::streamsize(meta.size()));
        out.write(payload.data(), std::streamsize(payload.size()));
    }
}

CamelModel load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open '" + path + "'");
    std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (content.size() < 12 || std::memcmp(content.data(), kModelMagic, 4) != 0)
        throw ParseError("not a camel model file: '" + path + "'");
    std::size_t off = 4;
    const std::uint32_t version = get_u32(content, off);
    if (version != 1) throw ParseError("unsupported model version " + std::to_string(version));
    const std::uint32_t n_sections = get_u32(content, off);
    std::map<std::string, std::string> sections;
    for (std::uint32_t i = 0; i < n_sections; ++i) {
        const std::uint32_t name_len = get_u32(content, off);
        const std::string name = content.substr(off, name_len);
        off += name_len;
        const std::uint64_t payload_len = get_u64(content, off);
        sections[name] = content.substr(off, payload_len);
        off += payload_len;
    }

    CamelModel m;
    const auto kv = parse_config_text(sections.at("config"));
    auto num = [&](const std::string& key) { return std::stod(kv.at(key)); };
    auto inum = [&](const std::string& key) { return std::stoull(kv.at(key)); };
    CamelConfig& c = m.config;
    c.n_neighbors = inum("n_neighbors");
    c.n_negatives = inum("n_negatives");
    c.out_dim = inum("out_dim");
    c.seed = inum("seed");
    c.exact_cutover = inum("exact_cutover");
    c.knn_mode = kv.at("knn_mode") == "exact" ? KnnMode::exact
                 : kv.at("knn_mode") == "approx" ? KnnMode::approx
                                                 : KnnMode::automatic;
    c.force.w_nn_base = num("w_nn");
    c.force.w_cr_base = num("w_cr");
    c.force.w_dp_base = num("w_dp");
    c.force.sigma_nn = num("sigma_nn");
    c.force.sigma_dp = num("sigma_dp");
    c.force.alpha = num("alpha");
    c.force.weight_mod = kv.at("weight_mod") == "1";
    c.opt.max_iter = inum("max_iter");
    c.opt.lr = num("lr");
    c.opt.beta1 = num("beta1");
    c.opt.beta2 = num("beta2");
    c.opt.eps = num("eps");
    c.opt.init = kv.at("init") == "pca" ? InitMode::pca
                 : kv.at("init") == "random" ? InitMode::random
                                             : InitMode::interpolation;
    c.opt.resample_every = inum("resample_every");
    c.opt.curvature_every = inum("curvature_every");
    c.label_sample_pairs = inum("label_sample_pairs");
    m.transform.scale = num("transform_scale");
    m.transform.means = unpack_doubles(sections.at("transform.means"));
    m.label_meta.present = kv.at("label_present") == "1";
    m.label_meta.kind =
        kv.at("label_kind") == "numerical" ? LabelKind::numerical : LabelKind::categorical;
    m.label_meta.w_label = num("label_weight");
    m.label_meta.scale = num("label_scale");
    m.label_meta.credibility = num("label_credibility");

    m.x = unpack_matrix(sections.at("x"));
    m.y = unpack_matrix(sections.at("y"));
    m.c_high.kappa = unpack_matrix(sections.at("c_high"));
    m.c_high.k = m.c_high.kappa.cols;
    NeighborGraph& g = m.graph;
    g.k = inum("graph_k");
    g.n_points = m.x.rows;
    g.n_anchors = m.x.rows;
    g.self = true;
    g.neighbors = unpack_u32s(sections.at("graph.neighbors"));
    g.distances = unpack_doubles(sections.at("graph.distances"));
    g.mean_neighbor_dist = unpack_doubles(sections.at("graph.meandist"));
    g.centroids = unpack_matrix(sections.at("graph.centroids"));
    if (g.neighbors.size() != g.n_points * g.k) throw ParseError("model: graph shape mismatch");
    return m;
}

std::uint64_t model_state_hash(const CamelModel& m) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    auto mix_bytes = [&h](const void* p, std::size_t n) {
        const auto* b = static_cast<const unsigned char*>(p);
        for (std::size_t i = 0; i < n; ++i) {
            h ^= b[i];
            h *= 0x100000001b3ull;
        }
    };
    mix_bytes(m.x.data.data(), m.x.data.size() * 8);
    mix_bytes(m.y.data.data(), m.y.data.size() * 8);
    mix_bytes(m.graph.neighbors.data(), m.graph.neighbors.size() * 4);
    mix_bytes(m.graph.distances.data(), m.graph.distances.size() * 8);
    mix_bytes(m.c_high.kappa.data.data(), m.c_high.kappa.data.size() * 8);
    mix_bytes(m.transform.means.data(), m.transform.means.size() * 8);
    mix_bytes(&m.transform.scale, 8);
    return h;
}

}  // namespace camel
