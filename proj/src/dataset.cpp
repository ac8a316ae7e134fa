#include "camel/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

#include "camel/error.hpp"
#include "camel/rng.hpp"

namespace camel {

namespace {

constexpr char kBinMagic[4] = {'C', 'M', 'B', '1'};

double parse_double(std::string_view tok, std::size_t row, std::size_t col) {
    double v = 0.0;
    const char* first = tok.data();
    const char* last = tok.data() + tok.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last)
        throw ParseError("malformed value '" + std::string(tok) + "' at row " +
                         std::to_string(row) + ", col " + std::to_string(col));
    if (!std::isfinite(v))
        throw DataError("non-finite value at row " + std::to_string(row) + ", col " +
                        std::to_string(col));
    return v;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

void split_fields(std::string_view line, std::vector<std::string_view>& out) {
    out.clear();
    std::size_t start = 0;
    for (std::size_t i = 0; i <= line.size(); ++i) {
        if (i == line.size() || line[i] == ',') {
            out.push_back(trim(line.substr(start, i - start)));
            start = i + 1;
        }
    }
}

std::uint32_t read_u32_be(std::istream& in) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    return (std::uint32_t(b[0]) << 24) | (std::uint32_t(b[1]) << 16) | (std::uint32_t(b[2]) << 8) |
           std::uint32_t(b[3]);
}

std::uint32_t read_u32_le(std::istream& in) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    return std::uint32_t(b[0]) | (std::uint32_t(b[1]) << 8) | (std::uint32_t(b[2]) << 16) |
           (std::uint32_t(b[3]) << 24);
}

void write_u32_le(std::ostream& out, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                          static_cast<unsigned char>((v >> 8) & 0xff),
                          static_cast<unsigned char>((v >> 16) & 0xff),
                          static_cast<unsigned char>((v >> 24) & 0xff)};
    out.write(reinterpret_cast<char*>(b), 4);
}

}  // namespace

std::size_t LabelVector::n_labeled() const {
    if (mask.empty()) return raw.size();
    std::size_t n = 0;
    for (auto b : mask) n += (b != 0);
    return n;
}

Matrix load_csv(const std::string& path, bool header) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open '" + path + "'");
    Matrix m;
    std::string line;
    std::vector<std::string_view> fields;
    std::size_t row = 0;
    bool skipped_header = !header;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        if (!skipped_header) {
            skipped_header = true;
            continue;
        }
        split_fields(line, fields);
        if (m.cols == 0) {
            m.cols = fields.size();
        } else if (fields.size() != m.cols) {
            throw ParseError("row " + std::to_string(row) + " has " +
                             std::to_string(fields.size()) + " fields, expected " +
                             std::to_string(m.cols));
        }
        for (std::size_t c = 0; c < fields.size(); ++c)
            m.data.push_back(parse_double(fields[c], row, c));
        ++row;
    }
    m.rows = row;
    if (m.rows == 0 || m.cols == 0) throw DataError("empty matrix in '" + path + "'");
    return m;
}

void save_csv(const std::string& path, const Matrix& m, bool header) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write '" + path + "'");
    char buf[64];
    if (header) {
        for (std::size_t c = 0; c < m.cols; ++c)
            out << (c ? ",dim" : "dim") << c;
        out << '\n';
    }
    for (std::size_t r = 0; r < m.rows; ++r) {
        for (std::size_t c = 0; c < m.cols; ++c) {
            const int n = std::snprintf(buf, sizeof buf, "%.17g", m.at(r, c));
            if (c) out << ',';
            out.write(buf, n);
        }
        out << '\n';
    }
}

Matrix load_binary_f32(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open '" + path + "'");
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kBinMagic, 4) != 0)
        throw ParseError("bad magic in '" + path + "'");
    const std::uint32_t version = read_u32_le(in);
    if (version != 1) throw ParseError("unsupported binary version " + std::to_string(version));
    const std::uint32_t n = read_u32_le(in);
    const std::uint32_t d = read_u32_le(in);
    if (n == 0 || d == 0) throw DataError("degenerate dimensions in '" + path + "'");
    Matrix m(n, d);
    std::vector<float> buf(std::size_t(n) * d);
    in.read(reinterpret_cast<char*>(buf.data()), std::streamsize(buf.size() * sizeof(float)));
    if (!in) throw ParseError("truncated payload in '" + path + "'");
    for (std::size_t i = 0; i < buf.size(); ++i) {
        if (!std::isfinite(buf[i]))
            throw DataError("non-finite value at row " + std::to_string(i / d) + ", col " +
                            std::to_string(i % d));
        m.data[i] = buf[i];
    }
    return m;
}

void save_binary_f32(const std::string& path, const Matrix& m) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write '" + path + "'");
    out.write(kBinMagic, 4);
    write_u32_le(out, 1);
    write_u32_le(out, static_cast<std::uint32_t>(m.rows));
    write_u32_le(out, static_cast<std::uint32_t>(m.cols));
    std::vector<float> buf(m.data.size());
    for (std::size_t i = 0; i < buf.size(); ++i) buf[i] = static_cast<float>(m.data[i]);
    out.write(reinterpret_cast<const char*>(buf.data()), std::streamsize(buf.size() * sizeof(float)));
}

Matrix load_idx_images(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open '" + path + "'");
    const std::uint32_t magic = read_u32_be(in);
    if (magic != 0x00000803) throw ParseError("not an IDX image file: '" + path + "'");
    const std::uint32_t n = read_u32_be(in);
    const std::uint32_t rows = read_u32_be(in);
    const std::uint32_t cols = read_u32_be(in);
    Matrix m(n, std::size_t(rows) * cols);
    std::vector<unsigned char> buf(m.data.size());
    in.read(reinterpret_cast<char*>(buf.data()), std::streamsize(buf.size()));
    if (!in) throw ParseError("truncated IDX payload in '" + path + "'");
    for (std::size_t i = 0; i < buf.size(); ++i) m.data[i] = buf[i];
    return m;
}

LabelVector load_idx_labels(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open '" + path + "'");
    const std::uint32_t magic = read_u32_be(in);
    if (magic != 0x00000801) throw ParseError("not an IDX label file: '" + path + "'");
    const std::uint32_t n = read_u32_be(in);
    std::vector<unsigned char> buf(n);
    in.read(reinterpret_cast<char*>(buf.data()), std::streamsize(buf.size()));
    if (!in) throw ParseError("truncated IDX payload in '" + path + "'");
    LabelVector lv;
    lv.kind = LabelKind::categorical;
    int max_class = 0;
    for (auto b : buf) max_class = std::max(max_class, int(b));
    lv.raw.reserve(n);
    for (auto b : buf) lv.raw.push_back(double(b));
    for (int c = 0; c <= max_class; ++c) lv.class_names.push_back(std::to_string(c));
    return lv;
}

LabelVector load_labels_csv(const std::string& path, std::optional<LabelKind> forced) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open '" + path + "'");
    std::vector<std::string> tokens;
    std::string line;
    while (std::getline(in, line)) {
        std::string_view t = trim(line);
        if (t.empty() && in.peek() == EOF && !tokens.empty()) break;
        tokens.emplace_back(t);
    }
    // drop a single trailing blank line
    while (!tokens.empty() && tokens.back().empty() &&
           std::count(tokens.begin(), tokens.end(), std::string()) == 1)
        tokens.pop_back();
    if (tokens.empty()) throw DataError("empty label file '" + path + "'");

    bool numeric = true;
    for (const auto& t : tokens) {
        if (t.empty()) continue;  // missing label
        double v;
        auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
        if (ec != std::errc() || ptr != t.data() + t.size()) {
            numeric = false;
            break;
        }
    }
    LabelKind kind = forced.value_or(numeric ? LabelKind::numerical : LabelKind::categorical);
    if (kind == LabelKind::numerical && !numeric)
        throw ParseError("non-numeric label in '" + path + "' but numerical kind requested");

    LabelVector lv;
    lv.kind = kind;
    lv.raw.resize(tokens.size(), 0.0);
    lv.mask.assign(tokens.size(), 1);
    bool any_missing = false;
    if (kind == LabelKind::numerical) {
        for (std::size_t i = 0; i < tokens.size(); ++i) {
            if (tokens[i].empty()) {
                lv.mask[i] = 0;
                any_missing = true;
                continue;
            }
            lv.raw[i] = parse_double(tokens[i], i, 0);
        }
    } else {
        std::map<std::string, int> codes;
        for (const auto& t : tokens)
            if (!t.empty()) codes.emplace(t, 0);
        int next = 0;
        for (auto& [name, code] : codes) code = next++;  // sorted order -> stable coding
        lv.class_names.resize(codes.size());
        for (const auto& [name, code] : codes) lv.class_names[code] = name;
        for (std::size_t i = 0; i < tokens.size(); ++i) {
            if (tokens[i].empty()) {
                lv.mask[i] = 0;
                any_missing = true;
                continue;
            }
            lv.raw[i] = codes[tokens[i]];
        }
    }
    if (!any_missing) lv.mask.clear();
    return lv;
}

std::vector<std::uint8_t> load_mask_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open '" + path + "'");
    std::vector<std::uint8_t> mask;
    std::string line;
    while (std::getline(in, line)) {
        std::string_view t = trim(line);
        if (t.empty()) continue;
        if (t == "1" || t == "true")
            mask.push_back(1);
        else if (t == "0" || t == "false")
            mask.push_back(0);
        else
            throw ParseError("mask entry must be 0/1/true/false, got '" + std::string(t) + "'");
    }
    return mask;
}

std::uint64_t file_fingerprint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open '" + path + "'");
    std::uint64_t h = 0xcbf29ce484222325ull;
    char buf[8192];
    while (in.read(buf, sizeof buf) || in.gcount() > 0) {
        for (std::streamsize i = 0; i < in.gcount(); ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 0x100000001b3ull;
        }
        if (!in) break;
    }
    return h;
}

std::pair<Matrix, PreprocessTransform> preprocess(const Matrix& x) {
    if (x.rows < 2) throw DataError("preprocess needs at least 2 samples");
    PreprocessTransform t;
    t.means.assign(x.cols, 0.0);
    for (std::size_t r = 0; r < x.rows; ++r)
        for (std::size_t c = 0; c < x.cols; ++c) t.means[c] += x.at(r, c);
    for (auto& m : t.means) m /= double(x.rows);

    double ss = 0.0;
    for (std::size_t r = 0; r < x.rows; ++r)
        for (std::size_t c = 0; c < x.cols; ++c) {
            const double d = x.at(r, c) - t.means[c];
            ss += d * d;
        }
    const double std_all = std::sqrt(ss / double(x.rows * x.cols));
    if (std_all < 1e-15) throw DataError("degenerate input: zero variance (all rows identical)");
    t.scale = std_all;
    return {apply_transform(x, t), t};
}

Matrix apply_transform(const Matrix& x, const PreprocessTransform& t) {
    if (x.cols != t.means.size()) throw DataError("transform dimension mismatch");
    Matrix out(x.rows, x.cols);
    for (std::size_t r = 0; r < x.rows; ++r)
        for (std::size_t c = 0; c < x.cols; ++c)
            out.at(r, c) = (x.at(r, c) - t.means[c]) / t.scale;
    return out;
}

Matrix invert_transform(const Matrix& x, const PreprocessTransform& t) {
    if (x.cols != t.means.size()) throw DataError("transform dimension mismatch");
    Matrix out(x.rows, x.cols);
    for (std::size_t r = 0; r < x.rows; ++r)
        for (std::size_t c = 0; c < x.cols; ++c)
            out.at(r, c) = x.at(r, c) * t.scale + t.means[c];
    return out;
}

namespace {

Matrix encode_block(const LabelVector& labels) {
    const std::size_t n = labels.size();
    if (labels.kind == LabelKind::numerical) {
        Matrix m(n, 1);
        for (std::size_t i = 0; i < n; ++i) m.at(i, 0) = labels.raw[i];
        return m;
    }
    const std::size_t c = std::max<std::size_t>(labels.n_classes(), 1);
    Matrix m(n, c);
    for (std::size_t i = 0; i < n; ++i) m.at(i, std::size_t(labels.raw[i])) = 1.0;
    return m;
}

// Mean pairwise Euclidean distance of two matrices over the same sampled pairs.
std::pair<double, double> mean_pair_distances(const Matrix& a, const Matrix& b,
                                              std::size_t sample_size, std::uint64_t seed) {
    const std::size_t n = a.rows;
    Rng rng(seed);
    double sa = 0.0, sb = 0.0;
    std::size_t taken = 0;
    const std::size_t want = std::max<std::size_t>(1, sample_size);
    while (taken < want) {
        const std::size_t i = rng.below(n);
        const std::size_t j = rng.below(n);
        if (i == j) continue;
        sa += euclidean_distance(a.row(i), a.row(j));
        sb += euclidean_distance(b.row(i), b.row(j));
        ++taken;
    }
    return {sa / double(taken), sb / double(taken)};
}

}  // namespace

EncodedLabels encode_labels(const LabelVector& labels, const Matrix& x, double w_label,
                            std::size_t sample_size, std::uint64_t seed) {
    if (labels.size() != x.rows) throw DataError("label length does not match sample count");
    if (labels.n_labeled() == 0) throw DataError("no labels present");
    if (w_label < 0.0 || w_label >= 1.0)
        throw UsageError("w_label must lie in [0, 1); clamp 1 to 0.99 before calling");

    EncodedLabels enc;
    enc.matrix = encode_block(labels);
    if (w_label == 0.0 || x.rows < 2) {
        enc.scale = 0.0;
        return enc;
    }
    auto [dist_x, dist_label] = mean_pair_distances(x, enc.matrix, sample_size, seed);
    if (dist_label < 1e-15 || dist_x < 1e-15) {
        enc.scale = 0.0;  // uniform labels (or coincident points) carry no graph information
        return enc;
    }
    enc.scale = w_label / (1.0 - w_label) * dist_x / dist_label;
    return enc;
}

EncodedLabels encode_label_blocks(const std::vector<LabelVector>& labels, const Matrix& x,
                                  double w_label, std::size_t sample_size, std::uint64_t seed) {
    if (labels.empty()) throw DataError("no label blocks");
    std::vector<EncodedLabels> blocks;
    std::size_t total_cols = 0;
    for (std::size_t b = 0; b < labels.size(); ++b) {
        blocks.push_back(encode_labels(labels[b], x, w_label, sample_size, derive_seed(seed, "block", b)));
        total_cols += blocks.back().matrix.cols;
    }
    EncodedLabels out;
    out.matrix = Matrix(x.rows, total_cols);
    out.scale = 1.0;  // per-block scales are baked into the concatenated values
    std::size_t off = 0;
    for (const auto& blk : blocks) {
        for (std::size_t r = 0; r < x.rows; ++r)
            for (std::size_t c = 0; c < blk.matrix.cols; ++c)
                out.matrix.at(r, off + c) = blk.scale * blk.matrix.at(r, c);
        off += blk.matrix.cols;
    }
    return out;
}

std::pair<Matrix, LabelVector> gen_swiss_roll(std::size_t n, double noise, std::uint64_t seed) {
    if (n == 0) throw UsageError("swiss roll needs n >= 1");
    Rng rng(seed);
    Matrix x(n, 3);
    LabelVector lv;
    lv.kind = LabelKind::numerical;
    lv.raw.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double t = kSwissRollTMin + (kSwissRollTMax - kSwissRollTMin) * rng.uniform();
        const double h = 21.0 * rng.uniform();
        x.at(i, 0) = t * std::cos(t);
        x.at(i, 1) = h;
        x.at(i, 2) = t * std::sin(t);
        if (noise > 0.0)
            for (std::size_t c = 0; c < 3; ++c) x.at(i, c) += noise * rng.normal();
        lv.raw[i] = t;
    }
    return {std::move(x), std::move(lv)};
}

std::pair<Matrix, LabelVector> gen_blobs(std::size_t n, std::size_t n_classes, std::size_t dim,
                                         double spread, std::uint64_t seed) {
    if (n == 0 || n_classes == 0 || dim == 0) throw UsageError("gen_blobs needs n, classes, dim >= 1");
    Rng center_rng(derive_seed(seed, "centers"));
    Matrix centers(n_classes, dim);
    for (auto& v : centers.data) v = 10.0 * center_rng.normal();
    Rng rng(seed);
    Matrix x(n, dim);
    LabelVector lv;
    lv.kind = LabelKind::categorical;
    lv.raw.resize(n);
    for (std::size_t c = 0; c < n_classes; ++c) lv.class_names.push_back(std::to_string(c));
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t cls = i % n_classes;
        lv.raw[i] = double(cls);
        for (std::size_t d = 0; d < dim; ++d)
            x.at(i, d) = centers.at(cls, d) + spread * rng.normal();
    }
    return {std::move(x), std::move(lv)};
}

}  // namespace camel
