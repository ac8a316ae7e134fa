#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "camel/matrix.hpp"

namespace camel {

enum class LabelKind { categorical, numerical };

// One label column. `mask` marks which samples carry a label (empty = all).
// Categorical values are stored as class codes 0..C-1 with `class_names`
// mapping codes back to the original tokens.
struct LabelVector {
    LabelKind kind = LabelKind::categorical;
    std::vector<double> raw;
    std::vector<std::string> class_names;
    std::vector<std::uint8_t> mask;

    std::size_t size() const { return raw.size(); }
    bool has(std::size_t i) const { return mask.empty() || mask[i] != 0; }
    std::size_t n_labeled() const;
    bool all_present() const { return n_labeled() == size(); }
    std::size_t n_classes() const { return class_names.size(); }
};

// Label block encoded for distance computation: one-hot columns for
// categorical labels, the raw values as a single column for numerical ones.
// `scale` is the multiplier applied before concatenation with features.
struct EncodedLabels {
    Matrix matrix;
    double scale = 0.0;
};

// Centering/scaling transform captured at preprocess time so test data can be
// mapped with the training parameters.
struct PreprocessTransform {
    std::vector<double> means;
    double scale = 1.0;
};

// ---- File I/O -------------------------------------------------------------

Matrix load_csv(const std::string& path, bool header = false);
void save_csv(const std::string& path, const Matrix& m, bool header = false);

// binary-f32: 16-byte header (magic "CMB1", u32 version, u32 N, u32 D,
// little-endian) followed by N*D float32 values.
Matrix load_binary_f32(const std::string& path);
void save_binary_f32(const std::string& path, const Matrix& m);

// MNIST-style IDX files (big-endian magic 0x803 for images, 0x801 for labels).
Matrix load_idx_images(const std::string& path);
LabelVector load_idx_labels(const std::string& path);

LabelVector load_labels_csv(const std::string& path, std::optional<LabelKind> forced = std::nullopt);
std::vector<std::uint8_t> load_mask_csv(const std::string& path);

std::uint64_t file_fingerprint(const std::string& path);

// ---- Preprocessing --------------------------------------------------------

// Center each feature, then divide by the single matrix-wide standard
// deviation. Throws DataError if the matrix has zero variance.
std::pair<Matrix, PreprocessTransform> preprocess(const Matrix& x);
Matrix apply_transform(const Matrix& x, const PreprocessTransform& t);
Matrix invert_transform(const Matrix& x, const PreprocessTransform& t);

// ---- Label encoding -------------------------------------------------------

// Eq.-24 scaling: scale = w/(1-w) * mean_pair_dist(X) / mean_pair_dist(label),
// the distance ratio estimated from `sample_size` random point pairs.
// Requires 0 <= w_label < 1 (callers clamp 1 -> 0.99 with a warning).
EncodedLabels encode_labels(const LabelVector& labels, const Matrix& x, double w_label,
                            std::size_t sample_size, std::uint64_t seed);

// Multi-label variant: each block encoded and scaled independently, then
// concatenated column-wise.
EncodedLabels encode_label_blocks(const std::vector<LabelVector>& labels, const Matrix& x,
                                  double w_label, std::size_t sample_size, std::uint64_t seed);

// ---- Synthetic data -------------------------------------------------------

// Classic swiss roll (t cos t, h, t sin t) with t in [1.5pi, 4.5pi] and
// h in [0, 21]. Numerical label = t.
std::pair<Matrix, LabelVector> gen_swiss_roll(std::size_t n, double noise, std::uint64_t seed);

// Isotropic Gaussian blobs; categorical label = blob index.
std::pair<Matrix, LabelVector> gen_blobs(std::size_t n, std::size_t n_classes, std::size_t dim,
                                         double spread, std::uint64_t seed);

inline constexpr double kSwissRollTMin = 1.5 * 3.14159265358979323846;
inline constexpr double kSwissRollTMax = 4.5 * 3.14159265358979323846;

}  // namespace camel
