#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "camel/error.hpp"
#include "camel/optimizer.hpp"
#include "camel/rng.hpp"

namespace camel {

namespace {

constexpr std::size_t kExactEigenMaxDim = 512;

Eigen::MatrixXd centered(const Matrix& x) {
    Eigen::MatrixXd m(x.rows, x.cols);
    for (std::size_t r = 0; r < x.rows; ++r)
        for (std::size_t c = 0; c < x.cols; ++c) m(Eigen::Index(r), Eigen::Index(c)) = x.at(r, c);
    m.rowwise() -= m.colwise().mean();
    return m;
}

Matrix to_matrix(const Eigen::MatrixXd& m) {
    Matrix out(std::size_t(m.rows()), std::size_t(m.cols()));
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c) out.at(std::size_t(r), std::size_t(c)) = m(r, c);
    return out;
}

Matrix pca_exact(const Matrix& x, std::size_t d) {
    const Eigen::MatrixXd xc = centered(x);
    const Eigen::MatrixXd cov = xc.transpose() * xc / double(std::max<std::size_t>(x.rows - 1, 1));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
    if (es.info() != Eigen::Success) throw DataError("pca: eigendecomposition failed");
    // eigenvalues come out ascending; take the trailing d columns reversed
    Eigen::MatrixXd v(x.cols, d);
    for (std::size_t c = 0; c < d; ++c)
        v.col(Eigen::Index(c)) = es.eigenvectors().col(Eigen::Index(x.cols - 1 - c));
    return to_matrix(xc * v);
}

// Randomized range-finder sketch with power iterations; accurate to the
// spectral-gap limit, which the unit oracle checks on gapped instances.
Matrix pca_sketch(const Matrix& x, std::size_t d, std::uint64_t seed) {
    const Eigen::MatrixXd xc = centered(x);
    const Eigen::Index cols = xc.cols();
    const Eigen::Index p = Eigen::Index(std::min<std::size_t>(d + 8, x.cols));
    Rng rng(derive_seed(seed, "pca-sketch"));
    Eigen::MatrixXd omega(cols, p);
    for (Eigen::Index i = 0; i < cols; ++i)
        for (Eigen::Index j = 0; j < p; ++j) omega(i, j) = rng.normal();
    Eigen::MatrixXd z = xc * omega;
    for (int it = 0; it < 7; ++it) {
        z = Eigen::HouseholderQR<Eigen::MatrixXd>(z).householderQ() *
            Eigen::MatrixXd::Identity(z.rows(), p);
        z = xc * (xc.transpose() * z);
    }
    const Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(z).householderQ() *
                              Eigen::MatrixXd::Identity(z.rows(), p);
    const Eigen::MatrixXd b = q.transpose() * xc;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(b, Eigen::ComputeThinV);
    const Eigen::MatrixXd v = svd.matrixV().leftCols(Eigen::Index(d));
    return to_matrix(xc * v);
}

}  // namespace

Matrix pca_scores(const Matrix& x, std::size_t d, std::uint64_t seed) {
    if (d > x.cols) throw DataError("pca: d exceeds feature dimension");
    if (x.rows < 2) throw DataError("pca: need at least 2 samples");
    return x.cols <= kExactEigenMaxDim ? pca_exact(x, d) : pca_sketch(x, d, seed);
}

Matrix init_embedding(const Matrix& x, std::size_t d, InitMode mode, std::uint64_t seed) {
    if (mode == InitMode::random) {
        Rng rng(derive_seed(seed, "init-random"));
        Matrix y(x.rows, d);
        for (auto& v : y.data) v = 0.01 * rng.normal();
        return y;
    }
    if (mode != InitMode::pca) throw UsageError("init_embedding supports pca or random");
    Matrix y = pca_scores(x, d, seed);
    Rng rng(derive_seed(seed, "init-pca-degenerate"));
    for (std::size_t c = 0; c < y.cols; ++c) {
        double mean = 0.0, ss = 0.0;
        for (std::size_t r = 0; r < y.rows; ++r) mean += y.at(r, c);
        mean /= double(y.rows);
        for (std::size_t r = 0; r < y.rows; ++r) {
            const double t = y.at(r, c) - mean;
            ss += t * t;
        }
        const double sd = std::sqrt(ss / double(y.rows));
        if (sd < 1e-15) {
            // rank-deficient input: a zero-variance column would trap every
            // force on a lower-dimensional subspace
            for (std::size_t r = 0; r < y.rows; ++r) y.at(r, c) = 0.01 * rng.normal();
        } else {
            for (std::size_t r = 0; r < y.rows; ++r) y.at(r, c) = (y.at(r, c) - mean) * 0.01 / sd;
        }
    }
    return y;
}

Matrix init_interpolation(const NeighborGraph& queries_to_refs, const Matrix& ref_coords) {
    if (queries_to_refs.k == 0) throw DataError("init_interpolation: empty neighbor lists");
    if (ref_coords.rows != queries_to_refs.n_anchors)
        throw DataError("init_interpolation: reference count mismatch");
    Matrix y(queries_to_refs.n_points, ref_coords.cols);
    for (std::size_t i = 0; i < y.rows; ++i) {
        auto row = y.row(i);
        for (std::size_t r = 0; r < queries_to_refs.k; ++r) {
            const auto j = queries_to_refs.neighbor(i, r);
            for (std::size_t c = 0; c < y.cols; ++c) row[c] += ref_coords.at(j, c);
        }
        for (std::size_t c = 0; c < y.cols; ++c) row[c] /= double(queries_to_refs.k);
    }
    return y;
}

}  // namespace camel
