#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "camel/error.hpp"
#include "camel/metrics.hpp"
#include "camel/rng.hpp"

namespace camel {

namespace {

// Pegasos-style subgradient descent on the regularized hinge loss for one
// binary problem. Features are assumed standardized by the caller.
struct LinearSvm {
    std::vector<double> w;
    double b = 0.0;

    void train(const Matrix& feats, const std::vector<int>& targets, std::uint64_t seed) {
        const double lambda = 1e-3;
        const std::size_t epochs = 60;
        const std::size_t n = feats.rows;
        w.assign(feats.cols, 0.0);
        b = 0.0;
        Rng rng(seed);
        std::vector<std::uint32_t> order(n);
        std::iota(order.begin(), order.end(), 0);
        std::size_t t = 0;
        for (std::size_t e = 0; e < epochs; ++e) {
            for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
            for (auto i : order) {
                ++t;
                const double eta = 1.0 / (lambda * double(t));
                const double margin = double(targets[i]) * (score(feats.row(i)) );
                for (auto& wc : w) wc *= (1.0 - eta * lambda);
                if (margin < 1.0) {
                    auto row = feats.row(i);
                    for (std::size_t c = 0; c < w.size(); ++c)
                        w[c] += eta * double(targets[i]) * row[c];
                    b += eta * double(targets[i]) * 0.1;  // unregularized bias, damped step
                }
            }
        }
    }

    double score(std::span<const double> x) const {
        double s = b;
        for (std::size_t c = 0; c < w.size(); ++c) s += w[c] * x[c];
        return s;
    }
};

}  // namespace

double svm_classify(const Matrix& y, const LabelVector& labels, std::size_t folds,
                    std::uint64_t seed) {
    if (labels.kind != LabelKind::categorical)
        throw DataError("svm_classify needs categorical labels");
    const std::size_t n = y.rows;
    if (labels.size() != n) throw DataError("svm_classify: label count mismatch");
    const std::size_t n_classes = labels.n_classes();
    if (n_classes < 1) throw DataError("svm_classify: empty label set");
    folds = std::min(std::max<std::size_t>(folds, 2), n);

    std::vector<std::uint32_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    Rng shuffle_rng(derive_seed(seed, "svm-folds"));
    for (std::size_t i = n; i > 1; --i) std::swap(perm[i - 1], perm[shuffle_rng.below(i)]);

    std::size_t correct = 0;
    for (std::size_t fold = 0; fold < folds; ++fold) {
        std::vector<std::uint32_t> train, test;
        for (std::size_t i = 0; i < n; ++i)
            (i % folds == fold ? test : train).push_back(perm[i]);
        if (train.empty() || test.empty()) continue;

        // standardize on the train fold
        std::vector<double> mean(y.cols, 0.0), sd(y.cols, 0.0);
        for (auto i : train)
            for (std::size_t c = 0; c < y.cols; ++c) mean[c] += y.at(i, c);
        for (auto& m : mean) m /= double(train.size());
        for (auto i : train)
            for (std::size_t c = 0; c < y.cols; ++c) {
                const double d = y.at(i, c) - mean[c];
                sd[c] += d * d;
            }
        for (auto& s : sd) s = std::max(std::sqrt(s / double(train.size())), 1e-12);

        auto standardized = [&](const std::vector<std::uint32_t>& rows) {
            Matrix m(rows.size(), y.cols);
            for (std::size_t i = 0; i < rows.size(); ++i)
                for (std::size_t c = 0; c < y.cols; ++c)
                    m.at(i, c) = (y.at(rows[i], c) - mean[c]) / sd[c];
            return m;
        };
        const Matrix ftrain = standardized(train);
        const Matrix ftest = standardized(test);

        std::vector<LinearSvm> machines(n_classes);
        for (std::size_t cls = 0; cls < n_classes; ++cls) {
            std::vector<int> targets(train.size());
            for (std::size_t i = 0; i < train.size(); ++i)
                targets[i] = std::size_t(labels.raw[train[i]]) == cls ? 1 : -1;
            machines[cls].train(ftrain, targets, derive_seed(seed, "svm", fold * n_classes + cls));
        }
        for (std::size_t i = 0; i < test.size(); ++i) {
            std::size_t best = 0;
            double best_score = -1e300;
            for (std::size_t cls = 0; cls < n_classes; ++cls) {
                const double s = machines[cls].score(ftest.row(i));
                if (s > best_score) {
                    best_score = s;
                    best = cls;
                }
            }
            if (best == std::size_t(labels.raw[test[i]])) ++correct;
        }
    }
    return double(correct) / double(n);
}

}  // namespace camel
