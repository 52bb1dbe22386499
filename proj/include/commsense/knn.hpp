#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "commsense/dataset.hpp"
#include "commsense/error.hpp"
#include "commsense/parallel.hpp"
#include "commsense/pca.hpp"

namespace commsense {

/**
 * @brief Nearest-neighbor crowd-size classifier over PCA features.
 *
 * Stores `per_category` exemplars for every category, flattened row-major.
 * Classification is an exact linear scan under squared Euclidean distance;
 * distance ties resolve to the lower category, and ties within a category
 * to the exemplar stored first.
 */
struct KnnModel {
    std::size_t dim = 0;
    std::vector<double> exemplars;  // rows x dim
    std::vector<int> labels;        // 1-based category per exemplar row

    std::size_t size() const { return labels.size(); }
};

/// Builds the exemplar store from labeled feature vectors, taking the first
/// `per_category` vectors of every category in input order.
inline KnnModel train_knn(const std::vector<FeatureVector>& features, int per_category) {
    if (per_category < 1) throw DomainError("train_knn: per_category must be >= 1");
    if (features.empty()) throw DomainError("train_knn: no training features");

    int n_categories = 0;
    for (const auto& f : features) {
        if (!f.label) throw DomainError("train_knn: every training feature needs a label");
        if (*f.label < 1) throw DomainError("train_knn: labels are 1-based");
        n_categories = std::max(n_categories, *f.label);
    }

    KnnModel model;
    model.dim = features.front().scores.size();
    const auto want = static_cast<std::size_t>(per_category);
    std::vector<std::vector<std::size_t>> chosen(static_cast<std::size_t>(n_categories));
    for (std::size_t i = 0; i < features.size(); ++i) {
        if (features[i].scores.size() != model.dim)
            throw DomainError("train_knn: features must share one dimension");
        auto& bucket = chosen[static_cast<std::size_t>(*features[i].label - 1)];
        if (bucket.size() < want) bucket.push_back(i);
    }
    for (std::size_t c = 0; c < chosen.size(); ++c) {
        if (chosen[c].size() < want)
            throw DomainError("train_knn: category " + std::to_string(c + 1) + " supplies only " +
                              std::to_string(chosen[c].size()) + " of " +
                              std::to_string(per_category) + " exemplars");
        for (std::size_t i : chosen[c]) {
            model.exemplars.insert(model.exemplars.end(), features[i].scores.begin(),
                                   features[i].scores.end());
            model.labels.push_back(static_cast<int>(c) + 1);
        }
    }
    return model;
}

/// Exact 1-NN classification of one feature vector.
inline int classify(const KnnModel& model, std::span<const double> scores) {
    if (model.size() == 0) throw DomainError("classify: empty model");
    if (scores.size() != model.dim)
        throw DomainError("classify: feature dimension does not match the model");
    double best_d2 = 0.0;
    int best_label = 0;
    for (std::size_t e = 0; e < model.size(); ++e) {
        const double* x = model.exemplars.data() + e * model.dim;
        double d2 = 0.0;
        for (std::size_t j = 0; j < model.dim; ++j) {
            const double diff = scores[j] - x[j];
            d2 += diff * diff;
        }
        if (best_label == 0 || d2 < best_d2 ||
            (d2 == best_d2 && model.labels[e] < best_label)) {
            best_d2 = d2;
            best_label = model.labels[e];
        }
    }
    return best_label;
}

/// Square matrix of classification outcomes; rows are true categories,
/// columns predictions, both 1-based.
struct ConfusionMatrix {
    int n = 0;
    std::vector<std::int64_t> counts;  // n x n, row-major

    explicit ConfusionMatrix(int categories = 0)
        : n(categories),
          counts(static_cast<std::size_t>(categories) * static_cast<std::size_t>(categories), 0) {}

    std::int64_t& at(int true_cat, int predicted) {
        return counts[index(true_cat, predicted)];
    }
    std::int64_t at(int true_cat, int predicted) const { return counts[index(true_cat, predicted)]; }

    std::int64_t trace() const {
        std::int64_t t = 0;
        for (int i = 1; i <= n; ++i) t += at(i, i);
        return t;
    }

    std::int64_t total() const {
        std::int64_t t = 0;
        for (auto c : counts) t += c;
        return t;
    }

private:
    std::size_t index(int true_cat, int predicted) const {
        if (true_cat < 1 || true_cat > n || predicted < 1 || predicted > n)
            throw DomainError("confusion matrix index out of range");
        return static_cast<std::size_t>(true_cat - 1) * static_cast<std::size_t>(n) +
               static_cast<std::size_t>(predicted - 1);
    }
};

/// Fraction of correct predictions: trace over grand total.
inline double accuracy(const ConfusionMatrix& cm) {
    const std::int64_t total = cm.total();
    if (total == 0) throw DomainError("accuracy: empty confusion matrix");
    return static_cast<double>(cm.trace()) / static_cast<double>(total);
}

/// Classifies every query and tallies the outcomes. `n_categories` must
/// cover both the model's and the queries' labels.
inline ConfusionMatrix evaluate(const KnnModel& model, const std::vector<FeatureVector>& queries,
                                int n_categories, int threads = 1) {
    if (n_categories < 1) throw DomainError("evaluate: need at least one category");
    for (const auto& q : queries) {
        if (!q.label) throw DomainError("evaluate: every query needs a true label");
        if (*q.label < 1 || *q.label > n_categories)
            throw DomainError("evaluate: query label out of range");
    }
    for (int l : model.labels)
        if (l > n_categories) throw DomainError("evaluate: model label out of range");

    std::vector<int> predicted(queries.size());
    parallel_for(queries.size(), threads,
                 [&](std::size_t i) { predicted[i] = classify(model, queries[i].scores); });

    ConfusionMatrix cm(n_categories);
    for (std::size_t i = 0; i < queries.size(); ++i) ++cm.at(*queries[i].label, predicted[i]);
    return cm;
}

/// One train/test split size, counted per category.
struct Split {
    int train = 0;
    int test = 0;
};

/// Outcome of one split of the accuracy grid.
struct GridRow {
    Split split;
    ConfusionMatrix confusion;
    double accuracy = 0.0;
};

/**
 * @brief Train/test accuracy over a ladder of split sizes.
 *
 * For each split the first `train` rows of every category (in dataset
 * order) train a fresh PCA + 1-NN pair and the next `test` rows are
 * classified, so features never leak test information. A category too
 * small for train+test raises a DomainError naming the split.
 */
inline std::vector<GridRow> accuracy_grid(const CsiDataset& ds, const std::vector<Split>& splits,
                                          std::size_t pca_k = 3, int threads = 1) {
    const auto by_cat = ds.rows_by_category();
    const int n_categories = ds.n_categories();
    std::vector<GridRow> grid;
    grid.reserve(splits.size());
    for (const auto& split : splits) {
        if (split.train < 1 || split.test < 1)
            throw DomainError("accuracy_grid: split sizes must be positive");
        const auto need = static_cast<std::size_t>(split.train) +
                          static_cast<std::size_t>(split.test);
        for (std::size_t c = 0; c < by_cat.size(); ++c) {
            if (by_cat[c].size() < need)
                throw DomainError("accuracy_grid: split " + std::to_string(split.train) + "/" +
                                  std::to_string(split.test) + " needs " + std::to_string(need) +
                                  " rows of category " + std::to_string(c + 1) + " but only " +
                                  std::to_string(by_cat[c].size()) + " exist");
        }

        CsiDataset train_ds;
        train_ds.dim = ds.dim;
        for (std::size_t c = 0; c < by_cat.size(); ++c)
            for (int i = 0; i < split.train; ++i)
                train_ds.append(ds.row(by_cat[c][static_cast<std::size_t>(i)]),
                                static_cast<int>(c) + 1);

        const PcaModel pca = fit_pca(train_ds, pca_k);
        const auto train_features = project_all(pca, train_ds);
        const KnnModel knn = train_knn(train_features, split.train);

        std::vector<FeatureVector> queries;
        queries.reserve(static_cast<std::size_t>(split.test) * by_cat.size());
        for (std::size_t c = 0; c < by_cat.size(); ++c)
            for (int i = 0; i < split.test; ++i) {
                const std::size_t r = by_cat[c][static_cast<std::size_t>(split.train + i)];
                queries.push_back(project(pca, ds.row(r), static_cast<int>(c) + 1));
            }

        GridRow row;
        row.split = split;
        row.confusion = evaluate(knn, queries, n_categories, threads);
        row.accuracy = accuracy(row.confusion);
        grid.push_back(std::move(row));
    }
    return grid;
}

} // namespace commsense
