#include <catch2/catch_amalgamated.hpp>

#include <vector>

#include "commsense/knn.hpp"
#include "commsense/rng.hpp"

using namespace commsense;

namespace {

FeatureVector fv(std::vector<double> scores, int label) {
    FeatureVector f;
    f.scores = std::move(scores);
    f.label = label;
    return f;
}

// Three well-separated clusters, labels interleaved 1,2,3,1,2,3,...
CsiDataset clustered_dataset(std::size_t per_category, std::size_t dim, std::uint64_t seed) {
    auto rng = Rng::keyed(seed, 42);
    CsiDataset ds;
    ds.dim = dim;
    std::vector<double> row(dim);
    for (std::size_t i = 0; i < per_category; ++i) {
        for (int cat = 1; cat <= 3; ++cat) {
            for (std::size_t j = 0; j < dim; ++j)
                row[j] = 2.0 * cat + 0.3 * rng.normal() + 0.1 * static_cast<double>(j);
            ds.append(row, cat);
        }
    }
    return ds;
}

} // namespace

TEST_CASE("training keeps the first exemplars of each category in input order") {
    const std::vector<FeatureVector> features{
        fv({10.0, 0.0}, 2), fv({1.0, 0.0}, 1), fv({2.0, 0.0}, 1),
        fv({11.0, 0.0}, 2), fv({3.0, 0.0}, 1),
    };
    const auto model = train_knn(features, 2);
    REQUIRE(model.dim == 2);
    REQUIRE(model.labels == std::vector<int>{1, 1, 2, 2});
    REQUIRE(model.exemplars ==
            std::vector<double>{1.0, 0.0, 2.0, 0.0, 10.0, 0.0, 11.0, 0.0});
}

TEST_CASE("a category without enough exemplars is reported by name") {
    const std::vector<FeatureVector> features{
        fv({1.0}, 1), fv({2.0}, 1), fv({3.0}, 1), fv({10.0}, 2), fv({11.0}, 2),
    };
    REQUIRE_THROWS_WITH(train_knn(features, 3),
                        Catch::Matchers::ContainsSubstring("category 2") &&
                            Catch::Matchers::ContainsSubstring("2 of 3"));
}

TEST_CASE("training rejects malformed feature sets") {
    std::vector<FeatureVector> features{fv({1.0}, 1)};
    REQUIRE_THROWS_AS(train_knn(features, 0), DomainError);
    REQUIRE_THROWS_AS(train_knn({}, 1), DomainError);

    FeatureVector unlabeled;
    unlabeled.scores = {1.0};
    REQUIRE_THROWS_AS(train_knn({unlabeled}, 1), DomainError);
    REQUIRE_THROWS_AS(train_knn({fv({1.0}, 0)}, 1), DomainError);
    REQUIRE_THROWS_AS(train_knn({fv({1.0}, 1), fv({1.0, 2.0}, 1)}, 1), DomainError);
}

TEST_CASE("classification picks the nearest exemplar, ties to the lower category") {
    const auto model = train_knn({fv({1.0, 0.0}, 1), fv({-1.0, 0.0}, 2)}, 1);
    const std::vector<double> near_one{0.8, 0.1};
    const std::vector<double> near_two{-0.9, 0.0};
    const std::vector<double> equidistant{0.0, 0.0};
    REQUIRE(classify(model, near_one) == 1);
    REQUIRE(classify(model, near_two) == 2);
    REQUIRE(classify(model, equidistant) == 1);

    const std::vector<double> wrong_dim{0.0};
    REQUIRE_THROWS_AS(classify(model, wrong_dim), DomainError);
    REQUIRE_THROWS_AS(classify(KnnModel{}, near_one), DomainError);
}

TEST_CASE("the confusion matrix tallies exactly what the classifier returns") {
    const auto model = train_knn({fv({0.0}, 1), fv({10.0}, 2)}, 1);
    const std::vector<FeatureVector> queries{
        fv({0.1}, 1), fv({9.9}, 2), fv({4.9}, 2),
    };
    const auto cm = evaluate(model, queries, 2);
    REQUIRE(cm.at(1, 1) == 1);
    REQUIRE(cm.at(2, 2) == 1);
    REQUIRE(cm.at(2, 1) == 1);
    REQUIRE(cm.at(1, 2) == 0);
    REQUIRE(cm.trace() == 2);
    REQUIRE(cm.total() == 3);
    REQUIRE(accuracy(cm) == Catch::Approx(2.0 / 3.0));
}

TEST_CASE("evaluation is identical across thread counts") {
    const auto ds = clustered_dataset(30, 4, 5);
    const auto pca = fit_pca(ds, 2);
    const auto features = project_all(pca, ds);
    const auto model = train_knn(features, 10);
    const auto serial = evaluate(model, features, 3, 1);
    const auto parallel = evaluate(model, features, 3, 4);
    REQUIRE(serial.counts == parallel.counts);
}

TEST_CASE("evaluate validates labels on both sides") {
    // Built by hand: train_knn itself refuses such a gap in the categories.
    KnnModel model;
    model.dim = 1;
    model.exemplars = {0.0, 10.0};
    model.labels = {1, 3};
    const std::vector<FeatureVector> queries{fv({0.1}, 1)};
    REQUIRE_THROWS_AS(evaluate(model, queries, 2), DomainError);  // model label 3 > 2

    FeatureVector unlabeled;
    unlabeled.scores = {1.0};
    REQUIRE_THROWS_AS(evaluate(model, {unlabeled}, 3), DomainError);
    REQUIRE_THROWS_AS(evaluate(model, {fv({0.1}, 4)}, 3), DomainError);
    REQUIRE_THROWS_AS(evaluate(model, queries, 0), DomainError);
}

TEST_CASE("the accuracy grid matches a hand-built train/test pipeline") {
    const auto ds = clustered_dataset(12, 4, 6);
    const auto grid = accuracy_grid(ds, {{4, 5}}, 2, 3);
    REQUIRE(grid.size() == 1);

    // Same computation spelled out: PCA fitted on the training rows only.
    const auto by_cat = ds.rows_by_category();
    CsiDataset train_ds;
    train_ds.dim = ds.dim;
    for (std::size_t c = 0; c < by_cat.size(); ++c)
        for (int i = 0; i < 4; ++i)
            train_ds.append(ds.row(by_cat[c][static_cast<std::size_t>(i)]),
                            static_cast<int>(c) + 1);
    const auto pca = fit_pca(train_ds, 2);
    const auto knn = train_knn(project_all(pca, train_ds), 4);
    std::vector<FeatureVector> queries;
    for (std::size_t c = 0; c < by_cat.size(); ++c)
        for (int i = 0; i < 5; ++i)
            queries.push_back(project(pca, ds.row(by_cat[c][static_cast<std::size_t>(4 + i)]),
                                      static_cast<int>(c) + 1));
    const auto cm = evaluate(knn, queries, ds.n_categories());

    REQUIRE(grid[0].split.train == 4);
    REQUIRE(grid[0].split.test == 5);
    REQUIRE(grid[0].confusion.counts == cm.counts);
    REQUIRE(grid[0].accuracy == accuracy(cm));
    REQUIRE(grid[0].accuracy > 0.9);  // clusters sit many sigma apart
}

TEST_CASE("an oversized split is refused with its name in the message") {
    const auto ds = clustered_dataset(12, 4, 7);
    REQUIRE_THROWS_WITH(accuracy_grid(ds, {{4, 500}}, 2),
                        Catch::Matchers::ContainsSubstring("4/500") &&
                            Catch::Matchers::ContainsSubstring("category 1"));
    REQUIRE_THROWS_AS(accuracy_grid(ds, {{0, 5}}, 2), DomainError);
}
