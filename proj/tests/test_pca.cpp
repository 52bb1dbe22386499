#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <vector>

#include "commsense/pca.hpp"
#include "commsense/rng.hpp"

using namespace commsense;
namespace fs = std::filesystem;

namespace {

// Dense random symmetric matrix with entries in [-1, 1].
std::vector<double> random_symmetric(std::size_t n, std::uint64_t seed) {
    auto rng = Rng::keyed(seed, 0);
    std::vector<double> a(n * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j) {
            a[i * n + j] = rng.uniform(-1.0, 1.0);
            a[j * n + i] = a[i * n + j];
        }
    return a;
}

// Anisotropic Gaussian cloud so the spectrum has a clear ordering.
CsiDataset gaussian_cloud(std::size_t rows, std::size_t dim, std::uint64_t seed) {
    auto rng = Rng::keyed(seed, 1);
    CsiDataset ds;
    ds.dim = dim;
    ds.values.resize(rows * dim);
    ds.labels.assign(rows, 1);
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t j = 0; j < dim; ++j) {
            const double scale = 1.0 / static_cast<double>(j + 1);
            ds.values[r * dim + j] = 5.0 + scale * rng.normal();
        }
    return ds;
}

} // namespace

TEST_CASE("the eigensolver reproduces a hand-solved 2x2") {
    std::vector<double> values, vectors;
    detail::symmetric_eigen({2.0, 1.0, 1.0, 2.0}, 2, values, vectors);
    REQUIRE(values[0] == Catch::Approx(3.0).margin(1e-12));
    REQUIRE(values[1] == Catch::Approx(1.0).margin(1e-12));
    const double s = 1.0 / std::sqrt(2.0);
    REQUIRE(std::abs(vectors[0] * s + vectors[1] * s) == Catch::Approx(1.0).margin(1e-12));
    REQUIRE(std::abs(vectors[2] * s - vectors[3] * s) == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("eigenpairs satisfy A v = lambda v on random symmetric matrices") {
    for (std::uint64_t seed : {7u, 8u, 9u}) {
        const std::size_t n = 10;
        const auto a = random_symmetric(n, seed);
        std::vector<double> values, vectors;
        detail::symmetric_eigen(a, n, values, vectors);

        for (std::size_t i = 0; i + 1 < n; ++i) REQUIRE(values[i] >= values[i + 1]);
        for (std::size_t i = 0; i < n; ++i) {
            const double* v = vectors.data() + i * n;
            double residual = 0.0;
            double norm = 0.0;
            for (std::size_t r = 0; r < n; ++r) {
                double av = 0.0;
                for (std::size_t c = 0; c < n; ++c) av += a[r * n + c] * v[c];
                residual += (av - values[i] * v[r]) * (av - values[i] * v[r]);
                norm += v[r] * v[r];
            }
            REQUIRE(std::sqrt(residual) < 5e-9);
            REQUIRE(norm == Catch::Approx(1.0).margin(1e-10));
        }
    }
}

TEST_CASE("eigensolver rejects a size mismatch") {
    std::vector<double> values, vectors;
    REQUIRE_THROWS_AS(detail::symmetric_eigen({1.0, 2.0, 3.0}, 2, values, vectors), DomainError);
}

TEST_CASE("fitted components are orthonormal with positive leading entries") {
    const auto ds = gaussian_cloud(200, 6, 11);
    const auto model = fit_pca(ds, 4);
    REQUIRE_NOTHROW(model.validate());
    for (std::size_t i = 0; i < model.k; ++i) {
        const double* row = model.components.data() + i * model.dim;
        std::size_t arg = 0;
        for (std::size_t j = 1; j < model.dim; ++j)
            if (std::abs(row[j]) > std::abs(row[arg])) arg = j;
        REQUIRE(row[arg] > 0.0);
    }
}

TEST_CASE("score variances equal the eigenvalues") {
    const auto ds = gaussian_cloud(300, 6, 12);
    const auto model = fit_pca(ds, 6);
    const auto features = project_all(model, ds);

    for (std::size_t i = 0; i < model.k; ++i) {
        double mean = 0.0;
        for (const auto& f : features) mean += f.scores[i];
        mean /= static_cast<double>(features.size());
        REQUIRE(std::abs(mean) < 1e-10);

        double var = 0.0;
        for (const auto& f : features) var += (f.scores[i] - mean) * (f.scores[i] - mean);
        var /= static_cast<double>(features.size() - 1);
        REQUIRE(var == Catch::Approx(model.eigenvalues[i]).epsilon(1e-8));
    }
}

TEST_CASE("a full-rank fit preserves the total variance and reconstructs rows") {
    const auto ds = gaussian_cloud(150, 5, 13);
    const auto model = fit_pca(ds, 5);

    // Total variance: sum of per-coordinate variances equals sum of eigenvalues.
    double trace = 0.0;
    for (std::size_t j = 0; j < ds.dim; ++j) {
        double mean = 0.0;
        for (std::size_t r = 0; r < ds.rows(); ++r) mean += ds.values[r * ds.dim + j];
        mean /= static_cast<double>(ds.rows());
        double var = 0.0;
        for (std::size_t r = 0; r < ds.rows(); ++r) {
            const double c = ds.values[r * ds.dim + j] - mean;
            var += c * c;
        }
        trace += var / static_cast<double>(ds.rows() - 1);
    }
    double lambda_sum = 0.0;
    for (double v : model.eigenvalues) lambda_sum += v;
    REQUIRE(lambda_sum == Catch::Approx(trace).epsilon(1e-10));

    // With k = dim the projection is invertible: mean + scores . components.
    for (std::size_t r = 0; r < 10; ++r) {
        const auto f = project(model, ds.row(r));
        for (std::size_t j = 0; j < ds.dim; ++j) {
            double x = model.mean[j];
            for (std::size_t i = 0; i < model.k; ++i)
                x += f.scores[i] * model.components[i * model.dim + j];
            REQUIRE(x == Catch::Approx(ds.values[r * ds.dim + j]).epsilon(1e-9));
        }
    }
}

TEST_CASE("fit_pca rejects bad shapes and degenerate data") {
    const auto ds = gaussian_cloud(20, 4, 14);
    REQUIRE_THROWS_AS(fit_pca(ds, 0), DomainError);
    REQUIRE_THROWS_AS(fit_pca(ds, 5), DomainError);

    CsiDataset tiny = gaussian_cloud(1, 4, 14);
    REQUIRE_THROWS_AS(fit_pca(tiny, 1), DomainError);

    CsiDataset few = gaussian_cloud(3, 8, 15);  // k capped by rows - 1, not dim
    REQUIRE_THROWS_AS(fit_pca(few, 3), DomainError);
    REQUIRE_NOTHROW(fit_pca(few, 2));

    CsiDataset flat;
    flat.dim = 3;
    flat.labels.assign(5, 1);
    flat.values.assign(15, 2.5);
    REQUIRE_THROWS_WITH(fit_pca(flat, 1), Catch::Matchers::ContainsSubstring("no variance"));
}

TEST_CASE("projection refuses a dimension mismatch") {
    const auto ds = gaussian_cloud(50, 4, 16);
    const auto model = fit_pca(ds, 2);
    const std::vector<double> wrong(5, 1.0);
    REQUIRE_THROWS_AS(project(model, wrong), DomainError);
}

TEST_CASE("models survive a JSON file round trip bit for bit") {
    const auto ds = gaussian_cloud(80, 5, 17);
    auto model = fit_pca(ds, 3);
    std::vector<double> pc1;
    for (const auto& f : project_all(model, ds)) pc1.push_back(f.scores[0]);
    model.pc1_range = fit_score_range(pc1);
    model.provenance = {{"generator", "test"}, {"rows", 80}};
    model.calibration = {{"threshold", 0.25}};

    const auto dir = fs::temp_directory_path() / "commsense_test_pca";
    fs::create_directories(dir);
    const auto path = dir / "model.json";
    save_model(model, path);
    const auto back = load_model(path);

    REQUIRE(back.dim == model.dim);
    REQUIRE(back.k == model.k);
    REQUIRE(back.mean == model.mean);
    REQUIRE(back.components == model.components);
    REQUIRE(back.eigenvalues == model.eigenvalues);
    REQUIRE(back.pc1_range.has_value());
    REQUIRE(back.pc1_range->min == model.pc1_range->min);
    REQUIRE(back.pc1_range->max == model.pc1_range->max);
    REQUIRE(back.provenance == model.provenance);
    REQUIRE(back.calibration == model.calibration);
    fs::remove_all(dir);
}

TEST_CASE("corrupted model files are data errors") {
    const auto ds = gaussian_cloud(60, 4, 18);
    const auto model = fit_pca(ds, 2);
    const auto dir = fs::temp_directory_path() / "commsense_test_pca_bad";
    fs::create_directories(dir);

    nlohmann::json j = model;
    j["components"][1] = j["components"][1].get<double>() + 0.5;  // break orthonormality
    {
        std::ofstream out(dir / "broken.json");
        out << j.dump(2);
    }
    REQUIRE_THROWS_WITH(load_model(dir / "broken.json"),
                        Catch::Matchers::ContainsSubstring("orthonormal"));

    {
        std::ofstream out(dir / "not_json.json");
        out << "{ this is not json";
    }
    REQUIRE_THROWS_AS(load_model(dir / "not_json.json"), DataError);

    nlohmann::json missing = model;
    missing.erase("eigenvalues");
    {
        std::ofstream out(dir / "missing.json");
        out << missing.dump(2);
    }
    REQUIRE_THROWS_AS(load_model(dir / "missing.json"), DataError);
    fs::remove_all(dir);
}

TEST_CASE("score ranges clamp into the unit interval") {
    const std::vector<double> scores{-2.0, 1.0, 4.0};
    const auto range = fit_score_range(scores);
    REQUIRE(range.min == -2.0);
    REQUIRE(range.max == 4.0);
    REQUIRE(range.normalize(-2.0) == 0.0);
    REQUIRE(range.normalize(4.0) == 1.0);
    REQUIRE(range.normalize(1.0) == Catch::Approx(0.5));
    REQUIRE(range.normalize(-100.0) == 0.0);
    REQUIRE(range.normalize(100.0) == 1.0);

    const std::vector<double> none;
    const std::vector<double> constant{3.0, 3.0};
    REQUIRE_THROWS_AS(fit_score_range(none), DomainError);
    REQUIRE_THROWS_AS(fit_score_range(constant), DomainError);
}
