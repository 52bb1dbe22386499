#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "commsense/dataset.hpp"
#include "commsense/error.hpp"

namespace commsense {

namespace detail {

/**
 * @brief Cyclic Jacobi eigensolver for real symmetric matrices.
 *
 * Sweeps all (p, q) pairs, rotating away each off-diagonal element, until
 * the off-diagonal Frobenius mass drops below 1e-10 relative to the
 * matrix norm. Returns eigenvalues in descending order with matching rows
 * of `vectors` (row i is the eigenvector of values[i]).
 */
inline void symmetric_eigen(std::vector<double> a, std::size_t n, std::vector<double>& values,
                            std::vector<double>& vectors) {
    if (a.size() != n * n) throw DomainError("symmetric_eigen: matrix size mismatch");

    std::vector<double> v(n * n, 0.0);  // accumulated rotations, column-major eigenvectors
    for (std::size_t i = 0; i < n; ++i) v[i * n + i] = 1.0;

    double norm_sq = 0.0;
    for (double x : a) norm_sq += x * x;
    const double tol = 1e-10 * std::sqrt(std::max(norm_sq, 1e-300));

    constexpr int kMaxSweeps = 100;
    for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
        double off_sq = 0.0;
        for (std::size_t p = 0; p + 1 < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) off_sq += 2.0 * a[p * n + q] * a[p * n + q];
        if (std::sqrt(off_sq) <= tol) break;

        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a[p * n + q];
                if (apq == 0.0) continue;
                const double app = a[p * n + p];
                const double aqq = a[q * n + q];
                const double theta = (aqq - app) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;

                a[p * n + p] = app - t * apq;
                a[q * n + q] = aqq + t * apq;
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;
                for (std::size_t i = 0; i < n; ++i) {
                    if (i == p || i == q) continue;
                    const double aip = a[i * n + p];
                    const double aiq = a[i * n + q];
                    a[i * n + p] = c * aip - s * aiq;
                    a[p * n + i] = a[i * n + p];
                    a[i * n + q] = s * aip + c * aiq;
                    a[q * n + i] = a[i * n + q];
                }
                for (std::size_t i = 0; i < n; ++i) {
                    const double vip = v[i * n + p];
                    const double viq = v[i * n + q];
                    v[i * n + p] = c * vip - s * viq;
                    v[i * n + q] = s * vip + c * viq;
                }
            }
        }
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
        return a[x * n + x] > a[y * n + y];
    });

    values.resize(n);
    vectors.assign(n * n, 0.0);
    for (std::size_t r = 0; r < n; ++r) {
        values[r] = a[order[r] * n + order[r]];
        for (std::size_t i = 0; i < n; ++i) vectors[r * n + i] = v[i * n + order[r]];
    }
}

} // namespace detail

/// Closed interval used to squeeze PC1 scores into [0, 1].
struct ScoreRange {
    double min = 0.0;
    double max = 1.0;

    double normalize(double score) const {
        const double t = (score - min) / (max - min);
        return std::clamp(t, 0.0, 1.0);
    }
};

/// Fits the min-max range of a score collection.
inline ScoreRange fit_score_range(std::span<const double> scores) {
    if (scores.empty()) throw DomainError("cannot fit a score range on no scores");
    const auto [lo, hi] = std::minmax_element(scores.begin(), scores.end());
    if (!(*hi > *lo)) throw DomainError("degenerate score range: all scores equal");
    return {*lo, *hi};
}

/**
 * @brief Principal-component model of the CSI cloud.
 *
 * Rows of `components` are unit-norm principal directions in descending
 * eigenvalue order, sign-fixed so each row's largest-magnitude entry is
 * positive. `pc1_range` (when fitted) maps first-component scores onto
 * [0, 1] for the occupancy detector; `calibration` is attached by the
 * detector stage and carried in the same JSON document.
 */
struct PcaModel {
    std::size_t dim = 0;
    std::size_t k = 0;
    std::vector<double> mean;         // dim
    std::vector<double> components;   // k x dim, row-major
    std::vector<double> eigenvalues;  // k, descending, clamped at zero
    std::optional<ScoreRange> pc1_range;
    nlohmann::json provenance;
    nlohmann::json calibration;  // filled by the detector stage

    void validate() const {
        if (dim == 0 || k == 0 || k > dim) throw DataError("pca model: bad dimensions");
        if (mean.size() != dim || components.size() != k * dim || eigenvalues.size() != k)
            throw DataError("pca model: inconsistent array sizes");
        for (double x : mean)
            if (!std::isfinite(x)) throw DataError("pca model: non-finite mean");
        for (double x : components)
            if (!std::isfinite(x)) throw DataError("pca model: non-finite component");
        for (std::size_t i = 0; i < k; ++i) {
            if (!std::isfinite(eigenvalues[i]) || eigenvalues[i] < 0.0)
                throw DataError("pca model: eigenvalues must be finite and non-negative");
            if (i > 0 && eigenvalues[i] > eigenvalues[i - 1])
                throw DataError("pca model: eigenvalues must descend");
        }
        // Rows must form an orthonormal set; corrupt files fail here.
        for (std::size_t i = 0; i < k; ++i) {
            for (std::size_t j = i; j < k; ++j) {
                double dot = 0.0;
                for (std::size_t d = 0; d < dim; ++d)
                    dot += components[i * dim + d] * components[j * dim + d];
                const double expected = i == j ? 1.0 : 0.0;
                if (std::abs(dot - expected) > 1e-10)
                    throw DataError("pca model: components are not orthonormal");
            }
        }
    }
};

/// Projection of one CSI vector onto the principal components.
struct FeatureVector {
    std::vector<double> scores;
    std::optional<int> label;
};

/**
 * @brief Fits a k-component PCA to every row of the dataset.
 *
 * Covariance uses the rows-1 divisor. Eigenpairs come from the in-house
 * Jacobi solver, descending, with tiny negative eigenvalues clamped to
 * zero. Deterministic: identical input bytes give identical model bytes.
 */
inline PcaModel fit_pca(const CsiDataset& ds, std::size_t k = 3) {
    const std::size_t rows = ds.rows();
    const std::size_t d = ds.dim;
    if (rows < 2) throw DomainError("fit_pca: need at least two rows");
    if (k < 1 || k > std::min(d, rows - 1))
        throw DomainError("fit_pca: k must lie in 1..min(dim, rows-1)");

    PcaModel model;
    model.dim = d;
    model.k = k;
    model.mean.assign(d, 0.0);
    for (std::size_t r = 0; r < rows; ++r) {
        const double* row = ds.values.data() + r * d;
        for (std::size_t j = 0; j < d; ++j) model.mean[j] += row[j];
    }
    for (std::size_t j = 0; j < d; ++j) model.mean[j] /= static_cast<double>(rows);

    std::vector<double> cov(d * d, 0.0);
    std::vector<double> centered(d);
    for (std::size_t r = 0; r < rows; ++r) {
        const double* row = ds.values.data() + r * d;
        for (std::size_t j = 0; j < d; ++j) centered[j] = row[j] - model.mean[j];
        for (std::size_t i = 0; i < d; ++i) {
            const double ci = centered[i];
            for (std::size_t j = i; j < d; ++j) cov[i * d + j] += ci * centered[j];
        }
    }
    const double divisor = static_cast<double>(rows - 1);
    double trace = 0.0;
    double mean_sq = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = i; j < d; ++j) {
            cov[i * d + j] /= divisor;
            cov[j * d + i] = cov[i * d + j];
        }
        trace += cov[i * d + i];
        mean_sq += model.mean[i] * model.mean[i];
    }
    // All-identical rows leave only rounding residue on the diagonal.
    if (trace <= 1e-24 * static_cast<double>(d) * std::max(1.0, mean_sq / static_cast<double>(d)))
        throw DomainError("fit_pca: degenerate covariance, the training data has no variance");

    std::vector<double> eigval;
    std::vector<double> eigvec;
    detail::symmetric_eigen(std::move(cov), d, eigval, eigvec);

    model.eigenvalues.assign(eigval.begin(), eigval.begin() + static_cast<std::ptrdiff_t>(k));
    for (double& v : model.eigenvalues) v = std::max(v, 0.0);
    model.components.resize(k * d);
    for (std::size_t i = 0; i < k; ++i) {
        const double* src = eigvec.data() + i * d;
        // Sign convention: the entry of largest magnitude points positive.
        std::size_t arg = 0;
        for (std::size_t j = 1; j < d; ++j)
            if (std::abs(src[j]) > std::abs(src[arg])) arg = j;
        const double sign = src[arg] < 0.0 ? -1.0 : 1.0;
        for (std::size_t j = 0; j < d; ++j) model.components[i * d + j] = sign * src[j];
    }
    return model;
}

/// Projects one CSI vector onto the model's components.
inline FeatureVector project(const PcaModel& model, std::span<const double> values,
                             std::optional<int> label = std::nullopt) {
    if (values.size() != model.dim)
        throw DomainError("project: vector dimension does not match the model");
    FeatureVector f;
    f.label = label;
    f.scores.resize(model.k);
    for (std::size_t i = 0; i < model.k; ++i) {
        double acc = 0.0;
        const double* c = model.components.data() + i * model.dim;
        for (std::size_t j = 0; j < model.dim; ++j) acc += c[j] * (values[j] - model.mean[j]);
        f.scores[i] = acc;
    }
    return f;
}

/// Projects every dataset row, keeping labels.
inline std::vector<FeatureVector> project_all(const PcaModel& model, const CsiDataset& ds) {
    std::vector<FeatureVector> out;
    out.reserve(ds.rows());
    for (std::size_t r = 0; r < ds.rows(); ++r) out.push_back(project(model, ds.row(r), ds.label(r)));
    return out;
}

inline void to_json(nlohmann::json& j, const PcaModel& model) {
    j = nlohmann::json{
        {"dim", model.dim},
        {"k", model.k},
        {"mean", model.mean},
        {"components", model.components},
        {"eigenvalues", model.eigenvalues},
    };
    if (model.pc1_range)
        j["pc1_range"] = {{"min", model.pc1_range->min}, {"max", model.pc1_range->max}};
    if (!model.provenance.is_null()) j["provenance"] = model.provenance;
    if (!model.calibration.is_null()) j["calibration"] = model.calibration;
}

inline void from_json(const nlohmann::json& j, PcaModel& model) {
    model = PcaModel{};
    try {
        model.dim = j.at("dim").get<std::size_t>();
        model.k = j.at("k").get<std::size_t>();
        model.mean = j.at("mean").get<std::vector<double>>();
        model.components = j.at("components").get<std::vector<double>>();
        model.eigenvalues = j.at("eigenvalues").get<std::vector<double>>();
        if (j.contains("pc1_range")) {
            ScoreRange r;
            r.min = j.at("pc1_range").at("min").get<double>();
            r.max = j.at("pc1_range").at("max").get<double>();
            model.pc1_range = r;
        }
        if (j.contains("provenance")) model.provenance = j.at("provenance");
        if (j.contains("calibration")) model.calibration = j.at("calibration");
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("bad pca model document: ") + e.what());
    }
    model.validate();
}

inline void save_model(const PcaModel& model, const std::filesystem::path& path) {
    nlohmann::json j = model;
    detail::write_file_bytes(path, j.dump(2) + "\n");
}

inline PcaModel load_model(const std::filesystem::path& path) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(detail::read_file_bytes(path));
    } catch (const nlohmann::json::exception& e) {
        throw DataError(path.string() + ": bad model file: " + e.what());
    }
    return j.get<PcaModel>();
}

} // namespace commsense
