#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "commsense/error.hpp"
#include "commsense/iq.hpp"

namespace commsense {

/**
 * @brief A labeled collection of CSI magnitude vectors.
 *
 * Rows are stored row-major with one 1-based category label per row.
 * On disk this is the CSID container: magic "CSID", little-endian u32
 * version, u32 dimension, u64 row count, rows*dim float64 values, then one
 * u8 label per row. A `<name>.meta.json` sidecar carries provenance
 * (generator, scenario echo, day id).
 */
struct CsiDataset {
    std::size_t dim = 0;
    std::vector<double> values;
    std::vector<std::uint8_t> labels;
    nlohmann::json provenance;

    std::size_t rows() const { return labels.size(); }

    std::span<const double> row(std::size_t r) const {
        if (r >= rows()) throw DomainError("dataset row out of range");
        return {values.data() + r * dim, dim};
    }

    int label(std::size_t r) const {
        if (r >= rows()) throw DomainError("dataset row out of range");
        return labels[r];
    }

    void append(std::span<const double> row_values, int row_label) {
        if (dim == 0) dim = row_values.size();
        if (row_values.size() != dim)
            throw DomainError("dataset rows must share one dimension");
        if (row_label < 1 || row_label > 255)
            throw DomainError("labels must be 1..255");
        for (double v : row_values)
            if (!std::isfinite(v)) throw DomainError("dataset values must be finite");
        values.insert(values.end(), row_values.begin(), row_values.end());
        labels.push_back(static_cast<std::uint8_t>(row_label));
    }

    int n_categories() const {
        int max_label = 0;
        for (auto l : labels) max_label = std::max(max_label, static_cast<int>(l));
        return max_label;
    }

    /// Row indices grouped by category (index 0 holds category 1), keeping
    /// dataset order inside each group.
    std::vector<std::vector<std::size_t>> rows_by_category() const {
        std::vector<std::vector<std::size_t>> groups(static_cast<std::size_t>(n_categories()));
        for (std::size_t r = 0; r < rows(); ++r)
            groups[static_cast<std::size_t>(labels[r] - 1)].push_back(r);
        return groups;
    }
};

inline constexpr std::uint32_t kDatasetVersion = 1;

inline void save_dataset(const CsiDataset& ds, const std::filesystem::path& path) {
    if (ds.values.size() != ds.rows() * ds.dim)
        throw DomainError("dataset value buffer does not match rows * dim");
    std::string bytes;
    bytes.reserve(20 + ds.values.size() * 8 + ds.labels.size());
    bytes += "CSID";
    detail::put_u32le(bytes, kDatasetVersion);
    detail::put_u32le(bytes, static_cast<std::uint32_t>(ds.dim));
    detail::put_u64le(bytes, static_cast<std::uint64_t>(ds.rows()));
    for (double v : ds.values) detail::put_f64le(bytes, v);
    for (auto l : ds.labels) bytes.push_back(static_cast<char>(l));
    detail::write_file_bytes(path, bytes);

    if (!ds.provenance.is_null())
        detail::write_file_bytes(detail::sidecar_path(path), ds.provenance.dump(2) + "\n");
}

inline CsiDataset load_dataset(const std::filesystem::path& path) {
    const std::string bytes = detail::read_file_bytes(path);
    auto truncated = [&](std::size_t needed_end) {
        return DataError(path.string() + ": truncated dataset, expected " +
                         std::to_string(needed_end) + " bytes but the file ends at byte offset " +
                         std::to_string(bytes.size()));
    };
    if (bytes.size() < 20) throw truncated(20);
    if (bytes.compare(0, 4, "CSID") != 0)
        throw DataError(path.string() + ": bad magic at byte offset 0, not a CSID dataset");
    const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
    const std::uint32_t version = detail::get_u32le(p + 4);
    if (version != kDatasetVersion)
        throw DataError(path.string() + ": unsupported dataset version " +
                        std::to_string(version));
    const std::uint32_t dim = detail::get_u32le(p + 8);
    const std::uint64_t rows = detail::get_u64le(p + 12);
    if (dim == 0) throw DataError(path.string() + ": zero-dimensional dataset");
    const std::size_t values_end = 20 + static_cast<std::size_t>(rows) * dim * 8;
    const std::size_t labels_end = values_end + static_cast<std::size_t>(rows);
    if (bytes.size() < labels_end) throw truncated(labels_end);
    if (bytes.size() > labels_end)
        throw DataError(path.string() + ": trailing garbage after byte offset " +
                        std::to_string(labels_end));

    CsiDataset ds;
    ds.dim = dim;
    ds.values.resize(static_cast<std::size_t>(rows) * dim);
    for (std::size_t i = 0; i < ds.values.size(); ++i) {
        ds.values[i] = detail::get_f64le(p + 20 + i * 8);
        if (!std::isfinite(ds.values[i]))
            throw DataError(path.string() + ": non-finite value at row " +
                            std::to_string(i / dim) + " (byte offset " +
                            std::to_string(20 + i * 8) + ")");
    }
    ds.labels.resize(static_cast<std::size_t>(rows));
    for (std::size_t r = 0; r < ds.labels.size(); ++r) {
        ds.labels[r] = static_cast<std::uint8_t>(bytes[values_end + r]);
        if (ds.labels[r] == 0)
            throw DataError(path.string() + ": invalid label 0 at row " + std::to_string(r));
    }

    const auto meta_path = detail::sidecar_path(path);
    if (std::filesystem::exists(meta_path)) {
        try {
            ds.provenance = nlohmann::json::parse(detail::read_file_bytes(meta_path));
        } catch (const nlohmann::json::exception& e) {
            throw DataError(meta_path.string() + ": bad provenance sidecar: " + e.what());
        }
    }
    return ds;
}

} // namespace commsense
