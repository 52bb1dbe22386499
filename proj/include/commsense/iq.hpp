#pragma once

#include <bit>
#include <complex>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "commsense/error.hpp"

namespace commsense {

/**
 * @brief A complex baseband capture plus the metadata needed to process it.
 *
 * On disk a capture is a raw stream of little-endian float32 pairs
 * (I then Q, sample by sample) accompanied by a `<name>.meta.json` sidecar
 * holding sample_rate, center_frequency, cell_id, timestamp and an optional
 * integer label.
 */
struct IqCapture {
    std::vector<std::complex<double>> samples;
    double sample_rate_hz = 15.36e6;
    double center_frequency_hz = 2.35e9;
    double timestamp_s = 0.0;
    int cell_id = 0;
    std::optional<int> label;
};

namespace detail {

inline void put_u32le(std::string& out, std::uint32_t v) {
    out.push_back(static_cast<char>(v & 0xFF));
    out.push_back(static_cast<char>((v >> 8) & 0xFF));
    out.push_back(static_cast<char>((v >> 16) & 0xFF));
    out.push_back(static_cast<char>((v >> 24) & 0xFF));
}

inline void put_u64le(std::string& out, std::uint64_t v) {
    put_u32le(out, static_cast<std::uint32_t>(v & 0xFFFFFFFFu));
    put_u32le(out, static_cast<std::uint32_t>(v >> 32));
}

inline void put_f32le(std::string& out, float v) {
    put_u32le(out, std::bit_cast<std::uint32_t>(v));
}

inline void put_f64le(std::string& out, double v) {
    put_u64le(out, std::bit_cast<std::uint64_t>(v));
}

inline std::uint32_t get_u32le(const unsigned char* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

inline std::uint64_t get_u64le(const unsigned char* p) {
    return static_cast<std::uint64_t>(get_u32le(p)) |
           (static_cast<std::uint64_t>(get_u32le(p + 4)) << 32);
}

inline float get_f32le(const unsigned char* p) { return std::bit_cast<float>(get_u32le(p)); }

inline double get_f64le(const unsigned char* p) { return std::bit_cast<double>(get_u64le(p)); }

inline std::string read_file_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path.string());
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (!in.good() && !in.eof()) throw DataError("read failure on " + path.string());
    return bytes;
}

inline void write_file_bytes(const std::filesystem::path& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot create " + path.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw DataError("write failure on " + path.string());
}

inline std::filesystem::path sidecar_path(const std::filesystem::path& path) {
    return std::filesystem::path(path.string() + ".meta.json");
}

} // namespace detail

inline void save_iq(const IqCapture& capture, const std::filesystem::path& path) {
    std::string bytes;
    bytes.reserve(capture.samples.size() * 8);
    for (const auto& s : capture.samples) {
        detail::put_f32le(bytes, static_cast<float>(s.real()));
        detail::put_f32le(bytes, static_cast<float>(s.imag()));
    }
    detail::write_file_bytes(path, bytes);

    nlohmann::json meta{
        {"sample_rate", capture.sample_rate_hz},
        {"center_frequency", capture.center_frequency_hz},
        {"cell_id", capture.cell_id},
        {"timestamp", capture.timestamp_s},
    };
    if (capture.label) meta["label"] = *capture.label;
    detail::write_file_bytes(detail::sidecar_path(path), meta.dump(2) + "\n");
}

inline IqCapture load_iq(const std::filesystem::path& path) {
    const std::string bytes = detail::read_file_bytes(path);
    if (bytes.size() % 8 != 0)
        throw DataError(path.string() + ": truncated capture, " + std::to_string(bytes.size()) +
                        " bytes is not a whole number of complex float32 samples");

    IqCapture capture;
    capture.samples.resize(bytes.size() / 8);
    const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
    for (std::size_t i = 0; i < capture.samples.size(); ++i) {
        const double re = detail::get_f32le(p + 8 * i);
        const double im = detail::get_f32le(p + 8 * i + 4);
        capture.samples[i] = {re, im};
    }

    const auto meta_path = detail::sidecar_path(path);
    nlohmann::json meta;
    try {
        meta = nlohmann::json::parse(detail::read_file_bytes(meta_path));
    } catch (const nlohmann::json::exception& e) {
        throw DataError(meta_path.string() + ": bad metadata sidecar: " + e.what());
    }
    try {
        capture.sample_rate_hz = meta.at("sample_rate").get<double>();
        capture.center_frequency_hz = meta.at("center_frequency").get<double>();
        capture.cell_id = meta.at("cell_id").get<int>();
        capture.timestamp_s = meta.at("timestamp").get<double>();
        if (meta.contains("label")) capture.label = meta.at("label").get<int>();
    } catch (const nlohmann::json::exception& e) {
        throw DataError(meta_path.string() + ": incomplete metadata sidecar: " + e.what());
    }
    return capture;
}

} // namespace commsense
