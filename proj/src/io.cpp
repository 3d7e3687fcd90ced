#include "selectrack/io.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iterator>
#include <set>
#include <sstream>
#include <tuple>
#include <utility>

namespace selectrack::io {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

[[noreturn]] void line_error(std::string_view source, std::size_t line, std::string_view what) {
    throw IoError(fmt::format("{}: line {}: {}", source, line, what));
}

double parse_number(std::string_view field, std::string_view source, std::size_t line, const char* name) {
    field = trim(field);
    if (!field.empty() && field.front() == '+') field.remove_prefix(1);
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc{} || ptr != field.data() + field.size() || !std::isfinite(value)) {
        line_error(source, line, fmt::format("bad {} '{}'", name, field));
    }
    return value;
}

int parse_integral(std::string_view field, std::string_view source, std::size_t line, const char* name) {
    const double v = parse_number(field, source, line, name);
    if (v != std::floor(v) || std::abs(v) > 2e9) {
        line_error(source, line, fmt::format("{} must be an integer, got '{}'", name, trim(field)));
    }
    return static_cast<int>(v);
}

std::ifstream open_in(const std::filesystem::path& path, std::ios::openmode mode = std::ios::in) {
    std::ifstream in(path, mode);
    if (!in) throw IoError(fmt::format("cannot open '{}' for reading", path.string()));
    return in;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError(fmt::format("cannot open '{}' for writing", path.string()));
    out << text;
    if (!out.flush()) throw IoError(fmt::format("write to '{}' failed", path.string()));
}

TrackOutput sorted(TrackOutput rows) {
    std::sort(rows.begin(), rows.end(), [](const TrackRow& a, const TrackRow& b) {
        return std::tie(a.frame, a.id) < std::tie(b.frame, b.id);
    });
    return rows;
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t get_u32(std::span<const std::uint8_t> bytes, std::size_t offset) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes[offset + i]) << (8 * i);
    return v;
}

}  // namespace

std::vector<DetFileRow> parse_rows(std::istream& in, std::string_view source) {
    std::vector<DetFileRow> rows;
    std::string text;
    std::size_t line = 0;
    while (std::getline(in, text)) {
        ++line;
        const std::string_view body = trim(text);
        if (body.empty()) continue;

        std::vector<std::string_view> fields;
        std::size_t start = 0;
        while (true) {
            const auto comma = body.find(',', start);
            fields.push_back(body.substr(start, comma == std::string_view::npos ? comma : comma - start));
            if (comma == std::string_view::npos) break;
            start = comma + 1;
        }
        if (fields.size() < 7) {
            line_error(source, line, fmt::format("expected at least 7 fields, got {}", fields.size()));
        }

        DetFileRow row;
        row.frame = parse_integral(fields[0], source, line, "frame");
        row.id = parse_integral(fields[1], source, line, "id");
        row.box = {parse_number(fields[2], source, line, "x"), parse_number(fields[3], source, line, "y"),
                   parse_number(fields[4], source, line, "width"),
                   parse_number(fields[5], source, line, "height")};
        row.conf = parse_number(fields[6], source, line, "confidence");
        for (std::size_t k = 7; k < fields.size() && k < 10; ++k) {
            row.extra[k - 7] = parse_number(fields[k], source, line, "trailing field");
        }
        if (row.frame < 1) line_error(source, line, "frame must be >= 1");
        if (!(row.box.w > 0.0) || !(row.box.h > 0.0)) {
            line_error(source, line, "width and height must be positive");
        }
        rows.push_back(row);
    }
    if (in.bad()) throw IoError(fmt::format("{}: read error", source));
    return rows;
}

std::vector<DetFileRow> read_rows(const std::filesystem::path& path) {
    std::ifstream in = open_in(path);
    return parse_rows(in, path.string());
}

DetectionsByFrame group_detections(std::span<const DetFileRow> rows) {
    DetectionsByFrame out;
    for (const auto& r : rows) {
        auto& frame = out[r.frame];
        Detection d;
        d.frame = r.frame;
        d.index = frame.size();
        d.box = r.box;
        d.confidence = r.conf;
        frame.push_back(std::move(d));
    }
    return out;
}

DetectionsByFrame read_detections(const std::filesystem::path& path) {
    const auto rows = read_rows(path);
    return group_detections(rows);
}

TrackOutput read_results(const std::filesystem::path& path) {
    TrackOutput out;
    for (const auto& r : read_rows(path)) out.push_back({r.frame, r.id, r.box});
    return sorted(std::move(out));
}

TrackOutput read_ground_truth(const std::filesystem::path& path) {
    std::ifstream in = open_in(path);
    const auto rows = parse_rows(in, path.string());
    TrackOutput out;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].id < 1) {
            throw IoError(fmt::format("{}: ground-truth row {} has id {} (must be >= 1)", path.string(), i + 1,
                                      rows[i].id));
        }
        if (rows[i].conf == 0.0) continue;
        out.push_back({rows[i].frame, rows[i].id, rows[i].box});
    }
    return sorted(std::move(out));
}

std::string format_results(const TrackOutput& rows) {
    std::string text;
    for (const auto& r : sorted(rows)) {
        fmt::format_to(std::back_inserter(text), "{},{},{:.6f},{:.6f},{:.6f},{:.6f},1,-1,-1,-1\n", r.frame, r.id,
                       r.box.x, r.box.y, r.box.w, r.box.h);
    }
    return text;
}

void write_results(const std::filesystem::path& path, const TrackOutput& rows) {
    write_text(path, format_results(rows));
}

void write_detections(const std::filesystem::path& path, std::span<const DetFileRow> rows) {
    std::string text;
    for (const auto& r : rows) {
        fmt::format_to(std::back_inserter(text), "{},-1,{:.6f},{:.6f},{:.6f},{:.6f},{:.6f},-1,-1,-1\n", r.frame,
                       r.box.x, r.box.y, r.box.w, r.box.h, r.conf);
    }
    write_text(path, text);
}

void write_ground_truth(const std::filesystem::path& path, const TrackOutput& rows) {
    std::string text;
    for (const auto& r : sorted(rows)) {
        fmt::format_to(std::back_inserter(text), "{},{},{:.6f},{:.6f},{:.6f},{:.6f},1,1,1\n", r.frame, r.id, r.box.x,
                       r.box.y, r.box.w, r.box.h);
    }
    write_text(path, text);
}

std::vector<std::uint8_t> encode_features(const FeatureFile& file) {
    std::set<std::pair<std::uint32_t, std::uint32_t>> keys;
    std::vector<std::uint8_t> out;
    out.reserve(13 + file.records.size() * (8 + 4 * static_cast<std::size_t>(file.dim)));
    out.insert(out.end(), kFeatureMagic.begin(), kFeatureMagic.end());
    out.push_back(kFeatureVersion);
    put_u32(out, file.dim);
    if (file.records.size() > UINT32_MAX) throw IoError("feature file: too many records");
    put_u32(out, static_cast<std::uint32_t>(file.records.size()));
    for (const auto& r : file.records) {
        if (r.values.size() != file.dim) {
            throw IoError(fmt::format("feature record (frame {}, index {}) has {} values, expected {}", r.frame,
                                      r.det_index, r.values.size(), file.dim));
        }
        if (!keys.emplace(r.frame, r.det_index).second) {
            throw IoError(fmt::format("duplicate feature record for frame {} index {}", r.frame, r.det_index));
        }
        put_u32(out, r.frame);
        put_u32(out, r.det_index);
        for (float v : r.values) put_u32(out, std::bit_cast<std::uint32_t>(v));
    }
    return out;
}

FeatureFile decode_features(std::span<const std::uint8_t> bytes, std::string_view source) {
    constexpr std::size_t kHeader = 13;
    if (bytes.size() < 4 || !std::equal(kFeatureMagic.begin(), kFeatureMagic.end(), bytes.begin(),
                                        [](char m, std::uint8_t b) { return static_cast<std::uint8_t>(m) == b; })) {
        throw IoError(fmt::format("{}: bad magic", source));
    }
    if (bytes.size() < kHeader) throw IoError(fmt::format("{}: truncated header", source));
    if (bytes[4] != kFeatureVersion) {
        throw IoError(fmt::format("{}: unsupported version {}", source, static_cast<int>(bytes[4])));
    }

    FeatureFile file;
    file.dim = get_u32(bytes, 5);
    const std::uint32_t count = get_u32(bytes, 9);
    if (file.dim == 0 && count > 0) throw IoError(fmt::format("{}: zero dimension", source));
    const std::uint64_t record_size = 8 + 4 * static_cast<std::uint64_t>(file.dim);
    const std::uint64_t expected = kHeader + record_size * count;
    if (bytes.size() < expected) {
        throw IoError(fmt::format("{}: truncated file ({} bytes, expected {})", source, bytes.size(), expected));
    }
    if (bytes.size() > expected) {
        throw IoError(fmt::format("{}: {} trailing bytes", source, bytes.size() - expected));
    }

    std::set<std::pair<std::uint32_t, std::uint32_t>> keys;
    file.records.reserve(count);
    std::size_t offset = kHeader;
    for (std::uint32_t i = 0; i < count; ++i) {
        FeatureRecord r;
        r.frame = get_u32(bytes, offset);
        r.det_index = get_u32(bytes, offset + 4);
        offset += 8;
        if (!keys.emplace(r.frame, r.det_index).second) {
            throw IoError(fmt::format("{}: duplicate record for frame {} index {}", source, r.frame, r.det_index));
        }
        r.values.resize(file.dim);
        double norm2 = 0.0;
        for (std::uint32_t k = 0; k < file.dim; ++k) {
            r.values[k] = std::bit_cast<float>(get_u32(bytes, offset));
            offset += 4;
            if (!std::isfinite(r.values[k])) {
                throw IoError(fmt::format("{}: non-finite value in record {}", source, i));
            }
            norm2 += static_cast<double>(r.values[k]) * r.values[k];
        }
        const double norm = std::sqrt(norm2);
        if (!(norm > 0.0)) throw IoError(fmt::format("{}: zero vector in record {}", source, i));
        if (std::abs(norm - 1.0) > 1e-6) {
            for (float& v : r.values) v = static_cast<float>(static_cast<double>(v) / norm);
        }
        file.records.push_back(std::move(r));
    }
    return file;
}

void write_features(const std::filesystem::path& path, const FeatureFile& file) {
    const auto bytes = encode_features(file);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError(fmt::format("cannot open '{}' for writing", path.string()));
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out.flush()) throw IoError(fmt::format("write to '{}' failed", path.string()));
}

FeatureFile read_features(const std::filesystem::path& path) {
    std::ifstream in = open_in(path, std::ios::in | std::ios::binary);
    const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return decode_features(bytes, path.string());
}

FeatureTable to_feature_table(const FeatureFile& file) {
    FeatureTable table;
    for (const auto& r : file.records) {
        table.insert(static_cast<int>(r.frame), r.det_index, FeatureVector(std::span<const float>(r.values)));
    }
    return table;
}

}  // namespace selectrack::io
