#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "selectrack/tracker.hpp"

namespace selectrack::io {

/// Raised for unreadable files and malformed content. Messages name the
/// source and, for text formats, the 1-based line number.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// One MOTChallenge CSV row: frame, id, x, y, w, h, conf and up to three
/// trailing fields (world coordinates for detections, class and visibility
/// for ground truth).
struct DetFileRow {
    int frame = 1;
    int id = -1;
    BBox box;
    double conf = 1.0;
    std::array<double, 3> extra{-1.0, -1.0, -1.0};

    bool operator==(const DetFileRow&) const = default;
};

/// Parses comma-separated rows. Blank lines are skipped; every other line
/// needs at least 7 numeric fields, frame >= 1 and w, h > 0.
std::vector<DetFileRow> parse_rows(std::istream& in, std::string_view source = "<stream>");
std::vector<DetFileRow> read_rows(const std::filesystem::path& path);

/// Groups rows by frame; a detection's index is its order within the frame
/// as it appears in the file.
DetectionsByFrame group_detections(std::span<const DetFileRow> rows);
DetectionsByFrame read_detections(const std::filesystem::path& path);

/// Tracker results (frame, id, box). Rows are returned sorted by frame, id.
TrackOutput read_results(const std::filesystem::path& path);

/// MOTChallenge ground truth. Rows with id < 1 are rejected; rows whose
/// 7th column (the "consider" flag) is 0 are skipped. Visibility is ignored.
TrackOutput read_ground_truth(const std::filesystem::path& path);

/// "frame,id,x,y,w,h,1,-1,-1,-1" per row, sorted by frame then id, with six
/// decimals for box values.
void write_results(const std::filesystem::path& path, const TrackOutput& rows);
std::string format_results(const TrackOutput& rows);

/// "frame,-1,x,y,w,h,conf,-1,-1,-1" in the given order.
void write_detections(const std::filesystem::path& path, std::span<const DetFileRow> rows);

/// "frame,id,x,y,w,h,1,1,1" sorted by frame then id.
void write_ground_truth(const std::filesystem::path& path, const TrackOutput& rows);

// Binary feature file, little-endian throughout:
//   "FEAB" | u8 version (1) | u32 dim | u32 count |
//   count x ( u32 frame | u32 det_index | dim x f32 )

struct FeatureRecord {
    std::uint32_t frame = 0;
    std::uint32_t det_index = 0;
    std::vector<float> values;

    bool operator==(const FeatureRecord&) const = default;
};

struct FeatureFile {
    std::uint32_t dim = 0;
    std::vector<FeatureRecord> records;
};

inline constexpr std::array<char, 4> kFeatureMagic{'F', 'E', 'A', 'B'};
inline constexpr std::uint8_t kFeatureVersion = 1;

/// Throws IoError when a record's length differs from dim or a
/// (frame, det_index) key repeats.
std::vector<std::uint8_t> encode_features(const FeatureFile& file);

/// Validates magic, version, length and key uniqueness. Vectors whose norm
/// differs from 1 by more than 1e-6 are normalised; unit vectors are kept
/// bit for bit.
FeatureFile decode_features(std::span<const std::uint8_t> bytes, std::string_view source = "<buffer>");

void write_features(const std::filesystem::path& path, const FeatureFile& file);
FeatureFile read_features(const std::filesystem::path& path);

/// Provider view of a feature file.
FeatureTable to_feature_table(const FeatureFile& file);

}  // namespace selectrack::io
