#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "selectrack/appearance.hpp"
#include "selectrack/gating.hpp"
#include "selectrack/geometry.hpp"
#include "selectrack/motion.hpp"

namespace selectrack {

/// One detector output. `index` is the detection's position within its
/// frame and is the key used to look up its appearance feature.
struct Detection {
    int frame = 1;
    std::size_t index = 0;
    BBox box;
    double confidence = 1.0;
    /// Pre-attached feature. The tracker never reads it directly; wrap
    /// detections in an AttachedFeatures provider so extractions are counted.
    std::optional<FeatureVector> feature;
};

using DetectionsByFrame = std::map<int, std::vector<Detection>>;

enum class TrackStatus { tentative, confirmed, deleted };

struct Track {
    int id = 0;
    KalmanState kalman;
    std::optional<EmaState> ema;
    TrackStatus status = TrackStatus::tentative;
    int hits = 0;
    int age = 0;
    int time_since_update = 0;
};

enum class MatchStrategy {
    /// Appearance-only stage for confirmed tracks, then IoU-only for the rest.
    cascade,
    /// One stage on fused_weight * appearance + (1 - IoU).
    fused,
};

std::string_view to_string(MatchStrategy strategy);
MatchStrategy parse_match_strategy(std::string_view text);

enum class OutputBox { kalman, detection };

std::string_view to_string(OutputBox box);
OutputBox parse_output_box(std::string_view text);

struct MatchConfig {
    MatchStrategy strategy = MatchStrategy::cascade;
    /// Largest cosine distance accepted in the appearance stage.
    double appearance_gate = 0.4;
    /// Smallest IoU accepted by any IoU-based stage.
    double iou_gate = 0.3;
    double fused_weight = 0.75;
    /// Detections below this confidence skip gating and extraction.
    double conf_high = 0.6;
    /// Second association of low-confidence detections by IoU.
    bool byte_low = false;
    int min_hits = 1;
    int max_age = 30;
    /// Base EMA weight kept on the old embedding.
    double ema_alpha = 0.9;
    OutputBox output = OutputBox::kalman;

    /// Defaults for a strategy: byte_low is on for fused, off for cascade.
    static MatchConfig for_strategy(MatchStrategy strategy);

    void validate() const;
};

/// Source of appearance features. Implementations must be safe to call
/// concurrently from different sequences.
class FeatureProvider {
public:
    virtual ~FeatureProvider() = default;
    /// Deterministic for a given (frame, index). Returns nullopt when no
    /// feature is available for that detection.
    virtual std::optional<FeatureVector> fetch(int frame, std::size_t index) const = 0;
};

/// Always returns nothing; turns every association into IoU-only matching.
class NullFeatureProvider final : public FeatureProvider {
public:
    std::optional<FeatureVector> fetch(int, std::size_t) const override { return std::nullopt; }
};

/// In-memory (frame, index) -> feature table.
class FeatureTable final : public FeatureProvider {
public:
    FeatureTable() = default;
    /// Throws std::invalid_argument on a duplicate key.
    void insert(int frame, std::size_t index, FeatureVector feature);
    std::optional<FeatureVector> fetch(int frame, std::size_t index) const override;
    std::size_t size() const { return table_.size(); }

private:
    std::map<std::pair<int, std::size_t>, FeatureVector> table_;
};

/// Table built from the features attached to a detection set.
FeatureTable attached_features(const DetectionsByFrame& detections);

/// Wraps another provider and counts every fetch. One per sequence.
class CountingProvider final : public FeatureProvider {
public:
    explicit CountingProvider(const FeatureProvider& inner) : inner_(inner) {}
    std::optional<FeatureVector> fetch(int frame, std::size_t index) const override {
        ++count_;
        return inner_.fetch(frame, index);
    }
    std::size_t count() const { return count_; }

private:
    const FeatureProvider& inner_;
    mutable std::size_t count_ = 0;
};

struct TrackRow {
    int frame = 0;
    int id = 0;
    BBox box;

    bool operator==(const TrackRow&) const = default;
};

using TrackOutput = std::vector<TrackRow>;

/// What the tracker decided for one detection in a frame.
struct DetectionDecision {
    std::size_t index = 0;
    bool high_confidence = false;
    bool risky = true;
    std::optional<int> candidate_id;
    bool fetched = false;
    std::optional<int> track_id;
};

/// Per-sequence tracker. Frames must arrive in strictly increasing order.
class Tracker {
public:
    Tracker(GateConfig gate, MatchConfig match, MotionConfig motion = {});

    /// Runs one frame and returns rows for confirmed tracks updated in it,
    /// ordered by id. If anything throws (including the provider), the
    /// tracker state is left exactly as before the call.
    TrackOutput step(int frame, std::span<const Detection> detections, const FeatureProvider& provider,
                     std::vector<DetectionDecision>* decisions = nullptr);

    const std::vector<Track>& tracks() const { return tracks_; }
    std::size_t fetches() const { return fetches_; }
    std::size_t high_confidence_detections() const { return high_conf_seen_; }
    std::size_t detections_seen() const { return detections_seen_; }

    const GateConfig& gate_config() const { return gate_; }
    const MatchConfig& match_config() const { return match_; }

private:
    GateConfig gate_;
    MatchConfig match_;
    KalmanFilter filter_;
    std::vector<Track> tracks_;
    int next_id_ = 1;
    std::optional<int> last_frame_;
    std::size_t fetches_ = 0;
    std::size_t high_conf_seen_ = 0;
    std::size_t detections_seen_ = 0;
};

struct RunStats {
    std::size_t fetches = 0;
    /// High-confidence detections, the denominator of the extraction rate.
    std::size_t detections = 0;
    std::size_t total_detections = 0;
    std::size_t frames = 0;
    std::vector<double> frame_millis;

    /// Percentage of high-confidence detections whose feature was fetched;
    /// nullopt when there were none.
    std::optional<double> pde() const;
};

struct SequenceResult {
    TrackOutput output;
    RunStats stats;
};

/// Folds Tracker::step over every frame from the first to the last key of
/// `detections`, including frames with no detections.
SequenceResult run_sequence(const DetectionsByFrame& detections, const FeatureProvider& provider,
                            const GateConfig& gate, const MatchConfig& match,
                            const MotionConfig& motion = {});

}  // namespace selectrack
