#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "selectrack/geometry.hpp"

namespace selectrack {

enum class ExtractionMode {
    /// Non-risky detections borrow their candidate's embedding.
    selective,
    /// Non-risky detections get a saturated appearance cost and are left to
    /// the IoU stage (the earlier gating scheme, kept for ablation).
    base_gate,
    /// Every detection is risky; features are always extracted.
    always_extract,
};

std::string_view to_string(ExtractionMode mode);
/// Accepts "selective", "base_gate"/"base", "always_extract"/"always".
ExtractionMode parse_extraction_mode(std::string_view text);

struct GateConfig {
    /// Candidates need IoU strictly above this.
    double theta_iou = 0.2;
    /// Minimum blended alpha for a sole candidate to be trusted.
    double theta_alpha = 0.6;
    bool ars_enabled = true;
    ExtractionMode mode = ExtractionMode::selective;

    /// Throws std::invalid_argument when a threshold is outside [0, 1].
    void validate() const;
};

/// Risky, or non-risky with the index of its sole candidate track.
class RiskLabel {
public:
    static RiskLabel risky() { return RiskLabel(std::nullopt); }
    static RiskLabel non_risky(std::size_t candidate) { return RiskLabel(candidate); }

    bool is_risky() const { return !candidate_.has_value(); }
    /// Only meaningful when !is_risky().
    std::size_t candidate() const { return *candidate_; }

    bool operator==(const RiskLabel&) const = default;

private:
    explicit RiskLabel(std::optional<std::size_t> c) : candidate_(c) {}
    std::optional<std::size_t> candidate_;
};

/// Labels each detection against the predicted boxes of confirmed tracks.
///
/// A detection is non-risky only when exactly one track overlaps it with
/// IoU > theta_iou and, if ARS gating is on, the blended alpha of that pair
/// reaches theta_alpha. Candidate indices refer to `confirmed_track_boxes`.
std::vector<RiskLabel> classify(std::span<const BBox> detection_boxes,
                                std::span<const BBox> confirmed_track_boxes,
                                const GateConfig& config);

/// For base_gate mode: true where the detection's appearance row must be
/// saturated to the maximum cost. Throws std::logic_error in other modes.
std::vector<bool> base_gate_labels(std::span<const RiskLabel> labels, const GateConfig& config);

}  // namespace selectrack
