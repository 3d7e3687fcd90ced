#include "selectrack/gating.hpp"

#include <stdexcept>
#include <string>

namespace selectrack {

std::string_view to_string(ExtractionMode mode) {
    switch (mode) {
        case ExtractionMode::selective:
            return "selective";
        case ExtractionMode::base_gate:
            return "base_gate";
        case ExtractionMode::always_extract:
            return "always_extract";
    }
    return "unknown";
}

ExtractionMode parse_extraction_mode(std::string_view text) {
    if (text == "selective") return ExtractionMode::selective;
    if (text == "base_gate" || text == "base") return ExtractionMode::base_gate;
    if (text == "always_extract" || text == "always") return ExtractionMode::always_extract;
    throw std::invalid_argument("unknown extraction mode '" + std::string(text) +
                                "' (expected selective, base_gate or always)");
}

void GateConfig::validate() const {
    if (!(theta_iou >= 0.0 && theta_iou <= 1.0)) {
        throw std::invalid_argument("GateConfig: theta_iou must lie in [0, 1]");
    }
    if (!(theta_alpha >= 0.0 && theta_alpha <= 1.0)) {
        throw std::invalid_argument("GateConfig: theta_alpha must lie in [0, 1]");
    }
}

std::vector<RiskLabel> classify(std::span<const BBox> detection_boxes,
                                std::span<const BBox> confirmed_track_boxes,
                                const GateConfig& config) {
    config.validate();
    std::vector<RiskLabel> labels(detection_boxes.size(), RiskLabel::risky());
    if (config.mode == ExtractionMode::always_extract) {
        return labels;
    }

    for (std::size_t d = 0; d < detection_boxes.size(); ++d) {
        std::size_t above = 0;
        std::size_t candidate = 0;
        double candidate_iou = 0.0;
        for (std::size_t t = 0; t < confirmed_track_boxes.size() && above < 2; ++t) {
            const double u = iou(detection_boxes[d], confirmed_track_boxes[t]);
            if (u > config.theta_iou) {
                ++above;
                candidate = t;
                candidate_iou = u;
            }
        }
        if (above != 1) {
            continue;
        }
        if (config.ars_enabled) {
            const double v = aspect_ratio_similarity(detection_boxes[d], confirmed_track_boxes[candidate]);
            if (blended_alpha(candidate_iou, v) < config.theta_alpha) {
                continue;
            }
        }
        labels[d] = RiskLabel::non_risky(candidate);
    }
    return labels;
}

std::vector<bool> base_gate_labels(std::span<const RiskLabel> labels, const GateConfig& config) {
    if (config.mode != ExtractionMode::base_gate) {
        throw std::logic_error("base_gate_labels: only valid in base_gate mode");
    }
    std::vector<bool> saturate(labels.size(), false);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        saturate[i] = !labels[i].is_risky();
    }
    return saturate;
}

}  // namespace selectrack
