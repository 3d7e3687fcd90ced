#include "selectrack/appearance.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace selectrack {

namespace {

Eigen::VectorXd normalized(Eigen::VectorXd v) {
    if (v.size() == 0) {
        throw std::invalid_argument("FeatureVector: empty vector");
    }
    if (!v.allFinite()) {
        throw std::invalid_argument("FeatureVector: non-finite component");
    }
    const double n = v.norm();
    if (!(n > 0.0)) {
        throw std::invalid_argument("FeatureVector: zero vector cannot be normalised");
    }
    v /= n;
    return v;
}

}  // namespace

FeatureVector::FeatureVector(Eigen::VectorXd values) : values_(normalized(std::move(values))) {}

FeatureVector::FeatureVector(std::span<const double> values)
    : FeatureVector(Eigen::VectorXd(
          Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size())))) {}

FeatureVector::FeatureVector(std::span<const float> values)
    : FeatureVector(Eigen::Map<const Eigen::VectorXf>(values.data(),
                                                      static_cast<Eigen::Index>(values.size()))
                        .cast<double>()
                        .eval()) {}

EmaState init_ema(const FeatureVector& feature, double base_alpha) {
    if (!(base_alpha > 0.0 && base_alpha < 1.0)) {
        throw std::invalid_argument("init_ema: base_alpha must lie in (0, 1)");
    }
    return EmaState(feature, base_alpha);
}

EmaState mark_skipped(const EmaState& state) {
    EmaState out = state;
    out.effective_alpha_ *= out.base_alpha_;
    ++out.frames_since_feature_;
    return out;
}

EmaState ema_update(const EmaState& state, const FeatureVector& feature) {
    if (feature.dim() != state.embedding_.dim()) {
        throw std::invalid_argument("ema_update: feature dimension " + std::to_string(feature.dim()) +
                                    " does not match embedding dimension " +
                                    std::to_string(state.embedding_.dim()));
    }
    const double w = state.effective_alpha_;
    Eigen::VectorXd blended = w * state.embedding_.values() + (1.0 - w) * feature.values();
    if (!(blended.norm() > 0.0)) {
        throw std::domain_error("ema_update: blended embedding cancelled to zero");
    }
    EmaState out(FeatureVector(std::move(blended)), state.base_alpha_);
    return out;
}

double cosine_distance(const FeatureVector& a, const FeatureVector& b) {
    if (a.dim() != b.dim()) {
        throw std::invalid_argument("cosine_distance: dimension mismatch");
    }
    return std::clamp(1.0 - a.values().dot(b.values()), 0.0, kMaxCosineDistance);
}

CostMatrix appearance_cost_matrix(std::span<const FeatureVector> track_embeddings,
                                  std::span<const std::optional<FeatureVector>> detections,
                                  const std::map<std::size_t, std::size_t>& copies) {
    const std::size_t rows = track_embeddings.size();
    const std::size_t cols = detections.size();
    for (const auto& [det, row] : copies) {
        if (det >= cols) {
            throw std::invalid_argument("appearance_cost_matrix: copy names unknown detection " +
                                        std::to_string(det));
        }
        if (row >= rows) {
            throw std::invalid_argument("appearance_cost_matrix: copy names unknown track " +
                                        std::to_string(row));
        }
    }

    CostMatrix m(rows, cols);
    for (std::size_t j = 0; j < cols; ++j) {
        const auto copy = copies.find(j);
        const bool has_feature = detections[j].has_value();
        if (has_feature && copy != copies.end()) {
            throw std::invalid_argument("appearance_cost_matrix: detection " + std::to_string(j) +
                                        " has both a feature and a copy source");
        }
        if (!has_feature && copy == copies.end()) {
            throw std::invalid_argument("appearance_cost_matrix: detection " + std::to_string(j) +
                                        " has neither a feature nor a copy source");
        }
        const FeatureVector& f = has_feature ? *detections[j] : track_embeddings[copy->second];
        for (std::size_t i = 0; i < rows; ++i) {
            const bool is_source = !has_feature && i == copy->second;
            m.set(i, j, is_source ? 0.0 : cosine_distance(track_embeddings[i], f));
        }
    }
    return m;
}

CostMatrix appearance_cost_matrix(std::span<const EmaState> tracks,
                                  std::span<const std::optional<FeatureVector>> detections,
                                  const std::map<std::size_t, std::size_t>& copies) {
    std::vector<FeatureVector> embeddings;
    embeddings.reserve(tracks.size());
    for (const auto& t : tracks) embeddings.push_back(t.embedding());
    return appearance_cost_matrix(std::span<const FeatureVector>(embeddings), detections, copies);
}

}  // namespace selectrack
