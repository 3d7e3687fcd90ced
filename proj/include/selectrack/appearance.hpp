#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "selectrack/assignment.hpp"

namespace selectrack {

/// Largest possible cosine distance between unit vectors.
inline constexpr double kMaxCosineDistance = 2.0;

/// Unit-norm appearance embedding. Normalised on construction.
class FeatureVector {
public:
    /// Throws std::invalid_argument for empty, non-finite or zero vectors.
    explicit FeatureVector(Eigen::VectorXd values);
    explicit FeatureVector(std::span<const double> values);
    explicit FeatureVector(std::span<const float> values);

    const Eigen::VectorXd& values() const { return values_; }
    std::size_t dim() const { return static_cast<std::size_t>(values_.size()); }

    bool operator==(const FeatureVector& other) const { return values_ == other.values_; }

private:
    Eigen::VectorXd values_;
};

/// Exponential moving average of a track's embedding with feature decay.
///
/// The blend weight kept on the old embedding is effective_alpha. It starts
/// at base_alpha, is multiplied by base_alpha for every frame that passes
/// without a fresh feature and is reset after each blend, so after k skipped
/// frames the next update uses base_alpha^(k+1).
class EmaState {
public:
    const FeatureVector& embedding() const { return embedding_; }
    double base_alpha() const { return base_alpha_; }
    double effective_alpha() const { return effective_alpha_; }
    int frames_since_feature() const { return frames_since_feature_; }

private:
    EmaState(FeatureVector embedding, double base_alpha)
        : embedding_(std::move(embedding)), base_alpha_(base_alpha), effective_alpha_(base_alpha) {}

    FeatureVector embedding_;
    double base_alpha_;
    double effective_alpha_;
    int frames_since_feature_ = 0;

    friend EmaState init_ema(const FeatureVector&, double);
    friend EmaState mark_skipped(const EmaState&);
    friend EmaState ema_update(const EmaState&, const FeatureVector&);
};

/// Starts an EMA from its first feature. base_alpha must lie in (0, 1).
EmaState init_ema(const FeatureVector& feature, double base_alpha);

/// Records a frame without a fresh feature.
EmaState mark_skipped(const EmaState& state);

/// Blends a fresh feature: normalize(a' * e + (1 - a') * f), then resets the
/// decay. Throws std::domain_error when the blend cancels to zero and
/// std::invalid_argument on a dimension mismatch.
EmaState ema_update(const EmaState& state, const FeatureVector& feature);

/// 1 - a.b, in [0, 2].
double cosine_distance(const FeatureVector& a, const FeatureVector& b);

/// Appearance costs between track embeddings (rows) and detections (cols).
///
/// A detection either carries its own feature or appears in `copies`,
/// mapping it to the row whose embedding it borrows. A copied detection
/// costs 0 against its source row and the inter-track distance elsewhere.
/// Throws std::invalid_argument when a detection has neither, has both, or
/// names a row out of range.
CostMatrix appearance_cost_matrix(std::span<const FeatureVector> track_embeddings,
                                  std::span<const std::optional<FeatureVector>> detections,
                                  const std::map<std::size_t, std::size_t>& copies);

/// Same as above, reading each track's current embedding.
CostMatrix appearance_cost_matrix(std::span<const EmaState> tracks,
                                  std::span<const std::optional<FeatureVector>> detections,
                                  const std::map<std::size_t, std::size_t>& copies);

}  // namespace selectrack
