#pragma once

#include <Eigen/Core>

#include "selectrack/geometry.hpp"

namespace selectrack {

using StateVector = Eigen::Matrix<double, 8, 1>;
using StateMatrix = Eigen::Matrix<double, 8, 8>;

/// Constant-velocity state over (cx, cy, a, h) and their per-frame
/// velocities, with a = w / h.
struct KalmanState {
    StateVector mean = StateVector::Zero();
    StateMatrix covariance = StateMatrix::Identity();
};

/// Noise weights relative to box height. Position std = h * position_weight,
/// velocity std = h * velocity_weight. Aspect-ratio noise is absolute.
struct MotionConfig {
    double position_weight = 1.0 / 20.0;
    double velocity_weight = 1.0 / 160.0;
};

/// Kalman filter with a unit time step. Stateless apart from its noise
/// configuration; all operations take and return states by value.
class KalmanFilter {
public:
    explicit KalmanFilter(MotionConfig config = {});

    KalmanState initiate(const BBox& box) const;
    KalmanState predict(const KalmanState& state) const;

    /// Throws std::runtime_error if the innovation covariance is not
    /// positive definite.
    KalmanState update(const KalmanState& state, const BBox& measurement) const;

    const MotionConfig& config() const { return config_; }

private:
    MotionConfig config_;
    StateMatrix transition_;
};

/// Converts the mean back to a top-left box. Throws std::domain_error when
/// the aspect ratio or height is not positive.
BBox state_to_box(const KalmanState& state);

/// (cx, cy, a, h) of a box.
Eigen::Vector4d box_to_measurement(const BBox& box);

}  // namespace selectrack
