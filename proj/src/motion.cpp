#include "selectrack/motion.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <stdexcept>

namespace selectrack {

namespace {

using MeasurementMatrix = Eigen::Matrix<double, 4, 8>;

MeasurementMatrix projection() {
    MeasurementMatrix h = MeasurementMatrix::Zero();
    h.leftCols<4>().setIdentity();
    return h;
}

}  // namespace

KalmanFilter::KalmanFilter(MotionConfig config) : config_(config) {
    if (!(config_.position_weight > 0.0) || !(config_.velocity_weight > 0.0)) {
        throw std::invalid_argument("KalmanFilter: noise weights must be positive");
    }
    transition_.setIdentity();
    for (int i = 0; i < 4; ++i) {
        transition_(i, i + 4) = 1.0;
    }
}

Eigen::Vector4d box_to_measurement(const BBox& box) {
    return {box.center_x(), box.center_y(), box.w / box.h, box.h};
}

KalmanState KalmanFilter::initiate(const BBox& box) const {
    require_valid(box, "initiate");
    KalmanState s;
    s.mean.head<4>() = box_to_measurement(box);
    s.mean.tail<4>().setZero();

    const double h = box.h;
    const double p = config_.position_weight * h;
    const double v = config_.velocity_weight * h;
    StateVector std_dev;
    std_dev << 2.0 * p, 2.0 * p, 1e-2, 2.0 * p, 10.0 * v, 10.0 * v, 1e-5, 10.0 * v;
    s.covariance = std_dev.array().square().matrix().asDiagonal();
    return s;
}

KalmanState KalmanFilter::predict(const KalmanState& state) const {
    const double h = state.mean(3);
    const double p = config_.position_weight * h;
    const double v = config_.velocity_weight * h;
    StateVector std_dev;
    std_dev << p, p, 1e-2, p, v, v, 1e-5, v;
    const StateMatrix q = std_dev.array().square().matrix().asDiagonal();

    KalmanState out;
    out.mean = transition_ * state.mean;
    out.covariance = transition_ * state.covariance * transition_.transpose() + q;
    out.covariance = 0.5 * (out.covariance + out.covariance.transpose());
    return out;
}

KalmanState KalmanFilter::update(const KalmanState& state, const BBox& measurement) const {
    require_valid(measurement, "update");
    static const MeasurementMatrix kH = projection();

    const double h = state.mean(3);
    const double p = config_.position_weight * h;
    Eigen::Vector4d r_std(p, p, 1e-1, p);
    const Eigen::Matrix4d r = r_std.array().square().matrix().asDiagonal();

    const Eigen::Vector4d projected = kH * state.mean;
    const Eigen::Matrix4d innovation_cov = kH * state.covariance * kH.transpose() + r;

    const Eigen::LLT<Eigen::Matrix4d> llt(innovation_cov);
    if (llt.info() != Eigen::Success) {
        throw std::runtime_error("KalmanFilter::update: singular innovation covariance");
    }
    // K = P H^T S^-1, computed as (S^-1 H P)^T since S and P are symmetric.
    const Eigen::Matrix<double, 8, 4> gain =
        llt.solve(kH * state.covariance).transpose();

    KalmanState out;
    out.mean = state.mean + gain * (box_to_measurement(measurement) - projected);
    out.covariance = state.covariance - gain * innovation_cov * gain.transpose();
    out.covariance = 0.5 * (out.covariance + out.covariance.transpose());
    return out;
}

BBox state_to_box(const KalmanState& state) {
    const double a = state.mean(2);
    const double h = state.mean(3);
    if (!(a > 0.0) || !(h > 0.0) || !std::isfinite(a) || !std::isfinite(h)) {
        throw std::domain_error("state_to_box: degenerate state (non-positive aspect or height)");
    }
    const double w = a * h;
    return {state.mean(0) - 0.5 * w, state.mean(1) - 0.5 * h, w, h};
}

}  // namespace selectrack
