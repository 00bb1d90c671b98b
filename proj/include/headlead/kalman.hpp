#pragma once

#include <Eigen/Dense>

#include "headlead/geometry.hpp"

namespace headlead {

using Vector6d = Eigen::Matrix<double, 6, 1>;
using Matrix6d = Eigen::Matrix<double, 6, 6>;
using Matrix36d = Eigen::Matrix<double, 3, 6>;

/// Noise and timing parameters of the constant-velocity filter pair
/// (6-D position/velocity filter plus the scalar head-pose angle filter).
struct KalmanConfig {
    double dt = 1.0 / 30.0;  // seconds per step
    double q_accel = 2.0;    // process noise spectral density, m^2/s^3
    double r_pos = 0.02;     // measurement noise std, m
    double q_yaw = 2.0;      // angle filter process noise, rad^2/s^3
    double r_yaw = 0.05;     // angle filter measurement noise std, rad

    void validate() const;
};

/// Discrete constant-velocity model matrices, derived from KalmanConfig.
/// State layout: (px, py, pz, vx, vy, vz).
struct CvModel {
    Matrix6d F;
    Matrix36d H;
    Matrix6d Q;
    Eigen::Matrix3d Rm;
    double dt = 0.0;

    static CvModel from_config(const KalmanConfig& cfg);
};

struct StateEstimate {
    Vector6d x_hat = Vector6d::Zero();
    Matrix6d P = Matrix6d::Zero();

    Vec3 position() const { return {x_hat(0), x_hat(1), x_hat(2)}; }
    Vec3 velocity() const { return {x_hat(3), x_hat(4), x_hat(5)}; }
};

/// Standard deviation assigned to the unknown initial velocity, m/s.
/// Covers walking speeds.
inline constexpr double kInitVelocityStd = 2.0;

StateEstimate init_state(const Vec3& first_obs, const KalmanConfig& cfg);

StateEstimate predict_step(const StateEstimate& s, const CvModel& model);

/// Measurement update with a 3-D position observation. Throws
/// numeric_degeneracy when the innovation covariance is ill-conditioned.
StateEstimate update_step(const StateEstimate& s, const Vec3& z,
                          const CvModel& model);

/// Position block of F^N x_hat, i.e. p + N*dt*v. The conventional N-step
/// prediction used as the comparison baseline.
Vec3 baseline_predict_n(const StateEstimate& s, int n_steps,
                        const CvModel& model);

/// Scalar constant-velocity filter over the head-pose angle. State is
/// (angle, angular rate); innovations are wrapped to (-pi, pi] so the
/// filter tracks across the branch cut.
class AngleKalman {
public:
    explicit AngleKalman(const KalmanConfig& cfg);

    bool initialized() const { return initialized_; }
    double angle() const { return x_(0); }
    double rate() const { return x_(1); }

    void reset();

    /// Time update. No-op until the first observation arrives.
    void predict();

    /// Measurement update; initializes on the first call.
    void update(double observed_angle);

private:
    Eigen::Matrix2d F_;
    Eigen::Matrix2d Q_;
    double r_var_;
    Eigen::Vector2d x_ = Eigen::Vector2d::Zero();
    Eigen::Matrix2d P_ = Eigen::Matrix2d::Zero();
    bool initialized_ = false;
};

} // namespace headlead
