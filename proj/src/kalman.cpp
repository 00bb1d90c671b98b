#include "headlead/kalman.hpp"

namespace headlead {

void KalmanConfig::validate() const {
    if (!(dt > 0.0) || !std::isfinite(dt)) {
        throw Error(ErrorKind::config, "kalman: dt must be positive");
    }
    if (!(q_accel > 0.0) || !(r_pos > 0.0)) {
        throw Error(ErrorKind::config,
                    "kalman: q_accel and r_pos must be positive");
    }
    if (!(q_yaw > 0.0) || !(r_yaw > 0.0)) {
        throw Error(ErrorKind::config,
                    "kalman: q_yaw and r_yaw must be positive");
    }
}

CvModel CvModel::from_config(const KalmanConfig& cfg) {
    cfg.validate();
    const double dt = cfg.dt;

    CvModel m;
    m.dt = dt;
    m.F = Matrix6d::Identity();
    m.F.block<3, 3>(0, 3) = dt * Eigen::Matrix3d::Identity();

    m.H = Matrix36d::Zero();
    m.H.block<3, 3>(0, 0) = Eigen::Matrix3d::Identity();

    // Discretized white-noise-acceleration covariance.
    const double d2 = dt * dt;
    const double d3 = d2 * dt;
    const double d4 = d3 * dt;
    m.Q = Matrix6d::Zero();
    m.Q.block<3, 3>(0, 0) = (cfg.q_accel * d4 / 4.0) * Eigen::Matrix3d::Identity();
    m.Q.block<3, 3>(0, 3) = (cfg.q_accel * d3 / 2.0) * Eigen::Matrix3d::Identity();
    m.Q.block<3, 3>(3, 0) = (cfg.q_accel * d3 / 2.0) * Eigen::Matrix3d::Identity();
    m.Q.block<3, 3>(3, 3) = (cfg.q_accel * d2) * Eigen::Matrix3d::Identity();

    m.Rm = (cfg.r_pos * cfg.r_pos) * Eigen::Matrix3d::Identity();
    return m;
}

StateEstimate init_state(const Vec3& first_obs, const KalmanConfig& cfg) {
    if (!first_obs.finite()) {
        throw Error(ErrorKind::invalid_argument,
                    "init_state: observation must be finite");
    }
    cfg.validate();
    StateEstimate s;
    s.x_hat << first_obs.x, first_obs.y, first_obs.z, 0.0, 0.0, 0.0;
    s.P.block<3, 3>(0, 0) =
        (cfg.r_pos * cfg.r_pos) * Eigen::Matrix3d::Identity();
    s.P.block<3, 3>(3, 3) =
        (kInitVelocityStd * kInitVelocityStd) * Eigen::Matrix3d::Identity();
    return s;
}

StateEstimate predict_step(const StateEstimate& s, const CvModel& model) {
    StateEstimate out;
    out.x_hat = model.F * s.x_hat;
    out.P = model.F * s.P * model.F.transpose() + model.Q;
    out.P = 0.5 * (out.P + out.P.transpose()).eval();
    return out;
}

StateEstimate update_step(const StateEstimate& s, const Vec3& z,
                          const CvModel& model) {
    if (!z.finite()) {
        throw Error(ErrorKind::invalid_argument,
                    "update_step: observation must be finite");
    }
    const Eigen::Vector3d zv(z.x, z.y, z.z);
    const Eigen::Matrix3d S =
        model.H * s.P * model.H.transpose() + model.Rm;

    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(S);
    const double lmin = es.eigenvalues().minCoeff();
    const double lmax = es.eigenvalues().maxCoeff();
    if (!(lmin > 0.0) || lmax / lmin > 1e12) {
        throw Error(ErrorKind::numeric_degeneracy,
                    "update_step: innovation covariance is near-singular");
    }

    const Eigen::Matrix<double, 6, 3> K =
        s.P * model.H.transpose() * S.inverse();
    StateEstimate out;
    out.x_hat = s.x_hat + K * (zv - model.H * s.x_hat);
    out.P = (Matrix6d::Identity() - K * model.H) * s.P;
    out.P = 0.5 * (out.P + out.P.transpose()).eval();
    return out;
}

Vec3 baseline_predict_n(const StateEstimate& s, int n_steps,
                        const CvModel& model) {
    if (n_steps < 1) {
        throw Error(ErrorKind::invalid_argument,
                    "baseline_predict_n: N must be >= 1");
    }
    // Computed as x_hat + N * (F x_hat - x_hat) rather than p + N*dt*v so
    // the blended predictor reproduces this value bit for bit at w = 0.
    const Vector6d d = model.F * s.x_hat - s.x_hat;
    const Vector6d predicted = s.x_hat + static_cast<double>(n_steps) * d;
    return {predicted(0), predicted(1), predicted(2)};
}

AngleKalman::AngleKalman(const KalmanConfig& cfg) {
    cfg.validate();
    const double dt = cfg.dt;
    F_ << 1.0, dt, 0.0, 1.0;
    const double d2 = dt * dt;
    Q_ << cfg.q_yaw * d2 * d2 / 4.0, cfg.q_yaw * d2 * dt / 2.0,
        cfg.q_yaw * d2 * dt / 2.0, cfg.q_yaw * d2;
    r_var_ = cfg.r_yaw * cfg.r_yaw;
}

void AngleKalman::reset() {
    initialized_ = false;
    x_.setZero();
    P_.setZero();
}

void AngleKalman::predict() {
    if (!initialized_) {
        return;
    }
    x_ = F_ * x_;
    x_(0) = wrap_angle(x_(0)).theta;
    P_ = F_ * P_ * F_.transpose() + Q_;
}

void AngleKalman::update(double observed_angle) {
    const double z = wrap_angle(observed_angle).theta;
    if (!initialized_) {
        // Initial rate uncertainty sized for walking turn rates.
        constexpr double kInitRateStd = 2.0;
        x_ << z, 0.0;
        P_ << r_var_, 0.0, 0.0, kInitRateStd * kInitRateStd;
        initialized_ = true;
        return;
    }
    const double innovation = wrap_angle(z - x_(0)).theta;
    const double s_var = P_(0, 0) + r_var_;
    const Eigen::Vector2d k = P_.col(0) / s_var;
    x_ += k * innovation;
    x_(0) = wrap_angle(x_(0)).theta;
    P_ -= k * P_.row(0);
    P_ = 0.5 * (P_ + P_.transpose()).eval();
}

} // namespace headlead
