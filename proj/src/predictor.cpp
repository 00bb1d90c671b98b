#include "headlead/predictor.hpp"

#include <cmath>

namespace headlead {

void PredictorConfig::validate() const {
    if (n_steps < 1) {
        throw Error(ErrorKind::config, "predictor: n_steps must be >= 1");
    }
    if (!(w_max > 0.0) || !std::isfinite(w_max)) {
        throw Error(ErrorKind::config, "predictor: w_max must be positive");
    }
    if (!(w >= 0.0) || !(w <= w_max)) {
        throw Error(ErrorKind::config,
                    "predictor: w must lie within [0, w_max]");
    }
}

Vector6d displacement_kalman(const StateEstimate& s, const CvModel& model) {
    return model.F * s.x_hat - s.x_hat;
}

Vector6d displacement_head(const Vector6d& d_kalman, const YawAngle& theta) {
    const Vec3 pos = rotate_yaw({d_kalman(0), d_kalman(1), d_kalman(2)}, theta);
    const Vec3 vel = rotate_yaw({d_kalman(3), d_kalman(4), d_kalman(5)}, theta);
    Vector6d out;
    out << pos.x, pos.y, pos.z, vel.x, vel.y, vel.z;
    return out;
}

Vector6d blend(const Vector6d& d_kalman, const Vector6d& d_head, double w,
               double w_max) {
    if (!(w >= 0.0) || !(w <= w_max)) {
        throw Error(ErrorKind::invalid_argument,
                    "blend: w must lie within [0, w_max]");
    }
    // Delta form of (1-w) d_kalman + w d_head: bit-exact identity both when
    // w = 0 and when the rotated displacement equals the raw one (theta = 0),
    // which keeps the tuning objective exactly flat on straight motion.
    return d_kalman + w * (d_head - d_kalman);
}

Vec3 predict_n_steps(const StateEstimate& s, const YawAngle& theta,
                     const PredictorConfig& cfg, const CvModel& model) {
    cfg.validate();
    const Vector6d d_kalman = displacement_kalman(s, model);
    const Vector6d d_head = displacement_head(d_kalman, theta);
    const Vector6d d_p = blend(d_kalman, d_head, cfg.w, cfg.w_max);
    const Vector6d predicted =
        s.x_hat + static_cast<double>(cfg.n_steps) * d_p;
    return {predicted(0), predicted(1), predicted(2)};
}

HeadTracker::HeadTracker(const KalmanConfig& kcfg, const PredictorConfig& pcfg,
                         double gap_reset_s)
    : kcfg_(kcfg),
      pcfg_(pcfg),
      model_(CvModel::from_config(kcfg)),
      gap_reset_s_(gap_reset_s),
      angle_filter_(kcfg) {
    pcfg_.validate();
    if (!(gap_reset_s_ > 0.0)) {
        throw Error(ErrorKind::config, "gap_reset_s must be positive");
    }
}

void HeadTracker::reset() {
    initialized_ = false;
    angle_filter_.reset();
    state_ = StateEstimate{};
}

std::optional<PredictionTriple> HeadTracker::step(const Frame& frame) {
    if (!frame.valid) {
        return std::nullopt;
    }
    double theta_obs = 0.0;
    try {
        theta_obs = relative_head_yaw(frame.nose_q, frame.waist_q).theta;
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::degenerate_orientation) {
            return std::nullopt; // unusable pose, treat as dropped
        }
        throw;
    }

    if (initialized_ && frame.t - last_valid_t_ > gap_reset_s_) {
        reset();
    }

    if (!initialized_) {
        state_ = init_state(frame.nose_pos, kcfg_);
        angle_filter_.update(theta_obs);
        initialized_ = true;
    } else {
        // Catch up one predict per elapsed tick: missing or invalid frames
        // in between are coasted with no measurement.
        const double elapsed = frame.t - last_valid_t_;
        const long ticks =
            std::max<long>(1, std::lround(elapsed / kcfg_.dt));
        for (long i = 0; i < ticks; ++i) {
            state_ = predict_step(state_, model_);
            angle_filter_.predict();
        }
        state_ = update_step(state_, frame.nose_pos, model_);
        angle_filter_.update(theta_obs);
    }
    last_valid_t_ = frame.t;

    PredictionTriple triple;
    triple.estimated = state_.position();
    triple.baseline = baseline_predict_n(state_, pcfg_.n_steps, model_);
    triple.proposed = predict_n_steps(
        state_, YawAngle{angle_filter_.angle()}, pcfg_, model_);
    return triple;
}

} // namespace headlead
