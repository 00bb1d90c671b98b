#pragma once

#include <optional>

#include "headlead/kalman.hpp"
#include "headlead/track.hpp"

namespace headlead {

struct PredictorConfig {
    double w = 0.0;     // blend weight
    int n_steps = 15;   // horizon in steps (500 ms at 30 fps)
    double w_max = 1.0; // upper clamp for w

    void validate() const;
};

/// Positions (a)/(b)/(c) emitted per frame: the filtered observation, the
/// conventional N-step prediction, and the head-pose-blended prediction.
struct PredictionTriple {
    Vec3 estimated;
    Vec3 baseline;
    Vec3 proposed;
};

/// One-step Kalman displacement F x_hat - x_hat. For the constant-velocity
/// model the position block is dt*v and the velocity block is zero.
Vector6d displacement_kalman(const StateEstimate& s, const CvModel& model);

/// The displacement rotated by the head-pose angle. The yaw rotation is
/// applied block-diagonally to the position and velocity sub-vectors; for
/// the CV model the velocity block is zero, so this equals rotating the
/// position block alone.
Vector6d displacement_head(const Vector6d& d_kalman, const YawAngle& theta);

/// (1-w) d_kalman + w d_head, componentwise. Computed in delta form
/// d_kalman + w (d_head - d_kalman), so w = 0 and theta = 0 both reproduce
/// d_kalman bit-exactly.
Vector6d blend(const Vector6d& d_kalman, const Vector6d& d_head, double w,
               double w_max = 1.0);

/// N-step head-position prediction: position block of x_hat + N d_p, where
/// d_p chains the one-step displacement, its head-pose rotation, and the
/// blend. With w = 0 this equals baseline_predict_n exactly.
Vec3 predict_n_steps(const StateEstimate& s, const YawAngle& theta,
                     const PredictorConfig& cfg, const CvModel& model);

/// Per-person prediction pipeline: the 6-D position/velocity filter and the
/// scalar head-pose angle filter, fed frame by frame. Invalid frames are
/// coasted (predict without update); gaps longer than gap_reset_s reset both
/// filters so the next valid frame re-initializes.
class HeadTracker {
public:
    HeadTracker(const KalmanConfig& kcfg, const PredictorConfig& pcfg,
                double gap_reset_s = 1.0);

    /// Process one frame; returns the prediction triple for valid frames
    /// once the filter is initialized, nullopt otherwise.
    std::optional<PredictionTriple> step(const Frame& frame);

    void reset();

    bool initialized() const { return initialized_; }
    const StateEstimate& state() const { return state_; }
    double filtered_head_yaw() const { return angle_filter_.angle(); }

private:
    KalmanConfig kcfg_;
    PredictorConfig pcfg_;
    CvModel model_;
    double gap_reset_s_;
    StateEstimate state_;
    AngleKalman angle_filter_;
    bool initialized_ = false;
    double last_valid_t_ = 0.0;
};

} // namespace headlead
