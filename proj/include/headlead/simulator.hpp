#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "headlead/rng.hpp"
#include "headlead/track.hpp"

namespace headlead {

/// Walking route template. Straight routes hold the initial heading for the
/// whole walk; turn routes ramp the heading by turn_angle (smoothstep) over
/// turn_duration_s starting at turn_start_s. The walker stops once it has
/// covered path_length and stands for the rest of the recording.
struct RouteSpec {
    enum class Kind { straight, turn };

    Kind kind = Kind::straight;
    std::string id = "R1"; // R1..R6
    double start_x = 0.0;  // m
    double start_z = 5.0;  // m
    double initial_yaw = M_PI;
    double path_length = 6.0;    // m
    double turn_angle = 0.0;     // rad, turn only
    double turn_start_s = 2.0;   // s
    double turn_duration_s = 1.0;

    void validate() const;
};

/// The six stock routes: R1/R2 straight (left/right mirrored), R3/R4 turns
/// of +-pi/2, R5/R6 sharper turns of +-3pi/4.
std::vector<RouteSpec> default_routes();

struct SimConfig {
    double speed = 1.2;          // m/s
    double head_lead_s = 0.2;    // head yaw precedes the turn by this much
    double head_overshoot = 0.0; // peak head-yaw swing past the settled
                                 // heading at the end of a turn, rad
    double noise_pos = 0.02;     // observation noise std per axis, m
    double noise_yaw = 0.05;     // observation noise std per yaw, rad
    double fps = 30.0;
    double duration_s = 5.0;
    uint64_t seed = 1;

    void validate() const;
};

/// A generated track together with its noise-free ground truth, kept for
/// error oracles in tests.
struct SimulatedTrack {
    Track track;
    std::vector<Vec3> true_nose;
    std::vector<double> true_heading;
    std::vector<double> true_head_yaw;

    /// Ground-truth nose position at an arbitrary time (linear interpolation
    /// between frames, clamped at the ends).
    Vec3 true_nose_at(double t) const;
};

/// Deterministic given (route, cfg): same inputs give byte-identical
/// serialized tracks. Throws config error if the path leaves the room.
SimulatedTrack simulate_route(const RouteSpec& route, const SimConfig& cfg);

struct Dataset {
    std::vector<SimulatedTrack> tracks; // one per (subject, route)
    std::vector<double> subject_speeds; // uniform in [1.0, 1.4]
};

/// One track per (subject, route). Per-subject speeds come from the master
/// seed; each track runs on its own derived stream
/// (Rng::derive_seed(seed, subject_index, route_index)), so tracks are
/// independent of generation order.
Dataset generate_dataset(int n_subjects, const std::vector<RouteSpec>& routes,
                         const SimConfig& cfg);

/// Generate and write a dataset directory: one s{subject}_{route}.csv per
/// track plus manifest.json recording configs, per-track seeds and speeds.
Dataset write_dataset(const std::string& out_dir, int n_subjects,
                      const std::vector<RouteSpec>& routes,
                      const SimConfig& cfg);

} // namespace headlead
