#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "headlead/geometry.hpp"

namespace headlead {

/// One skeleton observation: nose and waist pose at time t. Invalid frames
/// keep their slot in the track (dropped detections, out-of-range data).
struct Frame {
    double t = 0.0;
    Vec3 nose_pos;
    UnitQuaternion nose_q;
    Vec3 waist_pos;
    UnitQuaternion waist_q;
    bool valid = true;
};

/// One recording of one subject walking one route.
struct Track {
    std::string subject_id; // e.g. "01"
    std::string route_id;   // one of R1..R6
    double fps = 30.0;
    std::vector<Frame> frames;

    /// "s{subject}_R{route}" identifier used in file names and reports.
    std::string key() const { return "s" + subject_id + "_" + route_id; }
};

/// Sensor depth interval within which observations are trusted.
struct OperatingRange {
    double min_depth = 0.5;  // m
    double max_depth = 5.46; // m

    void validate() const;
};

bool is_known_route(const std::string& route_id);

/// Parse a track from CSV text (see serialize_track for the format).
/// Errors name the offending 1-based line number. Quaternions off unit norm
/// by more than 1e-3 are rejected; smaller deviations are renormalized.
Track parse_track(const std::string& text);

/// Parse one 16-field data row of the track CSV format; line_no is only
/// used in error messages. Used for line-delimited streaming input.
Frame parse_frame_row(std::string_view line, size_t line_no = 1);

Track load_track(const std::string& path);

/// Serialize with the exact column layout parse_track accepts. Numbers are
/// written with up to 9 significant digits; parse-serialize round-trips are
/// byte-identical.
std::string serialize_track(const Track& track);

void save_track(const Track& track, const std::string& path);

/// Mark frames whose nose depth lies outside [min_depth, max_depth] invalid.
/// Frame count and timestamps are unchanged; idempotent.
Track filter_operating_range(const Track& track, const OperatingRange& range);

/// Per-frame head-pose angle (nose yaw relative to waist yaw). Invalid and
/// degenerate-orientation frames yield nullopt.
std::vector<std::optional<YawAngle>> head_pose_series(const Track& track);

} // namespace headlead
