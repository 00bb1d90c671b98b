#include "headlead/track.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <cstring>
#include <sstream>

#include "headlead/textio.hpp"

namespace headlead {

namespace {

const char* kHeader =
    "t,nose_x,nose_y,nose_z,nose_qw,nose_qx,nose_qy,nose_qz,"
    "waist_x,waist_y,waist_z,waist_qw,waist_qx,waist_qy,waist_qz,valid";

[[noreturn]] void parse_fail(size_t line_no, const std::string& what) {
    throw Error(ErrorKind::parse,
                "line " + std::to_string(line_no) + ": " + what);
}

double parse_double(std::string_view tok, size_t line_no) {
    double v = 0.0;
    const char* first = tok.data();
    const char* last = tok.data() + tok.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{} || ptr != last) {
        parse_fail(line_no, "bad number '" + std::string(tok) + "'");
    }
    return v;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    size_t start = 0;
    while (true) {
        const size_t pos = s.find(sep, start);
        if (pos == std::string_view::npos) {
            out.push_back(s.substr(start));
            break;
        }
        out.push_back(s.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

/// Quaternion field handling on parse: valid rows must be within 1e-3 of
/// unit norm; meaningfully off-unit values are renormalized, while values
/// already unit to well past the 9-digit precision of the text format are
/// kept verbatim so serialize(parse(text)) == text. Invalid rows fall back
/// to identity when degenerate so the frame stays constructible.
UnitQuaternion parse_quat(const std::array<double, 4>& q, bool valid,
                          size_t line_no, const char* joint) {
    const double n =
        std::sqrt(q[0] * q[0] + q[1] * q[1] + q[2] * q[2] + q[3] * q[3]);
    if (valid && (!std::isfinite(n) || std::abs(n - 1.0) > 1e-3)) {
        parse_fail(line_no, std::string(joint) +
                                " quaternion norm off unit by > 1e-3");
    }
    if (!valid && (!std::isfinite(n) || n < 1e-12)) {
        return UnitQuaternion{};
    }
    if (std::abs(n - 1.0) <= 1e-6) {
        UnitQuaternion out;
        out.qw = q[0];
        out.qx = q[1];
        out.qy = q[2];
        out.qz = q[3];
        return out;
    }
    return UnitQuaternion(q[0], q[1], q[2], q[3]);
}

} // namespace

void OperatingRange::validate() const {
    if (!(0.0 < min_depth) || !(min_depth < max_depth)) {
        throw Error(ErrorKind::config,
                    "operating range requires 0 < min_depth < max_depth");
    }
}

bool is_known_route(const std::string& route_id) {
    return route_id.size() == 2 && route_id[0] == 'R' && route_id[1] >= '1' &&
           route_id[1] <= '6';
}

Frame parse_frame_row(std::string_view line, size_t line_no) {
    const auto tok = split(line, ',');
    if (tok.size() != 16) {
        parse_fail(line_no,
                   "expected 16 fields, got " + std::to_string(tok.size()));
    }
    double f[15];
    for (int i = 0; i < 15; ++i) {
        f[i] = parse_double(tok[i], line_no);
    }
    const std::string_view vtok = tok[15];
    bool valid = false;
    if (vtok == "1") {
        valid = true;
    } else if (vtok == "0") {
        valid = false;
    } else {
        parse_fail(line_no, "valid must be 0 or 1");
    }

    Frame frame;
    frame.t = f[0];
    frame.nose_pos = {f[1], f[2], f[3]};
    frame.nose_q = parse_quat({f[4], f[5], f[6], f[7]}, valid, line_no, "nose");
    frame.waist_pos = {f[8], f[9], f[10]};
    frame.waist_q =
        parse_quat({f[11], f[12], f[13], f[14]}, valid, line_no, "waist");
    frame.valid = valid;

    if (valid) {
        if (!std::isfinite(frame.t) || !frame.nose_pos.finite() ||
            !frame.waist_pos.finite()) {
            parse_fail(line_no, "non-finite field in valid frame");
        }
    }
    return frame;
}

Track parse_track(const std::string& text) {
    Track track;
    track.fps = 0.0;

    std::istringstream in(text);
    std::string line;
    size_t line_no = 0;
    bool seen_header = false;
    bool seen_meta = false;

    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        if (line.rfind("#meta ", 0) == 0) {
            if (seen_header) {
                parse_fail(line_no, "#meta after header");
            }
            seen_meta = true;
            for (const auto kv : split(std::string_view(line).substr(6), ' ')) {
                if (kv.empty()) {
                    continue;
                }
                const size_t eq = kv.find('=');
                if (eq == std::string_view::npos) {
                    parse_fail(line_no, "bad #meta entry '" + std::string(kv) + "'");
                }
                const std::string key(kv.substr(0, eq));
                const std::string value(kv.substr(eq + 1));
                if (key == "subject_id") {
                    track.subject_id = value;
                } else if (key == "route_id") {
                    track.route_id = value;
                } else if (key == "fps") {
                    track.fps = parse_double(value, line_no);
                } else {
                    parse_fail(line_no, "unknown #meta key '" + key + "'");
                }
            }
            continue;
        }
        if (line[0] == '#') {
            continue; // other comments ignored
        }
        if (!seen_header) {
            if (line != kHeader) {
                parse_fail(line_no, "malformed header");
            }
            seen_header = true;
            continue;
        }

        const Frame frame = parse_frame_row(line, line_no);
        if (!track.frames.empty() && !(frame.t > track.frames.back().t)) {
            parse_fail(line_no, "non-monotone timestamp");
        }
        track.frames.push_back(frame);
    }

    if (!seen_meta) {
        throw Error(ErrorKind::parse,
                    "missing #meta line (subject_id, route_id, fps)");
    }
    if (!seen_header) {
        throw Error(ErrorKind::parse, "missing header line");
    }
    if (!(track.fps > 0.0)) {
        throw Error(ErrorKind::parse, "#meta fps must be positive");
    }
    if (!is_known_route(track.route_id)) {
        throw Error(ErrorKind::parse,
                    "#meta route_id must be one of R1..R6, got '" +
                        track.route_id + "'");
    }
    return track;
}

Track load_track(const std::string& path) {
    try {
        return parse_track(read_file(path));
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::parse) {
            throw Error(ErrorKind::parse, path + ": " + e.what());
        }
        throw;
    }
}

std::string serialize_track(const Track& track) {
    std::string out;
    out.reserve(64 + track.frames.size() * 160);
    out += "#meta subject_id=" + track.subject_id +
           " route_id=" + track.route_id + " fps=" + format_g9(track.fps) +
           "\n";
    out += kHeader;
    out += '\n';
    for (const Frame& f : track.frames) {
        const double row[15] = {
            f.t,           f.nose_pos.x,  f.nose_pos.y,  f.nose_pos.z,
            f.nose_q.qw,   f.nose_q.qx,   f.nose_q.qy,   f.nose_q.qz,
            f.waist_pos.x, f.waist_pos.y, f.waist_pos.z, f.waist_q.qw,
            f.waist_q.qx,  f.waist_q.qy,  f.waist_q.qz};
        for (double v : row) {
            out += format_g9(v);
            out += ',';
        }
        out += f.valid ? '1' : '0';
        out += '\n';
    }
    return out;
}

void save_track(const Track& track, const std::string& path) {
    write_file(path, serialize_track(track));
}

Track filter_operating_range(const Track& track, const OperatingRange& range) {
    range.validate();
    Track out = track;
    for (Frame& f : out.frames) {
        if (!f.valid) {
            continue;
        }
        const double depth = f.nose_pos.z;
        if (depth < range.min_depth || depth > range.max_depth) {
            f.valid = false;
        }
    }
    return out;
}

std::vector<std::optional<YawAngle>> head_pose_series(const Track& track) {
    std::vector<std::optional<YawAngle>> out;
    out.reserve(track.frames.size());
    for (const Frame& f : track.frames) {
        if (!f.valid) {
            out.push_back(std::nullopt);
            continue;
        }
        try {
            out.push_back(relative_head_yaw(f.nose_q, f.waist_q));
        } catch (const Error& e) {
            if (e.kind() == ErrorKind::degenerate_orientation) {
                out.push_back(std::nullopt);
            } else {
                throw;
            }
        }
    }
    return out;
}

} // namespace headlead
