#include "headlead/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>

#include <nlohmann/json.hpp>

#include "headlead/textio.hpp"

namespace headlead {

namespace {

// Lab-sized walking area, camera at the origin looking along +z.
constexpr double kRoomHalfWidth = 3.65; // x extent +-3.65 m (7.3 m wall)
constexpr double kRoomZMin = -1.0;      // camera 1 m from the back wall
constexpr double kRoomZMax = 8.0;       // 9.0 m deep in total

constexpr double kNoseY = -0.35; // head above the camera axis (y is down)
constexpr double kWaistY = 0.30;

double smoothstep01(double u) {
    u = std::clamp(u, 0.0, 1.0);
    return u * u * (3.0 - 2.0 * u);
}

double heading_at(const RouteSpec& route, double t) {
    if (route.kind == RouteSpec::Kind::straight) {
        return route.initial_yaw;
    }
    const double u = (t - route.turn_start_s) / route.turn_duration_s;
    return route.initial_yaw + route.turn_angle * smoothstep01(u);
}

double head_yaw_at(const RouteSpec& route, const SimConfig& cfg, double t) {
    double yaw = heading_at(route, t + cfg.head_lead_s);
    if (route.kind == RouteSpec::Kind::turn && cfg.head_overshoot != 0.0) {
        const double u =
            (t + cfg.head_lead_s - route.turn_start_s) / route.turn_duration_s;
        // Overshoot pulse peaking as the head finishes its turn: the head
        // briefly swings head_overshoot past the settled heading and eases
        // back over the tail of the pulse.
        if (u > 0.5 && u < 1.5) {
            const double sign = route.turn_angle < 0.0 ? -1.0 : 1.0;
            const double p = std::sin(M_PI * (u - 0.5));
            yaw += sign * cfg.head_overshoot * p * p;
        }
    }
    return yaw;
}

bool inside_room(double x, double z) {
    return std::abs(x) <= kRoomHalfWidth && z >= kRoomZMin && z <= kRoomZMax;
}

/// Per-track noise stream derived from (subject, canonical route number),
/// so a subset of routes reproduces the same tracks as the full set.
uint64_t track_seed(uint64_t master, int subject_index, const RouteSpec& route) {
    const uint64_t route_number = static_cast<uint64_t>(route.id[1] - '0');
    return Rng::derive_seed(master, static_cast<uint64_t>(subject_index) + 1,
                            route_number);
}

} // namespace

void RouteSpec::validate() const {
    if (!is_known_route(id)) {
        throw Error(ErrorKind::config, "route id must be one of R1..R6");
    }
    if (!(path_length > 0.0)) {
        throw Error(ErrorKind::config, "route path_length must be positive");
    }
    if (kind == Kind::turn && !(turn_duration_s > 0.0)) {
        throw Error(ErrorKind::config,
                    "turn routes need a positive turn_duration_s");
    }
    if (!inside_room(start_x, start_z)) {
        throw Error(ErrorKind::config, "route start lies outside the room");
    }
}

void SimConfig::validate() const {
    if (!(speed > 0.0) || !(fps > 0.0) || !(duration_s > 0.0)) {
        throw Error(ErrorKind::config,
                    "sim: speed, fps and duration_s must be positive");
    }
    if (noise_pos < 0.0 || noise_yaw < 0.0 || head_lead_s < 0.0) {
        throw Error(ErrorKind::config,
                    "sim: noise stds and head_lead_s must be >= 0");
    }
}

std::vector<RouteSpec> default_routes() {
    std::vector<RouteSpec> routes(6);

    // R1/R2: straight diagonals toward a point just beside the camera.
    routes[0] = {RouteSpec::Kind::straight, "R1", -1.0, 5.4,
                 std::atan2(1.5, -4.9), 6.0, 0.0, 2.0, 1.0};
    routes[1] = {RouteSpec::Kind::straight, "R2", 1.0, 5.4,
                 std::atan2(-1.5, -4.9), 6.0, 0.0, 2.0, 1.0};
    // R3/R4: right-angle turns across the camera's view.
    routes[2] = {RouteSpec::Kind::turn, "R3", 0.8,  5.4, M_PI,
                 6.0,  M_PI / 2.0, 2.0, 1.0};
    routes[3] = {RouteSpec::Kind::turn, "R4", -0.8, 5.4, M_PI,
                 6.0, -M_PI / 2.0, 2.0, 1.0};
    // R5/R6: sharper turns heading back away from the camera.
    routes[4] = {RouteSpec::Kind::turn, "R5", 0.8,  5.4, M_PI,
                 6.0,  3.0 * M_PI / 4.0, 2.0, 1.0};
    routes[5] = {RouteSpec::Kind::turn, "R6", -0.8, 5.4, M_PI,
                 6.0, -3.0 * M_PI / 4.0, 2.0, 1.0};
    return routes;
}

Vec3 SimulatedTrack::true_nose_at(double t) const {
    if (true_nose.empty()) {
        throw Error(ErrorKind::invalid_argument, "empty simulated track");
    }
    const double pos = t * track.fps;
    if (pos <= 0.0) {
        return true_nose.front();
    }
    const auto last = static_cast<double>(true_nose.size() - 1);
    if (pos >= last) {
        return true_nose.back();
    }
    const auto i0 = static_cast<size_t>(pos);
    const double frac = pos - static_cast<double>(i0);
    const Vec3& a = true_nose[i0];
    const Vec3& b = true_nose[i0 + 1];
    return a + (b - a) * frac;
}

SimulatedTrack simulate_route(const RouteSpec& route, const SimConfig& cfg) {
    route.validate();
    cfg.validate();

    const double dt = 1.0 / cfg.fps;
    const auto n_frames =
        static_cast<size_t>(std::lround(cfg.duration_s * cfg.fps));

    SimulatedTrack sim;
    sim.track.subject_id = "00";
    sim.track.route_id = route.id;
    sim.track.fps = cfg.fps;
    sim.track.frames.reserve(n_frames);
    sim.true_nose.reserve(n_frames);

    Rng rng(cfg.seed);

    double x = route.start_x;
    double z = route.start_z;
    double walked = 0.0;

    for (size_t i = 0; i < n_frames; ++i) {
        const double t = static_cast<double>(i) / cfg.fps;
        const double heading = heading_at(route, t);
        const double head_yaw = head_yaw_at(route, cfg, t);

        if (!inside_room(x, z)) {
            throw Error(ErrorKind::config,
                        "route " + route.id + " leaves the room bounds at t=" +
                            format_g9(t));
        }

        sim.true_nose.push_back({x, kNoseY, z});
        sim.true_heading.push_back(heading);
        sim.true_head_yaw.push_back(head_yaw);

        Frame f;
        f.t = t;
        f.valid = true;
        f.nose_pos = {x + rng.gauss(0.0, cfg.noise_pos),
                      kNoseY + rng.gauss(0.0, cfg.noise_pos),
                      z + rng.gauss(0.0, cfg.noise_pos)};
        f.waist_pos = {x + rng.gauss(0.0, cfg.noise_pos),
                       kWaistY + rng.gauss(0.0, cfg.noise_pos),
                       z + rng.gauss(0.0, cfg.noise_pos)};
        f.nose_q =
            UnitQuaternion::from_yaw(head_yaw + rng.gauss(0.0, cfg.noise_yaw));
        f.waist_q =
            UnitQuaternion::from_yaw(heading + rng.gauss(0.0, cfg.noise_yaw));
        sim.track.frames.push_back(f);

        // Advance along the heading at constant speed (midpoint heading keeps
        // the per-step arc length exactly speed*dt) until the path ends.
        if (walked < route.path_length) {
            const double step =
                std::min(cfg.speed * dt, route.path_length - walked);
            const double mid = heading_at(route, t + 0.5 * dt);
            x += step * std::sin(mid);
            z += step * std::cos(mid);
            walked += step;
        }
    }
    return sim;
}

Dataset generate_dataset(int n_subjects, const std::vector<RouteSpec>& routes,
                         const SimConfig& cfg) {
    if (n_subjects < 2) {
        throw Error(ErrorKind::config,
                    "generate_dataset needs at least 2 subjects");
    }
    if (n_subjects > 99) {
        throw Error(ErrorKind::config, "generate_dataset caps at 99 subjects");
    }
    if (routes.empty()) {
        throw Error(ErrorKind::config, "generate_dataset needs >= 1 route");
    }
    cfg.validate();

    for (size_t j = 0; j < routes.size(); ++j) {
        for (size_t k = j + 1; k < routes.size(); ++k) {
            if (routes[j].id == routes[k].id) {
                throw Error(ErrorKind::config,
                            "duplicate route id " + routes[j].id);
            }
        }
    }

    Dataset ds;
    Rng speed_rng(Rng::derive_seed(cfg.seed, 0xA11CE, 0));
    for (int i = 0; i < n_subjects; ++i) {
        ds.subject_speeds.push_back(speed_rng.uniform(1.0, 1.4));
    }

    for (int i = 0; i < n_subjects; ++i) {
        char sid[8];
        std::snprintf(sid, sizeof(sid), "%02d", i + 1);
        for (const RouteSpec& route : routes) {
            SimConfig track_cfg = cfg;
            track_cfg.speed = ds.subject_speeds[static_cast<size_t>(i)];
            track_cfg.seed = track_seed(cfg.seed, i, route);
            SimulatedTrack sim = simulate_route(route, track_cfg);
            sim.track.subject_id = sid;
            ds.tracks.push_back(std::move(sim));
        }
    }
    return ds;
}

Dataset write_dataset(const std::string& out_dir, int n_subjects,
                      const std::vector<RouteSpec>& routes,
                      const SimConfig& cfg) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) {
        throw Error(ErrorKind::io, "cannot create directory: " + out_dir);
    }

    Dataset ds = generate_dataset(n_subjects, routes, cfg);

    nlohmann::json routes_json = nlohmann::json::array();
    for (const RouteSpec& r : routes) {
        routes_json.push_back(
            {{"id", r.id},
             {"kind", r.kind == RouteSpec::Kind::turn ? "turn" : "straight"},
             {"start_x", r.start_x},
             {"start_z", r.start_z},
             {"initial_yaw", r.initial_yaw},
             {"path_length", r.path_length},
             {"turn_angle", r.turn_angle},
             {"turn_start_s", r.turn_start_s},
             {"turn_duration_s", r.turn_duration_s}});
    }

    nlohmann::json tracks_json = nlohmann::json::array();
    for (size_t k = 0; k < ds.tracks.size(); ++k) {
        const Track& t = ds.tracks[k].track;
        const size_t i = k / routes.size();
        const size_t j = k % routes.size();
        const std::string file = t.key() + ".csv";
        save_track(t, (fs::path(out_dir) / file).string());
        tracks_json.push_back(
            {{"file", file},
             {"subject", t.subject_id},
             {"route", t.route_id},
             {"seed", track_seed(cfg.seed, static_cast<int>(i), routes[j])},
             {"speed", ds.subject_speeds[i]}});
    }

    const nlohmann::json manifest = {
        {"config",
         {{"n_subjects", n_subjects},
          {"seed", cfg.seed},
          {"speed", cfg.speed},
          {"head_lead_s", cfg.head_lead_s},
          {"head_overshoot", cfg.head_overshoot},
          {"noise_pos", cfg.noise_pos},
          {"noise_yaw", cfg.noise_yaw},
          {"fps", cfg.fps},
          {"duration_s", cfg.duration_s}}},
        {"routes", routes_json},
        {"tracks", tracks_json}};
    write_file((fs::path(out_dir) / "manifest.json").string(),
               manifest.dump(2) + "\n");
    return ds;
}

} // namespace headlead
