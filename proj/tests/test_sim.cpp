#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "headlead/simulator.hpp"
#include "headlead/track.hpp"

using namespace headlead;

namespace {

bool near(double a, double b, double tol) { return std::fabs(a - b) <= tol; }

SimConfig noiseless() {
    SimConfig cfg;
    cfg.noise_pos = 0.0;
    cfg.noise_yaw = 0.0;
    return cfg;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

TEST_CASE("stock routes cover both straight and turn shapes") {
    const auto routes = default_routes();
    REQUIRE(routes.size() == 6);
    const char* ids[] = {"R1", "R2", "R3", "R4", "R5", "R6"};
    for (int i = 0; i < 6; ++i) {
        CHECK(routes[i].id == ids[i]);
        CHECK_NOTHROW(routes[i].validate());
    }
    CHECK(routes[0].kind == RouteSpec::Kind::straight);
    CHECK(routes[1].kind == RouteSpec::Kind::straight);
    for (int i = 2; i < 6; ++i) CHECK(routes[i].kind == RouteSpec::Kind::turn);
    CHECK(near(routes[2].turn_angle, M_PI / 2, 1e-15));
    CHECK(near(routes[3].turn_angle, -M_PI / 2, 1e-15));
    CHECK(near(routes[4].turn_angle, 3 * M_PI / 4, 1e-15));
    CHECK(near(routes[5].turn_angle, -3 * M_PI / 4, 1e-15));
    // mirrored pairs
    CHECK(routes[0].start_x == -routes[1].start_x);
    CHECK(routes[2].start_x == -routes[3].start_x);
}

TEST_CASE("route and config validation") {
    RouteSpec r = default_routes()[0];
    r.id = "R9";
    CHECK_THROWS_AS(r.validate(), Error);
    r = default_routes()[0];
    r.path_length = 0.0;
    CHECK_THROWS_AS(r.validate(), Error);
    r = default_routes()[2];
    r.turn_duration_s = 0.0;
    CHECK_THROWS_AS(r.validate(), Error);
    r = default_routes()[0];
    r.start_x = 5.0;
    CHECK_THROWS_AS(r.validate(), Error);

    SimConfig cfg;
    cfg.fps = 0.0;
    CHECK_THROWS_AS(cfg.validate(), Error);
    cfg = {};
    cfg.noise_pos = -0.1;
    CHECK_THROWS_AS(cfg.validate(), Error);
    cfg = {};
    cfg.duration_s = 0.0;
    try {
        cfg.validate();
        FAIL("expected throw");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::config);
    }
}

TEST_CASE("noiseless straight walk moves on a line at constant speed") {
    const auto routes = default_routes();
    const SimConfig cfg = noiseless();
    const SimulatedTrack sim = simulate_route(routes[0], cfg);
    REQUIRE(sim.track.frames.size() == 150);  // 5 s at 30 fps
    REQUIRE(sim.true_nose.size() == 150);

    // collinear: cross product of displacements vanishes
    const Vec3 d0 = sim.true_nose[1] - sim.true_nose[0];
    for (size_t i = 2; i < sim.true_nose.size(); ++i) {
        const Vec3 d = sim.true_nose[i] - sim.true_nose[0];
        CHECK(near(d.x * d0.z - d.z * d0.x, 0.0, 1e-9));
        CHECK(sim.true_nose[i].y == sim.true_nose[0].y);
    }

    // constant speed while walking
    const double dt = 1.0 / cfg.fps;
    for (size_t i = 0; i + 1 < 120; ++i) {
        const double step = distance(sim.true_nose[i + 1], sim.true_nose[i]);
        CHECK(near(step, cfg.speed * dt, 1e-9));
    }

    // straight walk: the head-pose angle is identically zero
    for (const auto& theta : head_pose_series(sim.track)) {
        REQUIRE(theta.has_value());
        CHECK(theta->theta == 0.0);
    }

    // noiseless observations coincide with the truth
    for (size_t i = 0; i < sim.true_nose.size(); ++i) {
        CHECK(distance(sim.track.frames[i].nose_pos, sim.true_nose[i]) == 0.0);
    }
}

TEST_CASE("walker stands still once the path is covered") {
    SimConfig cfg = noiseless();
    cfg.speed = 1.4;  // covers 6 m in ~4.3 s of a 5 s recording
    const SimulatedTrack sim = simulate_route(default_routes()[0], cfg);
    const size_t n = sim.true_nose.size();
    CHECK(distance(sim.true_nose[n - 1], sim.true_nose[n - 2]) == 0.0);
    double total = 0.0;
    for (size_t i = 0; i + 1 < n; ++i) {
        total += distance(sim.true_nose[i + 1], sim.true_nose[i]);
    }
    CHECK(near(total, 6.0, 1e-9));
}

TEST_CASE("turn route sweeps exactly the specified angle") {
    const auto routes = default_routes();
    const SimConfig cfg = noiseless();
    for (int ri : {2, 3, 4, 5}) {
        const SimulatedTrack sim = simulate_route(routes[ri], cfg);
        const double swept = sim.true_heading.back() - sim.true_heading.front();
        CHECK(near(swept, routes[ri].turn_angle, 1e-9));
        // monotone sweep in the turn's direction
        const double sgn = routes[ri].turn_angle > 0 ? 1.0 : -1.0;
        for (size_t i = 1; i < sim.true_heading.size(); ++i) {
            CHECK(sgn * (sim.true_heading[i] - sim.true_heading[i - 1]) >=
                  -1e-12);
        }
    }
}

TEST_CASE("head yaw departs before the body heading") {
    const SimConfig cfg = noiseless();  // head_lead_s = 0.2
    const SimulatedTrack sim = simulate_route(default_routes()[2], cfg);
    const double initial = sim.true_heading.front();

    auto first_past = [&](const std::vector<double>& series) {
        for (size_t i = 0; i < series.size(); ++i) {
            if (std::fabs(series[i] - initial) > 0.01) return i;
        }
        return series.size();
    };
    const size_t head_start = first_past(sim.true_head_yaw);
    const size_t body_start = first_past(sim.true_heading);
    REQUIRE(head_start < sim.true_head_yaw.size());
    REQUIRE(body_start < sim.true_heading.size());
    REQUIRE(head_start < body_start);
    const double gap =
        static_cast<double>(body_start - head_start) / cfg.fps;
    CHECK(gap >= 0.19);
    CHECK(near(gap, cfg.head_lead_s, 1e-12));
}

TEST_CASE("head yaw is the body heading shifted by the lead time") {
    const SimConfig cfg = noiseless();  // lead 0.2 s = 6 frames at 30 fps
    const SimulatedTrack sim = simulate_route(default_routes()[4], cfg);
    const size_t n = sim.true_heading.size();
    const int lead_frames = 6;

    auto sse_at_lag = [&](int k) {
        double sse = 0.0;
        for (size_t i = 0; i + static_cast<size_t>(k) < n; ++i) {
            const double d = sim.true_head_yaw[i] - sim.true_heading[i + k];
            sse += d * d;
        }
        return sse;
    };

    const double at_lead = sse_at_lag(lead_frames);
    CHECK(at_lead <= 1e-18);  // shift matches exactly on the frame grid
    for (int k = 0; k <= 12; ++k) {
        if (k == lead_frames) continue;
        CHECK(sse_at_lag(k) > at_lead);
    }
}

TEST_CASE("head overshoot swings past the settled heading") {
    SimConfig cfg = noiseless();
    cfg.head_overshoot = 0.3;
    const RouteSpec route = default_routes()[2];  // +pi/2 turn
    const SimulatedTrack sim = simulate_route(route, cfg);
    double max_excess = 0.0;
    for (size_t i = 0; i < sim.true_head_yaw.size(); ++i) {
        max_excess = std::max(
            max_excess, sim.true_head_yaw[i] - (route.initial_yaw +
                                                route.turn_angle));
    }
    // peak head yaw exceeds the final heading by about the overshoot
    CHECK(max_excess > 0.2);
    CHECK(max_excess <= 0.3 + 1e-9);
}

TEST_CASE("same seed gives byte-identical tracks") {
    SimConfig cfg;
    cfg.seed = 77;
    const auto route = default_routes()[3];
    const std::string a = serialize_track(simulate_route(route, cfg).track);
    const std::string b = serialize_track(simulate_route(route, cfg).track);
    CHECK(a == b);
    cfg.seed = 78;
    const std::string c = serialize_track(simulate_route(route, cfg).track);
    CHECK(a != c);
}

TEST_CASE("interpolated truth matches the frame grid") {
    const SimulatedTrack sim =
        simulate_route(default_routes()[0], noiseless());
    const Vec3 at_frame = sim.true_nose_at(10.0 / 30.0);
    CHECK(distance(at_frame, sim.true_nose[10]) <= 1e-12);
    const Vec3 mid = sim.true_nose_at(10.5 / 30.0);
    const Vec3 expect = (sim.true_nose[10] + sim.true_nose[11]) * 0.5;
    CHECK(distance(mid, expect) <= 1e-12);
    // clamped at the ends
    CHECK(distance(sim.true_nose_at(-1.0), sim.true_nose.front()) == 0.0);
    CHECK(distance(sim.true_nose_at(100.0), sim.true_nose.back()) == 0.0);
}

TEST_CASE("dataset generation shapes and speeds") {
    SimConfig cfg;
    const auto routes = default_routes();
    const Dataset ds = generate_dataset(14, routes, cfg);
    CHECK(ds.tracks.size() == 84);
    REQUIRE(ds.subject_speeds.size() == 14);
    for (double s : ds.subject_speeds) {
        CHECK(s >= 1.0);
        CHECK(s < 1.4);
    }
    // distinct speeds (a constant would defeat the per-subject variation)
    CHECK(ds.subject_speeds[0] != ds.subject_speeds[1]);
    CHECK(ds.tracks[0].track.subject_id == "01");
    CHECK(ds.tracks[0].track.route_id == "R1");
    CHECK(ds.tracks[83].track.subject_id == "14");
    CHECK(ds.tracks[83].track.route_id == "R6");

    const Dataset two = generate_dataset(2, {routes[0]}, cfg);
    CHECK(two.tracks.size() == 2);

    CHECK_THROWS_AS(generate_dataset(1, routes, cfg), Error);
    CHECK_THROWS_AS(generate_dataset(100, routes, cfg), Error);
    CHECK_THROWS_AS(generate_dataset(3, {}, cfg), Error);
    CHECK_THROWS_AS(generate_dataset(3, {routes[0], routes[0]}, cfg), Error);
}

TEST_CASE("dataset generation is reproducible and order-independent") {
    SimConfig cfg;
    cfg.seed = 5;
    const auto routes = default_routes();
    const Dataset a = generate_dataset(3, routes, cfg);
    const Dataset b = generate_dataset(3, routes, cfg);
    for (size_t i = 0; i < a.tracks.size(); ++i) {
        CHECK(serialize_track(a.tracks[i].track) ==
              serialize_track(b.tracks[i].track));
    }

    // a single-route subset reproduces the same tracks as the full run
    const Dataset only_r3 = generate_dataset(3, {routes[2]}, cfg);
    for (int subj = 0; subj < 3; ++subj) {
        const auto& full = a.tracks[static_cast<size_t>(subj) * 6 + 2];
        const auto& sub = only_r3.tracks[static_cast<size_t>(subj)];
        CHECK(serialize_track(full.track) == serialize_track(sub.track));
    }
}

TEST_CASE("every stock route stays inside the room at top speed") {
    SimConfig cfg;
    cfg.speed = 1.4;
    for (const RouteSpec& r : default_routes()) {
        CHECK_NOTHROW(simulate_route(r, cfg));
    }
}

TEST_CASE("a route that walks out of the room is rejected") {
    RouteSpec r = default_routes()[0];
    r.initial_yaw = M_PI;  // straight away from the camera wall
    r.path_length = 20.0;
    SimConfig cfg = noiseless();
    cfg.speed = 1.4;
    cfg.duration_s = 10.0;
    try {
        simulate_route(r, cfg);
        FAIL("expected throw");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::config);
    }
}

TEST_CASE("noisy tracks survive a serialize-parse round-trip") {
    SimConfig cfg;
    cfg.seed = 9;
    const SimulatedTrack sim = simulate_route(default_routes()[2], cfg);
    const Track back = parse_track(serialize_track(sim.track));
    REQUIRE(back.frames.size() == sim.track.frames.size());
    CHECK(serialize_track(back) == serialize_track(sim.track));
    for (size_t i = 0; i < back.frames.size(); ++i) {
        CHECK(back.frames[i].valid);
        CHECK(near(back.frames[i].nose_q.norm(), 1.0, 1e-9));
    }
}

TEST_CASE("written dataset directory contains tracks and a manifest") {
    namespace fs = std::filesystem;
    const fs::path dir_a = fs::temp_directory_path() / "headlead_sim_a";
    const fs::path dir_b = fs::temp_directory_path() / "headlead_sim_b";
    fs::remove_all(dir_a);
    fs::remove_all(dir_b);

    SimConfig cfg;
    cfg.seed = 3;
    const auto routes = default_routes();
    write_dataset(dir_a.string(), 2, {routes[0], routes[2]}, cfg);

    CHECK(fs::exists(dir_a / "s01_R1.csv"));
    CHECK(fs::exists(dir_a / "s01_R3.csv"));
    CHECK(fs::exists(dir_a / "s02_R1.csv"));
    CHECK(fs::exists(dir_a / "s02_R3.csv"));
    REQUIRE(fs::exists(dir_a / "manifest.json"));

    const auto manifest = nlohmann::json::parse(slurp(dir_a / "manifest.json"));
    CHECK(manifest["config"]["n_subjects"] == 2);
    CHECK(manifest["config"]["seed"] == 3);
    CHECK(manifest["routes"].size() == 2);
    REQUIRE(manifest["tracks"].size() == 4);
    CHECK(manifest["tracks"][0]["file"] == "s01_R1.csv");
    CHECK(manifest["tracks"][0]["subject"] == "01");

    // loadable and correctly labelled
    const Track t = load_track((dir_a / "s02_R3.csv").string());
    CHECK(t.subject_id == "02");
    CHECK(t.route_id == "R3");

    // a rerun with the same seed writes identical bytes
    write_dataset(dir_b.string(), 2, {routes[0], routes[2]}, cfg);
    CHECK(slurp(dir_a / "manifest.json") == slurp(dir_b / "manifest.json"));
    CHECK(slurp(dir_a / "s01_R1.csv") == slurp(dir_b / "s01_R1.csv"));
    CHECK(slurp(dir_a / "s02_R3.csv") == slurp(dir_b / "s02_R3.csv"));

    fs::remove_all(dir_a);
    fs::remove_all(dir_b);
}
