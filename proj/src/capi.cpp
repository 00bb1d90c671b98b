#include "headlead.h"

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <new>
#include <string>
#include <string_view>
#include <vector>

#include "headlead/evaluate.hpp"
#include "headlead/simulator.hpp"
#include "headlead/textio.hpp"

struct hl_predictor {
    headlead::HeadTracker tracker;
};

struct hl_track {
    headlead::Track track;
};

namespace {

using namespace headlead;

thread_local std::string g_last_error;

hl_status status_from(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::invalid_argument: return HL_ERR_INVALID_ARGUMENT;
    case ErrorKind::parse: return HL_ERR_PARSE;
    case ErrorKind::degenerate_orientation:
        return HL_ERR_DEGENERATE_ORIENTATION;
    case ErrorKind::numeric_degeneracy: return HL_ERR_NUMERIC;
    case ErrorKind::degenerate_sample: return HL_ERR_DEGENERATE_SAMPLE;
    case ErrorKind::config: return HL_ERR_CONFIG;
    case ErrorKind::io: return HL_ERR_IO;
    }
    return HL_ERR_UNKNOWN;
}

/// Run fn, translating exceptions into status codes + hl_last_error.
template <typename F>
hl_status guarded(F&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        g_last_error = e.what();
        return status_from(e.kind());
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return HL_ERR_UNKNOWN;
    } catch (...) {
        g_last_error = "unknown failure";
        return HL_ERR_UNKNOWN;
    }
    g_last_error.clear();
    return HL_OK;
}

[[noreturn]] void fail_null(const char* what) {
    throw Error(ErrorKind::invalid_argument,
                std::string(what) + " must not be null");
}

void require(const void* p, const char* what) {
    if (p == nullptr) {
        fail_null(what);
    }
}

char* dup_string(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (out == nullptr) {
        throw std::bad_alloc();
    }
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

KalmanConfig to_kalman(const hl_kalman_params& p) {
    KalmanConfig c;
    c.dt = p.dt;
    c.q_accel = p.q_accel;
    c.r_pos = p.r_pos;
    c.q_yaw = p.q_yaw;
    c.r_yaw = p.r_yaw;
    return c;
}

PredictorConfig to_predictor(const hl_predictor_params& p) {
    PredictorConfig c;
    c.w = p.w;
    c.n_steps = p.n_steps;
    c.w_max = p.w_max;
    return c;
}

OperatingRange to_range(const hl_range_params& p) {
    return OperatingRange{p.min_depth_m, p.max_depth_m};
}

EvalConfig to_eval(const hl_eval_params& p) {
    EvalConfig c;
    c.kalman = to_kalman(p.kalman);
    c.predictor = to_predictor(p.predictor);
    c.range = to_range(p.range);
    c.gap_reset_s = p.gap_reset_s;
    c.alpha = p.alpha;
    return c;
}

SimConfig to_sim(const hl_sim_params& p) {
    SimConfig c;
    c.speed = p.speed_mps;
    c.head_lead_s = p.head_lead_s;
    c.head_overshoot = p.head_overshoot_rad;
    c.noise_pos = p.noise_pos_m;
    c.noise_yaw = p.noise_yaw_rad;
    c.fps = p.fps;
    c.duration_s = p.duration_s;
    c.seed = p.seed;
    return c;
}

UnitQuaternion quat_from(const double q[4], bool valid) {
    if (!valid) {
        const double n2 = q[0] * q[0] + q[1] * q[1] + q[2] * q[2] + q[3] * q[3];
        if (!std::isfinite(n2) || n2 < 1e-24) {
            return UnitQuaternion{}; // junk in a dropped frame, keep identity
        }
    }
    return UnitQuaternion(q[0], q[1], q[2], q[3]);
}

Frame to_frame(const hl_frame& f) {
    Frame out;
    out.t = f.t;
    out.nose_pos = {f.nose_pos[0], f.nose_pos[1], f.nose_pos[2]};
    out.nose_q = quat_from(f.nose_quat, f.valid != 0);
    out.waist_pos = {f.waist_pos[0], f.waist_pos[1], f.waist_pos[2]};
    out.waist_q = quat_from(f.waist_quat, f.valid != 0);
    out.valid = f.valid != 0;
    return out;
}

void from_frame(const Frame& f, hl_frame* out) {
    out->t = f.t;
    out->nose_pos[0] = f.nose_pos.x;
    out->nose_pos[1] = f.nose_pos.y;
    out->nose_pos[2] = f.nose_pos.z;
    out->nose_quat[0] = f.nose_q.qw;
    out->nose_quat[1] = f.nose_q.qx;
    out->nose_quat[2] = f.nose_q.qy;
    out->nose_quat[3] = f.nose_q.qz;
    out->waist_pos[0] = f.waist_pos.x;
    out->waist_pos[1] = f.waist_pos.y;
    out->waist_pos[2] = f.waist_pos.z;
    out->waist_quat[0] = f.waist_q.qw;
    out->waist_quat[1] = f.waist_q.qx;
    out->waist_quat[2] = f.waist_q.qy;
    out->waist_quat[3] = f.waist_q.qz;
    out->valid = f.valid ? 1 : 0;
}

void store_vec(const Vec3& v, double out[3]) {
    out[0] = v.x;
    out[1] = v.y;
    out[2] = v.z;
}

std::vector<RouteSpec> routes_from_arg(const char* routes) {
    const std::vector<RouteSpec> all = default_routes();
    if (routes == nullptr || *routes == '\0') {
        return all;
    }
    std::vector<bool> picked(all.size(), false);
    std::string_view rest(routes);
    while (!rest.empty()) {
        const size_t comma = rest.find(',');
        const std::string_view tok = rest.substr(0, comma);
        rest = comma == std::string_view::npos ? std::string_view{}
                                               : rest.substr(comma + 1);
        bool found = false;
        for (size_t i = 0; i < all.size(); ++i) {
            if (tok == all[i].id) {
                picked[i] = true;
                found = true;
                break;
            }
        }
        if (!found) {
            throw Error(ErrorKind::config,
                        "unknown route '" + std::string(tok) +
                            "' (expected R1..R6)");
        }
    }
    // Canonical R1..R6 order regardless of how the list was written.
    std::vector<RouteSpec> out;
    for (size_t i = 0; i < all.size(); ++i) {
        if (picked[i]) {
            out.push_back(all[i]);
        }
    }
    return out;
}

std::vector<double> grid_from_arg(const double* grid, size_t grid_len,
                                  double w_max) {
    if (grid_len == 0) {
        return default_w_grid(w_max);
    }
    require(grid, "grid");
    return std::vector<double>(grid, grid + grid_len);
}

bool any_group_degenerate(std::span<const GroupReport> groups) {
    for (const GroupReport& g : groups) {
        if (g.wilcoxon.method == "degenerate") {
            return true;
        }
    }
    return false;
}

std::string predict_csv(const Track& track, const EvalConfig& cfg) {
    KalmanConfig kcfg = cfg.kalman;
    kcfg.dt = 1.0 / track.fps;
    HeadTracker tracker(kcfg, cfg.predictor, cfg.gap_reset_s);
    std::string out = "t,ax,ay,az,bx,by,bz,cx,cy,cz\n";
    for (const Frame& f : track.frames) {
        const auto triple = tracker.step(f);
        if (!triple) {
            continue;
        }
        const Vec3 cols[3] = {triple->estimated, triple->baseline,
                              triple->proposed};
        out += format_g9(f.t);
        for (const Vec3& v : cols) {
            out += ',';
            out += format_g9(v.x);
            out += ',';
            out += format_g9(v.y);
            out += ',';
            out += format_g9(v.z);
        }
        out += '\n';
    }
    return out;
}

} // namespace

extern "C" {

const char* hl_version(void) { return "0.1.0"; }

const char* hl_last_error(void) { return g_last_error.c_str(); }

void hl_string_free(char* s) { std::free(s); }

void hl_kalman_params_default(hl_kalman_params* p) {
    if (p == nullptr) {
        return;
    }
    const KalmanConfig c;
    p->dt = c.dt;
    p->q_accel = c.q_accel;
    p->r_pos = c.r_pos;
    p->q_yaw = c.q_yaw;
    p->r_yaw = c.r_yaw;
}

void hl_predictor_params_default(hl_predictor_params* p) {
    if (p == nullptr) {
        return;
    }
    const PredictorConfig c;
    p->w = c.w;
    p->n_steps = c.n_steps;
    p->w_max = c.w_max;
}

void hl_range_params_default(hl_range_params* p) {
    if (p == nullptr) {
        return;
    }
    const OperatingRange r;
    p->min_depth_m = r.min_depth;
    p->max_depth_m = r.max_depth;
}

void hl_eval_params_default(hl_eval_params* p) {
    if (p == nullptr) {
        return;
    }
    hl_kalman_params_default(&p->kalman);
    hl_predictor_params_default(&p->predictor);
    hl_range_params_default(&p->range);
    const EvalConfig c;
    p->gap_reset_s = c.gap_reset_s;
    p->alpha = c.alpha;
}

void hl_sim_params_default(hl_sim_params* p) {
    if (p == nullptr) {
        return;
    }
    const SimConfig c;
    p->n_subjects = 14;
    p->speed_mps = c.speed;
    p->head_lead_s = c.head_lead_s;
    p->head_overshoot_rad = c.head_overshoot;
    p->noise_pos_m = c.noise_pos;
    p->noise_yaw_rad = c.noise_yaw;
    p->fps = c.fps;
    p->duration_s = c.duration_s;
    p->seed = c.seed;
}

hl_status hl_predictor_create(const hl_kalman_params* kalman,
                              const hl_predictor_params* predictor,
                              double gap_reset_s, hl_predictor** out) {
    return guarded([&] {
        require(out, "out");
        hl_kalman_params kp;
        hl_kalman_params_default(&kp);
        if (kalman != nullptr) {
            kp = *kalman;
        }
        hl_predictor_params pp;
        hl_predictor_params_default(&pp);
        if (predictor != nullptr) {
            pp = *predictor;
        }
        const KalmanConfig kcfg = to_kalman(kp);
        kcfg.validate();
        *out = new hl_predictor{
            HeadTracker(kcfg, to_predictor(pp), gap_reset_s)};
    });
}

hl_status hl_predictor_step(hl_predictor* p, const hl_frame* frame,
                            hl_prediction* out) {
    return guarded([&] {
        require(p, "predictor");
        require(frame, "frame");
        require(out, "out");
        *out = hl_prediction{};
        const auto triple = p->tracker.step(to_frame(*frame));
        if (!triple) {
            return;
        }
        out->has_output = 1;
        store_vec(triple->estimated, out->estimated);
        store_vec(triple->baseline, out->baseline);
        store_vec(triple->proposed, out->proposed);
    });
}

hl_status hl_predictor_reset(hl_predictor* p) {
    return guarded([&] {
        require(p, "predictor");
        p->tracker.reset();
    });
}

void hl_predictor_destroy(hl_predictor* p) { delete p; }

hl_status hl_parse_frame_line(const char* line, hl_frame* out) {
    return guarded([&] {
        require(line, "line");
        require(out, "out");
        from_frame(parse_frame_row(line), out);
    });
}

int hl_frame_in_range(const hl_frame* frame, const hl_range_params* range) {
    if (frame == nullptr || range == nullptr || frame->valid == 0) {
        return 0;
    }
    const double depth = frame->nose_pos[2];
    return depth >= range->min_depth_m && depth <= range->max_depth_m ? 1 : 0;
}

hl_status hl_track_load(const char* path, hl_track** out) {
    return guarded([&] {
        require(path, "path");
        require(out, "out");
        *out = new hl_track{load_track(path)};
    });
}

hl_status hl_track_parse(const char* text, hl_track** out) {
    return guarded([&] {
        require(text, "text");
        require(out, "out");
        *out = new hl_track{parse_track(text)};
    });
}

hl_status hl_track_save(const hl_track* t, const char* path) {
    return guarded([&] {
        require(t, "track");
        require(path, "path");
        save_track(t->track, path);
    });
}

void hl_track_destroy(hl_track* t) { delete t; }

size_t hl_track_frame_count(const hl_track* t) {
    return t == nullptr ? 0 : t->track.frames.size();
}

hl_status hl_track_frame(const hl_track* t, size_t index, hl_frame* out) {
    return guarded([&] {
        require(t, "track");
        require(out, "out");
        if (index >= t->track.frames.size()) {
            throw Error(ErrorKind::invalid_argument,
                        "frame index out of range");
        }
        from_frame(t->track.frames[index], out);
    });
}

const char* hl_track_subject(const hl_track* t) {
    return t == nullptr ? "" : t->track.subject_id.c_str();
}

const char* hl_track_route(const hl_track* t) {
    return t == nullptr ? "" : t->track.route_id.c_str();
}

double hl_track_fps(const hl_track* t) {
    return t == nullptr ? 0.0 : t->track.fps;
}

hl_status hl_track_apply_range(hl_track* t, const hl_range_params* range) {
    return guarded([&] {
        require(t, "track");
        require(range, "range");
        t->track = filter_operating_range(t->track, to_range(*range));
    });
}

hl_status hl_simulate_dataset(const char* out_dir, const hl_sim_params* params,
                              const char* routes) {
    return guarded([&] {
        require(out_dir, "out_dir");
        require(params, "params");
        write_dataset(out_dir, params->n_subjects, routes_from_arg(routes),
                      to_sim(*params));
    });
}

hl_status hl_predict_track(const char* track_path,
                           const hl_eval_params* params, char** out_csv) {
    return guarded([&] {
        require(track_path, "track_path");
        require(params, "params");
        require(out_csv, "out_csv");
        const EvalConfig cfg = to_eval(*params);
        const Track track =
            filter_operating_range(load_track(track_path), cfg.range);
        *out_csv = dup_string(predict_csv(track, cfg));
    });
}

hl_status hl_evaluate(const char* dataset_dir, const hl_eval_params* params,
                      char** out_json, char** out_csv, int* any_degenerate) {
    return guarded([&] {
        require(dataset_dir, "dataset_dir");
        require(params, "params");
        require(out_json, "out_json");
        const EvalConfig cfg = to_eval(*params);
        const std::vector<Track> tracks = load_dataset(dataset_dir);
        const EvalReport report = evaluate_dataset(tracks, cfg);
        std::string csv;
        if (out_csv != nullptr) {
            csv = frame_errors_csv(report.errors);
        }
        *out_json = dup_string(evaluate_report_json(report, cfg));
        if (out_csv != nullptr) {
            *out_csv = dup_string(csv);
        }
        if (any_degenerate != nullptr) {
            *any_degenerate = any_group_degenerate(report.groups) ? 1 : 0;
        }
    });
}

hl_status hl_tune(const char* dataset_dir, const hl_eval_params* params,
                  const double* grid, size_t grid_len, char** out_json,
                  double* w_out) {
    return guarded([&] {
        require(dataset_dir, "dataset_dir");
        require(params, "params");
        const EvalConfig cfg = to_eval(*params);
        const std::vector<double> w_grid =
            grid_from_arg(grid, grid_len, cfg.predictor.w_max);
        const std::vector<Track> tracks = load_dataset(dataset_dir);
        const TuneResult result = tune_w(tracks, w_grid, cfg);
        if (out_json != nullptr) {
            *out_json = dup_string(tune_report_json(result, cfg));
        }
        if (w_out != nullptr) {
            *w_out = result.w;
        }
    });
}

hl_status hl_loso(const char* dataset_dir, const hl_eval_params* params,
                  const double* grid, size_t grid_len, char** out_json,
                  char** out_csv, double* w_mean_out, int* any_degenerate) {
    return guarded([&] {
        require(dataset_dir, "dataset_dir");
        require(params, "params");
        require(out_json, "out_json");
        const EvalConfig cfg = to_eval(*params);
        const std::vector<double> w_grid =
            grid_from_arg(grid, grid_len, cfg.predictor.w_max);
        const std::vector<Track> tracks = load_dataset(dataset_dir);
        const CvReport report = loso_cv(tracks, w_grid, cfg);
        std::string csv;
        if (out_csv != nullptr) {
            csv = frame_errors_csv(report.pooled_errors);
        }
        *out_json = dup_string(cv_report_json(report, cfg));
        if (out_csv != nullptr) {
            *out_csv = dup_string(csv);
        }
        if (w_mean_out != nullptr) {
            *w_mean_out = report.w_mean;
        }
        if (any_degenerate != nullptr) {
            bool degenerate = any_group_degenerate(report.pooled);
            for (const FoldReport& fold : report.folds) {
                degenerate = degenerate || any_group_degenerate(fold.groups);
            }
            *any_degenerate = degenerate ? 1 : 0;
        }
    });
}

hl_status hl_wilcoxon_greater(const double* diffs, size_t n,
                              hl_wilcoxon_result* out) {
    return guarded([&] {
        require(out, "out");
        if (n > 0) {
            require(diffs, "diffs");
        }
        const WilcoxonResult res = wilcoxon_one_tailed(
            std::span<const double>(diffs, n), Alternative::greater);
        out->statistic = res.statistic;
        out->p_one_tailed = res.p_one_tailed;
        out->n_effective = res.n_effective;
        out->exact = res.method == WilcoxonMethod::exact ? 1 : 0;
    });
}

} // extern "C"
