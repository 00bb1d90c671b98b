// Command-line front end. Links only the public C API so it doubles as a
// usage example for embedding the shared library.

#include <algorithm>
#include <cstdio>
#include <cstring>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "headlead.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;      // I/O, parse or configuration failures
constexpr int kExitDegenerate = 2; // statistics degenerate (e.g. w = 0)

int exit_code_for(hl_status status) {
    if (status == HL_OK) {
        return kExitOk;
    }
    std::fprintf(stderr, "error: %s\n", hl_last_error());
    return status == HL_ERR_DEGENERATE_SAMPLE ? kExitDegenerate : kExitError;
}

/// Write text to a file, or to stdout when path is empty or "-".
int write_out(const std::string& path, const char* text) {
    if (path.empty() || path == "-") {
        std::fputs(text, stdout);
        return kExitOk;
    }
    std::FILE* f = std::fopen(path.c_str(), "wb");
    if (f == nullptr) {
        std::fprintf(stderr, "error: cannot write %s\n", path.c_str());
        return kExitError;
    }
    std::fputs(text, f);
    std::fclose(f);
    return kExitOk;
}

std::vector<std::string> split_commas(const std::string& s) {
    std::vector<std::string> out;
    size_t start = 0;
    while (start <= s.size()) {
        const size_t pos = s.find(',', start);
        if (pos == std::string::npos) {
            out.push_back(s.substr(start));
            break;
        }
        out.push_back(s.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

/// Expand route aliases: "straight" -> R1, "turn" -> R3, "all" -> R1..R6.
/// Explicit ids pass through; the library validates them.
std::string expand_routes(const std::string& arg) {
    std::vector<std::string> ids;
    const auto add = [&](const std::string& id) {
        if (std::find(ids.begin(), ids.end(), id) == ids.end()) {
            ids.push_back(id);
        }
    };
    for (const std::string& tok : split_commas(arg)) {
        if (tok == "straight") {
            add("R1");
        } else if (tok == "turn") {
            add("R3");
        } else if (tok == "all") {
            for (const char* id : {"R1", "R2", "R3", "R4", "R5", "R6"}) {
                add(id);
            }
        } else if (!tok.empty()) {
            add(tok);
        }
    }
    std::string joined;
    for (const std::string& id : ids) {
        if (!joined.empty()) {
            joined += ',';
        }
        joined += id;
    }
    return joined;
}

/// Flags shared by the prediction/evaluation commands, bound straight onto
/// an hl_eval_params. fps is kept separately and turned into the filter
/// step interval.
struct EvalFlags {
    hl_eval_params params;
    double fps = 30.0;
    std::string grid_arg;

    EvalFlags() { hl_eval_params_default(&params); }

    void add_common(CLI::App* cmd) {
        cmd->add_option("--fps", fps, "Sensor frame rate, Hz")
            ->capture_default_str();
        cmd->add_option("--w", params.predictor.w,
                        "Blend weight (0 = Kalman baseline)")
            ->capture_default_str();
        cmd->add_option("--n-steps", params.predictor.n_steps,
                        "Prediction horizon in frames")
            ->capture_default_str();
        cmd->add_option("--w-max", params.predictor.w_max,
                        "Upper bound for the blend weight")
            ->capture_default_str();
        cmd->add_option("--q-accel", params.kalman.q_accel,
                        "Position filter process noise, m^2/s^3")
            ->capture_default_str();
        cmd->add_option("--r-pos", params.kalman.r_pos,
                        "Position measurement noise std, m")
            ->capture_default_str();
        cmd->add_option("--q-yaw", params.kalman.q_yaw,
                        "Head-pose filter process noise, rad^2/s^3")
            ->capture_default_str();
        cmd->add_option("--r-yaw", params.kalman.r_yaw,
                        "Head-pose measurement noise std, rad")
            ->capture_default_str();
        cmd->add_option("--range-min", params.range.min_depth_m,
                        "Operating range lower depth bound, m")
            ->capture_default_str();
        cmd->add_option("--range-max", params.range.max_depth_m,
                        "Operating range upper depth bound, m")
            ->capture_default_str();
        cmd->add_option("--gap-reset", params.gap_reset_s,
                        "Reset the tracker after gaps longer than this, s")
            ->capture_default_str();
    }

    void add_alpha(CLI::App* cmd) {
        cmd->add_option("--alpha", params.alpha,
                        "Significance level for the Wilcoxon test")
            ->capture_default_str();
    }

    void add_grid(CLI::App* cmd) {
        cmd->add_option("--grid", grid_arg,
                        "Comma-separated candidate weights "
                        "(default 0:0.05:w_max)");
    }

    const hl_eval_params* finish() {
        params.kalman.dt = 1.0 / fps;
        return &params;
    }

    std::vector<double> grid() const {
        std::vector<double> out;
        if (grid_arg.empty()) {
            return out;
        }
        for (const std::string& tok : split_commas(grid_arg)) {
            if (tok.empty()) {
                continue;
            }
            try {
                size_t used = 0;
                out.push_back(std::stod(tok, &used));
                if (used != tok.size()) {
                    throw std::invalid_argument(tok);
                }
            } catch (const std::exception&) {
                throw CLI::ValidationError("--grid",
                                           "bad grid value '" + tok + "'");
            }
        }
        return out;
    }
};

int run_simulate(const std::string& out_dir, const hl_sim_params& params,
                 const std::string& routes) {
    const hl_status status =
        hl_simulate_dataset(out_dir.c_str(), &params,
                            expand_routes(routes).c_str());
    return exit_code_for(status);
}

int run_predict_batch(const std::string& track, EvalFlags& flags,
                      const std::string& out_path) {
    char* csv = nullptr;
    const hl_status status =
        hl_predict_track(track.c_str(), flags.finish(), &csv);
    if (status != HL_OK) {
        return exit_code_for(status);
    }
    const int rc = write_out(out_path, csv);
    hl_string_free(csv);
    return rc;
}

/// Line-delimited streaming: track CSV rows on stdin, prediction rows on
/// stdout, one in one out, flushed per line so a 30 fps feed never
/// backlogs. Header/comment lines are skipped.
int run_predict_stream(EvalFlags& flags) {
    const hl_eval_params* params = flags.finish();
    hl_predictor* predictor = nullptr;
    hl_status status = hl_predictor_create(
        &params->kalman, &params->predictor, params->gap_reset_s, &predictor);
    if (status != HL_OK) {
        return exit_code_for(status);
    }

    std::fputs("t,ax,ay,az,bx,by,bz,cx,cy,cz\n", stdout);
    std::fflush(stdout);
    std::string line;
    size_t line_no = 0;
    int rc = kExitOk;
    while (std::getline(std::cin, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty() || line[0] == '#' || line.rfind("t,", 0) == 0) {
            continue;
        }
        hl_frame frame;
        status = hl_parse_frame_line(line.c_str(), &frame);
        if (status != HL_OK) {
            std::fprintf(stderr, "error: stdin line %zu: %s\n", line_no,
                         hl_last_error());
            rc = kExitError;
            break;
        }
        if (frame.valid != 0 && hl_frame_in_range(&frame, &params->range) == 0) {
            frame.valid = 0; // outside the trusted depth interval
        }
        hl_prediction pred;
        status = hl_predictor_step(predictor, &frame, &pred);
        if (status != HL_OK) {
            rc = exit_code_for(status);
            break;
        }
        if (pred.has_output == 0) {
            continue;
        }
        std::printf("%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g\n",
                    frame.t, pred.estimated[0], pred.estimated[1],
                    pred.estimated[2], pred.baseline[0], pred.baseline[1],
                    pred.baseline[2], pred.proposed[0], pred.proposed[1],
                    pred.proposed[2]);
        std::fflush(stdout);
    }
    hl_predictor_destroy(predictor);
    return rc;
}

int run_evaluate(const std::string& data_dir, EvalFlags& flags,
                 const std::string& out_path, const std::string& csv_path) {
    char* json = nullptr;
    char* csv = nullptr;
    int degenerate = 0;
    const hl_status status =
        hl_evaluate(data_dir.c_str(), flags.finish(), &json,
                    csv_path.empty() ? nullptr : &csv, &degenerate);
    if (status != HL_OK) {
        return exit_code_for(status);
    }
    int rc = write_out(out_path, json);
    hl_string_free(json);
    if (rc == kExitOk && !csv_path.empty()) {
        rc = write_out(csv_path, csv);
    }
    hl_string_free(csv);
    if (rc == kExitOk && degenerate != 0) {
        std::fprintf(stderr,
                     "note: degenerate statistics in at least one group\n");
        rc = kExitDegenerate;
    }
    return rc;
}

int run_tune(const std::string& data_dir, EvalFlags& flags,
             const std::string& out_path) {
    const std::vector<double> grid = flags.grid();
    char* json = nullptr;
    double w = 0.0;
    const hl_status status =
        hl_tune(data_dir.c_str(), flags.finish(),
                grid.empty() ? nullptr : grid.data(), grid.size(), &json, &w);
    if (status != HL_OK) {
        return exit_code_for(status);
    }
    const int rc = write_out(out_path, json);
    hl_string_free(json);
    return rc;
}

int run_loso(const std::string& data_dir, EvalFlags& flags,
             const std::string& out_path, const std::string& csv_path) {
    const std::vector<double> grid = flags.grid();
    char* json = nullptr;
    char* csv = nullptr;
    double w_mean = 0.0;
    int degenerate = 0;
    const hl_status status = hl_loso(
        data_dir.c_str(), flags.finish(), grid.empty() ? nullptr : grid.data(),
        grid.size(), &json, csv_path.empty() ? nullptr : &csv, &w_mean,
        &degenerate);
    if (status != HL_OK) {
        return exit_code_for(status);
    }
    int rc = write_out(out_path, json);
    hl_string_free(json);
    if (rc == kExitOk && !csv_path.empty()) {
        rc = write_out(csv_path, csv);
    }
    hl_string_free(csv);
    if (rc == kExitOk && degenerate != 0) {
        std::fprintf(stderr,
                     "note: degenerate statistics in at least one group\n");
        rc = kExitDegenerate;
    }
    return rc;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{std::string("headlead ") + hl_version() +
                 " - head-position prediction from first-person skeleton "
                 "tracks"};
    app.require_subcommand(1);

    // simulate ------------------------------------------------------------
    auto* sim = app.add_subcommand(
        "simulate", "Generate a seeded synthetic walking dataset");
    sim->set_config("--config", "", "Read options from an INI file");
    hl_sim_params sim_params;
    hl_sim_params_default(&sim_params);
    std::string sim_out;
    std::string sim_routes = "all";
    sim->add_option("--out", sim_out, "Output dataset directory")->required();
    sim->add_option("--subjects", sim_params.n_subjects,
                    "Number of simulated subjects")
        ->capture_default_str();
    sim->add_option("--routes", sim_routes,
                    "Routes: comma-separated R1..R6 or straight|turn|all")
        ->capture_default_str();
    sim->add_option("--seed", sim_params.seed, "Master RNG seed")
        ->capture_default_str();
    sim->add_option("--fps", sim_params.fps, "Sensor frame rate, Hz")
        ->capture_default_str();
    sim->add_option("--duration", sim_params.duration_s,
                    "Recording length per track, s")
        ->capture_default_str();
    sim->add_option("--speed", sim_params.speed_mps,
                    "Walking speed for single-route simulation, m/s")
        ->capture_default_str();
    sim->add_option("--head-lead", sim_params.head_lead_s,
                    "Head yaw precedes the turn by this much, s")
        ->capture_default_str();
    sim->add_option("--head-overshoot", sim_params.head_overshoot_rad,
                    "Peak head-yaw swing past the settled heading, rad")
        ->capture_default_str();
    sim->add_option("--noise-pos", sim_params.noise_pos_m,
                    "Observation noise std per position axis, m")
        ->capture_default_str();
    sim->add_option("--noise-yaw", sim_params.noise_yaw_rad,
                    "Observation noise std per yaw, rad")
        ->capture_default_str();

    // predict -------------------------------------------------------------
    auto* pred = app.add_subcommand(
        "predict", "Run the predictor over a track (batch or streaming)");
    pred->set_config("--config", "", "Read options from an INI file");
    EvalFlags pred_flags;
    std::string pred_track;
    std::string pred_out;
    bool pred_stream = false;
    pred->add_option("--track", pred_track, "Input track CSV");
    pred->add_option("--out", pred_out,
                     "Output CSV path (default: stdout)");
    pred->add_flag("--stream", pred_stream,
                   "Read frame rows from stdin, emit predictions per line");
    pred_flags.add_common(pred);

    // tune ----------------------------------------------------------------
    auto* tune = app.add_subcommand(
        "tune", "Grid-search the blend weight on a dataset");
    tune->set_config("--config", "", "Read options from an INI file");
    EvalFlags tune_flags;
    std::string tune_data;
    std::string tune_out;
    tune->add_option("--data", tune_data, "Dataset directory")->required();
    tune->add_option("--out", tune_out, "Report JSON path (default: stdout)");
    tune_flags.add_common(tune);
    tune_flags.add_grid(tune);

    // evaluate ------------------------------------------------------------
    auto* eval = app.add_subcommand(
        "evaluate", "Per-group error comparison at a fixed blend weight");
    eval->set_config("--config", "", "Read options from an INI file");
    EvalFlags eval_flags;
    std::string eval_data;
    std::string eval_out;
    std::string eval_csv;
    eval->add_option("--data", eval_data, "Dataset directory")->required();
    eval->add_option("--out", eval_out, "Report JSON path (default: stdout)");
    eval->add_option("--errors-csv", eval_csv,
                     "Also write the flat per-frame error table here");
    eval_flags.add_common(eval);
    eval_flags.add_alpha(eval);

    // loso ----------------------------------------------------------------
    auto* loso = app.add_subcommand(
        "loso", "Leave-one-subject-out tuning and evaluation");
    loso->set_config("--config", "", "Read options from an INI file");
    EvalFlags loso_flags;
    std::string loso_data;
    std::string loso_out;
    std::string loso_csv;
    loso->add_option("--data", loso_data, "Dataset directory")->required();
    loso->add_option("--out", loso_out, "Report JSON path (default: stdout)");
    loso->add_option("--errors-csv", loso_csv,
                     "Also write the flat per-frame error table here");
    loso_flags.add_common(loso);
    loso_flags.add_alpha(loso);
    loso_flags.add_grid(loso);

    CLI11_PARSE(app, argc, argv);

    try {
        if (sim->parsed()) {
            return run_simulate(sim_out, sim_params, sim_routes);
        }
        if (pred->parsed()) {
            if (pred_stream) {
                return run_predict_stream(pred_flags);
            }
            if (pred_track.empty()) {
                std::fprintf(stderr,
                             "error: predict needs --track or --stream\n");
                return kExitError;
            }
            return run_predict_batch(pred_track, pred_flags, pred_out);
        }
        if (tune->parsed()) {
            return run_tune(tune_data, tune_flags, tune_out);
        }
        if (eval->parsed()) {
            return run_evaluate(eval_data, eval_flags, eval_out, eval_csv);
        }
        if (loso->parsed()) {
            return run_loso(loso_data, loso_flags, loso_out, loso_csv);
        }
    } catch (const CLI::ValidationError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitError;
    }
    return kExitError;
}
