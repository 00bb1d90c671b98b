#ifndef HEADLEAD_H
#define HEADLEAD_H

/* C API for head-position prediction from first-person skeleton tracks.
 *
 * The library filters nose observations with a constant-velocity Kalman
 * filter, rotates the one-step displacement by the filtered head-pose angle
 * (nose yaw relative to waist yaw), blends the two displacements with a
 * weight w, and extrapolates N steps ahead. It also ships a seeded walker
 * simulator and the evaluation harness (per-frame Euclidean errors, route
 * groups, one-tailed Wilcoxon signed-rank test, leave-one-subject-out
 * tuning of w).
 *
 * Conventions:
 *  - every fallible call returns hl_status; hl_last_error() holds a
 *    message for the most recent failure on the calling thread
 *  - out-parameters are written only on HL_OK
 *  - strings returned through char** are heap-allocated; release them with
 *    hl_string_free
 *  - coordinates are camera-frame meters: x right, y down, z forward;
 *    yaw 0 looks along +z and positive yaw turns toward +x
 */

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum hl_status {
    HL_OK = 0,
    HL_ERR_INVALID_ARGUMENT = 1,
    HL_ERR_PARSE = 2,
    HL_ERR_DEGENERATE_ORIENTATION = 3,
    HL_ERR_NUMERIC = 4,
    HL_ERR_DEGENERATE_SAMPLE = 5,
    HL_ERR_CONFIG = 6,
    HL_ERR_IO = 7,
    HL_ERR_UNKNOWN = 8
} hl_status;

/* Library version, "major.minor.patch". */
const char* hl_version(void);

/* Message of the most recent failure on this thread; "" if none. The
 * pointer stays valid until the next API call on the same thread. */
const char* hl_last_error(void);

void hl_string_free(char* s);

/* ---------------------------------------------------------------- config */

typedef struct hl_kalman_params {
    double dt;      /* seconds per filter step (1/fps) */
    double q_accel; /* process noise spectral density, m^2/s^3 */
    double r_pos;   /* position measurement noise std, m */
    double q_yaw;   /* head-pose filter process noise, rad^2/s^3 */
    double r_yaw;   /* head-pose measurement noise std, rad */
} hl_kalman_params;

typedef struct hl_predictor_params {
    double w;    /* blend weight, 0 = pure Kalman baseline */
    int n_steps; /* prediction horizon in frames */
    double w_max;
} hl_predictor_params;

typedef struct hl_range_params {
    double min_depth_m; /* trusted sensor depth interval on nose z */
    double max_depth_m;
} hl_range_params;

typedef struct hl_eval_params {
    hl_kalman_params kalman;
    hl_predictor_params predictor;
    hl_range_params range;
    double gap_reset_s; /* tracker resets after a gap longer than this */
    double alpha;       /* significance level */
} hl_eval_params;

typedef struct hl_sim_params {
    int n_subjects;
    double speed_mps;          /* overridden per subject when simulating
                                * a dataset (uniform in [1.0, 1.4]) */
    double head_lead_s;        /* head yaw precedes the turn by this much */
    double head_overshoot_rad; /* peak head-yaw swing past the settled heading */
    double noise_pos_m;        /* observation noise std per axis */
    double noise_yaw_rad;
    double fps;
    double duration_s;
    uint64_t seed;
} hl_sim_params;

void hl_kalman_params_default(hl_kalman_params* p);
void hl_predictor_params_default(hl_predictor_params* p);
void hl_range_params_default(hl_range_params* p);
void hl_eval_params_default(hl_eval_params* p);
void hl_sim_params_default(hl_sim_params* p);

/* ------------------------------------------------------------- streaming */

typedef struct hl_frame {
    double t;
    double nose_pos[3];
    double nose_quat[4]; /* w, x, y, z */
    double waist_pos[3];
    double waist_quat[4];
    int valid;
} hl_frame;

typedef struct hl_prediction {
    int has_output; /* 0 while the filter is uninitialized or the frame
                     * is unusable; the position fields are then zero */
    double estimated[3]; /* filtered current position        (a) */
    double baseline[3];  /* conventional N-step prediction   (b) */
    double proposed[3];  /* head-pose-blended prediction     (c) */
} hl_prediction;

typedef struct hl_predictor hl_predictor;

/* Create a streaming predictor. kalman/predictor may be NULL for
 * defaults. */
hl_status hl_predictor_create(const hl_kalman_params* kalman,
                              const hl_predictor_params* predictor,
                              double gap_reset_s, hl_predictor** out);

/* Feed one frame; on HL_OK, out->has_output tells whether a prediction was
 * produced. Invalid frames coast the filter; gaps longer than gap_reset_s
 * reset it. */
hl_status hl_predictor_step(hl_predictor* p, const hl_frame* frame,
                            hl_prediction* out);

hl_status hl_predictor_reset(hl_predictor* p);

void hl_predictor_destroy(hl_predictor* p);

/* Parse one 16-field data row of the track CSV format
 * (t,nose_x,...,waist_qz,valid). For line-delimited streaming input. */
hl_status hl_parse_frame_line(const char* line, hl_frame* out);

/* 1 when the frame is valid and its nose depth lies inside the range. */
int hl_frame_in_range(const hl_frame* frame, const hl_range_params* range);

/* ---------------------------------------------------------------- tracks */

typedef struct hl_track hl_track;

hl_status hl_track_load(const char* path, hl_track** out);
hl_status hl_track_parse(const char* text, hl_track** out);
hl_status hl_track_save(const hl_track* t, const char* path);
void hl_track_destroy(hl_track* t);

size_t hl_track_frame_count(const hl_track* t);
hl_status hl_track_frame(const hl_track* t, size_t index, hl_frame* out);

/* Valid until hl_track_destroy. */
const char* hl_track_subject(const hl_track* t);
const char* hl_track_route(const hl_track* t);
double hl_track_fps(const hl_track* t);

/* Mark frames whose nose depth is outside the range invalid (in place). */
hl_status hl_track_apply_range(hl_track* t, const hl_range_params* range);

/* ------------------------------------------------------------- batch ops */

/* Simulate n_subjects walkers over the requested routes and write one
 * track CSV per (subject, route) plus manifest.json into out_dir. routes
 * is a comma-separated subset of R1..R6; NULL or "" means all six.
 * Byte-identical outputs for identical inputs. */
hl_status hl_simulate_dataset(const char* out_dir, const hl_sim_params* params,
                              const char* routes);

/* Run the predictor over a track file and return CSV rows
 * t,ax,ay,az,bx,by,bz,cx,cy,cz for every frame with output: the filtered
 * position (a), baseline prediction (b) and proposed prediction (c). The
 * operating range is applied first. */
hl_status hl_predict_track(const char* track_path,
                           const hl_eval_params* params, char** out_csv);

/* Evaluate every track in dataset_dir at the fixed weight params->
 * predictor.w: per-route-group mean errors and one-tailed Wilcoxon test
 * (baseline error greater than proposed). out_json receives the report;
 * out_csv (optional) the flat per-frame error table. any_degenerate
 * (optional) is set to 1 when some group's test was degenerate (all
 * differences zero). */
hl_status hl_evaluate(const char* dataset_dir, const hl_eval_params* params,
                      char** out_json, char** out_csv, int* any_degenerate);

/* Tune the blend weight on every track in dataset_dir by exhaustive grid
 * search (objective: summed proposed-prediction error). grid may be NULL
 * with grid_len 0 for the default 0:0.05:w_max grid. */
hl_status hl_tune(const char* dataset_dir, const hl_eval_params* params,
                  const double* grid, size_t grid_len, char** out_json,
                  double* w_out);

/* Leave-one-subject-out cross-validation: per fold, tune on the other
 * subjects and evaluate per group on the held-out subject. */
hl_status hl_loso(const char* dataset_dir, const hl_eval_params* params,
                  const double* grid, size_t grid_len, char** out_json,
                  char** out_csv, double* w_mean_out, int* any_degenerate);

/* ----------------------------------------------------------------- stats */

typedef struct hl_wilcoxon_result {
    double statistic; /* W+, sum of positive-difference ranks */
    double p_one_tailed;
    size_t n_effective; /* sample size after zero-difference removal */
    int exact;          /* 1 exact enumeration, 0 normal approximation */
} hl_wilcoxon_result;

/* One-tailed Wilcoxon signed-rank test with alternative "differences are
 * positive". Fails with HL_ERR_DEGENERATE_SAMPLE when every difference is
 * zero. */
hl_status hl_wilcoxon_greater(const double* diffs, size_t n,
                              hl_wilcoxon_result* out);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* HEADLEAD_H */
