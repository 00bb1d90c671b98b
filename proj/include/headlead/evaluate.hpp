#pragma once

#include <span>
#include <string>
#include <vector>

#include "headlead/predictor.hpp"
#include "headlead/wilcoxon.hpp"

namespace headlead {

/// Per-frame prediction errors: Euclidean distance between the N-step
/// prediction issued at time t and the filtered position at t+N.
struct FrameError {
    double t = 0.0;
    double err_baseline = 0.0; // m
    double err_proposed = 0.0; // m
};

enum class RouteGroup { R12, R34, R56 };

std::string group_name(RouteGroup group);
RouteGroup group_of_route(const std::string& route_id);

/// Everything the evaluation protocol needs; echoed into every report.
struct EvalConfig {
    KalmanConfig kalman;
    PredictorConfig predictor;
    OperatingRange range;
    double gap_reset_s = 1.0;
    double alpha = 0.05;
};

/// Wilcoxon block of a report. method is "exact", "normal-approx" or
/// "degenerate" (all differences zero; p reported as 1).
struct WilcoxonReport {
    double statistic = 0.0;
    double p_one_tailed = 1.0;
    size_t n_effective = 0;
    std::string method = "degenerate";
};

struct GroupReport {
    RouteGroup group = RouteGroup::R12;
    size_t n_frames = 0;
    double mean_err_baseline = 0.0; // m
    double mean_err_proposed = 0.0; // m
    WilcoxonReport wilcoxon;
    bool significant = false; // p < alpha on the "greater" alternative
};

/// Per-frame pipeline outputs of one track, with everything needed to
/// recompute predictions for any blend weight without re-running the
/// filters (the filter pass does not depend on w or N).
struct TrackRun {
    struct Rec {
        bool has = false;
        double t = 0.0;
        StateEstimate state;
        double theta = 0.0; // filtered head-pose angle
        Vec3 estimated;     // position (a)
    };
    std::vector<Rec> recs;
    CvModel model;
};

/// Run the prediction pipeline over a track as-is (no range filtering
/// here). The filter step interval comes from the track's fps.
TrackRun run_track(const Track& track, const KalmanConfig& kcfg,
                   double gap_reset_s);

/// Errors for a given weight/horizon from a cached run. Emits one entry per
/// frame t where frame t+N exists and both carry pipeline output.
std::vector<FrameError> errors_from_run(const TrackRun& run,
                                        const PredictorConfig& pcfg);

/// Convenience: run_track + errors_from_run. The track is expected to be
/// parsed and range-filtered already.
std::vector<FrameError> frame_errors(const Track& track,
                                     const PredictorConfig& pcfg,
                                     const KalmanConfig& kcfg,
                                     double gap_reset_s = 1.0);

/// Pool per-frame errors across a group's tracks (range filter applied
/// here), compare means, and test err_baseline - err_proposed with the
/// one-tailed "greater" alternative. Tracks are pooled in key order so the
/// result is permutation-invariant. Throws degenerate_sample on an empty
/// pool.
GroupReport evaluate_group(std::span<const Track> tracks, RouteGroup group,
                           const EvalConfig& cfg);

struct TuneResult {
    double w = 0.0;
    double objective = 0.0; // m, summed proposed-vs-estimated error
    std::vector<double> grid;
    std::vector<double> objectives; // aligned with grid
};

/// Exhaustive deterministic grid search minimizing the summed per-frame
/// proposed-vs-estimated error over all training tracks. Ties break toward
/// the smaller weight.
TuneResult tune_w(std::span<const Track> tracks,
                  std::span<const double> w_grid, const EvalConfig& cfg);

struct FoldReport {
    std::string subject;
    bool skipped = false;
    std::string warning;
    double w = 0.0;
    double objective = 0.0;
    std::vector<GroupReport> groups;
};

/// Labeled per-frame errors, used for the flat CSV export.
struct TrackErrors {
    std::string key;
    RouteGroup group = RouteGroup::R12;
    std::vector<FrameError> errors;
};

struct CvReport {
    std::vector<FoldReport> folds; // one per subject, in subject order
    double w_mean = 0.0;
    double w_std = 0.0; // population std over non-skipped folds
    std::vector<GroupReport> pooled; // across all held-out frames
    std::vector<TrackErrors> pooled_errors;
};

/// Leave-one-subject-out cross-validation: per fold, tune w on the other
/// subjects and evaluate per group on the held-out subject. Deterministic.
CvReport loso_cv(std::span<const Track> tracks,
                 std::span<const double> w_grid, const EvalConfig& cfg);

/// Evaluation over a whole dataset at a fixed weight: one GroupReport per
/// route group present.
struct EvalReport {
    std::vector<GroupReport> groups;
    std::vector<TrackErrors> errors;
};

EvalReport evaluate_dataset(std::span<const Track> tracks,
                            const EvalConfig& cfg);

/// Load every *.csv track in a directory, sorted by track key.
std::vector<Track> load_dataset(const std::string& dir);

/// Default tuning grid: 0 to w_max in steps of 0.05.
std::vector<double> default_w_grid(double w_max);

// Report serialization. JSON key order and number formatting are stable, so
// reruns with the same inputs are byte-identical.
std::string evaluate_report_json(const EvalReport& report,
                                 const EvalConfig& cfg);
std::string tune_report_json(const TuneResult& result, const EvalConfig& cfg);
std::string cv_report_json(const CvReport& report, const EvalConfig& cfg);
std::string frame_errors_csv(std::span<const TrackErrors> errors);

} // namespace headlead
