#include "headlead/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <utility>

#include <nlohmann/json.hpp>

#include "headlead/textio.hpp"

namespace headlead {

namespace fs = std::filesystem;
using nlohmann::json;

std::string group_name(RouteGroup group) {
    switch (group) {
    case RouteGroup::R12: return "R12";
    case RouteGroup::R34: return "R34";
    case RouteGroup::R56: return "R56";
    }
    throw Error(ErrorKind::invalid_argument, "unknown route group");
}

RouteGroup group_of_route(const std::string& route_id) {
    if (route_id == "R1" || route_id == "R2") return RouteGroup::R12;
    if (route_id == "R3" || route_id == "R4") return RouteGroup::R34;
    if (route_id == "R5" || route_id == "R6") return RouteGroup::R56;
    throw Error(ErrorKind::invalid_argument,
                "route " + route_id + " belongs to no group");
}

TrackRun run_track(const Track& track, const KalmanConfig& kcfg,
                   double gap_reset_s) {
    if (!(track.fps > 0.0) || !std::isfinite(track.fps)) {
        throw Error(ErrorKind::invalid_argument,
                    "track " + track.key() + " has non-positive fps");
    }
    KalmanConfig cfg = kcfg;
    cfg.dt = 1.0 / track.fps; // the filter steps at the track's frame rate
    cfg.validate();

    TrackRun run;
    run.model = CvModel::from_config(cfg);
    // The tracker's own blended output is discarded; predictions for any
    // weight are recomputed later from the recorded state and angle.
    HeadTracker tracker(cfg, PredictorConfig{}, gap_reset_s);
    run.recs.resize(track.frames.size());
    for (size_t i = 0; i < track.frames.size(); ++i) {
        const Frame& f = track.frames[i];
        TrackRun::Rec& rec = run.recs[i];
        rec.t = f.t;
        const auto out = tracker.step(f);
        if (!out) {
            continue;
        }
        rec.has = true;
        rec.state = tracker.state();
        rec.theta = tracker.filtered_head_yaw();
        rec.estimated = out->estimated;
    }
    return run;
}

std::vector<FrameError> errors_from_run(const TrackRun& run,
                                        const PredictorConfig& pcfg) {
    pcfg.validate();
    std::vector<FrameError> out;
    const size_t horizon = static_cast<size_t>(pcfg.n_steps);
    if (run.recs.size() <= horizon) {
        return out;
    }
    for (size_t i = 0; i + horizon < run.recs.size(); ++i) {
        const TrackRun::Rec& now = run.recs[i];
        const TrackRun::Rec& later = run.recs[i + horizon];
        if (!now.has || !later.has) {
            continue;
        }
        const Vec3 b = baseline_predict_n(now.state, pcfg.n_steps, run.model);
        const Vec3 c =
            predict_n_steps(now.state, YawAngle{now.theta}, pcfg, run.model);
        out.push_back({now.t, distance(b, later.estimated),
                       distance(c, later.estimated)});
    }
    return out;
}

std::vector<FrameError> frame_errors(const Track& track,
                                     const PredictorConfig& pcfg,
                                     const KalmanConfig& kcfg,
                                     double gap_reset_s) {
    return errors_from_run(run_track(track, kcfg, gap_reset_s), pcfg);
}

namespace {

std::string method_string(WilcoxonMethod m) {
    return m == WilcoxonMethod::exact ? "exact" : "normal-approx";
}

/// Means + signed-rank test over every error entry matching the group.
/// Callers pass entries in key order, so pooling is deterministic.
GroupReport pool_stats(RouteGroup group, std::span<const TrackErrors> pooled,
                       double alpha) {
    GroupReport report;
    report.group = group;
    double sum_b = 0.0;
    double sum_p = 0.0;
    std::vector<double> diffs;
    for (const TrackErrors& te : pooled) {
        if (te.group != group) {
            continue;
        }
        for (const FrameError& e : te.errors) {
            sum_b += e.err_baseline;
            sum_p += e.err_proposed;
            diffs.push_back(e.err_baseline - e.err_proposed);
        }
    }
    if (diffs.empty()) {
        throw Error(ErrorKind::degenerate_sample,
                    "no comparable frames in group " + group_name(group));
    }
    const double n = static_cast<double>(diffs.size());
    report.n_frames = diffs.size();
    report.mean_err_baseline = sum_b / n;
    report.mean_err_proposed = sum_p / n;
    try {
        const WilcoxonResult res =
            wilcoxon_one_tailed(diffs, Alternative::greater);
        report.wilcoxon.statistic = res.statistic;
        report.wilcoxon.p_one_tailed = res.p_one_tailed;
        report.wilcoxon.n_effective = res.n_effective;
        report.wilcoxon.method = method_string(res.method);
        report.significant = res.p_one_tailed < alpha;
    } catch (const Error& e) {
        if (e.kind() != ErrorKind::degenerate_sample) {
            throw;
        }
        // Every difference is zero (e.g. w = 0): no evidence either way.
        report.wilcoxon = WilcoxonReport{0.0, 1.0, 0, "degenerate"};
        report.significant = false;
    }
    return report;
}

struct PreparedTrack {
    std::string key;
    std::string subject;
    RouteGroup group = RouteGroup::R12;
    size_t valid_frames = 0;
    TrackRun run;
};

void validate_config(const EvalConfig& cfg) {
    cfg.kalman.validate();
    cfg.predictor.validate();
    cfg.range.validate();
    if (!(cfg.gap_reset_s > 0.0)) {
        throw Error(ErrorKind::config, "gap_reset_s must be positive");
    }
    if (!(cfg.alpha > 0.0) || !(cfg.alpha < 1.0)) {
        throw Error(ErrorKind::config, "alpha must lie in (0, 1)");
    }
}

/// Range-filter and run every track once, sorted by key. The runs are
/// reusable for any weight and horizon.
std::vector<PreparedTrack> prepare_tracks(std::span<const Track> tracks,
                                          const EvalConfig& cfg) {
    validate_config(cfg);
    if (tracks.empty()) {
        throw Error(ErrorKind::config, "no tracks to evaluate");
    }
    std::vector<const Track*> order;
    order.reserve(tracks.size());
    for (const Track& t : tracks) {
        order.push_back(&t);
    }
    std::sort(order.begin(), order.end(),
              [](const Track* a, const Track* b) { return a->key() < b->key(); });

    std::vector<PreparedTrack> out;
    out.reserve(order.size());
    for (const Track* t : order) {
        const Track filtered = filter_operating_range(*t, cfg.range);
        PreparedTrack p;
        p.key = t->key();
        p.subject = t->subject_id;
        p.group = group_of_route(t->route_id);
        for (const Frame& f : filtered.frames) {
            if (f.valid) {
                ++p.valid_frames;
            }
        }
        p.run = run_track(filtered, cfg.kalman, cfg.gap_reset_s);
        out.push_back(std::move(p));
    }
    return out;
}

double objective_for(std::span<const PreparedTrack* const> runs, double w,
                     const EvalConfig& cfg) {
    PredictorConfig pc = cfg.predictor;
    pc.w = w;
    double total = 0.0;
    for (const PreparedTrack* p : runs) {
        for (const FrameError& e : errors_from_run(p->run, pc)) {
            total += e.err_proposed;
        }
    }
    if (!std::isfinite(total)) {
        throw Error(ErrorKind::numeric_degeneracy,
                    "tuning objective is not finite");
    }
    return total;
}

TuneResult tune_runs(std::span<const PreparedTrack* const> runs,
                     std::span<const double> grid, const EvalConfig& cfg) {
    if (runs.empty()) {
        throw Error(ErrorKind::config, "tuning requires at least one track");
    }
    if (grid.empty()) {
        throw Error(ErrorKind::config, "tuning grid is empty");
    }
    for (const double w : grid) {
        if (!std::isfinite(w) || w < 0.0 || w > cfg.predictor.w_max) {
            throw Error(ErrorKind::config, "tuning grid value " +
                                               format_g9(w) +
                                               " is outside [0, w_max]");
        }
    }
    TuneResult result;
    result.grid.assign(grid.begin(), grid.end());
    result.objectives.reserve(grid.size());
    bool first = true;
    for (const double w : grid) {
        const double obj = objective_for(runs, w, cfg);
        result.objectives.push_back(obj);
        if (first || obj < result.objective ||
            (obj == result.objective && w < result.w)) {
            result.w = w;
            result.objective = obj;
            first = false;
        }
    }
    return result;
}

constexpr RouteGroup kAllGroups[] = {RouteGroup::R12, RouteGroup::R34,
                                     RouteGroup::R56};

size_t group_error_count(std::span<const TrackErrors> errors,
                         RouteGroup group) {
    size_t n = 0;
    for (const TrackErrors& te : errors) {
        if (te.group == group) {
            n += te.errors.size();
        }
    }
    return n;
}

} // namespace

GroupReport evaluate_group(std::span<const Track> tracks, RouteGroup group,
                           const EvalConfig& cfg) {
    for (const Track& t : tracks) {
        if (group_of_route(t.route_id) != group) {
            throw Error(ErrorKind::invalid_argument,
                        "track " + t.key() + " is not in group " +
                            group_name(group));
        }
    }
    const auto prepared = prepare_tracks(tracks, cfg);
    std::vector<TrackErrors> pooled;
    pooled.reserve(prepared.size());
    for (const PreparedTrack& p : prepared) {
        pooled.push_back(
            {p.key, p.group, errors_from_run(p.run, cfg.predictor)});
    }
    return pool_stats(group, pooled, cfg.alpha);
}

TuneResult tune_w(std::span<const Track> tracks,
                  std::span<const double> w_grid, const EvalConfig& cfg) {
    const auto prepared = prepare_tracks(tracks, cfg);
    std::vector<const PreparedTrack*> runs;
    runs.reserve(prepared.size());
    for (const PreparedTrack& p : prepared) {
        runs.push_back(&p);
    }
    return tune_runs(runs, w_grid, cfg);
}

EvalReport evaluate_dataset(std::span<const Track> tracks,
                            const EvalConfig& cfg) {
    const auto prepared = prepare_tracks(tracks, cfg);
    EvalReport report;
    report.errors.reserve(prepared.size());
    for (const PreparedTrack& p : prepared) {
        report.errors.push_back(
            {p.key, p.group, errors_from_run(p.run, cfg.predictor)});
    }
    for (const RouteGroup g : kAllGroups) {
        if (group_error_count(report.errors, g) == 0) {
            continue; // group absent from this dataset
        }
        report.groups.push_back(pool_stats(g, report.errors, cfg.alpha));
    }
    if (report.groups.empty()) {
        throw Error(ErrorKind::degenerate_sample,
                    "no comparable frames in any route group");
    }
    return report;
}

CvReport loso_cv(std::span<const Track> tracks,
                 std::span<const double> w_grid, const EvalConfig& cfg) {
    const auto prepared = prepare_tracks(tracks, cfg);
    std::vector<std::string> subjects;
    for (const PreparedTrack& p : prepared) {
        subjects.push_back(p.subject);
    }
    std::sort(subjects.begin(), subjects.end());
    subjects.erase(std::unique(subjects.begin(), subjects.end()),
                   subjects.end());
    if (subjects.size() < 2) {
        throw Error(ErrorKind::config,
                    "leave-one-subject-out needs at least two subjects");
    }

    CvReport report;
    std::vector<double> tuned_ws;
    for (const std::string& subject : subjects) {
        FoldReport fold;
        fold.subject = subject;
        std::vector<const PreparedTrack*> train;
        std::vector<const PreparedTrack*> test;
        size_t test_valid = 0;
        for (const PreparedTrack& p : prepared) {
            if (p.subject == subject) {
                test.push_back(&p);
                test_valid += p.valid_frames;
            } else {
                train.push_back(&p);
            }
        }
        if (test_valid == 0) {
            fold.skipped = true;
            fold.warning = "subject " + subject +
                           " has no valid frames in range; fold skipped";
            report.folds.push_back(std::move(fold));
            continue;
        }
        const TuneResult tuned = tune_runs(train, w_grid, cfg);
        fold.w = tuned.w;
        fold.objective = tuned.objective;

        PredictorConfig pc = cfg.predictor;
        pc.w = tuned.w;
        std::vector<TrackErrors> fold_errors;
        fold_errors.reserve(test.size());
        for (const PreparedTrack* p : test) {
            fold_errors.push_back({p->key, p->group, errors_from_run(p->run, pc)});
        }
        for (const RouteGroup g : kAllGroups) {
            if (group_error_count(fold_errors, g) == 0) {
                continue;
            }
            fold.groups.push_back(pool_stats(g, fold_errors, cfg.alpha));
        }
        for (TrackErrors& te : fold_errors) {
            report.pooled_errors.push_back(std::move(te));
        }
        tuned_ws.push_back(tuned.w);
        report.folds.push_back(std::move(fold));
    }

    if (tuned_ws.empty()) {
        throw Error(ErrorKind::degenerate_sample,
                    "every cross-validation fold was skipped");
    }
    double sum = 0.0;
    for (const double w : tuned_ws) {
        sum += w;
    }
    report.w_mean = sum / static_cast<double>(tuned_ws.size());
    double var = 0.0;
    for (const double w : tuned_ws) {
        var += (w - report.w_mean) * (w - report.w_mean);
    }
    report.w_std = std::sqrt(var / static_cast<double>(tuned_ws.size()));

    // Pooled view over every held-out frame, each scored at its fold's
    // tuned weight.
    for (const RouteGroup g : kAllGroups) {
        if (group_error_count(report.pooled_errors, g) == 0) {
            continue;
        }
        report.pooled.push_back(pool_stats(g, report.pooled_errors, cfg.alpha));
    }
    return report;
}

std::vector<Track> load_dataset(const std::string& dir) {
    if (!fs::is_directory(dir)) {
        throw Error(ErrorKind::io, "not a directory: " + dir);
    }
    std::vector<fs::path> paths;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".csv") {
            paths.push_back(entry.path());
        }
    }
    if (paths.empty()) {
        throw Error(ErrorKind::config, "no track files (*.csv) in " + dir);
    }
    std::sort(paths.begin(), paths.end());
    std::vector<Track> tracks;
    tracks.reserve(paths.size());
    for (const fs::path& p : paths) {
        try {
            tracks.push_back(load_track(p.string()));
        } catch (const Error& e) {
            throw Error(e.kind(), p.filename().string() + ": " + e.what());
        }
    }
    std::sort(tracks.begin(), tracks.end(),
              [](const Track& a, const Track& b) { return a.key() < b.key(); });
    return tracks;
}

std::vector<double> default_w_grid(double w_max) {
    if (!(w_max > 0.0) || !std::isfinite(w_max)) {
        throw Error(ErrorKind::config, "w_max must be positive");
    }
    std::vector<double> grid;
    for (int k = 0;; ++k) {
        const double w = 0.05 * k;
        if (w > w_max + 1e-12) {
            break;
        }
        grid.push_back(std::min(w, w_max));
    }
    if (grid.back() < w_max - 1e-12) {
        grid.push_back(w_max); // cover the endpoint for non-multiple w_max
    }
    return grid;
}

namespace {

json config_json(const EvalConfig& cfg) {
    return json{
        {"alpha", cfg.alpha},
        {"gap_reset_s", cfg.gap_reset_s},
        {"kalman",
         {{"dt", cfg.kalman.dt},
          {"q_accel", cfg.kalman.q_accel},
          {"r_pos", cfg.kalman.r_pos},
          {"q_yaw", cfg.kalman.q_yaw},
          {"r_yaw", cfg.kalman.r_yaw}}},
        {"predictor",
         {{"n_steps", cfg.predictor.n_steps},
          {"w", cfg.predictor.w},
          {"w_max", cfg.predictor.w_max}}},
        {"range",
         {{"min_depth_m", cfg.range.min_depth},
          {"max_depth_m", cfg.range.max_depth}}},
    };
}

json group_json(const GroupReport& g) {
    return json{
        {"group", group_name(g.group)},
        {"n_frames", g.n_frames},
        {"mean_err_baseline_m", g.mean_err_baseline},
        {"mean_err_proposed_m", g.mean_err_proposed},
        {"wilcoxon",
         {{"statistic", g.wilcoxon.statistic},
          {"p_one_tailed", g.wilcoxon.p_one_tailed},
          {"n_effective", g.wilcoxon.n_effective},
          {"method", g.wilcoxon.method}}},
        {"significant", g.significant},
    };
}

json groups_json(std::span<const GroupReport> groups) {
    json arr = json::array();
    for (const GroupReport& g : groups) {
        arr.push_back(group_json(g));
    }
    return arr;
}

std::string dump_report(const json& j) { return j.dump(2) + "\n"; }

} // namespace

std::string evaluate_report_json(const EvalReport& report,
                                 const EvalConfig& cfg) {
    const json j{
        {"config", config_json(cfg)},
        {"pairing_unit", "frame"},
        {"groups", groups_json(report.groups)},
    };
    return dump_report(j);
}

std::string tune_report_json(const TuneResult& result, const EvalConfig& cfg) {
    const json j{
        {"config", config_json(cfg)},
        {"grid", result.grid},
        {"objectives_m", result.objectives},
        {"w", result.w},
        {"objective_m", result.objective},
    };
    return dump_report(j);
}

std::string cv_report_json(const CvReport& report, const EvalConfig& cfg) {
    json folds = json::array();
    for (const FoldReport& fold : report.folds) {
        json f{{"subject", fold.subject}, {"skipped", fold.skipped}};
        if (fold.skipped) {
            f["warning"] = fold.warning;
        } else {
            f["w"] = fold.w;
            f["objective_m"] = fold.objective;
            f["groups"] = groups_json(fold.groups);
        }
        folds.push_back(std::move(f));
    }
    const json j{
        {"config", config_json(cfg)},
        {"pairing_unit", "frame"},
        {"folds", folds},
        {"w_mean", report.w_mean},
        {"w_std", report.w_std},
        {"pooled", groups_json(report.pooled)},
    };
    return dump_report(j);
}

std::string frame_errors_csv(std::span<const TrackErrors> errors) {
    std::string out = "track,t,err_baseline_m,err_proposed_m\n";
    for (const TrackErrors& te : errors) {
        for (const FrameError& e : te.errors) {
            out += te.key;
            out += ',';
            out += format_g9(e.t);
            out += ',';
            out += format_g9(e.err_baseline);
            out += ',';
            out += format_g9(e.err_proposed);
            out += '\n';
        }
    }
    return out;
}

} // namespace headlead
