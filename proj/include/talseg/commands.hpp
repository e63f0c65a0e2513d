#pragma once

// Subcommand entry points shared by the CLI binary and the test suites.
// Each takes input paths plus the effective configuration and writes its
// primary output to a stream; diagnostics go through the logger.
//
// Numeric video ids in emitted submissions cover every video visible in the
// inputs: videos that produced at least one segment plus videos present in
// the scores file. Supplying a scores file that covers all videos therefore
// pins the numbering even for videos without detections.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "talseg/config.hpp"
#include "talseg/log.hpp"
#include "talseg/pipeline.hpp"
#include "talseg/postprocess.hpp"
#include "talseg/scorer.hpp"
#include "talseg/synth.hpp"

namespace talseg {

namespace detail {

inline std::ifstream open_input(const std::string& path, const char* what) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(std::string("cannot open ") + what + " file '" + path + "'");
    return in;
}

struct LabeledVideo {
    std::vector<LabeledEvent> events;
    bool has_segments = false;
    std::size_t unclassified = 0;
    std::size_t clamped = 0;
};

// Shared tail of classify/pipeline: short-event filter, id assignment over
// the visible video universe, submission emission.
inline void emit_submission(std::vector<std::pair<std::string, LabeledVideo>>& per_video,
                            const ScoresIndex& scores_index, const PipelineConfig& cfg,
                            std::ostream& out) {
    std::set<std::string> universe;
    std::vector<LabeledEvent> events;
    for (auto& [video_id, lv] : per_video) {
        if (lv.clamped > 0)
            log::info("video '" + video_id + "': clamped " + std::to_string(lv.clamped) +
                      " out-of-bounds coordinates");
        if (lv.unclassified > 0)
            log::warn("video '" + video_id + "': dropped " + std::to_string(lv.unclassified) +
                      " unclassified segments (no score frames overlap)");
        if (lv.has_segments) universe.insert(video_id);
        for (LabeledEvent& e : lv.events) events.push_back(std::move(e));
    }
    for (const auto& [video_id, group] : scores_index.groups) universe.insert(video_id);

    events = filter_short(std::move(events), cfg.min_duration);
    if (events.empty()) return;
    const auto id_map = build_id_map(universe);
    SubmissionStats stats;
    const std::vector<SubmissionRow> rows = to_submission(events, id_map, &stats);
    write_submission(rows, out);
}

}  // namespace detail

// segment: trace -> line-delimited segment dump (and optional angle dump).
inline void cmd_segment(const std::string& trace_path, const PipelineConfig& cfg,
                        std::ostream& out, std::ostream* angles_out = nullptr) {
    validate(cfg);
    std::ifstream trace_in = detail::open_input(trace_path, "trace");

    struct R {
        std::vector<Segment> segments;
        std::string angle_lines;
        std::size_t clamped = 0;
    };
    const bool want_angles = angles_out != nullptr;
    auto results = process_trace_stream<R>(
        trace_in, cfg.fps, cfg.jobs, [&cfg, want_angles](VideoTrace trace) {
            R r;
            NormalizeStats stats;
            trace = normalize_coordinates(std::move(trace), &stats);
            r.clamped = stats.clamped;
            const std::vector<AngleSample> angles = angle_series(trace, kinematics_config(cfg));
            if (want_angles) {
                std::ostringstream os;
                for (const AngleSample& s : angles) write_angle_record(trace.video_id, s, os);
                r.angle_lines = os.str();
            }
            const std::vector<FrameLabel> labels = classify_series(angles, segmenter_config(cfg));
            r.segments = extract_segments(trace.video_id, labels, cfg.fps, segmenter_config(cfg));
            return r;
        });

    for (auto& [video_id, r] : results) {
        if (r.clamped > 0)
            log::info("video '" + video_id + "': clamped " + std::to_string(r.clamped) +
                      " out-of-bounds coordinates");
        for (const Segment& s : r.segments) write_segment_record(s, out);
        if (angles_out) *angles_out << r.angle_lines;
    }
}

// classify: segment dump + scores -> submission.
inline void cmd_classify(const std::string& segments_path, const std::string& scores_path,
                         const PipelineConfig& cfg, std::ostream& out) {
    validate(cfg);
    std::ifstream seg_in = detail::open_input(segments_path, "segments");
    const std::vector<Segment> all_segments = parse_segments(seg_in);
    const ScoresIndex scores_index = index_scores_file(scores_path);

    std::vector<std::pair<std::string, std::vector<Segment>>> grouped;
    for (const Segment& s : all_segments) {
        if (grouped.empty() || grouped.back().first != s.video_id)
            grouped.emplace_back(s.video_id, std::vector<Segment>{});
        grouped.back().second.push_back(s);
    }

    auto labeled = parallel_map<std::pair<std::string, std::vector<Segment>>,
                                detail::LabeledVideo>(
        grouped, cfg.jobs, [&](const std::pair<std::string, std::vector<Segment>>& item) {
            detail::LabeledVideo lv;
            lv.has_segments = true;
            auto git = scores_index.groups.find(item.first);
            if (git == scores_index.groups.end()) {
                lv.unclassified = item.second.size();
                return lv;
            }
            const std::vector<FrameScores> scores = read_scores_group(scores_path, git->second);
            for (const Segment& seg : item.second) {
                if (auto ev = label_segment(seg, scores, cfg.fps))
                    lv.events.push_back(std::move(*ev));
                else
                    ++lv.unclassified;
            }
            return lv;
        });

    std::vector<std::pair<std::string, detail::LabeledVideo>> per_video;
    per_video.reserve(grouped.size());
    for (std::size_t i = 0; i < grouped.size(); ++i)
        per_video.emplace_back(grouped[i].first, std::move(labeled[i]));
    std::sort(per_video.begin(), per_video.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });

    detail::emit_submission(per_video, scores_index, cfg, out);
}

// pipeline: trace + scores -> submission, equal to segment | classify.
inline void cmd_pipeline(const std::string& trace_path, const std::string& scores_path,
                         const PipelineConfig& cfg, std::ostream& out) {
    validate(cfg);
    const ScoresIndex scores_index = index_scores_file(scores_path);
    std::ifstream trace_in = detail::open_input(trace_path, "trace");

    auto per_video = process_trace_stream<detail::LabeledVideo>(
        trace_in, cfg.fps, cfg.jobs, [&](VideoTrace trace) {
            detail::LabeledVideo lv;
            NormalizeStats stats;
            const std::string video_id = trace.video_id;
            const std::vector<Segment> segments = segment_video(std::move(trace), cfg, &stats);
            lv.clamped = stats.clamped;
            if (segments.empty()) return lv;
            lv.has_segments = true;
            auto git = scores_index.groups.find(video_id);
            if (git == scores_index.groups.end()) {
                lv.unclassified = segments.size();
                return lv;
            }
            const std::vector<FrameScores> scores = read_scores_group(scores_path, git->second);
            for (const Segment& seg : segments) {
                if (auto ev = label_segment(seg, scores, cfg.fps))
                    lv.events.push_back(std::move(*ev));
                else
                    ++lv.unclassified;
            }
            return lv;
        });

    detail::emit_submission(per_video, scores_index, cfg, out);
}

// score: predictions + ground truth (submission format) -> report.
// Writes the structured report to report_out when given and always prints
// the one-line aggregate to summary_out.
inline ScoreReport cmd_score(const std::string& pred_path, const std::string& gt_path,
                             const PipelineConfig& cfg, std::ostream* report_out,
                             std::ostream& summary_out) {
    validate(cfg);
    std::ifstream pred_in = detail::open_input(pred_path, "predictions");
    std::ifstream gt_in = detail::open_input(gt_path, "ground-truth");
    const std::vector<LabeledEvent> preds = submission_to_events(parse_submission(pred_in));
    const std::vector<LabeledEvent> gts = submission_to_events(parse_submission(gt_in));

    const ScoreReport report = score(preds, gts, cfg.matching);
    char line[160];
    std::snprintf(line, sizeof line,
                  "aggregate %.6f matched %zu unmatched_gt %zu unmatched_pred %zu",
                  report.aggregate, report.matched.size(), report.unmatched_gt,
                  report.unmatched_pred);
    summary_out << line << '\n';
    if (report_out) *report_out << report_to_json(report).dump(2) << '\n';
    return report;
}

// synth: event script -> trace.jsonl, scores.jsonl, ground_truth.txt.
inline void cmd_synth(const std::string& script_path, const std::string& out_dir,
                      const PipelineConfig& cfg,
                      std::optional<double> score_noise_override = std::nullopt) {
    validate(cfg);
    std::ifstream script_in = detail::open_input(script_path, "script");
    std::vector<EventScript> scripts = parse_scripts(script_in);
    if (score_noise_override)
        for (EventScript& s : scripts) s.score_noise = *score_noise_override;

    std::filesystem::create_directories(out_dir);
    const auto open_out = [&](const char* name) {
        std::ofstream out(std::filesystem::path(out_dir) / name, std::ios::binary);
        if (!out) throw Error(std::string("cannot write '") + name + "' in '" + out_dir + "'");
        return out;
    };
    std::ofstream trace_out = open_out("trace.jsonl");
    std::ofstream scores_out = open_out("scores.jsonl");
    std::ofstream gt_out = open_out("ground_truth.txt");
    generate(scripts, segmenter_config(cfg), trace_out, scores_out, gt_out);
}

}  // namespace talseg
