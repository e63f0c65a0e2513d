#pragma once

// Per-frame Anomaly/NormalDriving classification from thresholded angles,
// then extraction of contiguous anomaly segments with gap tolerance.
//
// A frame is Anomaly when its head angle exceeds theta_head or either hand
// angle exceeds theta_hand (strict inequalities). A frame with all three
// angles undefined carries the previous frame's label forward when
// carry_forward is set, defaulting to NormalDriving.
//
// Segments are half-open [start, end) intervals: start is the first anomaly
// frame's timestamp, end is the last one's plus one frame period. Anomaly
// runs separated by normal spans no longer than gap_tolerance merge.

#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <set>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "talseg/errors.hpp"
#include "talseg/kinematics.hpp"

namespace talseg {

struct SegmenterConfig {
    double theta_head = 25.0;   // degrees, > 0
    double theta_hand = 40.0;   // degrees
    double gap_tolerance = 0.5; // seconds, >= 0
    bool carry_forward = true;
};

inline void validate(const SegmenterConfig& cfg) {
    if (!(cfg.theta_head > 0)) throw ConfigError("theta_head must be positive");
    if (!(cfg.gap_tolerance >= 0)) throw ConfigError("gap_tolerance must be non-negative");
}

enum class FrameClass { kNormalDriving, kAnomaly };

struct FrameLabel {
    std::int64_t frame = 0;
    double t = 0.0;
    FrameClass label = FrameClass::kNormalDriving;
};

inline FrameLabel classify_frame(const AngleSample& s, const SegmenterConfig& cfg,
                                 const std::optional<FrameLabel>& prev) {
    if (!s.head_angle && !s.left_hand_angle && !s.right_hand_angle) {
        const FrameClass label =
            (cfg.carry_forward && prev) ? prev->label : FrameClass::kNormalDriving;
        return FrameLabel{s.frame, s.t, label};
    }
    const bool anomaly = (s.head_angle && *s.head_angle > cfg.theta_head) ||
                         (s.left_hand_angle && *s.left_hand_angle > cfg.theta_hand) ||
                         (s.right_hand_angle && *s.right_hand_angle > cfg.theta_hand);
    return FrameLabel{s.frame, s.t, anomaly ? FrameClass::kAnomaly : FrameClass::kNormalDriving};
}

inline std::vector<FrameLabel> classify_series(std::span<const AngleSample> samples,
                                               const SegmenterConfig& cfg) {
    validate(cfg);
    std::vector<FrameLabel> out;
    out.reserve(samples.size());
    std::optional<FrameLabel> prev;
    for (const AngleSample& s : samples) {
        out.push_back(classify_frame(s, cfg, prev));
        prev = out.back();
    }
    return out;
}

struct Segment {
    std::string video_id;
    double start = 0.0;        // seconds, inclusive
    double end = 0.0;          // seconds, exclusive
    std::int64_t frames = 0;   // anomaly frames covered
};

inline std::vector<Segment> extract_segments(const std::string& video_id,
                                             std::span<const FrameLabel> labels, double fps,
                                             const SegmenterConfig& cfg) {
    validate(cfg);
    if (!(fps > 0)) throw ConfigError("fps must be positive");
    const double frame_period = 1.0 / fps;

    std::vector<Segment> out;
    bool in_run = false;
    double run_start = 0.0;
    double run_end = 0.0;
    std::int64_t run_frames = 0;

    auto flush = [&] {
        if (!out.empty() && run_start - out.back().end <= cfg.gap_tolerance) {
            out.back().end = run_end;
            out.back().frames += run_frames;
        } else {
            out.push_back(Segment{video_id, run_start, run_end, run_frames});
        }
    };

    for (const FrameLabel& l : labels) {
        if (l.label == FrameClass::kAnomaly) {
            if (!in_run) {
                in_run = true;
                run_start = l.t;
                run_frames = 0;
            }
            ++run_frames;
            run_end = l.t + frame_period;
        } else if (in_run) {
            flush();
            in_run = false;
        }
    }
    if (in_run) flush();
    return out;
}

// Segment dump: line-delimited {video_id, start, end, frames}.
inline void write_segment_record(const Segment& s, std::ostream& os) {
    nlohmann::ordered_json j;
    j["video_id"] = s.video_id;
    j["start"] = s.start;
    j["end"] = s.end;
    j["frames"] = s.frames;
    os << j.dump() << '\n';
}

inline std::vector<Segment> parse_segments(std::istream& in) {
    std::vector<Segment> out;
    std::set<std::string> closed;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (detail::is_blank(line)) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(line_no, std::string("invalid record: ") + e.what());
        }
        if (!j.is_object()) throw ParseError(line_no, "record is not an object");
        static const std::set<std::string> kAllowed = {"video_id", "start", "end", "frames"};
        for (const auto& item : j.items()) {
            if (kAllowed.find(item.key()) == kAllowed.end())
                throw ParseError(line_no, "unknown field '" + item.key() + "'");
        }
        for (const char* req : {"video_id", "start", "end", "frames"}) {
            if (!j.contains(req))
                throw ParseError(line_no, std::string("missing field '") + req + "'");
        }
        Segment s;
        if (!j["video_id"].is_string()) throw ParseError(line_no, "'video_id' must be a string");
        s.video_id = j["video_id"].get<std::string>();
        s.start = detail::require_finite_number(j["start"], line_no, "'start'");
        s.end = detail::require_finite_number(j["end"], line_no, "'end'");
        if (!j["frames"].is_number_integer() || j["frames"].get<std::int64_t>() < 1)
            throw ParseError(line_no, "'frames' must be a positive integer");
        s.frames = j["frames"].get<std::int64_t>();
        if (!(s.start >= 0) || !(s.start < s.end))
            throw ParseError(line_no, "segment must satisfy 0 <= start < end");

        if (!out.empty() && out.back().video_id == s.video_id) {
            if (s.start < out.back().end)
                throw ParseError(line_no, "segments overlap or are unsorted in video '" +
                                              s.video_id + "'");
        } else {
            if (closed.count(s.video_id))
                throw ParseError(line_no,
                                 "records for video '" + s.video_id + "' are not contiguous");
            if (!out.empty()) closed.insert(out.back().video_id);
        }
        out.push_back(std::move(s));
    }
    return out;
}

}  // namespace talseg
