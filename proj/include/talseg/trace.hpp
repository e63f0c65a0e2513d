#pragma once

// Keypoint trace parsing, validation, and normalization.
//
// Trace files are UTF-8 line-delimited JSON, one object per frame:
//   {"video_id": str, "frame": int, "t": float?, "width": int, "height": int,
//    "normalized": bool?, "keypoints": {name: [x, y, conf], ...}}
// Records of one video must be contiguous and their frame indices strictly
// increasing. Coordinates may be pixels or unit fractions; the `normalized`
// flag (default false) disambiguates.

#include <array>
#include <cmath>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "talseg/errors.hpp"

namespace talseg {

struct Keypoint {
    double x = 0.0;
    double y = 0.0;
    double conf = 0.0;
};

using KeypointMap = std::map<std::string, Keypoint, std::less<>>;

struct KeypointFrame {
    std::string video_id;
    std::int64_t frame = 0;
    double t = 0.0;
    int width = 0;
    int height = 0;
    bool normalized = false;
    KeypointMap keypoints;
};

struct VideoTrace {
    std::string video_id;
    double fps = 0.0;
    std::vector<KeypointFrame> frames;
};

// Minimum keypoint schema consumed downstream. Frames may carry extra names
// (ignored); a missing required name acts as a confidence-0 detection.
inline constexpr std::array<std::string_view, 9> kRequiredKeypoints = {
    "nose",       "left_eye",   "right_eye",  "left_shoulder", "right_shoulder",
    "left_elbow", "right_elbow", "left_wrist", "right_wrist"};

inline Keypoint keypoint_or_missing(const KeypointFrame& frame, std::string_view name) {
    auto it = frame.keypoints.find(name);
    if (it == frame.keypoints.end()) return Keypoint{0.0, 0.0, 0.0};
    return it->second;
}

namespace detail {

inline double require_finite_number(const nlohmann::json& v, std::size_t line_no,
                                    const char* what) {
    if (!v.is_number()) throw ParseError(line_no, std::string(what) + " must be a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw ParseError(line_no, std::string(what) + " must be finite");
    return d;
}

inline KeypointFrame parse_trace_record(const std::string& line, std::size_t line_no) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(line_no, std::string("invalid record: ") + e.what());
    }
    if (!j.is_object()) throw ParseError(line_no, "record is not an object");

    static const std::set<std::string> kAllowed = {"video_id", "frame",      "t",
                                                   "width",    "height",     "normalized",
                                                   "keypoints"};
    for (const auto& item : j.items()) {
        if (kAllowed.find(item.key()) == kAllowed.end())
            throw ParseError(line_no, "unknown field '" + item.key() + "'");
    }
    for (const char* req : {"video_id", "frame", "width", "height", "keypoints"}) {
        if (!j.contains(req))
            throw ParseError(line_no, std::string("missing field '") + req + "'");
    }

    KeypointFrame f;
    if (!j["video_id"].is_string()) throw ParseError(line_no, "'video_id' must be a string");
    f.video_id = j["video_id"].get<std::string>();
    if (f.video_id.empty()) throw ParseError(line_no, "'video_id' must be non-empty");

    if (!j["frame"].is_number_integer() || j["frame"].get<std::int64_t>() < 0)
        throw ParseError(line_no, "'frame' must be a non-negative integer");
    f.frame = j["frame"].get<std::int64_t>();

    for (const char* dim : {"width", "height"}) {
        if (!j[dim].is_number_integer() || j[dim].get<std::int64_t>() <= 0)
            throw ParseError(line_no, std::string("'") + dim + "' must be a positive integer");
    }
    f.width = j["width"].get<int>();
    f.height = j["height"].get<int>();

    if (j.contains("normalized")) {
        if (!j["normalized"].is_boolean())
            throw ParseError(line_no, "'normalized' must be a boolean");
        f.normalized = j["normalized"].get<bool>();
    }

    if (j.contains("t")) {
        const double t = require_finite_number(j["t"], line_no, "'t'");
        if (t < 0) throw ParseError(line_no, "'t' must be non-negative");
        f.t = t;
    } else {
        f.t = -1.0;  // resolved to frame/fps by the reader
    }

    if (!j["keypoints"].is_object())
        throw ParseError(line_no, "'keypoints' must be an object");
    for (const auto& item : j["keypoints"].items()) {
        const auto& arr = item.value();
        if (!arr.is_array() || arr.size() != 3)
            throw ParseError(line_no, "keypoint '" + item.key() + "' must be [x, y, conf]");
        Keypoint kp;
        kp.x = require_finite_number(arr[0], line_no, ("keypoint '" + item.key() + "' x").c_str());
        kp.y = require_finite_number(arr[1], line_no, ("keypoint '" + item.key() + "' y").c_str());
        kp.conf =
            require_finite_number(arr[2], line_no, ("keypoint '" + item.key() + "' conf").c_str());
        if (kp.conf < 0.0 || kp.conf > 1.0)
            throw ParseError(line_no, "keypoint '" + item.key() + "' conf must be in [0,1]");
        f.keypoints.emplace(item.key(), kp);
    }
    return f;
}

inline bool is_blank(const std::string& line) {
    for (char c : line)
        if (c != ' ' && c != '\t' && c != '\r') return false;
    return true;
}

}  // namespace detail

// Incremental reader yielding one VideoTrace per contiguous run of records
// sharing a video_id. Enforces strictly increasing frame indices and
// non-decreasing timestamps within each video.
class TraceReader {
  public:
    TraceReader(std::istream& in, double fps) : in_(in), fps_(fps) {
        if (!(fps > 0)) throw ConfigError("fps must be positive");
    }

    std::optional<VideoTrace> next() {
        std::string line;
        while (std::getline(in_, line)) {
            ++line_no_;
            if (detail::is_blank(line)) continue;
            KeypointFrame f = detail::parse_trace_record(line, line_no_);
            if (f.t < 0) f.t = static_cast<double>(f.frame) / fps_;

            if (!current_ || current_->video_id != f.video_id) {
                if (closed_.count(f.video_id) || (current_ && current_->video_id == f.video_id))
                    throw ParseError(line_no_,
                                     "records for video '" + f.video_id + "' are not contiguous");
                std::optional<VideoTrace> done = finish_current();
                current_ = VideoTrace{f.video_id, fps_, {}};
                current_->frames.push_back(std::move(f));
                if (done) return done;
                continue;
            }
            const KeypointFrame& prev = current_->frames.back();
            if (f.frame == prev.frame)
                throw ParseError(line_no_, "duplicate frame index " + std::to_string(f.frame) +
                                               " in video '" + f.video_id + "'");
            if (f.frame < prev.frame)
                throw ParseError(line_no_, "non-monotone frame index " + std::to_string(f.frame) +
                                               " after " + std::to_string(prev.frame) +
                                               " in video '" + f.video_id + "'");
            if (f.t < prev.t)
                throw ParseError(line_no_, "timestamp decreases at frame " +
                                               std::to_string(f.frame) + " in video '" +
                                               f.video_id + "'");
            current_->frames.push_back(std::move(f));
        }
        return finish_current();
    }

  private:
    std::optional<VideoTrace> finish_current() {
        if (!current_) return std::nullopt;
        closed_.insert(current_->video_id);
        std::optional<VideoTrace> out = std::move(current_);
        current_.reset();
        return out;
    }

    std::istream& in_;
    double fps_;
    std::size_t line_no_ = 0;
    std::optional<VideoTrace> current_;
    std::set<std::string> closed_;
};

inline std::vector<VideoTrace> parse_traces(std::istream& in, double fps) {
    TraceReader reader(in, fps);
    std::vector<VideoTrace> out;
    while (auto trace = reader.next()) out.push_back(std::move(*trace));
    return out;
}

// Single-video form; empty input yields an empty trace.
inline VideoTrace parse_trace(std::istream& in, double fps) {
    std::vector<VideoTrace> all = parse_traces(in, fps);
    if (all.empty()) return VideoTrace{"", fps, {}};
    if (all.size() > 1)
        throw Error("expected a single video, found " + std::to_string(all.size()));
    return std::move(all.front());
}

inline void write_trace_record(const KeypointFrame& f, std::ostream& os) {
    nlohmann::ordered_json j;
    j["video_id"] = f.video_id;
    j["frame"] = f.frame;
    j["t"] = f.t;
    j["width"] = f.width;
    j["height"] = f.height;
    if (f.normalized) j["normalized"] = true;
    nlohmann::ordered_json kps = nlohmann::ordered_json::object();
    for (const auto& [name, kp] : f.keypoints) kps[name] = {kp.x, kp.y, kp.conf};
    j["keypoints"] = std::move(kps);
    os << j.dump() << '\n';
}

inline void serialize_trace(const VideoTrace& trace, std::ostream& os) {
    for (const KeypointFrame& f : trace.frames) write_trace_record(f, os);
}

struct NormalizeStats {
    std::size_t clamped = 0;  // coordinates clamped into [0,1]
};

// Rescales pixel coordinates into the unit square and clamps strays.
// Already-normalized frames are only clamped. Idempotent.
inline VideoTrace normalize_coordinates(VideoTrace trace, NormalizeStats* stats = nullptr) {
    for (KeypointFrame& f : trace.frames) {
        const double w = static_cast<double>(f.width);
        const double h = static_cast<double>(f.height);
        for (auto& [name, kp] : f.keypoints) {
            double x = f.normalized ? kp.x : kp.x / w;
            double y = f.normalized ? kp.y : kp.y / h;
            if (x < 0.0 || x > 1.0) {
                x = x < 0.0 ? 0.0 : 1.0;
                if (stats) ++stats->clamped;
            }
            if (y < 0.0 || y > 1.0) {
                y = y < 0.0 ? 0.0 : 1.0;
                if (stats) ++stats->clamped;
            }
            kp.x = x;
            kp.y = y;
        }
        f.normalized = true;
    }
    return trace;
}

}  // namespace talseg
