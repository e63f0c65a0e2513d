#pragma once

// Segment labeling from externally produced per-frame class scores.
//
// The classifier itself lives outside this toolkit; its output is a file
// contract: line-delimited {"video_id": str, "frame": int, "scores": [16
// floats]} where index 0 is normal driving and 1..15 are the anomaly classes.
// A segment's label is the argmax of the per-class score means over the
// frames it covers, class 0 excluded, ties broken toward the lowest id.

#include <algorithm>
#include <array>
#include <cstdint>
#include <istream>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "talseg/errors.hpp"
#include "talseg/segmenter.hpp"

namespace talseg {

inline constexpr int kActivityClassCount = 15;
inline constexpr std::size_t kScoreArity = 16;  // class 0 + 15 anomaly classes

inline constexpr std::array<std::string_view, kScoreArity> kActivityLabels = {
    "Normal Driving",
    "Drinking",
    "Phone Call(right)",
    "Phone Call(left)",
    "Eating",
    "Text (Right)",
    "Text (Left)",
    "Reaching behind",
    "Adjust control panel",
    "Pick up from floor (Driver)",
    "Pick up from floor (Passenger)",
    "Talk to passenger at the right",
    "Talk to passenger at backseat",
    "yawning",
    "Hand on head",
    "Singing or dancing with music",
};

inline bool is_anomaly_class(int id) { return id >= 1 && id <= kActivityClassCount; }

inline std::string_view activity_label(int id) {
    if (id < 0 || id >= static_cast<int>(kScoreArity))
        throw Error("activity id " + std::to_string(id) + " out of range");
    return kActivityLabels[static_cast<std::size_t>(id)];
}

struct FrameScores {
    std::string video_id;
    std::int64_t frame = 0;
    std::array<double, kScoreArity> scores{};
};

namespace detail {

inline FrameScores parse_scores_record(const std::string& line, std::size_t line_no) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(line_no, std::string("invalid record: ") + e.what());
    }
    if (!j.is_object()) throw ParseError(line_no, "record is not an object");
    static const std::set<std::string> kAllowed = {"video_id", "frame", "scores"};
    for (const auto& item : j.items()) {
        if (kAllowed.find(item.key()) == kAllowed.end())
            throw ParseError(line_no, "unknown field '" + item.key() + "'");
    }
    for (const char* req : {"video_id", "frame", "scores"}) {
        if (!j.contains(req))
            throw ParseError(line_no, std::string("missing field '") + req + "'");
    }
    FrameScores s;
    if (!j["video_id"].is_string()) throw ParseError(line_no, "'video_id' must be a string");
    s.video_id = j["video_id"].get<std::string>();
    if (!j["frame"].is_number_integer() || j["frame"].get<std::int64_t>() < 0)
        throw ParseError(line_no, "'frame' must be a non-negative integer");
    s.frame = j["frame"].get<std::int64_t>();
    if (!j["scores"].is_array()) throw ParseError(line_no, "'scores' must be an array");
    if (j["scores"].size() != kScoreArity)
        throw ParseError(line_no, "scores arity " + std::to_string(j["scores"].size()) +
                                      ", expected " + std::to_string(kScoreArity));
    for (std::size_t i = 0; i < kScoreArity; ++i)
        s.scores[i] = require_finite_number(j["scores"][i], line_no, "score");
    return s;
}

}  // namespace detail

inline std::vector<FrameScores> parse_scores(std::istream& in) {
    std::vector<FrameScores> out;
    std::set<std::string> closed;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (detail::is_blank(line)) continue;
        FrameScores s = detail::parse_scores_record(line, line_no);

        if (!out.empty() && out.back().video_id == s.video_id) {
            if (s.frame == out.back().frame)
                throw ParseError(line_no, "duplicate frame index " + std::to_string(s.frame) +
                                              " in video '" + s.video_id + "'");
            if (s.frame < out.back().frame)
                throw ParseError(line_no, "non-monotone frame index " + std::to_string(s.frame) +
                                              " in video '" + s.video_id + "'");
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

struct LabeledEvent {
    std::string video_id;
    int activity = 0;     // 1..15
    double start = 0.0;   // seconds
    double end = 0.0;     // seconds, exclusive
};

// Labels one segment from its video's score sequence (sorted by frame).
// Score frame timestamps are frame/fps. Returns nullopt when no score frame
// falls inside the segment.
inline std::optional<LabeledEvent> label_segment(const Segment& seg,
                                                 std::span<const FrameScores> video_scores,
                                                 double fps) {
    if (!(fps > 0)) throw ConfigError("fps must be positive");
    std::array<double, kScoreArity> sums{};
    std::size_t covered = 0;
    auto it = std::partition_point(
        video_scores.begin(), video_scores.end(),
        [&](const FrameScores& s) { return static_cast<double>(s.frame) / fps < seg.start; });
    for (; it != video_scores.end(); ++it) {
        if (static_cast<double>(it->frame) / fps >= seg.end) break;
        for (std::size_t c = 0; c < kScoreArity; ++c) sums[c] += it->scores[c];
        ++covered;
    }
    if (covered == 0) return std::nullopt;

    int best = 1;
    for (int c = 2; c <= kActivityClassCount; ++c)
        if (sums[static_cast<std::size_t>(c)] > sums[static_cast<std::size_t>(best)]) best = c;
    return LabeledEvent{seg.video_id, best, seg.start, seg.end};
}

}  // namespace talseg
