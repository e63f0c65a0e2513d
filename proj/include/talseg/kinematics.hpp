#pragma once

// Per-frame head and hand angles from normalized keypoints.
//
// Head angle: deviation of the eye-midpoint -> nose vector from the downward
// image vertical, degrees in [0,180]. Zero in a neutral frontal pose.
// Hand angle: forearm (elbow -> wrist) elevation above horizontal, degrees in
// [-90,90]. Image y grows downward.
//
// An angle is undefined whenever any joint it depends on falls below the
// confidence threshold; undefined is a value, not an error.

#include <cmath>
#include <cstdint>
#include <optional>
#include <ostream>
#include <vector>

#include <json.hpp>

#include "talseg/trace.hpp"

namespace talseg {

inline constexpr double kDegPerRad = 57.29577951308232;

struct KinematicsConfig {
    double conf_threshold = 0.5;  // in [0,1]
    bool aspect_correct = true;   // undo unit-square distortion on non-square frames
};

inline void validate(const KinematicsConfig& cfg) {
    if (!(cfg.conf_threshold >= 0.0 && cfg.conf_threshold <= 1.0))
        throw ConfigError("conf_threshold must be in [0,1]");
}

struct AngleSample {
    std::int64_t frame = 0;
    double t = 0.0;
    std::optional<double> head_angle;
    std::optional<double> left_hand_angle;
    std::optional<double> right_hand_angle;
};

// aspect_ratio = width/height of the source raster; pass 1.0 to skip correction.
inline std::optional<double> head_angle(const Keypoint& left_eye, const Keypoint& right_eye,
                                        const Keypoint& nose, double aspect_ratio,
                                        double conf_threshold) {
    if (left_eye.conf < conf_threshold || right_eye.conf < conf_threshold ||
        nose.conf < conf_threshold)
        return std::nullopt;
    const double vx = (nose.x - 0.5 * (left_eye.x + right_eye.x)) * aspect_ratio;
    const double vy = nose.y - 0.5 * (left_eye.y + right_eye.y);
    if (vx == 0.0 && vy == 0.0) return std::nullopt;
    return std::atan2(std::abs(vx), vy) * kDegPerRad;
}

inline std::optional<double> hand_angle(const Keypoint& elbow, const Keypoint& wrist,
                                        double aspect_ratio, double conf_threshold) {
    if (elbow.conf < conf_threshold || wrist.conf < conf_threshold) return std::nullopt;
    const double dx = (wrist.x - elbow.x) * aspect_ratio;
    const double dy = wrist.y - elbow.y;
    if (dx == 0.0 && dy == 0.0) return std::nullopt;
    return std::atan2(-dy, std::abs(dx)) * kDegPerRad;
}

inline AngleSample frame_angles(const KeypointFrame& f, const KinematicsConfig& cfg) {
    const double aspect =
        cfg.aspect_correct ? static_cast<double>(f.width) / static_cast<double>(f.height) : 1.0;
    AngleSample s;
    s.frame = f.frame;
    s.t = f.t;
    s.head_angle = head_angle(keypoint_or_missing(f, "left_eye"),
                              keypoint_or_missing(f, "right_eye"),
                              keypoint_or_missing(f, "nose"), aspect, cfg.conf_threshold);
    s.left_hand_angle =
        hand_angle(keypoint_or_missing(f, "left_elbow"), keypoint_or_missing(f, "left_wrist"),
                   aspect, cfg.conf_threshold);
    s.right_hand_angle =
        hand_angle(keypoint_or_missing(f, "right_elbow"), keypoint_or_missing(f, "right_wrist"),
                   aspect, cfg.conf_threshold);
    return s;
}

inline std::vector<AngleSample> angle_series(const VideoTrace& trace,
                                             const KinematicsConfig& cfg = {}) {
    validate(cfg);
    std::vector<AngleSample> out;
    out.reserve(trace.frames.size());
    for (const KeypointFrame& f : trace.frames) out.push_back(frame_angles(f, cfg));
    return out;
}

// Diagnostic dump: {video_id, frame, t, head_angle, left_hand_angle,
// right_hand_angle}, null for undefined.
inline void write_angle_record(const std::string& video_id, const AngleSample& s,
                               std::ostream& os) {
    nlohmann::ordered_json j;
    j["video_id"] = video_id;
    j["frame"] = s.frame;
    j["t"] = s.t;
    j["head_angle"] = s.head_angle ? nlohmann::json(*s.head_angle) : nlohmann::json(nullptr);
    j["left_hand_angle"] =
        s.left_hand_angle ? nlohmann::json(*s.left_hand_angle) : nlohmann::json(nullptr);
    j["right_hand_angle"] =
        s.right_hand_angle ? nlohmann::json(*s.right_hand_angle) : nlohmann::json(nullptr);
    os << j.dump() << '\n';
}

}  // namespace talseg
