#pragma once

// Synthetic trace, score, and ground-truth generation from an event script.
//
// A script describes one or more videos, each with non-overlapping events
// that drive exactly one angle (head, left hand, or right hand) above its
// threshold. Outside events the pose is neutral (all angles 0). Scores are
// one-hot on the event's activity inside events and on class 0 outside,
// optionally blended with uniform noise. Coordinate noise is seeded Gaussian,
// sampled with a fixed Box-Muller scheme so outputs are byte-stable across
// standard libraries.
//
// Script file: {"videos": [script...]} or a single script object with fields
// {video_id, fps, duration, events: [{activity_id, start, end, driver,
// magnitude}], noise_sigma?, score_noise?, seed?}.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <istream>
#include <map>
#include <ostream>
#include <random>
#include <set>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "talseg/classifier.hpp"
#include "talseg/errors.hpp"
#include "talseg/postprocess.hpp"
#include "talseg/segmenter.hpp"
#include "talseg/trace.hpp"

namespace talseg {

enum class AngleDriver { kHead, kLeftHand, kRightHand };

inline const char* driver_name(AngleDriver d) {
    switch (d) {
        case AngleDriver::kHead: return "head";
        case AngleDriver::kLeftHand: return "left_hand";
        case AngleDriver::kRightHand: return "right_hand";
    }
    return "?";
}

inline AngleDriver parse_driver(const std::string& s, std::size_t line_no = 0) {
    if (s == "head") return AngleDriver::kHead;
    if (s == "left_hand") return AngleDriver::kLeftHand;
    if (s == "right_hand") return AngleDriver::kRightHand;
    const std::string msg = "driver must be head|left_hand|right_hand, got '" + s + "'";
    if (line_no) throw ParseError(line_no, msg);
    throw ConfigError(msg);
}

struct ScriptEvent {
    int activity = 0;          // 1..15
    double start = 0.0;        // seconds
    double end = 0.0;          // seconds, exclusive
    AngleDriver driver = AngleDriver::kHead;
    double magnitude = 0.0;    // degrees, must exceed the driver's threshold
};

struct EventScript {
    std::string video_id;
    double fps = 30.0;
    double duration = 0.0;     // seconds
    std::vector<ScriptEvent> events;
    double noise_sigma = 0.0;  // normalized units
    double score_noise = 0.0;  // uniform blend weight in [0,1]
    std::uint64_t seed = 0;
};

// Canonical synthetic pose layout, normalized unit square, square raster.
namespace synth_pose {
inline constexpr int kFrameSize = 512;
inline constexpr double kEyeY = 0.35;
inline constexpr double kEyeHalfSpan = 0.05;
inline constexpr double kNoseRadius = 0.08;
inline constexpr double kShoulderY = 0.55;
inline constexpr double kShoulderHalfSpan = 0.10;
inline constexpr double kElbowY = 0.70;
inline constexpr double kElbowHalfSpan = 0.15;
inline constexpr double kForearmLength = 0.15;
}  // namespace synth_pose

// Joints whose angles invert to the requested values: head angle in [0,180],
// hand elevations in [-90,90]. All confidences are 1.
inline KeypointMap inverse_pose(double head_deg, double left_deg, double right_deg) {
    if (!(head_deg >= 0.0 && head_deg <= 180.0))
        throw ConfigError("head angle must be in [0,180], got " + std::to_string(head_deg));
    for (double e : {left_deg, right_deg})
        if (!(e >= -90.0 && e <= 90.0))
            throw ConfigError("hand elevation must be in [-90,90], got " + std::to_string(e));

    using namespace synth_pose;
    const double h = head_deg / kDegPerRad;
    const double l = left_deg / kDegPerRad;
    const double r = right_deg / kDegPerRad;

    KeypointMap kps;
    kps["left_eye"] = {0.5 - kEyeHalfSpan, kEyeY, 1.0};
    kps["right_eye"] = {0.5 + kEyeHalfSpan, kEyeY, 1.0};
    kps["nose"] = {0.5 + kNoseRadius * std::sin(h), kEyeY + kNoseRadius * std::cos(h), 1.0};
    kps["left_shoulder"] = {0.5 - kShoulderHalfSpan, kShoulderY, 1.0};
    kps["right_shoulder"] = {0.5 + kShoulderHalfSpan, kShoulderY, 1.0};
    kps["left_elbow"] = {0.5 - kElbowHalfSpan, kElbowY, 1.0};
    kps["right_elbow"] = {0.5 + kElbowHalfSpan, kElbowY, 1.0};
    kps["left_wrist"] = {0.5 - kElbowHalfSpan - kForearmLength * std::cos(l),
                         kElbowY - kForearmLength * std::sin(l), 1.0};
    kps["right_wrist"] = {0.5 + kElbowHalfSpan + kForearmLength * std::cos(r),
                          kElbowY - kForearmLength * std::sin(r), 1.0};
    return kps;
}

// Deterministic Gaussian sampler: Box-Muller over mt19937_64 uniforms.
class GaussianSampler {
  public:
    explicit GaussianSampler(std::uint64_t seed) : rng_(seed) {}

    double operator()(double sigma) {
        if (has_spare_) {
            has_spare_ = false;
            return spare_ * sigma;
        }
        const double u1 = (static_cast<double>(rng_() >> 11) + 1.0) * 0x1.0p-53;  // (0,1]
        const double u2 = static_cast<double>(rng_() >> 11) * 0x1.0p-53;          // [0,1)
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * 3.141592653589793 * u2;
        spare_ = radius * std::sin(angle);
        has_spare_ = true;
        return radius * std::cos(angle) * sigma;
    }

  private:
    std::mt19937_64 rng_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

inline void validate(const EventScript& s, const SegmenterConfig& thresholds) {
    if (s.video_id.empty()) throw ConfigError("script video_id must be non-empty");
    if (!(s.fps > 0)) throw ConfigError("script fps must be positive");
    if (!(s.duration >= 0)) throw ConfigError("script duration must be non-negative");
    if (!(s.noise_sigma >= 0)) throw ConfigError("noise_sigma must be non-negative");
    if (!(s.score_noise >= 0 && s.score_noise <= 1))
        throw ConfigError("score_noise must be in [0,1]");

    std::vector<ScriptEvent> sorted = s.events;
    std::sort(sorted.begin(), sorted.end(),
              [](const ScriptEvent& a, const ScriptEvent& b) { return a.start < b.start; });
    const ScriptEvent* prev = nullptr;
    for (const ScriptEvent& e : sorted) {
        if (!is_anomaly_class(e.activity))
            throw ConfigError("event activity_id must be in 1..15, got " +
                              std::to_string(e.activity));
        if (!(e.start >= 0 && e.start < e.end && e.end <= s.duration))
            throw ConfigError("event [" + std::to_string(e.start) + ", " +
                              std::to_string(e.end) + ") must lie within [0, " +
                              std::to_string(s.duration) + ") of video '" + s.video_id + "'");
        if (prev && e.start < prev->end)
            throw ConfigError("events overlap in video '" + s.video_id + "' at " +
                              std::to_string(e.start));
        const double threshold =
            e.driver == AngleDriver::kHead ? thresholds.theta_head : thresholds.theta_hand;
        const double limit = e.driver == AngleDriver::kHead ? 180.0 : 90.0;
        if (!(e.magnitude > threshold))
            throw ConfigError("event magnitude " + std::to_string(e.magnitude) + " for driver " +
                              driver_name(e.driver) + " does not exceed its threshold " +
                              std::to_string(threshold));
        if (!(e.magnitude <= limit))
            throw ConfigError("event magnitude " + std::to_string(e.magnitude) +
                              " exceeds the " + driver_name(e.driver) + " range limit " +
                              std::to_string(limit));
        prev = &e;
    }
}

namespace detail {

inline EventScript parse_script_object(const nlohmann::json& j) {
    if (!j.is_object()) throw ConfigError("script entry must be an object");
    static const std::set<std::string> kAllowed = {"video_id", "fps",        "duration",
                                                   "events",   "noise_sigma", "score_noise",
                                                   "seed"};
    for (const auto& item : j.items()) {
        if (kAllowed.find(item.key()) == kAllowed.end())
            throw ConfigError("unknown script field '" + item.key() + "'");
    }
    for (const char* req : {"video_id", "fps", "duration", "events"}) {
        if (!j.contains(req))
            throw ConfigError(std::string("script missing field '") + req + "'");
    }
    EventScript s;
    s.video_id = j.at("video_id").get<std::string>();
    s.fps = j.at("fps").get<double>();
    s.duration = j.at("duration").get<double>();
    if (j.contains("noise_sigma")) s.noise_sigma = j.at("noise_sigma").get<double>();
    if (j.contains("score_noise")) s.score_noise = j.at("score_noise").get<double>();
    if (j.contains("seed")) s.seed = j.at("seed").get<std::uint64_t>();
    if (!j.at("events").is_array()) throw ConfigError("script 'events' must be an array");
    for (const auto& ej : j.at("events")) {
        static const std::set<std::string> kEventKeys = {"activity_id", "start", "end", "driver",
                                                         "magnitude"};
        for (const auto& item : ej.items()) {
            if (kEventKeys.find(item.key()) == kEventKeys.end())
                throw ConfigError("unknown event field '" + item.key() + "'");
        }
        ScriptEvent e;
        e.activity = ej.at("activity_id").get<int>();
        e.start = ej.at("start").get<double>();
        e.end = ej.at("end").get<double>();
        e.driver = parse_driver(ej.at("driver").get<std::string>());
        e.magnitude = ej.at("magnitude").get<double>();
        s.events.push_back(e);
    }
    std::sort(s.events.begin(), s.events.end(),
              [](const ScriptEvent& a, const ScriptEvent& b) { return a.start < b.start; });
    return s;
}

}  // namespace detail

inline std::vector<EventScript> parse_scripts(std::istream& in) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("invalid script file: ") + e.what());
    }
    std::vector<EventScript> out;
    if (j.is_object() && j.contains("videos")) {
        for (const auto& item : j.items()) {
            if (item.key() != "videos")
                throw ConfigError("unknown script field '" + item.key() + "'");
        }
        if (!j["videos"].is_array()) throw ConfigError("'videos' must be an array");
        for (const auto& vj : j["videos"]) out.push_back(detail::parse_script_object(vj));
    } else {
        out.push_back(detail::parse_script_object(j));
    }
    std::set<std::string> seen;
    for (const EventScript& s : out)
        if (!seen.insert(s.video_id).second)
            throw ConfigError("duplicate video_id '" + s.video_id + "' in script");
    return out;
}

namespace detail {

inline void generate_video(const EventScript& script, std::ostream& trace_out,
                           std::ostream& scores_out) {
    using namespace synth_pose;
    GaussianSampler coord_noise(script.seed);
    std::mt19937_64 score_rng(script.seed ^ 0x9E3779B97F4A7C15ull);
    const auto uniform01 = [&score_rng] {
        return static_cast<double>(score_rng() >> 11) * 0x1.0p-53;
    };

    const std::int64_t frame_count =
        static_cast<std::int64_t>(std::llround(script.duration * script.fps));
    std::size_t next_event = 0;
    for (std::int64_t frame = 0; frame < frame_count; ++frame) {
        const double t = static_cast<double>(frame) / script.fps;
        while (next_event < script.events.size() && t >= script.events[next_event].end)
            ++next_event;
        const ScriptEvent* active = nullptr;
        if (next_event < script.events.size() && t >= script.events[next_event].start)
            active = &script.events[next_event];

        double head = 0.0, left = 0.0, right = 0.0;
        if (active) {
            switch (active->driver) {
                case AngleDriver::kHead: head = active->magnitude; break;
                case AngleDriver::kLeftHand: left = active->magnitude; break;
                case AngleDriver::kRightHand: right = active->magnitude; break;
            }
        }

        KeypointFrame f;
        f.video_id = script.video_id;
        f.frame = frame;
        f.t = t;
        f.width = kFrameSize;
        f.height = kFrameSize;
        f.keypoints = inverse_pose(head, left, right);
        for (auto& [name, kp] : f.keypoints) {
            if (script.noise_sigma > 0) {
                kp.x += coord_noise(script.noise_sigma);
                kp.y += coord_noise(script.noise_sigma);
                kp.x = std::clamp(kp.x, 0.0, 1.0);
                kp.y = std::clamp(kp.y, 0.0, 1.0);
            }
            kp.x *= kFrameSize;
            kp.y *= kFrameSize;
        }
        write_trace_record(f, trace_out);

        nlohmann::ordered_json sj;
        sj["video_id"] = script.video_id;
        sj["frame"] = frame;
        std::array<double, kScoreArity> scores{};
        const int hot = active ? active->activity : 0;
        scores[static_cast<std::size_t>(hot)] = 1.0;
        if (script.score_noise > 0) {
            for (double& s : scores)
                s = (1.0 - script.score_noise) * s + script.score_noise * uniform01();
        }
        sj["scores"] = scores;
        scores_out << sj.dump() << '\n';
    }
}

}  // namespace detail

// Emits the trace, score, and ground-truth files for every script in order.
// Ground truth uses the submission format with numeric ids assigned over all
// script video ids.
inline void generate(std::span<const EventScript> scripts, const SegmenterConfig& thresholds,
                     std::ostream& trace_out, std::ostream& scores_out, std::ostream& gt_out) {
    for (const EventScript& s : scripts) validate(s, thresholds);

    for (const EventScript& s : scripts) detail::generate_video(s, trace_out, scores_out);

    std::vector<LabeledEvent> events;
    std::set<std::string> video_ids;
    for (const EventScript& s : scripts) {
        video_ids.insert(s.video_id);
        for (const ScriptEvent& e : s.events)
            events.push_back(LabeledEvent{s.video_id, e.activity, e.start, e.end});
    }
    if (!events.empty()) {
        const auto id_map = build_id_map(video_ids);
        const std::vector<SubmissionRow> rows = to_submission(events, id_map);
        write_submission(rows, gt_out);
    }
}

}  // namespace talseg
