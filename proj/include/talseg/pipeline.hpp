#pragma once

// Per-video pipeline stages and the bounded worker pool that runs them.
//
// Videos are independent work units: a producer streams contiguous per-video
// groups off the trace file while up to `jobs` workers process them. At most
// a bounded number of traces is resident at once. Results are merged in
// video-id order, so output is deterministic regardless of completion order.
//
// Score files are consumed through a byte-offset index: one validating pass
// records each video's contiguous line range, then workers seek and parse
// just their video's group.

#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "talseg/classifier.hpp"
#include "talseg/config.hpp"
#include "talseg/errors.hpp"
#include "talseg/kinematics.hpp"
#include "talseg/segmenter.hpp"
#include "talseg/trace.hpp"

namespace talseg {

inline KinematicsConfig kinematics_config(const PipelineConfig& cfg) {
    return KinematicsConfig{cfg.conf_threshold, true};
}

inline SegmenterConfig segmenter_config(const PipelineConfig& cfg) {
    return SegmenterConfig{cfg.theta_head, cfg.theta_hand, cfg.gap_tolerance, true};
}

// normalize -> angles -> per-frame labels -> segments for one video.
inline std::vector<Segment> segment_video(VideoTrace trace, const PipelineConfig& cfg,
                                          NormalizeStats* stats = nullptr) {
    trace = normalize_coordinates(std::move(trace), stats);
    const std::vector<AngleSample> angles = angle_series(trace, kinematics_config(cfg));
    const std::vector<FrameLabel> labels = classify_series(angles, segmenter_config(cfg));
    return extract_segments(trace.video_id, labels, cfg.fps, segmenter_config(cfg));
}

struct ScoresGroup {
    std::streamoff begin = 0;
    std::streamoff end = 0;
    std::size_t first_line = 0;
};

struct ScoresIndex {
    std::map<std::string, ScoresGroup> groups;
};

// Validates every record and records each video's byte range. Groups must be
// contiguous; frames strictly increasing within a video.
inline ScoresIndex index_scores_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open scores file '" + path + "'");

    ScoresIndex idx;
    ScoresGroup* current = nullptr;
    std::string current_id;
    std::int64_t last_frame = -1;

    std::string line;
    std::size_t line_no = 0;
    std::streamoff pos = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::streamoff next_pos = in.tellg();
        if (next_pos < 0) next_pos = pos + static_cast<std::streamoff>(line.size());
        if (detail::is_blank(line)) {
            if (current) current->end = next_pos;
            pos = next_pos;
            continue;
        }
        const FrameScores rec = detail::parse_scores_record(line, line_no);
        if (current && rec.video_id == current_id) {
            if (rec.frame == last_frame)
                throw ParseError(line_no, "duplicate frame index " + std::to_string(rec.frame) +
                                              " in video '" + rec.video_id + "'");
            if (rec.frame < last_frame)
                throw ParseError(line_no, "non-monotone frame index " +
                                              std::to_string(rec.frame) + " in video '" +
                                              rec.video_id + "'");
            current->end = next_pos;
        } else {
            if (idx.groups.count(rec.video_id))
                throw ParseError(line_no,
                                 "records for video '" + rec.video_id + "' are not contiguous");
            current = &idx.groups[rec.video_id];
            current->begin = pos;
            current->end = next_pos;
            current->first_line = line_no;
            current_id = rec.video_id;
        }
        last_frame = rec.frame;
        pos = next_pos;
    }
    return idx;
}

inline std::vector<FrameScores> read_scores_group(const std::string& path,
                                                  const ScoresGroup& group) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open scores file '" + path + "'");
    in.seekg(group.begin);
    std::vector<FrameScores> out;
    std::string line;
    std::size_t line_no = group.first_line - 1;
    while (in.tellg() < group.end && std::getline(in, line)) {
        ++line_no;
        if (detail::is_blank(line)) continue;
        out.push_back(detail::parse_scores_record(line, line_no));
    }
    return out;
}

// Streams per-video traces to `work` on up to `jobs` threads; returns
// (video_id, result) pairs sorted by video id.
template <typename Result, typename WorkFn>
std::vector<std::pair<std::string, Result>> process_trace_stream(std::istream& in, double fps,
                                                                 int jobs, WorkFn work) {
    std::vector<std::pair<std::string, Result>> results;

    if (jobs <= 1) {
        TraceReader reader(in, fps);
        while (auto trace = reader.next()) {
            std::string id = trace->video_id;
            results.emplace_back(std::move(id), work(std::move(*trace)));
        }
    } else {
        std::mutex mu;
        std::condition_variable cv_space, cv_item;
        std::deque<VideoTrace> queue;
        bool done = false;
        std::exception_ptr error;
        const std::size_t capacity = static_cast<std::size_t>(jobs);

        auto worker = [&] {
            for (;;) {
                VideoTrace trace;
                {
                    std::unique_lock<std::mutex> lock(mu);
                    cv_item.wait(lock, [&] { return !queue.empty() || done || error; });
                    if (error || (queue.empty() && done)) return;
                    trace = std::move(queue.front());
                    queue.pop_front();
                }
                cv_space.notify_one();
                try {
                    std::string id = trace.video_id;
                    Result r = work(std::move(trace));
                    std::lock_guard<std::mutex> lock(mu);
                    results.emplace_back(std::move(id), std::move(r));
                } catch (...) {
                    std::lock_guard<std::mutex> lock(mu);
                    if (!error) error = std::current_exception();
                    cv_item.notify_all();
                    cv_space.notify_all();
                    return;
                }
            }
        };

        std::vector<std::thread> workers;
        workers.reserve(static_cast<std::size_t>(jobs));
        for (int i = 0; i < jobs; ++i) workers.emplace_back(worker);

        try {
            TraceReader reader(in, fps);
            while (auto trace = reader.next()) {
                std::unique_lock<std::mutex> lock(mu);
                cv_space.wait(lock, [&] { return queue.size() < capacity || error; });
                if (error) break;
                queue.push_back(std::move(*trace));
                cv_item.notify_one();
            }
        } catch (...) {
            std::lock_guard<std::mutex> lock(mu);
            if (!error) error = std::current_exception();
        }
        {
            std::lock_guard<std::mutex> lock(mu);
            done = true;
        }
        cv_item.notify_all();
        for (std::thread& t : workers) t.join();
        if (error) std::rethrow_exception(error);
    }

    std::sort(results.begin(), results.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    return results;
}

// Parallel map over an in-memory list of per-video work items, results in
// input order.
template <typename Item, typename Result, typename WorkFn>
std::vector<Result> parallel_map(std::vector<Item>& items, int jobs, WorkFn work) {
    std::vector<Result> results(items.size());
    if (jobs <= 1 || items.size() <= 1) {
        for (std::size_t i = 0; i < items.size(); ++i) results[i] = work(items[i]);
        return results;
    }
    std::atomic<std::size_t> next{0};
    std::mutex err_mu;
    std::exception_ptr error;
    auto runner = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= items.size()) return;
            try {
                results[i] = work(items[i]);
            } catch (...) {
                std::lock_guard<std::mutex> lock(err_mu);
                if (!error) error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> threads;
    const int n = std::min<int>(jobs, static_cast<int>(items.size()));
    threads.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) threads.emplace_back(runner);
    for (std::thread& t : threads) t.join();
    if (error) std::rethrow_exception(error);
    return results;
}

}  // namespace talseg
