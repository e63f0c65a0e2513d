#pragma once

// False-positive filtering and submission formatting.
//
// Events shorter than min_duration (default 1 s, strictly shorter) are
// dropped. Surviving events become submission rows: numeric video ids
// assigned 1..N by ascending lexicographic video_id, start/end rounded
// half-up to integer seconds, rows sorted by (video, start, activity).
// Submission files are plain text, one row per line:
//   <video_id_numeric> <activity_id> <start> <end>
// Ground-truth files use the identical format.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "talseg/classifier.hpp"
#include "talseg/errors.hpp"
#include "talseg/log.hpp"

namespace talseg {

inline double round_half_up(double x) { return std::floor(x + 0.5); }

inline std::vector<LabeledEvent> filter_short(std::vector<LabeledEvent> events,
                                              double min_duration = 1.0) {
    std::erase_if(events, [min_duration](const LabeledEvent& e) {
        return e.end - e.start < min_duration;
    });
    return events;
}

inline std::map<std::string, std::int64_t> build_id_map(const std::set<std::string>& video_ids) {
    if (video_ids.empty()) throw Error("cannot build id map from an empty video set");
    std::map<std::string, std::int64_t> out;
    std::int64_t next = 1;
    for (const std::string& id : video_ids) out[id] = next++;
    return out;
}

struct SubmissionRow {
    std::int64_t video_id_numeric = 0;
    int activity_id = 0;
    std::int64_t start = 0;
    std::int64_t end = 0;
};

struct SubmissionStats {
    std::size_t dropped_degenerate = 0;  // rows with end <= start after rounding
};

inline std::vector<SubmissionRow> to_submission(std::span<const LabeledEvent> events,
                                                const std::map<std::string, std::int64_t>& id_map,
                                                SubmissionStats* stats = nullptr) {
    std::vector<SubmissionRow> rows;
    rows.reserve(events.size());
    for (const LabeledEvent& e : events) {
        auto it = id_map.find(e.video_id);
        if (it == id_map.end())
            throw Error("video '" + e.video_id + "' missing from id map");
        SubmissionRow r;
        r.video_id_numeric = it->second;
        r.activity_id = e.activity;
        r.start = static_cast<std::int64_t>(round_half_up(e.start));
        r.end = static_cast<std::int64_t>(round_half_up(e.end));
        if (r.end <= r.start) {
            if (stats) ++stats->dropped_degenerate;
            log::warn("dropping event in video '" + e.video_id +
                      "' degenerate after rounding: [" + std::to_string(e.start) + ", " +
                      std::to_string(e.end) + ")");
            continue;
        }
        rows.push_back(r);
    }
    std::sort(rows.begin(), rows.end(), [](const SubmissionRow& a, const SubmissionRow& b) {
        if (a.video_id_numeric != b.video_id_numeric) return a.video_id_numeric < b.video_id_numeric;
        if (a.start != b.start) return a.start < b.start;
        if (a.activity_id != b.activity_id) return a.activity_id < b.activity_id;
        return a.end < b.end;
    });
    return rows;
}

inline void write_submission(std::span<const SubmissionRow> rows, std::ostream& os) {
    for (const SubmissionRow& r : rows)
        os << r.video_id_numeric << ' ' << r.activity_id << ' ' << r.start << ' ' << r.end
           << '\n';
}

inline std::vector<SubmissionRow> parse_submission(std::istream& in) {
    std::vector<SubmissionRow> rows;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (detail::is_blank(line)) continue;
        std::istringstream ss(line);
        SubmissionRow r;
        std::string extra;
        if (!(ss >> r.video_id_numeric >> r.activity_id >> r.start >> r.end) || (ss >> extra))
            throw ParseError(line_no,
                             "expected '<video_id> <activity_id> <start> <end>', got '" + line +
                                 "'");
        if (r.video_id_numeric < 1) throw ParseError(line_no, "video id must be >= 1");
        if (!is_anomaly_class(r.activity_id))
            throw ParseError(line_no, "activity id must be in 1..15");
        if (r.start < 0) throw ParseError(line_no, "start must be non-negative");
        if (r.end < r.start + 1) throw ParseError(line_no, "end must be at least start + 1");
        rows.push_back(r);
    }
    return rows;
}

// Submission rows as scoreable events; the numeric id doubles as video_id.
inline std::vector<LabeledEvent> submission_to_events(std::span<const SubmissionRow> rows) {
    std::vector<LabeledEvent> out;
    out.reserve(rows.size());
    for (const SubmissionRow& r : rows)
        out.push_back(LabeledEvent{std::to_string(r.video_id_numeric), r.activity_id,
                                   static_cast<double>(r.start), static_cast<double>(r.end)});
    return out;
}

}  // namespace talseg
