#pragma once

// Activity-overlap scoring of predicted events against ground truth.
//
// overlap_score is the intersection-over-union of two time intervals. A
// prediction and a ground-truth event may match only if they share the video
// and activity class and both endpoint deltas are within the matching window
// (10 s, inclusive). Matching is one-to-one: greedy takes candidates in
// descending overlap order; optimal maximizes total overlap exactly and is
// capped at 12x12 events.
//
// Aggregate = (sum of matched overlaps) / (|GT| + unmatched predictions);
// empty-vs-empty scores 1.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "talseg/classifier.hpp"
#include "talseg/errors.hpp"

namespace talseg {

inline constexpr double kMatchWindowSeconds = 10.0;
inline constexpr std::size_t kOptimalSizeCap = 12;

enum class MatchMode { kGreedy, kOptimal };

inline const char* match_mode_name(MatchMode m) {
    return m == MatchMode::kGreedy ? "greedy" : "optimal";
}

inline MatchMode parse_match_mode(const std::string& s) {
    if (s == "greedy") return MatchMode::kGreedy;
    if (s == "optimal") return MatchMode::kOptimal;
    throw ConfigError("matching mode must be 'greedy' or 'optimal', got '" + s + "'");
}

inline double overlap_score(double ps, double pe, double gs, double ge) {
    if (!(ps < pe) || !(gs < ge)) throw Error("degenerate interval: start must precede end");
    double intersection = std::min(ge, pe) - std::max(gs, ps);
    if (intersection < 0) intersection = 0;
    const double union_span = std::max(ge, pe) - std::min(gs, ps);
    return intersection / union_span;
}

struct MatchCandidate {
    std::size_t pred = 0;
    std::size_t gt = 0;
    double os = 0.0;
};

// All gate-passing (prediction, ground truth) pairs, ordered by descending
// overlap, then ascending gt start, prediction start, gt index, pred index.
inline std::vector<MatchCandidate> enumerate_candidates(std::span<const LabeledEvent> preds,
                                                        std::span<const LabeledEvent> gts,
                                                        double window = kMatchWindowSeconds) {
    std::vector<MatchCandidate> out;
    for (std::size_t i = 0; i < preds.size(); ++i) {
        const LabeledEvent& p = preds[i];
        for (std::size_t j = 0; j < gts.size(); ++j) {
            const LabeledEvent& g = gts[j];
            if (p.video_id != g.video_id || p.activity != g.activity) continue;
            if (std::abs(p.start - g.start) > window || std::abs(p.end - g.end) > window)
                continue;
            out.push_back(MatchCandidate{i, j, overlap_score(p.start, p.end, g.start, g.end)});
        }
    }
    std::sort(out.begin(), out.end(), [&](const MatchCandidate& a, const MatchCandidate& b) {
        if (a.os != b.os) return a.os > b.os;
        if (gts[a.gt].start != gts[b.gt].start) return gts[a.gt].start < gts[b.gt].start;
        if (preds[a.pred].start != preds[b.pred].start)
            return preds[a.pred].start < preds[b.pred].start;
        if (a.gt != b.gt) return a.gt < b.gt;
        return a.pred < b.pred;
    });
    return out;
}

struct MatchedPair {
    std::size_t pred = 0;
    std::size_t gt = 0;
    double os = 0.0;
};

struct Matching {
    std::vector<MatchedPair> pairs;
    double total_os = 0.0;
};

namespace detail {

inline Matching match_greedy(std::span<const MatchCandidate> candidates, std::size_t n_preds,
                             std::size_t n_gts) {
    Matching m;
    std::vector<char> pred_used(n_preds, 0), gt_used(n_gts, 0);
    for (const MatchCandidate& c : candidates) {
        if (pred_used[c.pred] || gt_used[c.gt]) continue;
        pred_used[c.pred] = 1;
        gt_used[c.gt] = 1;
        m.pairs.push_back(MatchedPair{c.pred, c.gt, c.os});
        m.total_os += c.os;
    }
    return m;
}

// Exact maximum-total-overlap assignment over a gt bitmask. Reconstruction
// prefers taking the lowest gt index that attains the optimum, so instances
// whose candidates never conflict reproduce the greedy pairing exactly.
inline Matching match_optimal(std::span<const MatchCandidate> candidates, std::size_t n_preds,
                              std::size_t n_gts) {
    if (n_preds > kOptimalSizeCap || n_gts > kOptimalSizeCap)
        throw Error("optimal matching capped at " + std::to_string(kOptimalSizeCap) + "x" +
                    std::to_string(kOptimalSizeCap) + " events, got " + std::to_string(n_preds) +
                    " predictions x " + std::to_string(n_gts) + " ground truths");

    std::vector<std::vector<std::pair<std::size_t, double>>> options(n_preds);
    for (const MatchCandidate& c : candidates) options[c.pred].emplace_back(c.gt, c.os);
    for (auto& opts : options) std::sort(opts.begin(), opts.end());

    const std::size_t n_masks = std::size_t{1} << n_gts;
    // best[i][mask]: max total os over preds i.. with gts in mask taken
    std::vector<std::vector<double>> best(n_preds + 1, std::vector<double>(n_masks, 0.0));
    for (std::size_t i = n_preds; i-- > 0;) {
        for (std::size_t mask = 0; mask < n_masks; ++mask) {
            double v = best[i + 1][mask];
            for (const auto& [gt, os] : options[i]) {
                if (mask & (std::size_t{1} << gt)) continue;
                v = std::max(v, os + best[i + 1][mask | (std::size_t{1} << gt)]);
            }
            best[i][mask] = v;
        }
    }

    Matching m;
    std::size_t mask = 0;
    for (std::size_t i = 0; i < n_preds; ++i) {
        bool taken = false;
        for (const auto& [gt, os] : options[i]) {
            if (mask & (std::size_t{1} << gt)) continue;
            if (os + best[i + 1][mask | (std::size_t{1} << gt)] == best[i][mask]) {
                m.pairs.push_back(MatchedPair{i, gt, os});
                m.total_os += os;
                mask |= std::size_t{1} << gt;
                taken = true;
                break;
            }
        }
        (void)taken;
    }
    return m;
}

}  // namespace detail

inline Matching match(std::span<const MatchCandidate> candidates, std::size_t n_preds,
                      std::size_t n_gts, MatchMode mode) {
    return mode == MatchMode::kGreedy ? detail::match_greedy(candidates, n_preds, n_gts)
                                      : detail::match_optimal(candidates, n_preds, n_gts);
}

struct ClassBreakdown {
    int activity = 0;
    std::size_t gt_count = 0;
    std::size_t pred_count = 0;
    std::size_t matched = 0;
    double sum_os = 0.0;
    double aggregate = 0.0;
};

struct ScoreReport {
    MatchMode mode = MatchMode::kGreedy;
    std::vector<MatchedPair> matched;
    std::size_t unmatched_gt = 0;
    std::size_t unmatched_pred = 0;
    double total_os = 0.0;
    double aggregate = 0.0;
    std::vector<ClassBreakdown> per_class;
    std::optional<bool> modes_diverge;  // set in optimal mode
};

inline ScoreReport score(std::span<const LabeledEvent> preds, std::span<const LabeledEvent> gts,
                         MatchMode mode = MatchMode::kGreedy,
                         double window = kMatchWindowSeconds) {
    const std::vector<MatchCandidate> candidates = enumerate_candidates(preds, gts, window);
    const Matching matching = match(candidates, preds.size(), gts.size(), mode);

    ScoreReport r;
    r.mode = mode;
    r.matched = matching.pairs;
    r.total_os = matching.total_os;
    r.unmatched_gt = gts.size() - matching.pairs.size();
    r.unmatched_pred = preds.size() - matching.pairs.size();
    if (gts.empty() && preds.empty()) {
        r.aggregate = 1.0;
    } else {
        r.aggregate =
            matching.total_os / (static_cast<double>(gts.size()) +
                                 static_cast<double>(r.unmatched_pred));
    }

    std::map<int, ClassBreakdown> by_class;
    for (const LabeledEvent& g : gts) {
        auto& b = by_class[g.activity];
        b.activity = g.activity;
        ++b.gt_count;
    }
    for (const LabeledEvent& p : preds) {
        auto& b = by_class[p.activity];
        b.activity = p.activity;
        ++b.pred_count;
    }
    for (const MatchedPair& pair : matching.pairs) {
        auto& b = by_class[gts[pair.gt].activity];
        ++b.matched;
        b.sum_os += pair.os;
    }
    for (auto& [id, b] : by_class) {
        const std::size_t unmatched_pred_c = b.pred_count - b.matched;
        b.aggregate = b.sum_os / (static_cast<double>(b.gt_count) +
                                  static_cast<double>(unmatched_pred_c));
        r.per_class.push_back(b);
    }

    if (mode == MatchMode::kOptimal) {
        const Matching greedy = detail::match_greedy(candidates, preds.size(), gts.size());
        r.modes_diverge = matching.total_os - greedy.total_os > 1e-12;
    }
    return r;
}

inline nlohmann::ordered_json report_to_json(const ScoreReport& r) {
    nlohmann::ordered_json j;
    j["aggregate"] = r.aggregate;
    j["mode"] = match_mode_name(r.mode);
    j["matched_count"] = r.matched.size();
    j["unmatched_ground_truths"] = r.unmatched_gt;
    j["unmatched_predictions"] = r.unmatched_pred;
    j["total_os"] = r.total_os;
    nlohmann::ordered_json pairs = nlohmann::ordered_json::array();
    for (const MatchedPair& p : r.matched) {
        nlohmann::ordered_json pj;
        pj["prediction"] = p.pred;
        pj["ground_truth"] = p.gt;
        pj["os"] = p.os;
        pairs.push_back(std::move(pj));
    }
    j["matched"] = std::move(pairs);
    nlohmann::ordered_json classes = nlohmann::ordered_json::array();
    for (const ClassBreakdown& b : r.per_class) {
        nlohmann::ordered_json cj;
        cj["activity"] = b.activity;
        cj["label"] = std::string(activity_label(b.activity));
        cj["ground_truths"] = b.gt_count;
        cj["predictions"] = b.pred_count;
        cj["matched"] = b.matched;
        cj["sum_os"] = b.sum_os;
        cj["aggregate"] = b.aggregate;
        classes.push_back(std::move(cj));
    }
    j["per_class"] = std::move(classes);
    if (r.modes_diverge.has_value()) j["modes_diverge"] = *r.modes_diverge;
    return j;
}

}  // namespace talseg
