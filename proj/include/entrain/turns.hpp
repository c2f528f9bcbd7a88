#pragma once

#include <algorithm>
#include <cstddef>
#include <vector>

#include "entrain/corpus.hpp"
#include "entrain/error.hpp"

namespace entrain::turns {

inline constexpr double kDefaultPauseThresholdS = 0.6;

struct TurnStats {
    double min_s = 0.0;
    double max_s = 0.0;
    double mean_s = 0.0;
    double total_s = 0.0;
    std::size_t count = 0;
};

struct PauseStats {
    double min_s = 0.0;
    double max_s = 0.0;
    double mean_s = 0.0;
    double total_s = 0.0;
    std::size_t count = 0;
};

/// Duration statistics over every turn of both speakers.
inline TurnStats turn_stats(const corpus::Transcript& t) {
    if (t.turns.empty())
        throw Error(ErrorCode::EmptyTranscript, "turn_stats on empty transcript");
    TurnStats s;
    s.count = t.turns.size();
    s.min_s = t.turns.front().duration();
    s.max_s = s.min_s;
    for (const auto& turn : t.turns) {
        const double d = turn.duration();
        s.min_s = std::min(s.min_s, d);
        s.max_s = std::max(s.max_s, d);
        s.total_s += d;
    }
    s.mean_s = s.total_s / static_cast<double>(s.count);
    return s;
}

/// Inter-turn silences: the gap from one speaker's offset to the other's
/// onset, kept only when it exceeds `threshold_s`. Negative gaps (overlap)
/// never count as pauses. With no qualifying gap, all statistics are zero
/// with count 0 so group tests stay total.
inline PauseStats pause_stats(const corpus::Transcript& t,
                              double threshold_s = kDefaultPauseThresholdS) {
    if (t.turns.empty())
        throw Error(ErrorCode::EmptyTranscript, "pause_stats on empty transcript");
    std::vector<double> pauses;
    for (std::size_t i = 0; i + 1 < t.turns.size(); ++i) {
        const double gap = t.turns[i + 1].start_s - t.turns[i].end_s;
        if (gap > threshold_s) pauses.push_back(gap);
    }
    PauseStats s;
    s.count = pauses.size();
    if (pauses.empty()) return s;
    s.min_s = pauses.front();
    s.max_s = pauses.front();
    for (double p : pauses) {
        s.min_s = std::min(s.min_s, p);
        s.max_s = std::max(s.max_s, p);
        s.total_s += p;
    }
    s.mean_s = s.total_s / static_cast<double>(s.count);
    return s;
}

} // namespace entrain::turns
