#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "entrain/corpus.hpp"
#include "entrain/error.hpp"
#include "entrain/features.hpp"
#include "entrain/prng.hpp"
#include "entrain/stats.hpp"

namespace entrain::metrics {

inline constexpr int kDefaultBaselineDraws = 10;
inline constexpr double kDefaultWindowS = 5.0;
inline constexpr std::size_t kMinJointFramesPerWindow = 10;

enum class AcousticFeature { f0, intensity };
enum class TurnStatKind { min, max, mean };

inline const char* feature_name(AcousticFeature f) {
    return f == AcousticFeature::f0 ? "f0" : "intensity";
}

inline const char* stat_name(TurnStatKind s) {
    switch (s) {
        case TurnStatKind::min: return "min";
        case TurnStatKind::max: return "max";
        case TurnStatKind::mean: return "mean";
    }
    return "?";
}

/// The selected per-turn statistic, if that turn has a summary.
inline std::optional<double> turn_value(const features::TurnFeatureSummary& s,
                                        AcousticFeature f, TurnStatKind k) {
    const auto& stat = (f == AcousticFeature::f0) ? s.f0 : s.intensity;
    if (!stat) return std::nullopt;
    switch (k) {
        case TurnStatKind::min: return stat->min;
        case TurnStatKind::max: return stat->max;
        case TurnStatKind::mean: return stat->mean;
    }
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// turn-level proximity
// ---------------------------------------------------------------------------

/// Adjacent-turn distances: |fc_i - fp_(i+1)| for every turn i whose own
/// and successor summaries are defined. Turns must alternate speakers
/// (guaranteed by transcript validation), so turn i+1 always belongs to
/// the partner. Kept turn indices are reported through `indices_out`.
inline std::vector<double> adjacent_distance(
    std::span<const features::TurnFeatureSummary> summaries, AcousticFeature f,
    TurnStatKind k, std::vector<int>* indices_out = nullptr) {
    std::vector<double> out;
    if (indices_out) indices_out->clear();
    for (std::size_t i = 0; i + 1 < summaries.size(); ++i) {
        const auto cur = turn_value(summaries[i], f, k);
        const auto next = turn_value(summaries[i + 1], f, k);
        if (!cur || !next) continue;
        out.push_back(std::fabs(*cur - *next));
        if (indices_out) indices_out->push_back(static_cast<int>(i));
    }
    return out;
}

/// Non-adjacent baseline for turn i: the mean of k absolute differences
/// between fc_i and partner-turn values drawn at random, excluding the
/// adjacent partner turn i+1. Draws are without replacement when the
/// partner pool is large enough (>= k+1 defined partner turns),
/// otherwise with replacement; fewer than 2 defined partner turns is an
/// error (the caller skips that turn). Deterministic given the stream.
inline double nonadjacent_baseline(
    std::span<const features::TurnFeatureSummary> summaries, AcousticFeature f,
    TurnStatKind k, std::size_t turn_index, rng::Xoshiro256& stream,
    int n_draws = kDefaultBaselineDraws, std::vector<double>* draws_out = nullptr) {
    const auto cur = turn_value(summaries[turn_index], f, k);
    if (!cur)
        throw Error(ErrorCode::InsufficientPartnerTurns,
                    "turn " + std::to_string(turn_index) + " has no summary");
    const auto& speaker = summaries[turn_index].speaker;

    std::vector<double> partner_all;   // every defined partner-turn value
    std::vector<double> pool;          // minus the adjacent turn i+1
    for (std::size_t j = 0; j < summaries.size(); ++j) {
        if (summaries[j].speaker == speaker) continue;
        const auto v = turn_value(summaries[j], f, k);
        if (!v) continue;
        partner_all.push_back(*v);
        if (j != turn_index + 1) pool.push_back(*v);
    }
    if (partner_all.size() < 2 || pool.empty())
        throw Error(ErrorCode::InsufficientPartnerTurns,
                    "turn " + std::to_string(turn_index) + ": partner pool too small");

    std::vector<double> draws;
    draws.reserve(static_cast<std::size_t>(n_draws));
    if (partner_all.size() >= static_cast<std::size_t>(n_draws) + 1) {
        // partial Fisher-Yates: first n_draws entries of a random permutation
        std::vector<double> shuffled = pool;
        for (int d = 0; d < n_draws; ++d) {
            const std::size_t j =
                d + static_cast<std::size_t>(stream.bounded(shuffled.size() - d));
            std::swap(shuffled[static_cast<std::size_t>(d)], shuffled[j]);
            draws.push_back(shuffled[static_cast<std::size_t>(d)]);
        }
    } else {
        for (int d = 0; d < n_draws; ++d)
            draws.push_back(pool[stream.bounded(pool.size())]);
    }

    double acc = 0.0;
    for (double v : draws) {
        const double dist = std::fabs(*cur - v);
        acc += dist;
        if (draws_out) draws_out->push_back(dist);
    }
    return acc / static_cast<double>(n_draws);
}

/// Index-aligned adjacent and non-adjacent distances for one feature
/// statistic, plus the raw non-adjacent draws behind the means.
struct ProximityDistances {
    AcousticFeature feature = AcousticFeature::f0;
    TurnStatKind statistic = TurnStatKind::mean;
    std::vector<int> turn_indices;
    std::vector<double> adjacent;           // fd_a(i)
    std::vector<double> nonadjacent;        // fd_na(i), mean of the draws
    std::vector<double> nonadjacent_draws;  // raw |fc_i - fp_j| samples
};

/// Build the paired distance sequences for a conversation. Each turn's
/// draw stream is derived from (master seed, conversation, feature,
/// statistic, turn index), so results do not depend on evaluation order.
inline ProximityDistances proximity_distances(
    std::span<const features::TurnFeatureSummary> summaries, AcousticFeature f,
    TurnStatKind k, std::uint64_t master_seed, std::string_view conversation_id,
    int n_draws = kDefaultBaselineDraws) {
    ProximityDistances out;
    out.feature = f;
    out.statistic = k;
    for (std::size_t i = 0; i + 1 < summaries.size(); ++i) {
        const auto cur = turn_value(summaries[i], f, k);
        const auto next = turn_value(summaries[i + 1], f, k);
        if (!cur || !next) continue;
        auto stream = rng::derive_stream(
            master_seed, {conversation_id, feature_name(f), stat_name(k),
                          std::to_string(i)});
        std::vector<double> draws;
        double baseline;
        try {
            baseline = nonadjacent_baseline(summaries, f, k, i, stream, n_draws, &draws);
        } catch (const Error& e) {
            if (e.code() == ErrorCode::InsufficientPartnerTurns) continue;
            throw;
        }
        out.turn_indices.push_back(static_cast<int>(i));
        out.adjacent.push_back(std::fabs(*cur - *next));
        out.nonadjacent.push_back(baseline);
        out.nonadjacent_draws.insert(out.nonadjacent_draws.end(), draws.begin(),
                                     draws.end());
    }
    return out;
}

/// Per-conversation proximity test: paired t over (adjacent - nonadjacent)
/// and Cliff's delta between the adjacent distances and the non-adjacent
/// distance sample (the raw draws when available). delta < 0 means
/// adjacent turns sit closer than baseline, i.e. entrainment.
struct ProximityEffect {
    std::optional<double> t_stat;
    std::optional<double> df;
    std::optional<double> p;
    double cliffs_delta = 0.0;
    std::size_t n_pairs = 0;
    bool zero_variance_differences = false;
};

inline constexpr std::size_t kMinProximityPairs = 5;

inline ProximityEffect proximity_effect(const ProximityDistances& d) {
    if (d.adjacent.size() != d.nonadjacent.size())
        throw Error(ErrorCode::LengthMismatch, "proximity distances misaligned");
    if (d.adjacent.size() < kMinProximityPairs)
        throw Error(ErrorCode::TooFewPairs,
                    std::to_string(d.adjacent.size()) + " pairs, need " +
                        std::to_string(kMinProximityPairs));
    ProximityEffect out;
    out.n_pairs = d.adjacent.size();
    try {
        const auto t = stats::paired_t(d.adjacent, d.nonadjacent);
        out.t_stat = t.statistic;
        out.df = t.df;
        out.p = t.p;
    } catch (const Error& e) {
        if (e.code() != ErrorCode::ZeroVarianceDifferences) throw;
        out.zero_variance_differences = true;
    }
    const auto& baseline_sample =
        d.nonadjacent_draws.empty() ? d.nonadjacent : d.nonadjacent_draws;
    out.cliffs_delta = stats::cliffs_delta(d.adjacent, baseline_sample);
    return out;
}

// ---------------------------------------------------------------------------
// windowed FAU synchrony
// ---------------------------------------------------------------------------

struct SynchronyEntry {
    std::string au;
    double mean_z = 0.0;
    std::size_t n_windows = 0;
    double window_s = kDefaultWindowS;
};

namespace detail {

/// Nearest-frame resample of one AU channel onto the shared 10 ms clock.
inline void to_common_clock(const corpus::FauTrack& track, const std::string& au,
                            std::size_t n_grid, double hop_s,
                            std::vector<double>& values, std::vector<std::uint8_t>& valid) {
    const auto it = track.channels.find(au);
    if (it == track.channels.end())
        throw Error(ErrorCode::MissingAuColumn, au);
    const auto& chan = it->second;
    const auto& ts = track.timestamps_s;
    values.assign(n_grid, 0.0);
    valid.assign(n_grid, 0);
    if (ts.empty()) return;
    std::size_t j = 0;
    for (std::size_t i = 0; i < n_grid; ++i) {
        const double t = static_cast<double>(i) * hop_s;
        while (j + 1 < ts.size() &&
               std::fabs(ts[j + 1] - t) <= std::fabs(ts[j] - t))
            ++j;
        values[i] = chan[j];
        valid[i] = track.valid[j];
    }
}

} // namespace detail

/// Windowed synchrony of one AU across the two speakers: consecutive
/// non-overlapping windows of `window_s`, Pearson r per window over the
/// jointly valid frames, r clamped to +-(1 - 1e-6), Fisher z, mean over
/// retained windows. Windows with under 10 joint frames or a constant
/// channel are skipped. Symmetric in (a, b) by construction.
inline SynchronyEntry windowed_synchrony(const corpus::FauTrack& a,
                                         const corpus::FauTrack& b,
                                         const std::string& au,
                                         double window_s = kDefaultWindowS) {
    if (a.timestamps_s.empty() || b.timestamps_s.empty())
        throw Error(ErrorCode::NoUsableWindows, au + ": empty track");
    const double hop_s = features::kHopS;
    const double t_end = std::min(a.timestamps_s.back(), b.timestamps_s.back());
    const std::size_t n_grid = static_cast<std::size_t>(std::floor(t_end / hop_s)) + 1;

    std::vector<double> va, vb;
    std::vector<std::uint8_t> ma, mb;
    detail::to_common_clock(a, au, n_grid, hop_s, va, ma);
    detail::to_common_clock(b, au, n_grid, hop_s, vb, mb);

    const std::size_t win = static_cast<std::size_t>(std::lround(window_s / hop_s));
    if (win == 0) throw Error(ErrorCode::InvalidConfig, "window too small");

    double z_sum = 0.0;
    std::size_t retained = 0;
    for (std::size_t w0 = 0; w0 + win <= n_grid; w0 += win) {
        double sa = 0.0, sb = 0.0;
        std::size_t n = 0;
        for (std::size_t i = w0; i < w0 + win; ++i) {
            if (!ma[i] || !mb[i]) continue;
            sa += va[i];
            sb += vb[i];
            ++n;
        }
        if (n < kMinJointFramesPerWindow) continue;
        const double mean_a = sa / static_cast<double>(n);
        const double mean_b = sb / static_cast<double>(n);
        double sab = 0.0, saa = 0.0, sbb = 0.0;
        for (std::size_t i = w0; i < w0 + win; ++i) {
            if (!ma[i] || !mb[i]) continue;
            const double da = va[i] - mean_a;
            const double db = vb[i] - mean_b;
            sab += da * db;
            saa += da * da;
            sbb += db * db;
        }
        if (saa <= 0.0 || sbb <= 0.0) continue;  // constant window, r undefined
        double r = sab / std::sqrt(saa * sbb);
        r = std::clamp(r, -stats::kFisherClamp, stats::kFisherClamp);
        z_sum += std::atanh(r);
        ++retained;
    }
    if (retained == 0)
        throw Error(ErrorCode::NoUsableWindows, au + ": no usable windows");

    SynchronyEntry out;
    out.au = au;
    out.mean_z = z_sum / static_cast<double>(retained);
    out.n_windows = retained;
    out.window_s = window_s;
    return out;
}

/// Synchrony across all 17 AU channels; AUs with no usable window are
/// reported with n_windows = 0 and mean_z = 0.
inline std::vector<SynchronyEntry> synchrony_all_aus(const corpus::FauTrack& a,
                                                     const corpus::FauTrack& b,
                                                     double window_s = kDefaultWindowS) {
    std::vector<SynchronyEntry> out;
    for (const char* au : corpus::kAuIds) {
        try {
            out.push_back(windowed_synchrony(a, b, au, window_s));
        } catch (const Error& e) {
            if (e.code() != ErrorCode::NoUsableWindows) throw;
            out.push_back(SynchronyEntry{au, 0.0, 0, window_s});
        }
    }
    return out;
}

} // namespace entrain::metrics
