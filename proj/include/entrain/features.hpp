#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include "entrain/corpus.hpp"
#include "entrain/csv.hpp"
#include "entrain/error.hpp"

namespace entrain::features {

// ---------------------------------------------------------------------------
// frame geometry: one 10 ms clock shared by every feature kind
// ---------------------------------------------------------------------------

inline constexpr double kHopS = 0.010;
inline constexpr double kF0WindowS = 0.040;
inline constexpr double kIntensityWindowS = 0.032;
inline constexpr double kF0MinHz = 50.0;
inline constexpr double kF0MaxHz = 600.0;
inline constexpr double kYinThreshold = 0.15;
inline constexpr double kIntensityRefPressure = 2e-5;
inline constexpr double kSilenceRms = 1e-8;

enum class FeatureKind { f0_hz, f0_norm, intensity_db, fau };

/// Uniformly sampled feature series. Frame i sits at time i * frame_hop_s
/// (the analysis window is centered there); `valid` is the voicing mask for
/// pitch and the usability mask otherwise.
struct FeatureTrack {
    FeatureKind kind = FeatureKind::f0_hz;
    double frame_hop_s = kHopS;
    double frame_len_s = 0.0;
    std::vector<double> values;
    std::vector<std::uint8_t> valid;

    std::size_t size() const { return values.size(); }
    double frame_time(std::size_t i) const { return static_cast<double>(i) * frame_hop_s; }
    double duration_s() const { return static_cast<double>(size()) * frame_hop_s; }

    std::size_t valid_count() const {
        std::size_t n = 0;
        for (auto v : valid) n += v != 0;
        return n;
    }
};

// ---------------------------------------------------------------------------
// F0: cumulative-mean-normalized difference function tracker
// ---------------------------------------------------------------------------

/// Estimate F0 per 10 ms hop from 16 kHz mono audio.
///
/// For each frame the difference function
///   d(tau) = sum_j (x[s+j] - x[s+j+tau])^2,  j over a 40 ms window,
/// is normalized by its cumulative mean; the first lag dipping below the
/// 0.15 threshold (then descended to its local minimum and refined by
/// parabolic interpolation) gives the period. Frames with no qualifying
/// lag, too little energy, or an incomplete analysis window are unvoiced.
/// Search band 50-600 Hz.
inline FeatureTrack estimate_f0(const corpus::AudioTrack& track) {
    if (track.sample_rate_hz != corpus::kTargetRateHz)
        throw Error(ErrorCode::UnsupportedEncoding, "estimate_f0 expects 16 kHz input");
    const auto& x = track.samples;
    const long n = static_cast<long>(x.size());
    const long hop = static_cast<long>(std::lround(kHopS * track.sample_rate_hz));
    const long win = static_cast<long>(std::lround(kF0WindowS * track.sample_rate_hz));
    const long tau_max = static_cast<long>(std::lround(track.sample_rate_hz / kF0MinHz));
    const long tau_min = static_cast<long>(track.sample_rate_hz / kF0MaxHz);  // 26

    if (n < 1) throw Error(ErrorCode::TooShort, "empty signal");
    const long n_frames = (n - 1) / hop + 1;
    if (n < win + tau_max)
        throw Error(ErrorCode::TooShort, "signal shorter than one analysis window");

    FeatureTrack out;
    out.kind = FeatureKind::f0_hz;
    out.frame_len_s = kF0WindowS;
    out.values.assign(static_cast<std::size_t>(n_frames), 0.0);
    out.valid.assign(static_cast<std::size_t>(n_frames), 0);

    std::vector<double> d(static_cast<std::size_t>(tau_max) + 1, 0.0);
    std::vector<double> dn(static_cast<std::size_t>(tau_max) + 1, 1.0);

    for (long f = 0; f < n_frames; ++f) {
        const long c = f * hop;
        const long s = c - win / 2;
        if (s < 0 || s + win + tau_max > n) continue;

        double energy = 0.0;
        for (long j = 0; j < win; ++j) {
            const double v = x[static_cast<std::size_t>(s + j)];
            energy += v * v;
        }
        if (energy < static_cast<double>(win) * 1e-14) continue;  // rms < 1e-7

        for (long tau = 1; tau <= tau_max; ++tau) {
            double acc = 0.0;
            const float* a = x.data() + s;
            const float* b = x.data() + s + tau;
            for (long j = 0; j < win; ++j) {
                const double diff = static_cast<double>(a[j]) - static_cast<double>(b[j]);
                acc += diff * diff;
            }
            d[static_cast<std::size_t>(tau)] = acc;
        }

        double cum = 0.0;
        dn[0] = 1.0;
        for (long tau = 1; tau <= tau_max; ++tau) {
            cum += d[static_cast<std::size_t>(tau)];
            dn[static_cast<std::size_t>(tau)] =
                (cum > 0.0) ? d[static_cast<std::size_t>(tau)] * static_cast<double>(tau) / cum
                            : 1.0;
        }

        long tau = -1;
        for (long t = tau_min; t <= tau_max; ++t) {
            if (dn[static_cast<std::size_t>(t)] < kYinThreshold) {
                tau = t;
                while (tau + 1 <= tau_max &&
                       dn[static_cast<std::size_t>(tau + 1)] < dn[static_cast<std::size_t>(tau)])
                    ++tau;
                break;
            }
        }
        if (tau < 0) continue;

        double tau_star = static_cast<double>(tau);
        if (tau > 1 && tau < tau_max) {
            const double dm = dn[static_cast<std::size_t>(tau - 1)];
            const double d0 = dn[static_cast<std::size_t>(tau)];
            const double dp = dn[static_cast<std::size_t>(tau + 1)];
            const double denom = dm - 2.0 * d0 + dp;
            if (std::fabs(denom) > 1e-12) {
                double shift = 0.5 * (dm - dp) / denom;
                shift = std::clamp(shift, -0.5, 0.5);
                tau_star += shift;
            }
        }
        const double f0 =
            std::clamp(static_cast<double>(track.sample_rate_hz) / tau_star, kF0MinHz, kF0MaxHz);
        out.values[static_cast<std::size_t>(f)] = f0;
        out.valid[static_cast<std::size_t>(f)] = 1;
    }
    return out;
}

// ---------------------------------------------------------------------------
// pitch normalization
// ---------------------------------------------------------------------------

inline constexpr std::size_t kMinVoicedFrames = 10;
inline constexpr double kDegenerateVariance = 1e-9;

/// Z-score voiced F0 values over the speaker's whole conversation
/// (population standard deviation); removes between-speaker register
/// offsets so proximity distances compare like units. Near-constant pitch
/// maps to all zeros.
inline FeatureTrack normalize_pitch(const FeatureTrack& f0) {
    if (f0.kind != FeatureKind::f0_hz)
        throw Error(ErrorCode::InvalidConfig, "normalize_pitch expects an F0 track");
    std::size_t n_voiced = 0;
    double sum = 0.0;
    for (std::size_t i = 0; i < f0.size(); ++i) {
        if (f0.valid[i]) {
            ++n_voiced;
            sum += f0.values[i];
        }
    }
    if (n_voiced < kMinVoicedFrames)
        throw Error(ErrorCode::InsufficientVoicedFrames,
                    std::to_string(n_voiced) + " voiced frames, need " +
                        std::to_string(kMinVoicedFrames));
    const double mean = sum / static_cast<double>(n_voiced);
    double ss = 0.0;
    for (std::size_t i = 0; i < f0.size(); ++i) {
        if (f0.valid[i]) {
            const double dv = f0.values[i] - mean;
            ss += dv * dv;
        }
    }
    const double var = ss / static_cast<double>(n_voiced);

    FeatureTrack out = f0;
    out.kind = FeatureKind::f0_norm;
    if (var < kDegenerateVariance) {
        for (std::size_t i = 0; i < out.size(); ++i) out.values[i] = 0.0;
        return out;
    }
    const double inv_sd = 1.0 / std::sqrt(var);
    for (std::size_t i = 0; i < out.size(); ++i)
        out.values[i] = out.valid[i] ? (out.values[i] - mean) * inv_sd : 0.0;
    return out;
}

// ---------------------------------------------------------------------------
// intensity
// ---------------------------------------------------------------------------

/// Per-hop intensity in dB: 20*log10(rms / 2e-5) with the RMS taken over a
/// 32 ms Hann-weighted window. Frames quieter than rms 1e-8 (and edge
/// frames without a full window) are masked invalid.
inline FeatureTrack compute_intensity(const corpus::AudioTrack& track) {
    if (track.sample_rate_hz != corpus::kTargetRateHz)
        throw Error(ErrorCode::UnsupportedEncoding, "compute_intensity expects 16 kHz input");
    const auto& x = track.samples;
    const long n = static_cast<long>(x.size());
    const long hop = static_cast<long>(std::lround(kHopS * track.sample_rate_hz));
    const long win = static_cast<long>(std::lround(kIntensityWindowS * track.sample_rate_hz));
    if (n < 1) throw Error(ErrorCode::TooShort, "empty signal");
    if (n < win) throw Error(ErrorCode::TooShort, "signal shorter than one analysis window");
    const long n_frames = (n - 1) / hop + 1;

    std::vector<double> window(static_cast<std::size_t>(win));
    double wsum = 0.0;
    for (long j = 0; j < win; ++j) {
        const double w =
            0.5 * (1.0 - std::cos(6.283185307179586 * static_cast<double>(j) /
                                  static_cast<double>(win - 1)));
        window[static_cast<std::size_t>(j)] = w;
        wsum += w;
    }

    FeatureTrack out;
    out.kind = FeatureKind::intensity_db;
    out.frame_len_s = kIntensityWindowS;
    out.values.assign(static_cast<std::size_t>(n_frames), 0.0);
    out.valid.assign(static_cast<std::size_t>(n_frames), 0);

    for (long f = 0; f < n_frames; ++f) {
        const long s = f * hop - win / 2;
        if (s < 0 || s + win > n) continue;
        double acc = 0.0;
        for (long j = 0; j < win; ++j) {
            const double v = x[static_cast<std::size_t>(s + j)];
            acc += window[static_cast<std::size_t>(j)] * v * v;
        }
        const double rms = std::sqrt(acc / wsum);
        if (rms < kSilenceRms) continue;
        out.values[static_cast<std::size_t>(f)] =
            20.0 * std::log10(rms / kIntensityRefPressure);
        out.valid[static_cast<std::size_t>(f)] = 1;
    }
    return out;
}

// ---------------------------------------------------------------------------
// turn summaries
// ---------------------------------------------------------------------------

struct Stat3 {
    double min = 0.0;
    double max = 0.0;
    double mean = 0.0;
};

inline constexpr std::size_t kMinFramesPerTurn = 3;

/// Frame index range [first, last) whose centers lie in [start_s, end_s).
inline std::pair<std::size_t, std::size_t> frame_range(const FeatureTrack& t,
                                                       double start_s, double end_s) {
    const double hop = t.frame_hop_s;
    long first = static_cast<long>(std::ceil(start_s / hop - 1e-9));
    long last = static_cast<long>(std::ceil(end_s / hop - 1e-9));
    first = std::max(first, 0L);
    last = std::min(last, static_cast<long>(t.size()));
    if (first > last) first = last;
    return {static_cast<std::size_t>(first), static_cast<std::size_t>(last)};
}

/// Min/max/mean over the turn's valid frames; nullopt (absent summary)
/// when fewer than 3 frames qualify. Throws when the turn lies outside
/// the track.
inline std::optional<Stat3> summarize_turn(const FeatureTrack& track,
                                           const corpus::Turn& turn) {
    if (turn.start_s < -1e-9 || turn.start_s > track.duration_s() + 1e-9 ||
        turn.end_s > track.duration_s() + track.frame_hop_s + 1e-9)
        throw Error(ErrorCode::TurnOutOfRange,
                    "turn [" + std::to_string(turn.start_s) + ", " +
                        std::to_string(turn.end_s) + ") vs track of " +
                        std::to_string(track.duration_s()) + " s");
    const auto [first, last] = frame_range(track, turn.start_s, turn.end_s);
    Stat3 s{0.0, 0.0, 0.0};
    std::size_t count = 0;
    double sum = 0.0;
    for (std::size_t i = first; i < last; ++i) {
        if (!track.valid[i]) continue;
        const double v = track.values[i];
        if (count == 0) {
            s.min = v;
            s.max = v;
        } else {
            s.min = std::min(s.min, v);
            s.max = std::max(s.max, v);
        }
        sum += v;
        ++count;
    }
    if (count < kMinFramesPerTurn) return std::nullopt;
    s.mean = sum / static_cast<double>(count);
    return s;
}

/// Per-turn summaries of both acoustic features for one conversation turn.
struct TurnFeatureSummary {
    int turn_index = 0;
    corpus::SpeakerId speaker;
    std::optional<Stat3> f0;         // normalized pitch units
    std::optional<Stat3> intensity;  // dB
};

// ---------------------------------------------------------------------------
// feature cache files
// ---------------------------------------------------------------------------

/// CSV cache: `frame_index,time_s,value,valid`.
inline std::string feature_to_csv(const FeatureTrack& t) {
    std::string out = "frame_index,time_s,value,valid\n";
    char buf[96];
    for (std::size_t i = 0; i < t.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%zu,%.3f,%.17g,%d\n", i, t.frame_time(i),
                      t.values[i], t.valid[i] ? 1 : 0);
        out += buf;
    }
    return out;
}

inline FeatureTrack feature_from_csv(std::string_view content, FeatureKind kind,
                                     double frame_len_s) {
    const auto table = csv::parse(content);
    const int c_val = table.require_column("value");
    const int c_valid = table.require_column("valid");
    FeatureTrack t;
    t.kind = kind;
    t.frame_len_s = frame_len_s;
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        t.values.push_back(csv::to_number(table.rows[i][c_val], ErrorCode::NonNumericTime,
                                          "value"));
        t.valid.push_back(csv::to_number(table.rows[i][c_valid], ErrorCode::NonNumericTime,
                                         "valid") != 0.0);
    }
    return t;
}

} // namespace entrain::features
