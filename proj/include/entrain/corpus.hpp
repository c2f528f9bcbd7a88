#pragma once

#include <algorithm>
#include <array>
#include <cstdio>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "entrain/csv.hpp"
#include "entrain/error.hpp"
#include "entrain/wav.hpp"

namespace entrain::corpus {

using SpeakerId = std::string;

// ---------------------------------------------------------------------------
// domain types
// ---------------------------------------------------------------------------

/// One floor-holding span: contiguous speech by one speaker bounded by a
/// change of floor. The unit of every turn-level statistic.
struct Turn {
    SpeakerId speaker;
    double start_s = 0.0;
    double end_s = 0.0;
    std::string text;

    double duration() const { return end_s - start_s; }
};

struct Transcript {
    std::vector<Turn> turns;  // sorted by start_s, speakers strictly alternating
    std::string source;

    /// Distinct speakers in order of first appearance (at most two after
    /// validation).
    std::vector<SpeakerId> speakers() const {
        std::vector<SpeakerId> out;
        for (const auto& t : turns)
            if (std::find(out.begin(), out.end(), t.speaker) == out.end())
                out.push_back(t.speaker);
        return out;
    }
};

/// Mono 16 kHz audio for one speaker, amplitudes in [-1, 1].
struct AudioTrack {
    SpeakerId speaker;
    int sample_rate_hz = 16000;
    std::vector<float> samples;

    double duration_s() const {
        return static_cast<double>(samples.size()) / sample_rate_hz;
    }
};

/// The 17 OpenFace intensity (_r) action-unit channels, ascending AU number.
inline constexpr std::array<const char*, 17> kAuIds = {
    "AU01", "AU02", "AU04", "AU05", "AU06", "AU07", "AU09", "AU10", "AU12",
    "AU14", "AU15", "AU17", "AU20", "AU23", "AU25", "AU26", "AU45"};

struct FauTrack {
    SpeakerId speaker;
    double frame_rate_hz = 0.0;
    std::vector<double> timestamps_s;                  // strictly increasing
    std::map<std::string, std::vector<double>> channels;  // exactly kAuIds keys
    std::vector<std::uint8_t> valid;                   // per-frame success flag

    std::size_t size() const { return timestamps_s.size(); }
};

struct SurveyResponse {
    std::string conversation_id;
    SpeakerId participant;
    std::map<std::string, double> ratings;    // construct -> raw rating
    std::map<std::string, double> scale_max;  // construct -> declared scale
};

struct Conversation {
    std::string id;
    Transcript transcript;
    std::map<SpeakerId, AudioTrack> audio;
    std::map<SpeakerId, FauTrack> fau;
    std::vector<SurveyResponse> surveys;  // 0 or 2 entries
};

// ---------------------------------------------------------------------------
// transcript ingestion
// ---------------------------------------------------------------------------

inline constexpr double kMaxClippableOverlapS = 0.5;

/// Parse a transcript CSV (`turn_id,speaker,start,stop,utterance`) into a
/// validated Transcript. Rows are ordered by time, adjacent rows by the
/// same speaker are merged into one turn (floor-change rule), and
/// cross-speaker overlaps below 0.5 s are clipped; anything worse rejects
/// the file.
inline Transcript parse_transcript(std::string_view content,
                                   std::string source = "") {
    const auto table = csv::parse(content);
    const int c_speaker = table.require_column("speaker");
    const int c_start = table.require_column("start");
    const int c_stop = table.require_column("stop");
    table.require_column("turn_id");
    const int c_utt = table.require_column("utterance");

    struct Row {
        SpeakerId speaker;
        double start, stop;
        std::string text;
    };
    std::vector<Row> rows;
    rows.reserve(table.rows.size());
    std::set<SpeakerId> speakers;
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        const auto& r = table.rows[i];
        const std::size_t need = static_cast<std::size_t>(
            std::max({c_speaker, c_start, c_stop, c_utt})) + 1;
        if (r.size() < need)
            throw Error(ErrorCode::MissingColumn,
                        "row " + std::to_string(i + 1) + " too short");
        Row row;
        row.speaker = csv::trim(r[c_speaker]);
        row.start = csv::to_number(r[c_start], ErrorCode::NonNumericTime,
                                   "start, row " + std::to_string(i + 1));
        row.stop = csv::to_number(r[c_stop], ErrorCode::NonNumericTime,
                                  "stop, row " + std::to_string(i + 1));
        row.text = r[c_utt];
        if (!(row.stop > row.start))
            throw Error(ErrorCode::NonNumericTime,
                        "invalid span (stop <= start) at row " + std::to_string(i + 1));
        speakers.insert(row.speaker);
        rows.push_back(std::move(row));
    }
    if (speakers.size() > 2)
        throw Error(ErrorCode::MoreThanTwoSpeakers,
                    std::to_string(speakers.size()) + " distinct speakers");

    std::stable_sort(rows.begin(), rows.end(),
                     [](const Row& a, const Row& b) { return a.start < b.start; });

    Transcript t;
    t.source = std::move(source);
    for (const auto& row : rows) {
        if (!t.turns.empty() && t.turns.back().speaker == row.speaker) {
            Turn& prev = t.turns.back();
            prev.end_s = std::max(prev.end_s, row.stop);
            if (!row.text.empty()) {
                if (!prev.text.empty()) prev.text += ' ';
                prev.text += row.text;
            }
        } else {
            t.turns.push_back(Turn{row.speaker, row.start, row.stop, row.text});
        }
    }

    // overlap pass across the merged, floor-alternating sequence
    for (std::size_t i = 0; i + 1 < t.turns.size(); ++i) {
        Turn& cur = t.turns[i];
        const Turn& next = t.turns[i + 1];
        const double overlap = cur.end_s - next.start_s;
        if (overlap <= 0.0) continue;
        if (overlap >= kMaxClippableOverlapS)
            throw Error(ErrorCode::UnsortedAfterMerge,
                        "overlap of " + std::to_string(overlap) + " s at turn " +
                            std::to_string(i + 1));
        cur.end_s = next.start_s;
        if (!(cur.end_s > cur.start_s))
            throw Error(ErrorCode::UnsortedAfterMerge,
                        "turn " + std::to_string(i + 1) + " vanished after overlap clip");
    }
    for (std::size_t i = 0; i + 1 < t.turns.size(); ++i) {
        if (!(t.turns[i + 1].start_s >= t.turns[i].end_s))
            throw Error(ErrorCode::UnsortedAfterMerge,
                        "turns out of order at " + std::to_string(i + 1));
    }
    return t;
}

inline std::string format_seconds(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

/// Inverse of parse_transcript for valid transcripts (times at 6 decimals).
inline std::string serialize_transcript(const Transcript& t) {
    std::string out = "turn_id,speaker,start,stop,utterance\n";
    for (std::size_t i = 0; i < t.turns.size(); ++i) {
        const Turn& turn = t.turns[i];
        out += std::to_string(i);
        out += ',';
        out += csv::quote_if_needed(turn.speaker);
        out += ',';
        out += format_seconds(turn.start_s);
        out += ',';
        out += format_seconds(turn.end_s);
        out += ',';
        out += csv::quote_if_needed(turn.text);
        out += '\n';
    }
    return out;
}

// ---------------------------------------------------------------------------
// audio ingestion
// ---------------------------------------------------------------------------

inline constexpr int kTargetRateHz = 16000;

/// Decode a WAVE container, average channels to mono, and resample to
/// 16 kHz (windowed sinc; pass-through when already 16 kHz).
inline AudioTrack load_audio(const std::vector<unsigned char>& bytes,
                             SpeakerId speaker = {}) {
    const wav::WavData raw = wav::read_wav(bytes);
    if (raw.sample_rate != 16000 && raw.sample_rate != 44100 && raw.sample_rate != 48000)
        throw Error(ErrorCode::UnsupportedEncoding,
                    "sample rate " + std::to_string(raw.sample_rate));

    std::vector<float> mono;
    if (raw.channels == 1) {
        mono = raw.samples;
    } else {
        mono.resize(raw.samples.size() / 2);
        for (std::size_t i = 0; i < mono.size(); ++i)
            mono[i] = 0.5f * (raw.samples[2 * i] + raw.samples[2 * i + 1]);
    }

    AudioTrack track;
    track.speaker = std::move(speaker);
    track.sample_rate_hz = kTargetRateHz;
    track.samples = wav::resample(mono, raw.sample_rate, kTargetRateHz);
    for (float& s : track.samples) s = std::fmin(1.0f, std::fmax(-1.0f, s));
    return track;
}

inline AudioTrack load_audio_file(const std::string& path, SpeakerId speaker = {}) {
    return load_audio(wav::read_file_bytes(path), std::move(speaker));
}

// ---------------------------------------------------------------------------
// FAU ingestion
// ---------------------------------------------------------------------------

/// Parse an OpenFace-style AU table (`frame,timestamp,success,AU01_r,...`).
/// Frames with success=0 keep their values but are masked invalid.
inline FauTrack parse_fau_table(std::string_view content, SpeakerId speaker = {}) {
    const auto table = csv::parse(content);
    const int c_ts = table.require_column("timestamp");
    const int c_success = table.require_column("success");
    table.require_column("frame");

    std::array<int, kAuIds.size()> au_cols{};
    for (std::size_t a = 0; a < kAuIds.size(); ++a) {
        const std::string col = std::string(kAuIds[a]) + "_r";
        const int c = table.column(col);
        if (c < 0) throw Error(ErrorCode::MissingAuColumn, std::string(kAuIds[a]));
        au_cols[a] = c;
    }

    FauTrack track;
    track.speaker = std::move(speaker);
    for (const char* au : kAuIds) track.channels[au] = {};

    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        const auto& r = table.rows[i];
        const double ts = csv::to_number(r[c_ts], ErrorCode::NonNumericTime,
                                         "timestamp, row " + std::to_string(i + 1));
        if (!track.timestamps_s.empty() && !(ts > track.timestamps_s.back()))
            throw Error(ErrorCode::NonMonotoneTimestamps,
                        "row " + std::to_string(i + 1));
        track.timestamps_s.push_back(ts);
        const double success = csv::to_number(r[c_success], ErrorCode::NonNumericTime,
                                              "success, row " + std::to_string(i + 1));
        track.valid.push_back(success != 0.0 ? 1 : 0);
        for (std::size_t a = 0; a < kAuIds.size(); ++a) {
            double v = csv::to_number(r[au_cols[a]], ErrorCode::NonNumericTime,
                                      std::string(kAuIds[a]) + ", row " +
                                          std::to_string(i + 1));
            // OpenFace occasionally emits tiny negative intensities
            track.channels[kAuIds[a]].push_back(std::max(v, 0.0));
        }
    }

    if (track.timestamps_s.size() >= 2) {
        std::vector<double> deltas;
        deltas.reserve(track.timestamps_s.size() - 1);
        for (std::size_t i = 1; i < track.timestamps_s.size(); ++i)
            deltas.push_back(track.timestamps_s[i] - track.timestamps_s[i - 1]);
        std::nth_element(deltas.begin(), deltas.begin() + deltas.size() / 2, deltas.end());
        track.frame_rate_hz = 1.0 / deltas[deltas.size() / 2];
    } else {
        track.frame_rate_hz = 30.0;  // single-frame file: no spacing to infer
    }
    return track;
}

// ---------------------------------------------------------------------------
// survey ingestion
// ---------------------------------------------------------------------------

struct SurveyParse {
    std::vector<SurveyResponse> responses;
    std::vector<std::string> warnings;  // e.g. unpaired participants
};

/// Parse a survey CSV (`conversation_id,participant_id,<constructs>`).
/// `registry` maps each expected construct to its scale maximum; ratings
/// must lie in [1, scale]. Pairing problems are warnings, not errors.
inline SurveyParse parse_surveys(std::string_view content,
                                 const std::map<std::string, double>& registry) {
    const auto table = csv::parse(content);
    const int c_conv = table.require_column("conversation_id");
    const int c_part = table.require_column("participant_id");
    std::map<std::string, int> cols;
    for (const auto& [construct, scale] : registry) {
        (void)scale;
        cols[construct] = table.require_column(construct);
    }

    SurveyParse out;
    std::map<std::string, int> per_conv;
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        const auto& r = table.rows[i];
        SurveyResponse resp;
        resp.conversation_id = csv::trim(r[c_conv]);
        resp.participant = csv::trim(r[c_part]);
        for (const auto& [construct, col] : cols) {
            const double v = csv::to_number(r[col], ErrorCode::NonNumericTime,
                                            construct + ", row " + std::to_string(i + 1));
            const double scale = registry.at(construct);
            if (v < 1.0 || v > scale)
                throw Error(ErrorCode::OutOfScaleRating,
                            construct + "=" + std::to_string(v) + " outside [1, " +
                                std::to_string(scale) + "] at row " + std::to_string(i + 1));
            resp.ratings[construct] = v;
            resp.scale_max[construct] = scale;
        }
        per_conv[resp.conversation_id] += 1;
        out.responses.push_back(std::move(resp));
    }
    for (const auto& [conv, count] : per_conv) {
        if (count != 2)
            out.warnings.push_back("UnpairedParticipant: conversation " + conv + " has " +
                                   std::to_string(count) + " response(s)");
    }
    return out;
}

} // namespace entrain::corpus
