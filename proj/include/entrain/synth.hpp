#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "entrain/corpus.hpp"
#include "entrain/entrainment.hpp"
#include "entrain/error.hpp"
#include "entrain/features.hpp"
#include "entrain/pcs.hpp"
#include "entrain/prng.hpp"
#include "entrain/wav.hpp"

namespace entrain::synth {

// ---------------------------------------------------------------------------
// configuration
// ---------------------------------------------------------------------------

/// Generator knobs for one synthetic dyadic conversation. coupling_lambda
/// pulls each turn's latent acoustic level toward the partner's previous
/// turn; fau_rho sets the target cross-speaker FAU correlation;
/// success_latent drives the survey ratings.
struct SynthConfig {
    std::uint64_t seed = 1;
    int n_turns = 40;
    double coupling_lambda = 0.0;  // [0, 1]
    double fau_rho = 0.0;          // (-1, 1)
    double mean_turn_s = 1.2;
    double mean_gap_s = 0.7;
    double base_f0_a = 120.0;
    double base_f0_b = 210.0;
    double success_latent = 0.5;   // [0, 1]

    void validate() const {
        if (n_turns < 2)
            throw Error(ErrorCode::InvalidConfig, "n_turns must be >= 2");
        if (coupling_lambda < 0.0 || coupling_lambda > 1.0)
            throw Error(ErrorCode::InvalidConfig, "coupling_lambda outside [0,1]");
        if (fau_rho <= -1.0 || fau_rho >= 1.0)
            throw Error(ErrorCode::InvalidConfig, "fau_rho outside (-1,1)");
        if (mean_turn_s <= 0.0 || mean_gap_s < 0.0)
            throw Error(ErrorCode::InvalidConfig, "non-positive durations");
        if (base_f0_a < 60.0 || base_f0_a > 400.0 || base_f0_b < 60.0 || base_f0_b > 400.0)
            throw Error(ErrorCode::InvalidConfig, "base F0 outside 60-400 Hz");
        if (success_latent < 0.0 || success_latent > 1.0)
            throw Error(ErrorCode::InvalidConfig, "success_latent outside [0,1]");
    }
};

// ---------------------------------------------------------------------------
// latent turn chain
// ---------------------------------------------------------------------------

/// One turn's ground truth before any signal is rendered: timing plus the
/// latent pitch / intensity levels the audio will realize.
struct LatentTurn {
    int index = 0;
    corpus::SpeakerId speaker;
    double start_s = 0.0;
    double end_s = 0.0;
    double f0_level = 0.0;   // z-units around the speaker's base pitch
    double amp_level = 0.0;  // z-units around the base amplitude (dB-linear)
};

inline constexpr double kMinTurnS = 0.35;

/// Build the alternating turn chain. Each latent channel follows
/// v[i+1] = (1 - lambda) * fresh + lambda * v[i], so lambda = 0 gives
/// i.i.d. levels and lambda near 1 makes each turn echo the partner's.
inline std::vector<LatentTurn> latent_turns(const SynthConfig& cfg) {
    cfg.validate();
    auto timing = rng::derive_stream(cfg.seed, {"timing"});
    auto f0_stream = rng::derive_stream(cfg.seed, {"latent", "f0"});
    auto amp_stream = rng::derive_stream(cfg.seed, {"latent", "amp"});

    std::vector<LatentTurn> turns(static_cast<std::size_t>(cfg.n_turns));
    double clock = 0.25;
    double f0_prev = 0.0, amp_prev = 0.0;
    for (int i = 0; i < cfg.n_turns; ++i) {
        LatentTurn& t = turns[static_cast<std::size_t>(i)];
        t.index = i;
        t.speaker = (i % 2 == 0) ? "A" : "B";
        const double dur = std::clamp(cfg.mean_turn_s * std::exp(0.35 * timing.normal()),
                                      kMinTurnS, 4.0 * cfg.mean_turn_s + kMinTurnS);
        t.start_s = clock;
        t.end_s = clock + dur;
        const double gap =
            std::clamp(cfg.mean_gap_s * std::exp(0.5 * timing.normal()), 0.05, 5.0);
        clock = t.end_s + gap;

        if (i == 0) {
            t.f0_level = f0_stream.normal();
            t.amp_level = amp_stream.normal();
        } else {
            t.f0_level = (1.0 - cfg.coupling_lambda) * f0_stream.normal() +
                         cfg.coupling_lambda * f0_prev;
            t.amp_level = (1.0 - cfg.coupling_lambda) * amp_stream.normal() +
                          cfg.coupling_lambda * amp_prev;
        }
        f0_prev = t.f0_level;
        amp_prev = t.amp_level;
    }
    return turns;
}

/// Latent levels packaged as turn summaries, for validating the proximity
/// metrics without going through signal rendering.
inline std::vector<features::TurnFeatureSummary> latent_summaries(
    const std::vector<LatentTurn>& turns) {
    std::vector<features::TurnFeatureSummary> out;
    out.reserve(turns.size());
    for (const auto& t : turns) {
        features::TurnFeatureSummary s;
        s.turn_index = t.index;
        s.speaker = t.speaker;
        s.f0 = features::Stat3{t.f0_level, t.f0_level, t.f0_level};
        s.intensity = features::Stat3{t.amp_level, t.amp_level, t.amp_level};
        out.push_back(std::move(s));
    }
    return out;
}

// ---------------------------------------------------------------------------
// signal rendering
// ---------------------------------------------------------------------------

namespace detail {

/// Paul Kellet's economy pink filter over white noise.
struct PinkNoise {
    double b0 = 0.0, b1 = 0.0, b2 = 0.0;

    double next(rng::Xoshiro256& stream) {
        const double w = stream.uniform(-1.0, 1.0);
        b0 = 0.99765 * b0 + w * 0.0990460;
        b1 = 0.96300 * b1 + w * 0.2965164;
        b2 = 0.57000 * b2 + w * 1.0526913;
        return (b0 + b1 + b2 + w * 0.1848) * 0.25;
    }
};

inline void render_speaker_audio(const SynthConfig& cfg,
                                 const std::vector<LatentTurn>& turns,
                                 const corpus::SpeakerId& speaker,
                                 std::vector<float>& out, double duration_s) {
    const int fs = corpus::kTargetRateHz;
    out.assign(static_cast<std::size_t>(std::lround(duration_s * fs)), 0.0f);
    auto noise_stream = rng::derive_stream(cfg.seed, {"audio", speaker});
    PinkNoise pink;
    const double base_f0 = (speaker == "A") ? cfg.base_f0_a : cfg.base_f0_b;
    const double two_pi = 6.283185307179586476925286766559;

    for (const auto& t : turns) {
        if (t.speaker != speaker) continue;
        const double f0 = base_f0 * std::pow(2.0, 2.0 * t.f0_level / 12.0);
        const double amp_db = std::clamp(-16.0 + 2.5 * t.amp_level, -26.0, -7.0);
        const double amp = std::pow(10.0, amp_db / 20.0);
        const auto s0 = static_cast<std::size_t>(std::lround(t.start_s * fs));
        const auto s1 = std::min(out.size(), static_cast<std::size_t>(std::lround(t.end_s * fs)));
        const std::size_t len = (s1 > s0) ? s1 - s0 : 0;
        const std::size_t ramp = std::min<std::size_t>(160, len / 4);  // 10 ms fades
        for (std::size_t j = 0; j < len; ++j) {
            const double tt = static_cast<double>(j) / fs;
            double v = std::sin(two_pi * f0 * tt) + 0.5 * std::sin(two_pi * 2.0 * f0 * tt) +
                       0.25 * std::sin(two_pi * 3.0 * f0 * tt);
            v *= amp;
            v += amp * 0.0316 * pink.next(noise_stream);  // noise floor at -30 dB
            double fade = 1.0;
            if (j < ramp)
                fade = 0.5 * (1.0 - std::cos(3.14159265358979 * (j + 1.0) / (ramp + 1.0)));
            else if (len - 1 - j < ramp)
                fade = 0.5 *
                       (1.0 - std::cos(3.14159265358979 * (len - j) / (ramp + 1.0)));
            out[s0 + j] = static_cast<float>(std::clamp(v * fade, -1.0, 1.0));
        }
    }
}

/// Unit-variance AR(1) step chain.
struct Ar1 {
    double phi;
    double state;

    Ar1(double phi_, rng::Xoshiro256& stream) : phi(phi_) {
        state = stream.normal() / std::sqrt(1.0 - phi * phi);
    }

    double next(rng::Xoshiro256& stream) {
        state = phi * state + stream.normal();
        return state * std::sqrt(1.0 - phi * phi);  // unit marginal variance
    }
};

inline constexpr double kFauFps = 30.0;
inline constexpr double kFauAr1Phi = 0.85;

inline void render_fau_pair(const SynthConfig& cfg, double duration_s,
                            corpus::FauTrack& a, corpus::FauTrack& b) {
    const std::size_t n = static_cast<std::size_t>(std::floor(duration_s * kFauFps)) + 1;
    a = corpus::FauTrack{};
    b = corpus::FauTrack{};
    a.speaker = "A";
    b.speaker = "B";
    a.frame_rate_hz = kFauFps;
    b.frame_rate_hz = kFauFps;
    for (std::size_t i = 0; i < n; ++i) {
        const double ts = static_cast<double>(i) / kFauFps;
        a.timestamps_s.push_back(ts);
        b.timestamps_s.push_back(ts);
        a.valid.push_back(1);
        b.valid.push_back(1);
    }
    const double rho = cfg.fau_rho;
    const double shared_w = std::sqrt(std::fabs(rho));
    const double own_w = std::sqrt(1.0 - std::fabs(rho));
    const double sign_b = (rho < 0.0) ? -1.0 : 1.0;
    for (const char* au : corpus::kAuIds) {
        auto s_stream = rng::derive_stream(cfg.seed, {"fau", au, "shared"});
        auto a_stream = rng::derive_stream(cfg.seed, {"fau", au, "a"});
        auto b_stream = rng::derive_stream(cfg.seed, {"fau", au, "b"});
        Ar1 shared(kFauAr1Phi, s_stream);
        Ar1 own_a(kFauAr1Phi, a_stream);
        Ar1 own_b(kFauAr1Phi, b_stream);
        auto& ca = a.channels[au];
        auto& cb = b.channels[au];
        ca.reserve(n);
        cb.reserve(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double s = shared.next(s_stream);
            const double xa = shared_w * s + own_w * own_a.next(a_stream);
            const double xb = sign_b * shared_w * s + own_w * own_b.next(b_stream);
            ca.push_back(std::max(0.0, 2.5 + 0.8 * xa));
            cb.push_back(std::max(0.0, 2.5 + 0.8 * xb));
        }
    }
}

} // namespace detail

// ---------------------------------------------------------------------------
// full bundle
// ---------------------------------------------------------------------------

struct SynthBundle {
    std::string conversation_id;
    corpus::Transcript transcript;
    std::map<corpus::SpeakerId, std::vector<float>> audio;  // 16 kHz mono
    std::map<corpus::SpeakerId, corpus::FauTrack> fau;
    std::vector<corpus::SurveyResponse> surveys;
};

/// Generate survey ratings monotone in success_latent.
inline std::vector<corpus::SurveyResponse> generate_surveys(
    const SynthConfig& cfg, const std::string& conversation_id,
    const pcs::ConstructSet& constructs = pcs::ConstructSet::pcs_default()) {
    std::vector<corpus::SurveyResponse> out;
    for (const char* speaker_name : {"A", "B"}) {
        const corpus::SpeakerId speaker = speaker_name;
        corpus::SurveyResponse resp;
        resp.conversation_id = conversation_id;
        resp.participant = speaker;
        for (const auto& name : constructs.names) {
            auto stream = rng::derive_stream(cfg.seed, {"survey", speaker, name});
            const double scale = constructs.scales.at(name);
            const double level =
                std::clamp(0.12 + 0.76 * cfg.success_latent + 0.06 * stream.normal(),
                           0.0, 1.0);
            const double rating =
                std::clamp(std::round(1.0 + level * (scale - 1.0)), 1.0, scale);
            resp.ratings[name] = rating;
            resp.scale_max[name] = scale;
        }
        out.push_back(std::move(resp));
    }
    return out;
}

/// Deterministically generate a complete conversation bundle: alternating
/// transcript, per-speaker harmonic-tone audio realizing the latent
/// levels, correlated FAU tracks, and a paired survey.
inline SynthBundle generate(const SynthConfig& cfg, const std::string& conversation_id) {
    cfg.validate();
    SynthBundle bundle;
    bundle.conversation_id = conversation_id;

    const auto latents = latent_turns(cfg);
    for (const auto& t : latents) {
        bundle.transcript.turns.push_back(corpus::Turn{
            t.speaker, t.start_s, t.end_s,
            "turn " + std::to_string(t.index) + " speaker " + t.speaker});
    }
    bundle.transcript.source = "synth:" + conversation_id;

    const double duration = latents.back().end_s + 0.25;
    detail::render_speaker_audio(cfg, latents, "A", bundle.audio["A"], duration);
    detail::render_speaker_audio(cfg, latents, "B", bundle.audio["B"], duration);
    detail::render_fau_pair(cfg, duration, bundle.fau["A"], bundle.fau["B"]);
    bundle.surveys = generate_surveys(cfg, conversation_id);
    return bundle;
}

// ---------------------------------------------------------------------------
// file emission (exactly the layout the analysis pipeline ingests)
// ---------------------------------------------------------------------------

inline std::string fau_to_csv(const corpus::FauTrack& t) {
    std::string out = "frame,timestamp,success";
    for (const char* au : corpus::kAuIds) {
        out += ',';
        out += au;
        out += "_r";
    }
    out += '\n';
    char buf[64];
    for (std::size_t i = 0; i < t.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%zu,%.6f,%d", i + 1, t.timestamps_s[i],
                      t.valid[i] ? 1 : 0);
        out += buf;
        for (const char* au : corpus::kAuIds) {
            std::snprintf(buf, sizeof(buf), ",%.6f", t.channels.at(au)[i]);
            out += buf;
        }
        out += '\n';
    }
    return out;
}

inline std::string surveys_to_csv(const std::vector<corpus::SurveyResponse>& responses,
                                  const std::vector<std::string>& construct_order) {
    std::string out = "conversation_id,participant_id";
    for (const auto& c : construct_order) out += "," + csv::quote_if_needed(c);
    out += '\n';
    char buf[32];
    for (const auto& r : responses) {
        out += r.conversation_id + "," + r.participant;
        for (const auto& c : construct_order) {
            std::snprintf(buf, sizeof(buf), ",%g", r.ratings.at(c));
            out += buf;
        }
        out += '\n';
    }
    return out;
}

/// Written file set for one conversation, paths relative to the corpus root.
struct BundlePaths {
    std::string transcript, audio_a, audio_b, fau_a, fau_b;
};

inline BundlePaths write_bundle(const SynthBundle& bundle, const std::string& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    const std::string& id = bundle.conversation_id;
    BundlePaths paths;
    paths.transcript = id + ".transcript.csv";
    paths.audio_a = id + ".A.wav";
    paths.audio_b = id + ".B.wav";
    paths.fau_a = id + ".A.fau.csv";
    paths.fau_b = id + ".B.fau.csv";

    std::ofstream(dir + "/" + paths.transcript, std::ios::binary)
        << corpus::serialize_transcript(bundle.transcript);
    wav::write_wav_pcm16(dir + "/" + paths.audio_a, bundle.audio.at("A"),
                         corpus::kTargetRateHz);
    wav::write_wav_pcm16(dir + "/" + paths.audio_b, bundle.audio.at("B"),
                         corpus::kTargetRateHz);
    std::ofstream(dir + "/" + paths.fau_a, std::ios::binary)
        << fau_to_csv(bundle.fau.at("A"));
    std::ofstream(dir + "/" + paths.fau_b, std::ios::binary)
        << fau_to_csv(bundle.fau.at("B"));
    return paths;
}

/// Write a whole corpus: one bundle per config (conversation ids c0001...),
/// a manifest and a pooled survey file.
inline void generate_corpus(const std::vector<SynthConfig>& configs,
                            const std::string& out_dir,
                            const pcs::ConstructSet& constructs =
                                pcs::ConstructSet::pcs_default()) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    std::string manifest = "conversation_id,clean,transcript_path,audio_a,audio_b,fau_a,fau_b\n";
    std::vector<corpus::SurveyResponse> all_surveys;
    for (std::size_t i = 0; i < configs.size(); ++i) {
        char idbuf[16];
        std::snprintf(idbuf, sizeof(idbuf), "c%04zu", i + 1);
        const std::string id = idbuf;
        SynthConfig cfg = configs[i];
        const auto bundle = generate(cfg, id);
        const auto paths = write_bundle(bundle, out_dir);
        manifest += id + ",1," + paths.transcript + "," + paths.audio_a + "," +
                    paths.audio_b + "," + paths.fau_a + "," + paths.fau_b + "\n";
        auto surveys = generate_surveys(cfg, id, constructs);
        all_surveys.insert(all_surveys.end(), surveys.begin(), surveys.end());
    }
    std::ofstream(out_dir + "/manifest.csv", std::ios::binary) << manifest;
    std::ofstream(out_dir + "/surveys.csv", std::ios::binary)
        << surveys_to_csv(all_surveys, constructs.names);
}

// ---------------------------------------------------------------------------
// recovery checks (the oracle the self-test and acceptance suites run)
// ---------------------------------------------------------------------------

/// Per-conversation proximity delta recovered from the latent summaries
/// through the proximity metric stack, for n_seeds seeded conversations.
inline std::vector<double> recover_proximity_deltas(std::uint64_t master_seed,
                                                    int n_seeds, double lambda,
                                                    int n_turns = 40) {
    std::vector<double> deltas;
    deltas.reserve(static_cast<std::size_t>(n_seeds));
    for (int s = 0; s < n_seeds; ++s) {
        SynthConfig cfg;
        cfg.seed = rng::derive_seed(master_seed, {"recovery", std::to_string(s)});
        cfg.n_turns = n_turns;
        cfg.coupling_lambda = lambda;
        const auto summaries = latent_summaries(latent_turns(cfg));
        const auto dist = metrics::proximity_distances(
            summaries, metrics::AcousticFeature::f0, metrics::TurnStatKind::mean,
            cfg.seed, "recovery");
        deltas.push_back(metrics::proximity_effect(dist).cliffs_delta);
    }
    return deltas;
}

/// Average over seeds of the first AU channel's mean Fisher z at the given
/// generator correlation.
inline double recover_mean_z(std::uint64_t master_seed, int n_seeds, double rho,
                             double duration_s = 60.0,
                             const std::string& au = "AU06") {
    double acc = 0.0;
    for (int s = 0; s < n_seeds; ++s) {
        SynthConfig cfg;
        cfg.seed = rng::derive_seed(master_seed, {"fau-recovery", std::to_string(s)});
        cfg.fau_rho = rho;
        corpus::FauTrack a, b;
        detail::render_fau_pair(cfg, duration_s, a, b);
        acc += metrics::windowed_synchrony(a, b, au).mean_z;
    }
    return acc / static_cast<double>(n_seeds);
}

struct OracleCheck {
    std::string name;
    bool pass = false;
    std::string detail;
};

struct OracleReport {
    int status = 0;  // 0 pass, 1 fail, 2 nothing to check
    std::vector<OracleCheck> checks;
};

/// Run the three statistical recovery claims the generator guarantees:
/// null coupling gives a centered delta, strong coupling a strongly
/// negative one, and fau_rho round-trips through windowed synchrony.
inline OracleReport oracle_report(std::uint64_t master_seed, int n_seeds = 200) {
    OracleReport report;
    if (n_seeds <= 0) {
        report.status = 2;
        return report;
    }
    char buf[160];

    {
        const auto d0 = recover_proximity_deltas(master_seed, n_seeds, 0.0);
        double mean = 0.0;
        for (double d : d0) mean += d;
        mean /= static_cast<double>(d0.size());
        OracleCheck c;
        c.name = "null coupling: mean delta in [-0.05, 0.05]";
        c.pass = std::fabs(mean) <= 0.05;
        std::snprintf(buf, sizeof(buf), "mean delta = %+.4f over %d seeds", mean, n_seeds);
        c.detail = buf;
        report.checks.push_back(c);
    }
    {
        const auto d9 = recover_proximity_deltas(master_seed, n_seeds, 0.9);
        int strong = 0;
        std::string offenders;
        for (std::size_t i = 0; i < d9.size(); ++i) {
            if (d9[i] < -0.3) ++strong;
            else if (offenders.size() < 60)
                offenders += " " + std::to_string(i);
        }
        const double frac = static_cast<double>(strong) / static_cast<double>(d9.size());
        OracleCheck c;
        c.name = "strong coupling: delta < -0.3 in >= 90% of conversations";
        c.pass = frac >= 0.9;
        std::snprintf(buf, sizeof(buf), "fraction = %.3f", frac);
        c.detail = buf;
        if (!c.pass && !offenders.empty()) c.detail += "; offending seeds:" + offenders;
        report.checks.push_back(c);
    }
    {
        const double target = std::atanh(0.6);
        const double got = recover_mean_z(master_seed, n_seeds, 0.6);
        OracleCheck c;
        c.name = "fau_rho = 0.6: mean_z within atanh(0.6) +- 0.15";
        c.pass = std::fabs(got - target) <= 0.15;
        std::snprintf(buf, sizeof(buf), "mean_z = %.4f, target %.4f", got, target);
        c.detail = buf;
        report.checks.push_back(c);
    }

    for (const auto& c : report.checks)
        if (!c.pass) report.status = 1;
    return report;
}

} // namespace entrain::synth
