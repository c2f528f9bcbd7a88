#pragma once

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"

#include "entrain/config.hpp"
#include "entrain/corpus.hpp"
#include "entrain/entrainment.hpp"
#include "entrain/error.hpp"
#include "entrain/features.hpp"
#include "entrain/pcs.hpp"
#include "entrain/prng.hpp"
#include "entrain/report.hpp"
#include "entrain/stats.hpp"
#include "entrain/turns.hpp"

namespace entrain::pipeline {

// ---------------------------------------------------------------------------
// corpus layout
// ---------------------------------------------------------------------------

struct ManifestEntry {
    std::string id;
    bool clean = true;
    std::string transcript_path;
    std::string audio_a, audio_b;
    std::string fau_a, fau_b;
};

inline std::vector<ManifestEntry> read_manifest(const std::string& path) {
    csv::Table table;
    try {
        table = csv::parse_file(path);
    } catch (const Error&) {
        throw Error(ErrorCode::LayoutError, "cannot read manifest " + path);
    }
    for (const char* col : {"conversation_id", "clean", "transcript_path", "audio_a",
                            "audio_b", "fau_a", "fau_b"})
        if (table.column(col) < 0)
            throw Error(ErrorCode::LayoutError,
                        std::string("manifest missing column ") + col);
    std::vector<ManifestEntry> out;
    for (const auto& row : table.rows) {
        ManifestEntry e;
        e.id = csv::trim(row[table.column("conversation_id")]);
        e.clean = csv::trim(row[table.column("clean")]) == "1";
        e.transcript_path = csv::trim(row[table.column("transcript_path")]);
        e.audio_a = csv::trim(row[table.column("audio_a")]);
        e.audio_b = csv::trim(row[table.column("audio_b")]);
        e.fau_a = csv::trim(row[table.column("fau_a")]);
        e.fau_b = csv::trim(row[table.column("fau_b")]);
        out.push_back(std::move(e));
    }
    return out;
}

/// Speaker token from `<conversation_id>.<speaker_id>.wav` /
/// `<conversation_id>.<speaker_id>.fau.csv`-style names: the last
/// dot-separated token that is not a file-type suffix.
inline std::string speaker_from_path(const std::string& path) {
    std::string name = std::filesystem::path(path).filename().string();
    std::vector<std::string> tokens;
    std::size_t pos = 0;
    while (pos <= name.size()) {
        const std::size_t dot = name.find('.', pos);
        tokens.push_back(name.substr(pos, dot == std::string::npos ? std::string::npos
                                                                   : dot - pos));
        if (dot == std::string::npos) break;
        pos = dot + 1;
    }
    while (tokens.size() > 1 &&
           (tokens.back() == "csv" || tokens.back() == "wav" ||
            tokens.back() == "fau" || tokens.back() == "transcript"))
        tokens.pop_back();
    return tokens.back();
}

// ---------------------------------------------------------------------------
// per-conversation analysis
// ---------------------------------------------------------------------------

struct ConversationArtifacts {
    std::string id;
    turns::TurnStats turn;
    turns::PauseStats pause;
    std::vector<report::ProximityRow> proximity;  // 2 features x 3 statistics
    std::vector<report::SynchronyRow> synchrony;  // 17 AUs
    std::vector<std::string> warnings;
};

namespace detail {

inline const char* kFeatureNames[2] = {"f0", "intensity"};
inline const metrics::AcousticFeature kFeatures[2] = {metrics::AcousticFeature::f0,
                                                      metrics::AcousticFeature::intensity};
inline const char* kStatNames[3] = {"min", "max", "mean"};
inline const metrics::TurnStatKind kStats[3] = {
    metrics::TurnStatKind::min, metrics::TurnStatKind::max, metrics::TurnStatKind::mean};

inline std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace detail

/// Ingest one conversation and compute everything conversation-local:
/// turn/pause statistics, per-turn acoustic summaries, proximity effects
/// and FAU synchrony.
inline ConversationArtifacts analyze_conversation(const std::string& root,
                                                  const ManifestEntry& entry,
                                                  const RunConfig& cfg) {
    ConversationArtifacts art;
    art.id = entry.id;

    const auto transcript =
        corpus::parse_transcript(detail::read_text(root + "/" + entry.transcript_path),
                                 entry.transcript_path);
    if (transcript.turns.empty())
        throw Error(ErrorCode::EmptyTranscript, entry.id);
    const auto speakers = transcript.speakers();

    art.turn = turns::turn_stats(transcript);
    art.pause = turns::pause_stats(transcript, cfg.pause_threshold_s);

    // acoustic features per speaker
    std::map<corpus::SpeakerId, features::FeatureTrack> f0_by, int_by;
    for (const std::string& audio_path : {entry.audio_a, entry.audio_b}) {
        const std::string speaker = speaker_from_path(audio_path);
        if (std::find(speakers.begin(), speakers.end(), speaker) == speakers.end())
            throw Error(ErrorCode::LayoutError,
                        entry.id + ": audio speaker '" + speaker +
                            "' not in transcript");
        const auto track =
            corpus::load_audio_file(root + "/" + audio_path, speaker);
        const auto f0 = features::estimate_f0(track);
        try {
            f0_by[speaker] = features::normalize_pitch(f0);
        } catch (const Error& e) {
            if (e.code() != ErrorCode::InsufficientVoicedFrames) throw;
            art.warnings.push_back(entry.id + ": " + speaker +
                                   " has too few voiced frames; pitch skipped");
            f0_by[speaker] = f0;  // all-invalid summaries downstream
            for (auto& v : f0_by[speaker].valid) v = 0;
        }
        int_by[speaker] = features::compute_intensity(track);
        if (cfg.cache_features) {
            const std::string base = cfg.out_dir + "/features/" + entry.id + "." + speaker;
            std::filesystem::create_directories(cfg.out_dir + "/features");
            report::write_file(base + ".f0.csv", features::feature_to_csv(f0_by[speaker]));
            report::write_file(base + ".intensity.csv",
                               features::feature_to_csv(int_by[speaker]));
        }
    }

    // per-turn summaries on the common 10 ms clock
    std::vector<features::TurnFeatureSummary> summaries;
    for (std::size_t i = 0; i < transcript.turns.size(); ++i) {
        const auto& turn = transcript.turns[i];
        features::TurnFeatureSummary s;
        s.turn_index = static_cast<int>(i);
        s.speaker = turn.speaker;
        s.f0 = features::summarize_turn(f0_by.at(turn.speaker), turn);
        s.intensity = features::summarize_turn(int_by.at(turn.speaker), turn);
        summaries.push_back(std::move(s));
    }

    for (int f = 0; f < 2; ++f) {
        for (int k = 0; k < 3; ++k) {
            report::ProximityRow row;
            row.id = entry.id;
            row.feature = detail::kFeatureNames[f];
            row.statistic = detail::kStatNames[k];
            const auto dist = metrics::proximity_distances(
                summaries, detail::kFeatures[f], detail::kStats[k], cfg.seed, entry.id,
                cfg.k_baseline);
            row.n_pairs = dist.adjacent.size();
            try {
                const auto effect = metrics::proximity_effect(dist);
                row.t = effect.t_stat;
                row.p = effect.p;
                row.delta = effect.cliffs_delta;
            } catch (const Error& e) {
                if (e.code() != ErrorCode::TooFewPairs) throw;
                art.warnings.push_back(entry.id + ": " + row.feature + "/" +
                                       row.statistic + " has too few pairs");
                row.delta = 0.0;
            }
            art.proximity.push_back(std::move(row));
        }
    }

    // FAU synchrony
    std::map<corpus::SpeakerId, corpus::FauTrack> fau_by;
    for (const std::string& fau_path : {entry.fau_a, entry.fau_b}) {
        const std::string speaker = speaker_from_path(fau_path);
        if (std::find(speakers.begin(), speakers.end(), speaker) == speakers.end())
            throw Error(ErrorCode::LayoutError,
                        entry.id + ": FAU speaker '" + speaker + "' not in transcript");
        fau_by[speaker] =
            corpus::parse_fau_table(detail::read_text(root + "/" + fau_path), speaker);
    }
    if (fau_by.size() == 2) {
        const auto& a = fau_by.begin()->second;
        const auto& b = std::next(fau_by.begin())->second;
        for (const auto& e : metrics::synchrony_all_aus(a, b, cfg.window_s)) {
            report::SynchronyRow row;
            row.id = entry.id;
            row.au = e.au;
            row.n_windows = e.n_windows;
            row.mean_z = e.mean_z;
            if (e.n_windows == 0)
                art.warnings.push_back(entry.id + ": " + e.au + " has no usable windows");
            art.synchrony.push_back(std::move(row));
        }
    }
    return art;
}

// ---------------------------------------------------------------------------
// artifact cache
// ---------------------------------------------------------------------------

namespace detail {

inline std::uint64_t hash_file(const std::string& path, std::uint64_t h) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
    char buf[65536];
    while (in.read(buf, sizeof(buf)) || in.gcount() > 0)
        h = rng::fnv1a64_bytes(buf, static_cast<std::size_t>(in.gcount()), h);
    return h;
}

inline std::string cache_key(const std::string& root, const ManifestEntry& e,
                             const RunConfig& cfg) {
    std::uint64_t h = rng::kFnvOffset;
    for (const auto& p :
         {e.transcript_path, e.audio_a, e.audio_b, e.fau_a, e.fau_b})
        h = hash_file(root + "/" + p, h);
    // only parameters that can change the artifacts; jobs and paths do not
    char params[160];
    std::snprintf(params, sizeof(params),
                  "seed=%llu;pause=%.6f;window=%.6f;k=%d",
                  static_cast<unsigned long long>(cfg.seed), cfg.pause_threshold_s,
                  cfg.window_s, cfg.k_baseline);
    h = rng::fnv1a64(params, h);
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

inline nlohmann::json artifacts_to_json(const ConversationArtifacts& a) {
    nlohmann::json j;
    j["id"] = a.id;
    j["turn"] = {{"min", a.turn.min_s}, {"max", a.turn.max_s}, {"mean", a.turn.mean_s},
                 {"total", a.turn.total_s}, {"count", a.turn.count}};
    j["pause"] = {{"min", a.pause.min_s}, {"max", a.pause.max_s},
                  {"mean", a.pause.mean_s}, {"total", a.pause.total_s},
                  {"count", a.pause.count}};
    j["proximity"] = nlohmann::json::array();
    for (const auto& r : a.proximity) {
        nlohmann::json row{{"feature", r.feature}, {"statistic", r.statistic},
                           {"n_pairs", r.n_pairs}, {"delta", r.delta}};
        if (r.t) row["t"] = *r.t;
        if (r.p) row["p"] = *r.p;
        j["proximity"].push_back(row);
    }
    j["synchrony"] = nlohmann::json::array();
    for (const auto& r : a.synchrony)
        j["synchrony"].push_back(
            {{"au", r.au}, {"n_windows", r.n_windows}, {"mean_z", r.mean_z}});
    j["warnings"] = a.warnings;
    return j;
}

inline ConversationArtifacts artifacts_from_json(const nlohmann::json& j) {
    ConversationArtifacts a;
    a.id = j.at("id").get<std::string>();
    const auto& t = j.at("turn");
    a.turn.min_s = t.at("min").get<double>();
    a.turn.max_s = t.at("max").get<double>();
    a.turn.mean_s = t.at("mean").get<double>();
    a.turn.total_s = t.at("total").get<double>();
    a.turn.count = t.at("count").get<std::size_t>();
    const auto& p = j.at("pause");
    a.pause.min_s = p.at("min").get<double>();
    a.pause.max_s = p.at("max").get<double>();
    a.pause.mean_s = p.at("mean").get<double>();
    a.pause.total_s = p.at("total").get<double>();
    a.pause.count = p.at("count").get<std::size_t>();
    for (const auto& row : j.at("proximity")) {
        report::ProximityRow r;
        r.id = a.id;
        r.feature = row.at("feature").get<std::string>();
        r.statistic = row.at("statistic").get<std::string>();
        r.n_pairs = row.at("n_pairs").get<std::size_t>();
        r.delta = row.at("delta").get<double>();
        if (row.contains("t")) r.t = row.at("t").get<double>();
        if (row.contains("p")) r.p = row.at("p").get<double>();
        a.proximity.push_back(std::move(r));
    }
    for (const auto& row : j.at("synchrony")) {
        report::SynchronyRow r;
        r.id = a.id;
        r.au = row.at("au").get<std::string>();
        r.n_windows = row.at("n_windows").get<std::size_t>();
        r.mean_z = row.at("mean_z").get<double>();
        a.synchrony.push_back(std::move(r));
    }
    a.warnings = j.at("warnings").get<std::vector<std::string>>();
    return a;
}

} // namespace detail

/// analyze_conversation behind a content-addressed cache: the key hashes
/// the five input files plus the parameter echo, so parameter sweeps only
/// recompute what changed.
inline ConversationArtifacts analyze_conversation_cached(const std::string& root,
                                                         const ManifestEntry& entry,
                                                         const RunConfig& cfg) {
    const std::string key = detail::cache_key(root, entry, cfg);
    const std::string cache_dir = cfg.out_dir + "/cache";
    const std::string cache_path = cache_dir + "/" + entry.id + ".json";
    if (std::filesystem::exists(cache_path)) {
        try {
            std::ifstream in(cache_path, std::ios::binary);
            nlohmann::json j;
            in >> j;
            if (j.at("key").get<std::string>() == key)
                return detail::artifacts_from_json(j.at("artifacts"));
        } catch (...) {
            // unreadable cache entries are recomputed below
        }
    }
    auto art = analyze_conversation(root, entry, cfg);
    std::filesystem::create_directories(cache_dir);
    nlohmann::json j;
    j["key"] = key;
    j["artifacts"] = detail::artifacts_to_json(art);
    report::write_file(cache_path, j.dump(2) + "\n");
    return art;
}

// ---------------------------------------------------------------------------
// whole-corpus run
// ---------------------------------------------------------------------------

namespace detail {

struct GroupSamples {
    std::vector<double> lsc, hsc;
};

inline report::GroupTestRow mwu_row(const std::string& family, const std::string& row,
                                    const GroupSamples& g, const std::string& path) {
    const auto res = stats::mann_whitney_u(g.lsc, g.hsc);
    report::GroupTestRow out;
    out.family = family;
    out.row = row;
    out.test = "mann_whitney";
    out.n_lsc = g.lsc.size();
    out.n_hsc = g.hsc.size();
    out.statistic = res.statistic;
    out.z = res.z;
    out.p = res.p;
    out.effect = stats::cliffs_delta(g.lsc, g.hsc);
    out.lsc_mean = res.group1->mean;
    out.lsc_sd = res.group1->sd;
    out.hsc_mean = res.group2->mean;
    out.hsc_sd = res.group2->sd;
    out.path = path;
    return out;
}

} // namespace detail

/// Run the whole analysis: ingest every clean conversation, score PCS
/// from the survey file, compare LSC vs HSC per feature family, and BH
/// correct within each family. Group comparisons use only labeled
/// conversations; excluded or failing conversations are listed in the
/// run header.
inline report::ReportBundle run_analyze(const RunConfig& cfg) {
    if (cfg.corpus_root.empty())
        throw Error(ErrorCode::InvalidConfig, "corpus_root not set");
    const std::string root = cfg.corpus_root;
    const auto manifest = read_manifest(root + "/" + cfg.manifest);
    if (manifest.size() < 2)
        throw Error(ErrorCode::LayoutError, "corpus needs at least 2 conversations");

    report::ReportBundle bundle;
    bundle.header.seed = cfg.seed;
    bundle.header.params = cfg.echo();
    bundle.header.notes = {
        "f0: deterministic difference-function pitch tracker, 50-600 Hz, "
        "per-speaker z-normalized",
        "intensity: 32 ms Hann RMS in dB re 2e-5, not per-speaker normalized"};

    // surveys + PCS first (the cohort is the survey file, independent of
    // which conversations get analyzed)
    const auto survey_parse = corpus::parse_surveys(
        detail::read_text(root + "/" + cfg.surveys), cfg.constructs.scales);
    for (const auto& w : survey_parse.warnings)
        bundle.header.excluded.push_back("survey-warning: " + w);
    pcs::ScoreOptions opt;
    opt.low_threshold = cfg.low_threshold;
    opt.high_threshold = cfg.high_threshold;
    opt.combine = cfg.combine;
    const auto records = pcs::score_pcs(survey_parse.responses, cfg.constructs.names, opt);
    std::map<std::string, pcs::SuccessLabel> label_by_conv;
    for (const auto& r : records) {
        bundle.pcs.push_back(report::PcsRow{r.conversation_id, r.participant,
                                            r.pcs, r.conversation_pcs,
                                            pcs::label_name(r.label)});
        label_by_conv[r.conversation_id] = r.label;
    }

    // fan-out per conversation
    struct Slot {
        std::optional<ConversationArtifacts> art;
        std::string error;
        bool skipped_unclean = false;
    };
    std::vector<Slot> slots(manifest.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= manifest.size()) return;
            if (!manifest[i].clean) {
                slots[i].skipped_unclean = true;
                continue;
            }
            try {
                slots[i].art = analyze_conversation_cached(root, manifest[i], cfg);
            } catch (const std::exception& e) {
                slots[i].error = e.what();
            }
        }
    };
    const int jobs = std::max(1, cfg.jobs);
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    std::vector<const ConversationArtifacts*> analyzed;
    for (std::size_t i = 0; i < manifest.size(); ++i) {
        if (slots[i].skipped_unclean) {
            bundle.header.excluded.push_back(manifest[i].id + ": clean=0");
        } else if (!slots[i].error.empty()) {
            bundle.header.excluded.push_back(manifest[i].id + ": " + slots[i].error);
        } else if (slots[i].art) {
            analyzed.push_back(&*slots[i].art);
        }
    }
    for (const auto* art : analyzed) {
        bundle.conversations.push_back(report::ConversationRow{art->id, art->turn,
                                                               art->pause});
        bundle.proximity.insert(bundle.proximity.end(), art->proximity.begin(),
                                art->proximity.end());
        bundle.synchrony.insert(bundle.synchrony.end(), art->synchrony.begin(),
                                art->synchrony.end());
        for (const auto& w : art->warnings)
            bundle.header.excluded.push_back("warning: " + w);
    }

    // group comparisons over labeled, analyzed conversations
    auto group_of = [&](const std::string& id) -> std::optional<pcs::SuccessLabel> {
        const auto it = label_by_conv.find(id);
        if (it == label_by_conv.end()) return std::nullopt;
        return it->second;
    };
    std::size_t n_lsc = 0, n_hsc = 0;
    for (const auto* art : analyzed) {
        const auto label = group_of(art->id);
        if (!label) continue;
        if (*label == pcs::SuccessLabel::LSC) ++n_lsc;
        if (*label == pcs::SuccessLabel::HSC) ++n_hsc;
    }
    if (n_lsc == 0 || n_hsc == 0)
        throw Error(ErrorCode::NoLabeledConversations,
                    "LSC=" + std::to_string(n_lsc) + " HSC=" + std::to_string(n_hsc));

    auto collect = [&](auto getter) {
        detail::GroupSamples g;
        for (const auto* art : analyzed) {
            const auto label = group_of(art->id);
            if (!label || *label == pcs::SuccessLabel::excluded) continue;
            const auto v = getter(*art);
            if (!v) continue;
            if (*label == pcs::SuccessLabel::LSC) g.lsc.push_back(*v);
            else g.hsc.push_back(*v);
        }
        return g;
    };
    auto opt_val = [](double v) { return std::optional<double>(v); };

    std::vector<report::GroupTestRow> rows;
    std::vector<std::size_t> family_begin;

    // turn + pause families (raw per-conversation statistics)
    for (const char* family_name : {"turn", "pause"}) {
        const std::string family = family_name;
        family_begin.push_back(rows.size());
        const bool is_turn = family == "turn";
        const std::vector<std::pair<std::string, std::function<std::optional<double>(
                                                     const ConversationArtifacts&)>>>
            stats_list = {
                {"min", [&](const ConversationArtifacts& a) {
                     return opt_val(is_turn ? a.turn.min_s : a.pause.min_s);
                 }},
                {"max", [&](const ConversationArtifacts& a) {
                     return opt_val(is_turn ? a.turn.max_s : a.pause.max_s);
                 }},
                {"mean", [&](const ConversationArtifacts& a) {
                     return opt_val(is_turn ? a.turn.mean_s : a.pause.mean_s);
                 }},
                {"total", [&](const ConversationArtifacts& a) {
                     return opt_val(is_turn ? a.turn.total_s : a.pause.total_s);
                 }},
                {"count", [&](const ConversationArtifacts& a) {
                     return opt_val(static_cast<double>(is_turn ? a.turn.count
                                                                : a.pause.count));
                 }},
            };
        for (const auto& [name, getter] : stats_list) {
            const auto g = collect(getter);
            if (g.lsc.empty() || g.hsc.empty()) continue;
            rows.push_back(detail::mwu_row(family, name, g, "raw_stats"));
        }
    }

    // f0 + intensity families (Mann-Whitney on per-conversation deltas)
    for (const char* family_name : {"f0", "intensity"}) {
        const std::string family = family_name;
        family_begin.push_back(rows.size());
        for (const char* stat : {"min", "max", "mean"}) {
            const auto g = collect([&](const ConversationArtifacts& a)
                                       -> std::optional<double> {
                for (const auto& r : a.proximity)
                    if (r.feature == family && r.statistic == stat && r.n_pairs >= 5)
                        return r.delta;
                return std::nullopt;
            });
            if (g.lsc.empty() || g.hsc.empty()) continue;
            rows.push_back(detail::mwu_row(family, stat, g, "proximity_delta"));
        }
    }

    // FAU synchrony family (Welch's t on Fisher-z means), ordered by p
    family_begin.push_back(rows.size());
    for (const char* au : corpus::kAuIds) {
        const auto g = collect([&](const ConversationArtifacts& a)
                                   -> std::optional<double> {
            for (const auto& r : a.synchrony)
                if (r.au == au && r.n_windows > 0) return r.mean_z;
            return std::nullopt;
        });
        if (g.lsc.size() < 2 || g.hsc.size() < 2) continue;
        try {
            const auto res = stats::welch_t(g.lsc, g.hsc);
            report::GroupTestRow row;
            row.family = "fau_synchrony";
            row.row = au;
            row.test = "welch_t";
            row.n_lsc = g.lsc.size();
            row.n_hsc = g.hsc.size();
            row.statistic = res.statistic;
            row.df = res.df;
            row.p = res.p;
            row.effect = stats::cliffs_delta(g.lsc, g.hsc);
            row.lsc_mean = res.group1->mean;
            row.lsc_sd = res.group1->sd;
            row.hsc_mean = res.group2->mean;
            row.hsc_sd = res.group2->sd;
            row.path = "raw_stats";
            rows.push_back(std::move(row));
        } catch (const Error& e) {
            if (e.code() != ErrorCode::ZeroVarianceBothGroups) throw;
            bundle.header.excluded.push_back(std::string("warning: ") + au +
                                             " synchrony constant in both groups");
        }
    }
    std::sort(rows.begin() + static_cast<long>(family_begin.back()), rows.end(),
              [](const report::GroupTestRow& a, const report::GroupTestRow& b) {
                  if (a.p != b.p) return a.p < b.p;
                  return a.row < b.row;
              });

    // BH correction within each family
    family_begin.push_back(rows.size());
    for (std::size_t f = 0; f + 1 < family_begin.size(); ++f) {
        const std::size_t lo = family_begin[f], hi = family_begin[f + 1];
        if (lo == hi) continue;
        std::vector<double> ps;
        for (std::size_t i = lo; i < hi; ++i) ps.push_back(rows[i].p);
        const auto qs = stats::bh_fdr(ps);
        for (std::size_t i = lo; i < hi; ++i) rows[i].q = qs[i - lo];
    }
    bundle.group_tests = std::move(rows);
    return bundle;
}

} // namespace entrain::pipeline
