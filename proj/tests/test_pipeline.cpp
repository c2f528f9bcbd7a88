#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "entrain/config.hpp"
#include "entrain/pipeline.hpp"
#include "entrain/report.hpp"
#include "entrain/selftest.hpp"
#include "entrain/synth.hpp"

using namespace entrain;

namespace {

/// Mixed corpus: n_high coupled high-success bundles + n_low null
/// low-success ones, written under dir.
void write_mixed_corpus(const std::string& dir, int n_high, int n_low,
                        std::uint64_t seed, int n_turns = 8) {
    std::vector<synth::SynthConfig> configs;
    for (int i = 0; i < n_high; ++i) {
        synth::SynthConfig c;
        c.seed = rng::derive_seed(seed, {"high", std::to_string(i)});
        c.n_turns = n_turns;
        c.coupling_lambda = 0.9;
        c.fau_rho = 0.6;
        c.mean_gap_s = 0.4;
        c.success_latent = 0.95;
        configs.push_back(c);
    }
    for (int i = 0; i < n_low; ++i) {
        synth::SynthConfig c;
        c.seed = rng::derive_seed(seed, {"low", std::to_string(i)});
        c.n_turns = n_turns;
        c.coupling_lambda = 0.0;
        c.fau_rho = 0.0;
        c.mean_gap_s = 1.2;
        c.success_latent = 0.15;
        configs.push_back(c);
    }
    synth::generate_corpus(configs, dir);
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    return std::string(std::istreambuf_iterator<char>(in),
                       std::istreambuf_iterator<char>());
}

struct TempDir {
    std::string path;
    explicit TempDir(std::string p) : path(std::move(p)) {
        std::filesystem::remove_all(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
};

} // namespace

// ---------------------------------------------------------------------------
// config
// ---------------------------------------------------------------------------

TEST_CASE("config: defaults match the analysis conventions") {
    const auto cfg = pipeline::parse_config("");
    CHECK(cfg.pause_threshold_s == doctest::Approx(0.6));
    CHECK(cfg.window_s == doctest::Approx(5.0));
    CHECK(cfg.k_baseline == 10);
    CHECK(cfg.low_threshold == doctest::Approx(0.6));
    CHECK(cfg.high_threshold == doctest::Approx(0.9));
    CHECK(cfg.constructs.names.size() == 11);
}

TEST_CASE("config: overrides, comments and scale declarations") {
    const auto cfg = pipeline::parse_config(
        "# comment\n"
        "corpus_root=/data/corpus\n"
        "pause_threshold_s=0.8\n"
        "seed=42\n"
        "jobs=4\n"
        "combine=min\n"
        "scale.Affect=100\n");
    CHECK(cfg.corpus_root == "/data/corpus");
    CHECK(cfg.pause_threshold_s == doctest::Approx(0.8));
    CHECK(cfg.seed == 42);
    CHECK(cfg.jobs == 4);
    CHECK(cfg.combine == pcs::ConversationCombine::min);
    CHECK(cfg.constructs.scales.at("Affect") == doctest::Approx(100.0));
}

TEST_CASE("config: unknown keys and bad thresholds are errors") {
    CHECK_THROWS_AS((void)pipeline::parse_config("not_a_key=1\n"), Error);
    CHECK_THROWS_AS((void)pipeline::parse_config("low_threshold=0.95\n"), Error);
    CHECK_THROWS_AS((void)pipeline::parse_config("jobs=zero\n"), Error);
    try {
        (void)pipeline::parse_config("mystery=7\n");
        FAIL("expected throw");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::InvalidConfig);
    }
}

// ---------------------------------------------------------------------------
// manifest + layout
// ---------------------------------------------------------------------------

TEST_CASE("manifest: speaker extraction from bundle file names") {
    CHECK(pipeline::speaker_from_path("c0001.A.wav") == "A");
    CHECK(pipeline::speaker_from_path("dir/c0001.B.wav") == "B");
    CHECK(pipeline::speaker_from_path("c0001.A.fau.csv") == "A");
    CHECK(pipeline::speaker_from_path("deep/dir/c0001.spk2.fau.csv") == "spk2");
}

TEST_CASE("manifest: missing file or column is a layout error") {
    try {
        (void)pipeline::read_manifest("does_not_exist/manifest.csv");
        FAIL("expected throw");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::LayoutError);
    }
    const std::string dir = "layout_tmp";
    std::filesystem::create_directories(dir);
    report::write_file(dir + "/manifest.csv", "conversation_id,clean\nc1,1\n");
    try {
        (void)pipeline::read_manifest(dir + "/manifest.csv");
        FAIL("expected throw");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::LayoutError);
    }
    std::filesystem::remove_all(dir);
}

// ---------------------------------------------------------------------------
// end-to-end analysis
// ---------------------------------------------------------------------------

TEST_CASE("analyze: mixed corpus produces the full report bundle") {
    TempDir corpus("pipe_corpus_tmp");
    TempDir out("pipe_out_tmp");
    write_mixed_corpus(corpus.path, 3, 3, 7001);

    pipeline::RunConfig cfg;
    cfg.corpus_root = corpus.path;
    cfg.out_dir = out.path;
    cfg.seed = 99;
    cfg.jobs = 2;
    const auto bundle = pipeline::run_analyze(cfg);

    CHECK(bundle.conversations.size() == 6);
    CHECK(bundle.proximity.size() == 6 * 6);
    CHECK(bundle.synchrony.size() == 6 * 17);
    CHECK(bundle.pcs.size() == 12);

    // labels: highs HSC, lows LSC
    std::size_t lsc = 0, hsc = 0;
    for (const auto& r : bundle.pcs) {
        if (r.label == "LSC") ++lsc;
        if (r.label == "HSC") ++hsc;
    }
    CHECK(lsc == 6);
    CHECK(hsc == 6);

    // group tests exist for every family and q stays within [min p, 1]
    std::map<std::string, std::size_t> family_rows;
    std::map<std::string, double> family_min_p;
    for (const auto& r : bundle.group_tests) {
        family_rows[r.family] += 1;
        if (!family_min_p.count(r.family)) family_min_p[r.family] = r.p;
        family_min_p[r.family] = std::min(family_min_p[r.family], r.p);
        CHECK(r.q <= 1.0);
    }
    for (const auto& r : bundle.group_tests)
        CHECK(r.q >= family_min_p[r.family] - 1e-15);
    CHECK(family_rows["turn"] == 5);
    CHECK(family_rows["pause"] == 5);
    CHECK(family_rows["f0"] == 3);
    CHECK(family_rows["intensity"] == 3);
    CHECK(family_rows["fau_synchrony"] == 17);

    // fau family ordered by ascending p
    double prev = -1.0;
    for (const auto& r : bundle.group_tests) {
        if (r.family != "fau_synchrony") continue;
        CHECK(r.p >= prev);
        prev = r.p;
    }

    // coupled highs: more negative delta and higher synchrony than lows
    for (const auto& r : bundle.group_tests) {
        if (r.family == "f0" && r.row == "mean") CHECK(r.hsc_mean < r.lsc_mean);
        if (r.family == "fau_synchrony") CHECK(r.hsc_mean > r.lsc_mean);
    }
}

TEST_CASE("analyze: byte-identical reports across runs, cache warm") {
    TempDir corpus("pipe_det_corpus");
    TempDir out("pipe_det_out");
    write_mixed_corpus(corpus.path, 2, 2, 5120, 6);

    pipeline::RunConfig cfg;
    cfg.corpus_root = corpus.path;
    cfg.out_dir = out.path;
    cfg.seed = 7;

    const auto b1 = pipeline::run_analyze(cfg);
    report::emit_reports(b1, out.path, report::Format::csv);
    std::map<std::string, std::string> first;
    for (const char* name : {"turn_pause.csv", "proximity.csv", "synchrony.csv",
                             "pcs.csv", "group_tests.csv"})
        first[name] = slurp(out.path + "/" + std::string(name));

    // second run hits the cache and must reproduce the same bytes
    const auto b2 = pipeline::run_analyze(cfg);
    report::emit_reports(b2, out.path, report::Format::csv);
    for (const auto& [name, content] : first)
        CHECK(slurp(out.path + "/" + name) == content);
    CHECK(std::filesystem::exists(out.path + "/cache"));
}

TEST_CASE("analyze: removing an excluded conversation changes no group number") {
    TempDir corpus("pipe_excl_corpus");
    TempDir out1("pipe_excl_out1");
    TempDir out2("pipe_excl_out2");

    std::vector<synth::SynthConfig> configs;
    for (int i = 0; i < 5; ++i) {
        synth::SynthConfig c;
        c.seed = 9000 + i;
        c.n_turns = 6;
        c.success_latent = (i < 2) ? 0.95 : (i < 4 ? 0.1 : 0.7);  // last one mid
        c.coupling_lambda = (i < 2) ? 0.8 : 0.0;
        configs.push_back(c);
    }
    synth::generate_corpus(configs, corpus.path);

    pipeline::RunConfig cfg;
    cfg.corpus_root = corpus.path;
    cfg.out_dir = out1.path;
    const auto full = pipeline::run_analyze(cfg);

    // confirm the mid conversation is excluded by label
    bool mid_excluded = false;
    for (const auto& r : full.pcs)
        if (r.conversation_id == "c0005" && r.label == "excluded") mid_excluded = true;
    REQUIRE(mid_excluded);

    // drop it from the manifest only; the survey cohort stays the same
    auto manifest = slurp(corpus.path + "/manifest.csv");
    std::string trimmed;
    std::istringstream lines(manifest);
    std::string line;
    while (std::getline(lines, line))
        if (line.find("c0005") == std::string::npos) trimmed += line + "\n";
    report::write_file(corpus.path + "/manifest.csv", trimmed);

    cfg.out_dir = out2.path;
    const auto reduced = pipeline::run_analyze(cfg);

    REQUIRE(full.group_tests.size() == reduced.group_tests.size());
    for (std::size_t i = 0; i < full.group_tests.size(); ++i) {
        CHECK(full.group_tests[i].family == reduced.group_tests[i].family);
        CHECK(full.group_tests[i].row == reduced.group_tests[i].row);
        CHECK(full.group_tests[i].statistic == reduced.group_tests[i].statistic);
        CHECK(full.group_tests[i].p == reduced.group_tests[i].p);
        CHECK(full.group_tests[i].q == reduced.group_tests[i].q);
    }
}

TEST_CASE("analyze: no labeled conversations is an error") {
    TempDir corpus("pipe_nolabel_corpus");
    TempDir out("pipe_nolabel_out");
    write_mixed_corpus(corpus.path, 1, 1, 3303, 6);
    // survey cohort engineered so no conversation reaches the HSC band:
    // participant pcs come out {0, 0.625, 1, 0.25} -> conversation means
    // 0.3125 (LSC) and 0.625 (excluded)
    std::string surveys = "conversation_id,participant_id";
    const auto constructs = pcs::ConstructSet::pcs_default();
    for (const auto& name : constructs.names) surveys += "," + name;
    surveys += "\n";
    auto row = [&](const std::string& conv, const std::string& who, double frac) {
        surveys += conv + "," + who;
        for (const auto& name : constructs.names) {
            const double scale = constructs.scales.at(name);
            surveys += "," + std::to_string(1.0 + frac * (scale - 1.0));
        }
        surveys += "\n";
    };
    row("c0001", "A", 0.0);
    row("c0001", "B", 0.625);
    row("c0002", "A", 1.0);
    row("c0002", "B", 0.25);
    report::write_file(corpus.path + "/surveys.csv", surveys);

    pipeline::RunConfig cfg;
    cfg.corpus_root = corpus.path;
    cfg.out_dir = out.path;
    try {
        (void)pipeline::run_analyze(cfg);
        FAIL("expected throw");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::NoLabeledConversations);
    }
}

// ---------------------------------------------------------------------------
// report emission
// ---------------------------------------------------------------------------

namespace {

report::ReportBundle fidelity_fixture() {
    report::ReportBundle b;
    b.header.seed = 1;
    b.header.params = {{"pause_threshold_s", "0.600"}};
    report::GroupTestRow count_row;
    count_row.family = "turn";
    count_row.row = "count";
    count_row.test = "mann_whitney";
    count_row.n_lsc = 35;
    count_row.n_hsc = 91;
    count_row.statistic = 545.0;
    count_row.z = -5.71;
    count_row.p = 1.18e-8;
    count_row.q = 3.54e-8;
    count_row.path = "raw_stats";
    b.group_tests.push_back(count_row);
    return b;
}

} // namespace

TEST_CASE("report: group-test rendering matches the fixed formats") {
    const auto b = fidelity_fixture();
    const auto csv = report::render_group_tests_csv(b);
    CHECK(csv.find("turn,count,mann_whitney,35,91,545.000,-5.710,,1.18e-08,3.54e-08") !=
          std::string::npos);
    // two renders are byte-identical
    CHECK(csv == report::render_group_tests_csv(b));
}

TEST_CASE("report: bundle json round-trips to identical csv output") {
    TempDir out("report_rt_tmp");
    auto b = fidelity_fixture();
    b.proximity.push_back(
        report::ProximityRow{"c1", "f0", "mean", 12, -2.5, 0.021, -0.326});
    b.synchrony.push_back(report::SynchronyRow{"c1", "AU06", 42, 0.71});
    b.pcs.push_back(report::PcsRow{"c1", "p1", 0.93, 0.95, "HSC"});
    b.conversations.push_back(report::ConversationRow{
        "c1", turns::TurnStats{0.4, 9.0, 2.5, 60.0, 24},
        turns::PauseStats{0.7, 2.0, 1.1, 5.5, 5}});
    report::write_bundle_json(b, out.path);
    const auto back = report::read_bundle_json(out.path);
    CHECK(report::render_group_tests_csv(back) == report::render_group_tests_csv(b));
    CHECK(report::render_proximity_csv(back) == report::render_proximity_csv(b));
    CHECK(report::render_synchrony_csv(back) == report::render_synchrony_csv(b));
    CHECK(report::render_pcs_csv(back) == report::render_pcs_csv(b));
    CHECK(report::render_turn_pause_csv(back) == report::render_turn_pause_csv(b));
}

TEST_CASE("report: json format emits one file per table") {
    TempDir out("report_json_tmp");
    const auto files = report::emit_reports(fidelity_fixture(), out.path,
                                            report::Format::json_format);
    CHECK(files.size() == 5);
    for (const auto& f : files) CHECK(std::filesystem::exists(f));
    const auto gt = slurp(out.path + "/group_tests.json");
    CHECK(gt.find("\"statistic\": 545.0") != std::string::npos);
}

// ---------------------------------------------------------------------------
// selftest
// ---------------------------------------------------------------------------

TEST_CASE("selftest: clean build passes, nothing-to-check reports 2") {
    std::ostringstream log;
    CHECK(selftest::run_selftest(log, true, 30) == 0);
    CHECK(log.str().find("[FAIL]") == std::string::npos);
    std::ostringstream empty_log;
    CHECK(selftest::run_selftest(empty_log, false, 0) == 2);
}

TEST_CASE("selftest: a perturbed mann-whitney implementation is caught") {
    std::ostringstream log;
    auto broken = [](std::span<const double> x, std::span<const double> y) {
        auto r = stats::mann_whitney_u(x, y);
        r.p = std::min(1.0, r.p * 1.05 + 1e-6);  // subtle inflation
        return r;
    };
    CHECK(selftest::run_selftest(log, true, 0, 20240808, broken) == 1);
    CHECK(log.str().find("[FAIL]") != std::string::npos);
}

TEST_CASE("analyze: a corrupt conversation is excluded, the run continues") {
    TempDir corpus("pipe_corrupt_corpus");
    TempDir out("pipe_corrupt_out");
    write_mixed_corpus(corpus.path, 2, 2, 616, 6);
    // corrupt one transcript: a 2 s cross-speaker overlap
    report::write_file(corpus.path + "/c0002.transcript.csv",
                       "turn_id,speaker,start,stop,utterance\n"
                       "0,A,0.0,5.0,a\n1,B,3.0,8.0,b\n");
    pipeline::RunConfig cfg;
    cfg.corpus_root = corpus.path;
    cfg.out_dir = out.path;
    const auto bundle = pipeline::run_analyze(cfg);
    CHECK(bundle.conversations.size() == 3);
    bool listed = false;
    for (const auto& e : bundle.header.excluded)
        if (e.find("c0002") != std::string::npos &&
            e.find("UnsortedAfterMerge") != std::string::npos)
            listed = true;
    CHECK(listed);
}

TEST_CASE("config: constructs override replaces the scored set") {
    const auto cfg = pipeline::parse_config(
        "constructs=Warmth,Rapport\nscale.Warmth=7\nscale.Rapport=9\n");
    REQUIRE(cfg.constructs.names.size() == 2);
    CHECK(cfg.constructs.names[0] == "Warmth");
    CHECK(cfg.constructs.scales.at("Warmth") == doctest::Approx(7.0));
    CHECK(cfg.constructs.scales.at("Rapport") == doctest::Approx(9.0));
}
