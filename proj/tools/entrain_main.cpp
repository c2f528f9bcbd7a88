// entrain -- multimodal conversation entrainment toolkit CLI.
//
// Subcommands:
//   analyze        run the full corpus analysis from a config file
//   report         re-render report tables from a stored bundle
//   pcs fit|score  success-model fitting and scoring from survey files
//   synth generate write a synthetic corpus with known ground truth
//   selftest       statistical oracle suites + generator recovery checks
//   stats selftest the statistical oracle suite alone

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "entrain/config.hpp"
#include "entrain/pcs.hpp"
#include "entrain/pipeline.hpp"
#include "entrain/report.hpp"
#include "entrain/selftest.hpp"
#include "entrain/synth.hpp"

using namespace entrain;

namespace {

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

nlohmann::json model_to_json(const pcs::PcsModel& model, std::uint64_t seed) {
    nlohmann::json j;
    j["constructs"] = model.constructs;
    j["loadings_pc1"] = model.loadings_pc1;
    j["loadings_pc2"] = model.loadings_pc2;
    j["explained_pc1"] = model.explained_pc1;
    j["explained_pc2"] = model.explained_pc2;
    j["retained"] = model.retained;
    j["rescale_lo"] = nullptr;  // filled in by `pcs score`
    j["rescale_hi"] = nullptr;
    j["seed"] = seed;
    return j;
}

pcs::PcsModel model_from_json(const nlohmann::json& j) {
    pcs::PcsModel m;
    m.constructs = j.at("constructs").get<std::vector<std::string>>();
    m.loadings_pc1 = j.at("loadings_pc1").get<std::vector<double>>();
    m.loadings_pc2 = j.at("loadings_pc2").get<std::vector<double>>();
    m.explained_pc1 = j.at("explained_pc1").get<double>();
    m.explained_pc2 = j.at("explained_pc2").get<double>();
    m.retained = j.at("retained").get<std::vector<std::string>>();
    return m;
}

std::map<std::string, double> registry_for(const std::vector<std::string>& names) {
    const auto full = pcs::ConstructSet::survey_full();
    std::map<std::string, double> registry;
    for (const auto& name : names) {
        const auto it = full.scales.find(name);
        registry[name] = (it != full.scales.end()) ? it->second : 100.0;
    }
    return registry;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"multimodal conversation entrainment toolkit"};
    app.require_subcommand(1);

    std::uint64_t seed_flag = 0;
    bool seed_set = false;
    int jobs_flag = 0;
    app.add_option("--seed", seed_flag, "master seed override")
        ->each([&](const std::string&) { seed_set = true; });
    app.add_option("--jobs", jobs_flag, "worker threads for per-conversation fan-out");

    // ---- analyze ----
    auto* analyze = app.add_subcommand("analyze", "run the corpus analysis");
    std::string config_path;
    std::string analyze_format = "csv";
    analyze->add_option("--config", config_path, "key=value run config")->required();
    analyze->add_option("--format", analyze_format, "report format: csv, json or both")
        ->check(CLI::IsMember({"csv", "json", "both"}));

    // ---- report ----
    auto* report_cmd = app.add_subcommand("report", "re-render a stored bundle");
    std::string bundle_dir;
    std::string report_format = "csv";
    report_cmd->add_option("--bundle", bundle_dir, "directory holding bundle.json")
        ->required();
    report_cmd->add_option("--format", report_format, "csv or json")
        ->check(CLI::IsMember({"csv", "json"}));

    // ---- pcs ----
    auto* pcs_cmd = app.add_subcommand("pcs", "success scoring");
    pcs_cmd->require_subcommand(1);
    auto* pcs_fit = pcs_cmd->add_subcommand("fit", "fit the success model by PCA");
    std::string fit_surveys, fit_out = "pcs_model.json";
    std::size_t fit_min_responses = pcs::kMinFitResponses;
    pcs_fit->add_option("--surveys", fit_surveys, "21-construct survey CSV")->required();
    pcs_fit->add_option("--out", fit_out, "model output path");
    pcs_fit->add_option("--min-responses", fit_min_responses,
                        "minimum complete responses");
    auto* pcs_score = pcs_cmd->add_subcommand("score", "score surveys into pcs.csv");
    std::string score_surveys, score_out = "pcs.csv", score_model;
    double score_low = pcs::kDefaultLowThreshold;
    double score_high = pcs::kDefaultHighThreshold;
    std::string score_combine = "mean";
    pcs_score->add_option("--surveys", score_surveys, "survey CSV")->required();
    pcs_score->add_option("--model", score_model, "model json from `pcs fit`");
    pcs_score->add_option("--out", score_out, "output CSV path");
    pcs_score->add_option("--low", score_low, "LSC threshold");
    pcs_score->add_option("--high", score_high, "HSC threshold");
    pcs_score->add_option("--combine", score_combine, "conversation score: mean or min")
        ->check(CLI::IsMember({"mean", "min"}));

    // ---- synth ----
    auto* synth_cmd = app.add_subcommand("synth", "synthetic corpus generation");
    synth_cmd->require_subcommand(1);
    auto* synth_gen = synth_cmd->add_subcommand("generate", "write synthetic bundles");
    int gen_n = 1;
    double gen_lambda = 0.0, gen_rho = 0.0, gen_success = 0.5;
    double gen_mean_turn = 1.2, gen_mean_gap = 0.7;
    int gen_turns = 40;
    std::string gen_out;
    synth_gen->add_option("--n", gen_n, "number of bundles")->check(CLI::Range(1, 10000));
    synth_gen->add_option("--lambda", gen_lambda, "acoustic coupling in [0,1]");
    synth_gen->add_option("--rho", gen_rho, "FAU cross-speaker correlation");
    synth_gen->add_option("--success", gen_success, "survey success latent in [0,1]");
    synth_gen->add_option("--turns", gen_turns, "turns per conversation");
    synth_gen->add_option("--mean-turn", gen_mean_turn, "mean turn seconds");
    synth_gen->add_option("--mean-gap", gen_mean_gap, "mean gap seconds");
    synth_gen->add_option("--out", gen_out, "output corpus directory")->required();

    // ---- selftest ----
    auto* selftest_cmd =
        app.add_subcommand("selftest", "oracle suites + generator recovery checks");
    int selftest_seeds = 60;
    std::string fixtures_dir;
    selftest_cmd->add_option("--synth-seeds", selftest_seeds,
                             "seeds for the recovery checks (0 disables)");
    selftest_cmd->add_option("--fixtures", fixtures_dir,
                             "optional fixture directory (status 2 when missing)");

    // ---- stats selftest ----
    auto* stats_cmd = app.add_subcommand("stats", "statistical kernels");
    stats_cmd->require_subcommand(1);
    auto* stats_selftest = stats_cmd->add_subcommand(
        "selftest", "run the statistical oracle suite");
    (void)stats_selftest;

    // let --seed / --jobs appear after the subcommand name
    for (auto* sub : app.get_subcommands({})) {
        sub->fallthrough();
        for (auto* nested : sub->get_subcommands({})) nested->fallthrough();
    }

    CLI11_PARSE(app, argc, argv);

    try {
        if (*analyze) {
            auto cfg = pipeline::load_config_file(config_path);
            if (seed_set) cfg.seed = seed_flag;
            if (jobs_flag > 0) cfg.jobs = jobs_flag;
            const auto bundle = pipeline::run_analyze(cfg);
            report::write_bundle_json(bundle, cfg.out_dir);
            std::vector<std::string> files;
            if (analyze_format != "json") {
                const auto f = report::emit_reports(bundle, cfg.out_dir,
                                                    report::Format::csv);
                files.insert(files.end(), f.begin(), f.end());
            }
            if (analyze_format != "csv") {
                const auto f = report::emit_reports(bundle, cfg.out_dir,
                                                    report::Format::json_format);
                files.insert(files.end(), f.begin(), f.end());
            }
            std::size_t lsc = 0, hsc = 0, excluded = 0;
            std::set<std::string> seen;
            for (const auto& r : bundle.pcs) {
                if (!seen.insert(r.conversation_id).second) continue;
                if (r.label == "LSC") ++lsc;
                else if (r.label == "HSC") ++hsc;
                else ++excluded;
            }
            std::printf("analyzed %zu conversations (LSC %zu, HSC %zu, excluded %zu)\n",
                        bundle.conversations.size(), lsc, hsc, excluded);
            for (const auto& f : files) std::printf("wrote %s\n", f.c_str());
            std::printf("wrote %s/bundle.json\n", cfg.out_dir.c_str());
            return 0;
        }
        if (*report_cmd) {
            const auto bundle = report::read_bundle_json(bundle_dir);
            const auto files = report::emit_reports(
                bundle, bundle_dir,
                report_format == "json" ? report::Format::json_format
                                        : report::Format::csv);
            for (const auto& f : files) std::printf("wrote %s\n", f.c_str());
            return 0;
        }
        if (*pcs_fit) {
            const auto constructs = pcs::ConstructSet::survey_full();
            const auto parsed =
                corpus::parse_surveys(read_text_file(fit_surveys), constructs.scales);
            for (const auto& w : parsed.warnings)
                std::fprintf(stderr, "warning: %s\n", w.c_str());
            const auto model =
                pcs::fit_pcs_model(parsed.responses, constructs, fit_min_responses);
            report::write_file(
                fit_out,
                model_to_json(model, seed_set ? seed_flag : 0).dump(2) + "\n");
            std::printf("retained %zu of %zu constructs; wrote %s\n",
                        model.retained.size(), model.constructs.size(), fit_out.c_str());
            return 0;
        }
        if (*pcs_score) {
            std::vector<std::string> retained = pcs::ConstructSet::pcs_default().names;
            nlohmann::json model_json;
            if (!score_model.empty()) {
                model_json = nlohmann::json::parse(read_text_file(score_model));
                retained = model_from_json(model_json).retained;
            }
            const auto parsed = corpus::parse_surveys(read_text_file(score_surveys),
                                                      registry_for(retained));
            for (const auto& w : parsed.warnings)
                std::fprintf(stderr, "warning: %s\n", w.c_str());
            pcs::ScoreOptions opt;
            opt.low_threshold = score_low;
            opt.high_threshold = score_high;
            opt.combine = score_combine == "min" ? pcs::ConversationCombine::min
                                                 : pcs::ConversationCombine::mean;
            const auto outcome = pcs::score_pcs_full(parsed.responses, retained, opt);
            report::ReportBundle b;
            b.header.seed = seed_set ? seed_flag : 0;
            for (const auto& r : outcome.records)
                b.pcs.push_back(report::PcsRow{r.conversation_id, r.participant, r.pcs,
                                               r.conversation_pcs,
                                               pcs::label_name(r.label)});
            report::write_file(score_out, report::render_pcs_csv(b));
            if (!score_model.empty()) {
                // record the cohort rescaling bounds next to the loadings
                model_json["rescale_lo"] = outcome.rescale_lo;
                model_json["rescale_hi"] = outcome.rescale_hi;
                if (seed_set) model_json["seed"] = seed_flag;
                report::write_file(score_model, model_json.dump(2) + "\n");
            }
            std::printf("scored %zu participants; wrote %s\n", outcome.records.size(),
                        score_out.c_str());
            return 0;
        }
        if (*synth_gen) {
            std::vector<synth::SynthConfig> configs;
            const std::uint64_t master = seed_set ? seed_flag : 1;
            for (int i = 0; i < gen_n; ++i) {
                synth::SynthConfig c;
                c.seed = rng::derive_seed(master, {"bundle", std::to_string(i)});
                c.n_turns = gen_turns;
                c.coupling_lambda = gen_lambda;
                c.fau_rho = gen_rho;
                c.success_latent = gen_success;
                c.mean_turn_s = gen_mean_turn;
                c.mean_gap_s = gen_mean_gap;
                c.validate();
                configs.push_back(c);
            }
            synth::generate_corpus(configs, gen_out);
            std::printf("wrote %d bundle(s) under %s (seed %llu)\n", gen_n,
                        gen_out.c_str(), static_cast<unsigned long long>(master));
            return 0;
        }
        if (*selftest_cmd) {
            if (!fixtures_dir.empty() && !std::filesystem::exists(fixtures_dir)) {
                std::printf("fixtures directory %s missing: nothing to check\n",
                            fixtures_dir.c_str());
                return 2;
            }
            return selftest::run_selftest(std::cout, true, selftest_seeds,
                                          seed_set ? seed_flag : 20240808);
        }
        if (*stats_selftest) {
            return selftest::run_selftest(std::cout, true, 0);
        }
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
