#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "entrain/csv.hpp"
#include "entrain/error.hpp"
#include "entrain/pcs.hpp"

namespace entrain::pipeline {

/// Run parameters, defaults matching the analysis conventions baked into
/// the report contracts (0.6 s pause threshold, 5 s synchrony windows,
/// 10 baseline draws, 0.6 / 0.9 success cutoffs).
struct RunConfig {
    std::string corpus_root;
    std::string out_dir = "out";
    std::string surveys = "surveys.csv";  // relative to corpus_root
    std::string manifest = "manifest.csv";
    double pause_threshold_s = 0.6;
    double window_s = 5.0;
    int k_baseline = 10;
    double low_threshold = 0.6;
    double high_threshold = 0.9;
    std::uint64_t seed = 1;
    int jobs = 1;
    bool cache_features = false;
    pcs::ConversationCombine combine = pcs::ConversationCombine::mean;
    pcs::ConstructSet constructs = pcs::ConstructSet::pcs_default();

    std::vector<std::pair<std::string, std::string>> echo() const {
        char buf[40];
        auto num = [&buf](double v) {
            std::snprintf(buf, sizeof(buf), "%.3f", v);
            return std::string(buf);
        };
        return {
            {"corpus_root", corpus_root},
            {"pause_threshold_s", num(pause_threshold_s)},
            {"window_s", num(window_s)},
            {"k_baseline", std::to_string(k_baseline)},
            {"low_threshold", num(low_threshold)},
            {"high_threshold", num(high_threshold)},
            {"jobs", std::to_string(jobs)},
            {"combine", combine == pcs::ConversationCombine::mean ? "mean" : "min"},
        };
    }
};

/// Flat key=value config text; '#' comments and blank lines ignored;
/// unknown keys are errors. Construct scales are declared as
/// `scale.<construct>=<max>`; `constructs=` (comma separated) replaces
/// the scored construct list.
inline RunConfig parse_config(std::string_view content) {
    RunConfig cfg;
    std::size_t pos = 0;
    int line_no = 0;
    while (pos <= content.size()) {
        const std::size_t nl = content.find('\n', pos);
        std::string line{nl == std::string_view::npos ? content.substr(pos)
                                                      : content.substr(pos, nl - pos)};
        pos = (nl == std::string_view::npos) ? content.size() + 1 : nl + 1;
        ++line_no;
        const std::string trimmed = csv::trim(line);
        if (trimmed.empty() || trimmed.front() == '#') continue;
        const std::size_t eq = trimmed.find('=');
        if (eq == std::string::npos)
            throw Error(ErrorCode::InvalidConfig,
                        "line " + std::to_string(line_no) + ": expected key=value");
        const std::string key = csv::trim(trimmed.substr(0, eq));
        const std::string value = csv::trim(trimmed.substr(eq + 1));
        auto as_number = [&](double lo, double hi) {
            const double v = csv::to_number(value, ErrorCode::InvalidConfig, key);
            if (v < lo || v > hi)
                throw Error(ErrorCode::InvalidConfig, key + " out of range");
            return v;
        };
        if (key == "corpus_root") cfg.corpus_root = value;
        else if (key == "out_dir") cfg.out_dir = value;
        else if (key == "surveys") cfg.surveys = value;
        else if (key == "manifest") cfg.manifest = value;
        else if (key == "pause_threshold_s") cfg.pause_threshold_s = as_number(0.0, 60.0);
        else if (key == "window_s") cfg.window_s = as_number(0.1, 600.0);
        else if (key == "k_baseline") cfg.k_baseline = static_cast<int>(as_number(1, 1000));
        else if (key == "low_threshold") cfg.low_threshold = as_number(0.0, 1.0);
        else if (key == "high_threshold") cfg.high_threshold = as_number(0.0, 1.0);
        else if (key == "seed")
            cfg.seed = static_cast<std::uint64_t>(as_number(0.0, 1.8e19));
        else if (key == "jobs") cfg.jobs = static_cast<int>(as_number(1, 256));
        else if (key == "cache_features") cfg.cache_features = value == "1" || value == "true";
        else if (key == "combine") {
            if (value == "mean") cfg.combine = pcs::ConversationCombine::mean;
            else if (value == "min") cfg.combine = pcs::ConversationCombine::min;
            else throw Error(ErrorCode::InvalidConfig, "combine must be mean or min");
        } else if (key == "constructs") {
            cfg.constructs.names.clear();
            for (const auto& cell : csv::split_line(value)) {
                const std::string name = csv::trim(cell);
                if (name.empty()) continue;
                cfg.constructs.names.push_back(name);
                if (!cfg.constructs.scales.count(name)) cfg.constructs.scales[name] = 100.0;
            }
            if (cfg.constructs.names.empty())
                throw Error(ErrorCode::InvalidConfig, "constructs list is empty");
        } else if (key.rfind("scale.", 0) == 0) {
            const std::string name = key.substr(6);
            const double scale = as_number(1.0, 10000.0);
            cfg.constructs.scales[name] = scale;
        } else {
            throw Error(ErrorCode::InvalidConfig,
                        "unknown key '" + key + "' at line " + std::to_string(line_no));
        }
    }
    if (cfg.low_threshold >= cfg.high_threshold)
        throw Error(ErrorCode::InvalidConfig, "low_threshold must be < high_threshold");
    return cfg;
}

inline RunConfig load_config_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot open config " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

} // namespace entrain::pipeline
