#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "entrain/error.hpp"
#include "entrain/turns.hpp"

namespace entrain::report {

inline constexpr const char* kVersion = "0.1.0";

// Fixed number formats keep every emitted file byte-stable across runs:
// p and q render in scientific notation with 3 significant digits, all
// other reals as fixed 3-decimal values, absent values as empty cells.

inline std::string fmt_fixed(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.3f", v);
    return buf;
}

inline std::string fmt_p(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.2e", v);
    return buf;
}

inline std::string fmt_opt(const std::optional<double>& v, bool p_style = false) {
    if (!v) return "";
    return p_style ? fmt_p(*v) : fmt_fixed(*v);
}

// ---------------------------------------------------------------------------
// bundle rows
// ---------------------------------------------------------------------------

struct RunHeader {
    std::uint64_t seed = 0;
    std::string version = kVersion;
    std::vector<std::pair<std::string, std::string>> params;  // echoed key=value
    std::vector<std::string> excluded;  // "<id>: reason"
    std::vector<std::string> notes;     // method notices
};

struct ConversationRow {
    std::string id;
    turns::TurnStats turn;
    turns::PauseStats pause;
};

struct ProximityRow {
    std::string id;
    std::string feature;    // f0 | intensity
    std::string statistic;  // min | max | mean
    std::size_t n_pairs = 0;
    std::optional<double> t;
    std::optional<double> p;
    double delta = 0.0;
};

struct SynchronyRow {
    std::string id;
    std::string au;
    std::size_t n_windows = 0;
    double mean_z = 0.0;
};

struct PcsRow {
    std::string conversation_id;
    std::string participant_id;
    double pcs = 0.0;
    double conversation_pcs = 0.0;
    std::string label;
};

struct GroupTestRow {
    std::string family;  // turn | pause | f0 | intensity | fau_synchrony
    std::string row;     // statistic name or AU id
    std::string test;    // mann_whitney | welch_t
    std::size_t n_lsc = 0, n_hsc = 0;
    double statistic = 0.0;  // U or t
    std::optional<double> z;
    std::optional<double> df;
    double p = 1.0;
    double q = 1.0;
    double effect = 0.0;  // Cliff's delta LSC vs HSC
    double lsc_mean = 0.0, lsc_sd = 0.0, hsc_mean = 0.0, hsc_sd = 0.0;
    std::string path;  // raw_stats | proximity_delta
};

struct ReportBundle {
    RunHeader header;
    std::vector<ConversationRow> conversations;
    std::vector<ProximityRow> proximity;
    std::vector<SynchronyRow> synchrony;
    std::vector<PcsRow> pcs;
    std::vector<GroupTestRow> group_tests;
};

// ---------------------------------------------------------------------------
// CSV rendering
// ---------------------------------------------------------------------------

inline std::string render_header(const RunHeader& h) {
    std::string out;
    out += "# entrain " + h.version + "\n";
    out += "# seed=" + std::to_string(h.seed) + "\n";
    for (const auto& [k, v] : h.params) out += "# param " + k + "=" + v + "\n";
    for (const auto& n : h.notes) out += "# note " + n + "\n";
    for (const auto& e : h.excluded) out += "# excluded " + e + "\n";
    return out;
}

inline std::string render_turn_pause_csv(const ReportBundle& b) {
    std::string out = render_header(b.header);
    out += "conversation_id,turn_min,turn_max,turn_mean,turn_total,turn_count,"
           "pause_min,pause_max,pause_mean,pause_total,pause_count\n";
    for (const auto& r : b.conversations) {
        out += r.id + ',' + fmt_fixed(r.turn.min_s) + ',' + fmt_fixed(r.turn.max_s) +
               ',' + fmt_fixed(r.turn.mean_s) + ',' + fmt_fixed(r.turn.total_s) + ',' +
               std::to_string(r.turn.count) + ',' + fmt_fixed(r.pause.min_s) + ',' +
               fmt_fixed(r.pause.max_s) + ',' + fmt_fixed(r.pause.mean_s) + ',' +
               fmt_fixed(r.pause.total_s) + ',' + std::to_string(r.pause.count) + '\n';
    }
    return out;
}

inline std::string render_proximity_csv(const ReportBundle& b) {
    std::string out = render_header(b.header);
    out += "conversation_id,feature,statistic,n_pairs,t,p,delta\n";
    for (const auto& r : b.proximity) {
        out += r.id + ',' + r.feature + ',' + r.statistic + ',' +
               std::to_string(r.n_pairs) + ',' + fmt_opt(r.t) + ',' +
               fmt_opt(r.p, true) + ',' + fmt_fixed(r.delta) + '\n';
    }
    return out;
}

inline std::string render_synchrony_csv(const ReportBundle& b) {
    std::string out = render_header(b.header);
    out += "conversation_id,au,n_windows,mean_z\n";
    for (const auto& r : b.synchrony) {
        out += r.id + ',' + r.au + ',' + std::to_string(r.n_windows) + ',' +
               fmt_fixed(r.mean_z) + '\n';
    }
    return out;
}

inline std::string render_pcs_csv(const ReportBundle& b) {
    std::string out = render_header(b.header);
    out += "conversation_id,participant_id,pcs,conversation_pcs,label\n";
    for (const auto& r : b.pcs) {
        out += r.conversation_id + ',' + r.participant_id + ',' + fmt_fixed(r.pcs) +
               ',' + fmt_fixed(r.conversation_pcs) + ',' + r.label + '\n';
    }
    return out;
}

inline std::string render_group_tests_csv(const ReportBundle& b) {
    std::string out = render_header(b.header);
    out += "family,row,test,n_lsc,n_hsc,statistic,z,df,p,q,effect,"
           "lsc_mean,lsc_sd,hsc_mean,hsc_sd,path\n";
    for (const auto& r : b.group_tests) {
        out += r.family + ',' + r.row + ',' + r.test + ',' + std::to_string(r.n_lsc) +
               ',' + std::to_string(r.n_hsc) + ',' + fmt_fixed(r.statistic) + ',' +
               fmt_opt(r.z) + ',' + fmt_opt(r.df) + ',' + fmt_p(r.p) + ',' +
               fmt_p(r.q) + ',' + fmt_fixed(r.effect) + ',' + fmt_fixed(r.lsc_mean) +
               ',' + fmt_fixed(r.lsc_sd) + ',' + fmt_fixed(r.hsc_mean) + ',' +
               fmt_fixed(r.hsc_sd) + ',' + r.path + '\n';
    }
    return out;
}

// ---------------------------------------------------------------------------
// JSON round-trip
// ---------------------------------------------------------------------------

using json = nlohmann::json;

inline json to_json(const RunHeader& h) {
    json j;
    j["seed"] = h.seed;
    j["version"] = h.version;
    json params = json::object();
    for (const auto& [k, v] : h.params) params[k] = v;
    j["params"] = params;
    j["notes"] = h.notes;
    j["excluded"] = h.excluded;
    return j;
}

inline RunHeader header_from_json(const json& j) {
    RunHeader h;
    h.seed = j.at("seed").get<std::uint64_t>();
    h.version = j.at("version").get<std::string>();
    for (const auto& [k, v] : j.at("params").items())
        h.params.emplace_back(k, v.get<std::string>());
    h.notes = j.at("notes").get<std::vector<std::string>>();
    h.excluded = j.at("excluded").get<std::vector<std::string>>();
    return h;
}

inline json to_json(const ReportBundle& b) {
    json j;
    j["header"] = to_json(b.header);
    j["conversations"] = json::array();
    for (const auto& r : b.conversations) {
        j["conversations"].push_back(
            {{"id", r.id},
             {"turn", {{"min", r.turn.min_s}, {"max", r.turn.max_s},
                       {"mean", r.turn.mean_s}, {"total", r.turn.total_s},
                       {"count", r.turn.count}}},
             {"pause", {{"min", r.pause.min_s}, {"max", r.pause.max_s},
                        {"mean", r.pause.mean_s}, {"total", r.pause.total_s},
                        {"count", r.pause.count}}}});
    }
    j["proximity"] = json::array();
    for (const auto& r : b.proximity) {
        json row{{"id", r.id},       {"feature", r.feature},
                 {"statistic", r.statistic}, {"n_pairs", r.n_pairs},
                 {"delta", r.delta}};
        if (r.t) row["t"] = *r.t;
        if (r.p) row["p"] = *r.p;
        j["proximity"].push_back(row);
    }
    j["synchrony"] = json::array();
    for (const auto& r : b.synchrony)
        j["synchrony"].push_back({{"id", r.id},
                                  {"au", r.au},
                                  {"n_windows", r.n_windows},
                                  {"mean_z", r.mean_z}});
    j["pcs"] = json::array();
    for (const auto& r : b.pcs)
        j["pcs"].push_back({{"conversation_id", r.conversation_id},
                            {"participant_id", r.participant_id},
                            {"pcs", r.pcs},
                            {"conversation_pcs", r.conversation_pcs},
                            {"label", r.label}});
    j["group_tests"] = json::array();
    for (const auto& r : b.group_tests) {
        json row{{"family", r.family},   {"row", r.row},
                 {"test", r.test},       {"n_lsc", r.n_lsc},
                 {"n_hsc", r.n_hsc},     {"statistic", r.statistic},
                 {"p", r.p},             {"q", r.q},
                 {"effect", r.effect},   {"lsc_mean", r.lsc_mean},
                 {"lsc_sd", r.lsc_sd},   {"hsc_mean", r.hsc_mean},
                 {"hsc_sd", r.hsc_sd},   {"path", r.path}};
        if (r.z) row["z"] = *r.z;
        if (r.df) row["df"] = *r.df;
        j["group_tests"].push_back(row);
    }
    return j;
}

inline ReportBundle bundle_from_json(const json& j) {
    ReportBundle b;
    b.header = header_from_json(j.at("header"));
    for (const auto& row : j.at("conversations")) {
        ConversationRow r;
        r.id = row.at("id").get<std::string>();
        const auto& t = row.at("turn");
        r.turn = turns::TurnStats{t.at("min"), t.at("max"), t.at("mean"),
                                  t.at("total"), t.at("count")};
        const auto& p = row.at("pause");
        r.pause = turns::PauseStats{p.at("min"), p.at("max"), p.at("mean"),
                                    p.at("total"), p.at("count")};
        b.conversations.push_back(std::move(r));
    }
    for (const auto& row : j.at("proximity")) {
        ProximityRow r;
        r.id = row.at("id").get<std::string>();
        r.feature = row.at("feature").get<std::string>();
        r.statistic = row.at("statistic").get<std::string>();
        r.n_pairs = row.at("n_pairs").get<std::size_t>();
        r.delta = row.at("delta").get<double>();
        if (row.contains("t")) r.t = row.at("t").get<double>();
        if (row.contains("p")) r.p = row.at("p").get<double>();
        b.proximity.push_back(std::move(r));
    }
    for (const auto& row : j.at("synchrony")) {
        SynchronyRow r;
        r.id = row.at("id").get<std::string>();
        r.au = row.at("au").get<std::string>();
        r.n_windows = row.at("n_windows").get<std::size_t>();
        r.mean_z = row.at("mean_z").get<double>();
        b.synchrony.push_back(std::move(r));
    }
    for (const auto& row : j.at("pcs")) {
        PcsRow r;
        r.conversation_id = row.at("conversation_id").get<std::string>();
        r.participant_id = row.at("participant_id").get<std::string>();
        r.pcs = row.at("pcs").get<double>();
        r.conversation_pcs = row.at("conversation_pcs").get<double>();
        r.label = row.at("label").get<std::string>();
        b.pcs.push_back(std::move(r));
    }
    for (const auto& row : j.at("group_tests")) {
        GroupTestRow r;
        r.family = row.at("family").get<std::string>();
        r.row = row.at("row").get<std::string>();
        r.test = row.at("test").get<std::string>();
        r.n_lsc = row.at("n_lsc").get<std::size_t>();
        r.n_hsc = row.at("n_hsc").get<std::size_t>();
        r.statistic = row.at("statistic").get<double>();
        r.p = row.at("p").get<double>();
        r.q = row.at("q").get<double>();
        r.effect = row.at("effect").get<double>();
        r.lsc_mean = row.at("lsc_mean").get<double>();
        r.lsc_sd = row.at("lsc_sd").get<double>();
        r.hsc_mean = row.at("hsc_mean").get<double>();
        r.hsc_sd = row.at("hsc_sd").get<double>();
        r.path = row.at("path").get<std::string>();
        if (row.contains("z")) r.z = row.at("z").get<double>();
        if (row.contains("df")) r.df = row.at("df").get<double>();
        b.group_tests.push_back(std::move(r));
    }
    return b;
}

// ---------------------------------------------------------------------------
// file emission
// ---------------------------------------------------------------------------

enum class Format { csv, json_format };

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
    out << content;
}

/// Emit every report table into `dir`. Identical bundles produce
/// byte-identical files.
inline std::vector<std::string> emit_reports(const ReportBundle& b,
                                             const std::string& dir, Format format) {
    std::filesystem::create_directories(dir);
    std::vector<std::string> written;
    auto emit = [&](const std::string& name, const std::string& content) {
        const std::string path = dir + "/" + name;
        write_file(path, content);
        written.push_back(path);
    };
    if (format == Format::csv) {
        emit("turn_pause.csv", render_turn_pause_csv(b));
        emit("proximity.csv", render_proximity_csv(b));
        emit("synchrony.csv", render_synchrony_csv(b));
        emit("pcs.csv", render_pcs_csv(b));
        emit("group_tests.csv", render_group_tests_csv(b));
    } else {
        const json j = to_json(b);
        for (const char* table :
             {"conversations", "proximity", "synchrony", "pcs", "group_tests"}) {
            json out;
            out["header"] = j.at("header");
            out["rows"] = j.at(table);
            emit(std::string(table) + ".json", out.dump(2) + "\n");
        }
    }
    return written;
}

inline void write_bundle_json(const ReportBundle& b, const std::string& dir) {
    std::filesystem::create_directories(dir);
    write_file(dir + "/bundle.json", to_json(b).dump(2) + "\n");
}

inline ReportBundle read_bundle_json(const std::string& dir) {
    std::ifstream in(dir + "/bundle.json", std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + dir + "/bundle.json");
    json j;
    in >> j;
    return bundle_from_json(j);
}

} // namespace entrain::report
