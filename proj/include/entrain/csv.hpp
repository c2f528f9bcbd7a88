#pragma once

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "entrain/error.hpp"

namespace entrain::csv {

// Minimal RFC-4180-ish CSV: comma separated, double-quote quoting with ""
// escapes, \n or \r\n line ends. Lines starting with '#' are treated as
// comments (the report emitters write run headers that way).

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    /// Column index by (trimmed) name, -1 if absent.
    int column(std::string_view name) const {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return static_cast<int>(i);
        return -1;
    }

    int require_column(std::string_view name) const {
        int c = column(name);
        if (c < 0)
            throw Error(ErrorCode::MissingColumn, std::string(name));
        return c;
    }
};

inline std::string trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r')) ++b;
    while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) --e;
    return std::string(s.substr(b, e - b));
}

inline std::vector<std::string> split_line(std::string_view line) {
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

inline Table parse(std::string_view content) {
    Table t;
    std::size_t pos = 0;
    bool have_header = false;
    while (pos <= content.size()) {
        std::size_t nl = content.find('\n', pos);
        std::string_view line = (nl == std::string_view::npos)
                                    ? content.substr(pos)
                                    : content.substr(pos, nl - pos);
        pos = (nl == std::string_view::npos) ? content.size() + 1 : nl + 1;
        if (line.empty() || line == "\r") continue;
        if (!line.empty() && line.front() == '#') continue;
        auto cells = split_line(line);
        if (!have_header) {
            for (auto& c : cells) c = trim(c);
            t.header = std::move(cells);
            have_header = true;
        } else {
            t.rows.push_back(std::move(cells));
        }
    }
    return t;
}

inline Table parse_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

/// Strict numeric cell parse; the caller names the error code.
inline double to_number(std::string_view cell, ErrorCode on_fail,
                        std::string_view what) {
    const std::string s = trim(cell);
    if (s.empty())
        throw Error(on_fail, std::string(what) + ": empty cell");
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end != s.c_str() + s.size())
        throw Error(on_fail, std::string(what) + ": '" + s + "'");
    return v;
}

inline std::string quote_if_needed(std::string_view s) {
    if (s.find_first_of(",\"\n\r") == std::string_view::npos)
        return std::string(s);
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    out += '"';
    return out;
}

} // namespace entrain::csv
