#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "gausslt/errors.hpp"
#include "gausslt/ratelab.hpp"

namespace gausslt {

/// 17 significant digits, C locale.
inline std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string join_csv(const std::vector<std::string>& cells) {
    std::string out;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) out += ',';
        out += cells[i];
    }
    return out;
}

/// Writes to a temporary sibling and renames it over `path`.
inline void write_atomic(const std::filesystem::path& path, const std::string& content) {
    namespace fs = std::filesystem;
    const fs::path parent = path.has_parent_path() ? path.parent_path() : fs::path(".");
    std::error_code ec;
    fs::create_directories(parent, ec);
    if (ec) throw ConfigError("cannot create output directory " + parent.string() + ": " + ec.message());
    const fs::path tmp = parent / ("." + path.filename().string() + ".tmp." + std::to_string(::getpid()));
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw ConfigError("cannot open " + tmp.string() + " for writing");
        f << content;
        f.flush();
        if (!f) {
            fs::remove(tmp, ec);
            throw ConfigError("write failed for " + tmp.string());
        }
    }
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw ConfigError("cannot move output into place at " + path.string());
    }
}

inline const char* kSweepHeader = "eps,moment,h,ratio,source";

inline std::string sweep_csv(const std::vector<SweepRecord>& recs) {
    std::string out = std::string(kSweepHeader) + "\n";
    for (const auto& r : recs)
        out += join_csv({fmt_double(r.eps), fmt_double(r.moment), fmt_double(r.h), fmt_double(r.ratio),
                         to_string(r.source)}) +
               "\n";
    return out;
}

inline std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream in(s);
    while (std::getline(in, cur, sep)) out.push_back(cur);
    if (!s.empty() && s.back() == sep) out.emplace_back();
    return out;
}

inline double parse_double(const std::string& s, const std::string& what) {
    std::size_t pos = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &pos);
    } catch (const std::exception&) {
        throw ConfigError("cannot parse " + what + " '" + s + "' as a number");
    }
    if (pos != s.size()) throw ConfigError("trailing characters in " + what + " '" + s + "'");
    return v;
}

inline std::vector<SweepRecord> parse_sweep_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != kSweepHeader)
        throw ConfigError(std::string("sweep CSV must start with header '") + kSweepHeader + "'");
    std::vector<SweepRecord> out;
    int lineNo = 1;
    while (std::getline(in, line)) {
        ++lineNo;
        if (line.empty()) continue;
        const auto c = split(line, ',');
        if (c.size() != 5) throw ConfigError("sweep CSV line " + std::to_string(lineNo) + ": expected 5 fields");
        SweepRecord r;
        r.eps = parse_double(c[0], "eps");
        r.moment = parse_double(c[1], "moment");
        r.h = parse_double(c[2], "h");
        r.ratio = parse_double(c[3], "ratio");
        if (c[4] == "QUAD") r.source = MomentSource::QUAD;
        else if (c[4] == "MC") r.source = MomentSource::MC;
        else throw ConfigError("sweep CSV line " + std::to_string(lineNo) + ": unknown source '" + c[4] + "'");
        out.push_back(r);
    }
    return out;
}

inline std::string read_file(const std::filesystem::path& p) {
    std::ifstream f(p, std::ios::binary);
    if (!f) throw ConfigError("cannot read " + p.string());
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

/// FNV-1a, used to tag output rows with the configuration that produced them.
inline std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 0x100000001b3ull;
    }
    return h;
}

inline std::string hex64(std::uint64_t v) {
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

}  // namespace gausslt
