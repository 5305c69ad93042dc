#ifndef SBT_IO_HPP
#define SBT_IO_HPP

#include <cstdint>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "sbt/errors.hpp"

namespace sbt {

inline constexpr const char* kToolVersion = "sbt-lab 0.1.0";

// 17 significant digits: round-trips every double exactly.
inline std::string format_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline double parse_double_strict(const std::string& s) {
    std::size_t pos = 0;
    double v;
    try {
        v = std::stod(s, &pos);
    } catch (const std::exception&) {
        throw InputError("not a number: '" + s + "'");
    }
    while (pos < s.size() && (s[pos] == ' ' || s[pos] == '\t' || s[pos] == '\r')) ++pos;
    if (pos != s.size()) throw InputError("trailing characters after number: '" + s + "'");
    return v;
}

// FNV-1a 64-bit, hex string; used as the config hash in output headers.
inline std::string config_hash(const std::string& canonical) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : canonical) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", (unsigned long long)h);
    return buf;
}

inline std::string timestamp_utc() {
    std::time_t t = std::time(nullptr);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    return buf;
}

struct OutputTable {
    std::vector<std::string> comments; // provenance header, written as "# ..."
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;
};

// Atomic write: temp file in the target directory, then rename. LF endings.
inline void write_text_atomic(const std::filesystem::path& path, const std::string& content) {
    namespace fs = std::filesystem;
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw InputError("cannot open '" + tmp.string() + "' for writing");
        out << content;
        if (!out) throw InputError("write failed for '" + tmp.string() + "'");
    }
    fs::rename(tmp, path);
}

inline void write_table(const OutputTable& table, const std::filesystem::path& path) {
    for (const auto& row : table.rows)
        if (row.size() != table.columns.size())
            throw InputError("table row width does not match the column count");
    std::ostringstream out;
    for (const auto& c : table.comments) out << "# " << c << "\n";
    for (std::size_t i = 0; i < table.columns.size(); ++i)
        out << table.columns[i] << (i + 1 < table.columns.size() ? "," : "");
    out << "\n";
    for (const auto& row : table.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) out << row[i] << (i + 1 < row.size() ? "," : "");
        out << "\n";
    }
    write_text_atomic(path, out.str());
}

struct CsvData {
    std::vector<std::string> comments;
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;
};

inline CsvData read_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open '" + path.string() + "'");
    CsvData data;
    std::string line;
    bool have_header = false;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line[0] == '#') {
            data.comments.push_back(line.substr(line.size() > 1 && line[1] == ' ' ? 2 : 1));
            continue;
        }
        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, ',')) fields.push_back(field);
        if (!have_header) {
            // a header line is one whose first field is not numeric
            bool numeric = true;
            try {
                parse_double_strict(fields.at(0));
            } catch (const InputError&) {
                numeric = false;
            }
            have_header = true;
            if (!numeric) {
                data.columns = fields;
                continue;
            }
        }
        data.rows.push_back(fields);
    }
    return data;
}

} // namespace sbt

#endif
