#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "mcpscan/result.hpp"

namespace mcpscan::jsonl {

using nlohmann::json;

/// One line that failed to parse, with its 1-based line number.
struct LineError {
    std::size_t line = 0;
    std::string message;
};

struct ReadReport {
    std::vector<json> rows;
    std::vector<LineError> errors;
};

/// Parses a JSON Lines document. Blank lines are skipped; malformed lines
/// are collected, never fatal.
inline ReadReport parse_lines(const std::string& text) {
    ReadReport report;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        json row = json::parse(line, nullptr, false);
        if (row.is_discarded()) {
            report.errors.push_back({lineno, "not valid JSON"});
        } else {
            report.rows.push_back(std::move(row));
        }
    }
    return report;
}

inline Result<std::string> read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return Result<std::string>::failure("unreadable-file", "cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

inline Result<ReadReport> read_lines(const std::filesystem::path& path) {
    auto text = read_file(path);
    if (!text.ok()) return text.error();
    return parse_lines(text.value());
}

inline bool write_file(const std::filesystem::path& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) return false;
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    return static_cast<bool>(out);
}

/// Serializes rows one compact JSON object per line.
inline std::string render_lines(const std::vector<json>& rows) {
    std::string out;
    for (const auto& row : rows) {
        out += row.dump();
        out += '\n';
    }
    return out;
}

inline bool write_lines(const std::filesystem::path& path, const std::vector<json>& rows) {
    return write_file(path, render_lines(rows));
}

} // namespace mcpscan::jsonl
