#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "mcpscan/jsonl.hpp"
#include "mcpscan/manifest.hpp"
#include "mcpscan/taxonomy.hpp"

namespace mcpscan {

/// Result of one scan attempt against one server.
struct ConnectionOutcome {
    std::string server_id;
    std::string server_name;
    bool success = false;
    std::string cause; // empty on success: spawn-failure, timeout, ...
    std::uint64_t duration_ms = 0;
    std::uint64_t tool_count = 0;
    std::uint64_t skipped_entries = 0;
    std::string protocol_version;

    bool operator==(const ConnectionOutcome&) const = default;
};

inline void to_json(json& j, const ConnectionOutcome& o) {
    j = json{{"server_id", o.server_id},
             {"server_name", o.server_name},
             {"success", o.success},
             {"cause", o.cause},
             {"duration_ms", o.duration_ms},
             {"tool_count", o.tool_count},
             {"skipped_entries", o.skipped_entries},
             {"protocol_version", o.protocol_version}};
}

inline void from_json(const json& j, ConnectionOutcome& o) {
    o.server_id = j.value("server_id", "");
    o.server_name = j.value("server_name", "");
    o.success = j.value("success", false);
    o.cause = j.value("cause", "");
    o.duration_ms = j.value("duration_ms", std::uint64_t{0});
    o.tool_count = j.value("tool_count", std::uint64_t{0});
    o.skipped_entries = j.value("skipped_entries", std::uint64_t{0});
    o.protocol_version = j.value("protocol_version", "");
}

struct ManifestLoad {
    std::vector<ServerManifest> manifests;
    std::vector<jsonl::LineError> errors;
};

/// Reads a manifest JSONL file. Malformed lines are reported with their
/// line numbers, not fatal; an unreadable file or a file where every line
/// is malformed is an error.
inline Result<ManifestLoad> load_manifests(const std::filesystem::path& path) {
    using R = Result<ManifestLoad>;
    auto text = jsonl::read_file(path);
    if (!text.ok()) return text.error();

    ManifestLoad out;
    std::istringstream in(text.value());
    std::string line;
    std::size_t lineno = 0;
    std::size_t nonblank = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        ++nonblank;
        json row = json::parse(line, nullptr, false);
        if (row.is_discarded()) {
            out.errors.push_back({lineno, "not valid JSON"});
            continue;
        }
        auto parsed = parse_manifest(row);
        if (parsed.ok()) {
            out.manifests.push_back(std::move(parsed).value());
        } else {
            out.errors.push_back({lineno, parsed.error().message});
        }
    }
    if (nonblank > 0 && out.manifests.empty())
        return R::failure("every-line-malformed", "no valid manifest in " + path.string());
    return out;
}

inline std::string render_manifests(const std::vector<ServerManifest>& manifests) {
    std::vector<json> rows;
    rows.reserve(manifests.size());
    for (const auto& m : manifests) rows.push_back(json(m));
    return jsonl::render_lines(rows);
}

inline bool save_manifests(const std::filesystem::path& path,
                           const std::vector<ServerManifest>& manifests) {
    return jsonl::write_file(path, render_manifests(manifests));
}

struct DedupeResult {
    std::vector<ServerManifest> manifests;
    std::size_t duplicates = 0;
};

/// Keeps the first occurrence per server id, preserving order.
inline DedupeResult dedupe(const std::vector<ServerManifest>& manifests) {
    DedupeResult out;
    std::set<std::string> seen;
    for (const auto& m : manifests) {
        if (seen.insert(m.id()).second) {
            out.manifests.push_back(m);
        } else {
            ++out.duplicates;
        }
    }
    return out;
}

struct FilterResult {
    std::vector<ServerManifest> manifests;
    std::size_t excluded = 0;
};

/// Keeps npx/uvx manifests plus custom ones explicitly whitelisted by
/// name or id. An empty whitelist with allow_all_custom keeps every
/// custom manifest (fixture populations).
inline FilterResult filter_runnable(const std::vector<ServerManifest>& manifests,
                                    const std::set<std::string>& custom_whitelist = {},
                                    bool allow_all_custom = false) {
    FilterResult out;
    for (const auto& m : manifests) {
        bool keep = m.runner == Runner::npx || m.runner == Runner::uvx;
        if (!keep && m.runner == Runner::custom) {
            keep = allow_all_custom || custom_whitelist.count(m.name) > 0 ||
                   custom_whitelist.count(m.id()) > 0;
        }
        if (keep) {
            out.manifests.push_back(m);
        } else {
            ++out.excluded;
        }
    }
    return out;
}

struct ScanSummary {
    std::uint64_t attempted = 0;
    std::uint64_t connected = 0;
    std::uint64_t tools = 0;
    std::uint64_t skipped_entries = 0;
};

/// In-memory registry: manifests, their scan outcomes, and listed tools.
/// Mutation is serialized by the caller; lookups are plain map reads.
class RegistryStore {
public:
    Result<bool> add_manifest(const ServerManifest& m) {
        auto id = m.id();
        if (manifests_.count(id)) return Result<bool>::failure("duplicate-id", "duplicate server id " + id);
        manifests_.emplace(id, m);
        return true;
    }

    bool has_manifest(const std::string& server_id) const { return manifests_.count(server_id) > 0; }

    const ServerManifest* manifest(const std::string& server_id) const {
        auto it = manifests_.find(server_id);
        return it == manifests_.end() ? nullptr : &it->second;
    }

    /// Upsert: re-recording the same server keeps the latest outcome.
    Result<bool> record_outcome(const ConnectionOutcome& outcome) {
        if (!manifests_.count(outcome.server_id))
            return Result<bool>::failure("unknown-server", "outcome for unknown server id " + outcome.server_id);
        outcomes_[outcome.server_id] = outcome;
        return true;
    }

    Result<bool> record_tools(const std::string& server_id, std::vector<ToolRecord> tools) {
        if (!manifests_.count(server_id))
            return Result<bool>::failure("unknown-server", "tools for unknown server id " + server_id);
        tools_[server_id] = std::move(tools);
        return true;
    }

    ScanSummary summary() const {
        ScanSummary s;
        for (const auto& [id, o] : outcomes_) {
            ++s.attempted;
            if (o.success) ++s.connected;
            s.tools += o.tool_count;
            s.skipped_entries += o.skipped_entries;
        }
        return s;
    }

    const std::map<std::string, ServerManifest>& manifests() const { return manifests_; }
    const std::map<std::string, ConnectionOutcome>& outcomes() const { return outcomes_; }
    const std::map<std::string, std::vector<ToolRecord>>& tools() const { return tools_; }

    std::vector<ToolRecord> all_tools() const {
        std::vector<ToolRecord> out;
        for (const auto& [id, ts] : tools_) out.insert(out.end(), ts.begin(), ts.end());
        return out;
    }

private:
    std::map<std::string, ServerManifest> manifests_;
    std::map<std::string, ConnectionOutcome> outcomes_;
    std::map<std::string, std::vector<ToolRecord>> tools_;
};

} // namespace mcpscan
