#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mcpscan/result.hpp"

namespace mcpscan {

using nlohmann::json;

enum class Runner { npx, uvx, custom };

inline const char* runner_label(Runner r) {
    switch (r) {
        case Runner::npx: return "npx";
        case Runner::uvx: return "uvx";
        case Runner::custom: return "custom";
    }
    return "?";
}

inline std::optional<Runner> runner_from_label(const std::string& s) {
    if (s == "npx") return Runner::npx;
    if (s == "uvx") return Runner::uvx;
    if (s == "custom") return Runner::custom;
    return std::nullopt;
}

enum class SourcePlatform { PulseMCP, MCPMarket, AwesomeMCP, Other };

inline const char* source_label(SourcePlatform s) {
    switch (s) {
        case SourcePlatform::PulseMCP: return "PulseMCP";
        case SourcePlatform::MCPMarket: return "MCPMarket";
        case SourcePlatform::AwesomeMCP: return "AwesomeMCP";
        case SourcePlatform::Other: return "other";
    }
    return "?";
}

inline SourcePlatform source_from_label(const std::string& s) {
    if (s == "PulseMCP") return SourcePlatform::PulseMCP;
    if (s == "MCPMarket") return SourcePlatform::MCPMarket;
    if (s == "AwesomeMCP") return SourcePlatform::AwesomeMCP;
    return SourcePlatform::Other;
}

/// FNV-1a over (name, repo_url); the stable deduplication key for servers.
inline std::string server_id_of(const std::string& name, const std::string& repo_url) {
    std::uint64_t h = 1469598103934665603ull;
    auto mix = [&h](const std::string& s) {
        for (unsigned char c : s) {
            h ^= c;
            h *= 1099511628211ull;
        }
    };
    mix(name);
    h ^= 0x1f; // field separator
    h *= 1099511628211ull;
    mix(repo_url);
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf, 16);
}

/// Launchable description of one MCP server plus its listing provenance.
struct ServerManifest {
    std::string name;
    Runner runner = Runner::npx;
    std::string package;
    std::vector<std::string> args;
    std::map<std::string, std::string> env;
    SourcePlatform source = SourcePlatform::Other;
    std::string repo_url;
    std::optional<std::uint64_t> stars; // absent is not zero
    std::string description;           // optional listing text, used for categorization

    std::string id() const { return server_id_of(name, repo_url); }

    /// Full argv for launching the server process.
    std::vector<std::string> command() const {
        std::vector<std::string> argv;
        switch (runner) {
            case Runner::npx:
                argv = {"npx", "-y", package};
                break;
            case Runner::uvx:
                argv = {"uvx", package};
                break;
            case Runner::custom:
                break;
        }
        argv.insert(argv.end(), args.begin(), args.end());
        return argv;
    }

    bool operator==(const ServerManifest&) const = default;
};

inline void to_json(json& j, const ServerManifest& m) {
    j = json{{"name", m.name},
             {"runner", runner_label(m.runner)},
             {"package", m.package},
             {"args", m.args},
             {"env", m.env},
             {"source", source_label(m.source)}};
    if (!m.repo_url.empty()) j["repo_url"] = m.repo_url;
    if (m.stars) j["stars"] = *m.stars;
    if (!m.description.empty()) j["description"] = m.description;
}

inline Result<ServerManifest> parse_manifest(const json& j) {
    using R = Result<ServerManifest>;
    if (!j.is_object()) return R::failure("malformed-manifest", "row is not an object");
    ServerManifest m;
    if (!j.contains("name") || !j["name"].is_string() || j["name"].get<std::string>().empty())
        return R::failure("malformed-manifest", "missing or empty name");
    m.name = j["name"].get<std::string>();
    auto runner = runner_from_label(j.value("runner", ""));
    if (!runner) return R::failure("malformed-manifest", "unknown runner for " + m.name);
    m.runner = *runner;
    m.package = j.value("package", "");
    if (j.contains("args")) {
        if (!j["args"].is_array()) return R::failure("malformed-manifest", "args must be an array");
        for (const auto& a : j["args"]) {
            if (!a.is_string()) return R::failure("malformed-manifest", "args must be strings");
            m.args.push_back(a.get<std::string>());
        }
    }
    if (j.contains("env")) {
        if (!j["env"].is_object()) return R::failure("malformed-manifest", "env must be an object");
        for (const auto& [k, v] : j["env"].items()) {
            if (!v.is_string()) return R::failure("malformed-manifest", "env values must be strings");
            m.env[k] = v.get<std::string>();
        }
    }
    m.source = source_from_label(j.value("source", "other"));
    m.repo_url = j.value("repo_url", "");
    if (j.contains("stars")) {
        if (!j["stars"].is_number_unsigned())
            return R::failure("malformed-manifest", "stars must be a non-negative integer");
        m.stars = j["stars"].get<std::uint64_t>();
    }
    m.description = j.value("description", "");
    if (m.runner == Runner::npx || m.runner == Runner::uvx) {
        if (m.package.empty())
            return R::failure("malformed-manifest", "runner " + std::string(runner_label(m.runner)) +
                                                        " requires a package for " + m.name);
    } else if (m.args.empty() || m.args.front().empty()) {
        return R::failure("malformed-manifest",
                          "runner custom requires an explicit command in args for " + m.name);
    }
    return m;
}

} // namespace mcpscan
