#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace mcpscan {

using nlohmann::json;

/// The three threat-relevant tool capabilities, one per attack stage:
/// ingestion of external text, access to private local data, and
/// disclosure to an external endpoint.
enum class Capability {
    ExternalIngestion,
    PrivacyAccess,
    NetworkAccess,
};

inline constexpr std::array<Capability, 3> kAllCapabilities = {
    Capability::ExternalIngestion,
    Capability::PrivacyAccess,
    Capability::NetworkAccess,
};

inline const char* capability_label(Capability c) {
    switch (c) {
        case Capability::ExternalIngestion: return "EIT";
        case Capability::PrivacyAccess: return "PAT";
        case Capability::NetworkAccess: return "NAT";
    }
    return "?";
}

inline std::optional<Capability> capability_from_label(const std::string& label) {
    if (label == "EIT") return Capability::ExternalIngestion;
    if (label == "PAT") return Capability::PrivacyAccess;
    if (label == "NAT") return Capability::NetworkAccess;
    return std::nullopt;
}

/// Three independent booleans; a tool may hold any subset of the
/// capabilities, including all three at once.
struct CapabilitySet {
    bool eit = false;
    bool pat = false;
    bool nat = false;

    bool has(Capability c) const {
        switch (c) {
            case Capability::ExternalIngestion: return eit;
            case Capability::PrivacyAccess: return pat;
            case Capability::NetworkAccess: return nat;
        }
        return false;
    }

    void set(Capability c, bool v) {
        switch (c) {
            case Capability::ExternalIngestion: eit = v; break;
            case Capability::PrivacyAccess: pat = v; break;
            case Capability::NetworkAccess: nat = v; break;
        }
    }

    bool risky() const { return eit || pat || nat; }
    bool full_chain() const { return eit && pat && nat; }

    bool operator==(const CapabilitySet&) const = default;
};

inline void to_json(json& j, const CapabilitySet& s) {
    j = json{{"eit", s.eit}, {"pat", s.pat}, {"nat", s.nat}};
}

inline void from_json(const json& j, CapabilitySet& s) {
    s.eit = j.value("eit", false);
    s.pat = j.value("pat", false);
    s.nat = j.value("nat", false);
}

/// The 7 non-empty capability-overlap classes plus the all-false class.
enum class PartitionCell { E, P, N, EP, PN, EN, EPN, None };

inline PartitionCell partition_cell(const CapabilitySet& s) {
    if (s.eit && s.pat && s.nat) return PartitionCell::EPN;
    if (s.eit && s.pat) return PartitionCell::EP;
    if (s.pat && s.nat) return PartitionCell::PN;
    if (s.eit && s.nat) return PartitionCell::EN;
    if (s.eit) return PartitionCell::E;
    if (s.pat) return PartitionCell::P;
    if (s.nat) return PartitionCell::N;
    return PartitionCell::None;
}

/// Inverse of partition_cell; the mapping is a bijection on the 8 states.
inline CapabilitySet cell_to_set(PartitionCell cell) {
    switch (cell) {
        case PartitionCell::E: return {true, false, false};
        case PartitionCell::P: return {false, true, false};
        case PartitionCell::N: return {false, false, true};
        case PartitionCell::EP: return {true, true, false};
        case PartitionCell::PN: return {false, true, true};
        case PartitionCell::EN: return {true, false, true};
        case PartitionCell::EPN: return {true, true, true};
        case PartitionCell::None: return {false, false, false};
    }
    return {};
}

inline const char* partition_cell_label(PartitionCell cell) {
    switch (cell) {
        case PartitionCell::E: return "E";
        case PartitionCell::P: return "P";
        case PartitionCell::N: return "N";
        case PartitionCell::EP: return "EP";
        case PartitionCell::PN: return "PN";
        case PartitionCell::EN: return "EN";
        case PartitionCell::EPN: return "EPN";
        case PartitionCell::None: return "none";
    }
    return "?";
}

/// The (name, description, inputSchema) triple advertised by a server.
/// Description and schema are kept exactly as received, unnormalized.
struct ToolRecord {
    std::string server_id;
    std::string server_name;
    std::string name;
    std::string description;
    json input_schema = json::object();

    bool operator==(const ToolRecord&) const = default;
};

inline void to_json(json& j, const ToolRecord& t) {
    j = json{{"server_id", t.server_id},
             {"server_name", t.server_name},
             {"name", t.name},
             {"description", t.description},
             {"input_schema", t.input_schema}};
}

inline void from_json(const json& j, ToolRecord& t) {
    t.server_id = j.value("server_id", "");
    t.server_name = j.value("server_name", "");
    t.name = j.at("name").get<std::string>();
    t.description = j.value("description", "");
    t.input_schema = j.value("input_schema", json::object());
}

/// A tool with its voted capability flags and the judges that produced them.
struct ClassifiedTool {
    ToolRecord tool;
    CapabilitySet caps;
    std::vector<std::string> judge_ids;
    std::string ts; // classification timestamp, metadata only

    bool operator==(const ClassifiedTool&) const = default;
};

inline void to_json(json& j, const ClassifiedTool& c) {
    j = json{{"server_id", c.tool.server_id},
             {"server_name", c.tool.server_name},
             {"tool", c.tool.name},
             {"description", c.tool.description},
             {"input_schema", c.tool.input_schema},
             {"eit", c.caps.eit},
             {"pat", c.caps.pat},
             {"nat", c.caps.nat},
             {"judges", c.judge_ids},
             {"ts", c.ts}};
}

inline void from_json(const json& j, ClassifiedTool& c) {
    c.tool.server_id = j.value("server_id", "");
    c.tool.server_name = j.value("server_name", "");
    c.tool.name = j.at("tool").get<std::string>();
    c.tool.description = j.value("description", "");
    c.tool.input_schema = j.value("input_schema", json::object());
    c.caps.eit = j.value("eit", false);
    c.caps.pat = j.value("pat", false);
    c.caps.nat = j.value("nat", false);
    c.judge_ids = j.value("judges", std::vector<std::string>{});
    c.ts = j.value("ts", "");
}

} // namespace mcpscan
