#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "mcpscan/taxonomy.hpp"

namespace mcpscan {

/// Server-level aggregation of classified tools. Counts are exact;
/// proportions are rendered (rounded) only at report time.
struct ServerRiskProfile {
    std::string server_id;
    std::string server_name;
    std::string category;
    std::uint64_t tool_count = 0;
    std::uint64_t risky_count = 0;
    std::uint64_t n_eit = 0;
    std::uint64_t n_pat = 0;
    std::uint64_t n_nat = 0;

    CapabilitySet server_caps() const { return {n_eit > 0, n_pat > 0, n_nat > 0}; }
    std::uint64_t risks() const { return n_eit + n_pat + n_nat; }

    bool operator==(const ServerRiskProfile&) const = default;
};

inline void to_json(json& j, const ServerRiskProfile& p) {
    auto caps = p.server_caps();
    j = json{{"server_id", p.server_id},
             {"server_name", p.server_name},
             {"category", p.category},
             {"tools", p.tool_count},
             {"risky", p.risky_count},
             {"n_eit", p.n_eit},
             {"n_pat", p.n_pat},
             {"n_nat", p.n_nat},
             {"has_eit", caps.eit},
             {"has_pat", caps.pat},
             {"has_nat", caps.nat},
             {"risks", p.risks()}};
}

inline void from_json(const json& j, ServerRiskProfile& p) {
    p.server_id = j.value("server_id", "");
    p.server_name = j.value("server_name", "");
    p.category = j.value("category", "");
    p.tool_count = j.value("tools", std::uint64_t{0});
    p.risky_count = j.value("risky", std::uint64_t{0});
    p.n_eit = j.value("n_eit", std::uint64_t{0});
    p.n_pat = j.value("n_pat", std::uint64_t{0});
    p.n_nat = j.value("n_nat", std::uint64_t{0});
}

/// Counts capabilities over the classified tools of one server.
/// Zero tools yield the all-zero profile.
inline ServerRiskProfile profile_server(std::span<const ClassifiedTool> tools) {
    ServerRiskProfile p;
    for (const auto& c : tools) {
        if (p.server_id.empty()) {
            p.server_id = c.tool.server_id;
            p.server_name = c.tool.server_name;
        }
        ++p.tool_count;
        if (c.caps.risky()) ++p.risky_count;
        if (c.caps.eit) ++p.n_eit;
        if (c.caps.pat) ++p.n_pat;
        if (c.caps.nat) ++p.n_nat;
    }
    return p;
}

/// Groups a mixed classified-tool list by server and profiles each.
inline std::vector<ServerRiskProfile> profile_all(std::span<const ClassifiedTool> tools) {
    std::map<std::string, std::vector<ClassifiedTool>> by_server;
    for (const auto& c : tools) by_server[c.tool.server_id].push_back(c);
    std::vector<ServerRiskProfile> out;
    out.reserve(by_server.size());
    for (const auto& [id, group] : by_server) out.push_back(profile_server(group));
    return out;
}

struct ToolRef {
    std::string server_id;
    std::string name;
    bool operator==(const ToolRef&) const = default;
    auto operator<=>(const ToolRef&) const = default;
};

inline void to_json(json& j, const ToolRef& t) {
    j = json{{"server_id", t.server_id}, {"tool", t.name}};
}

/// An ordered (ingestion, access, disclosure) capability-slot triple.
/// One tool may fill several slots, including all three.
struct AttackChain {
    ToolRef ingestion;
    ToolRef access;
    ToolRef disclosure;

    bool intra_server() const {
        return ingestion.server_id == access.server_id &&
               access.server_id == disclosure.server_id;
    }

    bool operator==(const AttackChain&) const = default;
};

inline void to_json(json& j, const AttackChain& c) {
    std::vector<std::string> servers = {c.ingestion.server_id};
    if (c.access.server_id != c.ingestion.server_id) servers.push_back(c.access.server_id);
    if (c.disclosure.server_id != c.ingestion.server_id &&
        c.disclosure.server_id != c.access.server_id)
        servers.push_back(c.disclosure.server_id);
    j = json{{"ingestion", c.ingestion},
             {"access", c.access},
             {"disclosure", c.disclosure},
             {"span", c.intra_server() ? "intra-server" : "cross-server"},
             {"servers", servers}};
}

enum class ChainMode { count, list };

struct ChainEnumeration {
    std::uint64_t count = 0;
    bool overflow = false; // count saturated 64 bits
    std::vector<AttackChain> chains; // list mode only, capped
};

namespace detail {

inline std::uint64_t checked_product(std::uint64_t a, std::uint64_t b, std::uint64_t c,
                                     bool& overflow) {
    unsigned __int128 wide = static_cast<unsigned __int128>(a) * b;
    wide *= c;
    if (wide > UINT64_MAX) {
        overflow = true;
        return UINT64_MAX;
    }
    return static_cast<std::uint64_t>(wide);
}

struct CapabilityPools {
    std::vector<ToolRef> eit, pat, nat;
};

inline CapabilityPools pools_of(std::span<const ClassifiedTool> tools) {
    CapabilityPools pools;
    for (const auto& c : tools) {
        ToolRef ref{c.tool.server_id, c.tool.name};
        if (c.caps.eit) pools.eit.push_back(ref);
        if (c.caps.pat) pools.pat.push_back(ref);
        if (c.caps.nat) pools.nat.push_back(ref);
    }
    auto sort_pool = [](std::vector<ToolRef>& v) { std::sort(v.begin(), v.end()); };
    sort_pool(pools.eit);
    sort_pool(pools.pat);
    sort_pool(pools.nat);
    return pools;
}

inline ChainEnumeration enumerate_pools(const CapabilityPools& pools, ChainMode mode,
                                        std::uint64_t cap) {
    ChainEnumeration out;
    out.count = checked_product(pools.eit.size(), pools.pat.size(), pools.nat.size(),
                                out.overflow);
    if (mode == ChainMode::list) {
        for (const auto& e : pools.eit) {
            for (const auto& p : pools.pat) {
                for (const auto& n : pools.nat) {
                    if (out.chains.size() >= cap) return out;
                    out.chains.push_back({e, p, n});
                }
            }
        }
    }
    return out;
}

} // namespace detail

/// Chains composable inside one server: nE x nP x nN ordered triples.
/// List mode materializes at most `cap` chains in (E, P, N) sorted order.
inline ChainEnumeration enumerate_intra_chains(std::span<const ClassifiedTool> server_tools,
                                               ChainMode mode = ChainMode::count,
                                               std::uint64_t cap = 10000) {
    return detail::enumerate_pools(detail::pools_of(server_tools), mode, cap);
}

/// Chains composable across the whole population (intra chains included):
/// (sum nE) x (sum nP) x (sum nN).
inline ChainEnumeration enumerate_cross_chains(std::span<const ClassifiedTool> all_tools,
                                               ChainMode mode = ChainMode::count,
                                               std::uint64_t cap = 10000) {
    return detail::enumerate_pools(detail::pools_of(all_tools), mode, cap);
}

/// Count-only form over precomputed profiles.
inline std::uint64_t cross_chain_count(std::span<const ServerRiskProfile> profiles,
                                       bool* overflow = nullptr) {
    std::uint64_t se = 0, sp = 0, sn = 0;
    for (const auto& p : profiles) {
        se += p.n_eit;
        sp += p.n_pat;
        sn += p.n_nat;
    }
    bool of = false;
    auto count = detail::checked_product(se, sp, sn, of);
    if (overflow) *overflow = of;
    return count;
}

inline std::uint64_t intra_chain_count(const ServerRiskProfile& profile, bool* overflow = nullptr) {
    bool of = false;
    auto count = detail::checked_product(profile.n_eit, profile.n_pat, profile.n_nat, of);
    if (overflow) *overflow = of;
    return count;
}

/// Servers whose tools cover all three capabilities.
inline std::vector<std::string> full_chain_servers(std::span<const ServerRiskProfile> profiles) {
    std::vector<std::string> out;
    for (const auto& p : profiles)
        if (p.server_caps().full_chain()) out.push_back(p.server_id);
    std::sort(out.begin(), out.end());
    return out;
}

} // namespace mcpscan
