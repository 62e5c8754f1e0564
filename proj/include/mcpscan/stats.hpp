#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "mcpscan/chains.hpp"
#include "mcpscan/judges.hpp"
#include "mcpscan/manifest.hpp"
#include "mcpscan/taxonomy.hpp"

namespace mcpscan {

// ---------------------------------------------------------------------------
// Exact percent arithmetic. Counts stay integers end to end; rounding
// happens once, at print time, half-up at the requested precision.

namespace pct {

inline std::uint64_t pow10(unsigned d) {
    std::uint64_t v = 1;
    while (d--) v *= 10;
    return v;
}

/// floor(100 * num / den * 10^decimals + 0.5) in integer arithmetic.
inline std::uint64_t scaled_half_up(std::uint64_t num, std::uint64_t den, unsigned decimals) {
    if (den == 0) return 0;
    unsigned __int128 scaled = static_cast<unsigned __int128>(num) * 100 * pow10(decimals);
    return static_cast<std::uint64_t>((2 * scaled + den) / (2 * static_cast<unsigned __int128>(den)));
}

/// "46.33" for (5666, 12230, 2). No trailing percent sign.
inline std::string format(std::uint64_t num, std::uint64_t den, unsigned decimals) {
    std::uint64_t scaled = scaled_half_up(num, den, decimals);
    std::uint64_t scale = pow10(decimals);
    std::string out = std::to_string(scaled / scale);
    if (decimals > 0) {
        std::string frac = std::to_string(scaled % scale);
        out += "." + std::string(decimals - frac.size(), '0') + frac;
    }
    return out;
}

/// True when 100*num/den lies within +-0.05 percentage points of a value
/// printed at one decimal (given as tenths, e.g. 981 for 98.1%).
inline bool within_half_tenth(std::uint64_t num, std::uint64_t den, std::uint64_t printed_tenths) {
    if (den == 0) return printed_tenths == 0;
    // |100*n/d - p/10| <= 1/20  <=>  |2000*n - 2*p*d| <= d
    __int128 lhs = static_cast<__int128>(2000) * num - static_cast<__int128>(2) * printed_tenths * den;
    if (lhs < 0) lhs = -lhs;
    return lhs <= static_cast<__int128>(den);
}

/// Exact comparison of a/b vs c/d (descending sort helper).
inline int compare_fraction(std::uint64_t a, std::uint64_t b, std::uint64_t c, std::uint64_t d) {
    unsigned __int128 lhs = static_cast<unsigned __int128>(a) * d;
    unsigned __int128 rhs = static_cast<unsigned __int128>(c) * b;
    if (lhs < rhs) return -1;
    if (lhs > rhs) return 1;
    return 0;
}

} // namespace pct

// ---------------------------------------------------------------------------
// Partition cells and per-side (tools / servers) statistics.

/// Counts of the 7 non-empty capability-overlap cells.
struct PartitionCells {
    std::uint64_t e = 0, p = 0, n = 0, ep = 0, pn = 0, en = 0, epn = 0;

    std::uint64_t risky() const { return e + p + n + ep + pn + en + epn; }
    std::uint64_t total_eit() const { return e + ep + en + epn; }
    std::uint64_t total_pat() const { return p + ep + pn + epn; }
    std::uint64_t total_nat() const { return n + pn + en + epn; }

    void add(PartitionCell cell) {
        switch (cell) {
            case PartitionCell::E: ++e; break;
            case PartitionCell::P: ++p; break;
            case PartitionCell::N: ++n; break;
            case PartitionCell::EP: ++ep; break;
            case PartitionCell::PN: ++pn; break;
            case PartitionCell::EN: ++en; break;
            case PartitionCell::EPN: ++epn; break;
            case PartitionCell::None: break;
        }
    }

    bool operator==(const PartitionCells&) const = default;
};

inline void to_json(json& j, const PartitionCells& c) {
    j = json{{"E", c.e},   {"P", c.p},   {"N", c.n},  {"EP", c.ep},
             {"PN", c.pn}, {"EN", c.en}, {"EPN", c.epn}};
}

inline void from_json(const json& j, PartitionCells& c) {
    c.e = j.value("E", std::uint64_t{0});
    c.p = j.value("P", std::uint64_t{0});
    c.n = j.value("N", std::uint64_t{0});
    c.ep = j.value("EP", std::uint64_t{0});
    c.pn = j.value("PN", std::uint64_t{0});
    c.en = j.value("EN", std::uint64_t{0});
    c.epn = j.value("EPN", std::uint64_t{0});
}

/// Partition plus derived totals for one side (tools or servers).
struct SideStats {
    PartitionCells cells;
    std::uint64_t total = 0; // includes the all-safe class

    std::uint64_t risky() const { return cells.risky(); }
    std::uint64_t none() const { return total - risky(); }
    std::uint64_t total_eit() const { return cells.total_eit(); }
    std::uint64_t total_pat() const { return cells.total_pat(); }
    std::uint64_t total_nat() const { return cells.total_nat(); }

    bool operator==(const SideStats&) const = default;
};

inline void to_json(json& j, const SideStats& s) {
    j = json{{"cells", s.cells},
             {"total", s.total},
             {"risky", s.risky()},
             {"eit", s.total_eit()},
             {"pat", s.total_pat()},
             {"nat", s.total_nat()}};
}

inline void from_json(const json& j, SideStats& s) {
    s.cells = j.value("cells", PartitionCells{});
    s.total = j.value("total", std::uint64_t{0});
}

/// Tool-side partition stats from classified tools.
inline SideStats tool_partition_stats(std::span<const ClassifiedTool> tools) {
    SideStats s;
    for (const auto& t : tools) {
        ++s.total;
        s.cells.add(partition_cell(t.caps));
    }
    return s;
}

/// Tool-side stats from raw published cell counts.
inline SideStats tool_partition_stats(const PartitionCells& cells, std::uint64_t total) {
    return SideStats{cells, total};
}

/// Server-side partition stats from profiles.
inline SideStats server_partition_stats(std::span<const ServerRiskProfile> profiles) {
    SideStats s;
    for (const auto& p : profiles) {
        ++s.total;
        s.cells.add(partition_cell(p.server_caps()));
    }
    return s;
}

inline SideStats server_partition_stats(const PartitionCells& cells, std::uint64_t total) {
    return SideStats{cells, total};
}

// ---------------------------------------------------------------------------
// Category x capability matrix with competition ranking.

struct StageCell {
    std::uint64_t count = 0;
    unsigned count_rank = 0;
    unsigned proportion_rank = 0;

    bool operator==(const StageCell&) const = default;
};

inline void to_json(json& j, const StageCell& s) {
    j = json{{"count", s.count}, {"count_rank", s.count_rank}, {"prop_rank", s.proportion_rank}};
}

inline void from_json(const json& j, StageCell& s) {
    s.count = j.value("count", std::uint64_t{0});
    s.count_rank = j.value("count_rank", 0u);
    s.proportion_rank = j.value("prop_rank", 0u);
}

struct CategoryRow {
    std::string category;
    std::uint64_t size = 0;     // servers in the category
    StageCell ingestion;        // servers with any EIT
    StageCell collection;       // servers with any PAT
    StageCell disclosure;       // servers with any NAT

    bool operator==(const CategoryRow&) const = default;
};

inline void to_json(json& j, const CategoryRow& r) {
    j = json{{"category", r.category},
             {"size", r.size},
             {"ingestion", r.ingestion},
             {"collection", r.collection},
             {"disclosure", r.disclosure}};
}

inline void from_json(const json& j, CategoryRow& r) {
    r.category = j.value("category", "");
    r.size = j.value("size", std::uint64_t{0});
    r.ingestion = j.value("ingestion", StageCell{});
    r.collection = j.value("collection", StageCell{});
    r.disclosure = j.value("disclosure", StageCell{});
}

namespace detail {

/// Competition ranking, ties sharing the smaller rank. `better(a, b)`
/// returns true when a strictly outranks b.
template <typename GetKey, typename Better>
inline void assign_ranks(std::vector<CategoryRow>& rows, GetKey key, Better better,
                         unsigned StageCell::*field,
                         StageCell CategoryRow::*stage) {
    std::vector<std::size_t> order(rows.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return better(key(rows[a]), key(rows[b]));
    });
    unsigned rank = 0;
    for (std::size_t i = 0; i < order.size(); ++i) {
        if (i == 0 || better(key(rows[order[i - 1]]), key(rows[order[i]]))) {
            rank = static_cast<unsigned>(i + 1);
        }
        rows[order[i]].*stage.*field = rank;
    }
}

} // namespace detail

/// Builds the category x stage matrix. Counts come from profiles'
/// server-level capabilities; ranks use exact proportions, not their
/// rounded prints. Input profiles must carry a category.
inline std::vector<CategoryRow> category_matrix(std::span<const ServerRiskProfile> profiles) {
    std::map<std::string, CategoryRow> rows;
    for (const auto& p : profiles) {
        auto& row = rows[p.category];
        row.category = p.category;
        ++row.size;
        auto caps = p.server_caps();
        if (caps.eit) ++row.ingestion.count;
        if (caps.pat) ++row.collection.count;
        if (caps.nat) ++row.disclosure.count;
    }
    std::vector<CategoryRow> out;
    out.reserve(rows.size());
    for (auto& [name, row] : rows) out.push_back(std::move(row));
    // Ranked in the canonical category order when known, appended otherwise.
    auto canon = [](const std::string& c) {
        const auto& known = known_categories();
        auto it = std::find(known.begin(), known.end(), c);
        return it == known.end() ? known.size() : static_cast<std::size_t>(it - known.begin());
    };
    std::stable_sort(out.begin(), out.end(), [&](const CategoryRow& a, const CategoryRow& b) {
        auto ca = canon(a.category), cb = canon(b.category);
        if (ca != cb) return ca < cb;
        return a.category < b.category;
    });

    struct Frac {
        std::uint64_t num, den;
    };
    for (StageCell CategoryRow::*stage :
         {&CategoryRow::ingestion, &CategoryRow::collection, &CategoryRow::disclosure}) {
        detail::assign_ranks(
            out, [stage](const CategoryRow& r) { return (r.*stage).count; },
            [](std::uint64_t a, std::uint64_t b) { return a > b; }, &StageCell::count_rank, stage);
        detail::assign_ranks(
            out, [stage](const CategoryRow& r) { return Frac{(r.*stage).count, r.size}; },
            [](const Frac& a, const Frac& b) {
                return pct::compare_fraction(a.num, a.den, b.num, b.den) > 0;
            },
            &StageCell::proportion_rank, stage);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Star histogram and source breakdown.

struct StarBucket {
    std::uint64_t lo = 0;
    std::optional<std::uint64_t> hi; // inclusive; absent = open-ended
    std::uint64_t count = 0;

    std::string label() const {
        if (!hi) return "> " + std::to_string(lo == 0 ? 0 : lo - 1);
        return std::to_string(lo) + "-" + std::to_string(*hi);
    }

    bool operator==(const StarBucket&) const = default;
};

inline void to_json(json& j, const StarBucket& b) {
    j = json{{"lo", b.lo}, {"count", b.count}};
    if (b.hi) j["hi"] = *b.hi;
}

inline void from_json(const json& j, StarBucket& b) {
    b.lo = j.value("lo", std::uint64_t{0});
    if (j.contains("hi")) b.hi = j["hi"].get<std::uint64_t>();
    b.count = j.value("count", std::uint64_t{0});
}

struct StarHistogram {
    std::vector<StarBucket> buckets;
    std::uint64_t unknown = 0; // servers without star data, never bucketed as 0

    bool operator==(const StarHistogram&) const = default;
};

inline void to_json(json& j, const StarHistogram& h) {
    j = json{{"buckets", h.buckets}, {"unknown", h.unknown}};
}

inline void from_json(const json& j, StarHistogram& h) {
    h.buckets = j.value("buckets", std::vector<StarBucket>{});
    h.unknown = j.value("unknown", std::uint64_t{0});
}

inline std::vector<StarBucket> default_star_buckets() {
    return {{0, 100, 0}, {101, 1000, 0}, {1001, std::nullopt, 0}};
}

/// Buckets risky servers by repository stars. A server with no star data
/// counts as unknown, distinct from zero stars.
inline StarHistogram star_histogram(std::span<const ServerRiskProfile> profiles,
                                    const std::map<std::string, ServerManifest>& manifests,
                                    std::vector<StarBucket> buckets = default_star_buckets()) {
    StarHistogram h;
    h.buckets = std::move(buckets);
    for (const auto& p : profiles) {
        if (!p.server_caps().risky()) continue;
        auto it = manifests.find(p.server_id);
        if (it == manifests.end() || !it->second.stars) {
            ++h.unknown;
            continue;
        }
        std::uint64_t stars = *it->second.stars;
        for (auto& b : h.buckets) {
            if (stars >= b.lo && (!b.hi || stars <= *b.hi)) {
                ++b.count;
                break;
            }
        }
    }
    return h;
}

struct SourceRow {
    std::string source;
    std::uint64_t servers = 0;
    std::uint64_t tools = 0;

    bool operator==(const SourceRow&) const = default;
};

inline void to_json(json& j, const SourceRow& r) {
    j = json{{"source", r.source}, {"servers", r.servers}, {"tools", r.tools}};
}

inline void from_json(const json& j, SourceRow& r) {
    r.source = j.value("source", "");
    r.servers = j.value("servers", std::uint64_t{0});
    r.tools = j.value("tools", std::uint64_t{0});
}

/// Per-platform server and tool counts. Tools attribute to their server's
/// source; tools of unknown servers are ignored.
inline std::vector<SourceRow> source_breakdown(std::span<const ServerManifest> manifests,
                                               std::span<const ToolRecord> tools) {
    std::map<std::string, SourceRow> rows;
    std::map<std::string, std::string> source_of;
    for (const auto& m : manifests) {
        auto label = source_label(m.source);
        source_of[m.id()] = label;
        auto& row = rows[label];
        row.source = label;
        ++row.servers;
    }
    for (const auto& t : tools) {
        auto it = source_of.find(t.server_id);
        if (it == source_of.end()) continue;
        ++rows[it->second].tools;
    }
    std::vector<SourceRow> out;
    for (auto& [name, row] : rows) out.push_back(std::move(row));
    // Largest server count first, alphabetical on ties.
    std::stable_sort(out.begin(), out.end(), [](const SourceRow& a, const SourceRow& b) {
        if (a.servers != b.servers) return a.servers > b.servers;
        return a.source < b.source;
    });
    return out;
}

// ---------------------------------------------------------------------------
// The full ecosystem measurement bundle.

struct ChainStats {
    std::uint64_t intra = 0;
    std::uint64_t cross = 0;
    std::uint64_t full_chain_servers = 0;

    bool operator==(const ChainStats&) const = default;
};

inline void to_json(json& j, const ChainStats& c) {
    j = json{{"intra", c.intra}, {"cross", c.cross}, {"full_chain_servers", c.full_chain_servers}};
}

inline void from_json(const json& j, ChainStats& c) {
    c.intra = j.value("intra", std::uint64_t{0});
    c.cross = j.value("cross", std::uint64_t{0});
    c.full_chain_servers = j.value("full_chain_servers", std::uint64_t{0});
}

struct EcosystemStats {
    SideStats tools;
    SideStats servers;
    std::vector<CategoryRow> categories;
    StarHistogram stars;
    std::vector<SourceRow> sources;
    ChainStats chains;
    // Free-form annotations, e.g. where recomputed arithmetic disagrees
    // with an external reference table.
    std::vector<std::string> notes;

    bool operator==(const EcosystemStats&) const = default;
};

inline void to_json(json& j, const EcosystemStats& s) {
    j = json{{"tools", s.tools},     {"servers", s.servers}, {"categories", s.categories},
             {"stars", s.stars},     {"sources", s.sources}, {"chains", s.chains},
             {"notes", s.notes}};
}

inline void from_json(const json& j, EcosystemStats& s) {
    s.tools = j.value("tools", SideStats{});
    s.servers = j.value("servers", SideStats{});
    s.categories = j.value("categories", std::vector<CategoryRow>{});
    s.stars = j.value("stars", StarHistogram{});
    s.sources = j.value("sources", std::vector<SourceRow>{});
    s.chains = j.value("chains", ChainStats{});
    s.notes = j.value("notes", std::vector<std::string>{});
}

/// Computes the whole bundle from a labeled dataset.
inline EcosystemStats compute_ecosystem_stats(std::span<const ClassifiedTool> classified,
                                              std::span<const ServerRiskProfile> profiles,
                                              std::span<const ServerManifest> manifests) {
    EcosystemStats s;
    s.tools = tool_partition_stats(classified);
    s.servers = server_partition_stats(profiles);
    bool has_categories =
        std::any_of(profiles.begin(), profiles.end(),
                    [](const ServerRiskProfile& p) { return !p.category.empty(); });
    if (has_categories) s.categories = category_matrix(profiles);
    std::map<std::string, ServerManifest> by_id;
    for (const auto& m : manifests) by_id.emplace(m.id(), m);
    s.stars = star_histogram(profiles, by_id);
    std::vector<ToolRecord> tool_records;
    tool_records.reserve(classified.size());
    for (const auto& c : classified) tool_records.push_back(c.tool);
    s.sources = source_breakdown(manifests, tool_records);
    std::uint64_t intra = 0;
    for (const auto& p : profiles) intra += intra_chain_count(p);
    s.chains.intra = intra;
    s.chains.cross = cross_chain_count(profiles);
    s.chains.full_chain_servers = full_chain_servers(profiles).size();
    return s;
}

// ---------------------------------------------------------------------------
// Deterministic report rendering.

enum class ReportFormat { text, markdown, json_format, csv };

inline std::optional<ReportFormat> report_format_from(const std::string& s) {
    if (s == "text") return ReportFormat::text;
    if (s == "markdown" || s == "md") return ReportFormat::markdown;
    if (s == "json") return ReportFormat::json_format;
    if (s == "csv") return ReportFormat::csv;
    return std::nullopt;
}

namespace detail {

inline void render_side(std::ostringstream& out, const char* label, const SideStats& s,
                        bool markdown) {
    const auto& c = s.cells;
    if (markdown) {
        out << "| Cell | E | P | N | EP | PN | EN | EPN |\n";
        out << "| --- | --- | --- | --- | --- | --- | --- | --- |\n";
        out << "| " << label << " | " << c.e << " | " << c.p << " | " << c.n << " | " << c.ep
            << " | " << c.pn << " | " << c.en << " | " << c.epn << " |\n\n";
    } else {
        out << label << " cells: E=" << c.e << " P=" << c.p << " N=" << c.n << " EP=" << c.ep
            << " PN=" << c.pn << " EN=" << c.en << " EPN=" << c.epn << "\n";
    }
    out << "Totals: EIT=" << s.total_eit() << " PAT=" << s.total_pat() << " NAT=" << s.total_nat()
        << "\n";
    out << "Risky: " << s.risky() << " of " << s.total << " ("
        << pct::format(s.risky(), s.total, 2) << "%)\n\n";
}

inline std::string stage_cell_text(const StageCell& s, std::uint64_t size) {
    std::ostringstream out;
    out << s.count << " (" << s.count_rank << ") | " << pct::format(s.count, size, 1) << "% ("
        << s.proportion_rank << ")";
    return out.str();
}

} // namespace detail

/// Renders the whole stats bundle. Same stats always produce identical
/// bytes. Markdown tables mirror the source table layouts.
inline Result<std::string> render_report(const EcosystemStats& s, ReportFormat format) {
    using R = Result<std::string>;
    if (format == ReportFormat::json_format) {
        return json(s).dump(2) + "\n";
    }
    if (format == ReportFormat::csv) {
        std::ostringstream out;
        out << "category,size,ingestion_count,ingestion_count_rank,ingestion_proportion,"
               "ingestion_proportion_rank,collection_count,collection_count_rank,"
               "collection_proportion,collection_proportion_rank,disclosure_count,"
               "disclosure_count_rank,disclosure_proportion,disclosure_proportion_rank\n";
        for (const auto& row : s.categories) {
            out << '"' << row.category << '"' << ',' << row.size;
            for (const StageCell* cell : {&row.ingestion, &row.collection, &row.disclosure}) {
                out << ',' << cell->count << ',' << cell->count_rank << ','
                    << pct::format(cell->count, row.size, 1) << ',' << cell->proportion_rank;
            }
            out << '\n';
        }
        return out.str();
    }

    const bool md = format == ReportFormat::markdown;
    std::ostringstream out;
    out << (md ? "# Ecosystem report\n\n" : "Ecosystem report\n================\n\n");

    out << (md ? "## Tools\n\n" : "Tools\n-----\n");
    detail::render_side(out, "Tools", s.tools, md);
    out << (md ? "## Servers\n\n" : "Servers\n-------\n");
    detail::render_side(out, "Servers", s.servers, md);

    if (!s.sources.empty()) {
        out << (md ? "## Sources\n\n" : "Sources\n-------\n");
        std::uint64_t server_total = 0, tool_total = 0;
        for (const auto& r : s.sources) {
            server_total += r.servers;
            tool_total += r.tools;
        }
        if (md) {
            out << "| Sources | MCP Server | MCP Tool |\n| --- | --- | --- |\n";
            for (const auto& r : s.sources) {
                out << "| " << r.source << " | " << r.servers << " ("
                    << pct::format(r.servers, server_total, 1) << "%) | " << r.tools << " ("
                    << pct::format(r.tools, tool_total, 1) << "%) |\n";
            }
            out << "| Total | " << server_total << " | " << tool_total << " |\n\n";
        } else {
            for (const auto& r : s.sources) {
                out << r.source << ": " << r.servers << " servers ("
                    << pct::format(r.servers, server_total, 1) << "%), " << r.tools << " tools ("
                    << pct::format(r.tools, tool_total, 1) << "%)\n";
            }
            out << "Total: " << server_total << " servers, " << tool_total << " tools\n\n";
        }
    }

    if (!s.categories.empty()) {
        out << (md ? "## Capabilities by category\n\n" : "Capabilities by category\n------------------------\n");
        if (md) {
            out << "| Category | Parasitic Ingestion Count (Rank) | Parasitic Ingestion "
                   "Proportion (Rank) | Privacy Collection Count (Rank) | Privacy Collection "
                   "Proportion (Rank) | Privacy Disclosure Count (Rank) | Privacy Disclosure "
                   "Proportion (Rank) |\n";
            out << "| --- | --- | --- | --- | --- | --- | --- |\n";
            for (const auto& row : s.categories) {
                out << "| " << row.category;
                for (const StageCell* cell : {&row.ingestion, &row.collection, &row.disclosure}) {
                    out << " | " << cell->count << " (" << cell->count_rank << ") | "
                        << pct::format(cell->count, row.size, 1) << "% (" << cell->proportion_rank
                        << ")";
                }
                out << " |\n";
            }
            out << "\n";
        } else {
            for (const auto& row : s.categories) {
                out << row.category << " [" << row.size << " servers]\n";
                out << "  ingestion:  " << detail::stage_cell_text(row.ingestion, row.size) << "\n";
                out << "  collection: " << detail::stage_cell_text(row.collection, row.size) << "\n";
                out << "  disclosure: " << detail::stage_cell_text(row.disclosure, row.size) << "\n";
            }
            out << "\n";
        }
    }

    if (!s.stars.buckets.empty()) {
        out << (md ? "## Stars of risky servers\n\n" : "Stars of risky servers\n----------------------\n");
        for (const auto& b : s.stars.buckets)
            out << (md ? "- " : "  ") << b.label() << ": " << b.count << "\n";
        out << (md ? "- " : "  ") << "unknown: " << s.stars.unknown << "\n\n";
    }

    out << (md ? "## Chains\n\n" : "Chains\n------\n");
    out << "Intra-server chains: " << s.chains.intra << "\n";
    out << "Cross-server chains (population-wide, superset of intra): " << s.chains.cross << "\n";
    out << "Full-chain servers: " << s.chains.full_chain_servers << "\n";

    if (!s.notes.empty()) {
        out << (md ? "\n## Notes\n\n" : "\nNotes\n-----\n");
        for (const auto& note : s.notes) out << (md ? "- " : "  ") << note << "\n";
    }
    return R(out.str());
}

inline Result<std::string> render_report(const EcosystemStats& s, const std::string& format) {
    auto f = report_format_from(format);
    if (!f) return Result<std::string>::failure("unknown-format", "unknown report format " + format);
    return render_report(s, *f);
}

} // namespace mcpscan
