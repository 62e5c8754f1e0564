// mcpscan CLI: scan MCP servers, classify their tools, profile servers,
// enumerate attack chains, compute ecosystem stats, audit invocation
// logs, and replay sandboxed attack scenarios.

#include <ctime>
#include <filesystem>
#include <iostream>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mcpscan/audit.hpp"
#include "mcpscan/chains.hpp"
#include "mcpscan/http_judge.hpp"
#include "mcpscan/judges.hpp"
#include "mcpscan/jsonl.hpp"
#include "mcpscan/registry.hpp"
#include "mcpscan/replay.hpp"
#include "mcpscan/scan.hpp"
#include "mcpscan/stats.hpp"
#include "mcpscan/voting.hpp"

namespace fs = std::filesystem;
using namespace mcpscan;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInternal = 1;
constexpr int kExitEmptyInput = 2;

std::string iso_now() {
    std::time_t t = std::time(nullptr);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    return buf;
}

fs::path default_mock_server_bin() {
    std::error_code ec;
    auto self = fs::read_symlink("/proc/self/exe", ec);
    if (!ec) {
        auto candidate = self.parent_path() / "mcpscan-mock-server";
        if (fs::exists(candidate)) return candidate;
    }
    if (const char* env = std::getenv("MCPSCAN_MOCK_SERVER")) return env;
    return {};
}

template <typename T>
int load_rows(const fs::path& path, std::vector<T>& out, const char* what) {
    auto report = jsonl::read_lines(path);
    if (!report.ok()) {
        std::cerr << "error: " << report.error().message << "\n";
        return kExitEmptyInput;
    }
    for (const auto& row : report.value().rows) {
        try {
            out.push_back(row.get<T>());
        } catch (const std::exception& e) {
            std::cerr << "warning: skipping malformed " << what << " row: " << e.what() << "\n";
        }
    }
    for (const auto& err : report.value().errors)
        std::cerr << "warning: " << path.string() << ":" << err.line << ": " << err.message << "\n";
    if (out.empty()) {
        std::cerr << "error: no usable " << what << " rows in " << path.string() << "\n";
        return kExitEmptyInput;
    }
    return kExitOk;
}

struct ScanFlags {
    std::string manifests;
    std::string out_dir;
    unsigned concurrency = 8;
    unsigned handshake_timeout_ms = 30000;
    unsigned request_timeout_ms = 15000;
    std::vector<std::string> allow_custom;
    bool custom_ok = false;
};

int run_scan(const ScanFlags& flags, std::vector<ServerManifest>* manifests_out = nullptr,
             std::vector<ToolRecord>* tools_out = nullptr) {
    auto load = load_manifests(flags.manifests);
    if (!load.ok()) {
        std::cerr << "error: " << load.error().message << "\n";
        return kExitEmptyInput;
    }
    for (const auto& err : load.value().errors)
        std::cerr << "warning: manifest line " << err.line << ": " << err.message << "\n";

    auto deduped = dedupe(load.value().manifests);
    if (deduped.duplicates)
        std::cerr << "dedupe: dropped " << deduped.duplicates << " duplicate manifests\n";
    std::set<std::string> whitelist(flags.allow_custom.begin(), flags.allow_custom.end());
    auto runnable = filter_runnable(deduped.manifests, whitelist, flags.custom_ok);
    if (runnable.excluded)
        std::cerr << "filter: excluded " << runnable.excluded << " non-runnable manifests\n";
    if (runnable.manifests.empty()) {
        std::cerr << "error: no runnable manifests\n";
        return kExitEmptyInput;
    }

    SessionOptions opts;
    opts.handshake_timeout = std::chrono::milliseconds(flags.handshake_timeout_ms);
    opts.request_timeout = std::chrono::milliseconds(flags.request_timeout_ms);
    auto results = scan_batch(runnable.manifests, opts, flags.concurrency);

    RegistryStore store;
    std::vector<json> outcome_rows, tool_rows;
    std::vector<ToolRecord> all_tools;
    for (std::size_t i = 0; i < results.size(); ++i) {
        auto add = store.add_manifest(runnable.manifests[i]);
        (void)add;
        auto rec = store.record_outcome(results[i].outcome);
        (void)rec;
        store.record_tools(results[i].outcome.server_id, results[i].tools);
        outcome_rows.push_back(json(results[i].outcome));
        for (const auto& t : results[i].tools) {
            tool_rows.push_back(json(t));
            all_tools.push_back(t);
        }
    }

    fs::create_directories(flags.out_dir);
    jsonl::write_lines(fs::path(flags.out_dir) / "outcomes.jsonl", outcome_rows);
    jsonl::write_lines(fs::path(flags.out_dir) / "tools.jsonl", tool_rows);

    auto summary = store.summary();
    std::cout << "scan: attempted " << summary.attempted << ", connected " << summary.connected
              << " (" << pct::format(summary.connected, summary.attempted, 1) << "%), tools "
              << summary.tools;
    if (summary.skipped_entries) std::cout << ", skipped entries " << summary.skipped_entries;
    std::cout << "\n";

    if (manifests_out) *manifests_out = runnable.manifests;
    if (tools_out) *tools_out = all_tools;
    return summary.connected > 0 ? kExitOk : kExitEmptyInput;
}

Result<ClassifyConfig> load_judge_config(const std::string& path) {
    using R = Result<ClassifyConfig>;
    if (path.empty()) return ClassifyConfig::default_lexical();
    auto text = jsonl::read_file(path);
    if (!text.ok()) return text.error();
    json config = json::parse(text.value(), nullptr, false);
    if (config.is_discarded()) return R::failure("bad-config", "judge config is not valid JSON");
    ClassifyConfig out;
    out.vote_rule = config.value("vote", "unanimous") == "majority" ? VoteRule::majority
                                                                    : VoteRule::unanimous;
    out.batch_ceiling = config.value("batch_ceiling", std::size_t{100});
    for (const auto& j : config.value("judges", json::array())) {
        JudgeSpec spec;
        spec.id = j.value("id", "");
        if (spec.id.empty()) return R::failure("bad-config", "judge without id");
        std::string kind = j.value("kind", "lexical");
        if (kind == "remote") {
            spec.remote = true;
            spec.remote_config = j.get<RemoteJudgeConfig>();
            spec.remote_config.judge_id = spec.id;
        } else if (j.contains("rules")) {
            auto rules_text = jsonl::read_file(j["rules"].get<std::string>());
            if (!rules_text.ok()) return rules_text.error();
            json rules = json::parse(rules_text.value(), nullptr, false);
            if (rules.is_discarded())
                return R::failure("bad-config", "rule table is not valid JSON");
            spec.rules = rules.get<RuleTable>();
        }
        out.judges.push_back(std::move(spec));
    }
    if (out.judges.empty()) return R::failure("bad-config", "judge config lists no judges");
    return out;
}

int run_classify(const std::string& tools_path, const std::string& out_path,
                 const std::string& judges_path,
                 std::vector<ClassifiedTool>* classified_out = nullptr) {
    std::vector<ToolRecord> tools;
    if (int rc = load_rows(tools_path, tools, "tool"); rc != kExitOk) return rc;
    auto config = load_judge_config(judges_path);
    if (!config.ok()) {
        std::cerr << "error: " << config.error().message << "\n";
        return kExitEmptyInput;
    }
    auto result = classify_tools(tools, config.value(), http_judge_transport, iso_now());
    for (const auto& w : result.warnings) std::cerr << "warning: " << w << "\n";

    std::vector<json> rows;
    for (const auto& c : result.classified) rows.push_back(json(c));
    if (!jsonl::write_lines(out_path, rows)) {
        std::cerr << "error: cannot write " << out_path << "\n";
        return kExitInternal;
    }
    std::cout << "classify: " << result.classified.size() << " tools across "
              << result.stats.servers << " servers";
    if (result.stats.failed_batches)
        std::cout << ", failed batches " << result.stats.failed_batches;
    if (result.stats.unclassifiable_tools)
        std::cout << ", unclassifiable " << result.stats.unclassifiable_tools;
    std::cout << "\n";
    if (classified_out) *classified_out = result.classified;
    return kExitOk;
}

std::vector<ServerRiskProfile> build_profiles(const std::vector<ClassifiedTool>& classified,
                                              const std::vector<ServerManifest>& manifests) {
    auto profiles = profile_all(classified);
    std::map<std::string, const ServerManifest*> by_id;
    for (const auto& m : manifests) by_id[m.id()] = &m;
    for (auto& p : profiles) {
        auto it = by_id.find(p.server_id);
        if (it != by_id.end()) {
            p.category = classify_server_category(
                *it->second, it->second->description,
                [](const ServerManifest& m, const std::string& d) {
                    return lexical_category_judge(m, d);
                });
        }
    }
    return profiles;
}

int run_profile(const std::string& classified_path, const std::string& manifests_path,
                const std::string& out_path) {
    std::vector<ClassifiedTool> classified;
    if (int rc = load_rows(classified_path, classified, "classified tool"); rc != kExitOk) return rc;
    std::vector<ServerManifest> manifests;
    if (!manifests_path.empty()) {
        auto load = load_manifests(manifests_path);
        if (load.ok()) manifests = load.value().manifests;
    }
    auto profiles = build_profiles(classified, manifests);
    std::vector<json> rows;
    for (const auto& p : profiles) rows.push_back(json(p));
    if (!jsonl::write_lines(out_path, rows)) {
        std::cerr << "error: cannot write " << out_path << "\n";
        return kExitInternal;
    }
    std::cout << "profile: " << profiles.size() << " servers\n";
    return kExitOk;
}

int run_chains(const std::string& classified_path, const std::string& mode_str,
               std::uint64_t cap, const std::string& out_path) {
    std::vector<ClassifiedTool> classified;
    if (int rc = load_rows(classified_path, classified, "classified tool"); rc != kExitOk) return rc;
    ChainMode mode = mode_str == "list" ? ChainMode::list : ChainMode::count;

    auto profiles = profile_all(classified);
    std::uint64_t intra_total = 0;
    for (const auto& p : profiles) intra_total += intra_chain_count(p);
    auto cross = enumerate_cross_chains(classified, mode, cap);

    std::cout << "chains: intra-server " << intra_total << ", cross-server " << cross.count
              << ", full-chain servers " << full_chain_servers(profiles).size() << "\n";
    if (cross.overflow) std::cout << "chains: count saturated 64-bit range\n";

    if (mode == ChainMode::list && !out_path.empty()) {
        std::vector<json> rows;
        for (const auto& c : cross.chains) rows.push_back(json(c));
        if (!jsonl::write_lines(out_path, rows)) {
            std::cerr << "error: cannot write " << out_path << "\n";
            return kExitInternal;
        }
        std::cout << "chains: wrote " << cross.chains.size() << " (cap " << cap << ")\n";
    }
    return kExitOk;
}

int run_stats(const std::string& classified_path, const std::string& profiles_path,
              const std::string& manifests_path, const std::string& out_path) {
    std::vector<ClassifiedTool> classified;
    if (int rc = load_rows(classified_path, classified, "classified tool"); rc != kExitOk) return rc;
    std::vector<ServerRiskProfile> profiles;
    if (!profiles_path.empty()) {
        if (int rc = load_rows(profiles_path, profiles, "profile"); rc != kExitOk) return rc;
    } else {
        profiles = profile_all(classified);
    }
    std::vector<ServerManifest> manifests;
    if (!manifests_path.empty()) {
        auto load = load_manifests(manifests_path);
        if (load.ok()) manifests = load.value().manifests;
    }
    auto stats = compute_ecosystem_stats(classified, profiles, manifests);
    if (!jsonl::write_file(out_path, json(stats).dump(2) + "\n")) {
        std::cerr << "error: cannot write " << out_path << "\n";
        return kExitInternal;
    }
    std::cout << "stats: tools " << stats.tools.total << " (risky " << stats.tools.risky()
              << "), servers " << stats.servers.total << " (risky " << stats.servers.risky()
              << ")\n";
    return kExitOk;
}

int run_report(const std::string& stats_path, const std::string& format,
               const std::string& out_path) {
    auto text = jsonl::read_file(stats_path);
    if (!text.ok()) {
        std::cerr << "error: " << text.error().message << "\n";
        return kExitEmptyInput;
    }
    json parsed = json::parse(text.value(), nullptr, false);
    if (parsed.is_discarded()) {
        std::cerr << "error: stats file is not valid JSON\n";
        return kExitEmptyInput;
    }
    EcosystemStats stats = parsed.get<EcosystemStats>();
    auto rendered = render_report(stats, format);
    if (!rendered.ok()) {
        std::cerr << "error: " << rendered.error().message << "\n";
        return kExitEmptyInput;
    }
    if (out_path.empty()) {
        std::cout << rendered.value();
    } else if (!jsonl::write_file(out_path, rendered.value())) {
        std::cerr << "error: cannot write " << out_path << "\n";
        return kExitInternal;
    }
    return kExitOk;
}

int run_audit(const std::string& events_path, std::uint64_t window, const std::string& format,
              const std::string& out_path) {
    std::vector<InvocationEvent> events;
    if (int rc = load_rows(events_path, events, "event"); rc != kExitOk) return rc;
    AuditPolicy policy;
    if (window > 0) policy.max_window = window;
    auto findings = scan_log(events, policy);
    if (!findings.ok()) {
        std::cerr << "error: " << findings.error().message << "\n";
        return kExitEmptyInput;
    }
    if (format == "jsonl") {
        std::vector<json> rows;
        for (const auto& f : findings.value()) rows.push_back(json(f));
        if (out_path.empty()) {
            std::cout << jsonl::render_lines(rows);
        } else if (!jsonl::write_lines(out_path, rows)) {
            std::cerr << "error: cannot write " << out_path << "\n";
            return kExitInternal;
        }
    } else {
        for (const auto& f : findings.value()) {
            std::cout << f.session_id << ": " << finding_kind_label(f.kind) << " " << f.e_tool
                      << "(#" << f.e_seq << ") -> " << f.p_tool << "(#" << f.p_seq << ") -> "
                      << f.n_tool << "(#" << f.n_seq << ")\n";
        }
    }
    std::cout << "audit: " << findings.value().size() << " finding(s) over " << events.size()
              << " events\n";
    return kExitOk;
}

int run_replay(const std::string& scenario_str, bool isolation, bool consent, bool audit,
               const std::string& sandbox, const std::string& mock_bin, bool verify) {
    auto id = scenario_from_label(scenario_str);
    if (!id) {
        std::cerr << "error: unknown scenario " << scenario_str
                  << " (expected upd-social, rce, or file-write)\n";
        return kExitEmptyInput;
    }
    auto scenario = make_scenario(*id, sandbox);
    if (!scenario.ok()) {
        std::cerr << "error: " << scenario.error().message << "\n";
        return kExitInternal;
    }
    ReplayOptions options;
    options.mock_server_bin = mock_bin.empty() ? default_mock_server_bin() : fs::path(mock_bin);
    if (options.mock_server_bin.empty()) {
        std::cerr << "error: cannot locate mcpscan-mock-server (use --mock-server)\n";
        return kExitEmptyInput;
    }
    DeputyPolicy policy{isolation, consent, audit};
    auto run = run_scenario(scenario.value(), policy, options);
    if (!run.ok()) {
        std::cerr << "error: " << run.error().message << "\n";
        return kExitInternal;
    }
    const auto& r = run.value();
    std::cout << "scenario: " << scenario.value().label << "\n";
    std::cout << "outcome: " << outcome_label(r.outcome, r.blocked_stage) << "\n";
    std::cout << "calls:";
    for (const auto& ev : r.log) std::cout << " " << ev.tool_name;
    std::cout << "\n";
    if (audit) std::cout << "audit findings: " << r.findings.size() << "\n";
    std::cout << "hermetic: sockets=" << (r.sockets_clean ? "clean" : "DIRTY")
              << " canary=" << (r.canary_intact ? "intact" : "MODIFIED") << "\n";
    std::cout << "events log: " << (fs::path(sandbox) / "log" / "events.jsonl").string() << "\n";
    if (verify) {
        auto report = verify_scenario(scenario.value(), r, policy);
        for (const auto& d : report.diffs) std::cout << "verify: " << d << "\n";
        std::cout << "verify: " << (report.pass ? "pass" : "fail") << "\n";
        return report.pass ? kExitOk : kExitInternal;
    }
    return kExitOk;
}

int run_pipeline(const ScanFlags& flags, const std::string& judges_path,
                 const std::string& format) {
    fs::create_directories(flags.out_dir);
    std::vector<ServerManifest> manifests;
    std::vector<ToolRecord> tools;
    if (int rc = run_scan(flags, &manifests, &tools); rc != kExitOk) {
        std::cerr << "pipeline: stage scan failed\n";
        return rc;
    }
    if (tools.empty()) {
        std::cerr << "pipeline: stage scan produced no tools\n";
        return kExitEmptyInput;
    }
    auto config = load_judge_config(judges_path);
    if (!config.ok()) {
        std::cerr << "pipeline: stage classify failed: " << config.error().message << "\n";
        return kExitEmptyInput;
    }
    auto classify_result = classify_tools(tools, config.value(), http_judge_transport, iso_now());
    for (const auto& w : classify_result.warnings) std::cerr << "warning: " << w << "\n";
    std::vector<json> rows;
    for (const auto& c : classify_result.classified) rows.push_back(json(c));
    jsonl::write_lines(fs::path(flags.out_dir) / "classified.jsonl", rows);
    std::cout << "classify: " << classify_result.classified.size() << " tools\n";

    auto profiles = build_profiles(classify_result.classified, manifests);
    rows.clear();
    for (const auto& p : profiles) rows.push_back(json(p));
    jsonl::write_lines(fs::path(flags.out_dir) / "profiles.jsonl", rows);

    auto stats = compute_ecosystem_stats(classify_result.classified, profiles, manifests);
    jsonl::write_file(fs::path(flags.out_dir) / "stats.json", json(stats).dump(2) + "\n");

    auto rendered = render_report(stats, format);
    if (!rendered.ok()) {
        std::cerr << "pipeline: stage report failed: " << rendered.error().message << "\n";
        return kExitEmptyInput;
    }
    std::string ext = format == "markdown" || format == "md" ? ".md"
                      : format == "csv"                      ? ".csv"
                      : format == "json"                     ? ".json"
                                                             : ".txt";
    auto report_path = fs::path(flags.out_dir) / ("report" + ext);
    jsonl::write_file(report_path, rendered.value());
    std::cout << "pipeline: report at " << report_path.string() << "\n";
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"MCP ecosystem scanner and parasitic-toolchain analysis kit"};
    app.require_subcommand(1);

    ScanFlags scan_flags;
    std::string judges_path, rules_path, format = "text", out_path, out_dir;

    auto add_scan_flags = [&](CLI::App* cmd) {
        cmd->add_option("--manifests", scan_flags.manifests, "manifest JSONL file")->required();
        cmd->add_option("--out", scan_flags.out_dir, "output directory")->required();
        cmd->add_option("--concurrency", scan_flags.concurrency, "simultaneous sessions");
        cmd->add_option("--handshake-timeout", scan_flags.handshake_timeout_ms,
                        "per-server handshake timeout (ms)");
        cmd->add_option("--request-timeout", scan_flags.request_timeout_ms,
                        "per-request timeout (ms)");
        cmd->add_option("--allow-custom", scan_flags.allow_custom,
                        "whitelist a custom-runner manifest by name or id");
        cmd->add_flag("--custom-ok", scan_flags.custom_ok, "whitelist every custom manifest");
    };

    auto* scan_cmd = app.add_subcommand("scan", "enumerate tools of every manifest server");
    add_scan_flags(scan_cmd);

    auto* classify_cmd = app.add_subcommand("classify", "judge + vote capability labels");
    std::string tools_path, classified_path;
    classify_cmd->add_option("--tools", tools_path, "tools JSONL from scan")->required();
    classify_cmd->add_option("--out", out_path, "classified JSONL output")->required();
    classify_cmd->add_option("--judges", judges_path, "judge config JSON (default: lexical x3)");

    auto* profile_cmd = app.add_subcommand("profile", "aggregate per-server risk profiles");
    std::string manifests_path, profiles_path;
    profile_cmd->add_option("--classified", classified_path, "classified JSONL")->required();
    profile_cmd->add_option("--manifests", manifests_path, "manifests JSONL (for categories)");
    profile_cmd->add_option("--out", out_path, "profiles JSONL output")->required();

    auto* chains_cmd = app.add_subcommand("chains", "count or list attack chains");
    std::string mode = "count";
    std::uint64_t cap = 10000;
    chains_cmd->add_option("--classified", classified_path, "classified JSONL")->required();
    chains_cmd->add_option("--mode", mode, "count|list")->check(CLI::IsMember({"count", "list"}));
    chains_cmd->add_option("--cap", cap, "max chains to materialize in list mode");
    chains_cmd->add_option("--out", out_path, "chains JSONL output (list mode)");

    auto* stats_cmd = app.add_subcommand("stats", "compute ecosystem statistics");
    stats_cmd->add_option("--classified", classified_path, "classified JSONL")->required();
    stats_cmd->add_option("--profiles", profiles_path, "profiles JSONL (recomputed if absent)");
    stats_cmd->add_option("--manifests", manifests_path, "manifests JSONL");
    stats_cmd->add_option("--out", out_path, "stats JSON output")->required();

    auto* report_cmd = app.add_subcommand("report", "render a stats file");
    std::string stats_path;
    report_cmd->add_option("--stats", stats_path, "stats JSON from the stats subcommand")
        ->required();
    report_cmd->add_option("--format", format, "text|markdown|json|csv")
        ->check(CLI::IsMember({"text", "markdown", "md", "json", "csv"}));
    report_cmd->add_option("--out", out_path, "output file (stdout if omitted)");

    auto* audit_cmd = app.add_subcommand("audit", "detect parasitic chains in an event log");
    std::string events_path, audit_format = "text";
    std::uint64_t window = 0;
    audit_cmd->add_option("--events", events_path, "invocation events JSONL")->required();
    audit_cmd->add_option("--window", window, "max seq distance e..n (0 = unbounded)");
    audit_cmd->add_option("--format", audit_format, "text|jsonl")
        ->check(CLI::IsMember({"text", "jsonl"}));
    audit_cmd->add_option("--out", out_path, "findings output file");

    auto* replay_cmd = app.add_subcommand("replay", "run a sandboxed attack scenario");
    std::string scenario_str = "upd-social", sandbox, mock_bin;
    bool isolation = false, consent = false, audit_on = false, verify = false;
    replay_cmd->add_option("--scenario", scenario_str, "upd-social|rce|file-write");
    replay_cmd->add_option("--sandbox", sandbox, "sandbox root directory")->required();
    replay_cmd->add_option("--mock-server", mock_bin, "path to mcpscan-mock-server");
    replay_cmd->add_flag("--isolation", isolation, "treat ingested text as inert");
    replay_cmd->add_flag("--consent", consent, "auto-deny sensitive tool calls");
    replay_cmd->add_flag("--audit", audit_on, "stream events to the sequence auditor");
    replay_cmd->add_flag("--verify", verify, "check the run against scenario expectations");

    auto* pipeline_cmd =
        app.add_subcommand("pipeline", "scan -> classify -> profile -> stats -> report");
    add_scan_flags(pipeline_cmd);
    pipeline_cmd->add_option("--judges", judges_path, "judge config JSON");
    pipeline_cmd->add_option("--format", format, "report format")
        ->check(CLI::IsMember({"text", "markdown", "md", "json", "csv"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitEmptyInput;
    }

    try {
        if (scan_cmd->parsed()) return run_scan(scan_flags);
        if (classify_cmd->parsed()) return run_classify(tools_path, out_path, judges_path);
        if (profile_cmd->parsed()) return run_profile(classified_path, manifests_path, out_path);
        if (chains_cmd->parsed()) return run_chains(classified_path, mode, cap, out_path);
        if (stats_cmd->parsed())
            return run_stats(classified_path, profiles_path, manifests_path, out_path);
        if (report_cmd->parsed()) return run_report(stats_path, format, out_path);
        if (audit_cmd->parsed()) return run_audit(events_path, window, audit_format, out_path);
        if (replay_cmd->parsed())
            return run_replay(scenario_str, isolation, consent, audit_on, sandbox, mock_bin,
                              verify);
        if (pipeline_cmd->parsed()) return run_pipeline(scan_flags, judges_path, format);
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return kExitInternal;
    }
    return kExitEmptyInput;
}
