#pragma once

#include <atomic>
#include <mutex>
#include <span>
#include <thread>
#include <vector>

#include "mcpscan/client.hpp"
#include "mcpscan/judges.hpp"
#include "mcpscan/voting.hpp"

namespace mcpscan {

/// Scans manifests with at most `concurrency` simultaneous sessions.
/// Sessions are fully independent; per-server failures are recorded
/// outcomes, never batch failures. Results come back in manifest order.
inline std::vector<ScanResult> scan_batch(std::span<const ServerManifest> manifests,
                                          const SessionOptions& opts = {},
                                          unsigned concurrency = 8) {
    std::vector<ScanResult> results(manifests.size());
    if (manifests.empty()) return results;
    concurrency = std::max(1u, std::min<unsigned>(concurrency, manifests.size()));

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= manifests.size()) return;
            results[i] = scan_server(manifests[i], opts);
        }
    };
    std::vector<std::thread> threads;
    threads.reserve(concurrency);
    for (unsigned t = 0; t < concurrency; ++t) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
    return results;
}

/// One judge backend: either a deterministic rule table or a remote
/// endpoint. The classify flow treats them identically.
struct JudgeSpec {
    std::string id;
    bool remote = false;
    RuleTable rules = RuleTable::defaults();
    RemoteJudgeConfig remote_config;
};

struct ClassifyConfig {
    std::vector<JudgeSpec> judges;
    VoteRule vote_rule = VoteRule::unanimous;
    std::size_t batch_ceiling = 100; // tools per prompt; oversized servers split

    static ClassifyConfig default_lexical() {
        ClassifyConfig c;
        for (const char* id : {"lex-1", "lex-2", "lex-3"}) {
            JudgeSpec spec;
            spec.id = id;
            c.judges.push_back(std::move(spec));
        }
        return c;
    }

    std::vector<std::string> judge_ids() const {
        std::vector<std::string> ids;
        for (const auto& j : judges) ids.push_back(j.id);
        return ids;
    }
};

struct ClassifyStats {
    std::uint64_t servers = 0;
    std::uint64_t failed_batches = 0; // excluded from downstream stats
    std::uint64_t unclassifiable_tools = 0;
};

struct ClassifyResult {
    std::vector<ClassifiedTool> classified;
    std::vector<UnclassifiableTool> unclassifiable;
    ClassifyStats stats;
    std::vector<std::string> warnings;
};

/// Runs every configured judge over every server batch and votes.
/// Judge failures mark the server's batch failed and move on.
inline ClassifyResult classify_tools(std::span<const ToolRecord> tools,
                                     const ClassifyConfig& config,
                                     const JudgeTransport& transport = {},
                                     const std::string& timestamp = "") {
    ClassifyResult out;
    std::map<std::string, std::vector<ToolRecord>> by_server;
    for (const auto& t : tools) by_server[t.server_id].push_back(t);
    out.stats.servers = by_server.size();

    VoteConfig vote;
    vote.judge_ids = config.judge_ids();
    vote.rule = config.vote_rule;

    for (const auto& [server_id, server_tools] : by_server) {
        std::vector<JudgeVerdict> verdicts;
        bool batch_failed = false;
        for (const auto& batch : split_batches(server_tools, config.batch_ceiling)) {
            for (const auto& judge : config.judges) {
                if (!judge.remote) {
                    auto v = lexical_judge(judge.id, batch, judge.rules);
                    verdicts.insert(verdicts.end(), v.begin(), v.end());
                    continue;
                }
                auto prompt = build_prompt(batch);
                if (!prompt.ok()) {
                    out.warnings.push_back(server_id + ": " + prompt.error().message);
                    batch_failed = true;
                    continue;
                }
                if (!transport) {
                    out.warnings.push_back(server_id + ": remote judge " + judge.id +
                                           " has no transport");
                    batch_failed = true;
                    continue;
                }
                auto v = remote_judge(prompt.value(), judge.remote_config, transport);
                if (!v.ok()) {
                    out.warnings.push_back(server_id + ": " + v.error().message);
                    batch_failed = true;
                    continue;
                }
                verdicts.insert(verdicts.end(), v.value().begin(), v.value().end());
            }
        }
        if (batch_failed) ++out.stats.failed_batches;
        auto voted = vote_batch(verdicts, server_tools, vote, timestamp);
        out.classified.insert(out.classified.end(), voted.classified.begin(),
                              voted.classified.end());
        out.unclassifiable.insert(out.unclassifiable.end(), voted.unclassifiable.begin(),
                                  voted.unclassifiable.end());
    }
    out.stats.unclassifiable_tools = out.unclassifiable.size();
    return out;
}

} // namespace mcpscan
