#pragma once

#include <algorithm>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "mcpscan/judges.hpp"
#include "mcpscan/taxonomy.hpp"

namespace mcpscan {

enum class VoteRule { unanimous, majority };

/// Unanimous is the default and the measurement-faithful mode; majority
/// exists only for sensitivity experiments.
struct VoteConfig {
    std::vector<std::string> judge_ids;
    VoteRule rule = VoteRule::unanimous;
};

/// Aggregates one tool's verdicts. Every required judge must have voted;
/// a missing judge makes the tool unclassifiable rather than "safe".
inline Result<CapabilitySet> unanimous_vote(std::span<const JudgeVerdict> verdicts,
                                            const VoteConfig& config) {
    using R = Result<CapabilitySet>;
    if (config.judge_ids.empty()) return R::failure("bad-config", "vote config has no judges");

    std::map<std::string, const JudgeVerdict*> by_judge;
    for (const auto& v : verdicts) by_judge[v.judge_id] = &v; // keyed merge, last wins

    std::vector<const JudgeVerdict*> required;
    for (const auto& id : config.judge_ids) {
        auto it = by_judge.find(id);
        if (it == by_judge.end())
            return R::failure("missing-judge", "no verdict from judge " + id);
        required.push_back(it->second);
    }

    CapabilitySet out;
    for (Capability c : kAllCapabilities) {
        std::size_t positive = 0;
        for (const auto* v : required)
            if (v->decision.has(c)) ++positive;
        bool value = config.rule == VoteRule::unanimous
                         ? positive == required.size()
                         : positive * 2 > required.size();
        out.set(c, value);
    }
    return out;
}

struct UnclassifiableTool {
    ToolRecord tool;
    std::vector<std::string> missing_judges;
};

struct VoteBatchResult {
    std::vector<ClassifiedTool> classified;
    std::vector<UnclassifiableTool> unclassifiable;
};

/// Applies the vote per tool over an arbitrary verdict pile. Missing
/// judges exclude the tool without aborting the batch. Output is stable:
/// ordered by (server id, tool name), independent of verdict input order.
inline VoteBatchResult vote_batch(std::span<const JudgeVerdict> all_verdicts,
                                  std::span<const ToolRecord> tools, const VoteConfig& config,
                                  const std::string& timestamp = "") {
    std::map<std::pair<std::string, std::string>, std::vector<JudgeVerdict>> by_tool;
    for (const auto& v : all_verdicts)
        by_tool[{v.server_id, v.tool_name}].push_back(v);

    std::vector<const ToolRecord*> ordered;
    for (const auto& t : tools) ordered.push_back(&t);
    std::stable_sort(ordered.begin(), ordered.end(), [](const ToolRecord* a, const ToolRecord* b) {
        return std::tie(a->server_id, a->name) < std::tie(b->server_id, b->name);
    });

    VoteBatchResult out;
    for (const auto* tool : ordered) {
        auto it = by_tool.find({tool->server_id, tool->name});
        std::span<const JudgeVerdict> verdicts =
            it == by_tool.end() ? std::span<const JudgeVerdict>{} : std::span<const JudgeVerdict>(it->second);
        auto vote = unanimous_vote(verdicts, config);
        if (vote.ok()) {
            ClassifiedTool c;
            c.tool = *tool;
            c.caps = vote.value();
            c.judge_ids = config.judge_ids;
            c.ts = timestamp;
            out.classified.push_back(std::move(c));
        } else {
            UnclassifiableTool u;
            u.tool = *tool;
            std::set<std::string> present;
            if (it != by_tool.end())
                for (const auto& v : it->second) present.insert(v.judge_id);
            for (const auto& id : config.judge_ids)
                if (!present.count(id)) u.missing_judges.push_back(id);
            out.unclassifiable.push_back(std::move(u));
        }
    }
    return out;
}

} // namespace mcpscan
