#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <random>

#include "mcpscan/voting.hpp"
#include "test_support.hpp"

using namespace mcpscan;

namespace {

JudgeVerdict verdict(const std::string& judge, const std::string& tool, CapabilitySet caps,
                     const std::string& server = "s1") {
    JudgeVerdict v;
    v.judge_id = judge;
    v.server_id = server;
    v.tool_name = tool;
    v.decision = caps;
    return v;
}

ToolRecord record(const std::string& tool, const std::string& server = "s1") {
    ToolRecord t;
    t.server_id = server;
    t.server_name = server;
    t.name = tool;
    return t;
}

const VoteConfig kThree{{"j1", "j2", "j3"}, VoteRule::unanimous};

} // namespace

TEST_CASE("unanimous vote requires every judge to agree on the positive label") {
    SECTION("all three positive yields true") {
        std::vector<JudgeVerdict> vs = {verdict("j1", "t", {true, true, true}),
                                        verdict("j2", "t", {true, true, true}),
                                        verdict("j3", "t", {true, true, true})};
        auto r = unanimous_vote(vs, kThree);
        REQUIRE(r.ok());
        CHECK(r.value() == CapabilitySet{true, true, true});
    }
    SECTION("a single dissent yields false") {
        std::vector<JudgeVerdict> vs = {verdict("j1", "t", {true, false, false}),
                                        verdict("j2", "t", {true, false, false}),
                                        verdict("j3", "t", {false, false, false})};
        auto r = unanimous_vote(vs, kThree);
        REQUIRE(r.ok());
        CHECK(r.value() == CapabilitySet{false, false, false});
    }
    SECTION("capabilities vote independently") {
        // EIT (T,T,T), PAT (T,F,T), NAT (F,F,F)
        std::vector<JudgeVerdict> vs = {verdict("j1", "t", {true, true, false}),
                                        verdict("j2", "t", {true, false, false}),
                                        verdict("j3", "t", {true, true, false})};
        auto r = unanimous_vote(vs, kThree);
        REQUIRE(r.ok());
        CHECK(r.value() == CapabilitySet{true, false, false});
    }
}

TEST_CASE("a missing required judge makes the tool unclassifiable") {
    std::vector<JudgeVerdict> vs = {verdict("j1", "t", {true, true, true}),
                                    verdict("j2", "t", {true, true, true})};
    auto r = unanimous_vote(vs, kThree);
    REQUIRE_FALSE(r.ok());
    CHECK(r.error().code == "missing-judge");
}

TEST_CASE("vote properties hold on randomized verdict sets") {
    std::mt19937 rng(1234);
    std::uniform_int_distribution<int> judges_count(1, 5);
    for (int round = 0; round < 1000; ++round) {
        int n = judges_count(rng);
        VoteConfig config;
        for (int j = 0; j < n; ++j) config.judge_ids.push_back("j" + std::to_string(j));
        std::vector<JudgeVerdict> vs;
        for (int j = 0; j < n; ++j)
            vs.push_back(verdict(config.judge_ids[static_cast<std::size_t>(j)], "t",
                                 testsupport::random_caps(rng)));

        auto base = unanimous_vote(vs, config);
        REQUIRE(base.ok());

        // Result is the AND over judges, per capability.
        for (Capability c : kAllCapabilities) {
            bool all = std::all_of(vs.begin(), vs.end(),
                                   [&](const JudgeVerdict& v) { return v.decision.has(c); });
            CHECK(base.value().has(c) == all);
        }

        // Monotone AND: flipping one positive to negative never turns a
        // capability on.
        std::uniform_int_distribution<std::size_t> pick(0, vs.size() - 1);
        auto flipped = vs;
        auto& target = flipped[pick(rng)];
        for (Capability c : kAllCapabilities) {
            if (target.decision.has(c)) target.decision.set(c, false);
        }
        auto less = unanimous_vote(flipped, config);
        REQUIRE(less.ok());
        for (Capability c : kAllCapabilities) {
            if (!base.value().has(c)) CHECK_FALSE(less.value().has(c));
        }

        // Permutation invariance over judge order.
        auto shuffled = vs;
        std::shuffle(shuffled.begin(), shuffled.end(), rng);
        auto perm = unanimous_vote(shuffled, config);
        REQUIRE(perm.ok());
        CHECK(perm.value() == base.value());
    }
}

TEST_CASE("majority mode exists behind config but is not the default") {
    VoteConfig config{{"j1", "j2", "j3"}, VoteRule::majority};
    std::vector<JudgeVerdict> vs = {verdict("j1", "t", {true, false, false}),
                                    verdict("j2", "t", {true, false, false}),
                                    verdict("j3", "t", {false, false, false})};
    auto r = unanimous_vote(vs, config);
    REQUIRE(r.ok());
    CHECK(r.value().eit); // 2 of 3
    CHECK(VoteConfig{}.rule == VoteRule::unanimous);
}

TEST_CASE("vote_batch classifies per tool and isolates missing-judge tools") {
    std::vector<ToolRecord> tools = {record("a"), record("b")};
    std::vector<JudgeVerdict> vs;
    for (const char* j : {"j1", "j2", "j3"}) {
        vs.push_back(verdict(j, "a", {true, false, false}));
        vs.push_back(verdict(j, "b", {false, true, false}));
    }

    SECTION("full agreement classifies both tools") {
        auto out = vote_batch(vs, tools, kThree, "t0");
        REQUIRE(out.classified.size() == 2);
        CHECK(out.unclassifiable.empty());
        CHECK(out.classified[0].tool.name == "a");
        CHECK(out.classified[0].caps == CapabilitySet{true, false, false});
        CHECK(out.classified[0].judge_ids == kThree.judge_ids);
        CHECK(out.classified[0].ts == "t0");
    }
    SECTION("one tool missing one judge yields 1 classified + 1 unclassifiable") {
        vs.erase(std::remove_if(vs.begin(), vs.end(),
                                [](const JudgeVerdict& v) {
                                    return v.tool_name == "b" && v.judge_id == "j2";
                                }),
                 vs.end());
        auto out = vote_batch(vs, tools, kThree);
        REQUIRE(out.classified.size() == 1);
        CHECK(out.classified[0].tool.name == "a");
        REQUIRE(out.unclassifiable.size() == 1);
        CHECK(out.unclassifiable[0].tool.name == "b");
        CHECK(out.unclassifiable[0].missing_judges == std::vector<std::string>{"j2"});
    }
    SECTION("permuted verdict input order gives identical output") {
        auto out1 = vote_batch(vs, tools, kThree);
        std::mt19937 rng(5);
        auto shuffled = vs;
        std::shuffle(shuffled.begin(), shuffled.end(), rng);
        auto out2 = vote_batch(shuffled, tools, kThree);
        REQUIRE(out1.classified.size() == out2.classified.size());
        for (std::size_t i = 0; i < out1.classified.size(); ++i)
            CHECK(out1.classified[i] == out2.classified[i]);
    }
    SECTION("output is ordered by (server id, tool name)") {
        std::vector<ToolRecord> unordered = {record("z", "s2"), record("a", "s1")};
        std::vector<JudgeVerdict> all;
        for (const char* j : {"j1", "j2", "j3"}) {
            all.push_back(verdict(j, "z", {}, "s2"));
            all.push_back(verdict(j, "a", {}, "s1"));
        }
        auto out = vote_batch(all, unordered, kThree);
        REQUIRE(out.classified.size() == 2);
        CHECK(out.classified[0].tool.server_id == "s1");
        CHECK(out.classified[1].tool.server_id == "s2");
    }
}
