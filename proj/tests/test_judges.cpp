#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "mcpscan/judges.hpp"
#include "test_support.hpp"

using namespace mcpscan;

namespace {

ToolRecord tool(const std::string& server, const std::string& name, const std::string& desc,
                std::vector<std::string> params = {}) {
    ToolRecord t;
    t.server_id = server;
    t.server_name = server;
    t.name = name;
    t.description = desc;
    json props = json::object();
    for (const auto& p : params) props[p] = {{"type", "string"}};
    t.input_schema = {{"type", "object"}, {"properties", props}};
    return t;
}

} // namespace

TEST_CASE("build_prompt embeds tools and the three capability definitions") {
    std::vector<ToolRecord> tools = {
        tool("s1", "get_posts", "Search recent public posts matching a keyword query.", {"query"})};
    auto prompt = build_prompt(tools, "mock-social");
    REQUIRE(prompt.ok());
    const auto& text = prompt.value().text;
    CHECK(text.find("get_posts") != std::string::npos);
    CHECK(text.find("External Ingestion") != std::string::npos);
    CHECK(text.find("Privacy Access") != std::string::npos);
    CHECK(text.find("Network Access") != std::string::npos);
    CHECK(text.find("EIT=<true|false>") != std::string::npos);
    CHECK(prompt.value().tool_names == std::vector<std::string>{"get_posts"});
}

TEST_CASE("build_prompt is deterministic byte for byte") {
    std::vector<ToolRecord> tools = {
        tool("s1", "a", "Fetch a URL from the internet.", {"url"}),
        tool("s1", "b", "Read the contents of a local file.", {"path"})};
    auto p1 = build_prompt(tools);
    auto p2 = build_prompt(tools);
    REQUIRE(p1.ok());
    REQUIRE(p2.ok());
    CHECK(p1.value().text == p2.value().text);
}

TEST_CASE("build_prompt rejects empty and mixed-server input") {
    CHECK_FALSE(build_prompt({}).ok());
    std::vector<ToolRecord> mixed = {tool("s1", "a", "x"), tool("s2", "b", "y")};
    auto r = build_prompt(mixed);
    REQUIRE_FALSE(r.ok());
    CHECK(r.error().code == "mixed-server");
}

TEST_CASE("lexical judge reproduces the canonical capability examples") {
    SECTION("URL fetcher is external ingestion only") {
        auto v = lexical_judge("lex", std::vector<ToolRecord>{tool(
                                          "s", "fetch", "Fetches a URL from the internet", {"url"})});
        REQUIRE(v.size() == 1);
        CHECK(v[0].decision == CapabilitySet{true, false, false});
    }
    SECTION("read-and-upload holds both privacy access and network access") {
        auto v = lexical_judge(
            "lex", std::vector<ToolRecord>{tool("s", "share_file",
                                                "Reads the contents of a file and uploads them",
                                                {"filepath"})});
        REQUIRE(v.size() == 1);
        CHECK(v[0].decision == CapabilitySet{false, true, true});
    }
    SECTION("arithmetic tool matches no rule") {
        auto v = lexical_judge(
            "lex", std::vector<ToolRecord>{tool("s", "add", "adds two integers", {"a", "b"})});
        REQUIRE(v.size() == 1);
        CHECK(v[0].decision == CapabilitySet{});
    }
    SECTION("command execution covers the full chain") {
        auto v = lexical_judge("lex", std::vector<ToolRecord>{tool(
                                          "s", "execute_command",
                                          "Execute a shell command and capture output.",
                                          {"command"})});
        REQUIRE(v.size() == 1);
        CHECK(v[0].decision == CapabilitySet{true, true, true});
    }
}

TEST_CASE("lexical judge is a pure function of tool bytes and rule table") {
    auto report = jsonl::read_lines(testsupport::fixtures_dir() / "corpus" / "tools.jsonl");
    REQUIRE(report.ok());
    std::vector<ToolRecord> tools;
    for (const auto& row : report.value().rows) tools.push_back(row.get<ToolRecord>());
    REQUIRE(tools.size() == 30);

    auto v1 = lexical_judge("lex", tools);
    auto v2 = lexical_judge("lex", tools);
    REQUIRE(v1.size() == v2.size());
    for (std::size_t i = 0; i < v1.size(); ++i) CHECK(v1[i] == v2[i]);
}

TEST_CASE("lexical judge matches the hand-labeled corpus exactly") {
    auto report = jsonl::read_lines(testsupport::fixtures_dir() / "corpus" / "tools.jsonl");
    REQUIRE(report.ok());
    auto labels = testsupport::load_labels(testsupport::fixtures_dir() / "corpus" / "labels.json");
    std::size_t checked = 0;
    for (const auto& row : report.value().rows) {
        auto t = row.get<ToolRecord>();
        auto v = lexical_judge("lex", std::vector<ToolRecord>{t});
        REQUIRE(v.size() == 1);
        auto it = labels.find({t.server_id, t.name});
        REQUIRE(it != labels.end());
        INFO(t.server_id << "/" << t.name << " rationale: " << v[0].rationale);
        CHECK(v[0].decision == it->second);
        ++checked;
    }
    CHECK(checked == 30);
}

TEST_CASE("verdict grammar: parse of render is the identity") {
    std::mt19937 rng(41);
    std::uniform_int_distribution<int> len(1, 12);
    for (int round = 0; round < 50; ++round) {
        std::vector<JudgeVerdict> verdicts;
        std::vector<std::string> names;
        int n = len(rng);
        for (int i = 0; i < n; ++i) {
            JudgeVerdict v;
            v.judge_id = "j";
            v.server_id = "s";
            v.tool_name = "tool_" + std::to_string(round) + "_" + std::to_string(i);
            v.decision = testsupport::random_caps(rng);
            verdicts.push_back(v);
            names.push_back(v.tool_name);
        }
        auto rendered = render_verdict_lines(verdicts);
        auto parsed = parse_judge_output(rendered, names, "j", "s");
        REQUIRE(parsed.ok());
        REQUIRE(parsed.value().size() == verdicts.size());
        for (std::size_t i = 0; i < verdicts.size(); ++i) {
            CHECK(parsed.value()[i].tool_name == verdicts[i].tool_name);
            CHECK(parsed.value()[i].decision == verdicts[i].decision);
        }
    }
}

TEST_CASE("verdict grammar rejects missing, duplicate, and malformed lines") {
    std::vector<std::string> expected = {"a", "b"};
    CHECK(parse_judge_output("a: EIT=true PAT=false NAT=false\nb: EIT=false PAT=true NAT=true\n",
                             expected)
              .ok());

    auto missing = parse_judge_output("a: EIT=true PAT=false NAT=false\n", expected);
    REQUIRE_FALSE(missing.ok());
    CHECK(missing.error().code == "missing-tool");

    auto dup = parse_judge_output(
        "a: EIT=true PAT=false NAT=false\na: EIT=true PAT=false NAT=false\n"
        "b: EIT=false PAT=false NAT=false\n",
        expected);
    REQUIRE_FALSE(dup.ok());
    CHECK(dup.error().code == "duplicate-tool");

    auto malformed = parse_judge_output("a EIT=true PAT=false NAT=false\n", expected);
    REQUIRE_FALSE(malformed.ok());
    CHECK(malformed.error().code == "malformed-line");

    auto flags = parse_judge_output("a: EIT=yes PAT=false NAT=false\n", expected);
    REQUIRE_FALSE(flags.ok());

    auto trailing =
        parse_judge_output("a: EIT=true PAT=false NAT=false extra\n", expected);
    REQUIRE_FALSE(trailing.ok());

    auto unknown = parse_judge_output(
        "a: EIT=true PAT=false NAT=false\nb: EIT=false PAT=false NAT=false\n"
        "z: EIT=false PAT=false NAT=false\n",
        expected);
    REQUIRE_FALSE(unknown.ok());
    CHECK(unknown.error().code == "unexpected-tool");
}

TEST_CASE("remote judge parses a canned response and preserves raw output") {
    std::vector<ToolRecord> tools = {tool("s1", "fetch", "Fetches a URL", {"url"}),
                                     tool("s1", "add", "adds two integers")};
    auto prompt = build_prompt(tools);
    REQUIRE(prompt.ok());

    const std::string canned = "fetch: EIT=true PAT=false NAT=false\n"
                               "add: EIT=false PAT=false NAT=false\n";
    RemoteJudgeConfig config;
    config.judge_id = "model-a";
    config.url = "http://judge.test";
    int calls = 0;
    JudgeTransport transport = [&](const RemoteJudgeConfig&, const std::string& body) {
        ++calls;
        CHECK(body.find("fetch") != std::string::npos);
        return Result<std::string>(canned);
    };
    auto verdicts = remote_judge(prompt.value(), config, transport);
    REQUIRE(verdicts.ok());
    REQUIRE(verdicts.value().size() == 2);
    CHECK(calls == 1);
    CHECK(verdicts.value()[0].decision.eit);
    CHECK(verdicts.value()[0].raw_output == canned);
    CHECK(verdicts.value()[0].judge_id == "model-a");
}

TEST_CASE("remote judge retries garbage then fails the whole batch") {
    std::vector<ToolRecord> tools = {tool("s1", "fetch", "Fetches a URL", {"url"})};
    auto prompt = build_prompt(tools);
    REQUIRE(prompt.ok());
    RemoteJudgeConfig config;
    config.judge_id = "model-b";
    config.url = "http://judge.test";
    config.max_retries = 2;
    int calls = 0;
    JudgeTransport transport = [&](const RemoteJudgeConfig&, const std::string&) {
        ++calls;
        return Result<std::string>("I am not the grammar you asked for.");
    };
    auto verdicts = remote_judge(prompt.value(), config, transport);
    REQUIRE_FALSE(verdicts.ok());
    CHECK(verdicts.error().code == "judge-failure");
    CHECK(calls == 3); // initial attempt plus two retries
}

TEST_CASE("three endpoint configs give three independent verdict lists") {
    std::vector<ToolRecord> tools = {tool("s1", "fetch", "Fetches a URL", {"url"})};
    auto prompt = build_prompt(tools);
    REQUIRE(prompt.ok());
    std::vector<std::string> answers = {"fetch: EIT=true PAT=false NAT=false\n",
                                        "fetch: EIT=true PAT=true NAT=false\n",
                                        "fetch: EIT=false PAT=false NAT=false\n"};
    std::vector<std::vector<JudgeVerdict>> all;
    for (int i = 0; i < 3; ++i) {
        RemoteJudgeConfig config;
        config.judge_id = "model-" + std::to_string(i);
        config.url = "http://judge.test";
        JudgeTransport transport = [&, i](const RemoteJudgeConfig&, const std::string&) {
            return Result<std::string>(answers[static_cast<std::size_t>(i)]);
        };
        auto verdicts = remote_judge(prompt.value(), config, transport);
        REQUIRE(verdicts.ok());
        all.push_back(verdicts.value());
    }
    CHECK(all[0][0].decision == CapabilitySet{true, false, false});
    CHECK(all[1][0].decision == CapabilitySet{true, true, false});
    CHECK(all[2][0].decision == CapabilitySet{});
}

TEST_CASE("split_batches honors the ceiling") {
    std::vector<ToolRecord> tools;
    for (int i = 0; i < 230; ++i) tools.push_back(tool("s", "t" + std::to_string(i), "d"));
    auto batches = split_batches(tools, 100);
    REQUIRE(batches.size() == 3);
    CHECK(batches[0].size() == 100);
    CHECK(batches[2].size() == 30);
    CHECK(split_batches(std::vector<ToolRecord>{}, 100).empty());
}

TEST_CASE("category classification maps descriptions onto the closed list") {
    ServerManifest m;
    m.name = "demo";
    auto judge = [](const ServerManifest& manifest, const std::string& desc) {
        return lexical_category_judge(manifest, desc);
    };
    CHECK(classify_server_category(m, "web search and crawling API", judge) ==
          "Information Retrieval");
    CHECK(classify_server_category(m, "", judge) == "Others");
    CHECK(classify_server_category(m, "entirely unclassifiable gibberish", judge) == "Others");

    // A judge answering outside the closed list collapses to Others.
    CHECK(classify_server_category(m, "x", [](const ServerManifest&, const std::string&) {
              return std::string("Not A Real Category");
          }) == "Others");

    auto census = testsupport::census_manifests();
    CHECK(classify_server_category(census[0], census[0].description, judge) ==
          "Social Media Platforms");
    CHECK(classify_server_category(census[1], census[1].description, judge) ==
          "Development & Testing");
    CHECK(classify_server_category(census[2], census[2].description, judge) ==
          "Command Execution");
}
