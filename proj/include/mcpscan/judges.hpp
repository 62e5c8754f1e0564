#pragma once

#include <algorithm>
#include <cctype>
#include <chrono>
#include <functional>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "mcpscan/manifest.hpp"
#include "mcpscan/result.hpp"
#include "mcpscan/taxonomy.hpp"

namespace mcpscan {

/// One judge's raw decision for one tool. All three capability decisions
/// are always present; a judge cannot abstain on a single capability.
struct JudgeVerdict {
    std::string judge_id;
    std::string server_id;
    std::string tool_name;
    CapabilitySet decision;
    std::string rationale;
    std::string raw_output;

    bool operator==(const JudgeVerdict&) const = default;
};

inline void to_json(json& j, const JudgeVerdict& v) {
    j = json{{"judge", v.judge_id},
             {"server_id", v.server_id},
             {"tool", v.tool_name},
             {"eit", v.decision.eit},
             {"pat", v.decision.pat},
             {"nat", v.decision.nat},
             {"rationale", v.rationale},
             {"raw", v.raw_output}};
}

inline void from_json(const json& j, JudgeVerdict& v) {
    v.judge_id = j.value("judge", "");
    v.server_id = j.value("server_id", "");
    v.tool_name = j.at("tool").get<std::string>();
    v.decision.eit = j.value("eit", false);
    v.decision.pat = j.value("pat", false);
    v.decision.nat = j.value("nat", false);
    v.rationale = j.value("rationale", "");
    v.raw_output = j.value("raw", "");
}

// ---------------------------------------------------------------------------
// Text utilities shared by the lexical judge and the category classifier.

namespace detail {

inline std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

/// Lowercased alphanumeric tokens.
inline std::vector<std::string> tokenize(const std::string& text) {
    std::vector<std::string> tokens;
    std::string cur;
    for (unsigned char c : text) {
        if (std::isalnum(c)) {
            cur += static_cast<char>(std::tolower(c));
        } else if (!cur.empty()) {
            tokens.push_back(cur);
            cur.clear();
        }
    }
    if (!cur.empty()) tokens.push_back(cur);
    return tokens;
}

/// Whole-token match with light suffix stemming: "fetches", "uploaded"
/// and "reading" all match their stem keyword.
inline bool token_matches(const std::string& token, const std::string& keyword) {
    if (token == keyword) return true;
    if (token.size() <= keyword.size()) return false;
    const std::string tail = token.substr(keyword.size());
    if (token.compare(0, keyword.size(), keyword) != 0) return false;
    return tail == "s" || tail == "es" || tail == "ed" || tail == "ing";
}

inline bool any_token_matches(const std::vector<std::string>& tokens, const std::string& keyword) {
    return std::any_of(tokens.begin(), tokens.end(),
                       [&](const std::string& t) { return token_matches(t, keyword); });
}

/// Multi-word keywords match as a consecutive token run.
inline bool phrase_matches(const std::vector<std::string>& tokens, const std::string& phrase) {
    auto words = tokenize(phrase);
    if (words.empty()) return false;
    if (words.size() == 1) return any_token_matches(tokens, words[0]);
    if (tokens.size() < words.size()) return false;
    for (std::size_t i = 0; i + words.size() <= tokens.size(); ++i) {
        bool all = true;
        for (std::size_t k = 0; k < words.size(); ++k) {
            if (!token_matches(tokens[i + k], words[k])) {
                all = false;
                break;
            }
        }
        if (all) return true;
    }
    return false;
}

/// Parameter names from an inputSchema's top-level properties.
inline std::vector<std::string> schema_params(const json& schema) {
    std::vector<std::string> params;
    if (schema.is_object() && schema.contains("properties") && schema["properties"].is_object()) {
        for (const auto& [key, value] : schema["properties"].items()) {
            (void)value;
            params.push_back(lower(key));
        }
    }
    return params;
}

inline bool any_param_contains(const std::vector<std::string>& params, const std::string& keyword) {
    return std::any_of(params.begin(), params.end(), [&](const std::string& p) {
        return p.find(keyword) != std::string::npos;
    });
}

} // namespace detail

// ---------------------------------------------------------------------------
// Lexical judge: a deterministic rule-table stand-in for remote models.

/// A rule fires when: some desc phrase matches the tool's name+description
/// tokens; AND, if param_any is non-empty, some schema parameter name
/// contains one of those substrings; AND, if context_any is non-empty,
/// some phrase in it matches the description tokens or a parameter name.
/// Firing grants every capability in `grants`.
struct LexicalRule {
    CapabilitySet grants;
    std::vector<std::string> desc_any;
    std::vector<std::string> param_any;
    std::vector<std::string> context_any;
};

inline void to_json(json& j, const LexicalRule& r) {
    j = json{{"grants", r.grants},
             {"desc_any", r.desc_any},
             {"param_any", r.param_any},
             {"context_any", r.context_any}};
}

inline void from_json(const json& j, LexicalRule& r) {
    r.grants = j.value("grants", CapabilitySet{});
    r.desc_any = j.value("desc_any", std::vector<std::string>{});
    r.param_any = j.value("param_any", std::vector<std::string>{});
    r.context_any = j.value("context_any", std::vector<std::string>{});
}

struct RuleTable {
    std::vector<LexicalRule> rules;

    static RuleTable defaults() {
        RuleTable t;
        // External ingestion: fetch-like verbs over an external source
        // parameter, or an unmistakably external-source description.
        t.rules.push_back({{true, false, false},
                           {"fetch", "crawl", "scrape", "download", "search", "browse",
                            "retrieve", "pull", "lookup"},
                           {"url", "uri", "link", "query", "keyword", "term", "channel",
                            "feed", "topic", "source", "page"},
                           {}});
        t.rules.push_back({{true, false, false},
                           {"from the internet", "from the web", "web page", "web search",
                            "public posts", "rss feed", "external source"},
                           {},
                           {}});
        // Privacy access: read/list verbs over local or user-specific data.
        t.rules.push_back({{false, true, false},
                           {"read", "list", "view", "open", "cat", "dump", "access"},
                           {},
                           {"file", "path", "directory", "folder", "document", "contact",
                            "history", "chat", "conversation", "inbox", "message", "calendar",
                            "credential", "secret", "token", "config", "configuration",
                            "settings", "clipboard", "note", "local", "address book", "email",
                            "mail"}});
        // Network disclosure: outbound verbs. "mail" and "post" alone are
        // too noun-like; "post" additionally needs a destination parameter.
        t.rules.push_back({{false, false, true},
                           {"send", "forward", "transmit", "deliver", "reply", "notify"},
                           {},
                           {}});
        t.rules.push_back({{false, false, true},
                           {"upload", "publish", "share", "submit", "broadcast", "tweet"},
                           {},
                           {}});
        t.rules.push_back({{false, false, true},
                           {"post"},
                           {"channel", "recipient", "destination", "target", "webhook",
                            "endpoint"},
                           {}});
        // Command execution covers the full chain by itself.
        t.rules.push_back({{true, true, true},
                           {"execute", "exec", "shell", "command", "terminal", "subprocess"},
                           {},
                           {}});
        return t;
    }
};

inline void to_json(json& j, const RuleTable& t) { j = json{{"rules", t.rules}}; }
inline void from_json(const json& j, RuleTable& t) {
    t.rules = j.value("rules", std::vector<LexicalRule>{});
}

/// Applies a rule table to one tool's advertised bytes. Pure function of
/// (tool bytes, table); repeated runs agree bit-for-bit.
inline CapabilitySet apply_rules(const ToolRecord& tool, const RuleTable& table,
                                 std::string* rationale = nullptr) {
    const std::string text = tool.name + " " + tool.description;
    const auto tokens = detail::tokenize(text);
    const auto params = detail::schema_params(tool.input_schema);

    CapabilitySet caps;
    std::string why;
    for (const auto& rule : table.rules) {
        bool desc_hit = false;
        std::string matched;
        for (const auto& phrase : rule.desc_any) {
            if (detail::phrase_matches(tokens, phrase)) {
                desc_hit = true;
                matched = phrase;
                break;
            }
        }
        if (!desc_hit) continue;
        if (!rule.param_any.empty()) {
            bool param_hit = false;
            for (const auto& kw : rule.param_any) {
                if (detail::any_param_contains(params, kw)) {
                    param_hit = true;
                    break;
                }
            }
            if (!param_hit) continue;
        }
        if (!rule.context_any.empty()) {
            bool context_hit = false;
            for (const auto& kw : rule.context_any) {
                if (detail::phrase_matches(tokens, kw) || detail::any_param_contains(params, kw)) {
                    context_hit = true;
                    break;
                }
            }
            if (!context_hit) continue;
        }
        for (Capability c : kAllCapabilities) {
            if (rule.grants.has(c) && !caps.has(c)) {
                caps.set(c, true);
                why += std::string(capability_label(c)) + ":" + matched + " ";
            }
        }
    }
    if (rationale) {
        if (!why.empty()) why.pop_back();
        *rationale = why;
    }
    return caps;
}

/// Deterministic rule-table judge over a server's tools.
inline std::vector<JudgeVerdict> lexical_judge(const std::string& judge_id,
                                               std::span<const ToolRecord> tools,
                                               const RuleTable& table = RuleTable::defaults()) {
    std::vector<JudgeVerdict> verdicts;
    verdicts.reserve(tools.size());
    for (const auto& tool : tools) {
        JudgeVerdict v;
        v.judge_id = judge_id;
        v.server_id = tool.server_id;
        v.tool_name = tool.name;
        v.decision = apply_rules(tool, table, &v.rationale);
        verdicts.push_back(std::move(v));
    }
    return verdicts;
}

// ---------------------------------------------------------------------------
// Prompt construction and the machine-parseable answer grammar.

/// Prompt covering the complete tool set of exactly one server.
struct JudgePrompt {
    std::string server_id;
    std::string server_name;
    std::vector<std::string> tool_names;
    std::string text;
};

inline const char* capability_definitions_text() {
    return "Capability definitions:\n"
           "- External Ingestion Tool (EIT): can fetch textual data from external,\n"
           "  potentially attacker-controlled sources (web fetch, search, social or\n"
           "  feed connectors). Entry point for planted instructions.\n"
           "- Privacy Access Tool (PAT): can read sensitive local or user-specific\n"
           "  data (local files, contact lists, chat or search history).\n"
           "- Network Access Tool (NAT): can send or publish arbitrary text to\n"
           "  external endpoints (mail senders, posters, uploaders).\n";
}

/// Builds the deterministic judging prompt for one server's tools.
/// Same inputs produce identical bytes.
inline Result<JudgePrompt> build_prompt(std::span<const ToolRecord> tools,
                                        const std::string& server_name = "") {
    using R = Result<JudgePrompt>;
    if (tools.empty()) return R::failure("empty-input", "no tools to judge");
    const std::string& server_id = tools.front().server_id;
    for (const auto& t : tools) {
        if (t.server_id != server_id)
            return R::failure("mixed-server", "tools from multiple servers in one prompt");
    }

    JudgePrompt prompt;
    prompt.server_id = server_id;
    prompt.server_name = server_name.empty() ? tools.front().server_name : server_name;

    std::ostringstream out;
    out << "You are auditing the tools of one MCP server for three capabilities\n"
           "relevant to parasitic toolchain attacks.\n\n";
    out << capability_definitions_text();
    out << "\nServer: " << prompt.server_name << "\n";
    out << "Tools (" << tools.size() << "):\n\n";
    for (const auto& t : tools) {
        prompt.tool_names.push_back(t.name);
        out << "## " << t.name << "\n";
        out << "description: " << t.description << "\n";
        out << "inputSchema: " << t.input_schema.dump() << "\n\n";
    }
    out << "Decide each capability independently for every tool.\n"
           "Answer with exactly one line per tool, in the order given, no other\n"
           "text, using this grammar:\n"
           "<tool_name>: EIT=<true|false> PAT=<true|false> NAT=<true|false>\n";
    prompt.text = out.str();
    return prompt;
}

/// Renders verdicts in the answer grammar (inverse of parse_judge_output).
inline std::string render_verdict_lines(std::span<const JudgeVerdict> verdicts) {
    std::ostringstream out;
    for (const auto& v : verdicts) {
        out << v.tool_name << ": EIT=" << (v.decision.eit ? "true" : "false")
            << " PAT=" << (v.decision.pat ? "true" : "false")
            << " NAT=" << (v.decision.nat ? "true" : "false") << "\n";
    }
    return out.str();
}

/// Strict parse of the answer grammar. Every expected tool must appear
/// exactly once; anything else is an error.
inline Result<std::vector<JudgeVerdict>> parse_judge_output(
    const std::string& raw, const std::vector<std::string>& expected_tools,
    const std::string& judge_id = "", const std::string& server_id = "") {
    using R = Result<std::vector<JudgeVerdict>>;

    auto parse_flag = [](const std::string& field, const std::string& key,
                         bool& out) -> bool {
        if (field == key + "=true") {
            out = true;
            return true;
        }
        if (field == key + "=false") {
            out = false;
            return true;
        }
        return false;
    };

    std::map<std::string, JudgeVerdict> by_tool;
    std::istringstream in(raw);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        auto colon = line.find(':');
        if (colon == std::string::npos)
            return R::failure("malformed-line", "line " + std::to_string(lineno) + ": missing ':'");
        std::string name = line.substr(0, colon);
        while (!name.empty() && (name.back() == ' ' || name.back() == '\t')) name.pop_back();
        std::istringstream fields(line.substr(colon + 1));
        std::string f1, f2, f3, extra;
        fields >> f1 >> f2 >> f3;
        if (fields >> extra)
            return R::failure("malformed-line", "line " + std::to_string(lineno) + ": trailing tokens");
        JudgeVerdict v;
        v.judge_id = judge_id;
        v.server_id = server_id;
        v.tool_name = name;
        if (!parse_flag(f1, "EIT", v.decision.eit) || !parse_flag(f2, "PAT", v.decision.pat) ||
            !parse_flag(f3, "NAT", v.decision.nat))
            return R::failure("malformed-line", "line " + std::to_string(lineno) + ": bad flags");
        if (by_tool.count(name))
            return R::failure("duplicate-tool", "tool " + name + " appears twice");
        v.raw_output = line;
        by_tool.emplace(name, std::move(v));
    }

    std::vector<JudgeVerdict> out;
    for (const auto& expected : expected_tools) {
        auto it = by_tool.find(expected);
        if (it == by_tool.end())
            return R::failure("missing-tool", "no verdict line for tool " + expected);
        out.push_back(it->second);
        by_tool.erase(it);
    }
    if (!by_tool.empty())
        return R::failure("unexpected-tool", "verdict for unknown tool " + by_tool.begin()->first);
    return out;
}

/// Splits an oversized server into prompt-sized sub-batches. One server
/// per prompt is the rule; the ceiling only bounds pathological servers.
inline std::vector<std::vector<ToolRecord>> split_batches(std::span<const ToolRecord> tools,
                                                          std::size_t ceiling = 100) {
    std::vector<std::vector<ToolRecord>> batches;
    for (std::size_t i = 0; i < tools.size(); i += ceiling) {
        std::size_t end = std::min(tools.size(), i + ceiling);
        batches.emplace_back(tools.begin() + static_cast<std::ptrdiff_t>(i),
                             tools.begin() + static_cast<std::ptrdiff_t>(end));
    }
    return batches;
}

// ---------------------------------------------------------------------------
// Remote judge: an HTTP chat-completion endpoint behind the same contract.

struct RemoteJudgeConfig {
    std::string judge_id;
    std::string url;   // e.g. http://host:port
    std::string path = "/v1/chat/completions";
    std::string model;
    std::string credential_env; // env var holding the bearer token
    int max_retries = 2;
    int timeout_sec = 60;
};

inline void to_json(json& j, const RemoteJudgeConfig& c) {
    j = json{{"judge", c.judge_id},   {"url", c.url},
             {"path", c.path},        {"model", c.model},
             {"credential_env", c.credential_env}, {"max_retries", c.max_retries},
             {"timeout_sec", c.timeout_sec}};
}

inline void from_json(const json& j, RemoteJudgeConfig& c) {
    c.judge_id = j.value("judge", "");
    c.url = j.value("url", "");
    c.path = j.value("path", "/v1/chat/completions");
    c.model = j.value("model", "");
    c.credential_env = j.value("credential_env", "");
    c.max_retries = j.value("max_retries", 2);
    c.timeout_sec = j.value("timeout_sec", 60);
}

/// Transport hook: given a config and prompt text, returns the model's
/// answer text. Injectable so tests run against canned responses.
using JudgeTransport =
    std::function<Result<std::string>(const RemoteJudgeConfig&, const std::string&)>;

/// Queries one remote judge for one server batch. Unparseable output is
/// retried up to max_retries, then the whole batch fails.
inline Result<std::vector<JudgeVerdict>> remote_judge(const JudgePrompt& prompt,
                                                      const RemoteJudgeConfig& config,
                                                      const JudgeTransport& transport) {
    using R = Result<std::vector<JudgeVerdict>>;
    if (config.url.empty()) return R::failure("bad-endpoint", "remote judge has no URL");
    std::string last_error;
    for (int attempt = 0; attempt <= config.max_retries; ++attempt) {
        auto response = transport(config, prompt.text);
        if (!response.ok()) {
            last_error = response.error().message;
            continue;
        }
        auto verdicts =
            parse_judge_output(response.value(), prompt.tool_names, config.judge_id, prompt.server_id);
        if (verdicts.ok()) {
            auto out = std::move(verdicts).value();
            for (auto& v : out) v.raw_output = response.value();
            return out;
        }
        last_error = verdicts.error().message;
    }
    return R::failure("judge-failure", "judge " + config.judge_id + " failed after " +
                                           std::to_string(config.max_retries + 1) +
                                           " attempts: " + last_error);
}

// ---------------------------------------------------------------------------
// Server categorization through the same judge machinery.

inline const std::vector<std::string>& known_categories() {
    static const std::vector<std::string> cats = {
        "Information Retrieval",
        "AI-Driven Utilities",
        "Project Mgmt. & Collaboration",
        "Development & Testing",
        "Data Processing & Analytics",
        "Docs. & Knowledge Bases",
        "Blockchain & Financial Systems",
        "Multimedia Processing",
        "Command Execution",
        "Cloud Services",
        "Security & Monitoring",
        "Communication & Email",
        "Social Media Platforms",
        "Geospatial & Transportation",
    };
    return cats;
}

inline constexpr const char* kOthersCategory = "Others";

struct CategoryRule {
    std::string category;
    std::vector<std::string> phrases;
};

inline const std::vector<CategoryRule>& default_category_rules() {
    static const std::vector<CategoryRule> rules = {
        {"Command Execution", {"command", "shell", "terminal", "execute", "exec"}},
        {"Social Media Platforms", {"social media", "social", "tweet", "timeline"}},
        {"Communication & Email", {"email", "mail", "sms", "chat", "messaging", "slack"}},
        {"Information Retrieval",
         {"web search", "search", "crawl", "scrape", "retrieval", "rss", "news", "lookup"}},
        {"Geospatial & Transportation",
         {"map", "geospatial", "gps", "location", "transit", "route", "navigation"}},
        {"Blockchain & Financial Systems",
         {"blockchain", "crypto", "finance", "financial", "trading", "wallet", "payment"}},
        {"Multimedia Processing", {"image", "video", "audio", "media", "photo", "music"}},
        {"Cloud Services", {"cloud", "aws", "azure", "gcp", "s3", "kubernetes"}},
        {"Security & Monitoring",
         {"security", "monitoring", "vulnerability", "alert", "forensics", "siem"}},
        {"Docs. & Knowledge Bases",
         {"documentation", "docs", "knowledge", "wiki", "notes", "notebook"}},
        {"Project Mgmt. & Collaboration",
         {"project", "task", "kanban", "jira", "collaboration", "ticket", "issue tracker"}},
        {"Development & Testing",
         {"development", "testing", "debug", "git", "code", "ci", "build"}},
        {"Data Processing & Analytics",
         {"data processing", "analytics", "etl", "database", "sql", "pipeline", "spreadsheet"}},
        {"AI-Driven Utilities", {"ai", "llm", "model", "embedding", "machine learning", "agent"}},
    };
    return rules;
}

/// Category judge interface: description text in, one category out.
using CategoryJudge = std::function<std::string(const ServerManifest&, const std::string&)>;

/// First-match lexical category classifier; unknown or empty text maps
/// to Others.
inline std::string lexical_category_judge(const ServerManifest& manifest,
                                          const std::string& description,
                                          const std::vector<CategoryRule>& rules =
                                              default_category_rules()) {
    const std::string text = manifest.name + " " + description;
    const auto tokens = detail::tokenize(text);
    if (tokens.empty()) return kOthersCategory;
    for (const auto& rule : rules) {
        for (const auto& phrase : rule.phrases) {
            if (detail::phrase_matches(tokens, phrase)) return rule.category;
        }
    }
    return kOthersCategory;
}

/// Maps a server to exactly one closed-list category via the given judge.
inline std::string classify_server_category(const ServerManifest& manifest,
                                            const std::string& description,
                                            const CategoryJudge& judge) {
    std::string cat = judge(manifest, description);
    if (cat == kOthersCategory) return cat;
    const auto& known = known_categories();
    if (std::find(known.begin(), known.end(), cat) == known.end()) return kOthersCategory;
    return cat;
}

} // namespace mcpscan
