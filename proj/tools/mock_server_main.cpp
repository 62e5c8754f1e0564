// Fixture MCP server used by tests and the replay sandbox. Speaks
// newline-delimited JSON-RPC 2.0 on stdio and serves exactly what its
// fixture config declares, including deliberately broken behaviors.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Fixture {
    std::string name = "mock-server";
    std::string protocol_version = "2024-11-05";
    std::string behavior = "ok"; // ok | garbage | hang | exit | exit_after_init
    std::size_t page_size = 0;   // 0 = single page
    json tools = json::array();  // entries served verbatim
};

Fixture load_fixture(const std::string& path) {
    Fixture f;
    std::ifstream in(path);
    if (!in) {
        std::cerr << "mock-server: cannot open fixture " << path << "\n";
        std::exit(2);
    }
    json config = json::parse(in, nullptr, false);
    if (config.is_discarded()) {
        std::cerr << "mock-server: fixture is not valid JSON\n";
        std::exit(2);
    }
    f.name = config.value("name", f.name);
    f.protocol_version = config.value("protocol_version", f.protocol_version);
    f.behavior = config.value("behavior", f.behavior);
    f.page_size = config.value("page_size", std::size_t{0});
    if (config.contains("tools")) f.tools = config["tools"];
    return f;
}

void reply(const json& msg) {
    std::cout << msg.dump() << "\n" << std::flush;
}

void reply_result(const json& id, json result) {
    reply({{"jsonrpc", "2.0"}, {"id", id}, {"result", std::move(result)}});
}

void reply_error(const json& id, int code, const std::string& message) {
    reply({{"jsonrpc", "2.0"}, {"id", id}, {"error", {{"code", code}, {"message", message}}}});
}

json text_result(const std::string& text, bool is_error = false) {
    return {{"content", json::array({{{"type", "text"}, {"text", text}}})},
            {"isError", is_error}};
}

// Containment: resolves `rel` under `root` and refuses escapes.
std::optional<fs::path> confine(const std::string& root, const std::string& rel) {
    std::error_code ec;
    fs::path base = fs::weakly_canonical(root, ec);
    if (ec) return std::nullopt;
    fs::path joined = fs::path(rel).is_absolute() ? fs::path(rel) : base / rel;
    fs::path resolved = fs::weakly_canonical(joined, ec);
    if (ec) return std::nullopt;
    auto rootStr = base.string();
    auto resStr = resolved.string();
    if (resStr == rootStr) return resolved;
    if (resStr.size() > rootStr.size() && resStr.compare(0, rootStr.size(), rootStr) == 0 &&
        resStr[rootStr.size()] == '/')
        return resolved;
    return std::nullopt;
}

bool append_line_to(const fs::path& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::app);
    if (!out) return false;
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    return static_cast<bool>(out);
}

json handle_call(const Fixture& fixture, const json& params) {
    std::string name = params.value("name", "");
    json args = params.value("arguments", json::object());

    const json* tool = nullptr;
    for (const auto& t : fixture.tools) {
        if (t.is_object() && t.value("name", "") == name) {
            tool = &t;
            break;
        }
    }
    if (!tool) return text_result("unknown tool " + name, true);
    json handler = tool->value("handler", json::object());
    std::string kind = handler.value("kind", "echo");

    if (kind == "static_text") {
        return text_result(handler.value("text", ""));
    }
    if (kind == "fs_read") {
        auto path = confine(handler.value("root", ""), args.value("path", ""));
        if (!path) return text_result("path outside served root", true);
        std::ifstream in(*path, std::ios::binary);
        if (!in) return text_result("no such file", true);
        std::ostringstream buf;
        buf << in.rdbuf();
        return text_result(buf.str());
    }
    if (kind == "fs_append") {
        auto path = confine(handler.value("root", ""), args.value("path", ""));
        if (!path) return text_result("path outside served root", true);
        if (!append_line_to(*path, args.value("line", "") + "\n"))
            return text_result("append failed", true);
        return text_result("appended");
    }
    if (kind == "sink") {
        std::string payload = args.value(handler.value("payload_param", "body"), "");
        json record = {{"payload", payload}};
        for (const auto& [k, v] : args.items()) {
            if (k != handler.value("payload_param", "body") && v.is_string())
                record[k] = v.get<std::string>();
        }
        if (!append_line_to(handler.value("path", ""), record.dump() + "\n"))
            return text_result("sink write failed", true);
        return text_result("queued");
    }
    if (kind == "exec_sim") {
        // Never executed: the command string is recorded and marked simulated.
        json record = {{"payload", args.value("command", "")}, {"simulated", true}};
        if (!append_line_to(handler.value("path", ""), record.dump() + "\n"))
            return text_result("record write failed", true);
        return text_result("[simulated] exit 0");
    }
    return text_result(args.dump());
}

json list_page(const Fixture& fixture, const json& params) {
    std::size_t start = 0;
    if (params.is_object() && params.contains("cursor") && params["cursor"].is_string()) {
        try {
            start = std::stoul(params["cursor"].get<std::string>());
        } catch (...) {
            start = 0;
        }
    }
    json page = json::array();
    std::size_t end = fixture.tools.size();
    if (fixture.page_size > 0) end = std::min(end, start + fixture.page_size);
    for (std::size_t i = start; i < end; ++i) page.push_back(fixture.tools[i]);
    json result = {{"tools", page}};
    if (end < fixture.tools.size()) result["nextCursor"] = std::to_string(end);
    return result;
}

[[noreturn]] void hang_forever() {
    // Swallow input without ever answering; survive stdin EOF so the
    // scanner has to escalate to signals.
    std::string line;
    while (std::getline(std::cin, line)) {
    }
    for (;;) std::this_thread::sleep_for(std::chrono::seconds(3600));
}

} // namespace

int main(int argc, char** argv) {
    std::string fixture_path;
    for (int i = 1; i < argc; ++i) {
        std::string arg = argv[i];
        if (arg == "--fixture" && i + 1 < argc) {
            fixture_path = argv[++i];
        } else if (arg == "--help") {
            std::cout << "usage: mcpscan-mock-server --fixture <config.json>\n";
            return 0;
        }
    }
    if (fixture_path.empty()) {
        std::cerr << "mock-server: --fixture is required\n";
        return 2;
    }
    Fixture fixture = load_fixture(fixture_path);

    if (fixture.behavior == "exit") return 0;
    if (fixture.behavior == "hang") hang_forever();

    bool initialized = false;
    std::string line;
    while (std::getline(std::cin, line)) {
        if (line.empty()) continue;
        if (fixture.behavior == "garbage") {
            std::cout << "%%% not json at all %%%\n" << std::flush;
            continue;
        }
        json msg = json::parse(line, nullptr, false);
        if (msg.is_discarded() || !msg.is_object()) continue;
        std::string method = msg.value("method", "");
        bool has_id = msg.contains("id");

        if (method == "initialize" && has_id) {
            reply_result(msg["id"], {{"protocolVersion", fixture.protocol_version},
                                     {"capabilities", {{"tools", json::object()}}},
                                     {"serverInfo", {{"name", fixture.name}, {"version", "1.0"}}}});
            initialized = true;
            if (fixture.behavior == "exit_after_init") return 1;
            continue;
        }
        if (method == "notifications/initialized") continue;
        if (!has_id) continue;
        if (!initialized) {
            reply_error(msg["id"], -32002, "server not initialized");
            continue;
        }
        if (method == "tools/list") {
            reply_result(msg["id"], list_page(fixture, msg.value("params", json::object())));
        } else if (method == "tools/call") {
            reply_result(msg["id"], handle_call(fixture, msg.value("params", json::object())));
        } else if (method == "ping") {
            reply_result(msg["id"], json::object());
        } else {
            reply_error(msg["id"], -32601, "method not found: " + method);
        }
    }
    return 0;
}
