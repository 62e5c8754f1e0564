#pragma once

#include <chrono>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "mcpscan/manifest.hpp"
#include "mcpscan/process.hpp"
#include "mcpscan/registry.hpp"
#include "mcpscan/result.hpp"
#include "mcpscan/taxonomy.hpp"

namespace mcpscan {

inline constexpr const char* kProtocolVersion = "2024-11-05";

enum class SessionState { launched, initialized, listed, closed, failed };

inline const char* session_state_label(SessionState s) {
    switch (s) {
        case SessionState::launched: return "launched";
        case SessionState::initialized: return "initialized";
        case SessionState::listed: return "listed";
        case SessionState::closed: return "closed";
        case SessionState::failed: return "failed";
    }
    return "?";
}

enum class FailureCause {
    none,
    precondition,
    spawn_failure,
    immediate_exit,
    timeout,
    malformed_response,
    protocol_error,
};

inline const char* failure_cause_label(FailureCause c) {
    switch (c) {
        case FailureCause::none: return "";
        case FailureCause::precondition: return "precondition";
        case FailureCause::spawn_failure: return "spawn-failure";
        case FailureCause::immediate_exit: return "immediate-exit";
        case FailureCause::timeout: return "timeout";
        case FailureCause::malformed_response: return "malformed-response";
        case FailureCause::protocol_error: return "protocol-error";
    }
    return "?";
}

struct SessionOptions {
    std::chrono::milliseconds handshake_timeout{30000};
    std::chrono::milliseconds request_timeout{15000};
    std::string client_name = "mcpscan";
    std::string client_version = "0.1.0";
};

/// One stdio session with one MCP server. Strictly sequential: a single
/// outstanding request at a time, ids strictly increasing, and the state
/// machine only moves forward (launched -> initialized -> listed ->
/// closed, or any -> failed).
class ServerSession {
public:
    /// Spawns the server process. On spawn failure the session comes back
    /// in `failed` with a typed cause; a batch scan treats that as data.
    static ServerSession launch(const ServerManifest& manifest, SessionOptions opts = {}) {
        ServerSession s;
        s.manifest_ = manifest;
        s.opts_ = opts;
        s.start_ms_ = detail::now_ms();

        if (opts.handshake_timeout.count() <= 0 || opts.request_timeout.count() <= 0) {
            s.fail(FailureCause::precondition, "timeout must be positive");
            return s;
        }
        auto argv = manifest.command();
        if (argv.empty()) {
            s.fail(FailureCause::precondition, "manifest has no launch command");
            return s;
        }
        ChildProcess::Options popts;
        popts.env = manifest.env;
        auto spawned = ChildProcess::spawn(argv, popts);
        if (!spawned.ok()) {
            s.fail(FailureCause::spawn_failure, spawned.error().message);
            return s;
        }
        s.proc_ = std::move(spawned).value();
        if (!s.proc_.alive()) {
            s.fail(FailureCause::immediate_exit, "server exited before handshake");
            return s;
        }
        s.state_ = SessionState::launched;
        return s;
    }

    SessionState state() const { return state_; }
    FailureCause cause() const { return cause_; }
    const std::string& error_message() const { return error_message_; }
    const std::string& protocol_version() const { return protocol_version_; }
    std::uint64_t connect_duration_ms() const { return connect_ms_; }
    std::uint64_t skipped_entries() const { return skipped_entries_; }
    const ServerManifest& manifest() const { return manifest_; }
    const std::string& stderr_tail() const { return proc_.stderr_tail(); }
    pid_t pid() const { return proc_.pid(); }
    std::uint64_t last_request_id() const { return next_id_ - 1; }

    /// MCP handshake: initialize request, then the initialized
    /// notification. Version mismatches are recorded, not fatal.
    bool initialize() {
        if (state_ != SessionState::launched) {
            fail(FailureCause::precondition,
                 std::string("initialize requires state launched, have ") +
                     session_state_label(state_));
            return false;
        }
        json params = {{"protocolVersion", kProtocolVersion},
                       {"capabilities", json::object()},
                       {"clientInfo", {{"name", opts_.client_name}, {"version", opts_.client_version}}}};
        auto response = request("initialize", params, opts_.handshake_timeout);
        if (!response.ok()) return false;
        const json& result = response.value();
        if (result.contains("protocolVersion") && result["protocolVersion"].is_string()) {
            protocol_version_ = result["protocolVersion"].get<std::string>();
            if (protocol_version_ != kProtocolVersion)
                version_mismatch_ = true; // tolerated; enumeration is the job
        }
        if (!notify("notifications/initialized")) return false;
        connect_ms_ = static_cast<std::uint64_t>(detail::now_ms() - start_ms_);
        state_ = SessionState::initialized;
        return true;
    }

    bool version_mismatch() const { return version_mismatch_; }

    /// Lists every advertised tool, following pagination cursors until
    /// exhausted. Malformed entries are skipped and counted, not fatal.
    Result<std::vector<ToolRecord>> list_tools() {
        using R = Result<std::vector<ToolRecord>>;
        if (state_ != SessionState::initialized) {
            fail(FailureCause::precondition,
                 std::string("list_tools requires state initialized, have ") +
                     session_state_label(state_));
            return R::failure("precondition", error_message_);
        }
        std::vector<ToolRecord> tools;
        std::string cursor;
        for (;;) {
            json params = json::object();
            if (!cursor.empty()) params["cursor"] = cursor;
            auto response = request("tools/list", params, opts_.request_timeout);
            if (!response.ok()) return R::failure(failure_cause_label(cause_), error_message_);
            const json& result = response.value();
            if (!result.is_object() || !result.contains("tools") || !result["tools"].is_array()) {
                fail(FailureCause::malformed_response, "tools/list result lacks a tools array");
                return R::failure(failure_cause_label(cause_), error_message_);
            }
            for (const auto& entry : result["tools"]) {
                if (!entry.is_object() || !entry.contains("name") || !entry["name"].is_string() ||
                    entry["name"].get<std::string>().empty()) {
                    ++skipped_entries_;
                    continue;
                }
                ToolRecord t;
                t.server_id = manifest_.id();
                t.server_name = manifest_.name;
                t.name = entry["name"].get<std::string>();
                if (entry.contains("description") && entry["description"].is_string())
                    t.description = entry["description"].get<std::string>();
                if (entry.contains("inputSchema")) t.input_schema = entry["inputSchema"];
                tools.push_back(std::move(t));
            }
            if (result.contains("nextCursor") && result["nextCursor"].is_string() &&
                !result["nextCursor"].get<std::string>().empty()) {
                cursor = result["nextCursor"].get<std::string>();
                continue;
            }
            break;
        }
        state_ = SessionState::listed;
        return tools;
    }

    /// Invokes one tool. Exists for the sandboxed replay harness; batch
    /// scanning never calls tools on third-party servers.
    Result<json> call_tool(const std::string& name, const json& arguments) {
        using R = Result<json>;
        if (state_ != SessionState::initialized && state_ != SessionState::listed)
            return R::failure("precondition", "call_tool requires an initialized session");
        json params = {{"name", name}, {"arguments", arguments}};
        auto response = request("tools/call", params, opts_.request_timeout);
        if (!response.ok()) return R::failure(failure_cause_label(cause_), error_message_);
        return response.value();
    }

    /// Best-effort teardown; idempotent. Emits the outcome record for the
    /// registry whatever state the session ended in.
    ConnectionOutcome close(std::uint64_t tool_count = 0) {
        if (!closed_) {
            closed_ = true;
            proc_.terminate();
            if (state_ != SessionState::failed) state_ = SessionState::closed;
            last_tool_count_ = tool_count;
        }
        ConnectionOutcome outcome;
        outcome.server_id = manifest_.id();
        outcome.server_name = manifest_.name;
        outcome.success = cause_ == FailureCause::none;
        outcome.cause = failure_cause_label(cause_);
        outcome.duration_ms = connect_ms_ ? connect_ms_
                                          : static_cast<std::uint64_t>(detail::now_ms() - start_ms_);
        outcome.tool_count = tool_count ? tool_count : last_tool_count_;
        outcome.skipped_entries = skipped_entries_;
        outcome.protocol_version = protocol_version_;
        return outcome;
    }

private:
    void fail(FailureCause cause, std::string message) {
        state_ = SessionState::failed;
        cause_ = cause;
        error_message_ = std::move(message);
    }

    bool notify(const std::string& method) {
        json msg = {{"jsonrpc", "2.0"}, {"method", method}};
        if (!proc_.write_line(msg.dump())) {
            fail(FailureCause::protocol_error, "write failed for " + method);
            return false;
        }
        return true;
    }

    /// Sends one request and waits for its matching response. Server
    /// notifications in between are tolerated; a response with a foreign
    /// id is a protocol error.
    Result<json> request(const std::string& method, const json& params,
                         std::chrono::milliseconds timeout) {
        using R = Result<json>;
        const std::uint64_t id = next_id_++;
        json msg = {{"jsonrpc", "2.0"}, {"id", id}, {"method", method}, {"params", params}};
        if (!proc_.write_line(msg.dump())) {
            fail(proc_.alive() ? FailureCause::protocol_error : FailureCause::immediate_exit,
                 "write failed for " + method);
            return R::failure(failure_cause_label(cause_), error_message_);
        }
        const std::int64_t deadline = detail::now_ms() + timeout.count();
        for (;;) {
            std::int64_t remain = deadline - detail::now_ms();
            if (remain <= 0) {
                fail(FailureCause::timeout, method + " timed out");
                return R::failure(failure_cause_label(cause_), error_message_);
            }
            auto read = proc_.read_line(std::chrono::milliseconds(remain));
            if (read.status == ChildProcess::ReadStatus::timeout) {
                fail(FailureCause::timeout, method + " timed out");
                return R::failure(failure_cause_label(cause_), error_message_);
            }
            if (read.status == ChildProcess::ReadStatus::eof) {
                bool early = !proc_.alive();
                fail(early && state_ == SessionState::launched ? FailureCause::immediate_exit
                                                               : FailureCause::malformed_response,
                     "stream closed while waiting for " + method + " response");
                return R::failure(failure_cause_label(cause_), error_message_);
            }
            json reply = json::parse(read.line, nullptr, false);
            if (reply.is_discarded() || !reply.is_object()) {
                fail(FailureCause::malformed_response, "non-JSON line while waiting for " + method);
                return R::failure(failure_cause_label(cause_), error_message_);
            }
            if (!reply.contains("id")) continue; // server-side notification
            if (!reply["id"].is_number_unsigned() || reply["id"].get<std::uint64_t>() != id) {
                fail(FailureCause::protocol_error, "response id does not match outstanding request");
                return R::failure(failure_cause_label(cause_), error_message_);
            }
            if (reply.contains("error")) {
                fail(FailureCause::protocol_error,
                     method + " error: " + reply["error"].dump());
                return R::failure(failure_cause_label(cause_), error_message_);
            }
            if (!reply.contains("result")) {
                fail(FailureCause::malformed_response, method + " response lacks result");
                return R::failure(failure_cause_label(cause_), error_message_);
            }
            return R(reply["result"]);
        }
    }

    ServerManifest manifest_;
    SessionOptions opts_;
    ChildProcess proc_;
    SessionState state_ = SessionState::failed;
    FailureCause cause_ = FailureCause::none;
    std::string error_message_;
    std::string protocol_version_;
    bool version_mismatch_ = false;
    bool closed_ = false;
    std::uint64_t next_id_ = 1;
    std::uint64_t connect_ms_ = 0;
    std::uint64_t last_tool_count_ = 0;
    std::uint64_t skipped_entries_ = 0;
    std::int64_t start_ms_ = 0;
};

/// Outcome + tools of one full scan pass over one server.
struct ScanResult {
    ConnectionOutcome outcome;
    std::vector<ToolRecord> tools;
};

/// launch -> initialize -> list -> close against a single manifest.
inline ScanResult scan_server(const ServerManifest& manifest, const SessionOptions& opts = {}) {
    ScanResult result;
    auto session = ServerSession::launch(manifest, opts);
    if (session.state() == SessionState::launched && session.initialize()) {
        auto tools = session.list_tools();
        if (tools.ok()) result.tools = std::move(tools).value();
    }
    result.outcome = session.close(result.tools.size());
    return result;
}

} // namespace mcpscan
