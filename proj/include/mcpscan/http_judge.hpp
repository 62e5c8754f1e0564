#pragma once

#include <cstdlib>
#include <string>

#include <httplib.h>
#include <json.hpp>

#include "mcpscan/judges.hpp"

namespace mcpscan {

/// Chat-completion transport for remote judges. Sends the prompt as a
/// single user message and returns the first choice's content. The
/// credential is read from the configured env var at call time and never
/// logged.
inline Result<std::string> http_judge_transport(const RemoteJudgeConfig& config,
                                                const std::string& prompt_text) {
    using R = Result<std::string>;
    httplib::Client client(config.url);
    client.set_connection_timeout(config.timeout_sec);
    client.set_read_timeout(config.timeout_sec);

    httplib::Headers headers = {{"Content-Type", "application/json"}};
    if (!config.credential_env.empty()) {
        const char* key = std::getenv(config.credential_env.c_str());
        if (!key || !*key)
            return R::failure("missing-credential",
                              "env var " + config.credential_env + " is not set");
        headers.emplace("Authorization", std::string("Bearer ") + key);
    }

    json body = {{"model", config.model},
                 {"temperature", 0},
                 {"messages", json::array({{{"role", "user"}, {"content", prompt_text}}})}};

    auto res = client.Post(config.path, headers, body.dump(), "application/json");
    if (!res) return R::failure("transport", "request to " + config.url + " failed");
    if (res->status != 200)
        return R::failure("transport", "endpoint returned status " + std::to_string(res->status));
    json reply = json::parse(res->body, nullptr, false);
    if (reply.is_discarded() || !reply.contains("choices") || !reply["choices"].is_array() ||
        reply["choices"].empty())
        return R::failure("transport", "malformed completion response");
    const json& choice = reply["choices"][0];
    if (!choice.contains("message") || !choice["message"].contains("content"))
        return R::failure("transport", "completion response lacks message content");
    return choice["message"]["content"].get<std::string>();
}

} // namespace mcpscan
