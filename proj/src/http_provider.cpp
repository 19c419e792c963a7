#include <httplib.h>

#include "citeeval/errors.hpp"
#include "citeeval/http_provider.hpp"

#include <nlohmann/json.hpp>

#include <cstdlib>

namespace citeeval {

namespace {

std::string env_or(const char* name, const std::string& fallback) {
    const char* value = std::getenv(name);
    return (value != nullptr && *value != '\0') ? std::string(value) : fallback;
}

}  // namespace

HttpProvider::HttpProvider(HttpProviderConfig config) : config_(std::move(config)) {
    if (config_.base_url.empty()) throw ConfigError("http provider needs a base URL");
}

std::string HttpProvider::name() const {
    return config_.flavor == ApiFlavor::OpenAIChat ? "openai" : "anthropic";
}

CompletionResult HttpProvider::complete(const CompletionRequest& request) {
    httplib::Client client(config_.base_url);
    client.set_connection_timeout(config_.timeout);
    client.set_read_timeout(config_.timeout);
    client.set_write_timeout(config_.timeout);

    nlohmann::json body = {{"model", request.model_id},
                           {"max_tokens", request.max_tokens},
                           {"temperature", request.temperature},
                           {"messages", nlohmann::json::array({{{"role", "user"}, {"content", request.prompt}}})}};
    httplib::Headers headers;
    std::string path;
    if (config_.flavor == ApiFlavor::OpenAIChat) {
        path = "/v1/chat/completions";
        if (!config_.api_key.empty()) headers.emplace("Authorization", "Bearer " + config_.api_key);
    } else {
        path = "/v1/messages";
        headers.emplace("x-api-key", config_.api_key);
        headers.emplace("anthropic-version", "2023-06-01");
    }

    auto res = client.Post(path, headers, body.dump(), "application/json");
    if (!res) {
        throw TransportError("request to " + config_.base_url + " failed: " + httplib::to_string(res.error()), true);
    }
    if (res->status == 429 || res->status >= 500) {
        throw TransportError("HTTP " + std::to_string(res->status) + " from " + config_.base_url, true);
    }
    if (res->status < 200 || res->status >= 300) {
        throw TransportError("HTTP " + std::to_string(res->status) + " from " + config_.base_url + ": " +
                                 res->body.substr(0, 300),
                             false);
    }

    CompletionResult result;
    try {
        const auto reply = nlohmann::json::parse(res->body);
        if (config_.flavor == ApiFlavor::OpenAIChat) {
            result.text = reply.at("choices").at(0).at("message").at("content").get<std::string>();
            if (reply.contains("model")) result.provider_meta["model"] = reply["model"].get<std::string>();
        } else {
            for (const auto& part : reply.at("content")) {
                if (part.value("type", "") == "text") result.text += part.at("text").get<std::string>();
            }
            if (reply.contains("model")) result.provider_meta["model"] = reply["model"].get<std::string>();
        }
    } catch (const nlohmann::json::exception& e) {
        throw TransportError(std::string("malformed provider reply: ") + e.what(), false);
    }
    result.provider_meta["provider"] = name();
    return result;
}

std::unique_ptr<Provider> make_provider(const std::string& name) {
    if (name == "none" || name.empty()) return nullptr;
    HttpProviderConfig cfg;
    if (name == "openai") {
        cfg.flavor = ApiFlavor::OpenAIChat;
        cfg.base_url = env_or("OPENAI_BASE_URL", "https://api.openai.com");
        cfg.api_key = env_or("OPENAI_API_KEY", "");
    } else if (name == "anthropic") {
        cfg.flavor = ApiFlavor::AnthropicMessages;
        cfg.base_url = env_or("ANTHROPIC_BASE_URL", "https://api.anthropic.com");
        cfg.api_key = env_or("ANTHROPIC_API_KEY", "");
        if (cfg.api_key.empty()) throw ConfigError("ANTHROPIC_API_KEY is not set");
    } else {
        throw ConfigError("unknown provider '" + name + "'");
    }
    return std::make_unique<HttpProvider>(std::move(cfg));
}

}  // namespace citeeval
