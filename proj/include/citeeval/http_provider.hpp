#pragma once

#include "citeeval/gateway.hpp"

#include <chrono>
#include <memory>
#include <string>

namespace citeeval {

enum class ApiFlavor { OpenAIChat, AnthropicMessages };

struct HttpProviderConfig {
    ApiFlavor flavor = ApiFlavor::OpenAIChat;
    std::string base_url;  // scheme://host[:port]
    std::string api_key;
    std::chrono::seconds timeout{120};
};

// Chat-completion adapter over HTTP(S). Connection failures, 429 and 5xx are
// retriable TransportErrors; other non-2xx statuses are terminal.
class HttpProvider : public Provider {
public:
    explicit HttpProvider(HttpProviderConfig config);

    CompletionResult complete(const CompletionRequest& request) override;
    std::string name() const override;

private:
    HttpProviderConfig config_;
};

// Builds a provider by name ("openai", "anthropic", "none"). Credentials and
// base URLs come from OPENAI_API_KEY / OPENAI_BASE_URL and ANTHROPIC_API_KEY /
// ANTHROPIC_BASE_URL. "none" returns nullptr.
std::unique_ptr<Provider> make_provider(const std::string& name);

}  // namespace citeeval
