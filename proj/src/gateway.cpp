#include "citeeval/gateway.hpp"

#include "citeeval/errors.hpp"

#include <nlohmann/json.hpp>
#include <openssl/evp.h>

#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>
#include <thread>

namespace citeeval {

std::string sha256_hex(std::string_view data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
        throw Error("SHA-256 digest failed");
    }
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    out.reserve(len * 2);
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(hex[digest[i] >> 4]);
        out.push_back(hex[digest[i] & 0xF]);
    }
    return out;
}

namespace {

// Releases a semaphore slot on scope exit.
class SlotGuard {
public:
    explicit SlotGuard(std::counting_semaphore<>& sem) : sem_(sem) { sem_.acquire(); }
    ~SlotGuard() { sem_.release(); }
    SlotGuard(const SlotGuard&) = delete;
    SlotGuard& operator=(const SlotGuard&) = delete;

private:
    std::counting_semaphore<>& sem_;
};

}  // namespace

std::string cache_key(const CompletionRequest& request) {
    // nlohmann::json objects keep keys sorted, so the dump is canonical.
    nlohmann::json j = {{"model_id", request.model_id},
                        {"prompt", request.prompt},
                        {"temperature", request.temperature},
                        {"max_tokens", request.max_tokens}};
    return sha256_hex(j.dump());
}

ResponseCache::ResponseCache(std::optional<std::filesystem::path> dir) : dir_(std::move(dir)) {}

std::filesystem::path ResponseCache::path_for(const std::string& key) const {
    if (!dir_) throw Error("response cache has no directory");
    return *dir_ / key.substr(0, 2) / (key + ".txt");
}

std::mutex& ResponseCache::lock_for(const std::string& key) {
    return key_locks_[std::hash<std::string>{}(key) % key_locks_.size()];
}

std::optional<std::string> ResponseCache::get(const std::string& key) {
    {
        std::lock_guard lock(memory_mutex_);
        if (auto it = memory_.find(key); it != memory_.end()) return it->second;
    }
    if (!dir_) return std::nullopt;
    std::lock_guard lock(lock_for(key));
    std::ifstream in(path_for(key), std::ios::binary);
    if (!in) return std::nullopt;
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void ResponseCache::put(const std::string& key, const std::string& text) {
    {
        std::lock_guard lock(memory_mutex_);
        memory_[key] = text;
    }
    if (!dir_) return;
    std::lock_guard lock(lock_for(key));
    const auto path = path_for(key);
    std::filesystem::create_directories(path.parent_path());
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write cache entry " + tmp.string());
        out << text;
    }
    std::filesystem::rename(tmp, path);
}

Gateway::Gateway(GatewayConfig config, std::unique_ptr<Provider> provider)
    : config_(std::move(config)),
      provider_(std::move(provider)),
      cache_(config_.cache_dir),
      in_flight_(std::max(1, config_.concurrency_limit)) {
    if (config_.concurrency_limit < 1) throw ConfigError("concurrency_limit must be >= 1");
    if (config_.playback && !config_.cache_dir) throw ConfigError("playback mode requires a cache directory");
    if (!config_.playback && !provider_) throw ConfigError("no provider configured");
}

int Gateway::provider_calls() const {
    std::lock_guard lock(stats_mutex_);
    return provider_calls_;
}

CompletionResult Gateway::complete(const CompletionRequest& request, CallOptions options) {
    if (request.prompt.empty()) throw DomainError("completion request has an empty prompt");
    if (request.temperature < 0.0) throw DomainError("temperature must be >= 0");

    const auto key = cache_key(request);
    if (config_.playback) {
        auto text = cache_.get(key);
        if (!text) throw FixtureMissingError("no playback fixture for request " + key);
        return CompletionResult{std::move(*text), true, {{"cache_key", key}}};
    }
    if (!options.refresh) {
        if (auto text = cache_.get(key)) {
            return CompletionResult{std::move(*text), true, {{"cache_key", key}}};
        }
    }
    auto result = call_with_retries(request);
    cache_.put(key, result.text);
    result.cached = false;
    result.provider_meta["cache_key"] = key;
    return result;
}

CompletionResult Gateway::call_with_retries(const CompletionRequest& request) {
    SlotGuard slot(in_flight_);
    auto delay = config_.backoff_base;
    for (int attempt = 0;; ++attempt) {
        try {
            {
                std::lock_guard lock(stats_mutex_);
                ++provider_calls_;
            }
            return provider_->complete(request);
        } catch (const TransportError& e) {
            if (!e.retriable() || attempt >= config_.max_retries) {
                throw TransportError(provider_->name() + ": " + e.what() + " (after " +
                                         std::to_string(attempt + 1) + " attempts)",
                                     false);
            }
        }
        std::this_thread::sleep_for(delay);
        delay *= 2;
    }
}

}  // namespace citeeval
