#pragma once

#include "citeeval/model.hpp"

#include <array>
#include <chrono>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <semaphore>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace citeeval {

// ---------------------------------------------------------------------------
// Prompt templates

enum class TemplateId { Generation, Attribution, EditingRating };

struct PromptTemplate {
    TemplateId id;
    std::string body;  // placeholders are written as [[Name]]
};

const PromptTemplate& builtin_template(TemplateId id);

inline constexpr std::string_view kQueryPlaceholder = "User Query";
inline constexpr std::string_view kPassagesPlaceholder = "Retrieved Passages";
inline constexpr std::string_view kSentencesPlaceholder = "Response Sentences";
inline constexpr std::string_view kCitationsPlaceholder = "Citations";

// Substitutes every [[Name]] in the template body with bindings.at(Name).
// Binding values are inserted literally and never rescanned.
std::string render_prompt(const PromptTemplate& tmpl, const std::map<std::string, std::string>& bindings);

std::string render_passages(std::span<const Passage> passages);

std::string generation_prompt(const std::string& query, std::span<const Passage> passages);
std::string attribution_prompt(const EvalInstance& instance);
std::string editing_prompt(const EvalInstance& instance);

// ---------------------------------------------------------------------------
// Completion requests and the content-addressed cache

struct CompletionRequest {
    std::string model_id;
    std::string prompt;
    double temperature = 0.0;
    int max_tokens = 4096;
};

struct CompletionResult {
    std::string text;
    bool cached = false;
    std::map<std::string, std::string> provider_meta;
};

std::string sha256_hex(std::string_view data);

// Lower-case hex SHA-256 over a canonical serialization of the request.
std::string cache_key(const CompletionRequest& request);

// One file per key at <dir>/<first 2 hex>/<key>.txt. Without a directory
// entries live in memory only.
class ResponseCache {
public:
    explicit ResponseCache(std::optional<std::filesystem::path> dir = std::nullopt);

    std::optional<std::string> get(const std::string& key);
    void put(const std::string& key, const std::string& text);

    std::filesystem::path path_for(const std::string& key) const;
    const std::optional<std::filesystem::path>& dir() const { return dir_; }

private:
    std::mutex& lock_for(const std::string& key);

    std::optional<std::filesystem::path> dir_;
    std::mutex memory_mutex_;
    std::unordered_map<std::string, std::string> memory_;
    std::array<std::mutex, 32> key_locks_;
};

// A chat-completion backend. Implementations throw TransportError on failure.
class Provider {
public:
    virtual ~Provider() = default;
    virtual CompletionResult complete(const CompletionRequest& request) = 0;
    virtual std::string name() const = 0;
};

// Provider backed by a callable; used for scripted judges and fixture recording.
class FunctionProvider : public Provider {
public:
    using Fn = std::function<std::string(const CompletionRequest&)>;

    explicit FunctionProvider(Fn fn, std::string name = "function")
        : fn_(std::move(fn)), name_(std::move(name)) {}

    CompletionResult complete(const CompletionRequest& request) override { return {fn_(request), false, {}}; }
    std::string name() const override { return name_; }

private:
    Fn fn_;
    std::string name_;
};

struct GatewayConfig {
    std::optional<std::filesystem::path> cache_dir;
    bool playback = false;  // cache only; a miss is FixtureMissingError
    int concurrency_limit = 4;
    int max_retries = 3;
    std::chrono::milliseconds backoff_base{500};
};

struct CallOptions {
    // Skip the cache read (the fresh result still overwrites the entry).
    bool refresh = false;
};

class Gateway {
public:
    Gateway(GatewayConfig config, std::unique_ptr<Provider> provider);

    CompletionResult complete(const CompletionRequest& request, CallOptions options = {});

    const GatewayConfig& config() const { return config_; }
    ResponseCache& cache() { return cache_; }
    int provider_calls() const;

private:
    CompletionResult call_with_retries(const CompletionRequest& request);

    GatewayConfig config_;
    std::unique_ptr<Provider> provider_;
    ResponseCache cache_;
    std::counting_semaphore<> in_flight_;
    mutable std::mutex stats_mutex_;
    int provider_calls_ = 0;
};

// Everything an evaluator call needs besides the prompt.
struct JudgeConfig {
    std::string model_id = "gpt-4o";
    double temperature = 0.0;
    int max_tokens = 4096;

    CompletionRequest request(std::string prompt) const {
        return CompletionRequest{model_id, std::move(prompt), temperature, max_tokens};
    }
};

// ---------------------------------------------------------------------------
// Tagged judge output

struct TaggedBlock {
    std::string tag;
    std::map<std::string, std::string> attributes;
    std::string body;
    std::vector<TaggedBlock> children;  // DELETE/ADD inside <editing>

    std::optional<int> int_attribute(const std::string& key) const;
};

// All <tag attr="v">body</tag> spans whose tag is in `expected_tags`, in
// document order. Closed <thinking> spans are skipped. Throws ParseError on
// malformed or truncated blocks.
std::vector<TaggedBlock> parse_tagged_blocks(std::string_view text, const std::vector<std::string>& expected_tags);

// Converts one DELETE/ADD child of an <editing> block into an EditAction.
EditAction parse_edit_action(const TaggedBlock& child);

}  // namespace citeeval
