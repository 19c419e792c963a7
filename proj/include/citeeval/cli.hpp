#pragma once

#include "citeeval/gateway.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

namespace citeeval::cli {

inline constexpr std::string_view kToolkitVersion = "0.1.0";

enum class ScenarioChoice { Full, Cited, Both };

std::string_view to_string(ScenarioChoice s);
ScenarioChoice scenario_choice_from_string(std::string_view s);

struct RunConfig {
    std::string provider = "none";  // openai | anthropic | none
    std::string model_id = "gpt-4o";
    double temperature = 0.0;
    int max_tokens = 4096;
    int concurrency_limit = 4;
    int max_retries = 3;
    std::optional<std::filesystem::path> cache_dir;
    bool playback = false;
    ScenarioChoice scenario = ScenarioChoice::Both;
    // citeeval | itercoe | editdist | autoais | attrscore-strict | attrscore-relaxed | lqac
    std::string metric = "citeeval";
    std::string scorer = "llm";  // entailment scorer for baselines: llm | lexical
    std::optional<std::filesystem::path> editdist_model;
    std::optional<std::filesystem::path> ensemble_model;
    int max_iters = 5;
    std::uint64_t seed = 0;

    // Throws ConfigError on any out-of-domain value.
    void validate() const;
    nlohmann::json to_json() const;
};

// Overlays the keys of `j` on `base`. Relative paths resolve against `base_dir`.
// Unknown keys and anything resembling a credential are rejected.
RunConfig config_from_json(const nlohmann::json& j, RunConfig base = {},
                           const std::filesystem::path& base_dir = {});
RunConfig load_run_config(const std::filesystem::path& path, RunConfig base = {});

// SHA-256 of the canonical JSON form.
std::string config_hash(const RunConfig& config);

struct CommandRequest {
    std::string command;  // attribute | rate | evaluate | calibrate | meta-eval | improve | generate | report
    std::filesystem::path input;
    std::filesystem::path output_dir;
    RunConfig config;
};

struct CommandOutcome {
    int exit_code = 0;  // 0 all good, 1 some instances quarantined
    int processed = 0;
    int failed = 0;
    std::string summary;
};

// Runs one command end to end, writing records, errors.jsonl, summary.txt and
// manifest.json under the output directory. ConfigError and IngestionError
// escape; per-instance failures are quarantined. `provider` replaces the one
// named in the config (used for scripted backends).
CommandOutcome run_command(const CommandRequest& request, std::unique_ptr<Provider> provider = nullptr);

}  // namespace citeeval::cli
