#pragma once

#include "citeeval/gateway.hpp"
#include "citeeval/model.hpp"
#include "citeeval/text_prep.hpp"

#include <filesystem>
#include <memory>
#include <string>
#include <unistd.h>
#include <vector>

namespace citeeval::testing {

inline EvalInstance make_instance(const std::string& response, int passages = 8, std::string id = "t1") {
    EvalInstance inst;
    inst.instance_id = std::move(id);
    inst.query = "Why do moving objects keep moving?";
    for (int k = 1; k <= passages; ++k) {
        inst.passages.push_back({k, "Doc " + std::to_string(k), "Passage text number " + std::to_string(k) + "."});
    }
    inst.response_raw = response;
    inst.statements = text::build_statements(response, passages, text::SegmenterConfig::defaults());
    return inst;
}

inline std::string categories(const std::vector<int>& labels) {
    std::string out;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        out += "<category sentence_id=\"" + std::to_string(i + 1) + "\"> " + std::to_string(labels[i]) +
               " </category>\n";
    }
    return out;
}

// Judge that answers the attribution prompt with `attribution` and every other
// prompt with the next entry of `editing` (the last one repeats).
struct ScriptedJudge {
    std::string attribution;
    std::vector<std::string> editing;
    int attribution_calls = 0;
    int editing_calls = 0;

    std::unique_ptr<Provider> provider() {
        return std::make_unique<FunctionProvider>([this](const CompletionRequest& r) {
            if (is_attribution(r.prompt)) {
                ++attribution_calls;
                return attribution;
            }
            const auto i = std::min<std::size_t>(static_cast<std::size_t>(editing_calls), editing.size() - 1);
            ++editing_calls;
            return editing[i];
        });
    }

    static bool is_attribution(const std::string& prompt) {
        return prompt.find("<category sentence_id") != std::string::npos;
    }
};

inline GatewayConfig quick_gateway() {
    GatewayConfig c;
    c.backoff_base = std::chrono::milliseconds(1);
    c.max_retries = 0;
    return c;
}

inline std::filesystem::path scratch_dir(const std::string& name) {
    auto p = std::filesystem::temp_directory_path() / ("citeeval_" + name + "_" + std::to_string(::getpid()));
    std::filesystem::remove_all(p);
    std::filesystem::create_directories(p);
    return p;
}

}  // namespace citeeval::testing
