// Seeds a response cache from scripted judge replies so that runs can be
// replayed with --playback.
#include "citeeval/attribution.hpp"
#include "citeeval/errors.hpp"
#include "citeeval/gateway.hpp"
#include "citeeval/improver.hpp"
#include "citeeval/rating.hpp"
#include "citeeval/records.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <iostream>
#include <map>

namespace {

using nlohmann::json;

struct Script {
    std::string attribution;
    std::vector<std::string> editing;
};

std::map<std::string, Script> load_script(const std::string& path) {
    std::map<std::string, Script> out;
    for (const auto& line : citeeval::io::read_lines(path)) {
        const auto j = json::parse(line);
        Script s;
        s.attribution = j.at("attribution").get<std::string>();
        s.editing = j.at("editing").get<std::vector<std::string>>();
        if (s.editing.empty()) throw citeeval::ConfigError("script for " + j.at("instance_id").get<std::string>() +
                                                           " has no editing replies");
        out[j.at("instance_id").get<std::string>()] = std::move(s);
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Record scripted judge replies into a playback cache"};
    std::string input;
    std::string script_path;
    std::string cache_dir;
    std::string model = "gpt-4o";
    int max_iters = 0;
    app.add_option("--input", input, "Instance records (JSONL)")->required()->check(CLI::ExistingFile);
    app.add_option("--script", script_path, "Scripted replies per instance (JSONL)")->required()->check(CLI::ExistingFile);
    app.add_option("--cache-dir", cache_dir, "Cache directory to fill")->required();
    app.add_option("--model", model, "Judge model id the replies are filed under")->capture_default_str();
    app.add_option("--max-iters", max_iters, "Also record an improvement run of this many iterations");
    CLI11_PARSE(app, argc, argv);

    try {
        const auto instances = citeeval::io::ingest(input);
        const auto script = load_script(script_path);
        citeeval::JudgeConfig judge;
        judge.model_id = model;
        int seeded = 0;
        for (const auto& inst : instances) {
            const auto it = script.find(inst.instance_id);
            if (it == script.end()) continue;
            const auto& s = it->second;
            const auto attribution = citeeval::attribution_prompt(inst);
            std::size_t next_edit = 0;
            // Replies are handed out in call order; the cache absorbs repeats.
            auto provider = std::make_unique<citeeval::FunctionProvider>(
                [&](const citeeval::CompletionRequest& req) {
                    if (req.prompt == attribution) return s.attribution;
                    const auto k = std::min(next_edit++, s.editing.size() - 1);
                    return s.editing[k];
                },
                "script");
            citeeval::GatewayConfig gc;
            gc.cache_dir = cache_dir;
            gc.concurrency_limit = 1;
            gc.max_retries = 0;
            citeeval::Gateway gateway(gc, std::move(provider));
            citeeval::Evaluator ev{gateway, judge, {}};
            try {
                const auto labels = citeeval::attribute_contexts(inst, gateway, judge);
                if (max_iters > 0) {
                    citeeval::improve_with_labels(inst, labels, max_iters, ev);
                } else {
                    citeeval::evaluate_with_labels(inst, labels, ev);
                }
            } catch (const citeeval::Error& e) {
                std::cerr << inst.instance_id << ": " << e.what() << " (recorded replies kept)\n";
            }
            ++seeded;
        }
        std::cout << "seeded " << seeded << " instance(s) into " << cache_dir << "\n";
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
