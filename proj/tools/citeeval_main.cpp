#include "citeeval/cli.hpp"
#include "citeeval/errors.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <optional>

namespace {

struct Flags {
    std::string input;
    std::string output_dir = "out";
    std::string config;
    std::optional<std::string> scenario;
    std::optional<std::string> metric;
    std::optional<std::string> provider;
    std::optional<std::string> model;
    std::optional<int> concurrency;
    std::optional<std::string> cache_dir;
    bool playback = false;
    std::optional<int> max_iters;
    std::optional<std::uint64_t> seed;
};

citeeval::cli::RunConfig build_config(const Flags& f) {
    using namespace citeeval::cli;
    RunConfig cfg;
    if (!f.config.empty()) cfg = load_run_config(f.config, cfg);
    if (f.scenario) cfg.scenario = scenario_choice_from_string(*f.scenario);
    if (f.metric) cfg.metric = *f.metric;
    if (f.provider) cfg.provider = *f.provider;
    if (f.model) cfg.model_id = *f.model;
    if (f.concurrency) cfg.concurrency_limit = *f.concurrency;
    if (f.cache_dir) cfg.cache_dir = *f.cache_dir;
    if (f.playback) cfg.playback = true;
    if (f.max_iters) cfg.max_iters = *f.max_iters;
    if (f.seed) cfg.seed = *f.seed;
    cfg.validate();
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Citation quality evaluation for retrieval-augmented responses"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(citeeval::cli::kToolkitVersion));

    Flags flags;
    const std::pair<const char*, const char*> commands[] = {
        {"attribute", "Label each statement's context (query, retrieval, response, parametric)"},
        {"rate", "Rate citations per statement"},
        {"evaluate", "Full pipeline with response-level Full and Cited scores"},
        {"calibrate", "Fit EditDist distances and the ensemble weight on annotated data"},
        {"meta-eval", "Correlate metric scores with human ratings"},
        {"improve", "Iteratively execute proposed citation edits and re-rate"},
        {"generate", "Render generation prompts and optionally produce responses"},
        {"report", "Corpus statistics over evaluated records"},
    };
    for (const auto& [name, help] : commands) {
        auto* sub = app.add_subcommand(name, help);
        sub->add_option("--input", flags.input, "Input records (JSONL)")->required()->check(CLI::ExistingFile);
        sub->add_option("--output-dir", flags.output_dir, "Directory for outputs")->capture_default_str();
        sub->add_option("--config", flags.config, "JSON run configuration")->check(CLI::ExistingFile);
        sub->add_option("--scenario", flags.scenario, "full, cited or both");
        sub->add_option("--metric", flags.metric,
                        "citeeval, itercoe, editdist, autoais, attrscore-strict, attrscore-relaxed or lqac");
        sub->add_option("--provider", flags.provider, "openai, anthropic or none");
        sub->add_option("--model", flags.model, "Judge or generator model id");
        sub->add_option("--concurrency", flags.concurrency, "Parallel instances and in-flight calls");
        sub->add_option("--cache-dir", flags.cache_dir, "Response cache directory");
        sub->add_flag("--playback", flags.playback, "Serve model calls from the cache only");
        sub->add_option("--max-iters", flags.max_iters, "Improvement iterations");
        sub->add_option("--seed", flags.seed, "Seed for sampling in report utilities");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        citeeval::cli::CommandRequest req;
        req.command = app.get_subcommands().front()->get_name();
        req.input = flags.input;
        req.output_dir = flags.output_dir;
        req.config = build_config(flags);
        const auto outcome = citeeval::cli::run_command(req);
        std::cout << outcome.summary;
        if (outcome.failed > 0) {
            std::cerr << outcome.failed << " instance(s) failed; see " << (req.output_dir / "errors.jsonl").string()
                      << "\n";
        }
        return outcome.exit_code;
    } catch (const citeeval::ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return 2;
    } catch (const citeeval::IngestionError& e) {
        std::cerr << "ingestion error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
