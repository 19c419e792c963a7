#include "citeeval/cli.hpp"

#include "citeeval/attribution.hpp"
#include "citeeval/baselines.hpp"
#include "citeeval/calibration.hpp"
#include "citeeval/errors.hpp"
#include "citeeval/http_provider.hpp"
#include "citeeval/improver.hpp"
#include "citeeval/metaeval.hpp"
#include "citeeval/rating.hpp"
#include "citeeval/records.hpp"
#include "citeeval/report.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>

namespace citeeval::cli {

using nlohmann::json;
namespace fs = std::filesystem;

std::string_view to_string(ScenarioChoice s) {
    switch (s) {
        case ScenarioChoice::Full: return "full";
        case ScenarioChoice::Cited: return "cited";
        case ScenarioChoice::Both: return "both";
    }
    return "both";
}

ScenarioChoice scenario_choice_from_string(std::string_view s) {
    if (s == "full") return ScenarioChoice::Full;
    if (s == "cited") return ScenarioChoice::Cited;
    if (s == "both") return ScenarioChoice::Both;
    throw ConfigError("unknown scenario '" + std::string(s) + "' (expected full, cited or both)");
}

namespace {

const std::vector<std::string>& known_metrics() {
    static const std::vector<std::string> m = {"citeeval", "itercoe", "editdist", "autoais",
                                               "attrscore-strict", "attrscore-relaxed", "lqac"};
    return m;
}

bool is_rating_metric(const std::string& m) { return m == "citeeval" || m == "itercoe" || m == "editdist"; }

RatingMethod method_of(const std::string& m) {
    if (m == "itercoe") return RatingMethod::IterCoE;
    if (m == "editdist") return RatingMethod::EditDist;
    return RatingMethod::Ensemble;
}

}  // namespace

void RunConfig::validate() const {
    if (provider != "openai" && provider != "anthropic" && provider != "none") {
        throw ConfigError("unknown provider '" + provider + "' (expected openai, anthropic or none)");
    }
    if (model_id.empty()) throw ConfigError("model must not be empty");
    if (temperature < 0.0 || temperature > 2.0) throw ConfigError("temperature must lie in [0, 2]");
    if (max_tokens < 1) throw ConfigError("max_tokens must be at least 1");
    if (concurrency_limit < 1) throw ConfigError("concurrency must be at least 1");
    if (max_retries < 0) throw ConfigError("max_retries must not be negative");
    if (max_iters < 1) throw ConfigError("max_iters must be at least 1");
    if (std::find(known_metrics().begin(), known_metrics().end(), metric) == known_metrics().end()) {
        throw ConfigError("unknown metric '" + metric + "'");
    }
    if (scorer != "llm" && scorer != "lexical") throw ConfigError("scorer must be llm or lexical");
    if (playback && !cache_dir) throw ConfigError("playback needs a cache directory");
}

json RunConfig::to_json() const {
    auto path_or_null = [](const std::optional<fs::path>& p) { return p ? json(p->generic_string()) : json(nullptr); };
    return {{"provider", provider},
            {"model", model_id},
            {"temperature", temperature},
            {"max_tokens", max_tokens},
            {"concurrency", concurrency_limit},
            {"max_retries", max_retries},
            {"cache_dir", path_or_null(cache_dir)},
            {"playback", playback},
            {"scenario", std::string(cli::to_string(scenario))},
            {"metric", metric},
            {"scorer", scorer},
            {"editdist_model", path_or_null(editdist_model)},
            {"ensemble_model", path_or_null(ensemble_model)},
            {"max_iters", max_iters},
            {"seed", seed}};
}

RunConfig config_from_json(const json& j, RunConfig cfg, const fs::path& base_dir) {
    if (!j.is_object()) throw ConfigError("configuration must be a JSON object");
    auto resolve = [&](const json& v, const std::string& key) -> std::optional<fs::path> {
        if (v.is_null()) return std::nullopt;
        if (!v.is_string()) throw ConfigError("'" + key + "' must be a path string");
        fs::path p = v.get<std::string>();
        if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
        return p;
    };
    try {
        for (const auto& [key, v] : j.items()) {
            std::string lower = key;
            std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
            if (lower.find("key") != std::string::npos || lower.find("secret") != std::string::npos ||
                (lower.find("token") != std::string::npos && lower != "max_tokens") ||
                lower.find("password") != std::string::npos) {
                throw ConfigError("'" + key + "' looks like a credential; use environment variables instead");
            }
            if (key == "provider") cfg.provider = v.get<std::string>();
            else if (key == "model") cfg.model_id = v.get<std::string>();
            else if (key == "temperature") cfg.temperature = v.get<double>();
            else if (key == "max_tokens") cfg.max_tokens = v.get<int>();
            else if (key == "concurrency") cfg.concurrency_limit = v.get<int>();
            else if (key == "max_retries") cfg.max_retries = v.get<int>();
            else if (key == "cache_dir") cfg.cache_dir = resolve(v, key);
            else if (key == "playback") cfg.playback = v.get<bool>();
            else if (key == "scenario") cfg.scenario = scenario_choice_from_string(v.get<std::string>());
            else if (key == "metric") cfg.metric = v.get<std::string>();
            else if (key == "scorer") cfg.scorer = v.get<std::string>();
            else if (key == "editdist_model") cfg.editdist_model = resolve(v, key);
            else if (key == "ensemble_model") cfg.ensemble_model = resolve(v, key);
            else if (key == "max_iters") cfg.max_iters = v.get<int>();
            else if (key == "seed") cfg.seed = v.get<std::uint64_t>();
            else throw ConfigError("unknown configuration key '" + key + "'");
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("bad configuration value: ") + e.what());
    }
    return cfg;
}

RunConfig load_run_config(const fs::path& path, RunConfig base) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("config file " + path.string() + " is not valid JSON: " + e.what());
    }
    return config_from_json(j, std::move(base), path.parent_path());
}

std::string config_hash(const RunConfig& config) { return sha256_hex(config.to_json().dump()); }

namespace {

struct Failure {
    std::string instance_id;
    int line = 0;
    std::string kind;
    std::string message;
};

template <typename R>
struct Slot {
    std::optional<R> value;
    std::optional<Failure> failure;
};

// Bounded pool; results land in input order.
template <typename R, typename Fn>
std::vector<Slot<R>> run_all(const std::vector<io::IngestedRecord>& records, int workers, Fn fn) {
    std::vector<Slot<R>> slots(records.size());
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i; (i = next.fetch_add(1)) < records.size();) {
            const auto& rec = records[i];
            try {
                slots[i].value = fn(rec);
            } catch (const std::exception& e) {
                std::string msg = e.what();
                if (const auto* ie = dynamic_cast<const InstanceError*>(&e)) {
                    const auto prefix = ie->instance_id() + ": ";
                    if (msg.rfind(prefix, 0) == 0) msg = msg.substr(prefix.size());
                }
                slots[i].failure = Failure{rec.instance.instance_id, rec.line, error_kind(e), msg};
            }
        }
    };
    const auto n = std::max<std::size_t>(1, std::min<std::size_t>(static_cast<std::size_t>(workers), records.size()));
    std::vector<std::jthread> pool;
    for (std::size_t k = 1; k < n; ++k) pool.emplace_back(work);
    work();
    return slots;
}

json opt(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }
json opt(const std::optional<int>& v) { return v ? json(*v) : json(nullptr); }

json scores_json(const ScenarioScores& s) { return {{"full", opt(s.full)}, {"cited", opt(s.cited)}}; }

json actions_json(const std::vector<EditAction>& actions) {
    json a = json::array();
    for (const auto& x : actions) a.push_back(io::action_to_json(x));
    return a;
}

json contexts_json(std::span<const ContextLabel> labels) {
    json a = json::array();
    for (auto l : labels) a.push_back(static_cast<int>(l));
    return a;
}

json statement_json(const StatementEvaluation& s) {
    json features = json::object();
    for (std::size_t k = 0; k < kActionKinds; ++k) {
        features[std::string(to_string(static_cast<ActionKind>(k)))] = s.features.freq[k];
    }
    return {{"index", s.index},
            {"context", static_cast<int>(s.context)},
            {"citations", s.citations},
            {"actions", actions_json(s.actions)},
            {"features", features},
            {"parametric", s.features.parametric_flag},
            {"likert", opt(s.likert)},
            {"itercoe", opt(s.itercoe)},
            {"editdist", opt(s.editdist)},
            {"ensemble", opt(s.ensemble)},
            {"applicable_full", s.applicable_full},
            {"applicable_cited", s.applicable_cited}};
}

std::vector<Scenario> scenarios_of(ScenarioChoice c) {
    switch (c) {
        case ScenarioChoice::Full: return {Scenario::Full};
        case ScenarioChoice::Cited: return {Scenario::Cited};
        case ScenarioChoice::Both: return {Scenario::Full, Scenario::Cited};
    }
    return {Scenario::Full, Scenario::Cited};
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

std::string fmt(const std::optional<double>& v) { return v ? fmt(*v) : "n/a"; }

void write_text(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write " + path.string());
    out << content;
    if (!out) throw ConfigError("write failed for " + path.string());
}

std::string join_lines(const std::vector<std::string>& lines) {
    std::string out;
    for (const auto& l : lines) out += l + "\n";
    return out;
}

// Mean of the present values.
struct Mean {
    double sum = 0.0;
    int n = 0;
    void add(const std::optional<double>& v) {
        if (v) {
            sum += *v;
            ++n;
        }
    }
    std::optional<double> value() const { return n ? std::optional<double>(sum / n) : std::nullopt; }
};

class Runner {
public:
    Runner(const CommandRequest& req, std::unique_ptr<Provider> provider) : req_(req), cfg_(req.config) {
        cfg_.validate();
        judge_ = JudgeConfig{cfg_.model_id, cfg_.temperature, cfg_.max_tokens};
        GatewayConfig gc;
        gc.cache_dir = cfg_.cache_dir;
        gc.playback = cfg_.playback;
        gc.concurrency_limit = cfg_.concurrency_limit;
        gc.max_retries = cfg_.max_retries;
        if (provider) {
            gateway_ = std::make_unique<Gateway>(gc, std::move(provider));
        } else if (cfg_.playback) {
            gateway_ = std::make_unique<Gateway>(gc, nullptr);
        } else if (auto p = make_provider(cfg_.provider)) {
            gateway_ = std::make_unique<Gateway>(gc, std::move(p));
        }
        fs::create_directories(req_.output_dir);
    }

    CommandOutcome run() {
        const auto& c = req_.command;
        if (c == "attribute") return attribute();
        if (c == "rate") return evaluate(false);
        if (c == "evaluate") return evaluate(true);
        if (c == "calibrate") return calibrate();
        if (c == "meta-eval") return meta_eval();
        if (c == "improve") return improve();
        if (c == "generate") return generate();
        if (c == "report") return report();
        throw ConfigError("unknown command '" + c + "'");
    }

private:
    Gateway& gateway() {
        if (!gateway_) {
            throw ConfigError("command '" + req_.command +
                              "' needs a model backend: set --provider or --playback with --cache-dir");
        }
        return *gateway_;
    }

    std::vector<io::IngestedRecord> load(bool response_optional = false) {
        std::ifstream in(req_.input);
        if (!in) throw IngestionError("cannot open input file " + req_.input.string());
        if (!response_optional) return io::ingest_records(in);
        std::stringstream patched;
        std::string line;
        while (std::getline(in, line)) {
            if (line.find_first_not_of(" \t\r") != std::string::npos) {
                try {
                    auto j = json::parse(line);
                    if (j.is_object() && !j.contains("response")) {
                        j["response"] = "";
                        line = j.dump();
                    }
                } catch (const json::parse_error&) {
                    // left for ingest_records to report with its line number
                }
            }
            patched << line << '\n';
        }
        return io::ingest_records(patched);
    }

    RatingModels load_models() {
        RatingModels m;
        const auto& metric = cfg_.metric;
        if ((metric == "citeeval" || metric == "editdist") && !cfg_.editdist_model) {
            throw ConfigError("metric '" + metric + "' needs an editdist_model file in the config");
        }
        if (metric == "citeeval" && !cfg_.ensemble_model) {
            throw ConfigError("metric 'citeeval' needs an ensemble_model file in the config");
        }
        if (cfg_.editdist_model) m.editdist = load_editdist_model(*cfg_.editdist_model);
        if (cfg_.ensemble_model) m.ensemble = load_ensemble_model(*cfg_.ensemble_model);
        return m;
    }

    // Labels carried in the record's citeeval block, else a fresh attribution.
    std::vector<ContextLabel> labels_for(const io::IngestedRecord& rec) {
        const auto& raw = rec.raw;
        if (raw.contains("citeeval") && raw["citeeval"].is_object() && raw["citeeval"].contains("contexts")) {
            const auto& cs = raw["citeeval"]["contexts"];
            if (!cs.is_array() || cs.size() != rec.instance.statements.size()) {
                throw AlignmentError("citeeval.contexts does not match the statement count");
            }
            std::vector<ContextLabel> labels;
            for (const auto& c : cs) {
                const auto l = c.is_number_integer() ? context_from_int(c.get<int>()) : std::nullopt;
                if (!l) throw DomainError("citeeval.contexts holds a value outside 1-4");
                labels.push_back(*l);
            }
            return labels;
        }
        try {
            return attribute_contexts(rec.instance, gateway(), judge_);
        } catch (const ConfigError&) {
            throw;
        } catch (const Error& e) {
            throw InstanceError(rec.instance.instance_id, error_kind(e), e.what());
        }
    }

    std::unique_ptr<EntailmentScorer> make_scorer() {
        if (cfg_.scorer == "lexical") return std::make_unique<LexicalOverlapScorer>();
        return std::make_unique<LlmEntailmentScorer>(gateway(), judge_);
    }

    static json output_record(const io::IngestedRecord& rec, json block) {
        json out = rec.raw;
        out["citeeval"] = std::move(block);
        return out;
    }

    struct Evaluated {
        json record;
        std::optional<double> full;
        std::optional<double> cited;
        std::vector<std::string> warnings;
    };

    Evaluated evaluate_one(const io::IngestedRecord& rec, const RatingModels& models, bool response_level) {
        const auto& inst = rec.instance;
        const auto labels = labels_for(rec);
        json block = {{"metric", cfg_.metric}, {"contexts", contexts_json(labels)}};
        Evaluated out;
        if (is_rating_metric(cfg_.metric)) {
            Evaluator ev{gateway(), judge_, models};
            const auto res = evaluate_with_labels(inst, labels, ev);
            json sts = json::array();
            for (const auto& s : res.statements) sts.push_back(statement_json(s));
            block["statements"] = std::move(sts);
            const auto& primary = res.scores(method_of(cfg_.metric));
            out.full = primary.full;
            out.cited = primary.cited;
            out.warnings = res.warnings;
            if (response_level) {
                block["scores"] = {{"itercoe", scores_json(res.itercoe)},
                                   {"editdist", scores_json(res.editdist)},
                                   {"ensemble", scores_json(res.ensemble)}};
                block["primary"] = scores_json(primary);
                block["stats"] = {{"length", res.stats.length}, {"missing_ratio", res.stats.missing_ratio}};
                block["warnings"] = res.warnings;
            }
        } else {
            auto scorer = make_scorer();
            BaselineEvaluation res;
            ResponseStats stats;
            try {
                stats = response_stats(inst);
                res = evaluate_baseline(inst, labels, *baseline_from_string(cfg_.metric), *scorer);
            } catch (const ConfigError&) {
                throw;
            } catch (const Error& e) {
                throw InstanceError(inst.instance_id, error_kind(e), e.what());
            }
            json sts = json::array();
            for (const auto& s : res.statements) {
                json scores = json::object();
                for (const auto& [k, v] : s.scores) scores[k] = opt(v);
                sts.push_back({{"index", s.index},
                               {"applicable_full", s.applicable_full},
                               {"applicable_cited", s.applicable_cited},
                               {"scores", scores}});
            }
            block["statements"] = std::move(sts);
            const auto key = res.primary();
            out.full = res.full.at(key);
            out.cited = res.cited.at(key);
            if (response_level) {
                json scores = json::object();
                for (const auto& [k, v] : res.full) scores[k] = {{"full", opt(v)}, {"cited", opt(res.cited.at(k))}};
                block["scores"] = std::move(scores);
                block["primary"] = {{"full", opt(out.full)}, {"cited", opt(out.cited)}};
                block["stats"] = {{"length", stats.length}, {"missing_ratio", stats.missing_ratio}};
            }
        }
        out.record = output_record(rec, std::move(block));
        return out;
    }

    template <typename R>
    int finish(const std::vector<Slot<R>>& slots, const std::vector<Failure>& extra = {}) {
        std::vector<std::string> errs;
        int failed = 0;
        auto push = [&](const Failure& f) {
            ++failed;
            errs.push_back(json{{"instance_id", f.instance_id}, {"line", f.line}, {"kind", f.kind},
                                {"message", f.message}}
                               .dump());
        };
        for (const auto& s : slots) {
            if (s.failure) push(*s.failure);
        }
        for (const auto& f : extra) push(f);
        write_text(req_.output_dir / "errors.jsonl", join_lines(errs));
        return failed;
    }

    CommandOutcome conclude(int processed, int failed, std::string summary) {
        summary = "command\t" + req_.command + "\ninstances\t" + std::to_string(processed) + "\nfailed\t" +
                  std::to_string(failed) + "\n" + summary;
        write_text(req_.output_dir / "summary.txt", summary);
        json manifest = {{"toolkit_version", std::string(kToolkitVersion)},
                         {"command", req_.command},
                         {"config", cfg_.to_json()},
                         {"config_hash", config_hash(cfg_)},
                         {"input_file", req_.input.filename().generic_string()},
                         {"input_sha256", sha256_hex(io::read_file(req_.input))},
                         {"seed", cfg_.seed},
                         {"instances", processed},
                         {"failed", failed}};
        write_text(req_.output_dir / "manifest.json", manifest.dump(2) + "\n");
        return CommandOutcome{failed > 0 ? 1 : 0, processed, failed, summary};
    }

    CommandOutcome attribute() {
        const auto records = load();
        const auto slots = run_all<json>(records, cfg_.concurrency_limit, [&](const io::IngestedRecord& rec) {
            const auto labels = labels_for(rec);
            return output_record(rec, {{"contexts", contexts_json(labels)}});
        });
        std::vector<std::string> lines;
        std::map<int, int> counts;
        for (const auto& s : slots) {
            if (!s.value) continue;
            lines.push_back(s.value->dump());
            for (const auto& c : (*s.value)["citeeval"]["contexts"]) ++counts[c.get<int>()];
        }
        write_text(req_.output_dir / "attributions.jsonl", join_lines(lines));
        const int failed = finish(slots);
        std::string summary;
        for (const auto& [label, n] : counts) {
            summary += "statements_" + std::string(to_string(*context_from_int(label))) + "\t" + std::to_string(n) + "\n";
        }
        return conclude(static_cast<int>(records.size()), failed, summary);
    }

    CommandOutcome evaluate(bool response_level) {
        const auto models = is_rating_metric(cfg_.metric) ? load_models() : RatingModels{};
        const auto records = load();
        const auto slots = run_all<Evaluated>(records, cfg_.concurrency_limit, [&](const io::IngestedRecord& rec) {
            return evaluate_one(rec, models, response_level);
        });
        std::vector<std::string> lines;
        Mean full;
        Mean cited;
        int warnings = 0;
        for (const auto& s : slots) {
            if (!s.value) continue;
            lines.push_back(s.value->record.dump());
            full.add(s.value->full);
            cited.add(s.value->cited);
            warnings += static_cast<int>(s.value->warnings.size());
        }
        write_text(req_.output_dir / (response_level ? "results.jsonl" : "ratings.jsonl"), join_lines(lines));
        const int failed = finish(slots);
        std::string summary = "metric\t" + cfg_.metric + "\n";
        for (auto sc : scenarios_of(cfg_.scenario)) {
            const auto& m = sc == Scenario::Full ? full : cited;
            summary += "mean_" + std::string(to_string(sc)) + "\t" + fmt(m.value()) + "\t(" + std::to_string(m.n) +
                       " responses)\n";
        }
        summary += "protocol_warnings\t" + std::to_string(warnings) + "\n";
        return conclude(static_cast<int>(records.size()), failed, summary);
    }

    CommandOutcome calibrate() {
        const auto records = load();
        std::vector<DevRow> rows;
        int with_human = 0;
        for (const auto& rec : records) {
            const auto& inst = rec.instance;
            if (!inst.human) continue;
            ++with_human;
            for (std::size_t i = 0; i < inst.statements.size(); ++i) {
                if (inst.human->contexts[i] != ContextLabel::Retrieval || !inst.human->likert[i]) continue;
                const auto& edits = inst.human->edits[i];
                rows.push_back({action_features(edits, kept_citation_count(inst.statements[i].citations, edits)),
                                *inst.human->likert[i]});
            }
        }
        EditDistFit fit;
        try {
            fit = fit_edit_distances(rows);
        } catch (const UnderdeterminedError& e) {
            throw ConfigError(std::string("not enough annotated statements to calibrate: ") + e.what());
        }
        write_text(req_.output_dir / "editdist.model", format_editdist_model(fit.model));
        std::string summary = "annotated_instances\t" + std::to_string(with_human) + "\neditdist_rows\t" +
                              std::to_string(rows.size()) + "\nridge_fallback\t" +
                              (fit.ols.ridge_fallback ? "yes" : "no") + "\n";
        for (std::size_t k = 0; k < kActionKinds; ++k) {
            summary += "distance_" + std::string(to_string(static_cast<ActionKind>(k))) + "\t" +
                       fmt(fit.model.distance[k]) + "\n";
        }
        summary += "bias\t" + fmt(fit.model.bias) + "\n";

        std::vector<Slot<std::vector<EnsembleDevPoint>>> slots;
        if (gateway_) {
            RatingModels models;
            models.editdist = fit.model;
            slots = run_all<std::vector<EnsembleDevPoint>>(
                records, cfg_.concurrency_limit, [&](const io::IngestedRecord& rec) {
                    std::vector<EnsembleDevPoint> pts;
                    const auto& inst = rec.instance;
                    if (!inst.human) return pts;
                    Evaluator ev{gateway(), judge_, models};
                    const auto res = evaluate_with_labels(inst, inst.human->contexts, ev);
                    for (std::size_t i = 0; i < res.statements.size(); ++i) {
                        const auto& s = res.statements[i];
                        if (s.itercoe && s.editdist && inst.human->likert[i]) {
                            pts.push_back({*s.itercoe, *s.editdist, normalize_score(*inst.human->likert[i])});
                        }
                    }
                    return pts;
                });
            std::vector<EnsembleDevPoint> points;
            for (const auto& s : slots) {
                if (s.value) points.insert(points.end(), s.value->begin(), s.value->end());
            }
            try {
                const auto ens = fit_ensemble_lambda(points);
                write_text(req_.output_dir / "ensemble.model", format_ensemble_model(ens));
                summary += "ensemble_points\t" + std::to_string(points.size()) + "\nlambda\t" + fmt(ens.lambda) + "\n";
            } catch (const Error& e) {
                summary += "ensemble\tnot fitted: " + std::string(e.what()) + "\n";
            }
        } else {
            summary += "ensemble\tnot fitted: no model backend configured\n";
        }
        const int failed = finish(slots);
        return conclude(static_cast<int>(records.size()), failed, summary);
    }

    CommandOutcome meta_eval() {
        const auto models = is_rating_metric(cfg_.metric) ? load_models() : RatingModels{};
        const auto records = load();
        struct Scored {
            json record;
            std::map<Scenario, std::vector<std::optional<double>>> metric_st;
            std::map<Scenario, std::vector<std::optional<double>>> human_st;
            std::map<Scenario, std::optional<double>> metric_resp;
            std::map<Scenario, std::optional<double>> human_resp;
        };
        const auto slots = run_all<Scored>(records, cfg_.concurrency_limit, [&](const io::IngestedRecord& rec) {
            const auto& inst = rec.instance;
            if (!inst.human) {
                throw InstanceError(inst.instance_id, "missing-human", "record has no human annotation");
            }
            Scored sc;
            auto ev = evaluate_one(rec, models, true);
            const auto& block = ev.record["citeeval"];
            for (auto s : {Scenario::Full, Scenario::Cited}) {
                const bool full = s == Scenario::Full;
                std::vector<StatementRating> human;
                for (std::size_t i = 0; i < inst.statements.size(); ++i) {
                    const auto& st = block["statements"][i];
                    std::optional<double> m;
                    if (is_rating_metric(cfg_.metric)) {
                        const char* key = cfg_.metric == "itercoe" ? "itercoe"
                                          : cfg_.metric == "editdist" ? "editdist" : "ensemble";
                        if (!st[key].is_null()) m = st[key].get<double>();
                    } else {
                        BaselineEvaluation tmp;
                        tmp.metric = *baseline_from_string(cfg_.metric);
                        const auto& v = st["scores"][tmp.primary()];
                        if (!v.is_null()) m = v.get<double>();
                    }
                    const bool applicable = st[full ? "applicable_full" : "applicable_cited"].get<bool>();
                    sc.metric_st[s].push_back(applicable ? m : std::nullopt);

                    StatementRating hr;
                    hr.statement_index = inst.statements[i].index;
                    if (inst.human->likert[i]) hr.normalized = normalize_score(*inst.human->likert[i]);
                    human.push_back(std::move(hr));
                }
                const auto masked = mask_for_scenario(human, inst.statements, inst.human->contexts, s);
                for (const auto& hr : masked) sc.human_st[s].push_back(hr.normalized);
                sc.human_resp[s] = aggregate_response(masked, s);
                sc.metric_resp[s] = full ? ev.full : ev.cited;
            }
            sc.record = std::move(ev.record);
            return sc;
        });

        std::vector<std::string> lines;
        std::map<std::pair<stats::MetaLevel, Scenario>, std::pair<std::vector<std::optional<double>>,
                                                                  std::vector<std::optional<double>>>>
            pooled;
        for (const auto& s : slots) {
            if (!s.value) continue;
            lines.push_back(s.value->record.dump());
            for (auto sc : {Scenario::Full, Scenario::Cited}) {
                auto& st = pooled[{stats::MetaLevel::Statement, sc}];
                st.first.insert(st.first.end(), s.value->metric_st.at(sc).begin(), s.value->metric_st.at(sc).end());
                st.second.insert(st.second.end(), s.value->human_st.at(sc).begin(), s.value->human_st.at(sc).end());
                auto& rp = pooled[{stats::MetaLevel::Response, sc}];
                rp.first.push_back(s.value->metric_resp.at(sc));
                rp.second.push_back(s.value->human_resp.at(sc));
            }
        }
        write_text(req_.output_dir / "results.jsonl", join_lines(lines));

        std::vector<stats::CorrelationTable> tables;
        std::string summary = "metric\t" + cfg_.metric + "\nstatement_pooling\tpooled\n";
        for (auto level : {stats::MetaLevel::Statement, stats::MetaLevel::Response}) {
            for (auto sc : scenarios_of(cfg_.scenario)) {
                const auto& [m, h] = pooled[{level, sc}];
                try {
                    tables.push_back(stats::meta_evaluate(m, h, level, sc, cfg_.metric));
                } catch (const Error& e) {
                    summary += std::string(stats::to_string(level)) + "/" + std::string(to_string(sc)) +
                               "\tskipped: " + e.what() + "\n";
                }
            }
        }
        write_text(req_.output_dir / "metaeval.tsv", stats::format_tables_tsv(tables));
        write_text(req_.output_dir / "metaeval.jsonl", stats::format_tables_jsonl(tables));
        summary += stats::format_tables_tsv(tables);
        const int failed = finish(slots);
        return conclude(static_cast<int>(records.size()), failed, summary);
    }

    CommandOutcome improve() {
        if (!is_rating_metric(cfg_.metric)) {
            throw ConfigError("improve works with citeeval, itercoe or editdist, not '" + cfg_.metric + "'");
        }
        const auto models = load_models();
        const auto records = load();
        const auto slots = run_all<ImproveTrace>(records, cfg_.concurrency_limit, [&](const io::IngestedRecord& rec) {
            Evaluator ev{gateway(), judge_, models};
            std::vector<ContextLabel> labels;
            try {
                labels = labels_for(rec);
            } catch (const InstanceError& e) {
                ImproveTrace t;
                t.instance_id = rec.instance.instance_id;
                t.error_kind = e.kind();
                t.error_message = e.what();
                return t;
            }
            return improve_with_labels(rec.instance, labels, cfg_.max_iters, ev);
        });
        std::vector<std::string> lines;
        std::vector<Failure> failures;
        std::map<std::size_t, Mean> trajectory;
        int converged = 0;
        const auto method = method_of(cfg_.metric);
        for (std::size_t i = 0; i < slots.size(); ++i) {
            const auto& s = slots[i];
            if (!s.value) continue;
            const auto& trace = *s.value;
            for (auto& l : trace_to_records(trace)) lines.push_back(std::move(l));
            if (trace.failed()) {
                failures.push_back({trace.instance_id, records[i].line, *trace.error_kind,
                                    trace.error_message.value_or("")});
                continue;
            }
            if (trace.converged_at) ++converged;
            for (std::size_t t = 0; t < trace.iterations.size(); ++t) {
                trajectory[t].add(trace.iterations[t].scores(method).full);
            }
        }
        write_text(req_.output_dir / "traces.jsonl", join_lines(lines));
        const int failed = finish(slots, failures);
        std::string summary = "metric\t" + cfg_.metric + "\nmax_iters\t" + std::to_string(cfg_.max_iters) +
                              "\nconverged\t" + std::to_string(converged) + "\niteration\tmean_full\tresponses\n";
        for (const auto& [t, m] : trajectory) {
            summary += std::to_string(t) + "\t" + fmt(m.value()) + "\t" + std::to_string(m.n) + "\n";
        }
        return conclude(static_cast<int>(records.size()), failed, summary);
    }

    CommandOutcome generate() {
        const auto records = load(true);
        std::vector<std::string> prompts;
        for (const auto& rec : records) {
            prompts.push_back(
                json{{"instance_id", rec.instance.instance_id}, {"prompt", generation_prompt(rec.instance.query, rec.instance.passages)}}
                    .dump());
        }
        write_text(req_.output_dir / "prompts.jsonl", join_lines(prompts));
        std::string summary;
        std::vector<Slot<json>> slots;
        if (gateway_) {
            slots = run_all<json>(records, cfg_.concurrency_limit, [&](const io::IngestedRecord& rec) {
                const auto prompt = generation_prompt(rec.instance.query, rec.instance.passages);
                const auto reply = gateway().complete(CompletionRequest{cfg_.model_id, prompt, cfg_.temperature,
                                                                        cfg_.max_tokens});
                auto inst = rec.instance;
                inst.response_raw = reply.text;
                inst.model = cfg_.model_id;
                inst.human.reset();
                auto j = io::instance_to_json(inst);
                // Re-validate so the output is ingestable.
                (void)io::parse_record(j, text::SegmenterConfig::defaults());
                return j;
            });
            std::vector<std::string> lines;
            for (const auto& s : slots) {
                if (s.value) lines.push_back(s.value->dump());
            }
            write_text(req_.output_dir / "generations.jsonl", join_lines(lines));
            summary = "generations\t" + std::to_string(lines.size()) + "\n";
        } else {
            summary = "generations\tnone (no model backend; prompts only)\n";
        }
        const int failed = finish(slots);
        return conclude(static_cast<int>(records.size()), failed, summary);
    }

    CommandOutcome report() {
        std::vector<report::ReportRow> rows;
        std::vector<Failure> failures;
        int lineno = 0;
        std::ifstream in(req_.input);
        if (!in) throw IngestionError("cannot open input file " + req_.input.string());
        std::string line;
        while (std::getline(in, line)) {
            ++lineno;
            if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
            std::string id;
            try {
                const auto j = json::parse(line);
                id = j.value("instance_id", std::string());
                report::ReportRow row;
                row.model = j.contains("model") && j["model"].is_string() ? j["model"].get<std::string>() : "";
                row.dataset = j.contains("dataset") && j["dataset"].is_string() ? j["dataset"].get<std::string>() : "";
                const bool evaluated = j.contains("citeeval") && j["citeeval"].contains("stats");
                if (evaluated) {
                    const auto& b = j["citeeval"];
                    row.length = b["stats"].at("length").get<int>();
                    row.missing_ratio = b["stats"].at("missing_ratio").get<double>();
                    if (b.contains("primary")) {
                        if (!b["primary"]["full"].is_null()) row.full = b["primary"]["full"].get<double>();
                        if (!b["primary"]["cited"].is_null()) row.cited = b["primary"]["cited"].get<double>();
                    }
                } else {
                    const auto stats = response_stats(io::parse_record(j, text::SegmenterConfig::defaults()));
                    row.length = stats.length;
                    row.missing_ratio = stats.missing_ratio;
                }
                rows.push_back(std::move(row));
            } catch (const json::exception& e) {
                failures.push_back({id, lineno, "ingestion", e.what()});
            } catch (const Error& e) {
                failures.push_back({id, lineno, error_kind(e), e.what()});
            }
        }
        const auto rep = report::corpus_report(rows, cfg_.seed);
        const auto text = report::format_report(rep);
        write_text(req_.output_dir / "report.txt", text);
        write_text(req_.output_dir / "report.json", report::report_to_json(rep) + "\n");
        std::vector<Slot<int>> none;
        const int failed = finish(none, failures);
        return conclude(static_cast<int>(rows.size()) + failed, failed, text);
    }

    const CommandRequest& req_;
    RunConfig cfg_;
    JudgeConfig judge_;
    std::unique_ptr<Gateway> gateway_;
};

}  // namespace

CommandOutcome run_command(const CommandRequest& request, std::unique_ptr<Provider> provider) {
    Runner runner(request, std::move(provider));
    return runner.run();
}

}  // namespace citeeval::cli
