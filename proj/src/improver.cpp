#include "citeeval/improver.hpp"

#include "citeeval/attribution.hpp"
#include "citeeval/errors.hpp"
#include "citeeval/text_prep.hpp"

#include <nlohmann/json.hpp>

namespace citeeval {

using nlohmann::json;

ExecutionResult execute_actions(const std::set<int>& citations, std::span<const EditAction> actions, int max_id) {
    ExecutionResult out;
    out.citations = citations;
    for (const auto& a : actions) {
        if (a.op != ActionOp::Delete) continue;
        if (out.citations.erase(a.citation) == 0) {
            out.warnings.push_back("delete of absent citation " + std::to_string(a.citation) + " ignored");
        }
    }
    for (const auto& a : actions) {
        if (a.op != ActionOp::Add) continue;
        if (a.citation == 0) {
            out.parametric_flag = true;
        } else if (a.citation < 0 || a.citation > max_id) {
            out.warnings.push_back("add of citation " + std::to_string(a.citation) + " outside [1, " +
                                   std::to_string(max_id) + "] dropped");
        } else {
            out.citations.insert(a.citation);
        }
    }
    return out;
}

const ScenarioScores& ImproveIteration::scores(RatingMethod m) const {
    switch (m) {
        case RatingMethod::IterCoE: return itercoe;
        case RatingMethod::EditDist: return editdist;
        case RatingMethod::Ensemble: return ensemble;
    }
    return itercoe;
}

EvalInstance with_citations(const EvalInstance& instance, std::span<const std::set<int>> citations) {
    if (citations.size() != instance.statements.size()) {
        throw AlignmentError("with_citations: " + std::to_string(citations.size()) + " citation sets for " +
                             std::to_string(instance.statements.size()) + " statements");
    }
    EvalInstance next = instance;
    next.response_raw.clear();
    for (std::size_t i = 0; i < next.statements.size(); ++i) {
        auto& st = next.statements[i];
        st.citations = citations[i];
        st.text_with_citations = text::rewrite_citations(st.text_with_citations, st.citations);
        if (!next.response_raw.empty()) next.response_raw += ' ';
        next.response_raw += st.text_with_citations;
    }
    return next;
}

ImproveTrace improve_with_labels(const EvalInstance& instance, std::span<const ContextLabel> labels, int max_iters,
                                 Evaluator& evaluator) {
    if (max_iters < 1) throw DomainError("max_iters must be at least 1");
    ImproveTrace trace;
    trace.instance_id = instance.instance_id;
    const int max_id = instance.max_citation_id();
    EvalInstance current = instance;

    for (int t = 0; t <= max_iters; ++t) {
        InstanceEvaluation ev;
        try {
            ev = evaluate_with_labels(current, labels, evaluator);
        } catch (const InstanceError& e) {
            trace.error_kind = e.kind();
            trace.error_message = e.what();
            return trace;
        }

        ImproveIteration it;
        it.itercoe = ev.itercoe;
        it.editdist = ev.editdist;
        it.ensemble = ev.ensemble;
        it.warnings = ev.warnings;
        std::vector<std::set<int>> next;
        bool changed = false;
        for (std::size_t i = 0; i < current.statements.size(); ++i) {
            const auto& st = current.statements[i];
            const auto& se = ev.statements[i];
            it.citations.push_back(st.citations);
            it.actions.push_back(se.actions);
            // Only statements grounded in retrieval are edited.
            if (!applicable(labels[i])) {
                it.parametric.push_back(false);
                next.push_back(st.citations);
                continue;
            }
            auto res = execute_actions(st.citations, se.actions, max_id);
            it.parametric.push_back(res.parametric_flag);
            for (auto& w : res.warnings) it.warnings.push_back("statement " + std::to_string(st.index) + ": " + w);
            changed = changed || res.citations != st.citations;
            next.push_back(std::move(res.citations));
        }
        trace.iterations.push_back(std::move(it));

        if (!changed) {
            trace.converged_at = t;
            break;
        }
        if (t == max_iters) break;
        current = with_citations(current, next);
    }
    return trace;
}

ImproveTrace improve_iteratively(const EvalInstance& instance, int max_iters, Evaluator& evaluator) {
    if (max_iters < 1) throw DomainError("max_iters must be at least 1");
    std::vector<ContextLabel> labels;
    try {
        labels = attribute_contexts(instance, evaluator.gateway, evaluator.judge);
    } catch (const Error& e) {
        ImproveTrace trace;
        trace.instance_id = instance.instance_id;
        trace.error_kind = error_kind(e);
        trace.error_message = e.what();
        return trace;
    }
    return improve_with_labels(instance, labels, max_iters, evaluator);
}

namespace {

json opt_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::optional<double> opt_from(const json& j) {
    if (j.is_null()) return std::nullopt;
    return j.get<double>();
}

json scores_json(const ScenarioScores& s) { return {{"full", opt_json(s.full)}, {"cited", opt_json(s.cited)}}; }

ScenarioScores scores_from(const json& j) { return {opt_from(j.at("full")), opt_from(j.at("cited"))}; }

json action_json(const EditAction& a) {
    return {{"op", std::string(to_string(a.op))}, {"citation", a.citation}, {"reason", std::string(to_string(a.reason))}};
}

EditAction action_from(const json& j) {
    const auto op = action_op_from_string(j.at("op").get<std::string>());
    const auto reason = action_reason_from_string(j.at("reason").get<std::string>());
    if (!op || !reason) throw ParseError("bad action in trace record", j.dump());
    return make_action(*op, j.at("citation").get<int>(), *reason);
}

}  // namespace

std::vector<std::string> trace_to_records(const ImproveTrace& trace) {
    std::vector<std::string> lines;
    const auto n = trace.iterations.size();
    for (std::size_t t = 0; t < n; ++t) {
        const auto& it = trace.iterations[t];
        json acts = json::array();
        for (const auto& per : it.actions) {
            json a = json::array();
            for (const auto& x : per) a.push_back(action_json(x));
            acts.push_back(std::move(a));
        }
        json cites = json::array();
        for (const auto& c : it.citations) cites.push_back(c);
        json rec = {{"instance_id", trace.instance_id},
                    {"iteration", t},
                    {"citations", cites},
                    {"actions", acts},
                    {"parametric", it.parametric},
                    {"itercoe", scores_json(it.itercoe)},
                    {"editdist", scores_json(it.editdist)},
                    {"ensemble", scores_json(it.ensemble)},
                    {"warnings", it.warnings}};
        if (t + 1 == n) {
            rec["final"] = true;
            rec["converged_at"] = trace.converged_at ? json(*trace.converged_at) : json(nullptr);
            if (trace.error_kind) {
                rec["error_kind"] = *trace.error_kind;
                rec["error_message"] = trace.error_message.value_or("");
            }
        }
        lines.push_back(rec.dump());
    }
    if (n == 0) {
        json rec = {{"instance_id", trace.instance_id}, {"iteration", nullptr}, {"final", true},
                    {"converged_at", nullptr}};
        if (trace.error_kind) {
            rec["error_kind"] = *trace.error_kind;
            rec["error_message"] = trace.error_message.value_or("");
        }
        lines.push_back(rec.dump());
    }
    return lines;
}

ImproveTrace trace_from_records(std::span<const std::string> lines) {
    ImproveTrace trace;
    try {
        for (const auto& line : lines) {
            const auto rec = json::parse(line);
            trace.instance_id = rec.at("instance_id").get<std::string>();
            if (!rec.at("iteration").is_null()) {
                ImproveIteration it;
                for (const auto& c : rec.at("citations")) it.citations.push_back(c.get<std::set<int>>());
                for (const auto& per : rec.at("actions")) {
                    std::vector<EditAction> a;
                    for (const auto& x : per) a.push_back(action_from(x));
                    it.actions.push_back(std::move(a));
                }
                it.parametric = rec.at("parametric").get<std::vector<bool>>();
                it.itercoe = scores_from(rec.at("itercoe"));
                it.editdist = scores_from(rec.at("editdist"));
                it.ensemble = scores_from(rec.at("ensemble"));
                it.warnings = rec.at("warnings").get<std::vector<std::string>>();
                trace.iterations.push_back(std::move(it));
            }
            if (rec.value("final", false)) {
                if (!rec.at("converged_at").is_null()) trace.converged_at = rec.at("converged_at").get<int>();
                if (rec.contains("error_kind")) {
                    trace.error_kind = rec.at("error_kind").get<std::string>();
                    trace.error_message = rec.at("error_message").get<std::string>();
                }
            }
        }
    } catch (const json::exception& e) {
        throw ParseError(std::string("malformed trace record: ") + e.what(), "");
    }
    return trace;
}

}  // namespace citeeval
