#include "citeeval/rating.hpp"

#include "citeeval/attribution.hpp"
#include "citeeval/errors.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

namespace citeeval {

namespace {

constexpr std::array<std::string_view, kActionKinds> kKindNames = {
    "delete-misleading", "delete-substandard", "delete-redundant", "add-evidence",
    "add-refinement",    "add-credibility",    "keep"};

std::optional<int> leading_int(std::string_view body) {
    std::size_t i = 0;
    while (i < body.size() && std::isspace(static_cast<unsigned char>(body[i]))) ++i;
    const auto begin = i;
    while (i < body.size() && std::isdigit(static_cast<unsigned char>(body[i])) && i - begin < 6) ++i;
    if (i == begin) return std::nullopt;
    return std::stoi(std::string(body.substr(begin, i - begin)));
}

std::vector<std::string> protocol_warnings(const StatementEvaluation& st) {
    std::vector<std::string> out;
    const bool has_delete = std::any_of(st.actions.begin(), st.actions.end(),
                                        [](const EditAction& a) { return a.op == ActionOp::Delete; });
    for (const auto& a : st.actions) {
        if (a.op == ActionOp::Add && a.reason == ActionReason::Refinement && !has_delete) {
            out.push_back("statement " + std::to_string(st.index) + ": add-refinement of citation " +
                          std::to_string(a.citation) + " without a paired delete");
        }
    }
    return out;
}

ScenarioScores aggregate_method(const std::vector<StatementEvaluation>& statements,
                                std::optional<double> StatementEvaluation::*field) {
    std::vector<StatementRating> ratings;
    ratings.reserve(statements.size());
    for (const auto& st : statements) {
        StatementRating r;
        r.statement_index = st.index;
        r.normalized = st.*field;
        r.applicable_full = st.applicable_full;
        r.applicable_cited = st.applicable_cited;
        ratings.push_back(std::move(r));
    }
    return ScenarioScores{aggregate_response(ratings, Scenario::Full), aggregate_response(ratings, Scenario::Cited)};
}

}  // namespace

std::string_view to_string(ActionKind kind) { return kKindNames[static_cast<std::size_t>(kind)]; }

std::optional<ActionKind> action_kind_from_string(std::string_view name) {
    for (std::size_t i = 0; i < kKindNames.size(); ++i) {
        if (kKindNames[i] == name) return static_cast<ActionKind>(i);
    }
    return std::nullopt;
}

ActionKind kind_of(const EditAction& action) {
    if (action.op == ActionOp::Add && action.citation == 0) return ActionKind::AddEvidence;
    switch (action.reason) {
        case ActionReason::Misleading: return ActionKind::DeleteMisleading;
        case ActionReason::Substandard: return ActionKind::DeleteSubstandard;
        case ActionReason::Redundant: return ActionKind::DeleteRedundant;
        case ActionReason::Evidence: return ActionKind::AddEvidence;
        case ActionReason::Refinement: return ActionKind::AddRefinement;
        case ActionReason::Credibility: return ActionKind::AddCredibility;
    }
    throw DomainError("unknown action reason");
}

int kept_citation_count(const std::set<int>& original, std::span<const EditAction> actions) {
    std::set<int> deleted;
    for (const auto& a : actions) {
        if (a.op == ActionOp::Delete && original.count(a.citation) > 0) deleted.insert(a.citation);
    }
    return static_cast<int>(original.size() - deleted.size());
}

ActionFeatureVector action_features(std::span<const EditAction> actions, int kept_citations) {
    if (kept_citations < 0) throw DomainError("kept_citations must be >= 0");
    ActionFeatureVector f;
    std::array<int, kActionKinds> counts{};
    for (const auto& a : actions) {
        ++counts[static_cast<std::size_t>(kind_of(a))];
        if (a.op == ActionOp::Add && a.citation == 0) f.parametric_flag = true;
    }
    counts[static_cast<std::size_t>(ActionKind::Keep)] = kept_citations;
    int total = 0;
    for (int c : counts) total += c;
    if (total == 0) return f;
    for (std::size_t k = 0; k < kActionKinds; ++k) f.freq[k] = static_cast<double>(counts[k]) / total;
    return f;
}

double EditDistModel::raw(const ActionFeatureVector& features) const {
    double r = bias;
    for (std::size_t k = 0; k < kActionKinds; ++k) r += distance[k] * features.freq[k];
    return r;
}

double rate_editdist(const ActionFeatureVector& features, const EditDistModel& model) {
    double raw = model.raw(features);
    if (std::isnan(raw)) throw DomainError("edit-distance model produced NaN");
    raw = std::clamp(raw, EditDistModel::kMinRating, EditDistModel::kMaxRating);
    return normalize_score(raw);
}

EnsembleModel EnsembleModel::make(double lambda) {
    if (!(lambda >= 0.0 && lambda <= 1.0)) throw DomainError("ensemble lambda must lie in [0,1]");
    return EnsembleModel{lambda};
}

std::optional<double> rate_ensemble(std::optional<double> itercoe, std::optional<double> editdist,
                                    const EnsembleModel& ensemble) {
    if (itercoe.has_value() != editdist.has_value()) {
        throw AlignmentError("ensemble inputs disagree on the N/A mask");
    }
    if (!itercoe) return std::nullopt;
    return ensemble.lambda * *itercoe + (1.0 - ensemble.lambda) * *editdist;
}

std::vector<StatementJudgement> parse_editing_output(std::string_view text, int num_statements) {
    std::vector<StatementJudgement> out(static_cast<std::size_t>(std::max(num_statements, 0)));
    for (const auto& block : parse_tagged_blocks(text, {"editing", "rating"})) {
        const auto id = block.int_attribute("sentence_id");
        if (!id) throw ParseError("<" + block.tag + "> block without sentence_id", block.body);
        if (*id < 1 || *id > num_statements) continue;
        auto& slot = out[static_cast<std::size_t>(*id - 1)];
        if (block.tag == "editing") {
            if (slot.has_editing) continue;
            slot.has_editing = true;
            for (const auto& child : block.children) slot.actions.push_back(parse_edit_action(child));
        } else {
            if (slot.likert) continue;
            const auto value = leading_int(block.body);
            if (!value) throw ParseError("rating is not a number", block.body);
            if (*value < 1 || *value > 5) {
                throw ParseError("rating out of range 1-5: " + std::to_string(*value), block.body);
            }
            slot.likert = *value;
        }
    }
    return out;
}

std::vector<StatementRating> rate_itercoe(const EvalInstance& instance, std::span<const ContextLabel> labels,
                                          Gateway& gateway, const JudgeConfig& judge) {
    const int n = static_cast<int>(instance.statements.size());
    if (labels.size() != instance.statements.size()) {
        throw AlignmentError("rate_itercoe: " + std::to_string(labels.size()) + " labels for " +
                             std::to_string(n) + " statements");
    }

    auto judge_once = [&](bool refresh) {
        const auto reply = gateway.complete(judge.request(editing_prompt(instance)), {.refresh = refresh});
        auto judgements = parse_editing_output(reply.text, n);
        for (int i = 0; i < n; ++i) {
            if (applicable(labels[static_cast<std::size_t>(i)]) && !judgements[static_cast<std::size_t>(i)].likert) {
                throw RatingIncompleteError("no rating for applicable sentence " + std::to_string(i + 1));
            }
        }
        return judgements;
    };

    std::vector<StatementJudgement> judgements;
    if (std::none_of(labels.begin(), labels.end(), [](ContextLabel l) { return applicable(l); })) {
        judgements.resize(static_cast<std::size_t>(n));
    } else {
        try {
            judgements = judge_once(false);
        } catch (const RatingIncompleteError&) {
            judgements = judge_once(true);
        }
    }

    std::vector<StatementRating> ratings;
    ratings.reserve(judgements.size());
    for (int i = 0; i < n; ++i) {
        const auto& st = instance.statements[static_cast<std::size_t>(i)];
        auto& j = judgements[static_cast<std::size_t>(i)];
        StatementRating r;
        r.statement_index = st.index;
        r.applicable_full = applicable(labels[static_cast<std::size_t>(i)]);
        r.applicable_cited = r.applicable_full && !st.citations.empty();
        if (r.applicable_full) {
            r.actions = std::move(j.actions);
            r.likert = j.likert;
            r.normalized = normalize_rating(*j.likert);
        }
        ratings.push_back(std::move(r));
    }
    return ratings;
}

std::string_view to_string(RatingMethod m) {
    switch (m) {
        case RatingMethod::IterCoE: return "itercoe";
        case RatingMethod::EditDist: return "editdist";
        case RatingMethod::Ensemble: return "ensemble";
    }
    return "unknown";
}

const ScenarioScores& InstanceEvaluation::scores(RatingMethod m) const {
    switch (m) {
        case RatingMethod::IterCoE: return itercoe;
        case RatingMethod::EditDist: return editdist;
        case RatingMethod::Ensemble: return ensemble;
    }
    throw DomainError("unknown rating method");
}

std::vector<std::optional<double>> InstanceEvaluation::statement_scores(RatingMethod m, Scenario s) const {
    std::vector<std::optional<double>> out;
    out.reserve(statements.size());
    for (const auto& st : statements) {
        const bool on = s == Scenario::Full ? st.applicable_full : st.applicable_cited;
        std::optional<double> v;
        if (on) {
            v = m == RatingMethod::IterCoE ? st.itercoe : m == RatingMethod::EditDist ? st.editdist : st.ensemble;
        }
        out.push_back(v);
    }
    return out;
}

InstanceEvaluation evaluate_with_labels(const EvalInstance& instance, std::span<const ContextLabel> labels,
                                        Evaluator& evaluator) {
    InstanceEvaluation ev;
    ev.instance_id = instance.instance_id;
    try {
        ev.stats = response_stats(instance);
        const auto ratings = rate_itercoe(instance, labels, evaluator.gateway, evaluator.judge);
        const auto masked_full = mask_for_scenario(ratings, instance.statements, labels, Scenario::Full);

        for (std::size_t i = 0; i < ratings.size(); ++i) {
            const auto& st = instance.statements[i];
            const auto& r = masked_full[i];
            StatementEvaluation se;
            se.index = st.index;
            se.context = labels[i];
            se.citations = st.citations;
            se.actions = r.actions;
            se.likert = r.likert;
            se.applicable_full = r.applicable_full;
            se.applicable_cited = r.applicable_cited;
            se.itercoe = r.normalized;
            if (se.applicable_full) {
                se.features = action_features(se.actions, kept_citation_count(st.citations, se.actions));
                if (evaluator.models.editdist) se.editdist = rate_editdist(se.features, *evaluator.models.editdist);
                if (evaluator.models.ensemble && se.editdist) {
                    se.ensemble = rate_ensemble(se.itercoe, se.editdist, *evaluator.models.ensemble);
                }
            }
            for (auto& w : protocol_warnings(se)) ev.warnings.push_back(std::move(w));
            ev.statements.push_back(std::move(se));
        }
    } catch (const InstanceError&) {
        throw;
    } catch (const Error& e) {
        throw InstanceError(instance.instance_id, error_kind(e), e.what());
    }
    ev.itercoe = aggregate_method(ev.statements, &StatementEvaluation::itercoe);
    ev.editdist = aggregate_method(ev.statements, &StatementEvaluation::editdist);
    ev.ensemble = aggregate_method(ev.statements, &StatementEvaluation::ensemble);
    return ev;
}

InstanceEvaluation evaluate_instance(const EvalInstance& instance, Evaluator& evaluator) {
    std::vector<ContextLabel> labels;
    try {
        labels = attribute_contexts(instance, evaluator.gateway, evaluator.judge);
    } catch (const Error& e) {
        throw InstanceError(instance.instance_id, error_kind(e), e.what());
    }
    return evaluate_with_labels(instance, labels, evaluator);
}

std::string error_kind(const std::exception& e) {
    if (const auto* ie = dynamic_cast<const InstanceError*>(&e)) return ie->kind();
    if (dynamic_cast<const ParseError*>(&e)) return "parse";
    if (dynamic_cast<const AttributionIncompleteError*>(&e)) return "attribution-incomplete";
    if (dynamic_cast<const RatingIncompleteError*>(&e)) return "rating-incomplete";
    if (dynamic_cast<const FixtureMissingError*>(&e)) return "fixture-missing";
    if (dynamic_cast<const TransportError*>(&e)) return "transport";
    if (dynamic_cast<const TemplateError*>(&e)) return "template";
    if (dynamic_cast<const AlignmentError*>(&e)) return "alignment";
    if (dynamic_cast<const DegenerateInstanceError*>(&e)) return "degenerate-instance";
    if (dynamic_cast<const MetricError*>(&e)) return "metric";
    if (dynamic_cast<const DomainError*>(&e)) return "domain";
    if (dynamic_cast<const ConfigError*>(&e)) return "config";
    return "error";
}

}  // namespace citeeval
