#include "citeeval/model.hpp"

#include "citeeval/errors.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace citeeval {

std::string_view to_string(ContextLabel label) {
    switch (label) {
        case ContextLabel::Query: return "query";
        case ContextLabel::Retrieval: return "retrieval";
        case ContextLabel::Response: return "response";
        case ContextLabel::Parametric: return "parametric";
    }
    return "unknown";
}

std::optional<ContextLabel> context_from_int(int value) {
    if (value < 1 || value > 4) return std::nullopt;
    return static_cast<ContextLabel>(value);
}

bool reason_allowed(ActionOp op, ActionReason reason) {
    switch (reason) {
        case ActionReason::Misleading:
        case ActionReason::Substandard:
        case ActionReason::Redundant: return op == ActionOp::Delete;
        case ActionReason::Evidence:
        case ActionReason::Refinement:
        case ActionReason::Credibility: return op == ActionOp::Add;
    }
    return false;
}

EditAction make_action(ActionOp op, int citation, ActionReason reason) {
    if (!reason_allowed(op, reason)) {
        throw DomainError("reason '" + std::string(to_string(reason)) + "' is not valid for " +
                          std::string(to_string(op)));
    }
    if (citation < 0 || (op == ActionOp::Delete && citation == 0)) {
        throw DomainError("invalid citation id " + std::to_string(citation) + " for " +
                          std::string(to_string(op)));
    }
    return EditAction{op, citation, reason};
}

std::string_view to_string(ActionOp op) { return op == ActionOp::Delete ? "delete" : "add"; }

std::string_view to_string(ActionReason reason) {
    switch (reason) {
        case ActionReason::Misleading: return "misleading";
        case ActionReason::Substandard: return "substandard";
        case ActionReason::Redundant: return "redundant";
        case ActionReason::Evidence: return "evidence";
        case ActionReason::Refinement: return "refinement";
        case ActionReason::Credibility: return "credibility";
    }
    return "unknown";
}

namespace {

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

}  // namespace

std::optional<ActionOp> action_op_from_string(std::string_view s) {
    const auto l = lower(s);
    if (l == "delete") return ActionOp::Delete;
    if (l == "add") return ActionOp::Add;
    return std::nullopt;
}

std::optional<ActionReason> action_reason_from_string(std::string_view s) {
    static constexpr std::array all = {ActionReason::Misleading, ActionReason::Substandard,
                                       ActionReason::Redundant,  ActionReason::Evidence,
                                       ActionReason::Refinement, ActionReason::Credibility};
    const auto l = lower(s);
    for (auto r : all) {
        if (to_string(r) == l) return r;
    }
    return std::nullopt;
}

std::string_view to_string(Scenario s) { return s == Scenario::Full ? "full" : "cited"; }

double normalize_rating(int likert) {
    if (likert < 1 || likert > 5) {
        throw DomainError("likert rating out of range [1,5]: " + std::to_string(likert));
    }
    return (likert - 1) / 4.0;
}

double normalize_score(double likert) {
    if (!(likert >= 1.0 && likert <= 5.0)) {
        throw DomainError("score out of range [1,5]: " + std::to_string(likert));
    }
    return (likert - 1.0) / 4.0;
}

std::vector<StatementRating> mask_for_scenario(std::span<const StatementRating> ratings,
                                               std::span<const Statement> statements,
                                               std::span<const ContextLabel> contexts,
                                               Scenario scenario) {
    if (ratings.size() != contexts.size() || ratings.size() != statements.size()) {
        throw AlignmentError("mask_for_scenario: " + std::to_string(ratings.size()) + " ratings, " +
                             std::to_string(statements.size()) + " statements, " +
                             std::to_string(contexts.size()) + " contexts");
    }
    std::vector<StatementRating> out(ratings.begin(), ratings.end());
    for (std::size_t i = 0; i < out.size(); ++i) {
        auto& r = out[i];
        r.applicable_full = applicable(contexts[i]);
        r.applicable_cited = r.applicable_full && !statements[i].citations.empty();
        if (!applicable_in(r, scenario)) r.normalized.reset();
    }
    return out;
}

bool applicable_in(const StatementRating& rating, Scenario scenario) {
    return scenario == Scenario::Full ? rating.applicable_full : rating.applicable_cited;
}

std::optional<double> aggregate_response(std::span<const StatementRating> ratings, Scenario scenario) {
    std::vector<double> values;
    for (const auto& r : ratings) {
        if (applicable_in(r, scenario) && r.normalized) values.push_back(*r.normalized);
    }
    if (values.empty()) return std::nullopt;
    // Sorted running mean: independent of statement order, exact for constant input.
    std::sort(values.begin(), values.end());
    double mean = 0.0;
    for (std::size_t k = 0; k < values.size(); ++k) {
        mean += (values[k] - mean) / static_cast<double>(k + 1);
    }
    return mean;
}

ResponseStats response_stats(const EvalInstance& instance) {
    if (instance.statements.empty()) {
        throw DegenerateInstanceError("instance '" + instance.instance_id + "' has no statements");
    }
    const auto uncited = std::count_if(instance.statements.begin(), instance.statements.end(),
                                       [](const Statement& s) { return s.citations.empty(); });
    ResponseStats stats;
    stats.length = static_cast<int>(instance.statements.size());
    stats.missing_ratio = static_cast<double>(uncited) / stats.length;
    return stats;
}

}  // namespace citeeval
