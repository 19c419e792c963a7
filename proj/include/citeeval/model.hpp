#pragma once

#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace citeeval {

struct Passage {
    int id = 0;  // 1-based citation index
    std::string title;
    std::string text;

    bool operator==(const Passage&) const = default;
};

struct Statement {
    int index = 0;  // 1-based position in the response
    std::string text_with_citations;
    std::string text_clean;
    std::set<int> citations;

    bool operator==(const Statement&) const = default;
};

enum class ContextLabel { Query = 1, Retrieval = 2, Response = 3, Parametric = 4 };

std::string_view to_string(ContextLabel label);
std::optional<ContextLabel> context_from_int(int value);

inline bool applicable(ContextLabel label) { return label == ContextLabel::Retrieval; }

enum class ActionOp { Delete, Add };

enum class ActionReason { Misleading, Substandard, Redundant, Evidence, Refinement, Credibility };

struct EditAction {
    ActionOp op = ActionOp::Delete;
    int citation = 0;  // 0 only for Add: claim backed by parametric knowledge
    ActionReason reason = ActionReason::Misleading;

    bool operator==(const EditAction&) const = default;
};

bool reason_allowed(ActionOp op, ActionReason reason);
// Throws DomainError when the reason belongs to the other op or an Add-only id
// is used with Delete.
EditAction make_action(ActionOp op, int citation, ActionReason reason);

std::string_view to_string(ActionOp op);
std::string_view to_string(ActionReason reason);
std::optional<ActionOp> action_op_from_string(std::string_view s);
std::optional<ActionReason> action_reason_from_string(std::string_view s);

struct StatementRating {
    int statement_index = 0;
    std::vector<EditAction> actions;
    std::optional<int> likert;
    std::optional<double> normalized;
    bool applicable_full = false;
    bool applicable_cited = false;

    bool operator==(const StatementRating&) const = default;
};

enum class Scenario { Full, Cited };

std::string_view to_string(Scenario s);

struct HumanAnnotation {
    std::vector<ContextLabel> contexts;
    std::vector<std::optional<double>> likert;
    std::vector<std::vector<EditAction>> edits;

    bool operator==(const HumanAnnotation&) const = default;
};

struct EvalInstance {
    std::string instance_id;
    std::string query;
    std::vector<Passage> passages;
    std::string response_raw;
    std::vector<Statement> statements;
    std::optional<HumanAnnotation> human;
    // Free-form provenance carried through to reports (generator model, source dataset).
    std::string model;
    std::string dataset;

    bool operator==(const EvalInstance&) const = default;

    int max_citation_id() const { return static_cast<int>(passages.size()); }
};

// Maps a 1-5 Likert rating affinely onto [0,1].
double normalize_rating(int likert);
// Real-valued counterpart used for calibrated and averaged ratings; input must lie in [1,5].
double normalize_score(double likert);

// Sets both applicability flags from context and citations and blanks the
// normalized score of every entry that is N/A under `scenario`.
std::vector<StatementRating> mask_for_scenario(std::span<const StatementRating> ratings,
                                               std::span<const Statement> statements,
                                               std::span<const ContextLabel> contexts,
                                               Scenario scenario);

bool applicable_in(const StatementRating& rating, Scenario scenario);

// Mean of normalized scores over applicable statements; nullopt when none are.
std::optional<double> aggregate_response(std::span<const StatementRating> ratings, Scenario scenario);

struct ResponseStats {
    int length = 0;
    double missing_ratio = 0.0;
};

ResponseStats response_stats(const EvalInstance& instance);

}  // namespace citeeval
