#pragma once

#include "citeeval/gateway.hpp"
#include "citeeval/model.hpp"

#include <array>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace citeeval {

// Feature slots of the edit-distance model. Keep counts citations no action touched.
enum class ActionKind {
    DeleteMisleading,
    DeleteSubstandard,
    DeleteRedundant,
    AddEvidence,
    AddRefinement,
    AddCredibility,
    Keep
};

inline constexpr std::size_t kActionKinds = 7;

std::string_view to_string(ActionKind kind);
std::optional<ActionKind> action_kind_from_string(std::string_view name);

// Add of citation 0 always lands in AddEvidence.
ActionKind kind_of(const EditAction& action);

struct ActionFeatureVector {
    std::array<double, kActionKinds> freq{};
    bool parametric_flag = false;  // some Add targeted citation 0

    double operator[](ActionKind k) const { return freq[static_cast<std::size_t>(k)]; }
};

// |original| minus the distinct Delete targets that were in `original`.
int kept_citation_count(const std::set<int>& original, std::span<const EditAction> actions);

ActionFeatureVector action_features(std::span<const EditAction> actions, int kept_citations);

struct EditDistModel {
    static constexpr double kMinRating = 1.0;
    static constexpr double kMaxRating = 5.0;

    std::array<double, kActionKinds> distance{};
    double bias = 0.0;

    double raw(const ActionFeatureVector& features) const;
};

// Linear score, clamped to the Likert range, then normalized to [0,1].
double rate_editdist(const ActionFeatureVector& features, const EditDistModel& model);

struct EnsembleModel {
    double lambda = 0.5;

    static EnsembleModel make(double lambda);
};

// lambda * itercoe + (1 - lambda) * editdist. Both inputs must share the N/A mask.
std::optional<double> rate_ensemble(std::optional<double> itercoe, std::optional<double> editdist,
                                    const EnsembleModel& ensemble);

struct StatementJudgement {
    bool has_editing = false;
    std::vector<EditAction> actions;
    std::optional<int> likert;
};

// Per-statement edits and ratings from <editing>/<rating> blocks. Missing
// blocks leave the slot empty; ratings outside 1-5 are a ParseError.
std::vector<StatementJudgement> parse_editing_output(std::string_view text, int num_statements);

// One editing+rating call for the whole response. Non-Retrieval statements
// are N/A whatever the judge said; a missing rating for an applicable
// statement is retried once, then raises RatingIncompleteError.
std::vector<StatementRating> rate_itercoe(const EvalInstance& instance, std::span<const ContextLabel> labels,
                                          Gateway& gateway, const JudgeConfig& judge);

struct RatingModels {
    std::optional<EditDistModel> editdist;
    std::optional<EnsembleModel> ensemble;
};

struct Evaluator {
    Gateway& gateway;
    JudgeConfig judge;
    RatingModels models;
};

struct StatementEvaluation {
    int index = 0;
    ContextLabel context = ContextLabel::Retrieval;
    std::set<int> citations;
    std::vector<EditAction> actions;
    ActionFeatureVector features;
    std::optional<int> likert;
    std::optional<double> itercoe;
    std::optional<double> editdist;
    std::optional<double> ensemble;
    bool applicable_full = false;
    bool applicable_cited = false;
};

struct ScenarioScores {
    std::optional<double> full;
    std::optional<double> cited;

    std::optional<double> get(Scenario s) const { return s == Scenario::Full ? full : cited; }

    bool operator==(const ScenarioScores&) const = default;
};

enum class RatingMethod { IterCoE, EditDist, Ensemble };

std::string_view to_string(RatingMethod m);

struct InstanceEvaluation {
    std::string instance_id;
    std::vector<StatementEvaluation> statements;
    ScenarioScores itercoe;
    ScenarioScores editdist;
    ScenarioScores ensemble;
    ResponseStats stats;
    std::vector<std::string> warnings;

    const ScenarioScores& scores(RatingMethod m) const;
    // Per-statement score of one method, N/A entries as nullopt.
    std::vector<std::optional<double>> statement_scores(RatingMethod m, Scenario s) const;
};

// attribute -> IterCoE -> EditDist features -> ensemble -> mask -> mean pool.
// Stage failures are rethrown as InstanceError carrying the instance id.
InstanceEvaluation evaluate_instance(const EvalInstance& instance, Evaluator& evaluator);

// Same composition with precomputed context labels.
InstanceEvaluation evaluate_with_labels(const EvalInstance& instance, std::span<const ContextLabel> labels,
                                        Evaluator& evaluator);

// Short machine-readable name for an exception type ("parse", "transport", ...).
std::string error_kind(const std::exception& e);

}  // namespace citeeval
