#pragma once

#include "citeeval/gateway.hpp"
#include "citeeval/model.hpp"

#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace citeeval {

// Verdict vocabulary a scorer is asked to answer in.
enum class VerdictScheme {
    Binary,     // entails / not_entails
    AttrScore,  // attributable / extrapolatory / contradictory
    Lqac,       // full / partial / none
};

std::vector<std::string> verdict_labels(VerdictScheme scheme);

// Judges whether a premise supports a hypothesis. Returns one label from
// verdict_labels(scheme).
class EntailmentScorer {
public:
    virtual ~EntailmentScorer() = default;
    virtual std::string judge(const std::string& premise, const std::string& hypothesis, VerdictScheme scheme) = 0;
};

// Asks an LLM through the gateway and reads the answer from a <verdict> tag.
class LlmEntailmentScorer : public EntailmentScorer {
public:
    LlmEntailmentScorer(Gateway& gateway, JudgeConfig judge) : gateway_(gateway), judge_(std::move(judge)) {}

    std::string judge(const std::string& premise, const std::string& hypothesis, VerdictScheme scheme) override;

    static std::string prompt(const std::string& premise, const std::string& hypothesis, VerdictScheme scheme);

private:
    Gateway& gateway_;
    JudgeConfig judge_;
};

// Offline token-coverage scorer: the share of the hypothesis' content words
// found in the premise decides the verdict. Deterministic, no model needed.
class LexicalOverlapScorer : public EntailmentScorer {
public:
    std::string judge(const std::string& premise, const std::string& hypothesis, VerdictScheme scheme) override;

    static double coverage(const std::string& premise, const std::string& hypothesis);
};

// Cited passages joined with a newline, in ascending id order.
std::string concat_premise(const std::set<int>& citations, std::span<const Passage> passages);

int autoais_recall(const Statement& statement, std::span<const Passage> passages, EntailmentScorer& scorer);

// Per-citation relevance: a citation counts when it alone entails the
// statement, or when the full set entails and the set without it does not.
// nullopt for an uncited statement.
std::optional<double> autoais_precision(const Statement& statement, std::span<const Passage> passages,
                                        EntailmentScorer& scorer);

// Harmonic mean, 0 when both are 0.
double statement_f1(double recall, double precision);

enum class AttrScoreMode { Strict, Relaxed };

double attrscore_value(const std::string& verdict, AttrScoreMode mode);

// Mean over citations of the per-citation verdict value; 0 when uncited.
double attrscore_rate(const Statement& statement, std::span<const Passage> passages, AttrScoreMode mode,
                      EntailmentScorer& scorer);

struct LqacScore {
    double recall = 0.0;              // none 0, partial 0.5, full 1
    std::optional<double> precision;  // nullopt when uncited
};

double lqac_value(const std::string& verdict);

LqacScore lqac_rate(const Statement& statement, std::span<const Passage> passages, EntailmentScorer& scorer);

enum class BaselineMetric { AutoAis, AttrScoreStrict, AttrScoreRelaxed, Lqac };

std::string_view to_string(BaselineMetric m);
std::optional<BaselineMetric> baseline_from_string(std::string_view name);

struct BaselineStatement {
    int index = 0;
    bool applicable_full = false;
    bool applicable_cited = false;
    // Sub-scores by name ("recall", "precision", "f1" or "score"); absent = N/A.
    std::map<std::string, std::optional<double>> scores;
};

struct BaselineEvaluation {
    std::string instance_id;
    BaselineMetric metric = BaselineMetric::AutoAis;
    std::vector<BaselineStatement> statements;
    // Response-level mean per sub-score and scenario over applicable statements.
    std::map<std::string, std::optional<double>> full;
    std::map<std::string, std::optional<double>> cited;

    // Sub-score used for meta-evaluation: f1 for AutoAIS/LQAC, score for AttrScore.
    std::string primary() const;
};

// Scores every statement and aggregates under the same applicability masks
// as the primary metric. Statements outside Retrieval are not judged.
BaselineEvaluation evaluate_baseline(const EvalInstance& instance, std::span<const ContextLabel> labels,
                                     BaselineMetric metric, EntailmentScorer& scorer);

}  // namespace citeeval
