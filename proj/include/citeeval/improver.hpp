#pragma once

#include "citeeval/model.hpp"
#include "citeeval/rating.hpp"

#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace citeeval {

struct ExecutionResult {
    std::set<int> citations;
    bool parametric_flag = false;
    std::vector<std::string> warnings;
};

// Deletes first, then Adds. Absent deletes and out-of-range adds are dropped
// with a warning; Add of 0 only raises the parametric flag.
ExecutionResult execute_actions(const std::set<int>& citations, std::span<const EditAction> actions, int max_id);

struct ImproveIteration {
    std::vector<std::set<int>> citations;
    std::vector<std::vector<EditAction>> actions;
    std::vector<bool> parametric;
    ScenarioScores itercoe;
    ScenarioScores editdist;
    ScenarioScores ensemble;
    std::vector<std::string> warnings;

    bool operator==(const ImproveIteration&) const = default;
    const ScenarioScores& scores(RatingMethod m) const;
};

struct ImproveTrace {
    std::string instance_id;
    std::vector<ImproveIteration> iterations;  // state 0 is the input
    std::optional<int> converged_at;
    std::optional<std::string> error_kind;  // set when a stage aborted the loop
    std::optional<std::string> error_message;

    bool operator==(const ImproveTrace&) const = default;
    bool failed() const { return error_kind.has_value(); }
};

inline constexpr int kDefaultMaxIters = 5;

// Copy of `instance` with statement `i` carrying citations[i], brackets rewritten.
EvalInstance with_citations(const EvalInstance& instance, std::span<const std::set<int>> citations);

// Rates, executes the proposed edits, and re-rates up to `max_iters` times.
// Context labels are computed once. Stops early when no citation set changes;
// on a stage failure the trace keeps the states recorded so far.
ImproveTrace improve_iteratively(const EvalInstance& instance, int max_iters, Evaluator& evaluator);

// Same loop with precomputed labels.
ImproveTrace improve_with_labels(const EvalInstance& instance, std::span<const ContextLabel> labels, int max_iters,
                                 Evaluator& evaluator);

// One JSON object per iteration, each tagged with the instance id and step.
std::vector<std::string> trace_to_records(const ImproveTrace& trace);
ImproveTrace trace_from_records(std::span<const std::string> lines);

}  // namespace citeeval
