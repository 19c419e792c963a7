#pragma once

#include "citeeval/gateway.hpp"
#include "citeeval/model.hpp"

#include <span>
#include <string_view>
#include <vector>

namespace citeeval {

// Labels from <category sentence_id="i"> blocks, one per statement. Throws
// AttributionIncompleteError when a sentence id is missing and ParseError on a
// category outside 1-4.
std::vector<ContextLabel> parse_attribution_output(std::string_view text, int num_statements);

// One whole-response attribution call. An incomplete answer is retried once
// with the cache bypassed before the error propagates.
std::vector<ContextLabel> attribute_contexts(const EvalInstance& instance, Gateway& gateway,
                                             const JudgeConfig& judge);

std::vector<bool> applicability(std::span<const ContextLabel> labels);

struct ClassScores {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

struct AttributionConfusion {
    // Counts after collapsing Query/Response/Parametric into NotApplicable.
    int applicable_as_applicable = 0;
    int applicable_as_not = 0;
    int not_as_applicable = 0;
    int not_as_not = 0;
    ClassScores applicable;
    ClassScores not_applicable;
    ClassScores macro;

    int total() const { return applicable_as_applicable + applicable_as_not + not_as_applicable + not_as_not; }
};

AttributionConfusion attribution_confusion(std::span<const ContextLabel> pred, std::span<const ContextLabel> gold);

}  // namespace citeeval
