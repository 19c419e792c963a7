#include "citeeval/attribution.hpp"

#include "citeeval/errors.hpp"

#include <cctype>

namespace citeeval {

namespace {

// Leading integer of a block body such as "2", "2 (Retrieval)" or " 4. ".
std::optional<int> leading_int(std::string_view body) {
    std::size_t i = 0;
    while (i < body.size() && std::isspace(static_cast<unsigned char>(body[i]))) ++i;
    const auto begin = i;
    while (i < body.size() && std::isdigit(static_cast<unsigned char>(body[i])) && i - begin < 6) ++i;
    if (i == begin) return std::nullopt;
    return std::stoi(std::string(body.substr(begin, i - begin)));
}

// Precision/recall with the convention that a class absent from both
// predictions and gold scores 1, and an empty denominator otherwise scores 0.
ClassScores scores(int tp, int fp, int fn) {
    ClassScores s;
    if (tp + fp == 0) {
        s.precision = (fn == 0) ? 1.0 : 0.0;
    } else {
        s.precision = static_cast<double>(tp) / (tp + fp);
    }
    if (tp + fn == 0) {
        s.recall = (fp == 0) ? 1.0 : 0.0;
    } else {
        s.recall = static_cast<double>(tp) / (tp + fn);
    }
    s.f1 = (s.precision + s.recall == 0.0) ? 0.0 : 2.0 * s.precision * s.recall / (s.precision + s.recall);
    return s;
}

}  // namespace

std::vector<ContextLabel> parse_attribution_output(std::string_view text, int num_statements) {
    const auto blocks = parse_tagged_blocks(text, {"category"});
    std::vector<std::optional<ContextLabel>> labels(static_cast<std::size_t>(std::max(num_statements, 0)));
    for (const auto& block : blocks) {
        const auto id = block.int_attribute("sentence_id");
        if (!id) throw ParseError("<category> block without sentence_id", block.body);
        if (*id < 1 || *id > num_statements) continue;
        const auto value = leading_int(block.body);
        if (!value) throw ParseError("category is not a number", block.body);
        const auto label = context_from_int(*value);
        if (!label) throw ParseError("category out of range 1-4: " + std::to_string(*value), block.body);
        auto& slot = labels[static_cast<std::size_t>(*id - 1)];
        if (!slot) slot = label;
    }
    std::vector<ContextLabel> out;
    out.reserve(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (!labels[i]) {
            throw AttributionIncompleteError("no category for sentence " + std::to_string(i + 1) + " of " +
                                             std::to_string(num_statements));
        }
        out.push_back(*labels[i]);
    }
    return out;
}

std::vector<ContextLabel> attribute_contexts(const EvalInstance& instance, Gateway& gateway,
                                             const JudgeConfig& judge) {
    if (instance.statements.empty()) {
        throw DegenerateInstanceError("instance '" + instance.instance_id + "' has no statements");
    }
    const auto request = judge.request(attribution_prompt(instance));
    const int n = static_cast<int>(instance.statements.size());
    try {
        return parse_attribution_output(gateway.complete(request).text, n);
    } catch (const AttributionIncompleteError&) {
        return parse_attribution_output(gateway.complete(request, {.refresh = true}).text, n);
    }
}

std::vector<bool> applicability(std::span<const ContextLabel> labels) {
    std::vector<bool> out;
    out.reserve(labels.size());
    for (auto label : labels) out.push_back(applicable(label));
    return out;
}

AttributionConfusion attribution_confusion(std::span<const ContextLabel> pred, std::span<const ContextLabel> gold) {
    if (pred.size() != gold.size()) {
        throw AlignmentError("attribution_confusion: " + std::to_string(pred.size()) + " predictions vs " +
                             std::to_string(gold.size()) + " gold labels");
    }
    AttributionConfusion c;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const bool p = applicable(pred[i]);
        const bool g = applicable(gold[i]);
        if (g && p) ++c.applicable_as_applicable;
        if (g && !p) ++c.applicable_as_not;
        if (!g && p) ++c.not_as_applicable;
        if (!g && !p) ++c.not_as_not;
    }
    c.applicable = scores(c.applicable_as_applicable, c.not_as_applicable, c.applicable_as_not);
    c.not_applicable = scores(c.not_as_not, c.applicable_as_not, c.not_as_applicable);
    c.macro.precision = (c.applicable.precision + c.not_applicable.precision) / 2.0;
    c.macro.recall = (c.applicable.recall + c.not_applicable.recall) / 2.0;
    c.macro.f1 = (c.applicable.f1 + c.not_applicable.f1) / 2.0;
    return c;
}

}  // namespace citeeval
