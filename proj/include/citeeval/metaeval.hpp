#pragma once

#include "citeeval/model.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace citeeval::stats {

// Sample Pearson correlation. Requires n >= 2 and non-constant inputs.
double pearson(std::span<const double> x, std::span<const double> y);

// Average ranks (1-based), ties share the mean of their positions.
std::vector<double> midranks(std::span<const double> v);

double spearman(std::span<const double> x, std::span<const double> y);

// Kendall tau-b, O(n log n).
double kendall_tau(std::span<const double> x, std::span<const double> y);

enum class AlphaLevel { Nominal, Interval };

// ratings[rater][item]; nullopt marks a missing judgement.
double krippendorff_alpha(const std::vector<std::vector<std::optional<double>>>& ratings, AlphaLevel level);

enum class MetaLevel { Statement, Response };

std::string_view to_string(MetaLevel level);

struct CorrelationTable {
    std::string metric;
    MetaLevel level = MetaLevel::Statement;
    Scenario scenario = Scenario::Full;
    double pearson = 0.0;
    double spearman = 0.0;
    double kendall = 0.0;
    int pairs = 0;
    int mask_disagreements = 0;  // exactly one side was N/A
};

// Correlates aligned metric and human scores over entries where both are
// present. Statement-level input pools every statement of every response.
CorrelationTable meta_evaluate(std::span<const std::optional<double>> metric,
                               std::span<const std::optional<double>> human, MetaLevel level, Scenario scenario,
                               std::string metric_name = {});

std::string format_tables_tsv(std::span<const CorrelationTable> tables);
std::string format_tables_jsonl(std::span<const CorrelationTable> tables);

}  // namespace citeeval::stats
