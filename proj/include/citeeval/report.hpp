#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace citeeval::report {

// One evaluated response.
struct ReportRow {
    std::string model;
    std::string dataset;
    int length = 0;
    double missing_ratio = 0.0;
    std::optional<double> full;
    std::optional<double> cited;
};

struct ModelSummary {
    std::string model;
    int responses = 0;
    std::optional<double> mean_full;
    std::optional<double> mean_cited;
    double mean_length = 0.0;
    double mean_missing = 0.0;
};

// Averages for one (model, dataset) pair.
struct GroupPoint {
    std::string model;
    std::string dataset;
    int responses = 0;
    double mean_length = 0.0;
    double mean_missing = 0.0;
};

struct CorpusReport {
    int responses = 0;
    double mean_length = 0.0;
    double mean_missing = 0.0;
    std::vector<ModelSummary> models;  // sorted by name
    std::vector<GroupPoint> groups;    // sorted by (model, dataset)
    // Pearson of mean |R| and mean M across groups; nullopt when undefined.
    std::optional<double> length_missing_pearson;
    // Percentile bootstrap interval over groups (95%), when at least 3 groups.
    std::optional<std::pair<double, double>> pearson_ci;
};

CorpusReport corpus_report(std::span<const ReportRow> rows, std::uint64_t seed = 0, int bootstrap_samples = 1000);

std::string format_report(const CorpusReport& report);
std::string report_to_json(const CorpusReport& report);

}  // namespace citeeval::report
