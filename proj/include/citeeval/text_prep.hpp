#pragma once

#include "citeeval/model.hpp"

#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace citeeval::text {

struct SegmenterConfig {
    // Tokens that end in a period but never close a statement. Matched
    // case-insensitively against the whitespace-delimited word.
    std::set<std::string> abbreviations;
    // Statements shorter than this are merged into their predecessor.
    int min_statement_chars = 1;

    static SegmenterConfig defaults();
};

// Citations outside [1, max_id] seen while extracting.
struct CitationDiagnostics {
    int dropped_out_of_range = 0;
};

// Removes every <thinking>...</thinking> span; an unmatched opener removes
// everything after it. Result is trimmed.
std::string strip_thinking(std::string_view response_raw);

// Collapses runs of whitespace to one space and trims both ends.
std::string normalize_whitespace(std::string_view text);

std::vector<std::string> segment_statements(std::string_view response, const SegmenterConfig& cfg);

std::set<int> extract_citations(std::string_view statement, int max_id,
                                CitationDiagnostics* diagnostics = nullptr);

std::string strip_citations(std::string_view statement);

// Replaces the statement's citation brackets with the sorted `citations`
// placed before the final punctuation, e.g. "Text [1][7]."
std::string rewrite_citations(std::string_view statement, const std::set<int>& citations);

// strip_thinking -> segment -> extract/strip for every statement.
std::vector<Statement> build_statements(std::string_view response_raw, int max_id,
                                        const SegmenterConfig& cfg,
                                        CitationDiagnostics* diagnostics = nullptr);

}  // namespace citeeval::text
