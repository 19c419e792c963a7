#pragma once

#include "citeeval/model.hpp"
#include "citeeval/text_prep.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace citeeval::io {

// One annotator pass over a response. Null context = the pass abstained.
struct HumanPass {
    std::vector<std::optional<int>> contexts;
    std::vector<std::optional<double>> ratings;
    std::vector<std::vector<EditAction>> edits;
};

// Majority context per statement (ties prefer Retrieval, then the earliest
// pass); ratings averaged over passes that chose Retrieval; edits taken from
// the first such pass. Problems are reported as "field: message" strings.
HumanAnnotation aggregate_passes(std::span<const HumanPass> passes, std::size_t num_statements,
                                 std::vector<std::string>& problems);

// Validates one record object and derives its statements. Throws
// IngestionError naming every offending field.
EvalInstance parse_record(const nlohmann::json& record, const text::SegmenterConfig& cfg);

struct IngestedRecord {
    int line = 0;
    EvalInstance instance;
    nlohmann::json raw;  // the record as read, including fields the pipeline ignores
};

std::vector<IngestedRecord> ingest_records(std::istream& in,
                                           const text::SegmenterConfig& cfg = text::SegmenterConfig::defaults());

// Every line is parsed; all failures are reported together with line numbers.
std::vector<EvalInstance> ingest_stream(std::istream& in, const text::SegmenterConfig& cfg = text::SegmenterConfig::defaults());
std::vector<EvalInstance> ingest(const std::filesystem::path& path,
                                 const text::SegmenterConfig& cfg = text::SegmenterConfig::defaults());

nlohmann::json instance_to_json(const EvalInstance& instance);
std::string serialize_instance(const EvalInstance& instance);

nlohmann::json action_to_json(const EditAction& action);
EditAction action_from_json(const nlohmann::json& j);

// Reads non-empty lines of a JSONL file.
std::vector<std::string> read_lines(const std::filesystem::path& path);
std::string read_file(const std::filesystem::path& path);

}  // namespace citeeval::io
