#include "citeeval/records.hpp"

#include "citeeval/errors.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_set>

namespace citeeval::io {

using nlohmann::json;

namespace {

std::string idx(std::string_view field, std::size_t i) { return std::string(field) + "[" + std::to_string(i) + "]"; }

std::vector<EditAction> parse_action_list(const json& list, const std::string& field, std::vector<std::string>& problems) {
    std::vector<EditAction> out;
    if (!list.is_array()) {
        problems.push_back(field + ": expected a list of actions");
        return out;
    }
    for (std::size_t k = 0; k < list.size(); ++k) {
        try {
            out.push_back(action_from_json(list[k]));
        } catch (const Error& e) {
            problems.push_back(idx(field, k) + ": " + e.what());
        }
    }
    return out;
}

// Edits are either one list per statement or a flat list whose entries name
// their 1-based "statement".
std::vector<std::vector<EditAction>> parse_edits(const json& edits, std::size_t n, const std::string& field,
                                                 std::vector<std::string>& problems) {
    std::vector<std::vector<EditAction>> out(n);
    if (edits.is_null()) return out;
    if (!edits.is_array()) {
        problems.push_back(field + ": expected a list");
        return out;
    }
    const bool flat = std::any_of(edits.begin(), edits.end(), [](const json& e) { return e.is_object(); });
    if (flat) {
        for (std::size_t k = 0; k < edits.size(); ++k) {
            const auto& e = edits[k];
            if (!e.is_object() || !e.contains("statement") || !e["statement"].is_number_integer()) {
                problems.push_back(idx(field, k) + ": flat edit needs an integer 'statement'");
                continue;
            }
            const auto s = e["statement"].get<long long>();
            if (s < 1 || static_cast<std::size_t>(s) > n) {
                problems.push_back(idx(field, k) + ": statement " + std::to_string(s) + " out of range");
                continue;
            }
            try {
                out[static_cast<std::size_t>(s - 1)].push_back(action_from_json(e));
            } catch (const Error& ex) {
                problems.push_back(idx(field, k) + ": " + ex.what());
            }
        }
        return out;
    }
    if (edits.size() != n) {
        problems.push_back(field + ": " + std::to_string(edits.size()) + " entries for " + std::to_string(n) +
                           " statements");
        return out;
    }
    for (std::size_t i = 0; i < n; ++i) out[i] = parse_action_list(edits[i], idx(field, i), problems);
    return out;
}

HumanPass parse_pass(const json& j, std::size_t n, const std::string& field, std::vector<std::string>& problems) {
    HumanPass pass;
    pass.contexts.assign(n, std::nullopt);
    pass.ratings.assign(n, std::nullopt);
    if (!j.is_object()) {
        problems.push_back(field + ": expected an object");
        return pass;
    }
    const auto contexts = j.value("contexts", json());
    if (!contexts.is_array() || contexts.size() != n) {
        problems.push_back(field + ".contexts: expected " + std::to_string(n) + " entries");
    } else {
        for (std::size_t i = 0; i < n; ++i) {
            const auto& c = contexts[i];
            if (c.is_null()) continue;
            if (!c.is_number_integer() || !context_from_int(c.get<int>())) {
                problems.push_back(idx(field + ".contexts", i) + ": expected 1-4 or null");
                continue;
            }
            pass.contexts[i] = c.get<int>();
        }
    }
    const auto ratings = j.value("ratings", json());
    if (!ratings.is_null()) {
        if (!ratings.is_array() || ratings.size() != n) {
            problems.push_back(field + ".ratings: expected " + std::to_string(n) + " entries");
        } else {
            for (std::size_t i = 0; i < n; ++i) {
                const auto& r = ratings[i];
                if (r.is_null()) continue;
                if (!r.is_number() || r.get<double>() < 1.0 || r.get<double>() > 5.0) {
                    problems.push_back(idx(field + ".ratings", i) + ": expected a rating in [1,5] or null");
                    continue;
                }
                pass.ratings[i] = r.get<double>();
            }
        }
    }
    pass.edits = parse_edits(j.value("edits", json()), n, field + ".edits", problems);
    return pass;
}

std::optional<HumanAnnotation> parse_human(const json& h, std::size_t n, std::vector<std::string>& problems) {
    if (h.is_null()) return std::nullopt;
    if (!h.is_object()) {
        problems.push_back("human: expected an object");
        return std::nullopt;
    }
    std::vector<HumanPass> passes;
    if (h.contains("passes")) {
        const auto& list = h["passes"];
        if (!list.is_array() || list.empty()) {
            problems.push_back("human.passes: expected a non-empty list");
            return std::nullopt;
        }
        for (std::size_t p = 0; p < list.size(); ++p) {
            passes.push_back(parse_pass(list[p], n, idx("human.passes", p), problems));
        }
    } else {
        passes.push_back(parse_pass(h, n, "human", problems));
    }
    const auto before = problems.size();
    auto ann = aggregate_passes(passes, n, problems);
    if (problems.size() != before) return std::nullopt;
    return ann;
}

}  // namespace

HumanAnnotation aggregate_passes(std::span<const HumanPass> passes, std::size_t n, std::vector<std::string>& problems) {
    HumanAnnotation ann;
    ann.contexts.assign(n, ContextLabel::Retrieval);
    ann.likert.assign(n, std::nullopt);
    ann.edits.assign(n, {});
    for (std::size_t i = 0; i < n; ++i) {
        std::map<int, int> votes;
        std::optional<int> first;
        for (const auto& p : passes) {
            if (i >= p.contexts.size() || !p.contexts[i]) continue;
            ++votes[*p.contexts[i]];
            if (!first) first = *p.contexts[i];
        }
        if (votes.empty()) {
            problems.push_back(idx("human.contexts", i) + ": no pass labeled this statement");
            continue;
        }
        int best = 0;
        for (const auto& [label, count] : votes) best = std::max(best, count);
        int chosen = 0;
        if (votes[static_cast<int>(ContextLabel::Retrieval)] == best) {
            chosen = static_cast<int>(ContextLabel::Retrieval);
        } else {
            for (const auto& p : passes) {
                if (i < p.contexts.size() && p.contexts[i] && votes[*p.contexts[i]] == best) {
                    chosen = *p.contexts[i];
                    break;
                }
            }
        }
        ann.contexts[i] = *context_from_int(chosen);

        double sum = 0.0;
        int count = 0;
        bool edits_taken = false;
        for (const auto& p : passes) {
            const bool retrieval = i < p.contexts.size() && p.contexts[i] == static_cast<int>(ContextLabel::Retrieval);
            if (!retrieval) {
                if (i < p.ratings.size() && p.ratings[i]) {
                    problems.push_back(idx("human.ratings", i) + ": rated although not labeled retrieval");
                }
                continue;
            }
            if (i < p.ratings.size() && p.ratings[i]) {
                sum += *p.ratings[i];
                ++count;
            }
            if (!edits_taken && i < p.edits.size()) {
                ann.edits[i] = p.edits[i];
                edits_taken = true;
            }
        }
        if (ann.contexts[i] == ContextLabel::Retrieval) {
            if (count == 0) {
                problems.push_back(idx("human.ratings", i) + ": retrieval statement has no rating");
            } else {
                ann.likert[i] = sum / count;
            }
        } else {
            ann.edits[i].clear();
        }
    }
    return ann;
}

EvalInstance parse_record(const json& record, const text::SegmenterConfig& cfg) {
    std::vector<std::string> problems;
    if (!record.is_object()) throw IngestionError("record is not a JSON object");

    auto required_string = [&](const char* key) -> std::string {
        if (!record.contains(key)) {
            problems.push_back(std::string("missing field '") + key + "'");
            return {};
        }
        if (!record[key].is_string()) {
            problems.push_back(std::string("field '") + key + "' must be a string");
            return {};
        }
        return record[key].get<std::string>();
    };

    EvalInstance inst;
    inst.instance_id = required_string("instance_id");
    if (record.contains("instance_id") && record["instance_id"].is_string() && inst.instance_id.empty()) {
        problems.push_back("field 'instance_id' is empty");
    }
    inst.query = required_string("query");
    inst.response_raw = required_string("response");
    for (const char* key : {"model", "dataset"}) {
        if (!record.contains(key) || record[key].is_null()) continue;
        if (!record[key].is_string()) {
            problems.push_back(std::string("field '") + key + "' must be a string");
            continue;
        }
        (std::string_view(key) == "model" ? inst.model : inst.dataset) = record[key].get<std::string>();
    }

    if (!record.contains("passages")) {
        problems.push_back("missing field 'passages'");
    } else if (!record["passages"].is_array() || record["passages"].empty()) {
        problems.push_back("field 'passages' must be a non-empty list");
    } else {
        const auto& ps = record["passages"];
        for (std::size_t k = 0; k < ps.size(); ++k) {
            const auto& p = ps[k];
            const auto field = idx("passages", k);
            if (!p.is_object()) {
                problems.push_back(field + ": expected an object");
                continue;
            }
            Passage passage;
            if (!p.contains("id") || !p["id"].is_number_integer()) {
                problems.push_back(field + ".id: expected an integer");
            } else if (p["id"].get<long long>() != static_cast<long long>(k + 1)) {
                problems.push_back(field + ".id: passages must be numbered 1..N in order");
            } else {
                passage.id = static_cast<int>(k + 1);
            }
            if (!p.contains("text") || !p["text"].is_string()) {
                problems.push_back(field + ".text: expected a string");
            } else {
                passage.text = p["text"].get<std::string>();
            }
            if (p.contains("title") && !p["title"].is_null()) {
                if (!p["title"].is_string()) {
                    problems.push_back(field + ".title: expected a string");
                } else {
                    passage.title = p["title"].get<std::string>();
                }
            }
            inst.passages.push_back(std::move(passage));
        }
    }

    if (problems.empty()) {
        inst.statements = text::build_statements(inst.response_raw, inst.max_citation_id(), cfg);
        if (record.contains("human")) inst.human = parse_human(record["human"], inst.statements.size(), problems);
    }

    if (!problems.empty()) {
        std::string msg = "invalid record";
        if (!inst.instance_id.empty()) msg += " '" + inst.instance_id + "'";
        msg += ": ";
        for (std::size_t i = 0; i < problems.size(); ++i) msg += (i ? "; " : "") + problems[i];
        throw IngestionError(msg);
    }
    return inst;
}

std::vector<IngestedRecord> ingest_records(std::istream& in, const text::SegmenterConfig& cfg) {
    std::vector<IngestedRecord> out;
    std::vector<std::string> errors;
    std::unordered_set<std::string> seen;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            auto raw = json::parse(line);
            auto inst = parse_record(raw, cfg);
            if (!seen.insert(inst.instance_id).second) {
                throw IngestionError("duplicate instance_id '" + inst.instance_id + "'");
            }
            out.push_back({lineno, std::move(inst), std::move(raw)});
        } catch (const json::parse_error& e) {
            errors.push_back("line " + std::to_string(lineno) + ": malformed JSON (" + e.what() + ")");
        } catch (const Error& e) {
            errors.push_back("line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    if (!errors.empty()) {
        std::string msg = std::to_string(errors.size()) + " invalid record(s)";
        for (const auto& e : errors) msg += "\n  " + e;
        throw IngestionError(msg);
    }
    return out;
}

std::vector<EvalInstance> ingest_stream(std::istream& in, const text::SegmenterConfig& cfg) {
    std::vector<EvalInstance> out;
    for (auto& r : ingest_records(in, cfg)) out.push_back(std::move(r.instance));
    return out;
}

std::vector<EvalInstance> ingest(const std::filesystem::path& path, const text::SegmenterConfig& cfg) {
    std::ifstream in(path);
    if (!in) throw IngestionError("cannot open input file " + path.string());
    return ingest_stream(in, cfg);
}

json action_to_json(const EditAction& a) {
    return {{"op", std::string(to_string(a.op))}, {"citation", a.citation}, {"reason", std::string(to_string(a.reason))}};
}

EditAction action_from_json(const json& j) {
    if (!j.is_object()) throw DomainError("action must be an object");
    const auto op = j.contains("op") && j["op"].is_string() ? action_op_from_string(j["op"].get<std::string>())
                                                          : std::nullopt;
    const auto reason = j.contains("reason") && j["reason"].is_string()
                            ? action_reason_from_string(j["reason"].get<std::string>())
                            : std::nullopt;
    if (!op) throw DomainError("action 'op' must be delete or add");
    if (!reason) throw DomainError("action 'reason' is not a known reason");
    if (!j.contains("citation") || !j["citation"].is_number_integer()) {
        throw DomainError("action 'citation' must be an integer");
    }
    return make_action(*op, j["citation"].get<int>(), *reason);
}

json instance_to_json(const EvalInstance& inst) {
    json passages = json::array();
    for (const auto& p : inst.passages) passages.push_back({{"id", p.id}, {"title", p.title}, {"text", p.text}});
    json j = {{"instance_id", inst.instance_id}, {"query", inst.query}, {"passages", passages},
              {"response", inst.response_raw}};
    if (!inst.model.empty()) j["model"] = inst.model;
    if (!inst.dataset.empty()) j["dataset"] = inst.dataset;
    if (inst.human) {
        json contexts = json::array();
        json ratings = json::array();
        json edits = json::array();
        for (auto c : inst.human->contexts) contexts.push_back(static_cast<int>(c));
        for (const auto& r : inst.human->likert) ratings.push_back(r ? json(*r) : json(nullptr));
        for (const auto& per : inst.human->edits) {
            json list = json::array();
            for (const auto& a : per) list.push_back(action_to_json(a));
            edits.push_back(std::move(list));
        }
        j["human"] = {{"contexts", contexts}, {"ratings", ratings}, {"edits", edits}};
    }
    return j;
}

std::string serialize_instance(const EvalInstance& instance) { return instance_to_json(instance).dump(); }

std::vector<std::string> read_lines(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IngestionError("cannot open " + path.string());
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") != std::string::npos) lines.push_back(line);
    }
    return lines;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IngestionError("cannot open " + path.string());
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

}  // namespace citeeval::io
