#include "citeeval/baselines.hpp"

#include "citeeval/errors.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>
#include <unordered_set>

namespace citeeval {

namespace {

std::string lower_trim(std::string_view s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    std::string out(s.substr(b, e - b));
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

std::vector<std::string> content_words(const std::string& text) {
    static const std::unordered_set<std::string> kStop = {
        "the", "and", "for", "are", "was", "were", "that", "this", "with", "from", "its", "has", "have",
        "had", "not", "but", "which", "their", "they", "into", "than", "then", "also", "been", "can"};
    std::vector<std::string> words;
    std::string cur;
    auto flush = [&] {
        if (cur.size() >= 3 && kStop.count(cur) == 0) words.push_back(cur);
        cur.clear();
    };
    for (unsigned char c : text) {
        if (std::isalnum(c)) {
            cur.push_back(static_cast<char>(std::tolower(c)));
        } else {
            flush();
        }
    }
    flush();
    return words;
}

const Passage& passage_by_id(std::span<const Passage> passages, int id) {
    for (const auto& p : passages) {
        if (p.id == id) return p;
    }
    throw DomainError("citation " + std::to_string(id) + " does not name a passage");
}

std::string passage_text(const Passage& p) { return p.title.empty() ? p.text : p.title + "\n" + p.text; }

// Runs a scorer call; anything other than a verdict parse failure becomes a
// MetricError naming the statement.
template <typename Fn>
auto guarded(const Statement& statement, Fn&& fn) {
    try {
        return fn();
    } catch (const ParseError&) {
        throw;
    } catch (const Error& e) {
        throw MetricError("statement " + std::to_string(statement.index) + ": " + e.what());
    }
}

std::string checked_verdict(EntailmentScorer& scorer, const std::string& premise, const std::string& hypothesis,
                            VerdictScheme scheme) {
    auto verdict = lower_trim(scorer.judge(premise, hypothesis, scheme));
    const auto labels = verdict_labels(scheme);
    if (std::find(labels.begin(), labels.end(), verdict) == labels.end()) {
        throw ParseError("unknown verdict label '" + verdict + "'", verdict);
    }
    return verdict;
}

bool entails(EntailmentScorer& scorer, const std::string& premise, const std::string& hypothesis) {
    if (premise.empty()) return false;
    return checked_verdict(scorer, premise, hypothesis, VerdictScheme::Binary) == "entails";
}

}  // namespace

std::vector<std::string> verdict_labels(VerdictScheme scheme) {
    switch (scheme) {
        case VerdictScheme::Binary: return {"entails", "not_entails"};
        case VerdictScheme::AttrScore: return {"attributable", "extrapolatory", "contradictory"};
        case VerdictScheme::Lqac: return {"full", "partial", "none"};
    }
    return {};
}

std::string LlmEntailmentScorer::prompt(const std::string& premise, const std::string& hypothesis,
                                        VerdictScheme scheme) {
    std::ostringstream os;
    os << "You are verifying whether a source passage supports a statement.\n\n";
    switch (scheme) {
        case VerdictScheme::Binary:
            os << "Answer \"entails\" if the statement can be inferred from the premise, otherwise "
                  "\"not_entails\".\n";
            break;
        case VerdictScheme::AttrScore:
            os << "Answer \"attributable\" if the premise fully supports the statement, \"extrapolatory\" if the "
                  "premise is relevant but not sufficient to support it, and \"contradictory\" if the premise "
                  "contradicts or is unrelated to it.\n";
            break;
        case VerdictScheme::Lqac:
            os << "Answer \"full\" if the premise fully supports the statement, \"partial\" if it supports only "
                  "part of it, and \"none\" if it gives no support.\n";
            break;
    }
    os << "\n<premise>\n" << premise << "\n</premise>\n\n<statement>\n" << hypothesis << "\n</statement>\n\n";
    os << "Put exactly one label inside <verdict> </verdict> tags.";
    return os.str();
}

std::string LlmEntailmentScorer::judge(const std::string& premise, const std::string& hypothesis,
                                       VerdictScheme scheme) {
    const auto reply = gateway_.complete(judge_.request(prompt(premise, hypothesis, scheme)));
    const auto blocks = parse_tagged_blocks(reply.text, {"verdict"});
    if (blocks.empty()) throw ParseError("judge reply has no <verdict> block", reply.text.substr(0, 160));
    auto verdict = lower_trim(blocks.front().body);
    const auto labels = verdict_labels(scheme);
    if (std::find(labels.begin(), labels.end(), verdict) == labels.end()) {
        throw ParseError("unknown verdict label '" + verdict + "'", blocks.front().body);
    }
    return verdict;
}

double LexicalOverlapScorer::coverage(const std::string& premise, const std::string& hypothesis) {
    const auto hyp = content_words(hypothesis);
    if (hyp.empty()) return 1.0;
    const auto prem_words = content_words(premise);
    const std::unordered_set<std::string> prem(prem_words.begin(), prem_words.end());
    const auto hits = std::count_if(hyp.begin(), hyp.end(), [&](const std::string& w) { return prem.count(w) > 0; });
    return static_cast<double>(hits) / static_cast<double>(hyp.size());
}

std::string LexicalOverlapScorer::judge(const std::string& premise, const std::string& hypothesis,
                                        VerdictScheme scheme) {
    const double c = coverage(premise, hypothesis);
    switch (scheme) {
        case VerdictScheme::Binary: return c >= 0.8 ? "entails" : "not_entails";
        case VerdictScheme::AttrScore: return c >= 0.8 ? "attributable" : c >= 0.4 ? "extrapolatory" : "contradictory";
        case VerdictScheme::Lqac: return c >= 0.8 ? "full" : c >= 0.4 ? "partial" : "none";
    }
    return "none";
}

std::string concat_premise(const std::set<int>& citations, std::span<const Passage> passages) {
    std::string out;
    for (int id : citations) {
        if (!out.empty()) out += '\n';
        out += passage_text(passage_by_id(passages, id));
    }
    return out;
}

int autoais_recall(const Statement& statement, std::span<const Passage> passages, EntailmentScorer& scorer) {
    if (statement.citations.empty()) return 0;
    return guarded(statement, [&] {
        return entails(scorer, concat_premise(statement.citations, passages), statement.text_clean) ? 1 : 0;
    });
}

std::optional<double> autoais_precision(const Statement& statement, std::span<const Passage> passages,
                                        EntailmentScorer& scorer) {
    if (statement.citations.empty()) return std::nullopt;
    return guarded(statement, [&]() -> std::optional<double> {
        const auto& hyp = statement.text_clean;
        const bool full = entails(scorer, concat_premise(statement.citations, passages), hyp);
        double total = 0.0;
        for (int id : statement.citations) {
            if (entails(scorer, concat_premise({id}, passages), hyp)) {
                total += 1.0;
                continue;
            }
            auto rest = statement.citations;
            rest.erase(id);
            if (full && !entails(scorer, concat_premise(rest, passages), hyp)) total += 1.0;
        }
        return total / static_cast<double>(statement.citations.size());
    });
}

double statement_f1(double recall, double precision) {
    if (recall + precision == 0.0) return 0.0;
    return 2.0 * recall * precision / (recall + precision);
}

double attrscore_value(const std::string& verdict, AttrScoreMode mode) {
    const auto v = lower_trim(verdict);
    if (v == "attributable") return 1.0;
    if (v == "extrapolatory") return mode == AttrScoreMode::Relaxed ? 0.5 : 0.0;
    if (v == "contradictory") return 0.0;
    throw ParseError("unknown AttrScore verdict '" + v + "'", v);
}

double attrscore_rate(const Statement& statement, std::span<const Passage> passages, AttrScoreMode mode,
                      EntailmentScorer& scorer) {
    if (statement.citations.empty()) return 0.0;
    return guarded(statement, [&] {
        double total = 0.0;
        for (int id : statement.citations) {
            total += attrscore_value(
                checked_verdict(scorer, concat_premise({id}, passages), statement.text_clean, VerdictScheme::AttrScore),
                mode);
        }
        return total / static_cast<double>(statement.citations.size());
    });
}

double lqac_value(const std::string& verdict) {
    const auto v = lower_trim(verdict);
    if (v == "full") return 1.0;
    if (v == "partial") return 0.5;
    if (v == "none") return 0.0;
    throw ParseError("unknown LQAC verdict '" + v + "'", v);
}

LqacScore lqac_rate(const Statement& statement, std::span<const Passage> passages, EntailmentScorer& scorer) {
    LqacScore out;
    if (statement.citations.empty()) return out;
    return guarded(statement, [&] {
        const auto& hyp = statement.text_clean;
        out.recall = lqac_value(
            checked_verdict(scorer, concat_premise(statement.citations, passages), hyp, VerdictScheme::Lqac));
        double total = 0.0;
        for (int id : statement.citations) {
            total += lqac_value(checked_verdict(scorer, concat_premise({id}, passages), hyp, VerdictScheme::Lqac));
        }
        out.precision = total / static_cast<double>(statement.citations.size());
        return out;
    });
}

std::string_view to_string(BaselineMetric m) {
    switch (m) {
        case BaselineMetric::AutoAis: return "autoais";
        case BaselineMetric::AttrScoreStrict: return "attrscore-strict";
        case BaselineMetric::AttrScoreRelaxed: return "attrscore-relaxed";
        case BaselineMetric::Lqac: return "lqac";
    }
    return "unknown";
}

std::optional<BaselineMetric> baseline_from_string(std::string_view name) {
    for (auto m : {BaselineMetric::AutoAis, BaselineMetric::AttrScoreStrict, BaselineMetric::AttrScoreRelaxed,
                   BaselineMetric::Lqac}) {
        if (to_string(m) == name) return m;
    }
    return std::nullopt;
}

std::string BaselineEvaluation::primary() const {
    return (metric == BaselineMetric::AttrScoreStrict || metric == BaselineMetric::AttrScoreRelaxed) ? "score" : "f1";
}

BaselineEvaluation evaluate_baseline(const EvalInstance& instance, std::span<const ContextLabel> labels,
                                     BaselineMetric metric, EntailmentScorer& scorer) {
    if (labels.size() != instance.statements.size()) {
        throw AlignmentError("evaluate_baseline: " + std::to_string(labels.size()) + " labels for " +
                             std::to_string(instance.statements.size()) + " statements");
    }
    BaselineEvaluation ev;
    ev.instance_id = instance.instance_id;
    ev.metric = metric;
    std::vector<std::string> names;
    switch (metric) {
        case BaselineMetric::AutoAis:
        case BaselineMetric::Lqac: names = {"recall", "precision", "f1"}; break;
        default: names = {"score"}; break;
    }

    for (std::size_t i = 0; i < instance.statements.size(); ++i) {
        const auto& st = instance.statements[i];
        BaselineStatement bs;
        bs.index = st.index;
        bs.applicable_full = applicable(labels[i]);
        bs.applicable_cited = bs.applicable_full && !st.citations.empty();
        for (const auto& n : names) bs.scores[n] = std::nullopt;
        if (bs.applicable_full) {
            switch (metric) {
                case BaselineMetric::AutoAis: {
                    const double recall = autoais_recall(st, instance.passages, scorer);
                    const auto precision = autoais_precision(st, instance.passages, scorer);
                    bs.scores["recall"] = recall;
                    bs.scores["precision"] = precision;
                    bs.scores["f1"] = statement_f1(recall, precision.value_or(0.0));
                    break;
                }
                case BaselineMetric::AttrScoreStrict:
                    bs.scores["score"] = attrscore_rate(st, instance.passages, AttrScoreMode::Strict, scorer);
                    break;
                case BaselineMetric::AttrScoreRelaxed:
                    bs.scores["score"] = attrscore_rate(st, instance.passages, AttrScoreMode::Relaxed, scorer);
                    break;
                case BaselineMetric::Lqac: {
                    const auto s = lqac_rate(st, instance.passages, scorer);
                    bs.scores["recall"] = s.recall;
                    bs.scores["precision"] = s.precision;
                    bs.scores["f1"] = statement_f1(s.recall, s.precision.value_or(0.0));
                    break;
                }
            }
        }
        ev.statements.push_back(std::move(bs));
    }

    for (const auto& n : names) {
        std::vector<StatementRating> ratings;
        for (const auto& bs : ev.statements) {
            StatementRating r;
            r.statement_index = bs.index;
            r.normalized = bs.scores.at(n);
            r.applicable_full = bs.applicable_full;
            r.applicable_cited = bs.applicable_cited;
            ratings.push_back(std::move(r));
        }
        ev.full[n] = aggregate_response(ratings, Scenario::Full);
        ev.cited[n] = aggregate_response(ratings, Scenario::Cited);
    }
    return ev;
}

}  // namespace citeeval
