#include "citeeval/text_prep.hpp"

#include "citeeval/errors.hpp"

#include <algorithm>
#include <cctype>

namespace citeeval::text {

namespace {

constexpr std::string_view kThinkOpen = "<thinking>";
constexpr std::string_view kThinkClose = "</thinking>";

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }
bool is_digit(char c) { return c >= '0' && c <= '9'; }

std::string trim(std::string_view s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && is_space(s[b])) ++b;
    while (e > b && is_space(s[e - 1])) --e;
    return std::string(s.substr(b, e - b));
}

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

std::string remove_thinking_once(std::string_view in) {
    std::string out;
    out.reserve(in.size());
    std::size_t pos = 0;
    while (pos < in.size()) {
        const auto open = in.find(kThinkOpen, pos);
        if (open == std::string_view::npos) {
            out.append(in.substr(pos));
            break;
        }
        out.append(in.substr(pos, open - pos));
        const auto close = in.find(kThinkClose, open + kThinkOpen.size());
        if (close == std::string_view::npos) break;
        pos = close + kThinkClose.size();
    }
    return out;
}

// Length of a `[digits]` span starting at `pos`, or 0.
std::size_t citation_span_at(std::string_view s, std::size_t pos) {
    if (pos >= s.size() || s[pos] != '[') return 0;
    std::size_t i = pos + 1;
    while (i < s.size() && is_digit(s[i])) ++i;
    if (i == pos + 1 || i >= s.size() || s[i] != ']') return 0;
    return i - pos + 1;
}

// Strips trailing `[k]` groups from a word.
std::string_view without_trailing_citations(std::string_view word) {
    for (;;) {
        if (word.empty() || word.back() != ']') return word;
        const auto open = word.rfind('[');
        if (open == std::string_view::npos) return word;
        if (citation_span_at(word, open) != word.size() - open) return word;
        word = word.substr(0, open);
    }
}

bool is_closing_quote(char c) { return c == '"' || c == '\'' || c == ')'; }

bool is_terminal_punct(char c) { return c == '.' || c == '!' || c == '?'; }

// Word ends in sentence-final punctuation, allowing citation groups and closing
// quotes after it. Abbreviations never qualify.
bool ends_sentence(std::string_view word, const SegmenterConfig& cfg) {
    auto core = without_trailing_citations(word);
    while (!core.empty() && is_closing_quote(core.back())) core.remove_suffix(1);
    core = without_trailing_citations(core);
    if (core.empty() || !is_terminal_punct(core.back())) return false;
    if (core.back() == '.') {
        const auto key = lower(core);
        for (const auto& abbr : cfg.abbreviations) {
            if (lower(abbr) == key) return false;
        }
    }
    return true;
}

bool is_citation_only(std::string_view word) {
    return !word.empty() && without_trailing_citations(word).empty();
}

bool starts_statement(std::string_view word) {
    std::size_t i = 0;
    while (i < word.size() && (word[i] == '"' || word[i] == '\'' || word[i] == '(')) ++i;
    if (i >= word.size()) return false;
    const auto c = static_cast<unsigned char>(word[i]);
    return std::isupper(c) || std::isdigit(c);
}

std::vector<std::string_view> split_words(std::string_view normalized) {
    std::vector<std::string_view> words;
    std::size_t pos = 0;
    while (pos < normalized.size()) {
        auto next = normalized.find(' ', pos);
        if (next == std::string_view::npos) next = normalized.size();
        words.push_back(normalized.substr(pos, next - pos));
        pos = next + 1;
    }
    return words;
}

}  // namespace

SegmenterConfig SegmenterConfig::defaults() {
    SegmenterConfig cfg;
    cfg.abbreviations = {"e.g.", "i.e.", "etc.", "vs.", "cf.", "al.", "approx.", "Mr.", "Mrs.",
                         "Ms.",  "Dr.",  "Prof.", "Sr.", "Jr.", "St.", "No.", "Fig.", "U.S.",
                         "a.m.", "p.m.", "Inc.", "Ltd.", "Co.", "Jan.", "Feb.", "Aug.",
                         "Sept.", "Oct.", "Nov.", "Dec."};
    cfg.min_statement_chars = 1;
    return cfg;
}

std::string strip_thinking(std::string_view response_raw) {
    std::string current(response_raw);
    // Removing a span can splice a new marker together, so iterate to a fixpoint.
    for (;;) {
        auto next = remove_thinking_once(current);
        if (next == current) break;
        current = std::move(next);
    }
    return trim(current);
}

std::string normalize_whitespace(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    bool pending_space = false;
    for (char c : text) {
        if (is_space(c)) {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) out.push_back(' ');
        pending_space = false;
        out.push_back(c);
    }
    return out;
}

std::vector<std::string> segment_statements(std::string_view response, const SegmenterConfig& cfg) {
    if (cfg.min_statement_chars < 1) throw DomainError("min_statement_chars must be >= 1");
    const auto normalized = normalize_whitespace(response);
    std::vector<std::string> statements;
    if (normalized.empty()) return statements;

    const auto words = split_words(normalized);
    std::string current;
    bool prev_final = false;
    for (std::size_t i = 0; i < words.size(); ++i) {
        const auto word = words[i];
        if (!current.empty()) current.push_back(' ');
        current.append(word);

        // A bare citation token inherits sentence-finality from the word before it.
        const bool final = is_citation_only(word) ? prev_final : ends_sentence(word, cfg);
        prev_final = final;
        if (!final || i + 1 == words.size()) continue;
        const auto next = words[i + 1];
        if (is_citation_only(next) || !starts_statement(next)) continue;
        if (static_cast<int>(current.size()) < cfg.min_statement_chars) continue;
        statements.push_back(std::move(current));
        current.clear();
    }
    if (!current.empty()) {
        if (static_cast<int>(current.size()) < cfg.min_statement_chars && !statements.empty()) {
            statements.back().append(" ").append(current);
        } else {
            statements.push_back(std::move(current));
        }
    }
    return statements;
}

std::set<int> extract_citations(std::string_view statement, int max_id, CitationDiagnostics* diagnostics) {
    if (max_id < 1) throw DomainError("max_id must be >= 1");
    std::set<int> ids;
    for (std::size_t pos = 0; pos < statement.size(); ++pos) {
        const auto len = citation_span_at(statement, pos);
        if (len == 0) continue;
        const auto digits = statement.substr(pos + 1, len - 2);
        // Anything with more than 9 significant digits is out of range for any real id.
        const auto first_nonzero = digits.find_first_not_of('0');
        const auto significant =
            first_nonzero == std::string_view::npos ? 0 : digits.size() - first_nonzero;
        long long value = 0;
        if (significant <= 9) {
            for (char c : digits) value = value * 10 + (c - '0');
        } else {
            value = -1;
        }
        if (value >= 1 && value <= max_id) {
            ids.insert(static_cast<int>(value));
        } else if (diagnostics != nullptr) {
            ++diagnostics->dropped_out_of_range;
        }
        pos += len - 1;
    }
    return ids;
}

std::string strip_citations(std::string_view statement) {
    std::string removed;
    removed.reserve(statement.size());
    for (std::size_t pos = 0; pos < statement.size();) {
        const auto len = citation_span_at(statement, pos);
        if (len > 0) {
            pos += len;
            continue;
        }
        removed.push_back(statement[pos++]);
    }
    std::string out;
    out.reserve(removed.size());
    for (std::size_t i = 0; i < removed.size(); ++i) {
        const char c = removed[i];
        if (c == ' ' && !out.empty() && out.back() == ' ') continue;
        if ((c == '.' || c == ',' || c == ';' || c == ':' || c == '!' || c == '?') && !out.empty() &&
            out.back() == ' ') {
            out.pop_back();
        }
        out.push_back(c);
    }
    return trim(out);
}

std::string rewrite_citations(std::string_view statement, const std::set<int>& citations) {
    auto clean = strip_citations(statement);
    std::string block;
    for (int id : citations) block += "[" + std::to_string(id) + "]";
    if (block.empty()) return clean;

    std::size_t tail = clean.size();
    while (tail > 0 && is_closing_quote(clean[tail - 1])) --tail;
    if (tail > 0 && is_terminal_punct(clean[tail - 1])) {
        while (tail > 0 && is_terminal_punct(clean[tail - 1])) --tail;
        return clean.substr(0, tail) + " " + block + clean.substr(tail);
    }
    return clean + " " + block;
}

std::vector<Statement> build_statements(std::string_view response_raw, int max_id,
                                        const SegmenterConfig& cfg, CitationDiagnostics* diagnostics) {
    if (max_id < 1) throw DomainError("max_id must be >= 1");
    const auto response = strip_thinking(response_raw);
    std::vector<Statement> out;
    int index = 1;
    for (auto& sentence : segment_statements(response, cfg)) {
        Statement st;
        st.index = index++;
        st.citations = extract_citations(sentence, max_id, diagnostics);
        st.text_clean = strip_citations(sentence);
        st.text_with_citations = std::move(sentence);
        out.push_back(std::move(st));
    }
    return out;
}

}  // namespace citeeval::text
