#include "citeeval/errors.hpp"
#include "citeeval/gateway.hpp"

#include <algorithm>
#include <cctype>
#include <regex>

namespace citeeval {

namespace {

constexpr std::size_t kSpanContext = 160;

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }
bool is_name_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_' || c == '-';
}

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

std::string trim(std::string_view s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && is_space(s[b])) ++b;
    while (e > b && is_space(s[e - 1])) --e;
    return std::string(s.substr(b, e - b));
}

std::string excerpt(std::string_view text, std::size_t from) {
    return std::string(text.substr(from, kSpanContext));
}

bool is_integer_key(const std::string& key) { return key == "sentence_id" || key == "citation"; }

std::optional<int> parse_int(std::string_view raw) {
    const auto s = trim(raw);
    if (s.empty() || s.size() > 9) return std::nullopt;
    std::size_t i = (s[0] == '-') ? 1 : 0;
    if (i == s.size()) return std::nullopt;
    int value = 0;
    for (; i < s.size(); ++i) {
        if (!std::isdigit(static_cast<unsigned char>(s[i]))) return std::nullopt;
        value = value * 10 + (s[i] - '0');
    }
    return s[0] == '-' ? -value : value;
}

// Case-insensitive search for `needle` in `hay` from `pos`.
std::size_t ifind(std::string_view hay, std::string_view needle, std::size_t pos) {
    if (needle.empty()) return pos;
    for (std::size_t i = pos; i + needle.size() <= hay.size(); ++i) {
        bool match = true;
        for (std::size_t k = 0; k < needle.size(); ++k) {
            if (std::tolower(static_cast<unsigned char>(hay[i + k])) !=
                std::tolower(static_cast<unsigned char>(needle[k]))) {
                match = false;
                break;
            }
        }
        if (match) return i;
    }
    return std::string_view::npos;
}

struct OpenTag {
    std::string name;
    std::map<std::string, std::string> attributes;
    std::size_t start = 0;     // index of '<'
    std::size_t body_begin = 0;  // index after '>'
};

// Parses the attribute list of a tag whose name ends at `pos`. Attributes may
// be separated by whitespace or commas.
OpenTag parse_open_tag(std::string_view text, std::size_t start, std::size_t name_end) {
    OpenTag tag;
    tag.start = start;
    tag.name = std::string(text.substr(start + 1, name_end - start - 1));
    std::size_t pos = name_end;
    for (;;) {
        while (pos < text.size() && (is_space(text[pos]) || text[pos] == ',')) ++pos;
        if (pos >= text.size()) throw ParseError("truncated <" + tag.name + "> tag", excerpt(text, start));
        if (text[pos] == '>') {
            tag.body_begin = pos + 1;
            return tag;
        }
        const auto key_begin = pos;
        while (pos < text.size() && is_name_char(text[pos])) ++pos;
        if (pos == key_begin) {
            throw ParseError("unexpected character in <" + tag.name + "> attributes", excerpt(text, start));
        }
        const std::string key(text.substr(key_begin, pos - key_begin));
        while (pos < text.size() && is_space(text[pos])) ++pos;
        if (pos >= text.size() || text[pos] != '=') {
            throw ParseError("attribute '" + key + "' of <" + tag.name + "> has no value", excerpt(text, start));
        }
        ++pos;
        while (pos < text.size() && is_space(text[pos])) ++pos;
        if (pos >= text.size() || text[pos] != '"') {
            throw ParseError("attribute '" + key + "' of <" + tag.name + "> is not quoted", excerpt(text, start));
        }
        const auto value_end = text.find('"', pos + 1);
        if (value_end == std::string_view::npos) {
            throw ParseError("unterminated value for attribute '" + key + "'", excerpt(text, start));
        }
        std::string value(text.substr(pos + 1, value_end - pos - 1));
        if (is_integer_key(key) && !parse_int(value)) {
            throw ParseError("attribute '" + key + "' is not an integer: \"" + value + "\"", excerpt(text, start));
        }
        tag.attributes.emplace(key, std::move(value));
        pos = value_end + 1;
    }
}

// End of the tag name starting after '<' at `pos`, or npos when the text at
// `pos` is not an opening tag.
std::size_t tag_name_end(std::string_view text, std::size_t pos) {
    std::size_t i = pos + 1;
    while (i < text.size() && is_name_char(text[i])) ++i;
    if (i == pos + 1) return std::string_view::npos;
    if (i < text.size() && !(is_space(text[i]) || text[i] == '>' || text[i] == ',')) {
        return std::string_view::npos;
    }
    return i;
}

std::vector<TaggedBlock> parse_edit_children(std::string_view body) {
    std::vector<TaggedBlock> children;
    std::size_t pos = 0;
    while ((pos = body.find('<', pos)) != std::string_view::npos) {
        const auto name_end = tag_name_end(body, pos);
        if (name_end == std::string_view::npos) {
            ++pos;
            continue;
        }
        const auto name = lower(body.substr(pos + 1, name_end - pos - 1));
        if (name != "delete" && name != "add") {
            ++pos;
            continue;
        }
        auto open = parse_open_tag(body, pos, name_end);
        const std::string upper = name == "delete" ? "DELETE" : "ADD";
        // Accept the closing form "</DELETE>" as well as a bare "<DELETE>".
        const auto slash_close = ifind(body, "</" + upper + ">", open.body_begin);
        const auto bare_close = ifind(body, "<" + upper + ">", open.body_begin);
        const auto close = std::min(slash_close, bare_close);
        if (close == std::string_view::npos) {
            throw ParseError("unclosed <" + upper + "> edit", excerpt(body, pos));
        }
        const auto close_len = (close == slash_close ? 3 : 2) + upper.size();
        TaggedBlock child;
        child.tag = upper;
        child.attributes = std::move(open.attributes);
        child.body = trim(body.substr(open.body_begin, close - open.body_begin));
        if (child.body.find('<') != std::string::npos) {
            throw ParseError("nested tag inside <" + upper + "> edit", excerpt(body, pos));
        }
        children.push_back(std::move(child));
        pos = close + close_len;
    }
    return children;
}

}  // namespace

std::optional<int> TaggedBlock::int_attribute(const std::string& key) const {
    const auto it = attributes.find(key);
    if (it == attributes.end()) return std::nullopt;
    return parse_int(it->second);
}

std::vector<TaggedBlock> parse_tagged_blocks(std::string_view text, const std::vector<std::string>& expected_tags) {
    std::vector<TaggedBlock> blocks;
    std::size_t pos = 0;
    while ((pos = text.find('<', pos)) != std::string_view::npos) {
        if (text.compare(pos, 10, "<thinking>") == 0) {
            const auto close = text.find("</thinking>", pos + 10);
            if (close != std::string_view::npos) {
                pos = close + 11;
                continue;
            }
        }
        const auto name_end = tag_name_end(text, pos);
        if (name_end == std::string_view::npos) {
            ++pos;
            continue;
        }
        const std::string name(text.substr(pos + 1, name_end - pos - 1));
        if (std::find(expected_tags.begin(), expected_tags.end(), name) == expected_tags.end()) {
            ++pos;
            continue;
        }
        auto open = parse_open_tag(text, pos, name_end);
        const auto close = text.find("</" + name + ">", open.body_begin);
        if (close == std::string_view::npos) {
            throw ParseError("truncated <" + name + "> block: no closing tag", excerpt(text, pos));
        }
        // Another opener of the same tag before our closer means this block never closed.
        for (auto next = text.find("<" + name, open.body_begin); next != std::string_view::npos && next < close;
             next = text.find("<" + name, next + 1)) {
            if (tag_name_end(text, next) == next + 1 + name.size()) {
                throw ParseError("unclosed <" + name + "> block", excerpt(text, pos));
            }
        }
        TaggedBlock block;
        block.tag = name;
        block.attributes = std::move(open.attributes);
        const auto raw_body = text.substr(open.body_begin, close - open.body_begin);
        block.body = trim(raw_body);
        if (name == "editing") block.children = parse_edit_children(raw_body);
        blocks.push_back(std::move(block));
        pos = close + name.size() + 3;
    }
    return blocks;
}

EditAction parse_edit_action(const TaggedBlock& child) {
    const auto op = action_op_from_string(child.tag);
    if (!op) throw ParseError("not an edit tag: <" + child.tag + ">", child.body);
    const auto citation = child.int_attribute("citation");
    if (!citation) throw ParseError("<" + child.tag + "> edit has no citation attribute", child.body);
    if (*citation < 0 || (*op == ActionOp::Delete && *citation == 0)) {
        throw ParseError("invalid citation id " + std::to_string(*citation) + " for <" + child.tag + ">",
                         child.body);
    }

    static const std::regex kReasonRe(R"((DELETE|ADD)\s*REASON\s*(\d+))", std::regex::icase);
    static constexpr ActionReason kDeleteReasons[] = {ActionReason::Misleading, ActionReason::Substandard,
                                                      ActionReason::Redundant};
    static constexpr ActionReason kAddReasons[] = {ActionReason::Evidence, ActionReason::Refinement,
                                                   ActionReason::Credibility};

    std::smatch m;
    const std::string& body = child.body;
    if (std::regex_search(body, m, kReasonRe)) {
        const auto kind = action_op_from_string(m[1].str());
        if (kind != op) {
            throw ParseError("<" + child.tag + "> edit carries a " + lower(m[1].str()) + " reason", body);
        }
        const auto k = parse_int(m[2].str());
        if (!k || *k < 1 || *k > 3) throw ParseError("reason index out of range", body);
        const auto reason = (*op == ActionOp::Delete ? kDeleteReasons : kAddReasons)[*k - 1];
        return EditAction{*op, *citation, reason};
    }

    // Keyword fallback: earliest reason keyword in the body wins.
    struct Keyword {
        std::string_view stem;
        ActionReason reason;
    };
    static constexpr Keyword kKeywords[] = {
        {"mislead", ActionReason::Misleading}, {"substandard", ActionReason::Substandard},
        {"redundan", ActionReason::Redundant}, {"evidence", ActionReason::Evidence},
        {"refine", ActionReason::Refinement},  {"credib", ActionReason::Credibility}};
    const auto lowered = lower(body);
    std::optional<ActionReason> best;
    std::size_t best_pos = std::string::npos;
    for (const auto& kw : kKeywords) {
        const auto at = lowered.find(kw.stem);
        if (at != std::string::npos && at < best_pos) {
            best = kw.reason;
            best_pos = at;
        }
    }
    if (!best) throw ParseError("no recognizable reason in <" + child.tag + "> edit", body);
    if (!reason_allowed(*op, *best)) {
        throw ParseError("<" + child.tag + "> edit carries reason '" + std::string(to_string(*best)) + "'", body);
    }
    return EditAction{*op, *citation, *best};
}

}  // namespace citeeval
