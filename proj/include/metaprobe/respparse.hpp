#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <optional>
#include <regex>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "metaprobe/promptkit.hpp"
#include "metaprobe/text.hpp"

namespace metaprobe {

// One row's answer: a label (bit answers are the labels "0"/"1") or a number.
using Prediction = std::variant<std::string, double>;

struct ParsedBatch {
    std::vector<Prediction> predictions;
    std::size_t n_expected = 0;
    bool valid = false;
    std::optional<std::string> diagnostic;

    static ParsedBatch invalid(std::size_t n, std::string why) { return {{}, n, false, std::move(why)}; }
    static ParsedBatch ok(std::vector<Prediction> p) {
        auto n = p.size();
        return {std::move(p), n, true, std::nullopt};
    }
};

// A batch that passed validation. Scoring only accepts this type.
class ValidBatch {
public:
    static std::optional<ValidBatch> from(const ParsedBatch& b) {
        if (!b.valid || b.predictions.size() != b.n_expected) return std::nullopt;
        return ValidBatch(b.predictions);
    }

    std::size_t size() const { return predictions_.size(); }

    std::vector<std::string> labels() const {
        std::vector<std::string> out;
        for (const auto& p : predictions_) out.push_back(std::get<std::string>(p));
        return out;
    }

    std::vector<double> values() const {
        std::vector<double> out;
        for (const auto& p : predictions_) out.push_back(std::get<double>(p));
        return out;
    }

private:
    explicit ValidBatch(std::vector<Prediction> p) : predictions_(std::move(p)) {}
    std::vector<Prediction> predictions_;
};

// ---------------------------------------------------------------------------
// Serialization (the list format prompts ask for)
// ---------------------------------------------------------------------------

inline std::string serialize_bits(const std::vector<int>& bits) {
    std::string out = "[";
    for (std::size_t i = 0; i < bits.size(); ++i) {
        if (i) out += ", ";
        out += std::to_string(bits[i]);
    }
    return out + "]";
}

inline std::string serialize_labels(const std::vector<std::string>& labels) {
    std::string out = "[";
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (i) out += ", ";
        char q = labels[i].find('\'') == std::string::npos ? '\'' : '"';
        out += q;
        out += labels[i];
        out += q;
    }
    return out + "]";
}

// Shortest round-trip representation for each value.
inline std::string serialize_numbers(const std::vector<double>& values) {
    std::string out = "[";
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) out += ", ";
        char buf[64];
        auto [end, ec] = std::to_chars(buf, buf + sizeof buf, values[i]);
        out.append(buf, end);
    }
    return out + "]";
}

// ---------------------------------------------------------------------------
// Parsing. Every function here is total: malformed text gives valid=false.
// ---------------------------------------------------------------------------

namespace detail {

struct ListElement {
    std::string text;
    bool quoted = false;
};

// Body of the last "[...]" run in `text`.
inline std::optional<std::string_view> last_bracketed(std::string_view text) {
    auto close = text.rfind(']');
    if (close == std::string_view::npos) return std::nullopt;
    auto open = text.rfind('[', close);
    if (open == std::string_view::npos) return std::nullopt;
    return text.substr(open + 1, close - open - 1);
}

// Comma-separated elements; commas inside single or double quotes do not split.
inline std::optional<std::vector<ListElement>> split_list(std::string_view body) {
    std::vector<ListElement> out;
    if (text::trim(body).empty()) return out;
    std::size_t i = 0;
    while (i <= body.size()) {
        while (i < body.size() && text::is_space(body[i])) ++i;
        ListElement el;
        if (i < body.size() && (body[i] == '\'' || body[i] == '"')) {
            char q = body[i];
            auto end = body.find(q, i + 1);
            if (end == std::string_view::npos) return std::nullopt;
            el.text = std::string(body.substr(i + 1, end - i - 1));
            el.quoted = true;
            i = end + 1;
            while (i < body.size() && text::is_space(body[i])) ++i;
            if (i < body.size() && body[i] != ',') return std::nullopt;
        } else {
            auto end = body.find(',', i);
            if (end == std::string_view::npos) end = body.size();
            el.text = std::string(text::trim(body.substr(i, end - i)));
            i = end;
        }
        bool trailing = i >= body.size();
        // Tolerate one trailing comma, as Python does.
        if (!(el.text.empty() && !el.quoted && trailing && !out.empty())) out.push_back(std::move(el));
        if (trailing) break;
        ++i; // skip ','
        if (i == body.size()) break;
    }
    return out;
}

} // namespace detail

inline ParsedBatch parse_bit_list(std::string_view text, std::size_t n_expected) {
    auto body = detail::last_bracketed(text);
    if (!body) return ParsedBatch::invalid(n_expected, "no list found");
    auto elems = detail::split_list(*body);
    if (!elems) return ParsedBatch::invalid(n_expected, "unterminated quote in list");
    std::vector<Prediction> preds;
    for (const auto& e : *elems) {
        auto t = text::trim(e.text);
        if (t != "0" && t != "1") return ParsedBatch::invalid(n_expected, "non-bit element '" + e.text + "'");
        preds.emplace_back(std::string(t));
    }
    if (preds.size() != n_expected)
        return ParsedBatch::invalid(n_expected, "length mismatch: got " + std::to_string(preds.size()) +
                                                    ", expected " + std::to_string(n_expected));
    return ParsedBatch::ok(std::move(preds));
}

inline ParsedBatch parse_numeric_list(std::string_view text, std::size_t n_expected) {
    auto body = detail::last_bracketed(text);
    if (!body) return ParsedBatch::invalid(n_expected, "no list found");
    auto elems = detail::split_list(*body);
    if (!elems) return ParsedBatch::invalid(n_expected, "unterminated quote in list");
    std::vector<Prediction> preds;
    for (const auto& e : *elems) {
        auto v = text::parse_double(e.text);
        if (!v) return ParsedBatch::invalid(n_expected, "non-numeric element '" + e.text + "'");
        if (!std::isfinite(*v)) return ParsedBatch::invalid(n_expected, "non-finite value '" + e.text + "'");
        if (*v < 0) return ParsedBatch::invalid(n_expected, "negative value '" + e.text + "'");
        preds.emplace_back(*v);
    }
    if (preds.size() != n_expected)
        return ParsedBatch::invalid(n_expected, "length mismatch: got " + std::to_string(preds.size()) +
                                                    ", expected " + std::to_string(n_expected));
    return ParsedBatch::ok(std::move(preds));
}

namespace detail {

inline ParsedBatch parse_label_list(std::string_view body, std::size_t n_expected, const LabelSet& labels) {
    auto elems = split_list(body);
    if (!elems) return ParsedBatch::invalid(n_expected, "unterminated quote in list");
    std::vector<Prediction> preds;
    for (const auto& e : *elems) {
        std::string l(text::trim(e.text));
        if (!labels.contains(l)) return ParsedBatch::invalid(n_expected, "unknown label '" + l + "'");
        preds.emplace_back(std::move(l));
    }
    if (preds.size() != n_expected)
        return ParsedBatch::invalid(n_expected, "length mismatch: got " + std::to_string(preds.size()) +
                                                    ", expected " + std::to_string(n_expected));
    return ParsedBatch::ok(std::move(preds));
}

// Lines of the form "<i> ... <label>" (optionally "row <i>:"). The label is
// the longest candidate that ends the line.
inline ParsedBatch parse_indexed_lines(std::string_view body, std::size_t n_expected, const LabelSet& labels,
                                       bool& found_any) {
    static const std::regex kIndexed(R"(^\s*(?:[Rr]ow\s+)?(\d+)\s*[:.)\-]?\s+(.*\S)\s*$)");
    std::vector<std::optional<std::string>> slots(n_expected);
    found_any = false;
    for (auto line : text::lines(body)) {
        std::string s(line);
        std::smatch m;
        if (!std::regex_match(s, m, kIndexed)) continue;
        found_any = true;
        auto idx = text::parse_int(m[1].str());
        std::string content = m[2].str();
        std::optional<std::string> hit;
        for (const auto& l : labels.labels()) {
            bool ends = content.size() >= l.size() && content.compare(content.size() - l.size(), l.size(), l) == 0;
            bool boundary = content.size() == l.size() || text::is_space(content[content.size() - l.size() - 1]);
            if (ends && boundary && (!hit || l.size() > hit->size())) hit = l;
        }
        if (!hit)
            return ParsedBatch::invalid(n_expected, "unknown label in line '" + std::string(text::trim(line)) + "'");
        if (!idx || *idx < 0 || static_cast<std::size_t>(*idx) >= n_expected)
            return ParsedBatch::invalid(n_expected, "row index " + m[1].str() + " out of range");
        auto& slot = slots[static_cast<std::size_t>(*idx)];
        if (slot && *slot != *hit) return ParsedBatch::invalid(n_expected, "conflicting answers for row " + m[1].str());
        slot = *hit;
    }
    std::vector<Prediction> preds;
    for (std::size_t i = 0; i < n_expected; ++i) {
        if (!slots[i]) return ParsedBatch::invalid(n_expected, "missing index " + std::to_string(i));
        preds.emplace_back(*slots[i]);
    }
    return ParsedBatch::ok(std::move(preds));
}

} // namespace detail

// Accepts a bracketed list of labels (quoted or not) or indexed answer lines.
inline ParsedBatch parse_label_answers(std::string_view text, std::size_t n_expected, const LabelSet& labels) {
    std::optional<ParsedBatch> from_list;
    if (auto body = detail::last_bracketed(text)) {
        from_list = detail::parse_label_list(*body, n_expected, labels);
        if (from_list->valid) return *from_list;
    }
    bool found_lines = false;
    auto from_lines = detail::parse_indexed_lines(text, n_expected, labels, found_lines);
    if (found_lines && from_lines.valid) return from_lines;
    if (from_list) return *from_list;
    if (found_lines) return from_lines;
    if (n_expected == 0) return ParsedBatch::ok({});
    return ParsedBatch::invalid(n_expected, "no list or indexed answers found");
}

} // namespace metaprobe
