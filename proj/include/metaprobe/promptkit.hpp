#pragma once

#include <algorithm>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <fmt/format.h>

#include "metaprobe/error.hpp"
#include "metaprobe/ingest.hpp"
#include "metaprobe/text.hpp"

namespace metaprobe {

// Candidate labels. Order is significant: it is printed verbatim and breaks ties.
class LabelSet {
public:
    LabelSet() = default;

    explicit LabelSet(std::vector<std::string> labels) : labels_(std::move(labels)) {
        if (labels_.empty()) throw ConfigError("label set is empty");
        std::set<std::string> seen;
        for (const auto& l : labels_) {
            if (text::trim(l).empty()) throw ConfigError("label set contains a blank label");
            if (!seen.insert(l).second) throw ConfigError("duplicate label '" + l + "'");
        }
    }

    const std::vector<std::string>& labels() const { return labels_; }
    std::size_t size() const { return labels_.size(); }
    bool empty() const { return labels_.empty(); }
    bool contains(std::string_view l) const { return std::find(labels_.begin(), labels_.end(), l) != labels_.end(); }
    const std::string& operator[](std::size_t i) const { return labels_[i]; }

    bool operator==(const LabelSet&) const = default;

private:
    std::vector<std::string> labels_;
};

enum class TaskKind { classify_zs, classify_fs, binary_zs, binary_fs, regress_zs, regress_fs };

inline std::string_view to_string(TaskKind k) {
    switch (k) {
    case TaskKind::classify_zs: return "classify-zs";
    case TaskKind::classify_fs: return "classify-fs";
    case TaskKind::binary_zs: return "binary-zs";
    case TaskKind::binary_fs: return "binary-fs";
    case TaskKind::regress_zs: return "regress-zs";
    case TaskKind::regress_fs: return "regress-fs";
    }
    return "?";
}

inline bool is_classify(TaskKind k) { return k == TaskKind::classify_zs || k == TaskKind::classify_fs; }
inline bool is_few_shot(TaskKind k) {
    return k == TaskKind::classify_fs || k == TaskKind::binary_fs || k == TaskKind::regress_fs;
}

struct RenderedPrompt {
    std::string text;
    TaskKind kind = TaskKind::classify_zs;
    std::size_t n_expected = 0;
    std::optional<LabelSet> label_set;
    // Non-fatal notes, e.g. support and query drawn from the same study.
    std::vector<std::string> diagnostics;
};

// ---------------------------------------------------------------------------
// Table blocks
// ---------------------------------------------------------------------------

// Header of field names joined by single spaces, then "<index> <values...>"
// per row. With include_label false the label column is left out.
inline std::string format_table(const StudyTable& table, bool include_label) {
    std::vector<std::size_t> cols;
    auto label = table.label_index();
    for (std::size_t c = 0; c < table.schema().size(); ++c)
        if (include_label || !label || c != *label) cols.push_back(c);
    std::string out;
    for (std::size_t i = 0; i < cols.size(); ++i) {
        if (i) out += ' ';
        out += table.schema()[cols[i]];
    }
    out += '\n';
    for (std::size_t r = 0; r < table.size(); ++r) {
        out += std::to_string(r);
        for (auto c : cols) {
            out += ' ';
            out += table.value(r, c);
        }
        out += '\n';
    }
    return out;
}

struct BeachLayout {
    bool cfu = false;
    bool binary = false;
    std::size_t header_indent = 0; // spaces before "Date" in the header line
};

// Fixed-width block: every column right-aligned to max(header, cell) width
// and separated by two spaces; the date column leads each row.
inline std::string format_beach(const BeachSeries& series, const BeachLayout& layout) {
    if (layout.cfu && !series.has_cfu()) throw DataError("series carries no EcoliAve_CFU column");
    if (layout.binary && !series.has_binary()) throw DataError("series carries no Ecoli_binary column");
    std::vector<BeachColumn> cols(kBeachCovariates.begin(), kBeachCovariates.end());
    if (layout.cfu) cols.push_back(BeachColumn::ecoli_ave_cfu);
    if (layout.binary) cols.push_back(BeachColumn::ecoli_binary);

    std::vector<std::vector<std::string>> cells(series.size());
    std::vector<std::size_t> width;
    for (auto c : cols) width.push_back(column_name(c).size());
    for (std::size_t r = 0; r < series.size(); ++r) {
        const auto& rec = series.rows()[r];
        for (std::size_t i = 0; i < cols.size(); ++i) {
            std::string s = cols[i] == BeachColumn::ecoli_binary
                                ? std::to_string(*rec.ecoli_binary)
                                : fmt::format("{:.{}f}", rec.covariate(cols[i]), series.precision().of(cols[i]));
            width[i] = std::max(width[i], s.size());
            cells[r].push_back(std::move(s));
        }
    }
    std::string out(layout.header_indent, ' ');
    out += "Date";
    for (std::size_t i = 0; i < cols.size(); ++i) out += fmt::format("  {:>{}}", column_name(cols[i]), width[i]);
    out += '\n';
    for (std::size_t r = 0; r < series.size(); ++r) {
        out += format_date(series.rows()[r].date);
        for (std::size_t i = 0; i < cols.size(); ++i) out += fmt::format("  {:>{}}", cells[r][i], width[i]);
        out += '\n';
    }
    return out;
}

// With include_label, whichever label columns the series carries are shown.
inline std::string format_table(const BeachSeries& series, bool include_label) {
    return format_beach(series, {include_label && series.has_cfu(), include_label && series.has_binary(), 0});
}

// Comparison form for golden files: trailing whitespace stripped from every
// line, runs of blank lines collapsed to one, leading and trailing blank
// lines removed.
inline std::string normalize_prompt_text(std::string_view raw) {
    std::vector<std::string_view> kept;
    bool prev_blank = true;
    for (auto line : text::split(raw, '\n')) {
        line = text::trim_right(line);
        bool blank = line.empty();
        if (blank && prev_blank) continue;
        kept.push_back(line);
        prev_blank = blank;
    }
    while (!kept.empty() && kept.back().empty()) kept.pop_back();
    std::string out;
    for (auto l : kept) {
        out += l;
        out += '\n';
    }
    return out;
}

// ---------------------------------------------------------------------------
// Prompt families
// ---------------------------------------------------------------------------

namespace detail {

inline std::string label_alternatives(const LabelSet& labels, std::size_t from) {
    std::string out;
    for (std::size_t i = from; i < labels.size(); ++i) {
        if (i > from) out += " or ";
        out += labels[i];
    }
    return out;
}

inline void require_target(const MaskedStudy& query, std::string_view target_field) {
    if (query.target_field() != target_field)
        throw ConfigError("query is masked on '" + query.target_field() + "', not '" + std::string(target_field) +
                          "'");
}

inline std::string binary_question(std::size_t n, bool wrapped) {
    return fmt::format("Could you classify the following {} rows using the Ecoli_binary label,{}where 1 indicates "
                       "non-safe freshwater and 0 indicates safe freshwater?\n",
                       n, wrapped ? "\n" : " ");
}

inline constexpr std::string_view kListInstruction = "Please show the result in Python list format.";
inline constexpr std::string_view kRegressionInstruction =
    "Estimate the E. Coli concentration (in CFU/100mL) based on the following metadata.";

} // namespace detail

inline RenderedPrompt render_zero_shot_classification(const MaskedStudy& query, std::string_view target_field,
                                                      const LabelSet& labels) {
    if (labels.empty()) throw ConfigError("label set is empty");
    detail::require_target(query, target_field);
    // The question wraps after the first alternative.
    std::string text = fmt::format("Could you predict the \"{}\" values below(which is now in '?') with {}", target_field,
                                   labels[0]);
    if (labels.size() > 1)
        text += " or\n" + detail::label_alternatives(labels, 1) + " ?\n";
    else
        text += " ?\n";
    text += "\n";
    text += format_table(query.table(), true);
    return {std::move(text), TaskKind::classify_zs, query.size(), labels, {}};
}

inline RenderedPrompt render_few_shot_classification(const StudyTable& support, const MaskedStudy& query,
                                                     std::string_view target_field, const LabelSet& labels) {
    if (labels.empty()) throw ConfigError("label set is empty");
    detail::require_target(query, target_field);
    if (!support.field_index(target_field))
        throw ConfigError("support table has no '" + std::string(target_field) + "' column");
    const StudyTable labeled = support.label_field() == std::optional<std::string>(std::string(target_field))
                                   ? support
                                   : relabel(support, target_field);
    if (labeled.any_masked()) throw ConfigError("support table has masked labels");

    RenderedPrompt p;
    p.kind = TaskKind::classify_fs;
    p.n_expected = query.size();
    p.label_set = labels;
    if (support.study_id() == query.table().study_id())
        p.diagnostics.push_back("support and query share study '" + support.study_id() +
                                "'; this is not a cross-study prompt");
    p.text = "Based on this study:\n\n";
    p.text += format_table(labeled, true);
    p.text += "\n";
    p.text += format_table(query.table(), true);
    p.text += fmt::format("\nCould you predict the \"{}\" values(which is now in '?') with {} ?\n", target_field,
                          detail::label_alternatives(labels, 0));
    return p;
}

inline RenderedPrompt render_binary_contamination(const BeachSeries& query,
                                                  const std::optional<BeachSeries>& support = std::nullopt) {
    if (query.has_binary() || query.has_cfu()) throw ConfigError("query series carries labels");
    RenderedPrompt p;
    p.n_expected = query.size();
    if (!support) {
        p.kind = TaskKind::binary_zs;
        p.text = detail::binary_question(query.size(), true);
        p.text += "\n";
        p.text += format_beach(query, {false, false, 1});
    } else {
        if (!support->has_binary()) throw ConfigError("support series has no Ecoli_binary labels");
        p.kind = TaskKind::binary_fs;
        p.text = "Based on below study:\n\n";
        p.text += format_beach(*support, {false, true, 2});
        p.text += "\n";
        p.text += detail::binary_question(query.size(), false);
        p.text += "\n";
        p.text += format_beach(query, {false, false, 0});
    }
    p.text += "\n";
    p.text += detail::kListInstruction;
    p.text += "\n";
    return p;
}

inline RenderedPrompt render_regression(const BeachSeries& query,
                                        const std::optional<BeachSeries>& support = std::nullopt) {
    if (query.size() == 0) throw ConfigError("regression query has no rows to estimate");
    RenderedPrompt p;
    p.n_expected = query.size();
    p.kind = support ? TaskKind::regress_fs : TaskKind::regress_zs;
    if (support) {
        if (!support->has_cfu()) throw ConfigError("support series has no EcoliAve_CFU values");
        p.text = "Based on below study:\n\n";
        p.text += format_beach(*support, {true, false, 0});
        p.text += "\n";
    }
    p.text += detail::kRegressionInstruction;
    p.text += fmt::format("\nGive one estimate for each of the following {} rows.\n\n", query.size());
    p.text += format_beach(query.without_labels(), {false, false, 0});
    p.text += "\n";
    p.text += detail::kListInstruction;
    p.text += "\n";
    return p;
}

} // namespace metaprobe
