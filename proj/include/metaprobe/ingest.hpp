#pragma once

#include <algorithm>
#include <array>
#include <chrono>
#include <cstdio>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "metaprobe/error.hpp"
#include "metaprobe/text.hpp"

namespace metaprobe {

// Marks a hidden label cell.
inline constexpr std::string_view kMaskToken = "?";

// ---------------------------------------------------------------------------
// Study metadata tables
// ---------------------------------------------------------------------------

struct MetadataSample {
    std::vector<std::string> values;

    bool operator==(const MetadataSample&) const = default;
};

// Ordered categorical samples with an optional designated label column.
class StudyTable {
public:
    StudyTable() = default;

    StudyTable(std::string study_id, std::vector<std::string> schema, std::vector<MetadataSample> rows,
               std::optional<std::string> label_field = std::nullopt)
        : study_id_(std::move(study_id)), schema_(std::move(schema)), rows_(std::move(rows)),
          label_field_(std::move(label_field)) {
        std::set<std::string> seen;
        for (const auto& f : schema_) {
            if (f.empty()) throw DataError("empty field name in schema");
            if (!seen.insert(f).second) throw DataError("duplicate field name '" + f + "'");
        }
        if (label_field_ && !field_index(*label_field_))
            throw DataError("label field '" + *label_field_ + "' is not in the schema");
        for (std::size_t r = 0; r < rows_.size(); ++r) {
            if (rows_[r].values.size() != schema_.size())
                throw DataError("row " + std::to_string(r) + " has " + std::to_string(rows_[r].values.size()) +
                                " values for " + std::to_string(schema_.size()) + " fields");
            for (std::size_t c = 0; c < schema_.size(); ++c)
                if (rows_[r].values[c].empty())
                    throw DataError("row " + std::to_string(r) + " is missing a value for '" + schema_[c] + "'");
        }
    }

    const std::string& study_id() const { return study_id_; }
    const std::vector<std::string>& schema() const { return schema_; }
    const std::vector<MetadataSample>& rows() const { return rows_; }
    const std::optional<std::string>& label_field() const { return label_field_; }
    std::size_t size() const { return rows_.size(); }

    std::optional<std::size_t> field_index(std::string_view name) const {
        auto it = std::find(schema_.begin(), schema_.end(), name);
        if (it == schema_.end()) return std::nullopt;
        return static_cast<std::size_t>(it - schema_.begin());
    }

    std::optional<std::size_t> label_index() const {
        return label_field_ ? field_index(*label_field_) : std::nullopt;
    }

    const std::string& value(std::size_t row, std::size_t col) const { return rows_.at(row).values.at(col); }

    // Values of one column in row order.
    std::vector<std::string> column(std::string_view name) const {
        auto idx = field_index(name);
        if (!idx) throw DataError("unknown field '" + std::string(name) + "'");
        std::vector<std::string> out;
        out.reserve(rows_.size());
        for (const auto& r : rows_) out.push_back(r.values[*idx]);
        return out;
    }

    bool any_masked() const {
        auto idx = label_index();
        if (!idx) return false;
        return std::any_of(rows_.begin(), rows_.end(), [&](const auto& r) { return r.values[*idx] == kMaskToken; });
    }

    bool operator==(const StudyTable&) const = default;

private:
    std::string study_id_;
    std::vector<std::string> schema_;
    std::vector<MetadataSample> rows_;
    std::optional<std::string> label_field_;
};

// A study table whose label column is entirely hidden. Only mask_labels
// creates one, so code holding a MaskedStudy cannot see ground truth.
class MaskedStudy {
public:
    const StudyTable& table() const { return table_; }
    const std::string& target_field() const { return *table_.label_field(); }
    std::size_t size() const { return table_.size(); }

private:
    explicit MaskedStudy(StudyTable t) : table_(std::move(t)) {}
    friend std::pair<MaskedStudy, std::vector<std::string>> mask_labels(const StudyTable&);
    StudyTable table_;
};

// Closed per-column vocabularies used to group multi-word cells in
// space-delimited tables. Columns absent from the map take one token.
using Vocabulary = std::map<std::string, std::vector<std::string>, std::less<>>;

namespace detail {

using Tokens = std::vector<std::string>;

inline bool tokens_end_with(const Tokens& row, std::size_t end, const Tokens& cand) {
    if (cand.size() > end) return false;
    return std::equal(cand.begin(), cand.end(), row.begin() + static_cast<std::ptrdiff_t>(end - cand.size()));
}

struct ColumnCandidates {
    std::vector<Tokens> values; // sorted longest first
    bool open = false;          // no vocabulary: any single token
    bool allow_mask = false;
};

// Right-to-left assignment: the last column takes the longest vocabulary
// entry that ends the token run, backtracking on dead ends.
inline bool assign_columns(const Tokens& toks, const std::vector<ColumnCandidates>& cols, std::size_t col_count,
                           std::size_t end, std::vector<std::string>& out) {
    if (col_count == 0) return end == 0;
    const auto& col = cols[col_count - 1];
    auto try_take = [&](std::size_t k) {
        if (k == 0 || k > end) return false;
        if (!assign_columns(toks, cols, col_count - 1, end - k, out)) return false;
        Tokens piece(toks.begin() + static_cast<std::ptrdiff_t>(end - k), toks.begin() + static_cast<std::ptrdiff_t>(end));
        out[col_count - 1] = text::join(piece, " ");
        return true;
    };
    for (const auto& cand : col.values)
        if (tokens_end_with(toks, end, cand) && try_take(cand.size())) return true;
    if (col.allow_mask && end > 0 && toks[end - 1] == kMaskToken && try_take(1)) return true;
    if (col.open && try_take(1)) return true;
    return false;
}

// Greedy left-to-right grouping against every column's vocabulary; used only
// to tell an arity problem apart from an unknown value.
inline std::optional<std::size_t> count_groups(const Tokens& toks, const std::vector<ColumnCandidates>& cols) {
    bool any_open = std::any_of(cols.begin(), cols.end(), [](const auto& c) { return c.open || c.allow_mask; });
    std::size_t pos = 0, groups = 0;
    while (pos < toks.size()) {
        std::size_t best = 0;
        for (const auto& c : cols)
            for (const auto& cand : c.values)
                if (cand.size() > best && pos + cand.size() <= toks.size() &&
                    std::equal(cand.begin(), cand.end(), toks.begin() + static_cast<std::ptrdiff_t>(pos)))
                    best = cand.size();
        if (best == 0) {
            if (!any_open && toks[pos] != kMaskToken) return std::nullopt;
            best = 1;
        }
        pos += best;
        ++groups;
    }
    return groups;
}

} // namespace detail

// Parses a space-delimited block: a header of field names, then lines of
// "<row index> <value> <value> ...". Multi-word values are grouped against
// `vocab`; "?" is accepted in the label column.
inline StudyTable parse_study_table(std::string_view body, std::string study_id,
                                    std::optional<std::string> label_field = std::nullopt,
                                    const Vocabulary& vocab = {}) {
    std::vector<std::string> schema;
    std::vector<MetadataSample> rows;
    std::vector<detail::ColumnCandidates> cols;
    std::size_t line_no = 0;
    for (auto line : text::lines(body)) {
        ++line_no;
        auto toks = text::split_ws(line);
        if (toks.empty()) continue;
        if (schema.empty()) {
            schema = toks;
            for (const auto& f : schema) {
                detail::ColumnCandidates c;
                if (auto it = vocab.find(f); it != vocab.end()) {
                    for (const auto& v : it->second) c.values.push_back(text::split_ws(v));
                    std::stable_sort(c.values.begin(), c.values.end(),
                                     [](const auto& a, const auto& b) { return a.size() > b.size(); });
                } else {
                    c.open = true;
                }
                c.allow_mask = label_field && f == *label_field;
                cols.push_back(std::move(c));
            }
            continue;
        }
        if (!text::parse_int(toks.front()) || *text::parse_int(toks.front()) < 0)
            throw DataError("line " + std::to_string(line_no) + ": expected a row index, got '" + toks.front() + "'");
        toks.erase(toks.begin());
        std::vector<std::string> values(schema.size());
        if (!detail::assign_columns(toks, cols, cols.size(), toks.size(), values)) {
            auto groups = detail::count_groups(toks, cols);
            if (groups && *groups != schema.size())
                throw DataError("line " + std::to_string(line_no) + ": " + std::to_string(*groups) + " values for " +
                                std::to_string(schema.size()) + " fields");
            throw DataError("line " + std::to_string(line_no) + ": cannot group '" + text::join(toks, " ") +
                            "' into known column values");
        }
        rows.push_back({std::move(values)});
    }
    if (schema.empty()) throw DataError("table has no header line");
    return StudyTable(std::move(study_id), std::move(schema), std::move(rows), std::move(label_field));
}

// Tab-separated study table: header row of field names, one sample per line.
inline StudyTable parse_study_tsv(std::string_view body, std::string study_id,
                                  std::optional<std::string> label_field = std::nullopt) {
    std::vector<std::string> schema;
    std::vector<MetadataSample> rows;
    std::size_t line_no = 0;
    for (auto line : text::lines(body)) {
        ++line_no;
        if (text::trim(line).empty()) continue;
        std::vector<std::string> cells;
        for (auto c : text::split(line, '\t')) cells.emplace_back(text::trim(c));
        if (schema.empty()) {
            schema = std::move(cells);
            continue;
        }
        if (cells.size() != schema.size())
            throw DataError("line " + std::to_string(line_no) + ": " + std::to_string(cells.size()) +
                            " cells for " + std::to_string(schema.size()) + " fields");
        for (std::size_t c = 0; c < cells.size(); ++c)
            if (cells[c].empty())
                throw DataError("line " + std::to_string(line_no) + ": missing value for '" + schema[c] + "'");
        rows.push_back({std::move(cells)});
    }
    if (schema.empty()) throw DataError("table has no header line");
    return StudyTable(std::move(study_id), std::move(schema), std::move(rows), std::move(label_field));
}

inline StudyTable drop_field(const StudyTable& table, std::string_view field) {
    auto idx = table.field_index(field);
    if (!idx) throw DataError("unknown field '" + std::string(field) + "'");
    if (table.label_field() && *table.label_field() == field)
        throw DataError("cannot drop the label field '" + std::string(field) + "'");
    auto schema = table.schema();
    schema.erase(schema.begin() + static_cast<std::ptrdiff_t>(*idx));
    auto rows = table.rows();
    for (auto& r : rows) r.values.erase(r.values.begin() + static_cast<std::ptrdiff_t>(*idx));
    return StudyTable(table.study_id(), std::move(schema), std::move(rows), table.label_field());
}

// Same samples with a different label column.
inline StudyTable relabel(const StudyTable& table, std::string_view field) {
    if (!table.field_index(field)) throw DataError("unknown field '" + std::string(field) + "'");
    return StudyTable(table.study_id(), table.schema(), table.rows(), std::string(field));
}

// First `k` rows.
inline StudyTable head(const StudyTable& table, std::size_t k) {
    auto rows = table.rows();
    if (rows.size() > k) rows.resize(k);
    return StudyTable(table.study_id(), table.schema(), std::move(rows), table.label_field());
}

inline std::pair<MaskedStudy, std::vector<std::string>> mask_labels(const StudyTable& table) {
    auto idx = table.label_index();
    if (!idx) throw DataError("table '" + table.study_id() + "' has no label field to mask");
    if (table.any_masked()) throw DataError("table '" + table.study_id() + "' is already masked");
    std::vector<std::string> truth;
    auto rows = table.rows();
    truth.reserve(rows.size());
    for (auto& r : rows) {
        truth.push_back(std::exchange(r.values[*idx], std::string(kMaskToken)));
    }
    return {MaskedStudy(StudyTable(table.study_id(), table.schema(), std::move(rows), table.label_field())),
            std::move(truth)};
}

// Inverse of mask_labels.
inline StudyTable unmask(const MaskedStudy& masked, const std::vector<std::string>& truth) {
    const auto& t = masked.table();
    if (truth.size() != t.size()) throw DataError("truth length does not match row count");
    auto idx = *t.label_index();
    auto rows = t.rows();
    for (std::size_t i = 0; i < rows.size(); ++i) rows[i].values[idx] = truth[i];
    return StudyTable(t.study_id(), t.schema(), std::move(rows), t.label_field());
}

// Label histogram in first-appearance order.
inline std::vector<std::pair<std::string, std::size_t>> label_counts(const StudyTable& table) {
    std::vector<std::pair<std::string, std::size_t>> out;
    auto idx = table.label_index();
    if (!idx) return out;
    for (const auto& r : table.rows()) {
        const auto& v = r.values[*idx];
        auto it = std::find_if(out.begin(), out.end(), [&](const auto& p) { return p.first == v; });
        if (it == out.end())
            out.emplace_back(v, 1);
        else
            ++it->second;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Beach monitoring series
// ---------------------------------------------------------------------------

enum class BeachColumn {
    date,
    lake_temp_c,
    lake_turb_ntru,
    wave_ht_ft,
    ll_preday,
    airport_rain48w_in,
    ecoli_ave_cfu,
    ecoli_binary,
};

inline constexpr std::array<std::pair<BeachColumn, std::string_view>, 8> kBeachColumnNames{{
    {BeachColumn::date, "Date"},
    {BeachColumn::lake_temp_c, "Lake_Temp_C"},
    {BeachColumn::lake_turb_ntru, "Lake_Turb_NTRU"},
    {BeachColumn::wave_ht_ft, "WaveHt_Ft"},
    {BeachColumn::ll_preday, "LL_PreDay"},
    {BeachColumn::airport_rain48w_in, "AirportRain48W_in"},
    {BeachColumn::ecoli_ave_cfu, "EcoliAve_CFU"},
    {BeachColumn::ecoli_binary, "Ecoli_binary"},
}};

// The five numeric covariates, in canonical order.
inline constexpr std::array<BeachColumn, 5> kBeachCovariates{
    BeachColumn::lake_temp_c, BeachColumn::lake_turb_ntru, BeachColumn::wave_ht_ft,
    BeachColumn::ll_preday,   BeachColumn::airport_rain48w_in,
};

inline std::string_view column_name(BeachColumn c) {
    for (const auto& [col, name] : kBeachColumnNames)
        if (col == c) return name;
    return {};
}

inline std::optional<BeachColumn> beach_column_from_name(std::string_view name) {
    for (const auto& [col, name_] : kBeachColumnNames)
        if (name_ == name) return col;
    return std::nullopt;
}

inline std::chrono::year_month_day parse_date(std::string_view s) {
    int y = 0;
    unsigned m = 0, d = 0;
    char tail = 0;
    std::string buf(s);
    if (s.size() != 10 || std::sscanf(buf.c_str(), "%4d-%2u-%2u%c", &y, &m, &d, &tail) != 3)
        throw DataError("bad date '" + buf + "' (expected YYYY-MM-DD)");
    std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
    if (!ymd.ok()) throw DataError("invalid calendar date '" + buf + "'");
    return ymd;
}

inline std::string format_date(const std::chrono::year_month_day& d) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(d.year()), static_cast<unsigned>(d.month()),
                  static_cast<unsigned>(d.day()));
    return buf;
}

struct BeachRecord {
    std::chrono::year_month_day date{};
    double lake_temp_c = 0;
    double lake_turb_ntru = 0;
    double wave_ht_ft = 0;
    double ll_preday = 0;
    double airport_rain48w_in = 0;
    std::optional<double> ecoli_ave_cfu;
    std::optional<int> ecoli_binary;

    double covariate(BeachColumn c) const {
        switch (c) {
        case BeachColumn::lake_temp_c: return lake_temp_c;
        case BeachColumn::lake_turb_ntru: return lake_turb_ntru;
        case BeachColumn::wave_ht_ft: return wave_ht_ft;
        case BeachColumn::ll_preday: return ll_preday;
        case BeachColumn::airport_rain48w_in: return airport_rain48w_in;
        case BeachColumn::ecoli_ave_cfu: return ecoli_ave_cfu.value_or(0.0);
        case BeachColumn::ecoli_binary: return ecoli_binary.value_or(0);
        case BeachColumn::date: break;
        }
        throw DataError("date is not a numeric column");
    }

    bool operator==(const BeachRecord&) const = default;
};

// Printed decimals per numeric column, so re-rendering keeps source precision.
struct BeachPrecision {
    int lake_temp_c = 1;
    int lake_turb_ntru = 1;
    int wave_ht_ft = 2;
    int ll_preday = 3;
    int airport_rain48w_in = 1;
    int ecoli_ave_cfu = 1;

    int of(BeachColumn c) const {
        switch (c) {
        case BeachColumn::lake_temp_c: return lake_temp_c;
        case BeachColumn::lake_turb_ntru: return lake_turb_ntru;
        case BeachColumn::wave_ht_ft: return wave_ht_ft;
        case BeachColumn::ll_preday: return ll_preday;
        case BeachColumn::airport_rain48w_in: return airport_rain48w_in;
        case BeachColumn::ecoli_ave_cfu: return ecoli_ave_cfu;
        default: return 0;
        }
    }

    int& of(BeachColumn c) {
        switch (c) {
        case BeachColumn::lake_temp_c: return lake_temp_c;
        case BeachColumn::lake_turb_ntru: return lake_turb_ntru;
        case BeachColumn::wave_ht_ft: return wave_ht_ft;
        case BeachColumn::ll_preday: return ll_preday;
        case BeachColumn::airport_rain48w_in: return airport_rain48w_in;
        default: return ecoli_ave_cfu;
        }
    }

    bool operator==(const BeachPrecision&) const = default;
};

class BeachSeries {
public:
    BeachSeries() = default;

    BeachSeries(std::vector<BeachRecord> rows, bool has_cfu, bool has_binary, BeachPrecision precision = {})
        : rows_(std::move(rows)), has_cfu_(has_cfu), has_binary_(has_binary), precision_(precision) {
        std::set<int> seen;
        for (const auto& r : rows_) {
            auto key = static_cast<int>(std::chrono::sys_days(r.date).time_since_epoch().count());
            if (!seen.insert(key).second) throw DataError("duplicate date " + format_date(r.date));
            if (r.lake_turb_ntru < 0 || r.wave_ht_ft < 0 || r.airport_rain48w_in < 0)
                throw DataError(format_date(r.date) + ": turbidity, wave height and rainfall must be >= 0");
            if (r.ecoli_ave_cfu && *r.ecoli_ave_cfu < 0)
                throw DataError(format_date(r.date) + ": EcoliAve_CFU must be >= 0");
            if (r.ecoli_binary && *r.ecoli_binary != 0 && *r.ecoli_binary != 1)
                throw DataError(format_date(r.date) + ": Ecoli_binary must be 0 or 1");
            if (r.ecoli_ave_cfu.has_value() != has_cfu_)
                throw DataError(format_date(r.date) + ": EcoliAve_CFU presence disagrees with the series");
            if (r.ecoli_binary.has_value() != has_binary_)
                throw DataError(format_date(r.date) + ": Ecoli_binary presence disagrees with the series");
        }
    }

    const std::vector<BeachRecord>& rows() const { return rows_; }
    std::size_t size() const { return rows_.size(); }
    bool has_cfu() const { return has_cfu_; }
    bool has_binary() const { return has_binary_; }
    const BeachPrecision& precision() const { return precision_; }

    // Copy with the label columns removed.
    BeachSeries without_labels() const {
        auto rows = rows_;
        for (auto& r : rows) {
            r.ecoli_ave_cfu.reset();
            r.ecoli_binary.reset();
        }
        return BeachSeries(std::move(rows), false, false, precision_);
    }

    bool operator==(const BeachSeries&) const = default;

private:
    std::vector<BeachRecord> rows_;
    bool has_cfu_ = false;
    bool has_binary_ = false;
    BeachPrecision precision_;
};

// Whitespace-delimited (space or tab) beach table with a header row naming
// the columns. Date and the five covariates are required.
inline BeachSeries parse_beach_table(std::string_view body) {
    std::vector<BeachColumn> header;
    std::vector<BeachRecord> rows;
    BeachPrecision precision{0, 0, 0, 0, 0, 0};
    std::size_t line_no = 0;
    for (auto line : text::lines(body)) {
        ++line_no;
        auto toks = text::split_ws(line);
        if (toks.empty()) continue;
        if (header.empty()) {
            for (const auto& name : toks) {
                auto col = beach_column_from_name(name);
                if (!col) throw DataError("unknown column '" + name + "'");
                if (std::find(header.begin(), header.end(), *col) != header.end())
                    throw DataError("duplicate column '" + name + "'");
                header.push_back(*col);
            }
            auto required = std::vector<BeachColumn>(kBeachCovariates.begin(), kBeachCovariates.end());
            required.push_back(BeachColumn::date);
            for (auto c : required)
                if (std::find(header.begin(), header.end(), c) == header.end())
                    throw DataError("missing required column '" + std::string(column_name(c)) + "'");
            continue;
        }
        if (toks.size() != header.size())
            throw DataError("line " + std::to_string(line_no) + ": " + std::to_string(toks.size()) + " cells for " +
                            std::to_string(header.size()) + " columns");
        BeachRecord rec;
        for (std::size_t i = 0; i < header.size(); ++i) {
            const auto& cell = toks[i];
            auto col = header[i];
            if (col == BeachColumn::date) {
                rec.date = parse_date(cell);
                continue;
            }
            if (col == BeachColumn::ecoli_binary) {
                auto v = text::parse_int(cell);
                if (!v || (*v != 0 && *v != 1))
                    throw DataError("line " + std::to_string(line_no) + ": Ecoli_binary must be 0 or 1, got '" +
                                    cell + "'");
                rec.ecoli_binary = static_cast<int>(*v);
                continue;
            }
            auto v = text::parse_double(cell);
            if (!v)
                throw DataError("line " + std::to_string(line_no) + ": non-numeric value '" + cell + "' in " +
                                std::string(column_name(col)));
            precision.of(col) = std::max(precision.of(col), text::printed_decimals(cell));
            switch (col) {
            case BeachColumn::lake_temp_c: rec.lake_temp_c = *v; break;
            case BeachColumn::lake_turb_ntru: rec.lake_turb_ntru = *v; break;
            case BeachColumn::wave_ht_ft: rec.wave_ht_ft = *v; break;
            case BeachColumn::ll_preday: rec.ll_preday = *v; break;
            case BeachColumn::airport_rain48w_in: rec.airport_rain48w_in = *v; break;
            case BeachColumn::ecoli_ave_cfu: rec.ecoli_ave_cfu = *v; break;
            default: break;
            }
        }
        rows.push_back(rec);
    }
    if (header.empty()) throw DataError("table has no header line");
    bool has_cfu = std::find(header.begin(), header.end(), BeachColumn::ecoli_ave_cfu) != header.end();
    bool has_binary = std::find(header.begin(), header.end(), BeachColumn::ecoli_binary) != header.end();
    return BeachSeries(std::move(rows), has_cfu, has_binary, precision);
}

} // namespace metaprobe
