#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "metaprobe/baselines.hpp"
#include "metaprobe/concurrency.hpp"
#include "metaprobe/digest.hpp"
#include "metaprobe/error.hpp"
#include "metaprobe/fixtures.hpp"
#include "metaprobe/ingest.hpp"
#include "metaprobe/live.hpp"
#include "metaprobe/metrics.hpp"
#include "metaprobe/promptkit.hpp"
#include "metaprobe/providers.hpp"
#include "metaprobe/respparse.hpp"

namespace metaprobe {

inline constexpr std::string_view kHarnessVersion = "0.3.0";

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

enum class Task {
    empo3_zs,
    empo3_fs,
    field_predict,
    ecoli_binary_zs,
    ecoli_binary_fs,
    ecoli_regress_zs,
    ecoli_regress_fs,
    baseline_classify,
    baseline_regress,
    ablation,
};

inline constexpr std::pair<Task, std::string_view> kTaskNames[] = {
    {Task::empo3_zs, "empo3-zs"},
    {Task::empo3_fs, "empo3-fs"},
    {Task::field_predict, "field-predict"},
    {Task::ecoli_binary_zs, "ecoli-binary-zs"},
    {Task::ecoli_binary_fs, "ecoli-binary-fs"},
    {Task::ecoli_regress_zs, "ecoli-regress-zs"},
    {Task::ecoli_regress_fs, "ecoli-regress-fs"},
    {Task::baseline_classify, "baseline-classify"},
    {Task::baseline_regress, "baseline-regress"},
    {Task::ablation, "ablation"},
};

inline std::string_view to_string(Task t) {
    for (const auto& [k, v] : kTaskNames)
        if (k == t) return v;
    return "?";
}

inline Task task_from_string(std::string_view s) {
    for (const auto& [k, v] : kTaskNames)
        if (v == s) return k;
    throw ConfigError("unknown task '" + std::string(s) + "'");
}

inline bool is_baseline(Task t) { return t == Task::baseline_classify || t == Task::baseline_regress; }
inline bool is_study_task(Task t) {
    return t == Task::empo3_zs || t == Task::empo3_fs || t == Task::field_predict || t == Task::ablation;
}
inline bool is_regression_task(Task t) {
    return t == Task::ecoli_regress_zs || t == Task::ecoli_regress_fs || t == Task::baseline_regress;
}

enum class BaselineModel { random_forest, linear, gbt };

inline std::string_view to_string(BaselineModel m) {
    switch (m) {
    case BaselineModel::random_forest: return "random-forest";
    case BaselineModel::linear: return "linear";
    case BaselineModel::gbt: return "gbt";
    }
    return "?";
}

inline BaselineModel baseline_model_from_string(std::string_view s) {
    for (auto m : {BaselineModel::random_forest, BaselineModel::linear, BaselineModel::gbt})
        if (to_string(m) == s) return m;
    throw ConfigError("unknown baseline model '" + std::string(s) + "'");
}

struct ExperimentConfig {
    std::string id;
    Task task = Task::empo3_zs;
    std::string query_dataset;
    std::optional<std::string> support_dataset;
    std::string target_field = "empo_3";
    std::optional<LabelSet> labels; // unset with labels_from_data for "from-data"
    bool labels_from_data = false;
    std::string provider_id = "echo";
    std::string model;
    std::string display_name; // row label in rendered tables; derived when empty
    GenParams gen_params;
    std::size_t trials = 1;
    std::uint64_t seed = 42;
    std::optional<std::string> cassette_path;
    std::vector<std::string> drop_fields;
    std::optional<std::size_t> max_support;
    std::vector<std::string> script; // scripted provider responses
    std::size_t parallelism = 1;
    BaselineModel baseline_model = BaselineModel::random_forest;
    RFParams rf;
    GbtParams gbt;
    std::optional<std::size_t> cv_folds;

    // Throws ConfigError on the first violated invariant.
    void validate() const {
        if (id.empty()) throw ConfigError("experiment id is empty");
        if (id.find('/') != std::string::npos || id.find('\\') != std::string::npos || id == "." || id == "..")
            throw ConfigError("experiment id '" + id + "' is not a valid directory name");
        if (query_dataset.empty()) throw ConfigError(id + ": query_dataset is required");
        if (trials < 1) throw ConfigError(id + ": trials must be >= 1");
        if (parallelism < 1) throw ConfigError(id + ": parallelism must be >= 1");
        gen_params.validate();
        bool few_shot = task == Task::empo3_fs || task == Task::ecoli_binary_fs || task == Task::ecoli_regress_fs;
        if (few_shot && !support_dataset) throw ConfigError(id + ": task " + std::string(to_string(task)) + " needs support_dataset");
        bool zero_shot = task == Task::empo3_zs || task == Task::ecoli_binary_zs || task == Task::ecoli_regress_zs;
        if (zero_shot && support_dataset)
            throw ConfigError(id + ": task " + std::string(to_string(task)) + " takes no support_dataset");
        if (is_baseline(task) && !support_dataset && !cv_folds)
            throw ConfigError(id + ": baselines need a support_dataset (training set) or cv_folds");
        if (is_study_task(task) && !labels && !labels_from_data)
            throw ConfigError(id + ": classification tasks need labels (a list or \"from-data\")");
        if (task == Task::ablation && drop_fields.empty()) throw ConfigError(id + ": ablation needs drop_fields");
        if (task == Task::baseline_classify && baseline_model != BaselineModel::random_forest)
            throw ConfigError(id + ": only random-forest is available for classification baselines");
        if (std::find(drop_fields.begin(), drop_fields.end(), target_field) != drop_fields.end())
            throw ConfigError(id + ": cannot drop the target field '" + target_field + "'");
        if (provider_id.empty()) throw ConfigError(id + ": provider_id is empty");
        if (provider_id == "scripted" && script.empty()) throw ConfigError(id + ": scripted provider needs a script");
        rf.validate();
        gbt.validate();
        if (cv_folds && *cv_folds < 2) throw ConfigError(id + ": cv_folds must be >= 2");
    }
};

namespace detail {

template <class T>
void get_opt(const nlohmann::json& j, const char* key, T& out) {
    if (j.contains(key) && !j.at(key).is_null()) j.at(key).get_to(out);
}

} // namespace detail

inline void to_json(nlohmann::json& j, const ExperimentConfig& c) {
    j = nlohmann::json::object();
    j["id"] = c.id;
    j["task"] = to_string(c.task);
    j["query_dataset"] = c.query_dataset;
    j["support_dataset"] = c.support_dataset ? nlohmann::json(*c.support_dataset) : nlohmann::json(nullptr);
    j["target_field"] = c.target_field;
    if (c.labels)
        j["labels"] = c.labels->labels();
    else
        j["labels"] = c.labels_from_data ? nlohmann::json("from-data") : nlohmann::json(nullptr);
    j["provider_id"] = c.provider_id;
    j["model"] = c.model;
    j["display_name"] = c.display_name;
    j["gen_params"] = c.gen_params;
    j["trials"] = c.trials;
    j["seed"] = c.seed;
    j["cassette_path"] = c.cassette_path ? nlohmann::json(*c.cassette_path) : nlohmann::json(nullptr);
    j["drop_fields"] = c.drop_fields;
    j["max_support"] = c.max_support ? nlohmann::json(*c.max_support) : nlohmann::json(nullptr);
    j["script"] = c.script;
    j["parallelism"] = c.parallelism;
    j["baseline_model"] = to_string(c.baseline_model);
    j["rf"] = c.rf;
    j["gbt"] = c.gbt;
    j["cv_folds"] = c.cv_folds ? nlohmann::json(*c.cv_folds) : nlohmann::json(nullptr);
}

// Unknown keys are rejected so typos do not silently fall back to defaults.
inline ExperimentConfig parse_config(const nlohmann::json& j) {
    static const std::vector<std::string> kKeys = {
        "id",          "task",         "query_dataset", "support_dataset", "target_field", "labels",
        "provider_id", "model",        "display_name",  "gen_params",      "trials",       "seed",
        "cassette_path", "drop_fields", "max_support",  "script",          "parallelism",  "baseline_model",
        "rf",          "gbt",          "cv_folds",      "comment"};
    if (!j.is_object()) throw ConfigError("experiment config must be a JSON object");
    for (const auto& [k, v] : j.items())
        if (std::find(kKeys.begin(), kKeys.end(), k) == kKeys.end()) throw ConfigError("unknown config key '" + k + "'");
    ExperimentConfig c;
    try {
        detail::get_opt(j, "id", c.id);
        if (!j.contains("task")) throw ConfigError("config has no task");
        c.task = task_from_string(j.at("task").get<std::string>());
        detail::get_opt(j, "query_dataset", c.query_dataset);
        if (j.contains("support_dataset") && !j["support_dataset"].is_null())
            c.support_dataset = j["support_dataset"].get<std::string>();
        detail::get_opt(j, "target_field", c.target_field);
        if (j.contains("labels") && !j["labels"].is_null()) {
            if (j["labels"].is_string()) {
                if (j["labels"].get<std::string>() != "from-data")
                    throw ConfigError("labels must be a list or \"from-data\"");
                c.labels_from_data = true;
            } else {
                c.labels = LabelSet(j["labels"].get<std::vector<std::string>>());
            }
        }
        detail::get_opt(j, "provider_id", c.provider_id);
        detail::get_opt(j, "model", c.model);
        detail::get_opt(j, "display_name", c.display_name);
        detail::get_opt(j, "gen_params", c.gen_params);
        detail::get_opt(j, "trials", c.trials);
        detail::get_opt(j, "seed", c.seed);
        if (j.contains("cassette_path") && !j["cassette_path"].is_null())
            c.cassette_path = j["cassette_path"].get<std::string>();
        detail::get_opt(j, "drop_fields", c.drop_fields);
        if (j.contains("max_support") && !j["max_support"].is_null()) c.max_support = j["max_support"].get<std::size_t>();
        detail::get_opt(j, "script", c.script);
        detail::get_opt(j, "parallelism", c.parallelism);
        if (j.contains("baseline_model")) c.baseline_model = baseline_model_from_string(j["baseline_model"].get<std::string>());
        c.rf.seed = c.seed;
        c.gbt.seed = c.seed;
        if (j.contains("rf")) {
            c.rf = j["rf"].get<RFParams>();
            if (!j["rf"].contains("seed")) c.rf.seed = c.seed;
        }
        if (j.contains("gbt")) {
            c.gbt = j["gbt"].get<GbtParams>();
            if (!j["gbt"].contains("seed")) c.gbt.seed = c.seed;
        }
        if (j.contains("cv_folds") && !j["cv_folds"].is_null()) c.cv_folds = j["cv_folds"].get<std::size_t>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("bad config value: ") + e.what());
    }
    return c;
}

inline std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw ConfigError("cannot read " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// A config file holds one experiment object or {"experiments": [...]}.
// Experiments without an id take the file stem (suffixed by position).
inline std::vector<ExperimentConfig> load_config_file(const std::filesystem::path& path) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
    std::vector<ExperimentConfig> out;
    auto stem = path.stem().string();
    if (j.is_object() && j.contains("experiments")) {
        const auto& list = j["experiments"];
        if (!list.is_array() || list.empty()) throw ConfigError(path.string() + ": experiments must be a non-empty list");
        for (std::size_t i = 0; i < list.size(); ++i) {
            out.push_back(parse_config(list[i]));
            if (out.back().id.empty()) out.back().id = fmt::format("{}-{}", stem, i + 1);
        }
    } else {
        out.push_back(parse_config(j));
        if (out.back().id.empty()) out.back().id = stem;
    }
    for (const auto& c : out) c.validate();
    return out;
}

// ---------------------------------------------------------------------------
// Datasets
// ---------------------------------------------------------------------------

// A fixture name, or a file: tab-separated or whitespace study tables, or a
// beach table (header starting with Date). Relative paths resolve against
// `base_dir`.
inline Dataset load_dataset(const std::string& ref, const std::filesystem::path& base_dir = {}) {
    if (is_fixture_name(ref)) return load_fixture(ref);
    std::filesystem::path p(ref);
    if (p.is_relative() && !base_dir.empty() && !std::filesystem::exists(p)) p = base_dir / p;
    if (!std::filesystem::exists(p)) throw ConfigError("dataset '" + ref + "' is neither a fixture nor a readable file");
    auto body = read_file(p);
    std::string first;
    for (auto line : text::lines(body))
        if (!text::trim(line).empty()) {
            first = std::string(line);
            break;
        }
    auto header = text::split_ws(first);
    if (!header.empty() && header.front() == "Date") return parse_beach_table(body);
    if (first.find('\t') != std::string::npos) return parse_study_tsv(body, p.stem().string());
    return parse_study_table(body, p.stem().string(), std::nullopt, study_vocabulary());
}

inline StudyTable require_study(const Dataset& d, const std::string& ref) {
    if (auto* s = std::get_if<StudyTable>(&d)) return *s;
    throw ConfigError("dataset '" + ref + "' is not a study table");
}

inline BeachSeries require_beach(const Dataset& d, const std::string& ref) {
    if (auto* s = std::get_if<BeachSeries>(&d)) return *s;
    throw ConfigError("dataset '" + ref + "' is not a beach series");
}

// Binary labels from Ecoli_binary, else derived from EcoliAve_CFU.
inline std::optional<std::vector<int>> binary_truth(const BeachSeries& s) {
    std::vector<int> out;
    if (s.has_binary()) {
        for (const auto& r : s.rows()) out.push_back(*r.ecoli_binary);
        return out;
    }
    if (s.has_cfu()) {
        for (const auto& r : s.rows()) out.push_back(binarize_cfu(*r.ecoli_ave_cfu));
        return out;
    }
    return std::nullopt;
}

inline BeachSeries with_binary_labels(const BeachSeries& s) {
    if (s.has_binary()) return s;
    auto bits = binary_truth(s);
    if (!bits) throw ConfigError("series has neither Ecoli_binary nor EcoliAve_CFU");
    auto rows = s.rows();
    for (std::size_t i = 0; i < rows.size(); ++i) {
        rows[i].ecoli_binary = (*bits)[i];
        rows[i].ecoli_ave_cfu.reset();
    }
    return BeachSeries(std::move(rows), false, true, s.precision());
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

struct TrialRecord {
    std::size_t trial = 0;
    std::string response_sha256;
    bool valid = false;
    std::optional<std::string> diagnostic;
    std::optional<MetricsReport> classification;
    std::optional<RegressionReport> regression;

    bool operator==(const TrialRecord&) const = default;
};

struct ExperimentReport {
    std::string experiment_id;
    std::string task;
    std::string setting; // "ZS", "FS" or "baseline"
    std::string display_name;
    std::string metric_family; // "classification" or "regression"
    std::string mode;          // "mock", "replay", "live", "baseline"
    nlohmann::json config;
    nlohmann::json provider;
    std::vector<std::string> prompt_digests;
    std::vector<TrialRecord> trials;
    TrialStats stats;
    std::vector<std::string> diagnostics;
    std::string harness_version{kHarnessVersion};

    bool operator==(const ExperimentReport&) const = default;
};

inline void to_json(nlohmann::json& j, const TrialRecord& t) {
    j = {{"trial", t.trial},
         {"response_sha256", t.response_sha256},
         {"valid", t.valid},
         {"diagnostic", t.diagnostic ? nlohmann::json(*t.diagnostic) : nlohmann::json(nullptr)},
         {"classification", t.classification ? nlohmann::json(*t.classification) : nlohmann::json(nullptr)},
         {"regression", t.regression ? nlohmann::json(*t.regression) : nlohmann::json(nullptr)}};
}
inline void from_json(const nlohmann::json& j, TrialRecord& t) {
    j.at("trial").get_to(t.trial);
    j.at("response_sha256").get_to(t.response_sha256);
    j.at("valid").get_to(t.valid);
    t.diagnostic = j.at("diagnostic").is_null() ? std::nullopt : std::optional(j.at("diagnostic").get<std::string>());
    t.classification = j.at("classification").is_null() ? std::nullopt
                                                         : std::optional(j.at("classification").get<MetricsReport>());
    t.regression =
        j.at("regression").is_null() ? std::nullopt : std::optional(j.at("regression").get<RegressionReport>());
}

inline void to_json(nlohmann::json& j, const ExperimentReport& r) {
    j = {{"experiment_id", r.experiment_id},
         {"task", r.task},
         {"setting", r.setting},
         {"display_name", r.display_name},
         {"metric_family", r.metric_family},
         {"mode", r.mode},
         {"config", r.config},
         {"provider", r.provider},
         {"prompt_digests", r.prompt_digests},
         {"trials", r.trials},
         {"stats", r.stats},
         {"diagnostics", r.diagnostics},
         {"harness_version", r.harness_version}};
}
inline void from_json(const nlohmann::json& j, ExperimentReport& r) {
    j.at("experiment_id").get_to(r.experiment_id);
    j.at("task").get_to(r.task);
    j.at("setting").get_to(r.setting);
    j.at("display_name").get_to(r.display_name);
    j.at("metric_family").get_to(r.metric_family);
    j.at("mode").get_to(r.mode);
    r.config = j.at("config");
    r.provider = j.at("provider");
    j.at("prompt_digests").get_to(r.prompt_digests);
    j.at("trials").get_to(r.trials);
    j.at("stats").get_to(r.stats);
    j.at("diagnostics").get_to(r.diagnostics);
    j.at("harness_version").get_to(r.harness_version);
}

// ---------------------------------------------------------------------------
// Rendering
// ---------------------------------------------------------------------------

enum class ReportFormat { table, json, csv };

inline ReportFormat report_format_from_string(std::string_view s) {
    if (s == "table") return ReportFormat::table;
    if (s == "json") return ReportFormat::json;
    if (s == "csv") return ReportFormat::csv;
    throw ConfigError("unknown report format '" + std::string(s) + "'");
}

namespace detail {

inline const std::vector<std::pair<std::string, std::string>>& metric_headers(const std::string& family) {
    static const std::vector<std::pair<std::string, std::string>> cls = {
        {"accuracy", "Acc."}, {"macro_precision", "Prec."}, {"macro_recall", "Rec."}, {"macro_f1", "F1"}};
    static const std::vector<std::pair<std::string, std::string>> reg = {
        {"mae", "MAE"}, {"rmse", "RMSE"}, {"mse", "MSE"}, {"r2", "R2"}};
    return family == "regression" ? reg : cls;
}

inline std::string row_label(const ExperimentReport& r) {
    if (r.setting == "baseline") return r.display_name;
    return fmt::format("{} ({})", r.display_name, r.setting);
}

inline std::string format_metric(const std::string& family, double v) {
    return family == "regression" ? fmt::format("{:.2f}", v) : fmt::format("{:.4f}", v);
}

// Left-aligned first column, right-aligned rest, rules between sections.
inline std::string aligned(const std::vector<std::string>& header, const std::vector<std::vector<std::string>>& rows) {
    std::vector<std::size_t> width(header.size());
    for (std::size_t c = 0; c < header.size(); ++c) width[c] = header[c].size();
    for (const auto& row : rows)
        for (std::size_t c = 0; c < row.size() && c < width.size(); ++c) width[c] = std::max(width[c], row[c].size());
    std::size_t total = 0;
    for (auto w : width) total += w + 2;
    std::string rule(total - 2, '-');
    auto line = [&](const std::vector<std::string>& cells) {
        std::string s;
        for (std::size_t c = 0; c < cells.size(); ++c) {
            if (c) s += "  ";
            s += c == 0 ? fmt::format("{:<{}}", cells[c], width[c]) : fmt::format("{:>{}}", cells[c], width[c]);
        }
        while (!s.empty() && s.back() == ' ') s.pop_back();
        return s + "\n";
    };
    std::string out = rule + "\n" + line(header) + rule + "\n";
    for (const auto& row : rows) out += row.empty() ? rule + "\n" : line(row);
    return out + rule + "\n";
}

// Point-estimate table: ZS rows, then FS rows, then baselines.
inline std::string family_table(const std::vector<const ExperimentReport*>& reports, const std::string& family) {
    const auto& metrics = metric_headers(family);
    std::vector<std::string> header{"Model"};
    for (const auto& [k, h] : metrics) header.push_back(h);
    std::vector<std::vector<std::string>> rows;
    for (const char* setting : {"ZS", "FS", "baseline"}) {
        bool any = false;
        for (const auto* r : reports) {
            if (r->setting != setting) continue;
            if (!any && !rows.empty()) rows.emplace_back();
            any = true;
            std::vector<std::string> row{row_label(*r)};
            for (const auto& [k, h] : metrics) {
                const auto* s = r->stats.find(k);
                row.push_back(s ? format_metric(family, s->mean) : "NA");
            }
            rows.push_back(std::move(row));
        }
    }
    return aligned(header, rows);
}

// Repeated-trial table: one block of metric rows per model.
inline std::string stats_table(const std::vector<const ExperimentReport*>& reports, const std::string& family) {
    const auto& metrics = metric_headers(family);
    std::vector<std::string> header{"Model", "Metric", "Mean", "Std", "Min", "Max", "Valid N"};
    std::vector<std::vector<std::string>> rows;
    for (const auto* r : reports) {
        if (!rows.empty()) rows.emplace_back();
        bool first = true;
        for (const auto& [k, h] : metrics) {
            const auto* s = r->stats.find(k);
            std::vector<std::string> row{first ? row_label(*r) : "", h};
            if (s)
                for (double v : {s->mean, s->stddev, s->min, s->max}) row.push_back(format_metric(family, v));
            else
                row.insert(row.end(), 4, "NA");
            row.push_back(fmt::format("{}/{}", r->stats.valid_n, r->stats.attempted_n));
            rows.push_back(std::move(row));
            first = false;
        }
    }
    return aligned(header, rows);
}

inline std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

} // namespace detail

inline std::string render_report(const std::vector<ExperimentReport>& reports, ReportFormat format) {
    if (reports.empty()) throw ConfigError("no reports to render");
    switch (format) {
    case ReportFormat::json: {
        nlohmann::json j = reports.size() == 1 ? nlohmann::json(reports.front()) : nlohmann::json(reports);
        return j.dump(2) + "\n";
    }
    case ReportFormat::csv: {
        static const char* kMetrics[] = {"accuracy", "macro_precision", "macro_recall", "macro_f1",
                                         "mae",      "rmse",            "mse",          "r2"};
        std::string out = "experiment_id,model,setting,task,valid_n,attempted_n";
        for (const char* m : kMetrics) out += fmt::format(",{0}_mean,{0}_std", m);
        out += "\n";
        for (const auto& r : reports) {
            out += fmt::format("{},{},{},{},{},{}", detail::csv_escape(r.experiment_id),
                               detail::csv_escape(r.display_name), r.setting, r.task, r.stats.valid_n,
                               r.stats.attempted_n);
            for (const char* m : kMetrics) {
                const auto* s = r.stats.find(m);
                out += s ? fmt::format(",{},{}", s->mean, s->stddev) : std::string(",,");
            }
            out += "\n";
        }
        return out;
    }
    case ReportFormat::table: {
        std::string out;
        for (const char* family : {"classification", "regression"}) {
            std::vector<const ExperimentReport*> single, repeated;
            for (const auto& r : reports) {
                if (r.metric_family != family) continue;
                (r.stats.attempted_n > 1 ? repeated : single).push_back(&r);
            }
            if (!single.empty()) {
                if (!out.empty()) out += "\n";
                out += detail::family_table(single, family);
            }
            if (!repeated.empty()) {
                if (!out.empty()) out += "\n";
                out += detail::stats_table(repeated, family);
            }
        }
        return out;
    }
    }
    throw ConfigError("unknown report format");
}

// Reads <dir>/report.json, or every <dir>/<id>/report.json sorted by id.
inline std::vector<ExperimentReport> read_reports(const std::filesystem::path& dir) {
    std::vector<std::filesystem::path> files;
    if (std::filesystem::exists(dir / "report.json")) {
        files.push_back(dir / "report.json");
    } else if (std::filesystem::is_directory(dir)) {
        for (const auto& e : std::filesystem::directory_iterator(dir))
            if (e.is_directory() && std::filesystem::exists(e.path() / "report.json"))
                files.push_back(e.path() / "report.json");
        std::sort(files.begin(), files.end());
    }
    if (files.empty()) throw ConfigError("no report.json under " + dir.string());
    std::vector<ExperimentReport> out;
    for (const auto& f : files) {
        try {
            out.push_back(nlohmann::json::parse(read_file(f)).get<ExperimentReport>());
        } catch (const nlohmann::json::exception& e) {
            throw DataError(f.string() + ": " + e.what());
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Execution
// ---------------------------------------------------------------------------

enum class RunMode { mock, replay, live };

inline std::string_view to_string(RunMode m) {
    switch (m) {
    case RunMode::mock: return "mock";
    case RunMode::replay: return "replay";
    case RunMode::live: return "live";
    }
    return "?";
}

struct RunOptions {
    bool live = false;
    std::optional<std::filesystem::path> cassette; // replay source; overrides config.cassette_path
    std::optional<std::size_t> trials;
    std::optional<std::uint64_t> seed;
    std::optional<std::filesystem::path> out_dir; // when set, report and cassette files are written here
    std::filesystem::path base_dir;               // for relative dataset and cassette paths
};

// Everything needed to query a model: the prompt plus the hidden truth.
struct PreparedTask {
    RenderedPrompt prompt;
    std::vector<std::string> truth_labels; // classification and binary tasks
    std::vector<double> truth_values;      // regression tasks
    bool has_truth = false;
};

inline std::string setting_of(Task t) {
    switch (t) {
    case Task::empo3_fs:
    case Task::ecoli_binary_fs:
    case Task::ecoli_regress_fs: return "FS";
    case Task::baseline_classify:
    case Task::baseline_regress: return "baseline";
    default: return "ZS";
    }
}

// Loads datasets and renders the prompt. Truth is captured before the query
// is masked and is not visible to the renderer.
inline PreparedTask prepare_task(const ExperimentConfig& cfg, const std::filesystem::path& base_dir = {}) {
    if (is_baseline(cfg.task)) throw ConfigError(cfg.id + ": baseline tasks have no prompt");
    PreparedTask out;
    auto query_data = load_dataset(cfg.query_dataset, base_dir);
    std::optional<Dataset> support_data;
    if (cfg.support_dataset) support_data = load_dataset(*cfg.support_dataset, base_dir);

    if (is_study_task(cfg.task)) {
        auto query = require_study(query_data, cfg.query_dataset);
        for (const auto& f : cfg.drop_fields) query = drop_field(query, f);
        if (!query.field_index(cfg.target_field))
            throw ConfigError("query has no '" + cfg.target_field + "' column");
        query = relabel(query, cfg.target_field);
        std::optional<StudyTable> support;
        if (support_data) {
            support = require_study(*support_data, *cfg.support_dataset);
            for (const auto& f : cfg.drop_fields)
                if (support->field_index(f)) support = drop_field(*support, f);
            if (!support->field_index(cfg.target_field))
                throw ConfigError("support has no '" + cfg.target_field + "' column");
            support = relabel(*support, cfg.target_field);
            if (cfg.max_support) support = head(*support, *cfg.max_support);
        }
        out.has_truth = !query.any_masked();
        LabelSet labels;
        if (cfg.labels) {
            labels = *cfg.labels;
        } else {
            std::vector<std::string> names;
            auto add = [&](const StudyTable& t) {
                for (const auto& [l, n] : label_counts(t))
                    if (l != kMaskToken && std::find(names.begin(), names.end(), l) == names.end()) names.push_back(l);
            };
            if (support) add(*support);
            add(query);
            labels = LabelSet(names);
        }
        // An unlabeled query can still be rendered; its placeholder cells are
        // re-masked and no truth is kept.
        if (!out.has_truth) {
            auto idx = *query.label_index();
            auto rows = query.rows();
            for (auto& r : rows) r.values[idx] = "unlabeled";
            query = StudyTable(query.study_id(), query.schema(), std::move(rows), query.label_field());
        }
        auto [masked, truth] = mask_labels(query);
        if (out.has_truth) out.truth_labels = std::move(truth);
        out.prompt = support ? render_few_shot_classification(*support, masked, cfg.target_field, labels)
                             : render_zero_shot_classification(masked, cfg.target_field, labels);
        return out;
    }

    auto query = require_beach(query_data, cfg.query_dataset);
    std::optional<BeachSeries> support;
    if (support_data) support = require_beach(*support_data, *cfg.support_dataset);
    if (support && cfg.max_support) {
        auto rows = support->rows();
        if (rows.size() > *cfg.max_support) rows.resize(*cfg.max_support);
        support = BeachSeries(std::move(rows), support->has_cfu(), support->has_binary(), support->precision());
    }
    if (cfg.task == Task::ecoli_binary_zs || cfg.task == Task::ecoli_binary_fs) {
        if (auto bits = binary_truth(query)) {
            out.has_truth = true;
            for (int b : *bits) out.truth_labels.push_back(std::to_string(b));
        }
        if (support) support = with_binary_labels(*support);
        out.prompt = render_binary_contamination(query.without_labels(), support);
        out.prompt.label_set = LabelSet({"0", "1"});
    } else if (cfg.task == Task::ecoli_regress_zs || cfg.task == Task::ecoli_regress_fs) {
        if (query.has_cfu()) {
            out.has_truth = true;
            for (const auto& r : query.rows()) out.truth_values.push_back(*r.ecoli_ave_cfu);
        }
        if (support && !support->has_cfu()) throw ConfigError("support series has no EcoliAve_CFU values");
        out.prompt = render_regression(query.without_labels(), support);
    } else {
        throw ConfigError(cfg.id + ": task " + std::string(to_string(cfg.task)) + " needs a study table");
    }
    return out;
}

inline ParsedBatch parse_response(const RenderedPrompt& prompt, const std::string& text) {
    switch (prompt.kind) {
    case TaskKind::classify_zs:
    case TaskKind::classify_fs: return parse_label_answers(text, prompt.n_expected, *prompt.label_set);
    case TaskKind::binary_zs:
    case TaskKind::binary_fs: return parse_bit_list(text, prompt.n_expected);
    case TaskKind::regress_zs:
    case TaskKind::regress_fs: return parse_numeric_list(text, prompt.n_expected);
    }
    return ParsedBatch::invalid(prompt.n_expected, "unknown prompt kind");
}

namespace detail {

inline std::string default_display_name(const ExperimentConfig& cfg) {
    if (!cfg.display_name.empty()) return cfg.display_name;
    if (cfg.task == Task::baseline_classify || cfg.task == Task::baseline_regress) {
        switch (cfg.baseline_model) {
        case BaselineModel::random_forest: return "Random Forest";
        case BaselineModel::linear: return "Linear Reg.";
        case BaselineModel::gbt: return "Gradient Boosting";
        }
    }
    return cfg.model.empty() ? cfg.provider_id : cfg.model;
}

inline std::string truth_text(const PreparedTask& t) {
    switch (t.prompt.kind) {
    case TaskKind::classify_zs:
    case TaskKind::classify_fs: return serialize_labels(t.truth_labels);
    case TaskKind::binary_zs:
    case TaskKind::binary_fs: {
        std::vector<int> bits;
        for (const auto& l : t.truth_labels) bits.push_back(l == "1" ? 1 : 0);
        return serialize_bits(bits);
    }
    default: return serialize_numbers(t.truth_values);
    }
}

inline void write_text(const std::filesystem::path& p, const std::string& s) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write " + p.string());
    out << s;
}

inline void write_report_files(const ExperimentReport& r, const std::filesystem::path& dir) {
    write_text(dir / "report.json", nlohmann::json(r).dump(2) + "\n");
    write_text(dir / "report.txt", render_report({r}, ReportFormat::table));
}

inline ExperimentConfig apply_overrides(ExperimentConfig cfg, const RunOptions& opt) {
    if (opt.trials) cfg.trials = *opt.trials;
    if (opt.seed) {
        cfg.seed = *opt.seed;
        cfg.rf.seed = *opt.seed;
        cfg.gbt.seed = *opt.seed;
    }
    if (opt.cassette) cfg.cassette_path = opt.cassette->string();
    cfg.validate();
    return cfg;
}

} // namespace detail

inline ExperimentReport run_baseline(const ExperimentConfig& config, const RunOptions& opt = {});

// load -> mask -> render -> complete x trials -> parse -> score -> aggregate.
// Invalid trials stay in the report; a run with zero valid trials still
// returns a report whose stats are unavailable.
inline ExperimentReport run_experiment(const ExperimentConfig& config, const RunOptions& opt = {}) {
    if (is_baseline(config.task)) return run_baseline(config, opt);
    auto cfg = detail::apply_overrides(config, opt);
    auto task = prepare_task(cfg, opt.base_dir);
    if (!task.has_truth)
        throw ConfigError(cfg.id + ": query dataset '" + cfg.query_dataset + "' carries no ground truth to score against");

    RunMode mode = opt.live ? RunMode::live : cfg.cassette_path ? RunMode::replay : RunMode::mock;
    if (opt.live && opt.cassette) throw ConfigError("--live and --cassette are mutually exclusive");

    std::unique_ptr<Cassette> source;
    std::unique_ptr<Provider> provider;
    switch (mode) {
    case RunMode::live: provider = make_live_provider(cfg.provider_id, cfg.model); break;
    case RunMode::replay: {
        std::filesystem::path p(*cfg.cassette_path);
        if (p.is_relative() && !opt.base_dir.empty() && !std::filesystem::exists(p)) p = opt.base_dir / p;
        if (!std::filesystem::exists(p)) throw ConfigError("cassette " + p.string() + " does not exist");
        source = std::make_unique<Cassette>(p);
        provider = std::make_unique<ReplayProvider>(cfg.provider_id, *source);
        break;
    }
    case RunMode::mock:
        if (cfg.provider_id == "echo") {
            provider = std::make_unique<EchoProvider>("echo", detail::truth_text(task));
        } else if (cfg.provider_id == "scripted") {
            provider = std::make_unique<ScriptedProvider>("scripted", cfg.script, detail::truth_text(task));
        } else {
            throw ConfigError("provider '" + cfg.provider_id +
                              "' is not a mock; run with --live or replay a cassette with --cassette");
        }
        break;
    }

    std::unique_ptr<Cassette> sink;
    if (opt.out_dir) {
        std::filesystem::create_directories(*opt.out_dir);
        auto path = *opt.out_dir / "cassette.jsonl";
        if (source && std::filesystem::exists(path) && std::filesystem::equivalent(path, *source->file()))
            throw ConfigError("replay cassette and output cassette are the same file");
        std::filesystem::remove(path);
        sink = std::make_unique<Cassette>(path);
    }

    std::vector<ModelResponse> responses(cfg.trials);
    parallel_for(cfg.trials, cfg.parallelism, [&](std::size_t t) {
        responses[t] = complete(*provider, task.prompt, cfg.gen_params, t);
        if (sink) {
            std::string ts = rfc3339_now();
            if (source)
                if (auto e = source->find(responses[t].prompt_digest, t, cfg.provider_id)) ts = e->timestamp;
            sink->record(responses[t].prompt_digest, t, responses[t].provider_id, responses[t].text, ts);
        }
    });

    ExperimentReport report;
    report.experiment_id = cfg.id;
    report.task = std::string(to_string(cfg.task));
    report.setting = setting_of(cfg.task);
    report.display_name = detail::default_display_name(cfg);
    report.metric_family = is_regression_task(cfg.task) ? "regression" : "classification";
    report.mode = std::string(to_string(mode));
    report.config = cfg;
    report.provider = {{"id", cfg.provider_id},
                       {"model", cfg.model},
                       {"live", provider->is_live()},
                       {"gen_params", cfg.gen_params},
                       {"gen_params_source", "harness defaults unless set in the config"}};
    report.prompt_digests.push_back(sha256_hex(task.prompt.text));
    report.diagnostics = task.prompt.diagnostics;

    std::vector<std::optional<MetricsReport>> cls;
    std::vector<std::optional<RegressionReport>> reg;
    for (std::size_t t = 0; t < cfg.trials; ++t) {
        const auto& resp = responses[t];
        TrialRecord rec;
        rec.trial = t;
        rec.response_sha256 = sha256_hex(resp.text);
        auto parsed = resp.valid ? parse_response(task.prompt, resp.text)
                                 : ParsedBatch::invalid(task.prompt.n_expected, "empty response");
        auto batch = ValidBatch::from(parsed);
        rec.valid = batch.has_value();
        if (!rec.valid) rec.diagnostic = parsed.diagnostic.value_or("invalid response");
        if (is_regression_task(cfg.task)) {
            if (batch) rec.regression = regression_report(task.truth_values, *batch);
            reg.push_back(rec.regression);
        } else {
            if (batch) rec.classification = classification_report(task.truth_labels, *batch);
            cls.push_back(rec.classification);
        }
        report.trials.push_back(std::move(rec));
    }
    report.stats = is_regression_task(cfg.task) ? aggregate_trials(reg) : aggregate_trials(cls);

    if (opt.out_dir) detail::write_report_files(report, *opt.out_dir);
    return report;
}

// Out-of-fold regression predictions.
inline std::vector<double> cross_val_predict_values(const FeatureMatrix& X, const std::vector<double>& y,
                                                    const ExperimentConfig& cfg, std::size_t k) {
    std::vector<double> out(X.n_rows);
    for (const auto& test : kfold_splits(X.n_rows, k, cfg.seed)) {
        std::vector<std::size_t> train;
        for (std::size_t i = 0; i < X.n_rows; ++i)
            if (!std::binary_search(test.begin(), test.end(), i)) train.push_back(i);
        std::vector<double> y_train;
        for (auto i : train) y_train.push_back(y[i]);
        auto Xtr = select_rows(X, train);
        FittedModel m = cfg.baseline_model == BaselineModel::linear ? fit_linear_regression(Xtr, y_train)
                        : cfg.baseline_model == BaselineModel::gbt  ? fit_gbt_regressor(Xtr, y_train, cfg.gbt)
                                                                    : fit_random_forest(Xtr, y_train, cfg.rf);
        auto pred = predict_values(m, select_rows(X, test));
        for (std::size_t j = 0; j < test.size(); ++j) out[test[j]] = pred[j];
    }
    return out;
}

// Traditional-model rows: train on support_dataset and score on the query,
// or k-fold cross-validate on the query when cv_folds is set.
inline ExperimentReport run_baseline(const ExperimentConfig& config, const RunOptions& opt) {
    auto cfg = detail::apply_overrides(config, opt);
    if (!is_baseline(cfg.task)) throw ConfigError(cfg.id + ": not a baseline task");
    auto query_data = load_dataset(cfg.query_dataset, opt.base_dir);
    std::optional<Dataset> train_data;
    if (cfg.support_dataset && !cfg.cv_folds) train_data = load_dataset(*cfg.support_dataset, opt.base_dir);

    ExperimentReport report;
    report.experiment_id = cfg.id;
    report.task = std::string(to_string(cfg.task));
    report.setting = "baseline";
    report.display_name = detail::default_display_name(cfg);
    report.metric_family = cfg.task == Task::baseline_regress ? "regression" : "classification";
    report.mode = "baseline";
    report.config = cfg;
    report.provider = {{"id", "baseline"}, {"model", to_string(cfg.baseline_model)}, {"live", false}};

    TrialRecord rec;
    rec.trial = 0;
    rec.valid = true;
    std::vector<std::optional<MetricsReport>> cls;
    std::vector<std::optional<RegressionReport>> reg;

    if (cfg.task == Task::baseline_classify) {
        std::vector<std::string> truth, pred;
        if (std::holds_alternative<StudyTable>(query_data)) {
            auto prep = [&](StudyTable t) {
                for (const auto& f : cfg.drop_fields)
                    if (t.field_index(f)) t = drop_field(t, f);
                if (!t.field_index(cfg.target_field)) throw ConfigError("table has no '" + cfg.target_field + "' column");
                t = relabel(t, cfg.target_field);
                if (t.any_masked()) throw ConfigError("table '" + t.study_id() + "' has masked labels");
                return t;
            };
            auto query = prep(std::get<StudyTable>(query_data));
            truth = query.column(cfg.target_field);
            if (cfg.cv_folds) {
                auto X = encode_one_hot(query);
                pred = cross_val_predict(X, truth, cfg.rf, *cfg.cv_folds);
            } else {
                auto train = prep(require_study(*train_data, *cfg.support_dataset));
                auto Xtr = encode_one_hot(train);
                auto model = fit_random_forest(Xtr, train.column(cfg.target_field), cfg.rf);
                if (model.degenerate) report.diagnostics.push_back("training labels hold a single class");
                pred = predict_labels(model, encode_one_hot(query, Xtr.vocab));
            }
        } else {
            auto query = require_beach(query_data, cfg.query_dataset);
            auto bits = binary_truth(query);
            if (!bits) throw ConfigError(cfg.id + ": query series carries no labels");
            for (int b : *bits) truth.push_back(std::to_string(b));
            if (cfg.cv_folds) {
                pred = cross_val_predict(encode_numeric(query), truth, cfg.rf, *cfg.cv_folds);
            } else {
                auto train = require_beach(*train_data, *cfg.support_dataset);
                auto tb = binary_truth(train);
                if (!tb) throw ConfigError(cfg.id + ": training series carries no labels");
                std::vector<std::string> y;
                for (int b : *tb) y.push_back(std::to_string(b));
                auto model = fit_random_forest(encode_numeric(train), y, cfg.rf);
                if (model.degenerate) report.diagnostics.push_back("training labels hold a single class");
                pred = predict_labels(model, encode_numeric(query));
            }
        }
        rec.classification = classification_report(std::span<const std::string>(truth), std::span<const std::string>(pred));
        cls.push_back(rec.classification);
        report.stats = aggregate_trials(cls);
    } else {
        auto query = require_beach(query_data, cfg.query_dataset);
        if (!query.has_cfu()) throw ConfigError(cfg.id + ": query series has no EcoliAve_CFU values");
        std::vector<double> truth, pred;
        for (const auto& r : query.rows()) truth.push_back(*r.ecoli_ave_cfu);
        auto Xq = encode_numeric(query);
        if (cfg.cv_folds) {
            pred = cross_val_predict_values(Xq, truth, cfg, *cfg.cv_folds);
        } else {
            auto train = require_beach(*train_data, *cfg.support_dataset);
            if (!train.has_cfu()) throw ConfigError(cfg.id + ": training series has no EcoliAve_CFU values");
            std::vector<double> y;
            for (const auto& r : train.rows()) y.push_back(*r.ecoli_ave_cfu);
            auto Xtr = encode_numeric(train);
            FittedModel m = cfg.baseline_model == BaselineModel::linear ? fit_linear_regression(Xtr, y)
                            : cfg.baseline_model == BaselineModel::gbt  ? fit_gbt_regressor(Xtr, y, cfg.gbt)
                                                                        : fit_random_forest(Xtr, y, cfg.rf);
            if (m.degenerate) report.diagnostics.push_back("model fit was degenerate");
            pred = predict_values(m, Xq);
        }
        rec.regression = regression_report(std::span<const double>(truth), std::span<const double>(pred));
        reg.push_back(rec.regression);
        report.stats = aggregate_trials(reg);
    }
    report.trials.push_back(std::move(rec));
    if (opt.out_dir) {
        std::filesystem::create_directories(*opt.out_dir);
        detail::write_report_files(report, *opt.out_dir);
    }
    return report;
}

// n completions of the identical prompt; the trial index keys the cassette.
inline ExperimentReport run_trials(ExperimentConfig config, std::size_t n, const RunOptions& opt = {}) {
    if (n < 1) throw ConfigError("trial count must be >= 1");
    config.trials = n;
    auto o = opt;
    o.trials.reset();
    return run_experiment(config, o);
}

} // namespace metaprobe
