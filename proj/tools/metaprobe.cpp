// metaprobe: render prompts, run experiments, fit baselines, print reports.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "metaprobe/metaprobe.hpp"

namespace fs = std::filesystem;
using namespace metaprobe;

namespace {

enum Exit { kOk = 0, kFailure = 1, kConfig = 2, kProvider = 3, kNoValidTrials = 4 };

int exit_code_for(const Error& e) {
    switch (e.kind()) {
    case ErrorKind::transport:
    case ErrorKind::cassette_miss: return kProvider;
    default: return kConfig;
    }
}

fs::path out_root(const std::optional<std::string>& flag) {
    if (flag) return *flag;
    if (auto env = getenv_str("METAPROBE_OUT_DIR")) return *env;
    return "out";
}

int cmd_ingest(const std::string& path) {
    auto data = load_dataset(path);
    if (auto* t = std::get_if<StudyTable>(&data)) {
        fmt::print("study {}: {} rows, {} fields\n", t->study_id(), t->size(), t->schema().size());
        for (const auto& f : t->schema()) {
            auto col = t->column(f);
            std::vector<std::string> distinct;
            for (const auto& v : col)
                if (std::find(distinct.begin(), distinct.end(), v) == distinct.end()) distinct.push_back(v);
            fmt::print("  {}{}: {} distinct\n", f, t->label_field() == f ? " (label)" : "", distinct.size());
        }
        for (const auto& [label, n] : label_counts(*t)) fmt::print("  {:>4}  {}\n", n, label);
    } else {
        const auto& s = std::get<BeachSeries>(data);
        fmt::print("beach series: {} rows", s.size());
        if (s.size()) fmt::print(", {} to {}", format_date(s.rows().front().date), format_date(s.rows().back().date));
        fmt::print("\n  EcoliAve_CFU: {}\n  Ecoli_binary: {}\n", s.has_cfu() ? "present" : "absent",
                   s.has_binary() ? "present" : "absent");
        if (auto bits = binary_truth(s)) {
            auto ones = std::count(bits->begin(), bits->end(), 1);
            fmt::print("  above threshold: {} of {}\n", ones, bits->size());
        }
    }
    return kOk;
}

int cmd_render(const std::string& config_path) {
    auto configs = load_config_file(config_path);
    auto base = fs::path(config_path).parent_path();
    bool any = false;
    for (const auto& cfg : configs) {
        if (is_baseline(cfg.task)) continue;
        auto task = prepare_task(cfg, base);
        if (configs.size() > 1) fmt::print("==> {} <==\n", cfg.id);
        fmt::print("{}", task.prompt.text);
        for (const auto& d : task.prompt.diagnostics) fmt::print(stderr, "note: {}\n", d);
        any = true;
    }
    if (!any) throw ConfigError("config has no prompt-based experiments");
    return kOk;
}

int run_configs(const std::string& config_path, const RunOptions& base_opt, const std::optional<std::string>& out,
                bool baselines_only) {
    auto configs = load_config_file(config_path);
    auto root = out_root(out);
    std::vector<ExperimentReport> reports;
    int rc = kOk;
    for (const auto& cfg : configs) {
        if (baselines_only && !is_baseline(cfg.task)) continue;
        auto opt = base_opt;
        opt.base_dir = fs::path(config_path).parent_path();
        opt.out_dir = root / cfg.id;
        auto r = run_experiment(cfg, opt);
        if (!r.stats.available()) {
            fmt::print(stderr, "{}: no valid trials out of {}\n", cfg.id, r.stats.attempted_n);
            rc = kNoValidTrials;
        }
        for (const auto& t : r.trials)
            if (!t.valid) fmt::print(stderr, "{}: trial {} invalid: {}\n", cfg.id, t.trial, t.diagnostic.value_or("?"));
        reports.push_back(std::move(r));
    }
    if (reports.empty()) throw ConfigError("config has no baseline experiments");
    fmt::print("{}", render_report(reports, ReportFormat::table));
    fmt::print(stderr, "reports written under {}\n", root.string());
    return rc;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"metaprobe: metadata-only LLM classification and contamination-risk evaluation"};
    app.require_subcommand(1);

    std::string ingest_path;
    auto* ingest = app.add_subcommand("ingest", "Load a dataset (fixture name or file) and summarize it");
    ingest->add_option("path", ingest_path, "Fixture name or table file")->required();

    std::string render_config;
    auto* render = app.add_subcommand("render", "Print the prompt(s) an experiment config produces");
    render->add_option("config", render_config, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);

    std::string run_config;
    bool live = false;
    std::optional<std::string> cassette, out;
    std::optional<std::size_t> trials;
    std::optional<std::uint64_t> seed;
    auto* run = app.add_subcommand("run", "Run experiments and write reports");
    run->add_option("config", run_config, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
    auto* live_flag = run->add_flag("--live", live, "Query live providers (needs <PROVIDER>_API_KEY)");
    run->add_option("--cassette", cassette, "Replay responses from this cassette")
        ->check(CLI::ExistingFile)
        ->excludes(live_flag);
    run->add_option("--trials", trials, "Override the trial count")->check(CLI::PositiveNumber);
    run->add_option("--seed", seed, "Override the seed");
    run->add_option("--out", out, "Output root (default $METAPROBE_OUT_DIR or ./out)");

    std::string baseline_config;
    std::optional<std::string> baseline_out;
    auto* baseline = app.add_subcommand("baseline", "Fit and score the traditional-model rows of a config");
    baseline->add_option("config", baseline_config, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
    baseline->add_option("--out", baseline_out, "Output root (default $METAPROBE_OUT_DIR or ./out)");

    std::string report_dir, report_format = "table";
    auto* report = app.add_subcommand("report", "Render reports found under a directory");
    report->add_option("dir", report_dir, "Output directory or a single experiment directory")->required();
    report->add_option("--format", report_format, "table, json or csv")
        ->check(CLI::IsMember({"table", "json", "csv"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : kConfig;
    }

    try {
        if (*ingest) return cmd_ingest(ingest_path);
        if (*render) return cmd_render(render_config);
        if (*run) {
            RunOptions opt;
            opt.live = live;
            if (cassette) opt.cassette = fs::absolute(*cassette);
            opt.trials = trials;
            opt.seed = seed;
            return run_configs(run_config, opt, out, false);
        }
        if (*baseline) return run_configs(baseline_config, RunOptions{}, baseline_out, true);
        if (*report) {
            auto reports = read_reports(report_dir);
            fmt::print("{}", render_report(reports, report_format_from_string(report_format)));
            return kOk;
        }
    } catch (const Error& e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return exit_code_for(e);
    } catch (const std::exception& e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return kFailure;
    }
    return kOk;
}
