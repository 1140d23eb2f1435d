// One line per acceptance criterion. Exit status is non-zero if any of 1-9 fails.
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>

#include <unistd.h>

#include "metaprobe/metaprobe.hpp"

using namespace metaprobe;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string golden(const std::string& name) {
    std::ifstream in(fs::path(METAPROBE_SOURCE_DIR) / "goldens" / name, std::ios::binary);
    if (!in) throw DataError("missing golden " + name);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

const LabelSet kEmpo15573({"Animal (saline)", "Plant (saline)", "Solid (non-saline)", "Aqueous (saline)"});

Outcome golden_prompts() {
    auto [masked, truth] = mask_labels(load_study_fixture("study-15573"));
    auto y2005 = load_beach_fixture("huntington-2005");
    std::pair<std::string, std::string> cases[] = {
        {render_zero_shot_classification(masked, "empo_3", kEmpo15573).text, "study-15573.classify-zs.txt"},
        {render_few_shot_classification(load_study_fixture("study-1728"), masked, "empo_3", kEmpo15573).text,
         "study-1728_to_study-15573.classify-fs.txt"},
        {render_binary_contamination(y2005).text, "huntington-2005.binary-zs.txt"},
        {render_binary_contamination(y2005, load_beach_fixture("huntington-2006")).text,
         "huntington-2006_to_huntington-2005.binary-fs.txt"},
    };
    for (const auto& [text, file] : cases)
        if (normalize_prompt_text(text) != normalize_prompt_text(golden(file))) return {false, file + " differs"};
    return {true, "4/4 match"};
}

ExperimentConfig config(const std::string& json) {
    auto c = parse_config(nlohmann::json::parse(json));
    c.validate();
    return c;
}

Outcome oracle_closure() {
    auto r = run_experiment(config(R"j({"id":"c2","task":"empo3-zs","query_dataset":"study-1728",
        "labels":["Solid (non-saline)","Aqueous (non-saline)","Animal (saline)","Plant (saline)","Aqueous (saline)"]})j"));
    for (const char* m : {"accuracy", "macro_precision", "macro_recall", "macro_f1"})
        if (r.stats.find(m)->mean != 1.0) return {false, std::string(m) + " != 1"};
    return {true, "acc = P = R = F1 = 1.00"};
}

// Independent reference: integer confusion matrix over truth-then-prediction classes.
MetricsReport brute_force(const std::vector<std::string>& t, const std::vector<std::string>& p) {
    std::vector<std::string> cls;
    for (const auto* v : {&t, &p})
        for (const auto& l : *v)
            if (std::find(cls.begin(), cls.end(), l) == cls.end()) cls.push_back(l);
    std::size_t k = cls.size(), n = t.size();
    auto idx = [&](const std::string& l) { return std::size_t(std::find(cls.begin(), cls.end(), l) - cls.begin()); };
    std::vector<std::vector<long>> cm(k, std::vector<long>(k, 0));
    for (std::size_t i = 0; i < n; ++i) ++cm[idx(t[i])][idx(p[i])];
    MetricsReport r;
    r.n = n;
    long diag = 0;
    std::size_t truth_classes = 0;
    for (std::size_t c = 0; c < k; ++c) {
        long row = 0, col = 0;
        for (std::size_t j = 0; j < k; ++j) {
            row += cm[c][j];
            col += cm[j][c];
        }
        diag += cm[c][c];
        ClassMetrics m{cls[c], col ? double(cm[c][c]) / col : 0.0, row ? double(cm[c][c]) / row : 0.0, 0.0,
                       std::size_t(row)};
        if (m.precision + m.recall > 0) m.f1 = 2 * m.precision * m.recall / (m.precision + m.recall);
        if (row > 0) {
            ++truth_classes;
            r.macro_precision += m.precision;
            r.macro_recall += m.recall;
            r.macro_f1 += m.f1;
        }
        r.per_class.push_back(m);
    }
    r.accuracy = double(diag) / n;
    r.macro_precision /= truth_classes;
    r.macro_recall /= truth_classes;
    r.macro_f1 /= truth_classes;
    return r;
}

bool close(double a, double b) { return std::abs(a - b) <= 1e-12; }

Outcome metric_oracle() {
    std::mt19937_64 rng(2024);
    const int kInstances = 500;
    for (int it = 0; it < kInstances; ++it) {
        std::size_t n = 1 + rng() % 20, k = 1 + rng() % 5;
        std::vector<std::string> t(n), p(n);
        for (auto& s : t) s = "c" + std::to_string(rng() % k);
        for (auto& s : p) s = "c" + std::to_string(rng() % k);
        auto a = classification_report(std::span<const std::string>(t), std::span<const std::string>(p));
        auto b = brute_force(t, p);
        bool ok = a.n == b.n && close(a.accuracy, b.accuracy) && close(a.macro_precision, b.macro_precision) &&
                  close(a.macro_recall, b.macro_recall) && close(a.macro_f1, b.macro_f1) &&
                  a.per_class.size() == b.per_class.size();
        for (std::size_t c = 0; ok && c < a.per_class.size(); ++c) {
            const auto &x = a.per_class[c], &y = b.per_class[c];
            ok = x.label == y.label && x.support == y.support && close(x.precision, y.precision) &&
                 close(x.recall, y.recall) && close(x.f1, y.f1);
        }
        if (!ok) return {false, "instance " + std::to_string(it) + " disagrees"};
    }
    return {true, std::to_string(kInstances) + " instances agree"};
}

Outcome regression_identities() {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0, 3000);
    for (int it = 0; it < 300; ++it) {
        std::vector<double> t(2 + rng() % 60), p(t.size());
        for (auto& x : t) x = u(rng);
        for (auto& x : p) x = u(rng);
        double mean = 0;
        for (double x : t) mean += x;
        mean /= t.size();
        std::vector<double> flat(t.size(), mean);
        auto id = regression_report(std::span<const double>(t), std::span<const double>(t));
        auto mn = regression_report(std::span<const double>(t), std::span<const double>(flat));
        auto r = regression_report(std::span<const double>(t), std::span<const double>(p));
        if (std::abs(id.r2 - 1) > 1e-12) return {false, "identity R2 = " + std::to_string(id.r2)};
        if (std::abs(mn.r2) > 1e-12) return {false, "mean R2 = " + std::to_string(mn.r2)};
        if (std::abs(r.rmse * r.rmse - r.mse) > 1e-9 * std::max(1.0, r.mse)) return {false, "rmse^2 != mse"};
    }
    return {true, "300 random instances"};
}

Outcome binarization() {
    if (binarize_cfu(126) != 0 || binarize_cfu(126 + 1e-9) != 1) return {false, "threshold"};
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0, 500);
    for (int i = 0; i < 10000; ++i) {
        double a = u(rng), b = u(rng);
        if (a > b) std::swap(a, b);
        if (binarize_cfu(a) > binarize_cfu(b)) return {false, "not monotone"};
    }
    return {true, "threshold and 10000 monotone pairs"};
}

Outcome cross_study_gap() {
    auto rf = run_experiment(config(R"j({"id":"c6rf","task":"baseline-classify","query_dataset":"study-1728",
        "support_dataset":"study-15573"})j"));
    auto echo = run_experiment(config(R"j({"id":"c6echo","task":"empo3-fs","query_dataset":"study-1728",
        "support_dataset":"study-15573","labels":"from-data"})j"));
    double rf_acc = rf.stats.find("accuracy")->mean, echo_acc = echo.stats.find("accuracy")->mean;
    return {rf_acc <= 0.60 && echo_acc == 1.0, fmt::format("RF acc {:.4f}, echo acc {:.4f}", rf_acc, echo_acc)};
}

Outcome rf_sanity() {
    auto r = run_experiment(config(R"j({"id":"c7","task":"baseline-classify","query_dataset":"huntington-2006",
        "cv_folds":5})j"));
    double acc = r.stats.find("accuracy")->mean;
    return {acc >= 0.60, fmt::format("5-fold CV acc {:.4f}", acc)};
}

Outcome valid_n() {
    auto scripted = run_experiment(config(R"j({"id":"c8","task":"ecoli-binary-zs","query_dataset":"huntington-2006",
        "provider_id":"scripted","trials":10,
        "script":["sorry","{truth}","","[1]","{truth}","nope","no list","{truth}","[0, 2]","I cannot"]})j"));
    auto single = run_experiment(config(R"j({"id":"c8s","task":"ecoli-binary-zs","query_dataset":"huntington-2006"})j"));
    bool ok = scripted.stats.valid_n == 3 && scripted.stats.attempted_n == 10;
    for (const auto& [k, s] : single.stats.metrics) ok = ok && s.stddev == 0.0;
    return {ok, fmt::format("valid {}/{}, single-trial std {:.4f}", scripted.stats.valid_n, scripted.stats.attempted_n,
                            single.stats.find("accuracy")->stddev)};
}

Outcome determinism() {
    auto dir = fs::temp_directory_path() / ("metaprobe_acceptance_" + std::to_string(::getpid()));
    fs::remove_all(dir);
    auto cfg = config(R"j({"id":"c9","task":"empo3-fs","query_dataset":"study-15573","support_dataset":"study-1728",
        "labels":"from-data","provider_id":"scripted","trials":4,"parallelism":4,"seed":42,
        "script":["{truth}","nothing useful","{truth}","{truth}"]})j");
    RunOptions rec;
    rec.out_dir = dir / "record";
    run_experiment(cfg, rec);
    RunOptions replay;
    replay.cassette = dir / "record" / "cassette.jsonl";
    replay.out_dir = dir / "one";
    run_experiment(cfg, replay);
    replay.out_dir = dir / "two";
    run_experiment(cfg, replay);
    bool same = read_file(dir / "one" / "report.json") == read_file(dir / "two" / "report.json");
    fs::remove_all(dir);
    return {same, same ? "report.json identical across replays" : "report.json differs"};
}

} // namespace

int main() {
    std::pair<const char*, std::function<Outcome()>> criteria[] = {
        {"golden prompts", golden_prompts},
        {"oracle closure", oracle_closure},
        {"metric oracle equivalence", metric_oracle},
        {"regression metric identities", regression_identities},
        {"binarization", binarization},
        {"cross-study RF gap", cross_study_gap},
        {"RF sanity on huntington-2006", rf_sanity},
        {"valid-N accounting", valid_n},
        {"determinism", determinism},
    };
    const double limits[] = {1, 1, 0, 0, 0, 5, 5, 0, 0};
    int failures = 0;
    for (std::size_t i = 0; i < std::size(criteria); ++i) {
        auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("threw: ") + e.what()};
        }
        double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (limits[i] > 0 && secs >= limits[i]) {
            o.pass = false;
            o.detail += fmt::format("; exceeded {:.0f} s", limits[i]);
        }
        failures += !o.pass;
        std::cout << fmt::format("[{}] {:>2}. {} ({:.3f} s): {}\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first,
                                 secs, o.detail);
    }
    std::cout << "[NOT REPRODUCIBLE] 10. live model scores depend on remote nondeterministic services; "
                 "record a cassette with --live and replay it with --cassette to regenerate tables offline\n";
    return failures == 0 ? 0 : 1;
}
