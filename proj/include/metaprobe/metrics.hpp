#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "metaprobe/error.hpp"
#include "metaprobe/respparse.hpp"

namespace metaprobe {

// EPA recreational-water advisory level, CFU per 100 mL.
inline constexpr double kEpaCfuThreshold = 126.0;

// 1 when the concentration strictly exceeds the threshold.
inline int binarize_cfu(double cfu, double threshold = kEpaCfuThreshold) {
    if (!(cfu >= 0)) throw DataError("CFU value must be >= 0");
    return cfu > threshold ? 1 : 0;
}

struct ClassMetrics {
    std::string label;
    double precision = 0;
    double recall = 0;
    double f1 = 0;
    std::size_t support = 0;

    bool operator==(const ClassMetrics&) const = default;
};

struct MetricsReport {
    double accuracy = 0;
    double macro_precision = 0;
    double macro_recall = 0;
    double macro_f1 = 0;
    std::vector<ClassMetrics> per_class; // truth classes first, then prediction-only classes
    std::size_t n = 0;

    bool operator==(const MetricsReport&) const = default;
};

struct RegressionReport {
    double mae = 0;
    double rmse = 0;
    double mse = 0;
    double r2 = 0;
    std::size_t n = 0;

    bool operator==(const RegressionReport&) const = default;
};

// Per-class scores from one-vs-rest counts. Precision or recall with a zero
// denominator is 0. Macro means run over classes present in the truth.
inline MetricsReport classification_report(std::span<const std::string> truth, std::span<const std::string> pred) {
    if (truth.size() != pred.size())
        throw DataError("truth has " + std::to_string(truth.size()) + " labels, predictions " +
                        std::to_string(pred.size()));
    if (truth.empty()) throw DataError("cannot score an empty prediction set");

    std::vector<std::string> classes;
    auto add = [&](const std::string& l) {
        if (std::find(classes.begin(), classes.end(), l) == classes.end()) classes.push_back(l);
    };
    for (const auto& t : truth) add(t);
    std::size_t n_truth_classes = classes.size();
    for (const auto& p : pred) add(p);

    std::map<std::string, std::size_t> tp, pred_pos, actual;
    std::size_t correct = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        ++actual[truth[i]];
        ++pred_pos[pred[i]];
        if (truth[i] == pred[i]) {
            ++tp[truth[i]];
            ++correct;
        }
    }

    MetricsReport r;
    r.n = truth.size();
    r.accuracy = static_cast<double>(correct) / static_cast<double>(r.n);
    for (std::size_t c = 0; c < classes.size(); ++c) {
        const auto& l = classes[c];
        ClassMetrics m;
        m.label = l;
        m.support = actual[l];
        m.precision = pred_pos[l] ? static_cast<double>(tp[l]) / static_cast<double>(pred_pos[l]) : 0.0;
        m.recall = actual[l] ? static_cast<double>(tp[l]) / static_cast<double>(actual[l]) : 0.0;
        m.f1 = m.precision + m.recall > 0 ? 2 * m.precision * m.recall / (m.precision + m.recall) : 0.0;
        if (c < n_truth_classes) {
            r.macro_precision += m.precision;
            r.macro_recall += m.recall;
            r.macro_f1 += m.f1;
        }
        r.per_class.push_back(std::move(m));
    }
    auto k = static_cast<double>(n_truth_classes);
    r.macro_precision /= k;
    r.macro_recall /= k;
    r.macro_f1 /= k;
    return r;
}

inline MetricsReport classification_report(const std::vector<std::string>& truth, const ValidBatch& pred) {
    auto labels = pred.labels();
    return classification_report(std::span<const std::string>(truth), std::span<const std::string>(labels));
}

inline RegressionReport regression_report(std::span<const double> truth, std::span<const double> pred) {
    if (truth.size() != pred.size())
        throw DataError("truth has " + std::to_string(truth.size()) + " values, predictions " +
                        std::to_string(pred.size()));
    if (truth.size() < 2) throw DataError("regression scoring needs at least 2 rows");
    const auto n = static_cast<double>(truth.size());
    double mean = 0;
    for (double t : truth) mean += t;
    mean /= n;
    double ss_tot = 0, ss_res = 0, abs_sum = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        double e = truth[i] - pred[i];
        ss_res += e * e;
        abs_sum += std::abs(e);
        ss_tot += (truth[i] - mean) * (truth[i] - mean);
    }
    if (ss_tot == 0) throw DegenerateInput("truth has zero variance; R^2 is undefined");
    RegressionReport r;
    r.n = truth.size();
    r.mae = abs_sum / n;
    r.mse = ss_res / n;
    r.rmse = std::sqrt(r.mse);
    r.r2 = 1.0 - ss_res / ss_tot;
    return r;
}

inline RegressionReport regression_report(const std::vector<double>& truth, const ValidBatch& pred) {
    auto values = pred.values();
    return regression_report(std::span<const double>(truth), std::span<const double>(values));
}

// ---------------------------------------------------------------------------
// Repeated-trial aggregation
// ---------------------------------------------------------------------------

struct Summary {
    double mean = 0;
    double stddev = 0; // sample standard deviation; 0 for a single value
    double min = 0;
    double max = 0;

    bool operator==(const Summary&) const = default;
};

struct TrialStats {
    // Metric name -> summary, in the report's metric order. Empty when no
    // trial was valid.
    std::vector<std::pair<std::string, Summary>> metrics;
    std::size_t valid_n = 0;
    std::size_t attempted_n = 0;

    bool available() const { return valid_n > 0; }

    const Summary* find(std::string_view name) const {
        for (const auto& [k, v] : metrics)
            if (k == name) return &v;
        return nullptr;
    }

    bool operator==(const TrialStats&) const = default;
};

inline std::vector<std::pair<std::string, double>> metric_values(const MetricsReport& r) {
    return {{"accuracy", r.accuracy},
            {"macro_precision", r.macro_precision},
            {"macro_recall", r.macro_recall},
            {"macro_f1", r.macro_f1}};
}

inline std::vector<std::pair<std::string, double>> metric_values(const RegressionReport& r) {
    return {{"mae", r.mae}, {"rmse", r.rmse}, {"mse", r.mse}, {"r2", r.r2}};
}

// Order-independent: values are sorted before summation.
inline Summary summarize(std::vector<double> values) {
    std::sort(values.begin(), values.end());
    Summary s;
    s.min = values.front();
    s.max = values.back();
    double sum = 0;
    for (double v : values) sum += v;
    s.mean = sum / static_cast<double>(values.size());
    if (values.size() > 1) {
        std::vector<double> sq;
        for (double v : values) sq.push_back((v - s.mean) * (v - s.mean));
        std::sort(sq.begin(), sq.end());
        double acc = 0;
        for (double v : sq) acc += v;
        s.stddev = std::sqrt(acc / static_cast<double>(values.size() - 1));
    }
    // Guard against rounding pushing the mean outside [min, max].
    s.mean = std::clamp(s.mean, s.min, s.max);
    return s;
}

// Invalid trials are nullopt; they count toward attempted_n only.
template <class Report>
TrialStats aggregate_trials(std::span<const std::optional<Report>> trials) {
    if (trials.empty()) throw DataError("no trials to aggregate");
    TrialStats st;
    st.attempted_n = trials.size();
    std::vector<std::pair<std::string, std::vector<double>>> cols;
    for (const auto& t : trials) {
        if (!t) continue;
        ++st.valid_n;
        auto vals = metric_values(*t);
        if (cols.empty())
            for (const auto& [k, v] : vals) cols.emplace_back(k, std::vector<double>{});
        for (std::size_t i = 0; i < vals.size(); ++i) cols[i].second.push_back(vals[i].second);
    }
    for (auto& [k, v] : cols) st.metrics.emplace_back(k, summarize(std::move(v)));
    return st;
}

template <class Report>
TrialStats aggregate_trials(const std::vector<std::optional<Report>>& trials) {
    return aggregate_trials(std::span<const std::optional<Report>>(trials));
}

// ---------------------------------------------------------------------------
// JSON
// ---------------------------------------------------------------------------

inline void to_json(nlohmann::json& j, const ClassMetrics& m) {
    j = {{"label", m.label}, {"precision", m.precision}, {"recall", m.recall}, {"f1", m.f1}, {"support", m.support}};
}
inline void from_json(const nlohmann::json& j, ClassMetrics& m) {
    j.at("label").get_to(m.label);
    j.at("precision").get_to(m.precision);
    j.at("recall").get_to(m.recall);
    j.at("f1").get_to(m.f1);
    j.at("support").get_to(m.support);
}

inline void to_json(nlohmann::json& j, const MetricsReport& r) {
    j = {{"accuracy", r.accuracy},
         {"macro_precision", r.macro_precision},
         {"macro_recall", r.macro_recall},
         {"macro_f1", r.macro_f1},
         {"per_class", r.per_class},
         {"n", r.n}};
}
inline void from_json(const nlohmann::json& j, MetricsReport& r) {
    j.at("accuracy").get_to(r.accuracy);
    j.at("macro_precision").get_to(r.macro_precision);
    j.at("macro_recall").get_to(r.macro_recall);
    j.at("macro_f1").get_to(r.macro_f1);
    j.at("per_class").get_to(r.per_class);
    j.at("n").get_to(r.n);
}

inline void to_json(nlohmann::json& j, const RegressionReport& r) {
    j = {{"mae", r.mae}, {"rmse", r.rmse}, {"mse", r.mse}, {"r2", r.r2}, {"n", r.n}};
}
inline void from_json(const nlohmann::json& j, RegressionReport& r) {
    j.at("mae").get_to(r.mae);
    j.at("rmse").get_to(r.rmse);
    j.at("mse").get_to(r.mse);
    j.at("r2").get_to(r.r2);
    j.at("n").get_to(r.n);
}

inline void to_json(nlohmann::json& j, const TrialStats& s) {
    auto metrics = nlohmann::json::array();
    for (const auto& [k, v] : s.metrics)
        metrics.push_back({{"metric", k}, {"mean", v.mean}, {"std", v.stddev}, {"min", v.min}, {"max", v.max}});
    j = {{"metrics", metrics}, {"valid_n", s.valid_n}, {"attempted_n", s.attempted_n}};
}
inline void from_json(const nlohmann::json& j, TrialStats& s) {
    s.metrics.clear();
    for (const auto& m : j.at("metrics"))
        s.metrics.emplace_back(m.at("metric").get<std::string>(),
                               Summary{m.at("mean").get<double>(), m.at("std").get<double>(),
                                       m.at("min").get<double>(), m.at("max").get<double>()});
    j.at("valid_n").get_to(s.valid_n);
    j.at("attempted_n").get_to(s.attempted_n);
}

} // namespace metaprobe
