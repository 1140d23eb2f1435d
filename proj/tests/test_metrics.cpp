#include <cmath>
#include <limits>
#include <random>

#include <gtest/gtest.h>

#include "metaprobe/metrics.hpp"

using namespace metaprobe;

using Labels = std::vector<std::string>;

TEST(Binarize, Threshold) {
    EXPECT_EQ(binarize_cfu(126), 0);
    EXPECT_EQ(binarize_cfu(126 + 1e-9), 1);
    EXPECT_EQ(binarize_cfu(0), 0);
    EXPECT_THROW(binarize_cfu(-1), DataError);
    EXPECT_THROW(binarize_cfu(std::nan("")), DataError);
}

TEST(Binarize, Monotone) {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(0, 1000);
    for (int i = 0; i < 1000; ++i) {
        double a = u(rng), b = u(rng);
        if (a > b) std::swap(a, b);
        ASSERT_LE(binarize_cfu(a), binarize_cfu(b));
    }
}

TEST(Classification, PerfectPrediction) {
    Labels t{"a", "b", "a", "c"};
    auto r = classification_report(std::span<const std::string>(t), std::span<const std::string>(t));
    EXPECT_DOUBLE_EQ(r.accuracy, 1.0);
    EXPECT_DOUBLE_EQ(r.macro_f1, 1.0);
    EXPECT_EQ(r.per_class.size(), 3u);
}

TEST(Classification, HandComputed) {
    Labels t{"a", "a", "b", "b"}, p{"a", "b", "b", "b"};
    auto r = classification_report(std::span<const std::string>(t), std::span<const std::string>(p));
    EXPECT_DOUBLE_EQ(r.accuracy, 0.75);
    // a: P=1 R=.5 ; b: P=2/3 R=1
    EXPECT_DOUBLE_EQ(r.macro_precision, (1.0 + 2.0 / 3.0) / 2);
    EXPECT_DOUBLE_EQ(r.macro_recall, 0.75);
    EXPECT_DOUBLE_EQ(r.per_class[0].f1, 2 * 0.5 / 1.5);
}

TEST(Classification, PredictionOnlyClassExcludedFromMacro) {
    Labels t{"a", "a"}, p{"a", "z"};
    auto r = classification_report(std::span<const std::string>(t), std::span<const std::string>(p));
    ASSERT_EQ(r.per_class.size(), 2u);
    EXPECT_EQ(r.per_class[1].label, "z");
    EXPECT_EQ(r.per_class[1].support, 0u);
    EXPECT_DOUBLE_EQ(r.macro_precision, 1.0);
    EXPECT_DOUBLE_EQ(r.macro_recall, 0.5);
}

TEST(Classification, Errors) {
    Labels a{"x"}, b{"x", "y"}, e;
    EXPECT_THROW(classification_report(std::span<const std::string>(a), std::span<const std::string>(b)), DataError);
    EXPECT_THROW(classification_report(std::span<const std::string>(e), std::span<const std::string>(e)), DataError);
}

TEST(Classification, PermutationInvariant) {
    std::mt19937 rng(2);
    for (int it = 0; it < 100; ++it) {
        std::size_t n = 1 + rng() % 20;
        Labels t(n), p(n);
        for (std::size_t i = 0; i < n; ++i) {
            t[i] = std::string(1, static_cast<char>('a' + rng() % 4));
            p[i] = std::string(1, static_cast<char>('a' + rng() % 4));
        }
        auto r1 = classification_report(std::span<const std::string>(t), std::span<const std::string>(p));
        std::vector<std::size_t> idx(n);
        std::iota(idx.begin(), idx.end(), 0);
        std::shuffle(idx.begin(), idx.end(), rng);
        Labels t2, p2;
        for (auto i : idx) {
            t2.push_back(t[i]);
            p2.push_back(p[i]);
        }
        auto r2 = classification_report(std::span<const std::string>(t2), std::span<const std::string>(p2));
        EXPECT_NEAR(r1.accuracy, r2.accuracy, 1e-12);
        EXPECT_NEAR(r1.macro_precision, r2.macro_precision, 1e-12);
        EXPECT_NEAR(r1.macro_recall, r2.macro_recall, 1e-12);
        EXPECT_NEAR(r1.macro_f1, r2.macro_f1, 1e-12);
    }
}

TEST(Regression, Identities) {
    std::vector<double> t{1, 2, 3, 10};
    auto id = regression_report(std::span<const double>(t), std::span<const double>(t));
    EXPECT_NEAR(id.r2, 1.0, 1e-12);
    EXPECT_DOUBLE_EQ(id.mae, 0.0);
    std::vector<double> mean(t.size(), 4.0);
    EXPECT_NEAR(regression_report(std::span<const double>(t), std::span<const double>(mean)).r2, 0.0, 1e-12);
}

TEST(Regression, HandComputed) {
    std::vector<double> t{0, 2}, p{1, 1};
    auto r = regression_report(std::span<const double>(t), std::span<const double>(p));
    EXPECT_DOUBLE_EQ(r.mae, 1.0);
    EXPECT_DOUBLE_EQ(r.mse, 1.0);
    EXPECT_DOUBLE_EQ(r.rmse, 1.0);
    EXPECT_DOUBLE_EQ(r.r2, 0.0);
}

TEST(Regression, Errors) {
    std::vector<double> one{1}, flat{2, 2}, two{1, 2};
    EXPECT_THROW(regression_report(std::span<const double>(one), std::span<const double>(one)), DataError);
    EXPECT_THROW(regression_report(std::span<const double>(flat), std::span<const double>(two)), DegenerateInput);
    EXPECT_THROW(regression_report(std::span<const double>(two), std::span<const double>(one)), DataError);
}

TEST(Regression, RmseSquaredIsMse) {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(0, 2000);
    for (int i = 0; i < 200; ++i) {
        std::vector<double> t(2 + rng() % 30), p(t.size());
        for (auto& x : t) x = u(rng);
        for (auto& x : p) x = u(rng);
        auto r = regression_report(std::span<const double>(t), std::span<const double>(p));
        ASSERT_NEAR(r.rmse * r.rmse, r.mse, 1e-9 * std::max(1.0, r.mse));
        ASSERT_LE(r.mae, r.rmse + 1e-9);
    }
}

TEST(Aggregate, SingleTrialHasZeroStd) {
    std::vector<std::optional<MetricsReport>> trials{MetricsReport{0.7, 0.6, 0.5, 0.55, {}, 10}};
    auto s = aggregate_trials(trials);
    EXPECT_EQ(s.valid_n, 1u);
    EXPECT_EQ(s.find("accuracy")->stddev, 0.0);
    EXPECT_EQ(s.find("accuracy")->mean, 0.7);
}

TEST(Aggregate, SampleStdAndInvalidTrials) {
    std::vector<std::optional<MetricsReport>> trials{MetricsReport{0.5, 0, 0, 0, {}, 2}, std::nullopt,
                                                     MetricsReport{1.0, 0, 0, 0, {}, 2}};
    auto s = aggregate_trials(trials);
    EXPECT_EQ(s.valid_n, 2u);
    EXPECT_EQ(s.attempted_n, 3u);
    EXPECT_DOUBLE_EQ(s.find("accuracy")->mean, 0.75);
    EXPECT_DOUBLE_EQ(s.find("accuracy")->stddev, std::sqrt(0.125));
    EXPECT_DOUBLE_EQ(s.find("accuracy")->min, 0.5);
}

TEST(Aggregate, ZeroValidIsUnavailable) {
    std::vector<std::optional<RegressionReport>> trials{std::nullopt, std::nullopt};
    auto s = aggregate_trials(trials);
    EXPECT_FALSE(s.available());
    EXPECT_EQ(s.attempted_n, 2u);
    EXPECT_EQ(s.find("mae"), nullptr);
    std::vector<std::optional<RegressionReport>> none;
    EXPECT_THROW(aggregate_trials(none), DataError);
}

TEST(Aggregate, PermutationInvariantAndBounded) {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(0, 1);
    for (int it = 0; it < 100; ++it) {
        std::vector<std::optional<MetricsReport>> trials;
        for (std::size_t k = 1 + rng() % 10; k > 0; --k) {
            if (rng() % 4 == 0)
                trials.emplace_back();
            else
                trials.push_back(MetricsReport{u(rng), u(rng), u(rng), u(rng), {}, 5});
        }
        auto a = aggregate_trials(trials);
        std::shuffle(trials.begin(), trials.end(), rng);
        auto b = aggregate_trials(trials);
        ASSERT_EQ(a, b);
        for (const auto& [k, s] : a.metrics) {
            ASSERT_LE(s.min, s.mean);
            ASSERT_LE(s.mean, s.max);
            ASSERT_GE(s.stddev, 0.0);
        }
    }
}

TEST(Json, RoundTrip) {
    Labels t{"a", "b", "a"}, p{"a", "a", "a"};
    auto r = classification_report(std::span<const std::string>(t), std::span<const std::string>(p));
    nlohmann::json j = r;
    EXPECT_EQ(j.get<MetricsReport>(), r);
    std::vector<std::optional<MetricsReport>> trials{r, std::nullopt};
    auto s = aggregate_trials(trials);
    nlohmann::json js = s;
    EXPECT_EQ(js.get<TrialStats>(), s);
}
