#include <random>
#include <set>

#include <gtest/gtest.h>

#include "metaprobe/baselines.hpp"
#include "metaprobe/fixtures.hpp"
#include "metaprobe/metrics.hpp"

using namespace metaprobe;

namespace {

FeatureMatrix random_matrix(std::mt19937_64& rng, std::size_t n, std::size_t d) {
    std::uniform_real_distribution<double> u(-3, 3);
    FeatureMatrix X;
    X.n_rows = n;
    for (std::size_t j = 0; j < d; ++j) X.column_names.push_back("x" + std::to_string(j));
    for (std::size_t i = 0; i < n * d; ++i) X.data.push_back(std::round(u(rng) * 4) / 4);
    return X;
}

} // namespace

TEST(OneHot, FirstAppearanceOrderAndUnseenValues) {
    StudyTable train("t", {"a", "lab"}, {{{"x", "L"}}, {{"y", "M"}}, {{"x", "L"}}}, std::string("lab"));
    auto X = encode_one_hot(train);
    EXPECT_EQ(X.column_names, (std::vector<std::string>{"a=x", "a=y"}));
    EXPECT_EQ(X.data, (std::vector<double>{1, 0, 0, 1, 1, 0}));
    StudyTable test("u", {"a", "lab"}, {{{"z", "L"}}, {{"y", "L"}}}, std::string("lab"));
    auto Xt = encode_one_hot(test, X.vocab);
    EXPECT_EQ(Xt.column_names, X.column_names);
    EXPECT_EQ(Xt.data, (std::vector<double>{0, 0, 0, 1}));
}

TEST(OneHot, MissingFieldEncodesZeros) {
    StudyTable train("t", {"a", "b", "lab"}, {{{"x", "p", "L"}}}, std::string("lab"));
    auto X = encode_one_hot(train);
    StudyTable test("u", {"a", "lab"}, {{{"x", "L"}}}, std::string("lab"));
    auto Xt = encode_one_hot(test, X.vocab);
    EXPECT_EQ(Xt.data, (std::vector<double>{1, 0}));
}

TEST(OneHot, EmptyTableIsError) {
    EXPECT_THROW(encode_one_hot(StudyTable("t", {"a"}, {})), DataError);
}

TEST(Numeric, FiveCovariates) {
    auto X = encode_numeric(load_beach_fixture("huntington-2006"));
    EXPECT_EQ(X.n_cols(), 5u);
    EXPECT_EQ(X.n_rows, 61u);
    EXPECT_DOUBLE_EQ(X.at(0, 0), 20.0);
}

TEST(Forest, LearnsSeparableClasses) {
    FeatureMatrix X;
    X.n_rows = 40;
    X.column_names = {"f"};
    std::vector<std::string> y;
    for (int i = 0; i < 40; ++i) {
        X.data.push_back(i);
        y.push_back(i < 20 ? "lo" : "hi");
    }
    auto m = fit_random_forest(X, y);
    EXPECT_EQ(predict_labels(m, X), y);
}

TEST(Forest, DeterministicAndWorkerIndependent) {
    std::mt19937_64 rng(3);
    auto X = random_matrix(rng, 60, 6);
    std::vector<std::string> y;
    for (std::size_t i = 0; i < 60; ++i) y.push_back(X.at(i, 0) + X.at(i, 1) > 0 ? "a" : (X.at(i, 2) > 1 ? "b" : "c"));
    RFParams p;
    p.n_trees = 30;
    auto a = fit_random_forest(X, y, p);
    auto b = fit_random_forest(X, y, p);
    p.workers = 4;
    auto c = fit_random_forest(X, y, p);
    EXPECT_EQ(a, b);
    EXPECT_EQ(a.trees, c.trees);
    p.seed = 43;
    auto d = fit_random_forest(X, y, p);
    EXPECT_NE(a.trees, d.trees);
}

TEST(Forest, PredictionsAreTrainingLabels) {
    std::mt19937_64 rng(5);
    for (int it = 0; it < 20; ++it) {
        auto X = random_matrix(rng, 5 + rng() % 30, 1 + rng() % 5);
        std::vector<std::string> y;
        for (std::size_t i = 0; i < X.n_rows; ++i) y.push_back("c" + std::to_string(rng() % 3));
        RFParams p;
        p.n_trees = 10;
        p.seed = rng();
        auto m = fit_random_forest(X, y, p);
        std::set<std::string> train(y.begin(), y.end());
        auto Xq = random_matrix(rng, 20, X.n_cols());
        for (const auto& l : predict_labels(m, Xq)) ASSERT_TRUE(train.count(l)) << l;
    }
}

TEST(Forest, RegressionPredictionsWithinTargetRange) {
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> u(0, 1000);
    for (int it = 0; it < 20; ++it) {
        auto X = random_matrix(rng, 5 + rng() % 40, 1 + rng() % 5);
        std::vector<double> y;
        for (std::size_t i = 0; i < X.n_rows; ++i) y.push_back(u(rng));
        RFParams p;
        p.n_trees = 15;
        auto m = fit_random_forest(X, y, p);
        auto [lo, hi] = std::minmax_element(y.begin(), y.end());
        for (double v : predict_values(m, random_matrix(rng, 20, X.n_cols()))) {
            ASSERT_GE(v, *lo - 1e-9);
            ASSERT_LE(v, *hi + 1e-9);
        }
    }
}

TEST(Forest, SingleClassIsDegenerate) {
    std::mt19937_64 rng(1);
    auto X = random_matrix(rng, 10, 2);
    auto m = fit_random_forest(X, std::vector<std::string>(10, "only"));
    EXPECT_TRUE(m.degenerate);
    EXPECT_EQ(predict_labels(m, X), std::vector<std::string>(10, "only"));
}

TEST(Forest, ConstantFeaturesGiveMajorityVote) {
    FeatureMatrix X;
    X.n_rows = 5;
    X.column_names = {"c"};
    X.data.assign(5, 1.0);
    auto m = fit_random_forest(X, std::vector<std::string>{"b", "a", "a", "b", "a"});
    // bootstrap majority per tree; with no splits every tree is a leaf
    for (const auto& t : m.trees) EXPECT_EQ(t.nodes.size(), 1u);
}

TEST(Forest, Errors) {
    std::mt19937_64 rng(1);
    auto X = random_matrix(rng, 4, 2);
    EXPECT_THROW(fit_random_forest(X, std::vector<std::string>{"a"}), DataError);
    RFParams p;
    p.n_trees = 0;
    EXPECT_THROW(fit_random_forest(X, std::vector<std::string>{"a", "b", "a", "b"}, p), ConfigError);
    auto m = fit_random_forest(X, std::vector<std::string>{"a", "b", "a", "b"});
    auto other = random_matrix(rng, 4, 3);
    EXPECT_THROW(predict_labels(m, other), DataError);
    EXPECT_THROW(predict_values(m, X), ConfigError);
}

TEST(Forest, MaxDepthBoundsTrees) {
    std::mt19937_64 rng(2);
    auto X = random_matrix(rng, 50, 3);
    std::vector<std::string> y;
    for (std::size_t i = 0; i < 50; ++i) y.push_back(rng() % 2 ? "a" : "b");
    RFParams p;
    p.max_depth = 1;
    p.n_trees = 10;
    auto m = fit_random_forest(X, y, p);
    for (const auto& t : m.trees) EXPECT_LE(t.nodes.size(), 3u);
}

TEST(Linear, RecoversExactFit) {
    std::mt19937_64 rng(4);
    auto X = random_matrix(rng, 30, 3);
    std::vector<double> y;
    for (std::size_t i = 0; i < 30; ++i) y.push_back(2.0 + 1.5 * X.at(i, 0) - 0.5 * X.at(i, 1) + 3.0 * X.at(i, 2));
    auto m = fit_linear_regression(X, y);
    EXPECT_FALSE(m.degenerate);
    EXPECT_NEAR(m.intercept, 2.0, 1e-9);
    EXPECT_NEAR(m.coefficients[0], 1.5, 1e-9);
    EXPECT_NEAR(m.coefficients[1], -0.5, 1e-9);
    EXPECT_NEAR(m.coefficients[2], 3.0, 1e-9);
    auto pred = predict_values(m, X);
    for (std::size_t i = 0; i < 30; ++i) EXPECT_NEAR(pred[i], y[i], 1e-9);
}

TEST(Linear, CollinearColumnsFallBackToRidge) {
    FeatureMatrix X;
    X.n_rows = 6;
    X.column_names = {"a", "b"};
    for (int i = 0; i < 6; ++i) {
        X.data.push_back(i);
        X.data.push_back(2.0 * i);
    }
    std::vector<double> y{1, 3, 5, 7, 9, 11};
    auto m = fit_linear_regression(X, y);
    EXPECT_TRUE(m.degenerate);
    auto pred = predict_values(m, X);
    for (std::size_t i = 0; i < 6; ++i) EXPECT_NEAR(pred[i], y[i], 1e-3);
}

TEST(Gbt, TrainingMseNonIncreasing) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> noise(-1, 1);
    auto X = random_matrix(rng, 50, 4);
    std::vector<double> y;
    for (std::size_t i = 0; i < 50; ++i) y.push_back(10 * X.at(i, 0) * X.at(i, 1) + noise(rng));
    GbtParams p;
    p.n_rounds = 40;
    auto m = fit_gbt_regressor(X, y, p);
    ASSERT_EQ(m.train_mse.size(), 41u);
    for (std::size_t r = 1; r < m.train_mse.size(); ++r) ASSERT_LE(m.train_mse[r], m.train_mse[r - 1] + 1e-9);
    EXPECT_LT(m.train_mse.back(), m.train_mse.front());
    auto pred = predict_values(m, X);
    double mse = 0;
    for (std::size_t i = 0; i < 50; ++i) mse += (pred[i] - y[i]) * (pred[i] - y[i]);
    EXPECT_NEAR(mse / 50, m.train_mse.back(), 1e-6);
}

TEST(KFold, PartitionsRows) {
    for (std::size_t n : {5u, 17u, 61u}) {
        auto folds = kfold_splits(n, 5, 42);
        std::vector<int> seen(n, 0);
        std::size_t min = n, max = 0;
        for (const auto& f : folds) {
            min = std::min(min, f.size());
            max = std::max(max, f.size());
            for (auto i : f) ++seen[i];
        }
        EXPECT_LE(max - min, 1u);
        for (int s : seen) EXPECT_EQ(s, 1);
    }
    EXPECT_EQ(kfold_splits(20, 4, 1), kfold_splits(20, 4, 1));
    EXPECT_THROW(kfold_splits(3, 5, 1), ConfigError);
    EXPECT_THROW(kfold_splits(3, 1, 1), ConfigError);
}

TEST(Json, ModelRoundTrip) {
    std::mt19937_64 rng(9);
    auto X = random_matrix(rng, 30, 3);
    std::vector<std::string> y;
    for (std::size_t i = 0; i < 30; ++i) y.push_back(X.at(i, 0) > 0 ? "p" : "n");
    RFParams p;
    p.n_trees = 5;
    p.max_depth = 4;
    auto m = fit_random_forest(X, y, p);
    nlohmann::json j = m;
    auto back = nlohmann::json::parse(j.dump()).get<FittedModel>();
    back.rf.workers = m.rf.workers;
    EXPECT_EQ(back, m);
    EXPECT_EQ(predict_labels(back, X), predict_labels(m, X));
}

TEST(CrossStudy, RandomForestFromStudy15573On1728) {
    auto train = load_study_fixture("study-15573");
    auto test = load_study_fixture("study-1728");
    auto Xtr = encode_one_hot(train);
    auto m = fit_random_forest(Xtr, train.column("empo_3"));
    auto pred = predict_labels(m, encode_one_hot(test, Xtr.vocab));
    auto truth = test.column("empo_3");
    auto r = classification_report(std::span<const std::string>(truth), std::span<const std::string>(pred));
    EXPECT_LE(r.accuracy, 0.60);
}
