#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "metaprobe/concurrency.hpp"
#include "metaprobe/error.hpp"
#include "metaprobe/ingest.hpp"

namespace metaprobe {

// ---------------------------------------------------------------------------
// Feature encoding
// ---------------------------------------------------------------------------

struct FieldVocab {
    std::string field;
    std::vector<std::string> categories;

    bool operator==(const FieldVocab&) const = default;
};

// Dense row-major n x d matrix.
struct FeatureMatrix {
    std::size_t n_rows = 0;
    std::vector<std::string> column_names;
    std::vector<double> data;
    std::vector<FieldVocab> vocab; // empty for numeric encodings

    std::size_t n_cols() const { return column_names.size(); }
    double at(std::size_t r, std::size_t c) const { return data[r * n_cols() + c]; }
    std::span<const double> row(std::size_t r) const { return {data.data() + r * n_cols(), n_cols()}; }

    bool operator==(const FeatureMatrix&) const = default;
};

// One-hot blocks per non-label field. Without `vocab` the categories are
// collected from the table in first-appearance order; with it, values outside
// the vocabulary (and fields the table lacks) encode as all-zero blocks.
inline FeatureMatrix encode_one_hot(const StudyTable& table,
                                    const std::optional<std::vector<FieldVocab>>& vocab = std::nullopt) {
    if (table.size() == 0) throw DataError("cannot encode an empty table");
    FeatureMatrix m;
    m.n_rows = table.size();
    if (vocab) {
        m.vocab = *vocab;
    } else {
        auto label = table.label_index();
        for (std::size_t c = 0; c < table.schema().size(); ++c) {
            if (label && c == *label) continue;
            FieldVocab fv{table.schema()[c], {}};
            for (const auto& r : table.rows()) {
                const auto& v = r.values[c];
                if (std::find(fv.categories.begin(), fv.categories.end(), v) == fv.categories.end())
                    fv.categories.push_back(v);
            }
            m.vocab.push_back(std::move(fv));
        }
    }
    for (const auto& fv : m.vocab)
        for (const auto& cat : fv.categories) m.column_names.push_back(fv.field + "=" + cat);
    m.data.assign(m.n_rows * m.n_cols(), 0.0);
    std::size_t offset = 0;
    for (const auto& fv : m.vocab) {
        auto src = table.field_index(fv.field);
        if (src && table.label_field() && *table.label_field() == fv.field)
            throw DataError("label field '" + fv.field + "' cannot be a feature");
        if (src) {
            for (std::size_t r = 0; r < m.n_rows; ++r) {
                const auto& v = table.value(r, *src);
                auto it = std::find(fv.categories.begin(), fv.categories.end(), v);
                if (it != fv.categories.end())
                    m.data[r * m.n_cols() + offset + static_cast<std::size_t>(it - fv.categories.begin())] = 1.0;
            }
        }
        offset += fv.categories.size();
    }
    return m;
}

// The five numeric beach covariates; the date is left out.
inline FeatureMatrix encode_numeric(const BeachSeries& series) {
    if (series.size() == 0) throw DataError("cannot encode an empty series");
    FeatureMatrix m;
    m.n_rows = series.size();
    for (auto c : kBeachCovariates) m.column_names.emplace_back(column_name(c));
    for (const auto& r : series.rows())
        for (auto c : kBeachCovariates) m.data.push_back(r.covariate(c));
    return m;
}

inline FeatureMatrix select_rows(const FeatureMatrix& X, std::span<const std::size_t> rows) {
    FeatureMatrix out;
    out.n_rows = rows.size();
    out.column_names = X.column_names;
    out.vocab = X.vocab;
    out.data.reserve(rows.size() * X.n_cols());
    for (auto r : rows) {
        auto src = X.row(r);
        out.data.insert(out.data.end(), src.begin(), src.end());
    }
    return out;
}

// ---------------------------------------------------------------------------
// Models
// ---------------------------------------------------------------------------

enum class FeatureSubset { sqrt, third, all };

struct RFParams {
    std::size_t n_trees = 100;
    std::optional<std::size_t> max_depth; // unlimited when unset
    std::size_t min_samples_split = 2;
    // Unset: sqrt for classification, third for regression.
    std::optional<FeatureSubset> features_per_split;
    bool bootstrap = true;
    std::uint64_t seed = 42;
    std::size_t workers = 1;

    void validate() const {
        if (n_trees < 1) throw ConfigError("n_trees must be >= 1");
        if (min_samples_split < 2) throw ConfigError("min_samples_split must be >= 2");
    }

    bool operator==(const RFParams&) const = default;
};

struct GbtParams {
    std::size_t n_rounds = 100;
    double learning_rate = 0.1;
    std::size_t max_depth = 3;
    std::uint64_t seed = 42;

    void validate() const {
        if (n_rounds < 1) throw ConfigError("n_rounds must be >= 1");
        if (!(learning_rate > 0 && learning_rate <= 1)) throw ConfigError("learning_rate must be in (0, 1]");
        if (max_depth < 1) throw ConfigError("max_depth must be >= 1");
    }

    bool operator==(const GbtParams&) const = default;
};

struct TreeNode {
    int feature = -1; // -1 marks a leaf
    double threshold = 0;
    int left = -1;
    int right = -1;
    double value = 0; // leaf output: mean, or class index

    bool operator==(const TreeNode&) const = default;
};

struct Tree {
    std::vector<TreeNode> nodes;

    double predict(std::span<const double> x) const {
        std::size_t i = 0;
        while (nodes[i].feature >= 0)
            i = static_cast<std::size_t>(x[static_cast<std::size_t>(nodes[i].feature)] <= nodes[i].threshold
                                             ? nodes[i].left
                                             : nodes[i].right);
        return nodes[i].value;
    }

    bool operator==(const Tree&) const = default;
};

enum class ModelKind { rf_classifier, rf_regressor, linear_regressor, gbt_regressor };

inline std::string_view to_string(ModelKind k) {
    switch (k) {
    case ModelKind::rf_classifier: return "rf-classifier";
    case ModelKind::rf_regressor: return "rf-regressor";
    case ModelKind::linear_regressor: return "linear-regressor";
    case ModelKind::gbt_regressor: return "gbt-regressor";
    }
    return "?";
}

struct FittedModel {
    ModelKind kind = ModelKind::rf_classifier;
    std::vector<Tree> trees;
    std::vector<std::string> classes;  // rf-classifier, in first-appearance order
    std::vector<double> coefficients;  // linear
    double intercept = 0;              // linear; base prediction for gbt and constant models
    double learning_rate = 1;          // gbt
    std::vector<double> train_mse;     // gbt: training MSE after the base and after each round
    std::vector<std::string> column_names;
    std::vector<FieldVocab> vocab;
    RFParams rf;
    GbtParams gbt;
    bool degenerate = false;

    bool operator==(const FittedModel&) const = default;
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

// Uniform in [0, n) without relying on std distributions, whose output
// differs between standard libraries.
inline std::size_t uniform_index(std::mt19937_64& rng, std::size_t n) {
    const std::uint64_t bound = static_cast<std::uint64_t>(n);
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t v;
    do v = rng();
    while (v >= limit);
    return static_cast<std::size_t>(v % bound);
}

template <class T>
void shuffle(std::vector<T>& v, std::mt19937_64& rng) {
    for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[uniform_index(rng, i)]);
}

inline std::size_t features_to_try(FeatureSubset s, std::size_t d) {
    switch (s) {
    case FeatureSubset::sqrt: return std::max<std::size_t>(1, static_cast<std::size_t>(std::sqrt(static_cast<double>(d))));
    case FeatureSubset::third: return std::max<std::size_t>(1, d / 3);
    case FeatureSubset::all: return d;
    }
    return d;
}

// CART growth. Classification targets are class indices stored as doubles.
class TreeBuilder {
public:
    TreeBuilder(const FeatureMatrix& X, std::span<const double> y, std::size_t n_classes,
                std::optional<std::size_t> max_depth, std::size_t min_split, std::size_t mtry, std::uint64_t seed)
        : X_(X), y_(y), n_classes_(n_classes), max_depth_(max_depth), min_split_(min_split), mtry_(mtry),
          rng_(seed) {}

    Tree build(std::vector<std::size_t> rows) {
        tree_ = {};
        grow(rows, 0);
        return std::move(tree_);
    }

    std::mt19937_64& rng() { return rng_; }

private:
    bool classify() const { return n_classes_ > 0; }

    // n * impurity: n*gini for classification, SSE for regression.
    double node_cost(const std::vector<std::size_t>& rows) const {
        if (classify()) {
            std::vector<double> counts(n_classes_, 0.0);
            for (auto r : rows) counts[static_cast<std::size_t>(y_[r])] += 1;
            return gini_cost(counts, static_cast<double>(rows.size()));
        }
        double mean = 0;
        for (auto r : rows) mean += y_[r];
        mean /= static_cast<double>(rows.size());
        double sse = 0;
        for (auto r : rows) sse += (y_[r] - mean) * (y_[r] - mean);
        return sse;
    }

    static double gini_cost(const std::vector<double>& counts, double n) {
        if (n == 0) return 0;
        double sq = 0;
        for (double c : counts) sq += c * c;
        return n - sq / n;
    }

    double leaf_value(const std::vector<std::size_t>& rows) const {
        if (classify()) {
            std::vector<std::size_t> counts(n_classes_, 0);
            for (auto r : rows) ++counts[static_cast<std::size_t>(y_[r])];
            return static_cast<double>(std::max_element(counts.begin(), counts.end()) - counts.begin());
        }
        double mean = 0;
        for (auto r : rows) mean += y_[r];
        return mean / static_cast<double>(rows.size());
    }

    struct Split {
        std::size_t feature = 0;
        double threshold = 0;
        double cost = std::numeric_limits<double>::infinity();
    };

    std::optional<Split> best_split_on(const std::vector<std::size_t>& rows, std::size_t f, double parent_cost) const {
        std::vector<std::pair<double, std::size_t>> order;
        order.reserve(rows.size());
        for (std::size_t k = 0; k < rows.size(); ++k) order.emplace_back(X_.at(rows[k], f), k);
        std::sort(order.begin(), order.end());
        if (order.front().first == order.back().first) return std::nullopt;

        const auto n = static_cast<double>(rows.size());
        std::optional<Split> best;
        if (classify()) {
            std::vector<double> left(n_classes_, 0.0), right(n_classes_, 0.0);
            for (auto r : rows) right[static_cast<std::size_t>(y_[r])] += 1;
            for (std::size_t k = 1; k < order.size(); ++k) {
                auto cls = static_cast<std::size_t>(y_[rows[order[k - 1].second]]);
                left[cls] += 1;
                right[cls] -= 1;
                if (!(order[k - 1].first < order[k].first)) continue;
                double nl = static_cast<double>(k);
                double cost = gini_cost(left, nl) + gini_cost(right, n - nl);
                if (!best || cost < best->cost) best = Split{f, midpoint(order[k - 1].first, order[k].first), cost};
            }
        } else {
            double sum_l = 0, sq_l = 0, sum_r = 0, sq_r = 0;
            for (auto r : rows) {
                sum_r += y_[r];
                sq_r += y_[r] * y_[r];
            }
            for (std::size_t k = 1; k < order.size(); ++k) {
                double v = y_[rows[order[k - 1].second]];
                sum_l += v;
                sq_l += v * v;
                sum_r -= v;
                sq_r -= v * v;
                if (!(order[k - 1].first < order[k].first)) continue;
                double nl = static_cast<double>(k), nr = n - nl;
                double cost = std::max(0.0, sq_l - sum_l * sum_l / nl) + std::max(0.0, sq_r - sum_r * sum_r / nr);
                if (!best || cost < best->cost) best = Split{f, midpoint(order[k - 1].first, order[k].first), cost};
            }
        }
        if (!best || !(parent_cost - best->cost > 1e-12 * std::max(1.0, parent_cost))) return std::nullopt;
        return best;
    }

    static double midpoint(double a, double b) {
        double m = a + (b - a) / 2;
        return m < b ? m : a;
    }

    int grow(const std::vector<std::size_t>& rows, std::size_t depth) {
        int id = static_cast<int>(tree_.nodes.size());
        tree_.nodes.push_back(TreeNode{-1, 0, -1, -1, leaf_value(rows)});
        double cost = node_cost(rows);
        if (rows.size() < min_split_ || (max_depth_ && depth >= *max_depth_) || cost <= 1e-12) return id;

        std::vector<std::size_t> features(X_.n_cols());
        std::iota(features.begin(), features.end(), 0);
        shuffle(features, rng_);
        std::optional<Split> best;
        // Keep looking past mtry features until some feature yields a split.
        for (std::size_t k = 0; k < features.size(); ++k) {
            if (k >= mtry_ && best) break;
            auto s = best_split_on(rows, features[k], cost);
            if (s && (!best || s->cost < best->cost)) best = s;
        }
        if (!best) return id;

        std::vector<std::size_t> left, right;
        for (auto r : rows) (X_.at(r, best->feature) <= best->threshold ? left : right).push_back(r);
        int l = grow(left, depth + 1);
        int r = grow(right, depth + 1);
        auto& node = tree_.nodes[static_cast<std::size_t>(id)];
        node.feature = static_cast<int>(best->feature);
        node.threshold = best->threshold;
        node.left = l;
        node.right = r;
        return id;
    }

    const FeatureMatrix& X_;
    std::span<const double> y_;
    std::size_t n_classes_;
    std::optional<std::size_t> max_depth_;
    std::size_t min_split_;
    std::size_t mtry_;
    std::mt19937_64 rng_;
    Tree tree_;
};

inline std::vector<Tree> grow_forest(const FeatureMatrix& X, std::span<const double> y, std::size_t n_classes,
                                     const RFParams& p, FeatureSubset subset) {
    std::vector<Tree> trees(p.n_trees);
    const std::size_t mtry = features_to_try(subset, X.n_cols());
    parallel_for(p.n_trees, p.workers, [&](std::size_t t) {
        TreeBuilder builder(X, y, n_classes, p.max_depth, p.min_samples_split, mtry,
                            splitmix64(p.seed ^ splitmix64(static_cast<std::uint64_t>(t))));
        std::vector<std::size_t> rows(X.n_rows);
        if (p.bootstrap)
            for (auto& r : rows) r = uniform_index(builder.rng(), X.n_rows);
        else
            std::iota(rows.begin(), rows.end(), 0);
        trees[t] = builder.build(std::move(rows));
    });
    return trees;
}

inline void require_rows(const FeatureMatrix& X, std::size_t n_targets) {
    if (X.n_rows == 0) throw DataError("training matrix has no rows");
    if (n_targets != X.n_rows)
        throw DataError("target has " + std::to_string(n_targets) + " values for " + std::to_string(X.n_rows) +
                        " rows");
}

inline void require_columns(const FittedModel& m, const FeatureMatrix& X) {
    if (X.column_names != m.column_names)
        throw DataError("feature columns do not match the columns the model was fit on");
}

} // namespace detail

// Random forest classifier: Gini CART trees, majority vote.
inline FittedModel fit_random_forest(const FeatureMatrix& X, std::span<const std::string> y, const RFParams& params = {}) {
    params.validate();
    detail::require_rows(X, y.size());
    FittedModel m;
    m.kind = ModelKind::rf_classifier;
    m.rf = params;
    m.column_names = X.column_names;
    m.vocab = X.vocab;
    std::vector<double> idx;
    for (const auto& label : y) {
        auto it = std::find(m.classes.begin(), m.classes.end(), label);
        if (it == m.classes.end()) {
            m.classes.push_back(label);
            it = m.classes.end() - 1;
        }
        idx.push_back(static_cast<double>(it - m.classes.begin()));
    }
    if (m.classes.size() == 1) {
        m.degenerate = true;
        return m;
    }
    m.trees = detail::grow_forest(X, idx, m.classes.size(), params,
                                  params.features_per_split.value_or(FeatureSubset::sqrt));
    return m;
}

// Random forest regressor: variance-reduction CART trees, averaged.
inline FittedModel fit_random_forest(const FeatureMatrix& X, std::span<const double> y, const RFParams& params = {}) {
    params.validate();
    detail::require_rows(X, y.size());
    FittedModel m;
    m.kind = ModelKind::rf_regressor;
    m.rf = params;
    m.column_names = X.column_names;
    m.vocab = X.vocab;
    double mean = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(y.size());
    if (std::all_of(y.begin(), y.end(), [&](double v) { return v == y.front(); })) {
        m.degenerate = true;
        m.intercept = y.front();
        return m;
    }
    (void)mean;
    m.trees = detail::grow_forest(X, y, 0, params, params.features_per_split.value_or(FeatureSubset::third));
    return m;
}

inline FittedModel fit_random_forest(const FeatureMatrix& X, const std::vector<std::string>& y,
                                     const RFParams& params = {}) {
    return fit_random_forest(X, std::span<const std::string>(y), params);
}
inline FittedModel fit_random_forest(const FeatureMatrix& X, const std::vector<double>& y,
                                     const RFParams& params = {}) {
    return fit_random_forest(X, std::span<const double>(y), params);
}

// Least squares with intercept via the normal equations on centred data. A
// ridge term is added when the Gram matrix is close to singular.
inline FittedModel fit_linear_regression(const FeatureMatrix& X, std::span<const double> y) {
    detail::require_rows(X, y.size());
    const std::size_t n = X.n_rows, d = X.n_cols();
    FittedModel m;
    m.kind = ModelKind::linear_regressor;
    m.column_names = X.column_names;
    m.vocab = X.vocab;
    m.coefficients.assign(d, 0.0);

    std::vector<double> xbar(d, 0.0);
    double ybar = 0;
    for (std::size_t i = 0; i < n; ++i) {
        ybar += y[i];
        for (std::size_t j = 0; j < d; ++j) xbar[j] += X.at(i, j);
    }
    ybar /= static_cast<double>(n);
    for (auto& v : xbar) v /= static_cast<double>(n);

    // Columns with no spread carry no signal and keep a zero coefficient.
    std::vector<std::size_t> active;
    for (std::size_t j = 0; j < d; ++j) {
        double ss = 0;
        for (std::size_t i = 0; i < n; ++i) ss += (X.at(i, j) - xbar[j]) * (X.at(i, j) - xbar[j]);
        if (ss > 0) active.push_back(j);
    }
    m.intercept = ybar;
    if (active.empty()) {
        m.degenerate = true;
        return m;
    }

    const std::size_t k = active.size();
    std::vector<double> gram(k * k, 0.0), rhs(k, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t a = 0; a < k; ++a) {
            double xa = X.at(i, active[a]) - xbar[active[a]];
            rhs[a] += xa * (y[i] - ybar);
            for (std::size_t b = 0; b <= a; ++b) gram[a * k + b] += xa * (X.at(i, active[b]) - xbar[active[b]]);
        }
    }
    for (std::size_t a = 0; a < k; ++a)
        for (std::size_t b = 0; b < a; ++b) gram[b * k + a] = gram[a * k + b];

    double max_diag = 0;
    for (std::size_t a = 0; a < k; ++a) max_diag = std::max(max_diag, gram[a * k + a]);

    // Cholesky; returns false on a pivot that is not clearly positive.
    auto solve = [&](double ridge, std::vector<double>& beta) {
        std::vector<double> L(k * k, 0.0);
        for (std::size_t a = 0; a < k; ++a) {
            for (std::size_t b = 0; b <= a; ++b) {
                double s = gram[a * k + b] + (a == b ? ridge : 0.0);
                for (std::size_t c = 0; c < b; ++c) s -= L[a * k + c] * L[b * k + c];
                if (a == b) {
                    if (s <= 1e-10 * max_diag) return false;
                    L[a * k + a] = std::sqrt(s);
                } else {
                    L[a * k + b] = s / L[b * k + b];
                }
            }
        }
        std::vector<double> z(k);
        for (std::size_t a = 0; a < k; ++a) {
            double s = rhs[a];
            for (std::size_t c = 0; c < a; ++c) s -= L[a * k + c] * z[c];
            z[a] = s / L[a * k + a];
        }
        beta.assign(k, 0.0);
        for (std::size_t a = k; a-- > 0;) {
            double s = z[a];
            for (std::size_t c = a + 1; c < k; ++c) s -= L[c * k + a] * beta[c];
            beta[a] = s / L[a * k + a];
        }
        return true;
    };

    std::vector<double> beta;
    if (!solve(0.0, beta)) {
        m.degenerate = true; // ridge fallback engaged
        if (!solve(1e-6 * max_diag, beta)) throw DataError("linear regression: Gram matrix could not be factored");
    }
    for (std::size_t a = 0; a < k; ++a) {
        m.coefficients[active[a]] = beta[a];
        m.intercept -= beta[a] * xbar[active[a]];
    }
    return m;
}

inline FittedModel fit_linear_regression(const FeatureMatrix& X, const std::vector<double>& y) {
    return fit_linear_regression(X, std::span<const double>(y));
}

// Stagewise least-squares boosting of depth-limited regression trees.
inline FittedModel fit_gbt_regressor(const FeatureMatrix& X, std::span<const double> y, const GbtParams& params = {}) {
    params.validate();
    detail::require_rows(X, y.size());
    FittedModel m;
    m.kind = ModelKind::gbt_regressor;
    m.gbt = params;
    m.learning_rate = params.learning_rate;
    m.column_names = X.column_names;
    m.vocab = X.vocab;
    const std::size_t n = X.n_rows;
    m.intercept = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);

    std::vector<double> fitted(n, m.intercept), residual(n);
    auto mse = [&] {
        double s = 0;
        for (std::size_t i = 0; i < n; ++i) s += (y[i] - fitted[i]) * (y[i] - fitted[i]);
        return s / static_cast<double>(n);
    };
    m.train_mse.push_back(mse());
    if (std::all_of(y.begin(), y.end(), [&](double v) { return v == y.front(); })) {
        m.degenerate = true;
        return m;
    }
    std::vector<std::size_t> rows(n);
    std::iota(rows.begin(), rows.end(), 0);
    for (std::size_t round = 0; round < params.n_rounds; ++round) {
        for (std::size_t i = 0; i < n; ++i) residual[i] = y[i] - fitted[i];
        detail::TreeBuilder builder(X, residual, 0, params.max_depth, 2, X.n_cols(),
                                    detail::splitmix64(params.seed ^ detail::splitmix64(round)));
        Tree tree = builder.build(rows);
        for (std::size_t i = 0; i < n; ++i) fitted[i] += params.learning_rate * tree.predict(X.row(i));
        m.trees.push_back(std::move(tree));
        m.train_mse.push_back(mse());
    }
    return m;
}

inline FittedModel fit_gbt_regressor(const FeatureMatrix& X, const std::vector<double>& y, const GbtParams& params = {}) {
    return fit_gbt_regressor(X, std::span<const double>(y), params);
}

// ---------------------------------------------------------------------------
// Prediction
// ---------------------------------------------------------------------------

inline std::vector<std::string> predict_labels(const FittedModel& m, const FeatureMatrix& X) {
    if (m.kind != ModelKind::rf_classifier) throw ConfigError("model is not a classifier");
    detail::require_columns(m, X);
    std::vector<std::string> out;
    out.reserve(X.n_rows);
    for (std::size_t r = 0; r < X.n_rows; ++r) {
        if (m.degenerate) {
            out.push_back(m.classes.front());
            continue;
        }
        std::vector<std::size_t> votes(m.classes.size(), 0);
        for (const auto& t : m.trees) ++votes[static_cast<std::size_t>(t.predict(X.row(r)))];
        out.push_back(m.classes[static_cast<std::size_t>(std::max_element(votes.begin(), votes.end()) - votes.begin())]);
    }
    return out;
}

inline std::vector<double> predict_values(const FittedModel& m, const FeatureMatrix& X) {
    if (m.kind == ModelKind::rf_classifier) throw ConfigError("model is a classifier");
    detail::require_columns(m, X);
    std::vector<double> out;
    out.reserve(X.n_rows);
    for (std::size_t r = 0; r < X.n_rows; ++r) {
        auto x = X.row(r);
        double v = m.intercept;
        switch (m.kind) {
        case ModelKind::rf_regressor:
            if (!m.degenerate) {
                v = 0;
                for (const auto& t : m.trees) v += t.predict(x);
                v /= static_cast<double>(m.trees.size());
            }
            break;
        case ModelKind::linear_regressor:
            for (std::size_t j = 0; j < x.size(); ++j) v += m.coefficients[j] * x[j];
            break;
        case ModelKind::gbt_regressor:
            for (const auto& t : m.trees) v += m.learning_rate * t.predict(x);
            break;
        default: break;
        }
        out.push_back(v);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Cross-validation
// ---------------------------------------------------------------------------

// Test-index lists for k folds over a seeded shuffle; fold sizes differ by at most one.
inline std::vector<std::vector<std::size_t>> kfold_splits(std::size_t n, std::size_t k, std::uint64_t seed) {
    if (k < 2 || k > n) throw ConfigError("fold count must be in [2, n]");
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::mt19937_64 rng(detail::splitmix64(seed));
    detail::shuffle(perm, rng);
    std::vector<std::vector<std::size_t>> folds(k);
    std::size_t pos = 0;
    for (std::size_t f = 0; f < k; ++f) {
        std::size_t size = n / k + (f < n % k ? 1 : 0);
        folds[f].assign(perm.begin() + static_cast<std::ptrdiff_t>(pos),
                        perm.begin() + static_cast<std::ptrdiff_t>(pos + size));
        std::sort(folds[f].begin(), folds[f].end());
        pos += size;
    }
    return folds;
}

// Out-of-fold classifier predictions, one per row.
inline std::vector<std::string> cross_val_predict(const FeatureMatrix& X, const std::vector<std::string>& y,
                                                  const RFParams& params, std::size_t k) {
    detail::require_rows(X, y.size());
    std::vector<std::string> out(X.n_rows);
    for (const auto& test : kfold_splits(X.n_rows, k, params.seed)) {
        std::vector<std::size_t> train;
        for (std::size_t i = 0; i < X.n_rows; ++i)
            if (!std::binary_search(test.begin(), test.end(), i)) train.push_back(i);
        std::vector<std::string> y_train;
        for (auto i : train) y_train.push_back(y[i]);
        auto model = fit_random_forest(select_rows(X, train), y_train, params);
        auto pred = predict_labels(model, select_rows(X, test));
        for (std::size_t j = 0; j < test.size(); ++j) out[test[j]] = pred[j];
    }
    return out;
}

// ---------------------------------------------------------------------------
// JSON (self-describing model documents)
// ---------------------------------------------------------------------------

inline void to_json(nlohmann::json& j, const FieldVocab& v) { j = {{"field", v.field}, {"categories", v.categories}}; }
inline void from_json(const nlohmann::json& j, FieldVocab& v) {
    j.at("field").get_to(v.field);
    j.at("categories").get_to(v.categories);
}

inline std::string_view to_string(FeatureSubset s) {
    switch (s) {
    case FeatureSubset::sqrt: return "sqrt";
    case FeatureSubset::third: return "third";
    case FeatureSubset::all: return "all";
    }
    return "?";
}

inline FeatureSubset feature_subset_from_string(std::string_view s) {
    if (s == "sqrt") return FeatureSubset::sqrt;
    if (s == "third") return FeatureSubset::third;
    if (s == "all") return FeatureSubset::all;
    throw ConfigError("unknown features_per_split '" + std::string(s) + "'");
}

inline void to_json(nlohmann::json& j, const RFParams& p) {
    j = {{"n_trees", p.n_trees},
         {"max_depth", p.max_depth ? nlohmann::json(*p.max_depth) : nlohmann::json(nullptr)},
         {"min_samples_split", p.min_samples_split},
         {"features_per_split",
          p.features_per_split ? nlohmann::json(to_string(*p.features_per_split)) : nlohmann::json(nullptr)},
         {"bootstrap", p.bootstrap},
         {"seed", p.seed}};
}
inline void from_json(const nlohmann::json& j, RFParams& p) {
    p = RFParams{};
    if (j.contains("n_trees")) j.at("n_trees").get_to(p.n_trees);
    if (j.contains("max_depth") && !j.at("max_depth").is_null()) p.max_depth = j.at("max_depth").get<std::size_t>();
    if (j.contains("min_samples_split")) j.at("min_samples_split").get_to(p.min_samples_split);
    if (j.contains("features_per_split") && !j.at("features_per_split").is_null())
        p.features_per_split = feature_subset_from_string(j.at("features_per_split").get<std::string>());
    if (j.contains("bootstrap")) j.at("bootstrap").get_to(p.bootstrap);
    if (j.contains("seed")) j.at("seed").get_to(p.seed);
    if (j.contains("workers")) j.at("workers").get_to(p.workers);
}

inline void to_json(nlohmann::json& j, const GbtParams& p) {
    j = {{"n_rounds", p.n_rounds}, {"learning_rate", p.learning_rate}, {"max_depth", p.max_depth}, {"seed", p.seed}};
}
inline void from_json(const nlohmann::json& j, GbtParams& p) {
    p = GbtParams{};
    if (j.contains("n_rounds")) j.at("n_rounds").get_to(p.n_rounds);
    if (j.contains("learning_rate")) j.at("learning_rate").get_to(p.learning_rate);
    if (j.contains("max_depth")) j.at("max_depth").get_to(p.max_depth);
    if (j.contains("seed")) j.at("seed").get_to(p.seed);
}

inline void to_json(nlohmann::json& j, const Tree& t) {
    j = nlohmann::json::array();
    for (const auto& n : t.nodes) j.push_back({n.feature, n.threshold, n.left, n.right, n.value});
}
inline void from_json(const nlohmann::json& j, Tree& t) {
    t.nodes.clear();
    for (const auto& n : j)
        t.nodes.push_back(TreeNode{n.at(0).get<int>(), n.at(1).get<double>(), n.at(2).get<int>(), n.at(3).get<int>(),
                                   n.at(4).get<double>()});
}

inline ModelKind model_kind_from_string(std::string_view s) {
    for (auto k : {ModelKind::rf_classifier, ModelKind::rf_regressor, ModelKind::linear_regressor,
                   ModelKind::gbt_regressor})
        if (to_string(k) == s) return k;
    throw DataError("unknown model kind '" + std::string(s) + "'");
}

inline void to_json(nlohmann::json& j, const FittedModel& m) {
    j = {{"kind", to_string(m.kind)},
         {"trees", m.trees},
         {"classes", m.classes},
         {"coefficients", m.coefficients},
         {"intercept", m.intercept},
         {"learning_rate", m.learning_rate},
         {"train_mse", m.train_mse},
         {"column_names", m.column_names},
         {"vocab", m.vocab},
         {"rf_params", m.rf},
         {"gbt_params", m.gbt},
         {"degenerate", m.degenerate}};
}
inline void from_json(const nlohmann::json& j, FittedModel& m) {
    m.kind = model_kind_from_string(j.at("kind").get<std::string>());
    j.at("trees").get_to(m.trees);
    j.at("classes").get_to(m.classes);
    j.at("coefficients").get_to(m.coefficients);
    j.at("intercept").get_to(m.intercept);
    j.at("learning_rate").get_to(m.learning_rate);
    j.at("train_mse").get_to(m.train_mse);
    j.at("column_names").get_to(m.column_names);
    j.at("vocab").get_to(m.vocab);
    j.at("rf_params").get_to(m.rf);
    j.at("gbt_params").get_to(m.gbt);
    j.at("degenerate").get_to(m.degenerate);
}

} // namespace metaprobe
