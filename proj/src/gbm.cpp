#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "iotsentry/ensemble.hpp"
#include "iotsentry/error.hpp"
#include "iotsentry/parallel.hpp"
#include "iotsentry/rng.hpp"

namespace iotsentry {

namespace {

constexpr double kPriorFloor = 1e-300;
constexpr double kLogFloor = 1e-300;

}  // namespace

void GbmConfig::validate() const {
    if (n_estimators < 0) throw Error("n_estimators must be nonnegative");
    if (!(learning_rate > 0.0)) throw Error("learning_rate must be positive");
    if (max_depth < 1) throw Error("max_depth must be positive");
    if (!(subsample > 0.0 && subsample <= 1.0)) throw Error("subsample must lie in (0, 1]");
    if (min_samples_split < 2) throw Error("min_samples_split must be at least 2");
    if (min_samples_leaf < 1) throw Error("min_samples_leaf must be at least 1");
}

void softmax_rows(Matrix& scores) {
    for (std::size_t r = 0; r < scores.rows(); ++r) {
        auto row = scores.row(r);
        const double top = *std::max_element(row.begin(), row.end());
        double total = 0.0;
        for (auto& v : row) {
            v = std::exp(v - top);
            total += v;
        }
        for (auto& v : row) v /= total;
    }
}

double multinomial_deviance(const Matrix& proba, std::span<const int> labels) {
    if (labels.empty()) return 0.0;
    double total = 0.0;
    for (std::size_t i = 0; i < labels.size(); ++i)
        total -= std::log(std::max(proba(i, static_cast<std::size_t>(labels[i])), kLogFloor));
    return total / static_cast<double>(labels.size());
}

std::vector<std::size_t> gbm_stage_rows(std::size_t n, double subsample, std::uint64_t seed, std::size_t stage) {
    const auto take = static_cast<std::size_t>(std::ceil(subsample * static_cast<double>(n)));
    if (take >= n) {
        std::vector<std::size_t> all(n);
        std::iota(all.begin(), all.end(), std::size_t{0});
        return all;
    }
    Rng rng(derive_seed(seed, 0x6b3, stage));
    return sample_without_replacement(n, take, rng);
}

FittedGbm FittedGbm::fit(const FeatureMatrix& m, const LabelVector& y, const GbmConfig& config) {
    config.validate();
    if (m.rows() != y.size()) throw Error("feature rows and labels differ in length");
    const auto counts = y.class_counts();
    if (std::count_if(counts.begin(), counts.end(), [](std::size_t c) { return c > 0; }) < 2)
        throw Error("gradient boosting needs at least two classes in the training data");

    const std::size_t n = m.rows();
    const std::size_t classes = y.num_classes();
    const double newton_scale = (static_cast<double>(classes) - 1.0) / static_cast<double>(classes);

    FittedGbm model;
    model.config = config;
    model.class_names = y.class_names;
    model.level = y.level;
    model.initial_scores.resize(classes);
    for (std::size_t k = 0; k < classes; ++k)
        model.initial_scores[k] =
            std::log(std::max(static_cast<double>(counts[k]) / static_cast<double>(n), kPriorFloor));

    Matrix raw(n, classes);
    for (std::size_t r = 0; r < n; ++r) std::copy(model.initial_scores.begin(), model.initial_scores.end(), raw.row(r).begin());

    auto deviance_of = [&](const Matrix& scores) {
        Matrix p = scores;
        softmax_rows(p);
        return multinomial_deviance(p, y.ids);
    };
    model.train_deviance.push_back(deviance_of(raw));

    const ColumnOrder order(m);
    const TreeConfig tree_config{Criterion::gini, config.max_depth, config.min_samples_split, config.min_samples_leaf,
                                 MaxFeatures::all, 0};
    std::vector<std::uint32_t> in_stage(n);
    std::vector<std::vector<double>> residual(classes, std::vector<double>(n));

    for (int stage = 0; stage < config.n_estimators; ++stage) {
        Matrix proba = raw;
        softmax_rows(proba);
        const auto rows = gbm_stage_rows(n, config.subsample, config.seed, static_cast<std::size_t>(stage));
        std::fill(in_stage.begin(), in_stage.end(), 0u);
        for (const auto r : rows) in_stage[r] = 1;

        std::vector<Tree> trees(classes);
        parallel_for(classes, [&](std::size_t k) {
            auto& target = residual[k];
            for (std::size_t r = 0; r < n; ++r)
                target[r] = (y.ids[r] == static_cast<int>(k) ? 1.0 : 0.0) - proba(r, k);
            Tree tree = grow_regression_tree(m, target, tree_config, SampleSet{in_stage, {}}, &order);

            // Newton step per leaf over the leaf's subsampled rows.
            std::vector<double> numerator(tree.nodes.size(), 0.0);
            std::vector<double> denominator(tree.nodes.size(), 0.0);
            for (const auto r : rows) {
                const auto leaf = static_cast<std::size_t>(tree.leaf_index(m.row(r)));
                const double g = target[r];
                numerator[leaf] += g;
                denominator[leaf] += std::abs(g) * (1.0 - std::abs(g));
            }
            for (std::size_t node = 0; node < tree.nodes.size(); ++node) {
                if (!tree.nodes[node].is_leaf()) continue;
                const double step = std::abs(denominator[node]) < 1e-150
                                        ? 0.0
                                        : newton_scale * numerator[node] / denominator[node];
                tree.leaf_value(static_cast<std::int32_t>(node))[0] = step;
            }
            trees[k] = std::move(tree);
        });

        for (std::size_t r = 0; r < n; ++r) {
            const auto x = m.row(r);
            for (std::size_t k = 0; k < classes; ++k)
                raw(r, k) += config.learning_rate * trees[k].leaf_value(trees[k].leaf_index(x))[0];
        }
        model.stages.push_back(std::move(trees));
        model.train_deviance.push_back(deviance_of(raw));
    }
    return model;
}

Matrix FittedGbm::raw_scores(const FeatureMatrix& m) const {
    const std::size_t classes = class_names.size();
    if (!stages.empty()) check_feature_count(m, stages.front().front().n_features);
    Matrix raw(m.rows(), classes);
    for (std::size_t r = 0; r < m.rows(); ++r) {
        const auto x = m.row(r);
        auto dst = raw.row(r);
        std::copy(initial_scores.begin(), initial_scores.end(), dst.begin());
        for (const auto& stage : stages)
            for (std::size_t k = 0; k < classes; ++k)
                dst[k] += config.learning_rate * stage[k].leaf_value(stage[k].leaf_index(x))[0];
    }
    return raw;
}

Matrix FittedGbm::predict_proba(const FeatureMatrix& m) const {
    auto raw = raw_scores(m);
    softmax_rows(raw);
    return raw;
}

LabelVector FittedGbm::predict(const FeatureMatrix& m) const {
    const auto raw = raw_scores(m);
    LabelVector out{{}, class_names, level};
    out.ids.resize(m.rows());
    for (std::size_t r = 0; r < m.rows(); ++r) out.ids[r] = static_cast<int>(argmax(raw.row(r)));
    return out;
}

}  // namespace iotsentry
