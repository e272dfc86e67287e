#include "iotsentry/ensemble.hpp"

#include <numeric>

#include "iotsentry/error.hpp"
#include "iotsentry/parallel.hpp"
#include "iotsentry/rng.hpp"

namespace iotsentry {

void ForestConfig::validate() const {
    if (n_estimators < 1) throw Error("n_estimators must be positive");
    tree.validate();
}

FittedForest FittedForest::fit(const FeatureMatrix& m, const LabelVector& y, const ForestConfig& config) {
    config.validate();
    if (m.rows() == 0) throw Error("cannot fit a forest on an empty matrix");
    if (m.rows() != y.size()) throw Error("feature rows and labels differ in length");

    const ColumnOrder order(m);
    const std::size_t n = m.rows();

    FittedForest forest;
    forest.config = config;
    forest.class_names = y.class_names;
    forest.level = y.level;
    forest.trees.resize(static_cast<std::size_t>(config.n_estimators));

    parallel_for(forest.trees.size(), [&](std::size_t t) {
        TreeConfig tree_config = config.tree;
        tree_config.seed = derive_seed(config.seed, 0x7ee5, t);
        std::vector<std::uint32_t> counts;
        if (config.bootstrap) {
            counts.assign(n, 0);
            Rng rng(derive_seed(config.seed, 0xb007, t));
            for (std::size_t i = 0; i < n; ++i) ++counts[static_cast<std::size_t>(rng.uniform_index(n))];
        }
        forest.trees[t] = grow_classification_tree(m, y, tree_config, SampleSet{counts, {}}, &order);
    });
    return forest;
}

Matrix FittedForest::votes(const FeatureMatrix& m) const {
    if (trees.empty()) throw Error("forest has no trees");
    check_feature_count(m, trees.front().n_features);
    Matrix out(m.rows(), class_names.size());
    for (std::size_t r = 0; r < m.rows(); ++r) {
        const auto x = m.row(r);
        for (const auto& tree : trees) out(r, argmax(tree.leaf_value(tree.leaf_index(x)))) += 1.0;
    }
    return out;
}

LabelVector FittedForest::predict(const FeatureMatrix& m) const {
    const auto v = votes(m);
    LabelVector out{{}, class_names, level};
    out.ids.resize(m.rows());
    for (std::size_t r = 0; r < m.rows(); ++r) out.ids[r] = static_cast<int>(argmax(v.row(r)));
    return out;
}

Matrix FittedForest::predict_proba(const FeatureMatrix& m) const {
    if (trees.empty()) throw Error("forest has no trees");
    check_feature_count(m, trees.front().n_features);
    Matrix out(m.rows(), class_names.size());
    const double per_tree = 1.0 / static_cast<double>(trees.size());
    for (std::size_t r = 0; r < m.rows(); ++r) {
        const auto x = m.row(r);
        auto dst = out.row(r);
        for (const auto& tree : trees) {
            const auto leaf = tree.leaf_value(tree.leaf_index(x));
            const double total = std::accumulate(leaf.begin(), leaf.end(), 0.0);
            for (std::size_t k = 0; k < leaf.size(); ++k) dst[k] += per_tree * leaf[k] / total;
        }
    }
    return out;
}

}  // namespace iotsentry
