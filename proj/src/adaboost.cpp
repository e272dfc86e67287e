#include <algorithm>
#include <cmath>
#include <numeric>

#include "iotsentry/ensemble.hpp"
#include "iotsentry/error.hpp"
#include "iotsentry/rng.hpp"

namespace iotsentry {

void AdaBoostConfig::validate() const {
    if (n_estimators < 1) throw Error("n_estimators must be positive");
    if (!(learning_rate > 0.0)) throw Error("learning_rate must be positive");
    base_tree.validate();
}

namespace {

// Leaf class frequencies floored at the SAMME.R probability floor.
Matrix floored_proba(const Tree& tree, const FeatureMatrix& m, std::size_t classes) {
    Matrix p(m.rows(), classes);
    for (std::size_t r = 0; r < m.rows(); ++r) {
        const auto leaf = tree.leaf_value(tree.leaf_index(m.row(r)));
        const double total = std::accumulate(leaf.begin(), leaf.end(), 0.0);
        auto dst = p.row(r);
        for (std::size_t k = 0; k < classes; ++k) dst[k] = std::max(leaf[k] / total, kSammeProbabilityFloor);
    }
    return p;
}

bool single_pure_leaf(const Tree& tree) {
    if (tree.nodes.size() != 1) return false;
    const auto leaf = tree.leaf_value(0);
    return std::count_if(leaf.begin(), leaf.end(), [](double c) { return c > 0.0; }) <= 1;
}

}  // namespace

void samme_r_reweight(std::span<double> weights, std::span<const int> labels, const Matrix& proba,
                      double learning_rate) {
    const auto k = static_cast<double>(proba.cols());
    const double off_target = -1.0 / (k - 1.0);
    for (std::size_t i = 0; i < weights.size(); ++i) {
        const auto p = proba.row(i);
        double dot = 0.0;
        for (std::size_t c = 0; c < p.size(); ++c)
            dot += (static_cast<int>(c) == labels[i] ? 1.0 : off_target) * std::log(p[c]);
        weights[i] *= std::exp(-learning_rate * ((k - 1.0) / k) * dot);
    }
    const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
    if (!(total > 0.0) || !std::isfinite(total)) throw Error("AdaBoost sample weights degenerated");
    for (auto& w : weights) w /= total;
}

FittedAdaBoost FittedAdaBoost::fit(const FeatureMatrix& m, const LabelVector& y, const AdaBoostConfig& config,
                                   bool record_weights) {
    config.validate();
    if (m.rows() != y.size()) throw Error("feature rows and labels differ in length");
    const auto counts = y.class_counts();
    if (std::count_if(counts.begin(), counts.end(), [](std::size_t c) { return c > 0; }) < 2)
        throw Error("AdaBoost needs at least two classes in the training data");

    const std::size_t n = m.rows();
    const std::size_t classes = y.num_classes();
    const ColumnOrder order(m);

    FittedAdaBoost model;
    model.config = config;
    model.class_names = y.class_names;
    model.level = y.level;

    std::vector<double> weights(n, 1.0 / static_cast<double>(n));
    if (record_weights) model.weight_history.push_back(weights);

    for (int round = 0; round < config.n_estimators; ++round) {
        TreeConfig tree_config = config.base_tree;
        tree_config.seed = derive_seed(config.seed, 0xada, static_cast<std::uint64_t>(round));
        Tree learner = grow_classification_tree(m, y, tree_config, SampleSet{{}, weights}, &order);

        if (single_pure_leaf(learner)) {
            // A learner that is certain of one class everywhere carries no
            // signal; only the very first round keeps it.
            if (round == 0) model.learners.push_back(std::move(learner));
            break;
        }

        const auto proba = floored_proba(learner, m, classes);
        model.learners.push_back(std::move(learner));
        samme_r_reweight(weights, y.ids, proba, config.learning_rate);
        if (record_weights) model.weight_history.push_back(weights);
    }
    return model;
}

Matrix FittedAdaBoost::decision_function(const FeatureMatrix& m) const {
    if (learners.empty()) throw Error("AdaBoost model has no learners");
    check_feature_count(m, learners.front().n_features);
    const std::size_t classes = class_names.size();
    const double scale = static_cast<double>(classes) - 1.0;
    Matrix scores(m.rows(), classes);
    std::vector<double> logp(classes);
    for (const auto& learner : learners) {
        const auto p = floored_proba(learner, m, classes);
        for (std::size_t r = 0; r < m.rows(); ++r) {
            double mean = 0.0;
            for (std::size_t k = 0; k < classes; ++k) {
                logp[k] = std::log(p(r, k));
                mean += logp[k];
            }
            mean /= static_cast<double>(classes);
            auto dst = scores.row(r);
            for (std::size_t k = 0; k < classes; ++k) dst[k] += scale * (logp[k] - mean);
        }
    }
    return scores;
}

LabelVector FittedAdaBoost::predict(const FeatureMatrix& m) const {
    const auto scores = decision_function(m);
    LabelVector out{{}, class_names, level};
    out.ids.resize(m.rows());
    for (std::size_t r = 0; r < m.rows(); ++r) out.ids[r] = static_cast<int>(argmax(scores.row(r)));
    return out;
}

Matrix FittedAdaBoost::predict_proba(const FeatureMatrix& m) const {
    auto scores = decision_function(m);
    const double divisor = static_cast<double>(learners.size()) * (static_cast<double>(class_names.size()) - 1.0);
    for (std::size_t r = 0; r < scores.rows(); ++r)
        for (auto& v : scores.row(r)) v /= divisor;
    softmax_rows(scores);
    return scores;
}

}  // namespace iotsentry
