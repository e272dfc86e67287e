#pragma once

#include <cstdint>
#include <vector>

#include "iotsentry/data.hpp"
#include "iotsentry/matrix.hpp"
#include "iotsentry/tree.hpp"

namespace iotsentry {

// ---------------------------------------------------------------------------
// Random forest

struct ForestConfig {
    int n_estimators = 200;
    TreeConfig tree{Criterion::gini, 8, 2, 1, MaxFeatures::sqrt, 0};
    bool bootstrap = true;
    std::uint64_t seed = 0;

    void validate() const;
    bool operator==(const ForestConfig&) const = default;
};

struct FittedForest {
    ForestConfig config;
    std::vector<Tree> trees;
    std::vector<std::string> class_names;
    TaxonomyLevel level = TaxonomyLevel::attack34;

    /// Each tree sees a seeded bootstrap resample of n rows (or all rows when
    /// bootstrap is off) and its own per-node feature sampling seed.
    static FittedForest fit(const FeatureMatrix& m, const LabelVector& y, const ForestConfig& config);

    /// Plurality of per-tree argmax votes; ties go to the lowest class id.
    LabelVector predict(const FeatureMatrix& m) const;
    /// Vote counts per class, rows = inputs.
    Matrix votes(const FeatureMatrix& m) const;
    /// Mean of per-tree leaf class frequencies.
    Matrix predict_proba(const FeatureMatrix& m) const;

    bool operator==(const FittedForest&) const = default;
};

// ---------------------------------------------------------------------------
// AdaBoost, real-valued multi-class variant (SAMME.R)

inline constexpr double kSammeProbabilityFloor = 1e-10;

struct AdaBoostConfig {
    int n_estimators = 100;
    double learning_rate = 0.1;
    TreeConfig base_tree{Criterion::gini, 1, 2, 1, MaxFeatures::all, 0};
    std::uint64_t seed = 0;

    void validate() const;
    bool operator==(const AdaBoostConfig&) const = default;
};

struct FittedAdaBoost {
    AdaBoostConfig config;
    std::vector<Tree> learners;
    std::vector<std::string> class_names;
    TaxonomyLevel level = TaxonomyLevel::attack34;

    /// Sample weights after initialisation and after each kept round
    /// (weight_history[0] is uniform). Only populated when requested.
    std::vector<std::vector<double>> weight_history;

    static FittedAdaBoost fit(const FeatureMatrix& m, const LabelVector& y, const AdaBoostConfig& config,
                              bool record_weights = false);

    /// Summed per-round scores (K-1)(log p_k - mean_j log p_j).
    Matrix decision_function(const FeatureMatrix& m) const;
    LabelVector predict(const FeatureMatrix& m) const;
    /// softmax(decision / (rounds * (K-1))).
    Matrix predict_proba(const FeatureMatrix& m) const;

    bool operator==(const FittedAdaBoost& o) const {
        return config == o.config && learners == o.learners && class_names == o.class_names && level == o.level;
    }
};

/// One SAMME.R reweighting step: w_i *= exp(-lr (K-1)/K y_i . log p_i), then
/// renormalise to sum 1. `proba` rows must already be floored.
void samme_r_reweight(std::span<double> weights, std::span<const int> labels, const Matrix& proba,
                      double learning_rate);

// ---------------------------------------------------------------------------
// Gradient boosting with multinomial deviance

struct GbmConfig {
    int n_estimators = 500;
    double learning_rate = 0.01;
    int max_depth = 4;
    double subsample = 0.8;
    int min_samples_split = 2;
    int min_samples_leaf = 1;
    std::uint64_t seed = 0;

    void validate() const;
    bool operator==(const GbmConfig&) const = default;
};

struct FittedGbm {
    GbmConfig config;
    std::vector<double> initial_scores;      // log class priors
    std::vector<std::vector<Tree>> stages;   // stages[s][k]
    std::vector<std::string> class_names;
    TaxonomyLevel level = TaxonomyLevel::attack34;
    /// Mean multinomial deviance on the full training data before any stage
    /// and after each stage (size n_estimators + 1).
    std::vector<double> train_deviance;

    static FittedGbm fit(const FeatureMatrix& m, const LabelVector& y, const GbmConfig& config);

    Matrix raw_scores(const FeatureMatrix& m) const;
    Matrix predict_proba(const FeatureMatrix& m) const;
    LabelVector predict(const FeatureMatrix& m) const;

    bool operator==(const FittedGbm& o) const {
        return config == o.config && initial_scores == o.initial_scores && stages == o.stages &&
               class_names == o.class_names && level == o.level;
    }
};

/// Row indices drawn for stage `stage`: ceil(subsample * n) without
/// replacement, ascending.
std::vector<std::size_t> gbm_stage_rows(std::size_t n, double subsample, std::uint64_t seed, std::size_t stage);

/// Row-wise softmax in place.
void softmax_rows(Matrix& scores);

/// Mean negative log-likelihood of the true classes under `proba`.
double multinomial_deviance(const Matrix& proba, std::span<const int> labels);

}  // namespace iotsentry
