#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "iotsentry/ensemble.hpp"
#include "iotsentry/neighbors.hpp"
#include "iotsentry/tree.hpp"

namespace iotsentry {

enum class ModelKind { dt, rf, gbm, ada, knn };

std::string_view to_string(ModelKind kind);
ModelKind parse_model_kind(std::string_view text);
/// dt, rf, gbm, ada, knn
const std::vector<ModelKind>& all_model_kinds();
/// Parses "dt,rf,knn".
std::vector<ModelKind> parse_model_list(std::string_view text);

using ParamValue = std::variant<std::int64_t, double, std::string>;
/// Ordered by parameter name.
using ParamSet = std::map<std::string, ParamValue>;

std::string to_string(const ParamValue& value);
std::string to_string(const ParamSet& params);

using Hyperparams = std::variant<TreeConfig, ForestConfig, GbmConfig, AdaBoostConfig, KnnConfig>;

/// The tuned settings each classifier is run with by default:
///   dt   criterion=entropy max_depth=30 min_samples_leaf=5 min_samples_split=10 max_features=sqrt
///   rf   criterion=gini max_depth=8 max_features=sqrt n_estimators=200
///   gbm  learning_rate=0.01 max_depth=4 n_estimators=500 subsample=0.8
///   ada  algorithm=SAMME.R learning_rate=0.1 n_estimators=100
///   knn  n_neighbors=5 weights=distance metric=manhattan p=1
Hyperparams default_hyperparams(ModelKind kind);

/// Defaults for `kind` with `params` applied on top and every seed set to
/// `seed`. Throws on unknown names or invalid values.
Hyperparams make_hyperparams(ModelKind kind, const ParamSet& params, std::uint64_t seed);

/// Every tunable setting of `h` as a parameter set (seed excluded).
ParamSet describe(const Hyperparams& h);
ModelKind kind_of(const Hyperparams& h);
std::uint64_t seed_of(const Hyperparams& h);

using FittedModel = std::variant<FittedTree, FittedForest, FittedGbm, FittedAdaBoost, FittedKnn>;

ModelKind kind_of(const FittedModel& model);
Hyperparams hyperparams_of(const FittedModel& model);
const std::vector<std::string>& class_names_of(const FittedModel& model);
TaxonomyLevel level_of(const FittedModel& model);

FittedModel fit_model(const Hyperparams& h, const FeatureMatrix& m, const LabelVector& y);
LabelVector predict(const FittedModel& model, const FeatureMatrix& m);
Matrix predict_proba(const FittedModel& model, const FeatureMatrix& m);

}  // namespace iotsentry
