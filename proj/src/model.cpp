#include "iotsentry/model.hpp"

#include <cmath>
#include <sstream>

#include "iotsentry/error.hpp"
#include "iotsentry/textio.hpp"

namespace iotsentry {

std::string_view to_string(ModelKind kind) {
    switch (kind) {
        case ModelKind::dt: return "dt";
        case ModelKind::rf: return "rf";
        case ModelKind::gbm: return "gbm";
        case ModelKind::ada: return "ada";
        case ModelKind::knn: return "knn";
    }
    return "dt";
}

ModelKind parse_model_kind(std::string_view text) {
    for (const auto k : all_model_kinds())
        if (text == to_string(k)) return k;
    throw Error("unknown model kind '" + std::string(text) + "' (expected dt, rf, gbm, ada or knn)");
}

const std::vector<ModelKind>& all_model_kinds() {
    static const std::vector<ModelKind> kinds{ModelKind::dt, ModelKind::rf, ModelKind::gbm, ModelKind::ada,
                                              ModelKind::knn};
    return kinds;
}

std::vector<ModelKind> parse_model_list(std::string_view text) {
    std::vector<ModelKind> out;
    std::size_t start = 0;
    while (start <= text.size()) {
        const auto end = std::min(text.find(',', start), text.size());
        const auto item = text.substr(start, end - start);
        if (!item.empty()) out.push_back(parse_model_kind(item));
        start = end + 1;
    }
    if (out.empty()) throw Error("empty model list");
    return out;
}

std::string to_string(const ParamValue& value) {
    return std::visit(
        [](const auto& v) -> std::string {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, std::string>) return v;
            else if constexpr (std::is_same_v<T, double>) return format_double(v);
            else return std::to_string(v);
        },
        value);
}

std::string to_string(const ParamSet& params) {
    std::ostringstream out;
    out << '{';
    bool first = true;
    for (const auto& [name, value] : params) {
        out << (first ? "" : ", ") << name << '=' << to_string(value);
        first = false;
    }
    out << '}';
    return out.str();
}

namespace {

std::int64_t as_int(const std::string& name, const ParamValue& v) {
    if (const auto* i = std::get_if<std::int64_t>(&v)) return *i;
    if (const auto* d = std::get_if<double>(&v); d && std::floor(*d) == *d) return static_cast<std::int64_t>(*d);
    throw Error("parameter '" + name + "' expects an integer, got '" + to_string(v) + "'");
}

double as_double(const std::string& name, const ParamValue& v) {
    if (const auto* d = std::get_if<double>(&v)) return *d;
    if (const auto* i = std::get_if<std::int64_t>(&v)) return static_cast<double>(*i);
    throw Error("parameter '" + name + "' expects a number, got '" + to_string(v) + "'");
}

std::string as_string(const std::string& name, const ParamValue& v) {
    if (const auto* s = std::get_if<std::string>(&v)) return *s;
    throw Error("parameter '" + name + "' expects text, got '" + to_string(v) + "'");
}

bool as_bool(const std::string& name, const ParamValue& v) {
    if (const auto* s = std::get_if<std::string>(&v)) {
        if (*s == "true") return true;
        if (*s == "false") return false;
        throw Error("parameter '" + name + "' expects true or false");
    }
    return as_int(name, v) != 0;
}

std::optional<int> as_depth(const std::string& name, const ParamValue& v) {
    if (const auto* s = std::get_if<std::string>(&v); s && (*s == "none" || *s == "unlimited")) return std::nullopt;
    const auto d = as_int(name, v);
    if (d <= 0) return std::nullopt;
    return static_cast<int>(d);
}

Criterion as_criterion(const std::string& name, const ParamValue& v) {
    const auto s = as_string(name, v);
    if (s == "gini") return Criterion::gini;
    if (s == "entropy") return Criterion::entropy;
    throw Error("parameter '" + name + "' must be gini or entropy, got '" + s + "'");
}

MaxFeatures as_max_features(const std::string& name, const ParamValue& v) {
    const auto s = as_string(name, v);
    if (s == "sqrt") return MaxFeatures::sqrt;
    if (s == "all" || s == "none") return MaxFeatures::all;
    throw Error("parameter '" + name + "' must be sqrt or all, got '" + s + "'");
}

std::string criterion_name(Criterion c) { return c == Criterion::gini ? "gini" : "entropy"; }
std::string max_features_name(MaxFeatures m) { return m == MaxFeatures::sqrt ? "sqrt" : "all"; }
ParamValue depth_value(const std::optional<int>& d) {
    if (!d) return std::string("none");
    return static_cast<std::int64_t>(*d);
}

[[noreturn]] void unknown(ModelKind kind, const std::string& name) {
    throw Error("unknown parameter '" + name + "' for model " + std::string(to_string(kind)));
}

bool apply_tree_param(TreeConfig& t, const std::string& name, const ParamValue& v) {
    if (name == "criterion") t.criterion = as_criterion(name, v);
    else if (name == "max_depth") t.max_depth = as_depth(name, v);
    else if (name == "min_samples_split") t.min_samples_split = static_cast<int>(as_int(name, v));
    else if (name == "min_samples_leaf") t.min_samples_leaf = static_cast<int>(as_int(name, v));
    else if (name == "max_features") t.max_features = as_max_features(name, v);
    else return false;
    return true;
}

void describe_tree(const TreeConfig& t, ParamSet& out) {
    out["criterion"] = criterion_name(t.criterion);
    out["max_depth"] = depth_value(t.max_depth);
    out["min_samples_split"] = std::int64_t{t.min_samples_split};
    out["min_samples_leaf"] = std::int64_t{t.min_samples_leaf};
    out["max_features"] = max_features_name(t.max_features);
}

}  // namespace

Hyperparams default_hyperparams(ModelKind kind) {
    switch (kind) {
        case ModelKind::dt: return TreeConfig{Criterion::entropy, 30, 10, 5, MaxFeatures::sqrt, 0};
        case ModelKind::rf: return ForestConfig{};
        case ModelKind::gbm: return GbmConfig{};
        case ModelKind::ada: return AdaBoostConfig{};
        case ModelKind::knn: return KnnConfig{};
    }
    throw Error("unknown model kind");
}

Hyperparams make_hyperparams(ModelKind kind, const ParamSet& params, std::uint64_t seed) {
    Hyperparams h = default_hyperparams(kind);
    std::visit(
        [&](auto& cfg) {
            using T = std::decay_t<decltype(cfg)>;
            for (const auto& [name, v] : params) {
                if constexpr (std::is_same_v<T, TreeConfig>) {
                    if (!apply_tree_param(cfg, name, v)) unknown(kind, name);
                } else if constexpr (std::is_same_v<T, ForestConfig>) {
                    if (name == "n_estimators") cfg.n_estimators = static_cast<int>(as_int(name, v));
                    else if (name == "bootstrap") cfg.bootstrap = as_bool(name, v);
                    else if (!apply_tree_param(cfg.tree, name, v)) unknown(kind, name);
                } else if constexpr (std::is_same_v<T, GbmConfig>) {
                    if (name == "n_estimators") cfg.n_estimators = static_cast<int>(as_int(name, v));
                    else if (name == "learning_rate") cfg.learning_rate = as_double(name, v);
                    else if (name == "max_depth") cfg.max_depth = static_cast<int>(as_int(name, v));
                    else if (name == "subsample") cfg.subsample = as_double(name, v);
                    else if (name == "min_samples_split") cfg.min_samples_split = static_cast<int>(as_int(name, v));
                    else if (name == "min_samples_leaf") cfg.min_samples_leaf = static_cast<int>(as_int(name, v));
                    else unknown(kind, name);
                } else if constexpr (std::is_same_v<T, AdaBoostConfig>) {
                    if (name == "n_estimators") cfg.n_estimators = static_cast<int>(as_int(name, v));
                    else if (name == "learning_rate") cfg.learning_rate = as_double(name, v);
                    else if (name == "algorithm") {
                        if (as_string(name, v) != "SAMME.R")
                            throw Error("only the SAMME.R AdaBoost variant is implemented");
                    } else if (name == "base_max_depth") cfg.base_tree.max_depth = as_depth(name, v);
                    else if (name == "base_criterion") cfg.base_tree.criterion = as_criterion(name, v);
                    else unknown(kind, name);
                } else if constexpr (std::is_same_v<T, KnnConfig>) {
                    if (name == "n_neighbors") cfg.n_neighbors = static_cast<int>(as_int(name, v));
                    else if (name == "weights") {
                        const auto s = as_string(name, v);
                        if (s == "distance") cfg.weighting = Weighting::distance;
                        else if (s == "uniform") cfg.weighting = Weighting::uniform;
                        else throw Error("parameter 'weights' must be uniform or distance");
                    } else if (name == "metric") {
                        if (as_string(name, v) != "manhattan") throw Error("only the manhattan metric is implemented");
                    } else if (name == "p") {
                        if (as_int(name, v) != 1) throw Error("only p = 1 (manhattan) is implemented");
                    } else if (name == "standardize") cfg.standardize = as_bool(name, v);
                    else unknown(kind, name);
                }
            }
            if constexpr (std::is_same_v<T, TreeConfig>) cfg.seed = seed;
            else if constexpr (std::is_same_v<T, ForestConfig>) cfg.seed = cfg.tree.seed = seed;
            else if constexpr (std::is_same_v<T, AdaBoostConfig>) cfg.seed = cfg.base_tree.seed = seed;
            else if constexpr (std::is_same_v<T, GbmConfig>) cfg.seed = seed;
            cfg.validate();
        },
        h);
    return h;
}

ParamSet describe(const Hyperparams& h) {
    ParamSet out;
    std::visit(
        [&](const auto& cfg) {
            using T = std::decay_t<decltype(cfg)>;
            if constexpr (std::is_same_v<T, TreeConfig>) {
                describe_tree(cfg, out);
            } else if constexpr (std::is_same_v<T, ForestConfig>) {
                describe_tree(cfg.tree, out);
                out["n_estimators"] = std::int64_t{cfg.n_estimators};
                out["bootstrap"] = std::string(cfg.bootstrap ? "true" : "false");
            } else if constexpr (std::is_same_v<T, GbmConfig>) {
                out["n_estimators"] = std::int64_t{cfg.n_estimators};
                out["learning_rate"] = cfg.learning_rate;
                out["max_depth"] = std::int64_t{cfg.max_depth};
                out["subsample"] = cfg.subsample;
                out["min_samples_split"] = std::int64_t{cfg.min_samples_split};
                out["min_samples_leaf"] = std::int64_t{cfg.min_samples_leaf};
            } else if constexpr (std::is_same_v<T, AdaBoostConfig>) {
                out["algorithm"] = std::string("SAMME.R");
                out["n_estimators"] = std::int64_t{cfg.n_estimators};
                out["learning_rate"] = cfg.learning_rate;
                out["base_max_depth"] = depth_value(cfg.base_tree.max_depth);
                out["base_criterion"] = criterion_name(cfg.base_tree.criterion);
            } else if constexpr (std::is_same_v<T, KnnConfig>) {
                out["n_neighbors"] = std::int64_t{cfg.n_neighbors};
                out["weights"] = std::string(cfg.weighting == Weighting::distance ? "distance" : "uniform");
                out["metric"] = std::string("manhattan");
                out["p"] = std::int64_t{1};
                out["standardize"] = std::string(cfg.standardize ? "true" : "false");
            }
        },
        h);
    return out;
}

ModelKind kind_of(const Hyperparams& h) {
    static constexpr ModelKind by_index[] = {ModelKind::dt, ModelKind::rf, ModelKind::gbm, ModelKind::ada,
                                             ModelKind::knn};
    return by_index[h.index()];
}

std::uint64_t seed_of(const Hyperparams& h) {
    return std::visit(
        [](const auto& cfg) -> std::uint64_t {
            if constexpr (std::is_same_v<std::decay_t<decltype(cfg)>, KnnConfig>) return 0;
            else return cfg.seed;
        },
        h);
}

ModelKind kind_of(const FittedModel& model) {
    static constexpr ModelKind by_index[] = {ModelKind::dt, ModelKind::rf, ModelKind::gbm, ModelKind::ada,
                                             ModelKind::knn};
    return by_index[model.index()];
}

Hyperparams hyperparams_of(const FittedModel& model) {
    return std::visit([](const auto& m) -> Hyperparams { return m.config; }, model);
}

const std::vector<std::string>& class_names_of(const FittedModel& model) {
    return std::visit(
        [](const auto& m) -> const std::vector<std::string>& {
            if constexpr (std::is_same_v<std::decay_t<decltype(m)>, FittedKnn>) return m.labels.class_names;
            else return m.class_names;
        },
        model);
}

TaxonomyLevel level_of(const FittedModel& model) {
    return std::visit(
        [](const auto& m) {
            if constexpr (std::is_same_v<std::decay_t<decltype(m)>, FittedKnn>) return m.labels.level;
            else return m.level;
        },
        model);
}

FittedModel fit_model(const Hyperparams& h, const FeatureMatrix& m, const LabelVector& y) {
    return std::visit(
        [&](const auto& cfg) -> FittedModel {
            using T = std::decay_t<decltype(cfg)>;
            if constexpr (std::is_same_v<T, TreeConfig>) return FittedTree::fit(m, y, cfg);
            else if constexpr (std::is_same_v<T, ForestConfig>) return FittedForest::fit(m, y, cfg);
            else if constexpr (std::is_same_v<T, GbmConfig>) return FittedGbm::fit(m, y, cfg);
            else if constexpr (std::is_same_v<T, AdaBoostConfig>) return FittedAdaBoost::fit(m, y, cfg);
            else return FittedKnn::fit(m, y, cfg);
        },
        h);
}

LabelVector predict(const FittedModel& model, const FeatureMatrix& m) {
    return std::visit([&](const auto& fitted) { return fitted.predict(m); }, model);
}

Matrix predict_proba(const FittedModel& model, const FeatureMatrix& m) {
    return std::visit([&](const auto& fitted) { return fitted.predict_proba(m); }, model);
}

}  // namespace iotsentry
