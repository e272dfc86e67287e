#include "iotsentry/tuning.hpp"

#include <algorithm>
#include <cmath>

#include "iotsentry/error.hpp"
#include "iotsentry/metrics.hpp"
#include "iotsentry/rng.hpp"

namespace iotsentry {

std::vector<ParamSet> enumerate_grid(const ParamGrid& grid) {
    std::vector<ParamSet> out{ParamSet{}};
    for (const auto& [name, values] : grid) {
        if (values.empty()) throw Error("grid parameter '" + name + "' has no candidate values");
        std::vector<ParamSet> next;
        next.reserve(out.size() * values.size());
        for (const auto& partial : out)
            for (const auto& v : values) {
                auto p = partial;
                p[name] = v;
                next.push_back(std::move(p));
            }
        out = std::move(next);
    }
    return out;
}

std::vector<Fold> stratified_kfold(const LabelVector& y, int folds, std::uint64_t seed) {
    if (folds < 2) throw Error("need at least two folds");
    const auto k = static_cast<std::size_t>(folds);
    std::vector<std::vector<std::size_t>> by_class(y.num_classes());
    for (std::size_t i = 0; i < y.size(); ++i) by_class[static_cast<std::size_t>(y.ids[i])].push_back(i);

    std::vector<int> fold_of(y.size(), -1);
    std::size_t offset = 0;
    for (std::size_t c = 0; c < by_class.size(); ++c) {
        auto& rows = by_class[c];
        if (rows.empty()) continue;
        if (rows.size() < k)
            throw Error("class '" + y.class_names[c] + "' has " + std::to_string(rows.size()) +
                        " rows, fewer than the " + std::to_string(k) + " folds");
        Rng rng(derive_seed(seed, 0xf01d, c));
        rng.shuffle(rows);
        for (std::size_t i = 0; i < rows.size(); ++i) fold_of[rows[i]] = static_cast<int>((offset + i) % k);
        offset = (offset + rows.size()) % k;
    }

    std::vector<Fold> out(k);
    for (std::size_t i = 0; i < y.size(); ++i)
        for (std::size_t f = 0; f < k; ++f)
            (static_cast<std::size_t>(fold_of[i]) == f ? out[f].validation : out[f].train).push_back(i);
    return out;
}

std::string_view to_string(Scoring scoring) { return scoring == Scoring::accuracy ? "accuracy" : "macro_f1"; }

Scoring parse_scoring(std::string_view text) {
    if (text == "accuracy") return Scoring::accuracy;
    if (text == "macro_f1") return Scoring::macro_f1;
    throw Error("unknown scoring '" + std::string(text) + "' (expected accuracy or macro_f1)");
}

double score(Scoring scoring, const LabelVector& y_true, const LabelVector& y_pred) {
    if (scoring == Scoring::accuracy) return accuracy(y_true, y_pred);
    const auto per_class = per_class_metrics(confusion(y_true, y_pred));
    return aggregate(per_class, Averaging::macro).f1;
}

SearchOutcome grid_search(ModelKind kind, const FeatureMatrix& m, const LabelVector& y, const ParamGrid& grid,
                          int folds, std::uint64_t seed, Scoring scoring) {
    if (m.rows() != y.size()) throw Error("feature rows and labels differ in length");
    const auto combos = enumerate_grid(grid);
    const auto split = stratified_kfold(y, folds, seed);
    const bool needs_imputation = m.missing_count() > 0;

    // Fold matrices are shared by every combination.
    struct FoldData {
        FeatureMatrix train_x, val_x;
        LabelVector train_y, val_y;
    };
    std::vector<FoldData> data;
    data.reserve(split.size());
    for (const auto& f : split) {
        FoldData d{m.select_rows(f.train), m.select_rows(f.validation), y.select(f.train), y.select(f.validation)};
        if (needs_imputation) {
            const auto medians = ColumnMedians::fit(d.train_x);
            d.train_x = medians.apply(d.train_x);
            d.val_x = medians.apply(d.val_x);
        }
        data.push_back(std::move(d));
    }

    CVResult cv;
    cv.kind = kind;
    cv.folds = folds;
    cv.scoring = scoring;
    cv.seed = seed;
    for (const auto& params : combos) {
        CVRecord rec;
        rec.params = params;
        try {
            const auto h = make_hyperparams(kind, params, seed);
            for (const auto& d : data) {
                const auto model = fit_model(h, d.train_x, d.train_y);
                rec.fold_scores.push_back(score(scoring, d.val_y, predict(model, d.val_x)));
            }
        } catch (const std::exception& e) {
            throw Error("grid search " + std::string(to_string(kind)) + " " + to_string(params) + ": " + e.what());
        }
        double sum = 0.0;
        for (const double s : rec.fold_scores) sum += s;
        rec.mean = sum / static_cast<double>(rec.fold_scores.size());
        double var = 0.0;
        for (const double s : rec.fold_scores) var += (s - rec.mean) * (s - rec.mean);
        rec.stddev = std::sqrt(var / static_cast<double>(rec.fold_scores.size()));
        cv.records.push_back(std::move(rec));
    }
    for (std::size_t i = 1; i < cv.records.size(); ++i)
        if (cv.records[i].mean > cv.records[cv.best_index].mean) cv.best_index = i;

    FeatureMatrix full = needs_imputation ? impute_missing(m) : m;
    auto best = fit_model(make_hyperparams(kind, cv.best().params, seed), full, y);
    return {std::move(cv), std::move(best)};
}

std::map<ModelKind, ParamGrid> default_grids() {
    using S = std::string;
    using I = std::int64_t;
    std::map<ModelKind, ParamGrid> g;
    g[ModelKind::dt] = {
        {"criterion", {S("gini"), S("entropy")}},
        {"max_depth", {I{15}, I{30}, I{45}}},
        {"min_samples_leaf", {I{1}, I{5}, I{10}}},
        {"min_samples_split", {I{5}, I{10}, I{20}}},
        {"max_features", {S("sqrt"), S("all")}},
    };
    g[ModelKind::rf] = {
        {"criterion", {S("gini"), S("entropy")}},
        {"max_depth", {I{4}, I{8}, I{16}}},
        {"max_features", {S("sqrt")}},
        {"n_estimators", {I{100}, I{200}, I{300}}},
    };
    g[ModelKind::gbm] = {
        {"learning_rate", {0.005, 0.01, 0.05}},
        {"max_depth", {I{3}, I{4}, I{5}}},
        {"n_estimators", {I{250}, I{500}, I{750}}},
        {"subsample", {0.6, 0.8, 1.0}},
    };
    g[ModelKind::ada] = {
        {"algorithm", {S("SAMME.R")}},
        {"learning_rate", {0.05, 0.1, 0.5}},
        {"n_estimators", {I{50}, I{100}, I{200}}},
    };
    g[ModelKind::knn] = {
        {"n_neighbors", {I{3}, I{5}, I{7}}},
        {"weights", {S("uniform"), S("distance")}},
        {"metric", {S("manhattan")}},
        {"p", {I{1}}},
    };
    return g;
}

}  // namespace iotsentry
