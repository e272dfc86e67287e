#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "iotsentry/data.hpp"
#include "iotsentry/metrics.hpp"
#include "iotsentry/model.hpp"
#include "iotsentry/tuning.hpp"

namespace iotsentry {

struct PipelineConfig {
    std::vector<std::filesystem::path> dataset;  // CSV files or directories of CSVs
    std::string label_column = "label";
    TaxonomyLevel level = TaxonomyLevel::attack34;
    double train_fraction = 0.8;
    std::optional<std::uint64_t> seed;
    std::vector<ModelKind> models = all_model_kinds();
    std::map<ModelKind, ParamSet> hyperparameters;
    std::map<ModelKind, ParamGrid> grids;
    int folds = 5;
    Scoring scoring = Scoring::accuracy;
    std::optional<std::size_t> imbalance_cap;
    std::optional<std::size_t> max_rows;           // stratified subsample before splitting
    std::map<ModelKind, std::size_t> row_limits;   // per-model cap on train+test rows
    std::filesystem::path out = "out";

    /// Relative dataset/out paths are resolved against `base_dir`.
    static PipelineConfig from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
    static PipelineConfig load(const std::filesystem::path& path);
    nlohmann::json to_json() const;
    void validate() const;
    std::uint64_t require_seed() const;
};

/// The materialised split as written by run_preprocess.
struct PreparedData {
    Labeled train;
    Labeled test;
    std::string label_column;
    std::vector<double> medians;
};

/// Layout of <out>: train.csv, test.csv, dataset.json, preprocess_report.json.
PreprocessReport run_preprocess(const PipelineConfig& config);
PreparedData load_prepared(const std::filesystem::path& out_dir);

/// Fits every requested model and writes model_<kind>.json. A failing model
/// is reported on `log` and skipped; the return value counts failures.
int run_train(const PipelineConfig& config, std::ostream& log);

/// Grid search on the train portion; writes cv_<kind>.json and the refit
/// model_<kind>.json. Returns the number of failed models.
int run_tune(const PipelineConfig& config, std::ostream& log);

/// Scores each saved model on test.csv and writes metrics.json plus per-model
/// confusion/ROC CSV and SVG files. Returns the number of failed models.
int run_evaluate(const PipelineConfig& config, std::ostream& log);

/// Renders report.md from metrics.json, any cv_<kind>.json files, the
/// preprocess report and the config. Returns the rendered text.
std::string run_report(const PipelineConfig& config);

/// Rows of `labeled` kept under a per-model row limit (stratified, seeded).
Labeled limit_rows(const Labeled& labeled, std::optional<std::size_t> limit, std::uint64_t seed);

nlohmann::json evaluation_json(ModelKind kind, const EvaluationReport& report, TaxonomyLevel level);

std::string confusion_csv(const ConfusionMatrix& cm, bool normalized);
std::string roc_csv(const EvaluationReport& report);

}  // namespace iotsentry
