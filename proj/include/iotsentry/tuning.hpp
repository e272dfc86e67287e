#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "iotsentry/model.hpp"

namespace iotsentry {

/// Candidate values per parameter name.
using ParamGrid = std::map<std::string, std::vector<ParamValue>>;

/// All combinations: parameter names in lexicographic order, the first name
/// varying slowest, each list in its given order.
std::vector<ParamSet> enumerate_grid(const ParamGrid& grid);

struct Fold {
    std::vector<std::size_t> train;       // ascending
    std::vector<std::size_t> validation;  // ascending
};

/// Stratified k-fold: each class is shuffled and dealt round-robin across
/// folds, starting where the previous class stopped, so per-class fold sizes
/// differ by at most one and fold totals stay balanced.
std::vector<Fold> stratified_kfold(const LabelVector& y, int folds, std::uint64_t seed);

enum class Scoring { accuracy, macro_f1 };

std::string_view to_string(Scoring scoring);
Scoring parse_scoring(std::string_view text);

struct CVRecord {
    ParamSet params;
    std::vector<double> fold_scores;
    double mean = 0.0;
    double stddev = 0.0;  // population
};

struct CVResult {
    ModelKind kind = ModelKind::dt;
    int folds = 5;
    Scoring scoring = Scoring::accuracy;
    std::uint64_t seed = 0;
    std::vector<CVRecord> records;
    std::size_t best_index = 0;

    const CVRecord& best() const { return records.at(best_index); }
};

struct SearchOutcome {
    CVResult cv;
    FittedModel best_model;  // refit on all rows with the winning parameters
};

/// Scores every grid combination by stratified k-fold CV and refits the
/// best one on the full data. Missing cells are imputed per fold from the
/// fold's training rows. The first combination wins ties.
SearchOutcome grid_search(ModelKind kind, const FeatureMatrix& m, const LabelVector& y, const ParamGrid& grid,
                          int folds, std::uint64_t seed, Scoring scoring = Scoring::accuracy);

/// Tuned winners for each model bracketed by one smaller and one larger
/// value where the parameter is ordered.
std::map<ModelKind, ParamGrid> default_grids();

double score(Scoring scoring, const LabelVector& y_true, const LabelVector& y_pred);

}  // namespace iotsentry
