#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "iotsentry/taxonomy.hpp"

namespace iotsentry {

/// Dense flow records: rows are flows, columns are named features.
/// Missing cells are stored as quiet NaN until imputed.
class FeatureMatrix {
public:
    FeatureMatrix() = default;
    FeatureMatrix(std::vector<std::string> feature_names, std::size_t rows);
    FeatureMatrix(std::vector<std::string> feature_names, std::vector<double> values);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return names_.size(); }
    const std::vector<std::string>& feature_names() const { return names_; }

    double operator()(std::size_t r, std::size_t c) const { return values_[r * cols() + c]; }
    double& operator()(std::size_t r, std::size_t c) { return values_[r * cols() + c]; }

    std::span<const double> row(std::size_t r) const { return {values_.data() + r * cols(), cols()}; }
    std::span<double> row(std::size_t r) { return {values_.data() + r * cols(), cols()}; }
    std::span<const double> values() const { return values_; }

    FeatureMatrix select_rows(std::span<const std::size_t> rows) const;
    std::size_t missing_count() const;

    bool operator==(const FeatureMatrix&) const = default;

private:
    std::vector<std::string> names_;
    std::size_t rows_ = 0;
    std::vector<double> values_;
};

struct LabelVector {
    std::vector<int> ids;
    std::vector<std::string> class_names;
    TaxonomyLevel level = TaxonomyLevel::attack34;

    std::size_t size() const { return ids.size(); }
    std::size_t num_classes() const { return class_names.size(); }
    const std::string& name_of(std::size_t row) const { return class_names[ids[row]]; }
    LabelVector select(std::span<const std::size_t> rows) const;
    std::vector<std::size_t> class_counts() const;

    bool operator==(const LabelVector&) const = default;
};

struct PreprocessReport {
    std::size_t rows_read = 0;
    std::size_t rows_dropped = 0;
    std::map<std::string, std::size_t> imputed_cells_per_column;
    std::map<std::string, std::size_t> class_counts;
};

struct LoadedCsv {
    FeatureMatrix features;
    std::vector<std::string> raw_labels;
    PreprocessReport report;
};

/// Reads a header-first CSV. Non-label columns are parsed as doubles; cells
/// that are empty, unparseable or non-finite become NaN and are tallied in
/// report.imputed_cells_per_column. Rows with an empty label are dropped.
/// With `schema`, the feature header must match it exactly, in order.
LoadedCsv load_csv(const std::filesystem::path& path, const std::string& label_column,
                   const std::optional<std::vector<std::string>>& schema = std::nullopt);

/// Per-column medians over non-missing cells.
struct ColumnMedians {
    std::vector<double> median;

    static ColumnMedians fit(const FeatureMatrix& m);
    FeatureMatrix apply(const FeatureMatrix& m) const;
};

/// Replaces every NaN with its column's median. Throws if a column has no
/// observed value at all.
FeatureMatrix impute_missing(const FeatureMatrix& m);

/// Maps raw attack names to ids at `level`. Ids follow first appearance of
/// the level's class name in `raw`.
LabelVector encode_labels(std::span<const std::string> raw, const LabelTaxonomy& taxonomy,
                          TaxonomyLevel level);

/// Maps names onto a fixed class list (used when reloading split files).
LabelVector encode_with_classes(std::span<const std::string> names,
                                const std::vector<std::string>& class_names, TaxonomyLevel level);

struct Labeled {
    FeatureMatrix x;
    LabelVector y;
};

struct DatasetSplit {
    Labeled train;
    Labeled test;
    std::vector<std::size_t> train_rows;  // indices into the input, ascending
    std::vector<std::size_t> test_rows;
    std::uint64_t seed = 0;
    double train_fraction = 0.8;
};

/// Per-class train quotas by largest remainder so the total equals
/// round(n * fraction); ties go to the lower class id.
std::vector<std::size_t> stratified_quotas(std::span<const std::size_t> class_counts, double fraction);

/// Stratified train/test split. Every class needs at least two rows.
DatasetSplit stratified_split(const FeatureMatrix& m, const LabelVector& y, double train_fraction,
                              std::uint64_t seed);

/// Row indices (ascending) kept when every class above `cap` is subsampled
/// to exactly `cap` rows.
std::vector<std::size_t> downsample_rows(const LabelVector& y, std::size_t cap, std::uint64_t seed);

Labeled downsample_majority(const FeatureMatrix& m, const LabelVector& y, std::size_t cap,
                            std::uint64_t seed);

/// Population z-scoring fitted on one matrix, applied to any other with the
/// same columns. Zero-variance columns pass through untouched.
struct Standardizer {
    std::vector<double> mean;
    std::vector<double> stddev;

    static Standardizer fit(const FeatureMatrix& train);
    FeatureMatrix apply(const FeatureMatrix& m) const;
    void apply_row(std::span<const double> in, std::span<double> out) const;
    bool operator==(const Standardizer&) const = default;
};

struct Standardized {
    FeatureMatrix values;
    Standardizer stats;
};

Standardized standardize(const FeatureMatrix& train, const FeatureMatrix& apply_to);

}  // namespace iotsentry
