#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "iotsentry/data.hpp"
#include "iotsentry/matrix.hpp"

namespace iotsentry {

enum class Criterion { gini, entropy };
enum class MaxFeatures { all, sqrt };

struct TreeConfig {
    Criterion criterion = Criterion::gini;
    std::optional<int> max_depth;  // nullopt = unlimited
    int min_samples_split = 2;
    int min_samples_leaf = 1;
    MaxFeatures max_features = MaxFeatures::all;
    std::uint64_t seed = 0;

    void validate() const;
    bool operator==(const TreeConfig&) const = default;
};

/// Gini impurity 1 - sum p_k^2 of (possibly weighted) class counts.
double gini(std::span<const double> class_counts);
/// Shannon entropy in bits; 0 log 0 = 0.
double entropy(std::span<const double> class_counts);
double impurity(Criterion criterion, std::span<const double> class_counts);

struct SplitCandidate {
    std::size_t feature_index = 0;
    double threshold = 0.0;
    double impurity_decrease = 0.0;
    std::size_t left_count = 0;
    std::size_t right_count = 0;
};

/// Best (feature, midpoint threshold) split of all rows of `rows`, over the
/// listed features. Children must each keep at least min_samples_leaf rows.
/// Returns nullopt for a pure node or when no admissible split exists.
std::optional<SplitCandidate> best_split(const FeatureMatrix& rows, const LabelVector& labels,
                                         const TreeConfig& config,
                                         std::span<const std::size_t> candidate_features);

/// One node of a fitted tree. Internal nodes route `x[feature] <= threshold`
/// to `left`. Leaves carry `value_count` entries in Tree::leaf_values at
/// `value_offset`: weighted class totals for classifiers, a single score for
/// regression trees.
struct TreeNode {
    std::int32_t feature = -1;
    double threshold = 0.0;
    std::int32_t left = -1;
    std::int32_t right = -1;
    std::uint32_t value_offset = 0;
    std::uint32_t samples = 0;
    std::uint32_t depth = 0;

    bool is_leaf() const { return feature < 0; }
    bool operator==(const TreeNode&) const = default;
};

/// Fitted tree structure shared by classification and regression trees.
struct Tree {
    std::vector<TreeNode> nodes;  // nodes[0] is the root
    std::vector<double> leaf_values;
    std::size_t n_features = 0;
    std::size_t value_count = 0;

    std::int32_t leaf_index(std::span<const double> x) const;
    std::span<const double> leaf_value(std::int32_t node) const {
        return {leaf_values.data() + nodes[static_cast<std::size_t>(node)].value_offset, value_count};
    }
    std::span<double> leaf_value(std::int32_t node) {
        return {leaf_values.data() + nodes[static_cast<std::size_t>(node)].value_offset, value_count};
    }
    std::size_t depth() const;
    std::size_t leaf_count() const;

    bool operator==(const Tree&) const = default;
};

/// Per-feature row orderings of a training matrix, ascending by
/// (value, row index). Computed once and shared across the trees of an
/// ensemble.
class ColumnOrder {
public:
    explicit ColumnOrder(const FeatureMatrix& x);

    std::span<const std::uint32_t> order(std::size_t feature) const {
        return {order_.data() + feature * rows_, rows_};
    }
    std::size_t rows() const { return rows_; }
    std::size_t features() const { return features_; }

private:
    std::size_t rows_ = 0;
    std::size_t features_ = 0;
    std::vector<std::uint32_t> order_;
};

/// Rows taking part in one tree fit. `count[r]` is the multiplicity of row r
/// (0 = absent, >1 = bootstrap duplicates); `weight[r]` scales its
/// contribution to impurities and leaf values. Empty spans mean 1 for all.
struct SampleSet {
    std::span<const std::uint32_t> count;
    std::span<const double> weight;
};

/// Grows a classification tree. Leaves hold weighted class totals.
Tree grow_classification_tree(const FeatureMatrix& x, const LabelVector& y, const TreeConfig& config,
                              const SampleSet& samples = {}, const ColumnOrder* order = nullptr);

/// Grows a squared-error regression tree on `target`. Leaves hold the
/// weighted mean; callers may overwrite leaf values afterwards.
Tree grow_regression_tree(const FeatureMatrix& x, std::span<const double> target,
                          const TreeConfig& config, const SampleSet& samples = {},
                          const ColumnOrder* order = nullptr);

/// Decision-tree classifier with its training class space.
struct FittedTree {
    TreeConfig config;
    Tree tree;
    std::vector<std::string> class_names;
    TaxonomyLevel level = TaxonomyLevel::attack34;

    static FittedTree fit(const FeatureMatrix& m, const LabelVector& y, const TreeConfig& config);

    LabelVector predict(const FeatureMatrix& m) const;
    Matrix predict_proba(const FeatureMatrix& m) const;

    bool operator==(const FittedTree&) const = default;
};

/// Argmax with ties to the lowest index.
std::size_t argmax(std::span<const double> values);

/// Throws SchemaError unless m has `expected` columns.
void check_feature_count(const FeatureMatrix& m, std::size_t expected);

}  // namespace iotsentry
