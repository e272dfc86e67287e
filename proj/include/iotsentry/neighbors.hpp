#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "iotsentry/data.hpp"
#include "iotsentry/matrix.hpp"

namespace iotsentry {

enum class Weighting { uniform, distance };

struct KnnConfig {
    int n_neighbors = 5;
    Weighting weighting = Weighting::distance;
    bool standardize = true;  // z-score with training statistics before measuring L1

    void validate() const;
    bool operator==(const KnnConfig&) const = default;
};

/// L1 distance. Throws on length mismatch.
double manhattan_distance(std::span<const double> a, std::span<const double> b);

struct Neighbor {
    std::size_t index;
    double distance;
    bool operator==(const Neighbor&) const = default;
};

/// Brute-force Manhattan k-NN classifier storing the (standardized)
/// training set.
struct FittedKnn {
    KnnConfig config;
    Standardizer scaling;       // empty when config.standardize is false
    FeatureMatrix train;        // stored in the scaled space
    LabelVector labels;

    static FittedKnn fit(const FeatureMatrix& m, const LabelVector& y, const KnnConfig& config);

    /// Maps raw feature rows into the stored space.
    FeatureMatrix transform(const FeatureMatrix& m) const;

    /// k nearest stored rows to a raw query, ascending by (distance, index).
    std::vector<Neighbor> kneighbors(std::span<const double> query, std::size_t k) const;

    /// Same, for every row of `m`, computed in query blocks.
    std::vector<std::vector<Neighbor>> kneighbors(const FeatureMatrix& m, std::size_t k) const;

    Matrix predict_proba(const FeatureMatrix& m) const;
    LabelVector predict(const FeatureMatrix& m) const;

    bool operator==(const FittedKnn&) const = default;
};

/// Class probabilities from one neighbor list. Distance weighting uses
/// 1/d; exact matches (d = 0) share all the weight when present.
std::vector<double> neighbor_vote(std::span<const Neighbor> neighbors, std::span<const int> labels,
                                  std::size_t classes, Weighting weighting);

}  // namespace iotsentry
