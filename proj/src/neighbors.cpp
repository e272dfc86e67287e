#include "iotsentry/neighbors.hpp"

#include <algorithm>

#include "iotsentry/error.hpp"
#include "iotsentry/parallel.hpp"
#include "iotsentry/simd/distance.hpp"
#include "iotsentry/tree.hpp"

namespace iotsentry {

namespace {

constexpr std::size_t kQueryBlock = 8;
constexpr std::size_t kTrainTile = 512;

bool closer(const Neighbor& a, const Neighbor& b) {
    return a.distance < b.distance || (a.distance == b.distance && a.index < b.index);
}

std::vector<Neighbor> select_k(std::span<const double> distances, std::size_t k) {
    std::vector<Neighbor> all(distances.size());
    for (std::size_t i = 0; i < distances.size(); ++i) all[i] = {i, distances[i]};
    if (k < all.size()) {
        std::nth_element(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(k), all.end(), closer);
        all.resize(k);
    }
    std::sort(all.begin(), all.end(), closer);
    return all;
}

}  // namespace

void KnnConfig::validate() const {
    if (n_neighbors < 1) throw Error("n_neighbors must be positive");
}

double manhattan_distance(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size())
        throw Error("manhattan_distance: lengths differ (" + std::to_string(a.size()) + " vs " +
                    std::to_string(b.size()) + ")");
    return simd::manhattan(a.data(), b.data(), a.size());
}

FittedKnn FittedKnn::fit(const FeatureMatrix& m, const LabelVector& y, const KnnConfig& config) {
    config.validate();
    if (m.rows() == 0) throw Error("cannot fit k-NN on an empty matrix");
    if (m.rows() != y.size()) throw Error("feature rows and labels differ in length");
    FittedKnn model;
    model.config = config;
    model.labels = y;
    if (config.standardize) {
        model.scaling = Standardizer::fit(m);
        model.train = model.scaling.apply(m);
    } else {
        model.train = m;
    }
    return model;
}

FeatureMatrix FittedKnn::transform(const FeatureMatrix& m) const {
    check_feature_count(m, train.cols());
    return config.standardize ? scaling.apply(m) : m;
}

std::vector<Neighbor> FittedKnn::kneighbors(std::span<const double> query, std::size_t k) const {
    if (query.size() != train.cols())
        throw SchemaError("query has " + std::to_string(query.size()) + " features, model expects " +
                          std::to_string(train.cols()));
    if (k > train.rows())
        throw Error("k = " + std::to_string(k) + " exceeds the " + std::to_string(train.rows()) + " stored rows");
    std::vector<double> q(query.begin(), query.end());
    if (config.standardize) scaling.apply_row(query, q);
    std::vector<double> dist(train.rows());
    simd::manhattan_many(q.data(), train.values().data(), train.rows(), train.cols(), dist.data());
    return select_k(dist, k);
}

std::vector<std::vector<Neighbor>> FittedKnn::kneighbors(const FeatureMatrix& m, std::size_t k) const {
    if (k > train.rows())
        throw Error("k = " + std::to_string(k) + " exceeds the " + std::to_string(train.rows()) + " stored rows");
    const FeatureMatrix queries = transform(m);
    const std::size_t n = train.rows();
    const std::size_t dim = train.cols();
    std::vector<std::vector<Neighbor>> out(queries.rows());
    const std::size_t blocks = (queries.rows() + kQueryBlock - 1) / kQueryBlock;

    parallel_for(blocks, [&](std::size_t b) {
        const std::size_t q0 = b * kQueryBlock;
        const std::size_t q1 = std::min(queries.rows(), q0 + kQueryBlock);
        std::vector<double> dist((q1 - q0) * n);
        // Tile the stored rows so a block of queries reuses each tile from cache.
        for (std::size_t t0 = 0; t0 < n; t0 += kTrainTile) {
            const std::size_t t1 = std::min(n, t0 + kTrainTile);
            for (std::size_t q = q0; q < q1; ++q)
                simd::manhattan_many(queries.row(q).data(), train.values().data() + t0 * dim, t1 - t0, dim,
                                     dist.data() + (q - q0) * n + t0);
        }
        for (std::size_t q = q0; q < q1; ++q)
            out[q] = select_k(std::span<const double>(dist.data() + (q - q0) * n, n), k);
    });
    return out;
}

std::vector<double> neighbor_vote(std::span<const Neighbor> neighbors, std::span<const int> labels,
                                  std::size_t classes, Weighting weighting) {
    std::vector<double> score(classes, 0.0);
    const bool exact = weighting == Weighting::distance &&
                       std::any_of(neighbors.begin(), neighbors.end(), [](const Neighbor& nb) { return nb.distance == 0.0; });
    for (const auto& nb : neighbors) {
        double w = 1.0;
        if (weighting == Weighting::distance) w = exact ? (nb.distance == 0.0 ? 1.0 : 0.0) : 1.0 / nb.distance;
        score[static_cast<std::size_t>(labels[nb.index])] += w;
    }
    double total = 0.0;
    for (const double s : score) total += s;
    for (auto& s : score) s /= total;
    return score;
}

Matrix FittedKnn::predict_proba(const FeatureMatrix& m) const {
    const auto k = static_cast<std::size_t>(config.n_neighbors);
    const auto neighbors = kneighbors(m, k);
    Matrix out(m.rows(), labels.num_classes());
    for (std::size_t r = 0; r < m.rows(); ++r) {
        const auto p = neighbor_vote(neighbors[r], labels.ids, labels.num_classes(), config.weighting);
        std::copy(p.begin(), p.end(), out.row(r).begin());
    }
    return out;
}

LabelVector FittedKnn::predict(const FeatureMatrix& m) const {
    const auto p = predict_proba(m);
    LabelVector out{{}, labels.class_names, labels.level};
    out.ids.resize(m.rows());
    for (std::size_t r = 0; r < m.rows(); ++r) out.ids[r] = static_cast<int>(argmax(p.row(r)));
    return out;
}

}  // namespace iotsentry
