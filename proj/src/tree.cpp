#include "iotsentry/tree.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "iotsentry/error.hpp"
#include "iotsentry/rng.hpp"

namespace iotsentry {

namespace {

// Decreases closer than this are ties and keep the earlier candidate.
constexpr double kTieTolerance = 1e-12;

}  // namespace

void TreeConfig::validate() const {
    if (max_depth && *max_depth < 1) throw Error("max_depth must be positive");
    if (min_samples_split < 2) throw Error("min_samples_split must be at least 2");
    if (min_samples_leaf < 1) throw Error("min_samples_leaf must be at least 1");
}

double gini(std::span<const double> class_counts) {
    double total = 0.0;
    for (const double c : class_counts) total += c;
    if (!(total > 0.0)) throw Error("gini of an empty node is undefined");
    double sum_sq = 0.0;
    for (const double c : class_counts) {
        const double p = c / total;
        sum_sq += p * p;
    }
    return std::max(0.0, 1.0 - sum_sq);
}

double entropy(std::span<const double> class_counts) {
    double total = 0.0;
    for (const double c : class_counts) total += c;
    if (!(total > 0.0)) throw Error("entropy of an empty node is undefined");
    double h = 0.0;
    for (const double c : class_counts) {
        if (c <= 0.0) continue;
        const double p = c / total;
        h -= p * std::log2(p);
    }
    return std::max(0.0, h);
}

double impurity(Criterion criterion, std::span<const double> class_counts) {
    return criterion == Criterion::gini ? gini(class_counts) : entropy(class_counts);
}

std::size_t argmax(std::span<const double> values) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < values.size(); ++i)
        if (values[i] > values[best]) best = i;
    return best;
}

void check_feature_count(const FeatureMatrix& m, std::size_t expected) {
    if (m.cols() != expected)
        throw SchemaError("model expects " + std::to_string(expected) + " features, input has " +
                          std::to_string(m.cols()));
}

std::int32_t Tree::leaf_index(std::span<const double> x) const {
    std::int32_t n = 0;
    while (!nodes[static_cast<std::size_t>(n)].is_leaf()) {
        const auto& node = nodes[static_cast<std::size_t>(n)];
        n = x[static_cast<std::size_t>(node.feature)] <= node.threshold ? node.left : node.right;
    }
    return n;
}

std::size_t Tree::depth() const {
    std::size_t d = 0;
    for (const auto& n : nodes) d = std::max<std::size_t>(d, n.depth);
    return d;
}

std::size_t Tree::leaf_count() const {
    return static_cast<std::size_t>(
        std::count_if(nodes.begin(), nodes.end(), [](const TreeNode& n) { return n.is_leaf(); }));
}

ColumnOrder::ColumnOrder(const FeatureMatrix& x) : rows_(x.rows()), features_(x.cols()) {
    order_.resize(rows_ * features_);
    std::vector<std::uint32_t> idx(rows_);
    for (std::size_t f = 0; f < features_; ++f) {
        std::iota(idx.begin(), idx.end(), 0u);
        std::stable_sort(idx.begin(), idx.end(),
                         [&](std::uint32_t a, std::uint32_t b) { return x(a, f) < x(b, f); });
        std::copy(idx.begin(), idx.end(), order_.begin() + static_cast<std::ptrdiff_t>(f * rows_));
    }
}

namespace {

struct ClassPolicy {
    using Stats = std::vector<double>;

    std::span<const int> labels;
    std::size_t classes;
    Criterion criterion;

    Stats zero() const { return Stats(classes, 0.0); }
    void add(Stats& s, std::uint32_t row, double w) const { s[static_cast<std::size_t>(labels[row])] += w; }
    static double weight(const Stats& s) { return std::accumulate(s.begin(), s.end(), 0.0); }
    double impurity(const Stats& s) const { return iotsentry::impurity(criterion, s); }
    bool pure(const Stats& s) const {
        return std::count_if(s.begin(), s.end(), [](double c) { return c > 0.0; }) <= 1;
    }
    void complement(const Stats& total, const Stats& left, Stats& right) const {
        for (std::size_t k = 0; k < classes; ++k) right[k] = std::max(0.0, total[k] - left[k]);
    }
    std::size_t value_count() const { return classes; }
    void leaf_value(const Stats& s, std::span<double> out) const { std::copy(s.begin(), s.end(), out.begin()); }
};

struct RegressionStats {
    double w = 0.0;
    double sum = 0.0;
    double sum_sq = 0.0;
};

struct RegressionPolicy {
    using Stats = RegressionStats;

    std::span<const double> target;

    static Stats zero() { return {}; }
    void add(Stats& s, std::uint32_t row, double w) const {
        const double t = target[row];
        s.w += w;
        s.sum += w * t;
        s.sum_sq += w * t * t;
    }
    static double weight(const Stats& s) { return s.w; }
    static double impurity(const Stats& s) {
        if (!(s.w > 0.0)) return 0.0;
        const double mean = s.sum / s.w;
        return std::max(0.0, s.sum_sq / s.w - mean * mean);
    }
    static bool pure(const Stats& s) { return impurity(s) <= 1e-15; }
    static void complement(const Stats& total, const Stats& left, Stats& right) {
        right.w = total.w - left.w;
        right.sum = total.sum - left.sum;
        right.sum_sq = total.sum_sq - left.sum_sq;
    }
    static std::size_t value_count() { return 1; }
    static void leaf_value(const Stats& s, std::span<double> out) { out[0] = s.w > 0.0 ? s.sum / s.w : 0.0; }
};

struct FoundSplit {
    SplitCandidate candidate;
    std::size_t left_positions = 0;  // unique rows on the left, in sorted order
};

template <typename Policy>
class TreeBuilder {
public:
    TreeBuilder(const FeatureMatrix& x, Policy policy, const TreeConfig& config, const SampleSet& samples,
                const ColumnOrder* order)
        : x_(x), policy_(std::move(policy)), config_(config), features_(x.cols()) {
        config_.validate();
        const std::size_t n = x.rows();
        if (!samples.count.empty() && samples.count.size() != n) throw Error("sample count length mismatch");
        if (!samples.weight.empty() && samples.weight.size() != n) throw Error("sample weight length mismatch");

        count_.assign(n, 1);
        if (!samples.count.empty()) std::copy(samples.count.begin(), samples.count.end(), count_.begin());
        weight_.resize(n);
        for (std::size_t r = 0; r < n; ++r)
            weight_[r] = static_cast<double>(count_[r]) * (samples.weight.empty() ? 1.0 : samples.weight[r]);

        members_ = static_cast<std::size_t>(std::count_if(count_.begin(), count_.end(), [](auto c) { return c > 0; }));
        if (members_ == 0) throw Error("cannot fit a tree on zero samples");

        std::optional<ColumnOrder> local;
        if (!order) {
            local.emplace(x);
            order = &*local;
        }
        if (order->rows() != n || order->features() != features_) throw Error("column order does not match data");
        sorted_.resize(features_ * members_);
        for (std::size_t f = 0; f < features_; ++f) {
            auto* dst = sorted_.data() + f * members_;
            for (const auto r : order->order(f))
                if (count_[r] > 0) *dst++ = r;
        }
        goes_left_.assign(n, 0);
        scratch_.resize(members_);
    }

    Tree build() {
        tree_.n_features = features_;
        tree_.value_count = policy_.value_count();
        tree_.nodes.push_back(TreeNode{});

        struct Frame {
            std::int32_t node;
            std::size_t begin;
            std::size_t end;
            std::uint32_t depth;
        };
        std::vector<Frame> stack{{0, 0, members_, 0}};
        while (!stack.empty()) {
            const Frame frame = stack.back();
            stack.pop_back();
            auto split = process(frame.node, frame.begin, frame.end, frame.depth);
            if (!split) continue;
            const auto mid = frame.begin + split->left_positions;
            const auto left = static_cast<std::int32_t>(tree_.nodes.size());
            tree_.nodes.push_back(TreeNode{});
            tree_.nodes.push_back(TreeNode{});
            auto& node = tree_.nodes[static_cast<std::size_t>(frame.node)];
            node.left = left;
            node.right = left + 1;
            stack.push_back({left + 1, mid, frame.end, frame.depth + 1});
            stack.push_back({left, frame.begin, mid, frame.depth + 1});
        }
        return std::move(tree_);
    }

    /// Split search over the root with an explicit feature list.
    std::optional<FoundSplit> root_split(std::span<const std::size_t> features) {
        const auto total = node_stats(0, members_);
        if (policy_.pure(total)) return std::nullopt;
        const std::size_t samples = node_samples(0, members_);
        std::optional<FoundSplit> best;
        for (const auto f : features) {
            if (f >= features_) throw Error("candidate feature index out of range");
            scan(f, 0, members_, total, samples, best);
        }
        return best;
    }

private:
    std::span<std::uint32_t> column(std::size_t f, std::size_t begin, std::size_t end) {
        return {sorted_.data() + f * members_ + begin, end - begin};
    }

    typename Policy::Stats node_stats(std::size_t begin, std::size_t end) {
        auto s = policy_.zero();
        for (const auto r : column(0, begin, end)) policy_.add(s, r, weight_[r]);
        return s;
    }

    std::size_t node_samples(std::size_t begin, std::size_t end) {
        std::size_t n = 0;
        for (const auto r : column(0, begin, end)) n += count_[r];
        return n;
    }

    std::optional<FoundSplit> process(std::int32_t node_id, std::size_t begin, std::size_t end,
                                      std::uint32_t depth) {
        const auto total = node_stats(begin, end);
        const std::size_t samples = node_samples(begin, end);

        auto make_leaf = [&] {
            auto& node = tree_.nodes[static_cast<std::size_t>(node_id)];
            node.samples = static_cast<std::uint32_t>(samples);
            node.depth = depth;
            node.value_offset = static_cast<std::uint32_t>(tree_.leaf_values.size());
            tree_.leaf_values.resize(tree_.leaf_values.size() + tree_.value_count);
            policy_.leaf_value(total, tree_.leaf_value(node_id));
        };

        const bool depth_reached = config_.max_depth && depth >= static_cast<std::uint32_t>(*config_.max_depth);
        if (depth_reached || samples < static_cast<std::size_t>(config_.min_samples_split) ||
            samples < 2 * static_cast<std::size_t>(config_.min_samples_leaf) || policy_.pure(total)) {
            make_leaf();
            return std::nullopt;
        }

        std::optional<FoundSplit> best;
        if (config_.max_features == MaxFeatures::all) {
            for (std::size_t f = 0; f < features_; ++f) scan(f, begin, end, total, samples, best);
        } else {
            // Visit features in a seeded random order, skipping those constant
            // in this node, until ceil(sqrt(F)) informative ones are drawn.
            const auto wanted = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(features_))));
            Rng rng(derive_seed(config_.seed, 0x7ee, static_cast<std::uint64_t>(node_id)));
            std::vector<std::size_t> perm(features_);
            std::iota(perm.begin(), perm.end(), std::size_t{0});
            std::vector<std::size_t> chosen;
            for (std::size_t i = 0; i < features_ && chosen.size() < wanted; ++i) {
                const auto j = i + static_cast<std::size_t>(rng.uniform_index(features_ - i));
                std::swap(perm[i], perm[j]);
                const auto col = column(perm[i], begin, end);
                if (x_(col.front(), perm[i]) < x_(col.back(), perm[i])) chosen.push_back(perm[i]);
            }
            std::sort(chosen.begin(), chosen.end());
            for (const auto f : chosen) scan(f, begin, end, total, samples, best);
        }

        if (!best) {
            make_leaf();
            return std::nullopt;
        }

        auto& node = tree_.nodes[static_cast<std::size_t>(node_id)];
        node.feature = static_cast<std::int32_t>(best->candidate.feature_index);
        node.threshold = best->candidate.threshold;
        node.samples = static_cast<std::uint32_t>(samples);
        node.depth = depth;
        partition(best->candidate.feature_index, begin, end, best->left_positions);
        return best;
    }

    void scan(std::size_t f, std::size_t begin, std::size_t end, const typename Policy::Stats& total,
              std::size_t samples, std::optional<FoundSplit>& best) {
        const auto col = column(f, begin, end);
        if (col.size() < 2) return;
        const double total_w = Policy::weight(total);
        const double parent = policy_.impurity(total);
        const auto min_leaf = static_cast<std::size_t>(config_.min_samples_leaf);

        auto left = policy_.zero();
        auto right = policy_.zero();
        std::size_t left_samples = 0;
        for (std::size_t i = 0; i + 1 < col.size(); ++i) {
            const auto r = col[i];
            policy_.add(left, r, weight_[r]);
            left_samples += count_[r];
            const double v = x_(r, f);
            const double next = x_(col[i + 1], f);
            if (!(v < next)) continue;
            if (left_samples < min_leaf) continue;
            const std::size_t right_samples = samples - left_samples;
            if (right_samples < min_leaf) break;

            policy_.complement(total, left, right);
            const double wl = Policy::weight(left);
            const double wr = Policy::weight(right);
            double decrease = parent;
            if (wl > 0.0) decrease -= wl / total_w * policy_.impurity(left);
            if (wr > 0.0) decrease -= wr / total_w * policy_.impurity(right);
            decrease = std::max(0.0, decrease);

            if (best && !(decrease > best->candidate.impurity_decrease + kTieTolerance)) continue;
            double threshold = v + (next - v) / 2.0;
            if (!(threshold < next)) threshold = v;
            best = FoundSplit{{f, threshold, decrease, left_samples, right_samples}, i + 1};
        }
    }

    void partition(std::size_t split_feature, std::size_t begin, std::size_t end, std::size_t left_positions) {
        const auto chosen = column(split_feature, begin, end);
        for (std::size_t i = 0; i < chosen.size(); ++i) goes_left_[chosen[i]] = i < left_positions ? 1 : 0;
        for (std::size_t f = 0; f < features_; ++f) {
            if (f == split_feature) continue;
            auto col = column(f, begin, end);
            std::size_t l = 0;
            std::size_t rcount = 0;
            for (const auto r : col) {
                if (goes_left_[r]) col[l++] = r;
                else scratch_[rcount++] = r;
            }
            std::copy(scratch_.begin(), scratch_.begin() + static_cast<std::ptrdiff_t>(rcount),
                      col.begin() + static_cast<std::ptrdiff_t>(l));
        }
    }

    const FeatureMatrix& x_;
    Policy policy_;
    TreeConfig config_;
    std::size_t features_;
    std::size_t members_ = 0;
    std::vector<std::uint32_t> count_;
    std::vector<double> weight_;
    std::vector<std::uint32_t> sorted_;
    std::vector<std::uint8_t> goes_left_;
    std::vector<std::uint32_t> scratch_;
    Tree tree_;
};

ClassPolicy class_policy(const LabelVector& y, const TreeConfig& config) {
    if (y.num_classes() == 0) throw Error("label vector has no classes");
    return ClassPolicy{y.ids, y.num_classes(), config.criterion};
}

}  // namespace

std::optional<SplitCandidate> best_split(const FeatureMatrix& rows, const LabelVector& labels,
                                         const TreeConfig& config,
                                         std::span<const std::size_t> candidate_features) {
    if (rows.rows() == 0) throw Error("best_split needs at least one row");
    if (rows.rows() != labels.size()) throw Error("feature rows and labels differ in length");
    TreeBuilder<ClassPolicy> builder(rows, class_policy(labels, config), config, {}, nullptr);
    auto found = builder.root_split(candidate_features);
    if (!found) return std::nullopt;
    return found->candidate;
}

Tree grow_classification_tree(const FeatureMatrix& x, const LabelVector& y, const TreeConfig& config,
                              const SampleSet& samples, const ColumnOrder* order) {
    if (x.rows() == 0) throw Error("cannot fit a tree on an empty matrix");
    if (x.rows() != y.size()) throw Error("feature rows and labels differ in length");
    return TreeBuilder<ClassPolicy>(x, class_policy(y, config), config, samples, order).build();
}

Tree grow_regression_tree(const FeatureMatrix& x, std::span<const double> target, const TreeConfig& config,
                          const SampleSet& samples, const ColumnOrder* order) {
    if (x.rows() == 0) throw Error("cannot fit a tree on an empty matrix");
    if (x.rows() != target.size()) throw Error("feature rows and targets differ in length");
    return TreeBuilder<RegressionPolicy>(x, RegressionPolicy{target}, config, samples, order).build();
}

FittedTree FittedTree::fit(const FeatureMatrix& m, const LabelVector& y, const TreeConfig& config) {
    FittedTree out;
    out.config = config;
    out.tree = grow_classification_tree(m, y, config);
    out.class_names = y.class_names;
    out.level = y.level;
    return out;
}

LabelVector FittedTree::predict(const FeatureMatrix& m) const {
    check_feature_count(m, tree.n_features);
    LabelVector out{{}, class_names, level};
    out.ids.resize(m.rows());
    for (std::size_t r = 0; r < m.rows(); ++r)
        out.ids[r] = static_cast<int>(argmax(tree.leaf_value(tree.leaf_index(m.row(r)))));
    return out;
}

Matrix FittedTree::predict_proba(const FeatureMatrix& m) const {
    check_feature_count(m, tree.n_features);
    Matrix out(m.rows(), class_names.size());
    for (std::size_t r = 0; r < m.rows(); ++r) {
        const auto leaf = tree.leaf_value(tree.leaf_index(m.row(r)));
        const double total = std::accumulate(leaf.begin(), leaf.end(), 0.0);
        auto dst = out.row(r);
        for (std::size_t k = 0; k < leaf.size(); ++k) dst[k] = leaf[k] / total;
    }
    return out;
}

}  // namespace iotsentry
