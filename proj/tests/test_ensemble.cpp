#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

#include "doctest.h"
#include "iotsentry/ensemble.hpp"
#include "iotsentry/error.hpp"
#include "oracles/fixtures.hpp"
#include "oracles/gbm_oracle.hpp"
#include "oracles/samme_r_oracle.hpp"
#include "support.hpp"

using namespace iotsentry;

namespace {

std::vector<std::vector<double>> rows_of(const FeatureMatrix& m) {
    std::vector<std::vector<double>> out;
    for (std::size_t r = 0; r < m.rows(); ++r) out.emplace_back(m.row(r).begin(), m.row(r).end());
    return out;
}

double train_accuracy(const LabelVector& y, const LabelVector& p) {
    std::size_t hit = 0;
    for (std::size_t i = 0; i < y.size(); ++i) hit += y.ids[i] == p.ids[i];
    return static_cast<double>(hit) / static_cast<double>(y.size());
}

void check_rows_sum_to_one(const Matrix& p) {
    for (std::size_t r = 0; r < p.rows(); ++r) {
        double s = 0.0;
        for (const double v : p.row(r)) s += v;
        CHECK(std::fabs(s - 1.0) <= 1e-12);
    }
}

Tree constant_tree(std::vector<double> counts) {
    Tree t;
    t.nodes.push_back(TreeNode{});
    t.value_count = counts.size();
    t.leaf_values = std::move(counts);
    t.n_features = 1;
    return t;
}

FittedForest forest_of(std::vector<Tree> trees) {
    FittedForest f;
    f.trees = std::move(trees);
    f.class_names = {"A", "B"};
    return f;
}

// Two classes on the line; no stump separates them, so boosting has work to do.
Labeled eight_points() {
    return {test::matrix(2, {1, 0, 2, 1, 3, 0, 4, 1, 5, 0, 6, 1, 7, 0, 8, 1}),
            test::labels({0, 0, 1, 0, 1, 1, 0, 1}, 2)};
}

}  // namespace

// ---- random forest ----------------------------------------------------------

TEST_CASE("one-tree forest without bootstrap equals a single tree") {
    std::mt19937_64 g(1);
    for (int trial = 0; trial < 10; ++trial) {
        const auto m = test::random_matrix(80, 4, g);
        const auto y = test::random_labels(80, 3, g);
        ForestConfig c;
        c.n_estimators = 1;
        c.bootstrap = false;
        c.tree.max_features = MaxFeatures::all;
        c.tree.max_depth = 1 + static_cast<int>(g() % 6);
        c.seed = g();
        const auto forest = FittedForest::fit(m, y, c);
        const auto tree = FittedTree::fit(m, y, c.tree);
        const auto probe = test::random_matrix(200, 4, g);
        CHECK(forest.predict(probe).ids == tree.predict(probe).ids);
        CHECK(forest.predict(m).ids == tree.predict(m).ids);
    }
}

TEST_CASE("forest fits are reproducible and seed dependent") {
    const auto d = fixtures::blobs(300, 4, 3, 5, 1.2);
    ForestConfig c;
    c.n_estimators = 20;
    c.seed = 9;
    const auto a = FittedForest::fit(d.x, d.y, c);
    CHECK(a == FittedForest::fit(d.x, d.y, c));
    c.seed = 10;
    CHECK_FALSE(a == FittedForest::fit(d.x, d.y, c));
}

TEST_CASE("200-tree forest reaches the training accuracy of one depth-8 tree") {
    const auto d = fixtures::blobs(500, 4, 3, 17, 1.6);
    ForestConfig c;
    c.seed = 3;
    const auto forest = FittedForest::fit(d.x, d.y, c);
    CHECK(forest.trees.size() == 200);
    TreeConfig t;
    t.max_depth = 8;
    const double tree_acc = train_accuracy(d.y, FittedTree::fit(d.x, d.y, t).predict(d.x));
    const double forest_acc = train_accuracy(d.y, forest.predict(d.x));
    MESSAGE("tree " << tree_acc << " forest " << forest_acc);
    CHECK(forest_acc >= tree_acc);
}

TEST_CASE("plurality voting and ties") {
    const auto probe = test::matrix(1, {0.0});
    const auto a = constant_tree({3, 1});
    const auto b = constant_tree({1, 3});
    CHECK(forest_of({a, a, a}).predict(probe).ids[0] == 0);
    CHECK(forest_of({a, a, b}).predict(probe).ids[0] == 0);
    CHECK(forest_of({b, b, a}).predict(probe).ids[0] == 1);
    CHECK(forest_of({a, b}).predict(probe).ids[0] == 0);
    CHECK(forest_of({b, a}).predict(probe).ids[0] == 0);
    const auto v = forest_of({b, a, b}).votes(probe);
    CHECK(v(0, 0) == 1.0);
    CHECK(v(0, 1) == 2.0);
}

TEST_CASE("property: the forest winner has at least as many votes as any class") {
    const auto d = fixtures::blobs(200, 3, 4, 8, 1.5);
    ForestConfig c;
    c.n_estimators = 15;
    c.tree.max_depth = 3;
    const auto f = FittedForest::fit(d.x, d.y, c);
    const auto votes = f.votes(d.x);
    const auto pred = f.predict(d.x);
    for (std::size_t r = 0; r < d.x.rows(); ++r) {
        const auto row = votes.row(r);
        const double won = row[static_cast<std::size_t>(pred.ids[r])];
        for (std::size_t k = 0; k < row.size(); ++k) {
            CHECK(won >= row[k]);
            if (row[k] == won) CHECK(static_cast<int>(k) >= pred.ids[r]);
        }
    }
    check_rows_sum_to_one(f.predict_proba(d.x));
}

// ---- AdaBoost ------------------------------------------------------------------

TEST_CASE("AdaBoost weights follow the step-by-step SAMME.R oracle") {
    const auto d = eight_points();
    AdaBoostConfig c;
    c.n_estimators = 3;
    const auto model = FittedAdaBoost::fit(d.x, d.y, c, true);
    const auto run = oracle::samme_r(rows_of(d.x), d.y.ids, 2, 3, c.learning_rate);
    REQUIRE(model.weight_history.size() == run.weights.size());
    double worst = 0.0;
    for (std::size_t m = 0; m < run.weights.size(); ++m)
        for (std::size_t i = 0; i < 8; ++i)
            worst = std::max(worst, std::fabs(model.weight_history[m][i] - run.weights[m][i]));
    CHECK(worst <= 1e-9);
    const auto pred = model.predict(d.x);
    const auto x = rows_of(d.x);
    for (std::size_t i = 0; i < 8; ++i) CHECK(pred.ids[i] == oracle::samme_r_predict(run, x[i], 2));
}

TEST_CASE("property: AdaBoost agrees with the oracle on random multi-class data") {
    std::mt19937_64 g(404);
    for (int trial = 0; trial < 25; ++trial) {
        const std::size_t n = 6 + g() % 30;
        const std::size_t k = 2 + g() % 3;
        const auto m = test::random_matrix(n, 2, g, trial % 2 ? 5 : 0);
        const auto y = test::random_labels(n, k, g);
        if (y.class_counts()[0] == n) continue;
        AdaBoostConfig c;
        c.n_estimators = 6;
        c.learning_rate = 0.05 + static_cast<double>(g() % 10) / 10.0;
        const auto model = FittedAdaBoost::fit(m, y, c, true);
        const auto run = oracle::samme_r(rows_of(m), y.ids, k, static_cast<int>(model.learners.size()), c.learning_rate);
        for (std::size_t r = 0; r < model.weight_history.size(); ++r) {
            double total = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                CHECK(model.weight_history[r][i] >= 0.0);
                CHECK(std::fabs(model.weight_history[r][i] - run.weights[r][i]) <= 1e-9);
                total += model.weight_history[r][i];
            }
            CHECK(std::fabs(total - 1.0) <= 1e-9);
        }
    }
}

TEST_CASE("AdaBoost starts uniform and shifts weight to mistakes") {
    const auto d = eight_points();
    AdaBoostConfig c;
    c.n_estimators = 1;
    const auto model = FittedAdaBoost::fit(d.x, d.y, c, true);
    for (const double w : model.weight_history[0]) CHECK(w == 0.125);
    const auto pred = model.predict(d.x);
    const auto& w = model.weight_history[1];
    for (std::size_t i = 0; i < 8; ++i)
        for (std::size_t j = 0; j < 8; ++j)
            if (pred.ids[i] == d.y.ids[i] && pred.ids[j] != d.y.ids[j]) CHECK(w[i] < w[j]);
}

TEST_CASE("one AdaBoost round predicts like its tree") {
    const auto d = fixtures::blobs(120, 3, 3, 2, 1.0);
    AdaBoostConfig c;
    c.n_estimators = 1;
    c.base_tree.max_depth = 3;
    const auto model = FittedAdaBoost::fit(d.x, d.y, c);
    const auto& t = model.learners.front();
    const auto pred = model.predict(d.x);
    for (std::size_t r = 0; r < d.x.rows(); ++r)
        CHECK(pred.ids[r] == static_cast<int>(argmax(t.leaf_value(t.leaf_index(d.x.row(r))))));
}

TEST_CASE("AdaBoost decision scores are centred and probabilities normalised") {
    const auto d = fixtures::blobs(150, 3, 4, 6, 1.0);
    AdaBoostConfig c;
    c.n_estimators = 20;
    const auto model = FittedAdaBoost::fit(d.x, d.y, c);
    const auto s = model.decision_function(d.x);
    for (std::size_t r = 0; r < s.rows(); ++r) {
        double total = 0.0;
        for (const double v : s.row(r)) total += v;
        CHECK(std::fabs(total) <= 1e-9);
    }
    check_rows_sum_to_one(model.predict_proba(d.x));
}

TEST_CASE("AdaBoost input errors and an uninformative learner") {
    const auto m = test::matrix(1, {1, 2, 3});
    CHECK_THROWS_AS(FittedAdaBoost::fit(m, test::labels({0, 0, 0}, 2), {}), Error);
    AdaBoostConfig bad;
    bad.learning_rate = 0.0;
    CHECK_THROWS_AS(bad.validate(), Error);
    // Constant features: every stump is the same mixed leaf, so all rounds run.
    const auto flat = test::matrix(1, {1, 1, 1, 1});
    const auto model = FittedAdaBoost::fit(flat, test::labels({0, 1, 1, 1}, 2), {});
    CHECK(model.learners.size() == 100);
}

// ---- gradient boosting ------------------------------------------------------------

TEST_CASE("GBM starts from log priors") {
    const auto m = test::matrix(1, {1, 2, 3, 4});
    GbmConfig c;
    c.n_estimators = 0;
    const auto model = FittedGbm::fit(m, test::labels({0, 1, 1, 1}, 2), c);
    CHECK(model.initial_scores[0] == doctest::Approx(std::log(0.25)));
    CHECK(model.initial_scores[1] == doctest::Approx(std::log(0.75)));
    const auto p = model.predict_proba(m);
    CHECK(std::fabs(p(2, 0) - 0.25) <= 1e-12);
    CHECK(std::fabs(p(2, 1) - 0.75) <= 1e-12);
}

TEST_CASE("GBM deviance trajectory matches the reference implementation") {
    const auto d = fixtures::blobs(30, 2, 3, 30, 1.0);
    GbmConfig c;
    c.n_estimators = 10;
    c.learning_rate = 0.1;
    c.max_depth = 3;
    c.subsample = 1.0;
    const auto model = FittedGbm::fit(d.x, d.y, c);
    const auto x = rows_of(d.x);
    const auto ref = oracle::reference_gbm(x, d.y.ids, 3, 10, 0.1, 3);
    REQUIRE(model.train_deviance.size() == ref.deviance.size());
    for (std::size_t s = 0; s < ref.deviance.size(); ++s)
        CHECK(std::fabs(model.train_deviance[s] - ref.deviance[s]) <= 1e-6);
    CHECK(model.train_deviance.back() < model.train_deviance.front());
    const auto pred = model.predict(d.x);
    for (std::size_t i = 0; i < x.size(); ++i) {
        const auto& s = ref.score[i];
        CHECK(pred.ids[i] == static_cast<int>(std::max_element(s.begin(), s.end()) - s.begin()));
    }
}

TEST_CASE("property: full-sample GBM deviance never increases") {
    std::mt19937_64 g(13);
    for (int trial = 0; trial < 8; ++trial) {
        const auto m = test::random_matrix(60, 3, g);
        const auto y = test::random_labels(60, 2 + g() % 3, g);
        GbmConfig c;
        c.n_estimators = 30;
        c.learning_rate = 0.05;
        c.max_depth = 1 + static_cast<int>(g() % 4);
        c.subsample = 1.0;
        const auto model = FittedGbm::fit(m, y, c);
        for (std::size_t s = 1; s < model.train_deviance.size(); ++s)
            CHECK(model.train_deviance[s] <= model.train_deviance[s - 1] + 1e-12);
        check_rows_sum_to_one(model.predict_proba(m));
    }
}

TEST_CASE("subsampled GBM with the default settings ends below its start") {
    const auto d = fixtures::blobs(200, 4, 3, 21, 1.2);
    GbmConfig c;
    c.seed = 4;
    const auto model = FittedGbm::fit(d.x, d.y, c);
    CHECK(model.stages.size() == 500);
    CHECK(model.train_deviance.back() < model.train_deviance.front());
    CHECK(model == FittedGbm::fit(d.x, d.y, c));
}

TEST_CASE("GBM stage rows") {
    const auto rows = gbm_stage_rows(101, 0.8, 7, 3);
    CHECK(rows.size() == 81);
    CHECK(std::is_sorted(rows.begin(), rows.end()));
    CHECK(std::set<std::size_t>(rows.begin(), rows.end()).size() == rows.size());
    CHECK(rows == gbm_stage_rows(101, 0.8, 7, 3));
    CHECK(rows != gbm_stage_rows(101, 0.8, 7, 4));
    CHECK(gbm_stage_rows(10, 1.0, 7, 0).size() == 10);
    GbmConfig c;
    c.subsample = 0.0;
    CHECK_THROWS_AS(c.validate(), Error);
    CHECK_THROWS_AS(FittedGbm::fit(test::matrix(1, {1, 2}), test::labels({1, 1}, 2), {}), Error);
}
