#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "doctest.h"
#include "iotsentry/error.hpp"
#include "iotsentry/tree.hpp"
#include "oracles/cart_oracle.hpp"
#include "support.hpp"

using namespace iotsentry;

namespace {

std::vector<std::vector<double>> rows_of(const FeatureMatrix& m) {
    std::vector<std::vector<double>> out;
    for (std::size_t r = 0; r < m.rows(); ++r) out.emplace_back(m.row(r).begin(), m.row(r).end());
    return out;
}

double accuracy_of(const LabelVector& a, const LabelVector& b) {
    std::size_t hit = 0;
    for (std::size_t i = 0; i < a.size(); ++i) hit += a.ids[i] == b.ids[i];
    return static_cast<double>(hit) / static_cast<double>(a.size());
}

void check_constraints(const FittedTree& t, const TreeConfig& c) {
    for (std::size_t i = 0; i < t.tree.nodes.size(); ++i) {
        const auto& n = t.tree.nodes[i];
        if (n.is_leaf()) {
            if (i == 0) continue;  // a root leaf holds whatever data there was
            CHECK(n.samples >= static_cast<std::uint32_t>(c.min_samples_leaf));
        } else {
            CHECK(n.samples >= static_cast<std::uint32_t>(c.min_samples_split));
        }
        if (c.max_depth) CHECK(n.depth <= static_cast<std::uint32_t>(*c.max_depth));
    }
}

}  // namespace

TEST_CASE("gini and entropy values") {
    CHECK(gini(std::vector<double>{10, 0}) == 0.0);
    CHECK(gini(std::vector<double>{5, 5}) == doctest::Approx(0.5));
    CHECK(gini(std::vector<double>{1, 1, 1, 1}) == doctest::Approx(0.75));
    CHECK(entropy(std::vector<double>{8, 8}) == doctest::Approx(1.0));
    CHECK(entropy(std::vector<double>{7, 0}) == 0.0);
    const double p = 0.25;
    CHECK(std::fabs(entropy(std::vector<double>{1, 3}) - (-p * std::log2(p) - (1 - p) * std::log2(1 - p))) < 1e-6);
    CHECK(std::fabs(entropy(std::vector<double>{1, 3}) - 0.811278) < 1e-6);
}

TEST_CASE("property: impurity bounds") {
    std::mt19937_64 g(5);
    for (int trial = 0; trial < 500; ++trial) {
        const std::size_t k = 2 + g() % 6;
        std::vector<double> c(k);
        for (auto& v : c) v = static_cast<double>(g() % 5);
        if (std::accumulate(c.begin(), c.end(), 0.0) == 0.0) c[0] = 1;
        const auto nonzero = std::count_if(c.begin(), c.end(), [](double v) { return v > 0; });
        const double gi = gini(c);
        const double en = entropy(c);
        CHECK(gi >= 0.0);
        CHECK(gi <= 1.0 - 1.0 / static_cast<double>(k) + 1e-12);
        CHECK(en >= 0.0);
        CHECK(en <= std::log2(static_cast<double>(k)) + 1e-12);
        CHECK((gi == 0.0) == (nonzero == 1));
        CHECK((en == 0.0) == (nonzero == 1));
    }
}

TEST_CASE("best_split examples") {
    const auto m = test::matrix(1, {1, 2, 9, 10});
    const auto y = test::labels({0, 0, 1, 1}, 2);
    const std::vector<std::size_t> features{0};
    TreeConfig c;
    const auto s = best_split(m, y, c, features);
    REQUIRE(s);
    CHECK(s->threshold == 5.5);
    CHECK(s->impurity_decrease == doctest::Approx(0.5));
    CHECK(s->left_count == 2);

    CHECK_FALSE(best_split(m, test::labels({1, 1, 1, 1}, 2), c, features));
    c.min_samples_leaf = 3;
    CHECK_FALSE(best_split(m, y, c, features));
}

TEST_CASE("midpoint that rounds up falls back to the lower value") {
    const double a = 1.0;
    const double b = std::nextafter(1.0, 2.0);
    const auto m = test::matrix(1, {a, b});
    const auto t = FittedTree::fit(m, test::labels({0, 1}, 2), {});
    REQUIRE(t.tree.nodes.size() == 3);
    CHECK(t.tree.nodes[0].threshold == a);
    CHECK(t.predict(m).ids == std::vector<int>{0, 1});
}

TEST_CASE("separable data is memorised; depth 1 gives one split") {
    std::vector<double> v;
    std::vector<int> ids;
    for (int i = 0; i < 40; ++i) {
        v.push_back(i);
        ids.push_back((i / 5) % 2);
    }
    const auto m = test::matrix(1, v);
    const auto y = test::labels(ids, 2);
    const auto full = FittedTree::fit(m, y, {});
    CHECK(full.predict(m).ids == y.ids);
    TreeConfig c;
    c.max_depth = 1;
    CHECK(FittedTree::fit(m, y, c).tree.nodes.size() <= 3);
}

TEST_CASE("boundary value routes left; empty input predicts nothing") {
    const auto m = test::matrix(1, {0, 10});
    const auto t = FittedTree::fit(m, test::labels({0, 1}, 2), {});
    CHECK(t.tree.nodes[0].threshold == 5.0);
    CHECK(t.predict(test::matrix(1, {5.0})).ids == std::vector<int>{0});
    CHECK(t.predict(test::matrix(1, {std::nextafter(5.0, 6.0)})).ids == std::vector<int>{1});
    CHECK(t.predict(test::matrix(1, {})).ids.empty());
    CHECK_THROWS_AS(t.predict(test::matrix(2, {1, 2})), SchemaError);
}

TEST_CASE("leaf probabilities are raw frequencies") {
    {
        const auto m = test::matrix(1, std::vector<double>(12, 1.0));
        const auto t = FittedTree::fit(m, test::labels(std::vector<int>(12, 1), 2), {});
        const auto p = t.predict_proba(test::matrix(1, {1.0}));
        CHECK(p(0, 0) == 0.0);
        CHECK(p(0, 1) == 1.0);
    }
    {
        const auto m = test::matrix(1, {1, 1, 1, 1});
        const auto t = FittedTree::fit(m, test::labels({0, 0, 0, 1}, 2), {});
        const auto p = t.predict_proba(test::matrix(1, {1.0}));
        CHECK(p(0, 0) == 0.75);
        CHECK(p(0, 1) == 0.25);
    }
}

TEST_CASE("config validation") {
    TreeConfig c;
    c.max_depth = 0;
    CHECK_THROWS_AS(c.validate(), Error);
    c = {};
    c.min_samples_split = 1;
    CHECK_THROWS_AS(c.validate(), Error);
    c = {};
    c.min_samples_leaf = 0;
    CHECK_THROWS_AS(c.validate(), Error);
}

TEST_CASE("20-point 3-class fixture matches the exhaustive CART oracle") {
    std::mt19937_64 g(20);
    const auto m = test::random_matrix(20, 3, g);
    const auto y = test::random_labels(20, 3, g);
    const auto t = FittedTree::fit(m, y, {});
    const auto x = rows_of(m);
    const oracle::Cart cart(x, y.ids, 3, {});
    auto expect = y;
    for (std::size_t i = 0; i < x.size(); ++i) expect.ids[i] = cart.predict(x[i]);
    CHECK(accuracy_of(t.predict(m), y) == accuracy_of(expect, y));
}

TEST_CASE("property: tree agrees with the CART oracle on small random data") {
    std::mt19937_64 g(2024);
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t n = 2 + g() % 24;
        const std::size_t f = 1 + g() % 3;
        const std::size_t k = 2 + g() % 3;
        const auto m = test::random_matrix(n, f, g, trial % 2 ? 4 : 0);
        const auto y = test::random_labels(n, k, g);
        TreeConfig c;
        c.criterion = g() % 2 ? Criterion::gini : Criterion::entropy;
        if (g() % 2) c.max_depth = 1 + static_cast<int>(g() % 4);
        c.min_samples_split = 2 + static_cast<int>(g() % 4);
        c.min_samples_leaf = 1 + static_cast<int>(g() % 3);
        const auto t = FittedTree::fit(m, y, c);
        check_constraints(t, c);

        oracle::CartParams p;
        p.entropy = c.criterion == Criterion::entropy;
        p.max_depth = c.max_depth;
        p.min_samples_split = static_cast<std::size_t>(c.min_samples_split);
        p.min_samples_leaf = static_cast<std::size_t>(c.min_samples_leaf);
        const auto x = rows_of(m);
        const oracle::Cart cart(x, y.ids, k, p);
        const auto pred = t.predict(m);
        for (std::size_t i = 0; i < n; ++i) CHECK(pred.ids[i] == cart.predict(x[i]));
    }
}

TEST_CASE("property: row permutation and positive column scaling leave predictions unchanged") {
    std::mt19937_64 g(77);
    for (int trial = 0; trial < 40; ++trial) {
        const std::size_t n = 10 + g() % 60;
        const auto m = test::random_matrix(n, 3, g);
        const auto y = test::random_labels(n, 3, g);
        TreeConfig c;
        c.criterion = trial % 2 ? Criterion::entropy : Criterion::gini;
        c.max_depth = 4;
        const auto base = FittedTree::fit(m, y, c).predict(m);

        std::vector<std::size_t> perm(n);
        std::iota(perm.begin(), perm.end(), 0);
        std::shuffle(perm.begin(), perm.end(), g);
        const auto pm = m.select_rows(perm);
        const auto pt = FittedTree::fit(pm, y.select(perm), c);
        const auto ppred = pt.predict(m);
        CHECK(ppred.ids == base.ids);

        auto scaled = m;
        const double s = 0.5 + static_cast<double>(g() % 100);
        for (std::size_t r = 0; r < n; ++r) scaled(r, 1) *= s;
        CHECK(FittedTree::fit(scaled, y, c).predict(scaled).ids == base.ids);
    }
}

TEST_CASE("property: bootstrap counts behave like duplicated rows") {
    std::mt19937_64 g(31);
    for (int trial = 0; trial < 40; ++trial) {
        const std::size_t n = 5 + g() % 30;
        const auto m = test::random_matrix(n, 2, g);
        const auto y = test::random_labels(n, 3, g);
        std::vector<std::uint32_t> count(n);
        std::vector<std::size_t> expanded;
        for (std::size_t r = 0; r < n; ++r) {
            count[r] = static_cast<std::uint32_t>(g() % 3);
            for (std::uint32_t i = 0; i < count[r]; ++i) expanded.push_back(r);
        }
        if (expanded.empty()) continue;
        TreeConfig c;
        c.max_depth = 3;
        const auto weighted = grow_classification_tree(m, y, c, SampleSet{count, {}});
        const auto dup = grow_classification_tree(m.select_rows(expanded), y.select(expanded), c);
        for (std::size_t r = 0; r < n; ++r) {
            const auto a = weighted.leaf_value(weighted.leaf_index(m.row(r)));
            const auto b = dup.leaf_value(dup.leaf_index(m.row(r)));
            CHECK(std::vector<double>(a.begin(), a.end()) == std::vector<double>(b.begin(), b.end()));
        }
    }
}

TEST_CASE("sqrt feature sampling is seeded") {
    std::mt19937_64 g(8);
    const auto m = test::random_matrix(200, 46, g);
    const auto y = test::random_labels(200, 4, g);
    TreeConfig c;
    c.max_features = MaxFeatures::sqrt;
    c.seed = 1;
    const auto a = FittedTree::fit(m, y, c);
    CHECK(a == FittedTree::fit(m, y, c));
    bool differs = false;
    for (std::uint64_t s = 2; s < 10 && !differs; ++s) {
        c.seed = s;
        differs = !(FittedTree::fit(m, y, c).tree == a.tree);
    }
    CHECK(differs);
}

TEST_CASE("regression tree leaves hold weighted means") {
    const auto m = test::matrix(1, {1, 2, 3, 10, 11, 12});
    const std::vector<double> t{1, 1, 1, 5, 6, 7};
    TreeConfig c;
    c.max_depth = 1;
    const auto tree = grow_regression_tree(m, t, c);
    REQUIRE(tree.nodes.size() == 3);
    CHECK(tree.nodes[0].threshold == 6.5);
    CHECK(tree.leaf_value(tree.leaf_index(m.row(0)))[0] == doctest::Approx(1.0));
    CHECK(tree.leaf_value(tree.leaf_index(m.row(5)))[0] == doctest::Approx(6.0));
}

TEST_CASE("property: every probability row sums to one") {
    std::mt19937_64 g(12);
    for (int trial = 0; trial < 30; ++trial) {
        const auto m = test::random_matrix(50, 3, g);
        const auto y = test::random_labels(50, 4, g);
        TreeConfig c;
        c.max_depth = 1 + static_cast<int>(g() % 5);
        const auto p = FittedTree::fit(m, y, c).predict_proba(test::random_matrix(30, 3, g));
        for (std::size_t r = 0; r < p.rows(); ++r) {
            double s = 0.0;
            for (const double v : p.row(r)) s += v;
            CHECK(std::fabs(s - 1.0) <= 1e-12);
        }
    }
}
