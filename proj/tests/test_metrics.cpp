#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "doctest.h"
#include "iotsentry/error.hpp"
#include "iotsentry/metrics.hpp"
#include "oracles/auc_oracle.hpp"
#include "oracles/count_oracle.hpp"
#include "support.hpp"

using namespace iotsentry;

namespace {

LabelVector named(std::vector<int> ids, std::vector<std::string> names) {
    LabelVector y;
    y.ids = std::move(ids);
    y.class_names = std::move(names);
    return y;
}

std::vector<std::uint8_t> mask(std::initializer_list<int> v) {
    std::vector<std::uint8_t> out;
    for (const int x : v) out.push_back(static_cast<std::uint8_t>(x));
    return out;
}

Matrix random_proba(std::size_t rows, std::size_t k, std::mt19937_64& g, int levels) {
    Matrix p(rows, k);
    for (std::size_t r = 0; r < rows; ++r) {
        double s = 0.0;
        for (auto& v : p.row(r)) s += v = static_cast<double>(1 + g() % static_cast<std::uint64_t>(levels));
        for (auto& v : p.row(r)) v /= s;
    }
    return p;
}

}  // namespace

TEST_CASE("confusion counts") {
    const auto t = named({0, 0, 1}, {"A", "B"});
    const auto p = named({0, 1, 1}, {"A", "B"});
    const auto cm = confusion(t, p);
    CHECK(cm(0, 0) == 1);
    CHECK(cm(0, 1) == 1);
    CHECK(cm(1, 0) == 0);
    CHECK(cm(1, 1) == 1);
    const auto perfect = confusion(t, t);
    CHECK(perfect.trace() == perfect.total());
    CHECK_THROWS_AS(confusion(t, named({0, 1, 1}, {"A", "C"})), Error);
}

TEST_CASE("precision, recall, F1 and accuracy examples") {
    CHECK(precision(5, 0).value == 1.0);
    CHECK(precision(0, 0).value == 0.0);
    CHECK(precision(0, 0).undefined);
    CHECK_FALSE(precision(5, 0).undefined);
    CHECK(recall(5, 0).value == 1.0);
    CHECK(recall(1, 3).value == 0.25);
    CHECK(recall(0, 0).undefined);
    CHECK(f1(0.4, 0.4) == doctest::Approx(0.4));
    CHECK(std::fabs(f1(0.5, 1.0) - 0.6667) <= 1e-4);
    CHECK(std::fabs(f1(0.997, 0.995) - 0.996) <= 5e-4);
    CHECK(f1(0.0, 0.0) == 0.0);
    const auto y = test::labels({0, 1, 1, 0}, 2);
    CHECK(accuracy(y, y) == 1.0);
    CHECK(accuracy(y, test::labels({0, 1, 1, 1}, 2)) == 0.75);
    CHECK_THROWS_AS(accuracy(test::labels({}, 2), test::labels({}, 2)), Error);
}

TEST_CASE("aggregation schemes") {
    // A: support 3, precision 1.0; B: support 1, precision 0.5.
    const auto t = named({0, 0, 0, 1}, {"A", "B"});
    const auto p = named({0, 0, 1, 1}, {"A", "B"});
    const auto pc = per_class_metrics(confusion(t, p));
    CHECK(pc[0].precision.value == 1.0);
    CHECK(pc[1].precision.value == 0.5);
    CHECK(aggregate(pc, Averaging::macro).precision == doctest::Approx(0.75));
    CHECK(aggregate(pc, Averaging::weighted).precision == doctest::Approx(0.875));

    // Weighted F1 from per-class F1 differs from F1 of weighted P and R.
    const auto w = aggregate(pc, Averaging::weighted);
    const double f1_of_means = f1(w.precision, w.recall);
    const double mean_of_f1 = (3.0 * pc[0].f1 + 1.0 * pc[1].f1) / 4.0;
    CHECK(w.f1 == doctest::Approx(mean_of_f1));
    CHECK(std::fabs(w.f1 - f1_of_means) > 1e-3);

    const auto same = per_class_metrics(confusion(t, t));
    CHECK(aggregate(same, Averaging::macro).f1 == 1.0);
    CHECK(aggregate(same, Averaging::weighted).f1 == 1.0);
}

TEST_CASE("property: metrics agree with direct counting on random confusion matrices") {
    std::mt19937_64 g(100);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t k = 2 + g() % 6;
        const std::size_t n = 1 + g() % 300;
        const auto t = test::random_labels(n, k, g);
        auto p = test::random_labels(n, k, g);
        for (std::size_t i = 0; i < n; ++i)
            if (g() % 2) p.ids[i] = t.ids[i];
        const auto cm = confusion(t, p);
        CHECK(cm.total() == n);
        CHECK(accuracy(t, p) == doctest::Approx(static_cast<double>(cm.trace()) / static_cast<double>(n)));
        const auto norm = cm.normalized();
        for (std::size_t r = 0; r < k; ++r) {
            double s = 0.0;
            for (std::size_t c = 0; c < k; ++c) s += norm(r, c);
            if (cm.total() > 0 && std::accumulate(cm.counts.begin() + static_cast<std::ptrdiff_t>(r * k),
                                                  cm.counts.begin() + static_cast<std::ptrdiff_t>((r + 1) * k), std::size_t{0}) > 0)
                CHECK(std::fabs(s - 1.0) <= 1e-12);
        }
        const auto pc = per_class_metrics(cm);
        for (std::size_t c = 0; c < k; ++c) {
            const auto o = oracle::count_class(t.ids, p.ids, static_cast<int>(c));
            CHECK(pc[c].tp == o.tp);
            CHECK(pc[c].fp == o.fp);
            CHECK(pc[c].fn == o.fn);
            CHECK(pc[c].tn == o.tn);
            CHECK(pc[c].tp + pc[c].fp + pc[c].fn + pc[c].tn == n);
            const double pr = oracle::safe_ratio(o.tp, o.tp + o.fp);
            const double re = oracle::safe_ratio(o.tp, o.tp + o.fn);
            CHECK(pc[c].precision.value == pr);
            CHECK(pc[c].recall.value == re);
            CHECK(pc[c].precision.undefined == (o.tp + o.fp == 0));
            if (pr + re > 0) {
                CHECK(pc[c].f1 == doctest::Approx(2 * pr * re / (pr + re)));
                CHECK(pc[c].f1 >= std::min(pr, re) - 1e-12);
                CHECK(pc[c].f1 <= std::max(pr, re) + 1e-12);
            }
        }
    }
}

TEST_CASE("property: macro and weighted coincide for equal supports") {
    std::mt19937_64 g(6);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t k = 2 + g() % 4;
        std::vector<int> ids;
        for (std::size_t c = 0; c < k; ++c)
            for (int i = 0; i < 10; ++i) ids.push_back(static_cast<int>(c));
        const auto t = test::labels(ids, k);
        auto p = t;
        for (auto& v : p.ids)
            if (g() % 3 == 0) v = static_cast<int>(g() % k);
        const auto pc = per_class_metrics(confusion(t, p));
        const auto m = aggregate(pc, Averaging::macro);
        const auto w = aggregate(pc, Averaging::weighted);
        CHECK(m.precision == doctest::Approx(w.precision));
        CHECK(m.recall == doctest::Approx(w.recall));
        CHECK(m.f1 == doctest::Approx(w.f1));
    }
}

TEST_CASE("ROC examples") {
    const std::vector<double> sep{0.9, 0.8, 0.7, 0.3, 0.2, 0.1};
    const auto pos = mask({1, 1, 1, 0, 0, 0});
    CHECK(roc_from_scores(sep, pos, "a").auc == 1.0);
    const std::vector<double> flat(6, 0.4);
    CHECK(std::fabs(roc_from_scores(flat, pos, "a").auc - 0.5) <= 1e-9);

    const std::vector<double> six{0.1, 0.4, 0.35, 0.8, 0.4, 0.6};
    const auto six_pos = mask({0, 1, 0, 1, 0, 1});
    CHECK(std::fabs(roc_from_scores(six, six_pos, "a").auc - oracle::mann_whitney_auc(six, six_pos)) <= 1e-9);
    CHECK_THROWS_AS(roc_from_scores(six, mask({1, 1, 1, 1, 1, 1}), "a"), Error);
}

TEST_CASE("property: ROC AUC equals the Mann-Whitney statistic") {
    std::mt19937_64 g(200);
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t n = 2 + g() % 199;
        std::vector<double> s(n);
        std::vector<std::uint8_t> pos(n);
        for (std::size_t i = 0; i < n; ++i) {
            s[i] = trial % 2 ? static_cast<double>(g() % 7) : static_cast<double>(g() >> 11) * 0x1.0p-53;
            pos[i] = static_cast<std::uint8_t>(g() % 2);
        }
        pos[0] = 1;
        pos[1] = 0;
        const auto c = roc_from_scores(s, pos, "x");
        CHECK(std::fabs(c.auc - oracle::mann_whitney_auc(s, pos)) <= 1e-9);
        CHECK(c.auc >= 0.0);
        CHECK(c.auc <= 1.0);
        CHECK(c.points.front().fpr == 0.0);
        CHECK(c.points.front().tpr == 0.0);
        CHECK(c.points.back().fpr == 1.0);
        CHECK(c.points.back().tpr == 1.0);
        for (std::size_t i = 1; i < c.points.size(); ++i) {
            CHECK(c.points[i].fpr >= c.points[i - 1].fpr);
            CHECK(c.points[i].tpr >= c.points[i - 1].tpr);
        }
        for (auto& v : s) v = -v;
        CHECK(std::fabs(roc_from_scores(s, pos, "x").auc - (1.0 - c.auc)) <= 1e-9);
    }
}

TEST_CASE("macro and micro ROC") {
    std::mt19937_64 g(3);
    const std::size_t k = 3;
    const auto y = test::random_labels(90, k, g);
    const auto p = random_proba(90, k, g, 5);
    const auto macro = roc_macro(y, p);
    double mean = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
        std::vector<double> s;
        std::vector<std::uint8_t> pos;
        for (std::size_t r = 0; r < y.size(); ++r) {
            s.push_back(p(r, c));
            pos.push_back(y.ids[r] == static_cast<int>(c));
        }
        const double o = oracle::mann_whitney_auc(s, pos);
        CHECK(std::fabs(roc_ovr(y, p, c).auc - o) <= 1e-9);
        mean += o / static_cast<double>(k);
    }
    CHECK(std::fabs(macro.auc - mean) <= 1e-9);
    CHECK(macro.points.size() == kMacroRocGridPoints + 1);  // grid plus the origin

    std::vector<double> flat;
    std::vector<std::uint8_t> flat_pos;
    for (std::size_t r = 0; r < y.size(); ++r)
        for (std::size_t c = 0; c < k; ++c) {
            flat.push_back(p(r, c));
            flat_pos.push_back(y.ids[r] == static_cast<int>(c));
        }
    CHECK(std::fabs(roc_micro(y, p).auc - oracle::mann_whitney_auc(flat, flat_pos)) <= 1e-9);

    Matrix perfect(y.size(), k);
    for (std::size_t r = 0; r < y.size(); ++r) perfect(r, static_cast<std::size_t>(y.ids[r])) = 1.0;
    CHECK(roc_macro(y, perfect).auc == 1.0);
    CHECK(roc_micro(y, perfect).auc == 1.0);
}

TEST_CASE("evaluate ties everything together") {
    std::mt19937_64 g(9);
    const auto y = test::random_labels(120, 4, g);
    auto pred = y;
    for (auto& v : pred.ids)
        if (g() % 5 == 0) v = static_cast<int>(g() % 4);
    const auto p = random_proba(120, 4, g, 9);
    const auto r = evaluate(y, pred, p);
    CHECK(r.accuracy == accuracy(y, pred));
    CHECK(r.per_class.size() == 4);
    CHECK(r.class_roc.size() == 4);
    CHECK(r.macro.f1 == aggregate(r.per_class, Averaging::macro).f1);

    Matrix perfect(y.size(), 4);
    for (std::size_t i = 0; i < y.size(); ++i) perfect(i, static_cast<std::size_t>(y.ids[i])) = 1.0;
    const auto best = evaluate(y, y, perfect);
    CHECK(best.accuracy == 1.0);
    CHECK(best.macro_roc.auc == 1.0);
    CHECK(best.confusion.trace() == y.size());
}
