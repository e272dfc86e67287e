#include "iotsentry/metrics.hpp"

#include <algorithm>
#include <numeric>

#include "iotsentry/error.hpp"

namespace iotsentry {

std::size_t ConfusionMatrix::total() const { return std::accumulate(counts.begin(), counts.end(), std::size_t{0}); }

std::size_t ConfusionMatrix::trace() const {
    std::size_t t = 0;
    for (std::size_t k = 0; k < classes(); ++k) t += (*this)(k, k);
    return t;
}

Matrix ConfusionMatrix::normalized() const {
    const std::size_t k = classes();
    Matrix out(k, k);
    for (std::size_t t = 0; t < k; ++t) {
        std::size_t row_total = 0;
        for (std::size_t p = 0; p < k; ++p) row_total += (*this)(t, p);
        if (row_total == 0) continue;
        for (std::size_t p = 0; p < k; ++p)
            out(t, p) = static_cast<double>((*this)(t, p)) / static_cast<double>(row_total);
    }
    return out;
}

ConfusionMatrix confusion(const LabelVector& y_true, const LabelVector& y_pred) {
    if (y_true.size() != y_pred.size())
        throw Error("confusion: " + std::to_string(y_true.size()) + " true labels vs " +
                    std::to_string(y_pred.size()) + " predictions");
    if (y_true.class_names != y_pred.class_names) throw Error("confusion: class spaces differ");
    ConfusionMatrix cm{y_true.class_names, std::vector<std::size_t>(y_true.num_classes() * y_true.num_classes(), 0)};
    for (std::size_t i = 0; i < y_true.size(); ++i)
        ++cm.counts[static_cast<std::size_t>(y_true.ids[i]) * cm.classes() + static_cast<std::size_t>(y_pred.ids[i])];
    return cm;
}

Ratio precision(std::size_t tp, std::size_t fp) {
    if (tp + fp == 0) return {0.0, true};
    return {static_cast<double>(tp) / static_cast<double>(tp + fp), false};
}

Ratio recall(std::size_t tp, std::size_t fn) {
    if (tp + fn == 0) return {0.0, true};
    return {static_cast<double>(tp) / static_cast<double>(tp + fn), false};
}

double f1(double p, double r) {
    if (p + r == 0.0) return 0.0;
    return 2.0 * p * r / (p + r);
}

double accuracy(const LabelVector& y_true, const LabelVector& y_pred) {
    if (y_true.size() != y_pred.size()) throw Error("accuracy: length mismatch");
    if (y_true.size() == 0) throw Error("accuracy of an empty label set is undefined");
    std::size_t correct = 0;
    for (std::size_t i = 0; i < y_true.size(); ++i) correct += y_true.ids[i] == y_pred.ids[i] ? 1 : 0;
    return static_cast<double>(correct) / static_cast<double>(y_true.size());
}

std::vector<ClassMetrics> per_class_metrics(const ConfusionMatrix& cm) {
    const std::size_t k = cm.classes();
    const std::size_t n = cm.total();
    std::vector<ClassMetrics> out(k);
    for (std::size_t c = 0; c < k; ++c) {
        auto& m = out[c];
        m.name = cm.class_names[c];
        m.tp = cm(c, c);
        for (std::size_t j = 0; j < k; ++j) {
            if (j == c) continue;
            m.fn += cm(c, j);
            m.fp += cm(j, c);
        }
        m.tn = n - m.tp - m.fn - m.fp;
        m.precision = precision(m.tp, m.fp);
        m.recall = recall(m.tp, m.fn);
        m.f1 = f1(m.precision.value, m.recall.value);
    }
    return out;
}

Aggregate aggregate(std::span<const ClassMetrics> per_class, Averaging scheme) {
    if (per_class.empty()) throw Error("aggregate needs at least one class");
    Aggregate out;
    double total = 0.0;
    for (const auto& m : per_class) {
        double w = 0.0;
        if (scheme == Averaging::macro) w = (m.tp + m.fp + m.fn) > 0 ? 1.0 : 0.0;
        else w = static_cast<double>(m.support());
        out.precision += w * m.precision.value;
        out.recall += w * m.recall.value;
        out.f1 += w * m.f1;
        total += w;
    }
    if (total == 0.0) return {};
    out.precision /= total;
    out.recall /= total;
    out.f1 /= total;
    return out;
}

double trapezoid_area(std::span<const RocPoint> points) {
    double area = 0.0;
    for (std::size_t i = 1; i < points.size(); ++i)
        area += (points[i].fpr - points[i - 1].fpr) * (points[i].tpr + points[i - 1].tpr) / 2.0;
    return area;
}

RocCurve roc_from_scores(std::span<const double> scores, std::span<const std::uint8_t> positive, std::string tag) {
    if (scores.size() != positive.size()) throw Error("roc: score and label lengths differ");
    const auto pos = static_cast<std::size_t>(std::count_if(positive.begin(), positive.end(), [](std::uint8_t v) { return v != 0; }));
    const std::size_t neg = positive.size() - pos;
    if (pos == 0) throw Error("roc: class '" + tag + "' has no positive rows");
    if (neg == 0) throw Error("roc: class '" + tag + "' has no negative rows");

    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

    RocCurve curve;
    curve.tag = std::move(tag);
    curve.points.push_back({0.0, 0.0});
    std::size_t tp = 0;
    std::size_t fp = 0;
    for (std::size_t i = 0; i < order.size(); ++i) {
        if (positive[order[i]]) ++tp;
        else ++fp;
        const bool last_of_score = i + 1 == order.size() || scores[order[i + 1]] != scores[order[i]];
        if (last_of_score)
            curve.points.push_back({static_cast<double>(fp) / static_cast<double>(neg),
                                    static_cast<double>(tp) / static_cast<double>(pos)});
    }
    curve.auc = trapezoid_area(curve.points);
    return curve;
}

RocCurve roc_ovr(const LabelVector& y_true, const Matrix& proba, std::size_t positive_class) {
    if (proba.rows() != y_true.size()) throw Error("roc: probability rows differ from label count");
    if (positive_class >= proba.cols()) throw Error("roc: class index out of range");
    std::vector<double> scores(proba.rows());
    std::vector<std::uint8_t> positive(proba.rows());
    for (std::size_t i = 0; i < proba.rows(); ++i) {
        scores[i] = proba(i, positive_class);
        positive[i] = y_true.ids[i] == static_cast<int>(positive_class) ? 1 : 0;
    }
    const std::string tag = positive_class < y_true.class_names.size() ? y_true.class_names[positive_class]
                                                                        : std::to_string(positive_class);
    return roc_from_scores(scores, positive, tag);
}

namespace {

// Walks a curve left to right answering TPR queries at increasing FPR.
class CurveCursor {
public:
    explicit CurveCursor(const std::vector<RocPoint>& pts) : pts_(pts) {}

    // Highest TPR among points at fpr <= x, then linear towards the next point.
    double tpr_at(double x) {
        while (i_ + 1 < pts_.size() && pts_[i_ + 1].fpr <= x) ++i_;
        if (i_ + 1 >= pts_.size() || pts_[i_].fpr == x) return pts_[i_].tpr;
        const auto& a = pts_[i_];
        const auto& b = pts_[i_ + 1];
        return a.tpr + (b.tpr - a.tpr) * (x - a.fpr) / (b.fpr - a.fpr);
    }

private:
    const std::vector<RocPoint>& pts_;
    std::size_t i_ = 0;
};

}  // namespace

RocCurve roc_macro(const LabelVector& y_true, const Matrix& proba, std::span<const std::size_t> classes) {
    if (classes.empty()) throw Error("roc_macro needs at least one class");
    std::vector<RocCurve> curves;
    for (const auto c : classes) curves.push_back(roc_ovr(y_true, proba, c));

    RocCurve out;
    out.tag = "macro";
    out.points.push_back({0.0, 0.0});
    std::vector<CurveCursor> cursors;
    for (const auto& c : curves) cursors.emplace_back(c.points);
    for (std::size_t g = 0; g < kMacroRocGridPoints; ++g) {
        const double x = static_cast<double>(g) / static_cast<double>(kMacroRocGridPoints - 1);
        double tpr = 0.0;
        for (auto& c : cursors) tpr += c.tpr_at(x);
        out.points.push_back({x, tpr / static_cast<double>(curves.size())});
    }
    double auc = 0.0;
    for (const auto& c : curves) auc += c.auc;
    out.auc = auc / static_cast<double>(curves.size());
    return out;
}

RocCurve roc_macro(const LabelVector& y_true, const Matrix& proba) {
    const auto counts = y_true.class_counts();
    std::vector<std::size_t> classes;
    for (std::size_t c = 0; c < proba.cols(); ++c) {
        if (c >= counts.size() || counts[c] == 0)
            throw Error("roc_macro: class '" + (c < y_true.class_names.size() ? y_true.class_names[c] : std::to_string(c)) +
                        "' is absent from the true labels");
        classes.push_back(c);
    }
    return roc_macro(y_true, proba, classes);
}

RocCurve roc_micro(const LabelVector& y_true, const Matrix& proba) {
    if (proba.rows() != y_true.size()) throw Error("roc: probability rows differ from label count");
    std::vector<double> scores;
    std::vector<std::uint8_t> positive;
    scores.reserve(proba.rows() * proba.cols());
    positive.reserve(proba.rows() * proba.cols());
    for (std::size_t i = 0; i < proba.rows(); ++i)
        for (std::size_t k = 0; k < proba.cols(); ++k) {
            scores.push_back(proba(i, k));
            positive.push_back(y_true.ids[i] == static_cast<int>(k) ? 1 : 0);
        }
    return roc_from_scores(scores, positive, "micro");
}

EvaluationReport evaluate(const LabelVector& y_true, const LabelVector& y_pred, const Matrix& proba) {
    EvaluationReport r;
    r.confusion = confusion(y_true, y_pred);
    r.per_class = per_class_metrics(r.confusion);
    r.macro = aggregate(r.per_class, Averaging::macro);
    r.weighted = aggregate(r.per_class, Averaging::weighted);
    r.accuracy = accuracy(y_true, y_pred);

    const auto counts = y_true.class_counts();
    std::vector<std::size_t> rocable;
    for (std::size_t c = 0; c < counts.size(); ++c)
        if (counts[c] > 0 && counts[c] < y_true.size()) rocable.push_back(c);
    for (const auto c : rocable) r.class_roc.push_back(roc_ovr(y_true, proba, c));
    if (!rocable.empty()) r.macro_roc = roc_macro(y_true, proba, rocable);
    if (rocable.size() >= 1 && proba.cols() >= 2) r.micro_roc = roc_micro(y_true, proba);
    return r;
}

}  // namespace iotsentry
