#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "iotsentry/data.hpp"
#include "iotsentry/matrix.hpp"

namespace iotsentry {

/// counts(i, j) = rows with true class i predicted as j.
struct ConfusionMatrix {
    std::vector<std::string> class_names;
    std::vector<std::size_t> counts;  // K x K, row-major

    std::size_t classes() const { return class_names.size(); }
    std::size_t operator()(std::size_t t, std::size_t p) const { return counts[t * classes() + p]; }
    std::size_t total() const;
    std::size_t trace() const;
    /// Row-normalised (true-class conditional); absent classes stay zero.
    Matrix normalized() const;
};

ConfusionMatrix confusion(const LabelVector& y_true, const LabelVector& y_pred);

/// A ratio with the zero-division convention: value 0 and `undefined` set
/// when the denominator is empty.
struct Ratio {
    double value = 0.0;
    bool undefined = false;
};

Ratio precision(std::size_t tp, std::size_t fp);
Ratio recall(std::size_t tp, std::size_t fn);
/// Harmonic mean; 0 when both inputs are 0.
double f1(double precision, double recall);
/// Fraction of rows where prediction equals truth. Throws on empty input.
double accuracy(const LabelVector& y_true, const LabelVector& y_pred);

struct ClassMetrics {
    std::string name;
    std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
    Ratio precision;
    Ratio recall;
    double f1 = 0.0;

    std::size_t support() const { return tp + fn; }
};

/// One-vs-rest counts and scores for every class of the matrix.
std::vector<ClassMetrics> per_class_metrics(const ConfusionMatrix& cm);

enum class Averaging { macro, weighted };

struct Aggregate {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

/// Macro: unweighted mean over classes that occur in truth or predictions.
/// Weighted: mean weighted by true-class support. F1 is always the average
/// of per-class F1 values, not the F1 of the averaged P and R.
Aggregate aggregate(std::span<const ClassMetrics> per_class, Averaging scheme);

struct RocPoint {
    double fpr;
    double tpr;
};

struct RocCurve {
    std::string tag;
    std::vector<RocPoint> points;  // (0,0) ... (1,1), non-decreasing
    double auc = 0.0;
};

/// Trapezoidal area under a polyline.
double trapezoid_area(std::span<const RocPoint> points);

/// One-vs-rest ROC for `positive_class`, one point per distinct score.
RocCurve roc_ovr(const LabelVector& y_true, const Matrix& proba, std::size_t positive_class);

/// Same from raw scores and a positive mask.
RocCurve roc_from_scores(std::span<const double> scores, std::span<const std::uint8_t> positive, std::string tag);

inline constexpr std::size_t kMacroRocGridPoints = 512;

/// Macro average: the origin, then per-class TPR interpolated on a shared
/// 512-point FPR grid; auc is the mean of the per-class AUCs. Every class must occur in y_true.
RocCurve roc_macro(const LabelVector& y_true, const Matrix& proba);
/// Macro average restricted to `classes`.
RocCurve roc_macro(const LabelVector& y_true, const Matrix& proba, std::span<const std::size_t> classes);
/// Micro average over all (row, class) pairs.
RocCurve roc_micro(const LabelVector& y_true, const Matrix& proba);

/// Everything reported for one model on one labelled set.
struct EvaluationReport {
    ConfusionMatrix confusion;
    std::vector<ClassMetrics> per_class;
    Aggregate macro;
    Aggregate weighted;
    double accuracy = 0.0;
    std::vector<RocCurve> class_roc;  // classes present in y_true with at least one negative
    RocCurve macro_roc;
    RocCurve micro_roc;
};

EvaluationReport evaluate(const LabelVector& y_true, const LabelVector& y_pred, const Matrix& proba);

}  // namespace iotsentry
