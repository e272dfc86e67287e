#pragma once

#include <string>
#include <vector>

#include "iotsentry/metrics.hpp"

namespace iotsentry {

/// ROC plot: faint per-class curves, the macro curve in bold, the micro
/// curve dashed, and the chance diagonal.
std::string roc_svg(const std::string& title, const std::vector<RocCurve>& per_class, const RocCurve& macro,
                    const RocCurve& micro);

/// Heat map of the row-normalised confusion matrix.
std::string confusion_svg(const std::string& title, const ConfusionMatrix& cm);

}  // namespace iotsentry
