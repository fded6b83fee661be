#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "wsi/model.hpp"

namespace wsi {

struct ScoredClip {
    std::string clip_id;
    ClassLabel true_label = ClassLabel::backchannel;
    // backchannel, failed_interruption, interruption, laughter
    std::array<float, 4> scores{};
};

struct RocPoint {
    double fpr = 0.0;
    double tpr = 0.0;
    double threshold = 0.0;  // predict positive when score >= threshold; +inf for the origin
};

// One-vs-rest ROC on the positive class's score. The first point is (0, 0)
// at threshold +inf, then one point per distinct score in descending order,
// ending at (1, 1). Tied scores move together.
// Throws MetricUndefinedError without at least one positive and one negative.
std::vector<RocPoint> roc_curve(std::span<const ScoredClip> clips, ClassLabel positive);

// Trapezoidal area under a curve from roc_curve.
double roc_auc(std::span<const RocPoint> curve);

// Largest TPR among thresholds whose FPR does not exceed the budget; no
// interpolation between points.
double tpr_at_fpr(std::span<const ScoredClip> clips, ClassLabel positive, double fpr_budget = 0.01);

}  // namespace wsi
