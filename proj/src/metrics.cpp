#include "wsi/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "wsi/errors.hpp"

namespace wsi {

std::vector<RocPoint> roc_curve(std::span<const ScoredClip> clips, ClassLabel positive) {
    const auto cls = static_cast<std::size_t>(positive);
    std::vector<std::pair<float, bool>> scored;
    scored.reserve(clips.size());
    std::size_t positives = 0;
    for (const auto& clip : clips) {
        const float s = clip.scores[cls];
        if (!std::isfinite(s)) throw MetricUndefinedError("clip '" + clip.clip_id + "' has a non-finite score");
        const bool is_pos = clip.true_label == positive;
        positives += is_pos ? 1 : 0;
        scored.emplace_back(s, is_pos);
    }
    const std::size_t negatives = scored.size() - positives;
    if (positives == 0 || negatives == 0) {
        throw MetricUndefinedError("ROC needs at least one positive and one negative clip for '" +
                                   std::string(label_name(positive)) + "'");
    }
    std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) { return a.first > b.first; });

    std::vector<RocPoint> curve;
    curve.push_back({0.0, 0.0, std::numeric_limits<double>::infinity()});
    std::size_t tp = 0;
    std::size_t fp = 0;
    for (std::size_t i = 0; i < scored.size();) {
        const float threshold = scored[i].first;
        for (; i < scored.size() && scored[i].first == threshold; ++i) {
            if (scored[i].second) {
                ++tp;
            } else {
                ++fp;
            }
        }
        curve.push_back({static_cast<double>(fp) / static_cast<double>(negatives),
                         static_cast<double>(tp) / static_cast<double>(positives), static_cast<double>(threshold)});
    }
    return curve;
}

double roc_auc(std::span<const RocPoint> curve) {
    double area = 0.0;
    for (std::size_t i = 1; i < curve.size(); ++i) {
        area += (curve[i].fpr - curve[i - 1].fpr) * (curve[i].tpr + curve[i - 1].tpr) / 2.0;
    }
    return area;
}

double tpr_at_fpr(std::span<const ScoredClip> clips, ClassLabel positive, double fpr_budget) {
    double best = 0.0;
    for (const auto& p : roc_curve(clips, positive)) {
        if (p.fpr <= fpr_budget) best = std::max(best, p.tpr);
    }
    return best;
}

}  // namespace wsi
