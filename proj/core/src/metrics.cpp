#include "vehnet/metrics.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

namespace vehnet {

ConfusionMatrix& ConfusionMatrix::merge(const ConfusionMatrix& other) {
    if (classes != other.classes) throw std::invalid_argument("confusion merge: class lists differ");
    for (std::size_t i = 0; i < counts.size(); ++i) counts[i] += other.counts[i];
    ignored += other.ignored;
    return *this;
}

BinaryMask boundary_ignore_mask(const LabelMap& ground_truth, int radius) {
    if (radius < 0) throw std::invalid_argument("boundary_ignore_mask: radius must be >= 0");
    const long H = static_cast<long>(ground_truth.height);
    const long W = static_cast<long>(ground_truth.width);
    BinaryMask out(ground_truth.height, ground_truth.width);
    if (radius == 0) return out;
    for (long y = 0; y < H; ++y) {
        for (long x = 0; x < W; ++x) {
            const std::uint8_t here = ground_truth.at(y, x);
            bool ignore = false;
            for (long dy = -radius; !ignore && dy <= radius; ++dy) {
                const long ny = y + dy;
                if (ny < 0 || ny >= H) continue;
                for (long dx = -radius; dx <= radius; ++dx) {
                    const long nx = x + dx;
                    if (nx < 0 || nx >= W) continue;
                    if (ground_truth.at(ny, nx) != here) {
                        ignore = true;
                        break;
                    }
                }
            }
            out.at(y, x) = ignore ? 1 : 0;
        }
    }
    return out;
}

ConfusionMatrix confusion(const LabelMap& pred, const LabelMap& ground_truth,
                          const std::vector<std::string>& class_list,
                          const std::vector<int>& ignore_classes, const BinaryMask* ignore_mask) {
    if (pred.height != ground_truth.height || pred.width != ground_truth.width) {
        throw std::invalid_argument("confusion: prediction and ground truth sizes differ");
    }
    if (ignore_mask &&
        (ignore_mask->height != pred.height || ignore_mask->width != pred.width)) {
        throw std::invalid_argument("confusion: ignore mask size differs");
    }
    const std::size_t K = class_list.size();
    std::vector<bool> skip(K, false);
    for (int c : ignore_classes) {
        if (c < 0 || static_cast<std::size_t>(c) >= K)
            throw std::invalid_argument("confusion: ignore class outside class list");
        skip[c] = true;
    }

    ConfusionMatrix cm(class_list);
    for (std::size_t i = 0; i < pred.labels.size(); ++i) {
        const std::uint8_t g = ground_truth.labels[i];
        const std::uint8_t p = pred.labels[i];
        if (g == LabelMap::kIgnore || (ignore_mask && ignore_mask->bits[i]) ||
            (g < K && skip[g])) {
            ++cm.ignored;
            continue;
        }
        if (g >= K || p >= K) {
            throw std::invalid_argument("confusion: label outside class list at pixel " +
                                        std::to_string(i));
        }
        ++cm.at(g, p);
    }
    return cm;
}

EvalReport derive_report(const ConfusionMatrix& cm) {
    const std::size_t K = cm.classes.size();
    const std::int64_t total = cm.total();
    if (total == 0) throw std::invalid_argument("derive_report: empty confusion matrix");

    EvalReport report;
    std::int64_t trace = 0;
    for (std::size_t k = 0; k < K; ++k) trace += cm.at(k, k);
    report.overall_accuracy = static_cast<double>(trace) / static_cast<double>(total);

    report.per_class.resize(K);
    double iou_sum = 0.0;
    std::size_t iou_classes = 0;
    for (std::size_t k = 0; k < K; ++k) {
        std::int64_t rowsum = 0, colsum = 0;
        for (std::size_t j = 0; j < K; ++j) {
            rowsum += cm.at(k, j);
            colsum += cm.at(j, k);
        }
        const std::int64_t tp = cm.at(k, k);
        ClassScore& score = report.per_class[k];
        score.present_in_gt = rowsum > 0;
        score.precision = colsum > 0 ? static_cast<double>(tp) / colsum : 0.0;
        score.recall = rowsum > 0 ? static_cast<double>(tp) / rowsum : 0.0;
        score.f1 = (score.precision + score.recall) > 0.0
                       ? 2.0 * score.precision * score.recall / (score.precision + score.recall)
                       : 0.0;
        const std::int64_t uni = rowsum + colsum - tp;
        score.iou = uni > 0 ? static_cast<double>(tp) / uni : 0.0;
        if (score.present_in_gt) {
            iou_sum += score.iou;
            ++iou_classes;
        }
    }
    report.mean_iou = iou_classes > 0 ? iou_sum / static_cast<double>(iou_classes) : 0.0;
    return report;
}

double instance_iou(const ObjectInstance& gt_instance,
                    const std::vector<ObjectInstance>& predictions) {
    std::set<std::pair<int, int>> gt_pixels;
    for (const PixelCoord& p : gt_instance.pixels) gt_pixels.emplace(p.y, p.x);

    std::set<std::pair<int, int>> pred_union;
    for (const ObjectInstance& pred : predictions) {
        bool overlaps = false;
        for (const PixelCoord& p : pred.pixels) {
            if (gt_pixels.count({p.y, p.x})) {
                overlaps = true;
                break;
            }
        }
        if (!overlaps) continue;
        for (const PixelCoord& p : pred.pixels) pred_union.emplace(p.y, p.x);
    }
    if (gt_pixels.empty() && pred_union.empty()) return 0.0;

    std::size_t inter = 0;
    for (const auto& p : pred_union) inter += gt_pixels.count(p);
    const std::size_t uni = gt_pixels.size() + pred_union.size() - inter;
    return uni > 0 ? static_cast<double>(inter) / static_cast<double>(uni) : 0.0;
}

}  // namespace vehnet
