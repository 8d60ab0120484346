#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "vehnet/image.hpp"
#include "vehnet/morphology.hpp"
#include "vehnet/objects.hpp"

namespace vehnet {

/// K x K counts, rows = ground truth, columns = prediction. Tile-level
/// matrices merge by elementwise addition.
struct ConfusionMatrix {
    std::vector<std::string> classes;
    std::vector<std::int64_t> counts;  // K * K
    std::int64_t ignored = 0;

    explicit ConfusionMatrix(std::vector<std::string> class_list = {})
        : classes(std::move(class_list)), counts(classes.size() * classes.size(), 0) {}

    std::int64_t& at(std::size_t gt, std::size_t pred) { return counts[gt * classes.size() + pred]; }
    std::int64_t at(std::size_t gt, std::size_t pred) const {
        return counts[gt * classes.size() + pred];
    }
    std::int64_t total() const {
        std::int64_t t = 0;
        for (std::int64_t c : counts) t += c;
        return t;
    }
    ConfusionMatrix& merge(const ConfusionMatrix& other);
};

struct ClassScore {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    double iou = 0.0;
    bool present_in_gt = false;
};

struct EvalReport {
    double overall_accuracy = 0.0;
    std::vector<ClassScore> per_class;
    double mean_iou = 0.0;  // over classes present in ground truth
};

/// A pixel is ignored iff any pixel within Chebyshev distance <= radius
/// carries a different ground-truth label. radius 0 ignores nothing.
BinaryMask boundary_ignore_mask(const LabelMap& ground_truth, int radius = 3);

/// Tallies pixels whose mask bit is clear and whose gt class is not listed in
/// ignore_classes; everything else lands in `ignored`. kIgnore ground-truth
/// pixels are always ignored.
ConfusionMatrix confusion(const LabelMap& pred, const LabelMap& ground_truth,
                          const std::vector<std::string>& class_list,
                          const std::vector<int>& ignore_classes = {},
                          const BinaryMask* ignore_mask = nullptr);

/// OA = trace/total; per class: precision, recall, F1 = 2PR/(P+R), and
/// IoU = tp / (rowsum + colsum - tp). Mean IoU averages over classes present
/// in the ground truth.
EvalReport derive_report(const ConfusionMatrix& cm);

/// Pixel IoU between one ground-truth instance and the union of predicted
/// instances that overlap it.
double instance_iou(const ObjectInstance& gt_instance,
                    const std::vector<ObjectInstance>& predictions);

}  // namespace vehnet
