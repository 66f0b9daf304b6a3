#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pointcat/data.hpp"
#include "pointcat/model.hpp"

namespace pointcat {

struct class_metrics {
    double oa = 0.0;    // correct / total
    double macc = 0.0;  // mean of per-class accuracies over non-empty classes
    std::vector<double> per_class_acc;           // NaN for empty classes
    std::vector<std::int64_t> per_class_total;
    std::vector<std::int64_t> per_class_correct;
    std::vector<std::string> warnings;           // one per empty class
};

// Argmax class of the fused logits (ties: lowest index).
int predict_class(const model& m, const point_cloud& cloud);

// Computes metrics from already-made predictions (the hand-checkable core).
class_metrics score_classification(const std::vector<int>& predictions,
                                   const std::vector<int>& labels, std::int64_t num_classes);

// Evaluates the model over the dataset without gradients. jobs > 1 fans the
// forward passes out across threads (parameters are frozen).
class_metrics evaluate_classifier(const model& m, const dataset& ds, int jobs = 1);

struct seg_metrics {
    double inst_miou = 0.0;  // mean over shapes of the shape's mean part IoU
    double cls_miou = 0.0;   // mean over categories of the category's mean shape IoU
    std::vector<double> per_part_iou;      // dataset-level TP/(TP+FP+FN); NaN if part absent
    std::vector<double> per_category_iou;  // NaN for categories with no shapes
    std::vector<double> per_shape_iou;
    std::vector<std::string> warnings;
};

// Per-shape IoU from prediction/label vectors: IoU over the parts owned by
// `category` (per part_category), counting an absent part (union zero) as 1.
double shape_iou(const std::vector<int>& pred, const std::vector<int>& truth,
                 const std::vector<int>& part_category, int category);

seg_metrics score_segmentation(const std::vector<std::vector<int>>& predictions,
                               const dataset& ds);

// Per-point argmax restricted to the parts of each sample's category (when
// the dataset carries a part->category map).
std::vector<int> predict_parts(const model& m, const point_cloud& cloud,
                               const std::vector<int>& part_category);

seg_metrics evaluate_segmenter(const model& m, const dataset& ds, int jobs = 1);

}  // namespace pointcat
