#include "pointcat/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>

namespace pointcat {

namespace {

// Runs fn(i) for i in [0, n) across `jobs` threads. Exceptions propagate.
void parallel_for(std::int64_t n, int jobs, const std::function<void(std::int64_t)>& fn) {
    jobs = std::max(1, std::min<int>(jobs, static_cast<int>(n)));
    if (jobs == 1) {
        for (std::int64_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(jobs));
    for (int t = 0; t < jobs; ++t) {
        pool.emplace_back([&, t] {
            try {
                for (std::int64_t i = t; i < n; i += jobs) fn(i);
            } catch (...) {
                errors[static_cast<std::size_t>(t)] = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

int argmax_row(const std::vector<double>& vals, std::int64_t begin, std::int64_t count) {
    int best = 0;
    double best_v = -std::numeric_limits<double>::infinity();
    for (std::int64_t j = 0; j < count; ++j) {
        const double v = vals[static_cast<std::size_t>(begin + j)];
        if (v > best_v) {
            best_v = v;
            best = static_cast<int>(j);
        }
    }
    return best;
}

}  // namespace

int predict_class(const model& m, const point_cloud& cloud) {
    no_grad_guard ng;
    tensor logits = forward_classify(m, cloud);
    return argmax_row(logits.values(), 0, logits.cols());
}

class_metrics score_classification(const std::vector<int>& predictions,
                                   const std::vector<int>& labels, std::int64_t num_classes) {
    if (predictions.size() != labels.size())
        throw contract_error("score_classification: predictions/labels size mismatch");
    if (labels.empty()) throw contract_error("score_classification: empty evaluation set");

    class_metrics cm;
    cm.per_class_total.assign(static_cast<std::size_t>(num_classes), 0);
    cm.per_class_correct.assign(static_cast<std::size_t>(num_classes), 0);
    std::int64_t correct = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const int y = labels[i];
        if (y < 0 || y >= num_classes)
            throw index_error("score_classification: label " + std::to_string(y) + " outside [0," +
                              std::to_string(num_classes) + ")");
        ++cm.per_class_total[static_cast<std::size_t>(y)];
        if (predictions[i] == y) {
            ++correct;
            ++cm.per_class_correct[static_cast<std::size_t>(y)];
        }
    }
    cm.oa = static_cast<double>(correct) / static_cast<double>(labels.size());

    double acc_sum = 0.0;
    std::int64_t non_empty = 0;
    cm.per_class_acc.assign(static_cast<std::size_t>(num_classes),
                            std::numeric_limits<double>::quiet_NaN());
    for (std::int64_t c = 0; c < num_classes; ++c) {
        const auto kc = static_cast<std::size_t>(c);
        if (cm.per_class_total[kc] == 0) {
            cm.warnings.push_back("class " + std::to_string(c) +
                                  " has no samples; excluded from mAcc");
            continue;
        }
        cm.per_class_acc[kc] = static_cast<double>(cm.per_class_correct[kc]) /
                               static_cast<double>(cm.per_class_total[kc]);
        acc_sum += cm.per_class_acc[kc];
        ++non_empty;
    }
    cm.macc = non_empty > 0 ? acc_sum / static_cast<double>(non_empty) : 0.0;
    return cm;
}

class_metrics evaluate_classifier(const model& m, const dataset& ds, int jobs) {
    std::vector<int> predictions(static_cast<std::size_t>(ds.size()));
    std::vector<int> labels(static_cast<std::size_t>(ds.size()));
    parallel_for(ds.size(), jobs, [&](std::int64_t i) {
        const auto& s = ds.samples[static_cast<std::size_t>(i)];
        if (!s.label.has_value())
            throw contract_error("evaluate_classifier: sample " + std::to_string(i) + " has no label");
        labels[static_cast<std::size_t>(i)] = *s.label;
        predictions[static_cast<std::size_t>(i)] = predict_class(m, s);
    });
    const std::int64_t num_classes =
        ds.class_names.empty()
            ? (*std::max_element(labels.begin(), labels.end()) + 1)
            : static_cast<std::int64_t>(ds.class_names.size());
    return score_classification(predictions, labels, num_classes);
}

double shape_iou(const std::vector<int>& pred, const std::vector<int>& truth,
                 const std::vector<int>& part_category, int category) {
    if (pred.size() != truth.size()) throw contract_error("shape_iou: size mismatch");
    double iou_sum = 0.0;
    std::int64_t n_parts_of_cat = 0;
    for (std::size_t part = 0; part < part_category.size(); ++part) {
        if (part_category[part] != category) continue;
        ++n_parts_of_cat;
        std::int64_t inter = 0, uni = 0;
        for (std::size_t i = 0; i < truth.size(); ++i) {
            const bool in_p = pred[i] == static_cast<int>(part);
            const bool in_t = truth[i] == static_cast<int>(part);
            inter += in_p && in_t;
            uni += in_p || in_t;
        }
        iou_sum += uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
    }
    if (n_parts_of_cat == 0) throw contract_error("shape_iou: category owns no parts");
    return iou_sum / static_cast<double>(n_parts_of_cat);
}

seg_metrics score_segmentation(const std::vector<std::vector<int>>& predictions,
                               const dataset& ds) {
    if (predictions.size() != ds.samples.size())
        throw contract_error("score_segmentation: predictions/samples size mismatch");
    if (ds.samples.empty()) throw contract_error("score_segmentation: empty evaluation set");
    if (ds.part_category.empty())
        throw contract_error("score_segmentation: dataset has no part vocabulary");

    const std::size_t n_parts = ds.part_category.size();
    const std::size_t n_cats = ds.class_names.size();
    seg_metrics sm;
    std::vector<std::int64_t> tp(n_parts, 0), fp(n_parts, 0), fn(n_parts, 0);
    std::vector<double> cat_iou_sum(n_cats, 0.0);
    std::vector<std::int64_t> cat_count(n_cats, 0);

    for (std::size_t s = 0; s < ds.samples.size(); ++s) {
        const auto& sample = ds.samples[s];
        if (!sample.category.has_value())
            throw contract_error("score_segmentation: sample " + std::to_string(s) +
                                 " has no category");
        if (sample.point_labels.size() != sample.coords.size())
            throw contract_error("score_segmentation: sample " + std::to_string(s) +
                                 " has no per-point labels");
        const int cat = *sample.category;
        const auto& pred = predictions[s];
        const auto& truth = sample.point_labels;
        const double iou = shape_iou(pred, truth, ds.part_category, cat);
        sm.per_shape_iou.push_back(iou);
        cat_iou_sum[static_cast<std::size_t>(cat)] += iou;
        ++cat_count[static_cast<std::size_t>(cat)];
        for (std::size_t i = 0; i < truth.size(); ++i) {
            if (pred[i] == truth[i]) {
                ++tp[static_cast<std::size_t>(truth[i])];
            } else {
                ++fp[static_cast<std::size_t>(pred[i])];
                ++fn[static_cast<std::size_t>(truth[i])];
            }
        }
    }

    double inst_sum = 0.0;
    for (double v : sm.per_shape_iou) inst_sum += v;
    sm.inst_miou = inst_sum / static_cast<double>(sm.per_shape_iou.size());

    sm.per_part_iou.assign(n_parts, std::numeric_limits<double>::quiet_NaN());
    for (std::size_t p = 0; p < n_parts; ++p) {
        const std::int64_t uni = tp[p] + fp[p] + fn[p];
        if (uni == 0) {
            sm.warnings.push_back("part '" + ds.part_names[p] + "' absent from evaluation set");
            continue;
        }
        sm.per_part_iou[p] = static_cast<double>(tp[p]) / static_cast<double>(uni);
    }

    sm.per_category_iou.assign(n_cats, std::numeric_limits<double>::quiet_NaN());
    double cat_sum = 0.0;
    std::int64_t cats_present = 0;
    for (std::size_t c = 0; c < n_cats; ++c) {
        if (cat_count[c] == 0) {
            sm.warnings.push_back("category '" + ds.class_names[c] + "' absent from evaluation set");
            continue;
        }
        sm.per_category_iou[c] = cat_iou_sum[c] / static_cast<double>(cat_count[c]);
        cat_sum += sm.per_category_iou[c];
        ++cats_present;
    }
    sm.cls_miou = cats_present > 0 ? cat_sum / static_cast<double>(cats_present) : 0.0;
    return sm;
}

std::vector<int> predict_parts(const model& m, const point_cloud& cloud,
                               const std::vector<int>& part_category) {
    no_grad_guard ng;
    tensor logits = forward_part_segment(m, cloud);
    const std::int64_t n = logits.rows(), p = logits.cols();
    std::vector<int> pred(static_cast<std::size_t>(n));
    const bool restrict = !part_category.empty() && cloud.category.has_value();
    for (std::int64_t i = 0; i < n; ++i) {
        int best = -1;
        double best_v = -std::numeric_limits<double>::infinity();
        for (std::int64_t j = 0; j < p; ++j) {
            if (restrict && part_category[static_cast<std::size_t>(j)] != *cloud.category) continue;
            const double v = logits.values()[static_cast<std::size_t>(i * p + j)];
            if (v > best_v) {
                best_v = v;
                best = static_cast<int>(j);
            }
        }
        if (best < 0) best = argmax_row(logits.values(), i * p, p);
        pred[static_cast<std::size_t>(i)] = best;
    }
    return pred;
}

seg_metrics evaluate_segmenter(const model& m, const dataset& ds, int jobs) {
    std::vector<std::vector<int>> predictions(static_cast<std::size_t>(ds.size()));
    parallel_for(ds.size(), jobs, [&](std::int64_t i) {
        predictions[static_cast<std::size_t>(i)] =
            predict_parts(m, ds.samples[static_cast<std::size_t>(i)], ds.part_category);
    });
    return score_segmentation(predictions, ds);
}

}  // namespace pointcat
