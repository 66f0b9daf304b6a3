#include "pointcat/train.hpp"

#include <cmath>
#include <numeric>

#include "pointcat/ops.hpp"
#include "pointcat/optim.hpp"

namespace pointcat {

namespace {

// Forward + loss for one sample. Auxiliary per-branch losses (0.3 weight each)
// are added when the model was configured with aux_branch_loss and the fusion
// mode exposes per-branch logits.
tensor sample_loss(const model& m, const point_cloud& cloud, int label) {
    const std::vector<int> labels{label};
    if (m.cfg.aux_branch_loss &&
        (m.cfg.fusion == fusion_mode::part_tokens || m.cfg.fusion == fusion_mode::part_features)) {
        classify_outputs out = forward_classify_detail(m, cloud);
        tensor loss = cross_entropy_mean(out.fused, labels);
        tensor aux = add(cross_entropy_mean(out.branch_large, labels),
                         cross_entropy_mean(out.branch_small, labels));
        return add(loss, scale(aux, 0.3));
    }
    return cross_entropy_mean(forward_classify(m, cloud), labels);
}

// Re-runs the failing sample with per-op finite checks on so the abort names
// the first non-finite intermediate rather than just "loss is NaN".
[[noreturn]] void diagnose_nonfinite(const model& m, const point_cloud& cloud, int label,
                                     std::int64_t epoch, std::int64_t index) {
    const std::string where =
        " (epoch " + std::to_string(epoch) + ", sample " + std::to_string(index) + ")";
    try {
        set_finite_checks_enabled(true);
        tensor loss = sample_loss(m, cloud, label);
        backward(loss);
        set_finite_checks_enabled(false);
    } catch (const numeric_error& e) {
        set_finite_checks_enabled(false);
        throw numeric_error("training aborted: non-finite loss" + where + "; first bad op: " +
                            e.what());
    } catch (...) {
        set_finite_checks_enabled(false);
        throw;
    }
    throw numeric_error("training aborted: non-finite loss" + where);
}

}  // namespace

train_history train_classifier(model& m, const dataset& train_ds, const dataset& test_ds,
                               const train_config& cfg) {
    if (m.segmentation) throw contract_error("train_classifier: segmentation model");
    if (train_ds.samples.empty()) throw contract_error("train_classifier: empty training set");
    if (cfg.epochs < 1) throw config_error("epochs must be >= 1");
    if (cfg.batch < 1) throw config_error("batch must be >= 1");

    const std::int64_t n = train_ds.size();
    for (std::int64_t i = 0; i < n; ++i) {
        const auto& s = train_ds.samples[static_cast<std::size_t>(i)];
        if (!s.label.has_value() || *s.label < 0 || *s.label >= m.cfg.num_classes)
            throw contract_error("train_classifier: sample " + std::to_string(i) +
                                 " has a missing or out-of-range label");
    }

    adam opt(m.parameters(), cfg.lr);
    train_history history;

    std::vector<std::int64_t> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);

    for (std::int64_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
        {
            rng_stream shuffle_rng(cfg.seed, "shuffle", static_cast<std::uint64_t>(epoch));
            shuffle_rng.shuffle(order);
        }
        double loss_total = 0.0;
        for (std::int64_t start = 0; start < n; start += cfg.batch) {
            const std::int64_t count = std::min(cfg.batch, n - start);
            for (std::int64_t b = 0; b < count; ++b) {
                const std::int64_t idx = order[static_cast<std::size_t>(start + b)];
                const point_cloud& orig = train_ds.samples[static_cast<std::size_t>(idx)];
                point_cloud cloud = orig;
                if (cfg.augment) {
                    rng_stream aug_rng(cfg.seed, "augment/" + std::to_string(epoch),
                                       static_cast<std::uint64_t>(idx));
                    cloud = augment_cloud(orig, aug_rng, cfg.aug);
                }
                const int label = *cloud.label;
                tensor loss = sample_loss(m, cloud, label);
                const double loss_v = loss.scalar();
                if (!std::isfinite(loss_v)) diagnose_nonfinite(m, cloud, label, epoch, idx);
                loss_total += loss_v;
                backward(scale(loss, 1.0 / static_cast<double>(count)));
            }
            opt.step();
        }

        epoch_stats stats;
        stats.epoch = epoch;
        stats.loss = loss_total / static_cast<double>(n);
        if (cfg.evaluate_each_epoch && !test_ds.samples.empty()) {
            class_metrics cm = evaluate_classifier(m, test_ds, cfg.jobs);
            stats.oa = cm.oa;
            stats.macc = cm.macc;
        }
        history.epochs.push_back(stats);
        if (cfg.target_oa > 0.0 && stats.oa >= cfg.target_oa) break;
    }
    return history;
}

}  // namespace pointcat
