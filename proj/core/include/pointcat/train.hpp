#pragma once

#include <cstdint>
#include <vector>

#include "pointcat/data.hpp"
#include "pointcat/metrics.hpp"
#include "pointcat/model.hpp"

namespace pointcat {

struct train_config {
    std::int64_t epochs = 50;
    double lr = 1e-3;
    std::int64_t batch = 16;
    std::uint64_t seed = 42;
    bool augment = true;
    augment_config aug;
    double target_oa = -1.0;  // stop once test OA reaches this (disabled if <= 0)
    bool evaluate_each_epoch = true;
    int jobs = 1;  // evaluation fan-out only; optimization is sequential
};

struct epoch_stats {
    std::int64_t epoch = 0;  // 1-based
    double loss = 0.0;       // mean per-sample cross-entropy over the epoch
    double oa = 0.0;
    double macc = 0.0;
};

struct train_history {
    std::vector<epoch_stats> epochs;
};

// Adam training loop over shuffled minibatches. All randomness (shuffling,
// augmentation draws) comes from named streams of cfg.seed, so two runs with
// the same inputs are bit-identical. A non-finite loss aborts with a
// numeric_error naming the first non-finite intermediate op.
train_history train_classifier(model& m, const dataset& train_ds, const dataset& test_ds,
                               const train_config& cfg);

}  // namespace pointcat
