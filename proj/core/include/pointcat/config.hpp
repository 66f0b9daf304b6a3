#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pointcat/model.hpp"
#include "pointcat/train.hpp"

namespace pointcat {

// Full run configuration: sections model / train / data / output. Unknown
// keys are rejected; omitted keys take the defaults below. train.seed doubles
// as the model-init and data seed unless those are given explicitly.
struct run_config {
    model_config model;

    struct train_section {
        std::int64_t epochs = 50;
        double lr = 1e-3;
        std::int64_t batch = 16;
        std::uint64_t seed = 42;
        bool augment = true;
        double max_dropout = 0.875;
        double target_oa = -1.0;
        int jobs = 1;
    } train;

    struct data_section {
        std::string source = "synthetic";  // "synthetic" | "manifest"
        std::string manifest;              // required when source == "manifest"
        std::int64_t n_points = 0;         // 0 -> model.n_input
        std::int64_t per_class = 100;      // synthetic only
        double train_fraction = 0.75;      // synthetic without explicit split
        std::uint64_t seed = 42;
    } data;

    struct output_section {
        std::string dir = "out";
    } output;

    train_config to_train_config() const;
};

// Parses JSON text. Applies defaults, propagates train.seed, and validates
// key names and value types; config_error messages name the offending key.
run_config parse_run_config(const std::string& json_text);

run_config load_run_config(const std::string& path);

// Applies dotted-path overrides like {"model.k","16"} or {"train.lr","0.01"}
// on the JSON level before parsing, so override values face the same
// validation as file values.
run_config load_run_config(const std::string& path,
                           const std::vector<std::pair<std::string, std::string>>& overrides);

// The fully resolved configuration (all defaults filled in) as stable,
// indented JSON -- identical text for identical configs.
std::string resolved_config_json(const run_config& cfg);

}  // namespace pointcat
