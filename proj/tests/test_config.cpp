// Configuration tests: defaults, seed propagation, unknown-key and type
// errors that name the offending key, dotted CLI overrides, and the stability
// of the resolved-config serialization.
#include <filesystem>
#include <fstream>
#include <string>

#include "doctest.h"
#include "pointcat/config.hpp"
#include "pointcat/errors.hpp"

using namespace pointcat;

namespace {

std::string config_error_text(const std::string& json_text) {
    try {
        parse_run_config(json_text);
    } catch (const config_error& e) {
        return e.what();
    }
    return "no error";
}

}  // namespace

TEST_CASE("an empty object yields the documented defaults") {
    run_config cfg = parse_run_config("{}");
    CHECK(cfg.model.n_input == 1024);
    CHECK(cfg.model.d0 == 32);
    CHECK(cfg.model.k == 32);
    CHECK(cfg.model.stages == 4);
    CHECK(cfg.model.heads == 4);
    CHECK(cfg.model.layers == 2);
    CHECK(cfg.model.fusion == fusion_mode::part_tokens);
    CHECK(cfg.model.msa_baseline == false);
    CHECK(cfg.train.epochs == 50);
    CHECK(cfg.train.lr == 1e-3);
    CHECK(cfg.train.batch == 16);
    CHECK(cfg.train.seed == 42);
    CHECK(cfg.train.augment == true);
    CHECK(cfg.train.max_dropout == 0.875);
    CHECK(cfg.data.source == "synthetic");
    CHECK(cfg.data.per_class == 100);
    CHECK(cfg.data.train_fraction == 0.75);
    CHECK(cfg.data.n_points == 1024);  // 0 resolves to model.n_input
    CHECK(cfg.output.dir == "out");
}

TEST_CASE("train.seed propagates to model and data seeds unless overridden") {
    run_config cfg = parse_run_config(R"({"train": {"seed": 7}})");
    CHECK(cfg.train.seed == 7);
    CHECK(cfg.model.seed == 7);
    CHECK(cfg.data.seed == 7);

    run_config split = parse_run_config(
        R"({"train": {"seed": 7}, "model": {"seed": 8}, "data": {"seed": 9}})");
    CHECK(split.train.seed == 7);
    CHECK(split.model.seed == 8);
    CHECK(split.data.seed == 9);
}

TEST_CASE("unknown keys are rejected by name") {
    CHECK(config_error_text(R"({"train": {"xyz": 1}})").find("train.xyz") !=
          std::string::npos);
    CHECK(config_error_text(R"({"model": {"n_inputs": 64}})").find("model.n_inputs") !=
          std::string::npos);
    CHECK(config_error_text(R"({"extra": {}})").find("extra") != std::string::npos);
}

TEST_CASE("wrong JSON types are rejected naming key and actual type") {
    CHECK(config_error_text(R"({"train": {"epochs": "ten"}})").find("train.epochs") !=
          std::string::npos);
    CHECK(config_error_text(R"({"train": {"epochs": 2.5}})").find("integer") !=
          std::string::npos);
    CHECK(config_error_text(R"({"train": {"augment": 1}})").find("boolean") !=
          std::string::npos);
    CHECK(config_error_text(R"({"model": {"fusion": 3}})").find("string") !=
          std::string::npos);
    CHECK(config_error_text(R"({"train": {"seed": -1}})").find("non-negative") !=
          std::string::npos);
    CHECK(config_error_text(R"({"train": "fast"})").find("'train'") != std::string::npos);
    CHECK(config_error_text(R"([1,2])").find("object") != std::string::npos);
    CHECK(config_error_text("{not json").find("invalid JSON") != std::string::npos);
}

TEST_CASE("enum-valued keys validate their vocabulary") {
    CHECK(config_error_text(R"({"model": {"fusion": "both"}})").find("unknown fusion mode") !=
          std::string::npos);
    CHECK(config_error_text(R"({"model": {"sigma": "global"}})").find("per_sample") !=
          std::string::npos);
    CHECK(config_error_text(R"({"data": {"source": "database"}})").find("data.source") !=
          std::string::npos);
    CHECK(config_error_text(R"({"data": {"source": "manifest"}})")
              .find("data.manifest is not set") != std::string::npos);
    CHECK(parse_run_config(R"({"model": {"fusion": "all_features"}})").model.fusion ==
          fusion_mode::all_features);
    CHECK(parse_run_config(R"({"model": {"sigma": "per_group"}})").model.sigma ==
          sigma_scope::per_group);
}

TEST_CASE("data.n_points must agree with model.n_input") {
    run_config ok = parse_run_config(
        R"({"model": {"n_input": 256}, "data": {"n_points": 256}})");
    CHECK(ok.data.n_points == 256);
    const std::string msg =
        config_error_text(R"({"model": {"n_input": 256}, "data": {"n_points": 128}})");
    CHECK(msg.find("data.n_points") != std::string::npos);
    CHECK(msg.find("128") != std::string::npos);
    CHECK(msg.find("256") != std::string::npos);
}

TEST_CASE("load_run_config applies dotted overrides before validation") {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "pointcat_config_test";
    fs::create_directories(dir);
    const fs::path path = dir / "run.json";
    std::ofstream(path) << R"({"model": {"k": 8}, "train": {"epochs": 3}})";

    run_config cfg = load_run_config(path.string(),
                                     {{"model.k", "16"},
                                      {"train.lr", "0.01"},
                                      {"model.fusion", "all_tokens"},
                                      {"model.aux_branch_loss", "true"},
                                      {"output.dir", "/tmp/somewhere"}});
    CHECK(cfg.model.k == 16);  // override wins over the file value
    CHECK(cfg.train.lr == 0.01);
    CHECK(cfg.train.epochs == 3);  // file value untouched
    CHECK(cfg.model.fusion == fusion_mode::all_tokens);
    CHECK(cfg.model.aux_branch_loss == true);
    CHECK(cfg.output.dir == "/tmp/somewhere");

    // Overridden values face the same validation as file values.
    CHECK_THROWS_AS(load_run_config(path.string(), {{"model.kk", "1"}}), config_error);
    CHECK_THROWS_AS(load_run_config(path.string(), {{"train.epochs", "2.5"}}), config_error);
    CHECK_THROWS_AS(load_run_config(path.string(), {{"nodots", "1"}}), config_error);
    CHECK_THROWS_AS(load_run_config(path.string(), {{"a.b.c", "1"}}), config_error);
    CHECK_THROWS_AS(load_run_config((dir / "absent.json").string(), {}), config_error);

    fs::remove_all(dir);
}

TEST_CASE("resolved_config_json is stable, complete, and reparseable") {
    run_config cfg = parse_run_config(
        R"({"model": {"n_input": 64, "d0": 8, "k": 8, "stages": 2, "heads": 2,
            "num_classes": 3}, "train": {"seed": 5}})");
    const std::string a = resolved_config_json(cfg);
    const std::string b = resolved_config_json(cfg);
    CHECK(a == b);

    // Round-trip: parsing the resolved text reproduces the same resolution.
    run_config back = parse_run_config(a);
    CHECK(resolved_config_json(back) == a);
    CHECK(back.model.n_input == 64);
    CHECK(back.model.seed == 5);

    // All four sections and the filled-in defaults appear in the text.
    for (const char* needle :
         {"\"model\"", "\"train\"", "\"data\"", "\"output\"", "\"fusion\"", "\"part_tokens\"",
          "\"per_sample\"", "\"max_dropout\"", "\"train_fraction\""})
        CHECK(a.find(needle) != std::string::npos);
}

TEST_CASE("to_train_config carries the training section faithfully") {
    run_config cfg = parse_run_config(
        R"({"train": {"epochs": 9, "lr": 0.25, "batch": 4, "seed": 3, "augment": false,
            "max_dropout": 0.5, "target_oa": 0.9, "jobs": 2}})");
    train_config tc = cfg.to_train_config();
    CHECK(tc.epochs == 9);
    CHECK(tc.lr == 0.25);
    CHECK(tc.batch == 4);
    CHECK(tc.seed == 3);
    CHECK(tc.augment == false);
    CHECK(tc.aug.max_dropout == 0.5);
    CHECK(tc.target_oa == 0.9);
    CHECK(tc.jobs == 2);
    // The scale/shift ranges are fixed policy, not configuration.
    CHECK(tc.aug.scale_lo == 0.8);
    CHECK(tc.aug.scale_hi == 1.2);
    CHECK(tc.aug.shift_range == 0.2);
}
