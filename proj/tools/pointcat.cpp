// Command-line driver: train / eval / gradcheck / ablate / bench.
//
// Exit codes: 0 success, 1 configuration or input error, 2 numeric abort,
// 3 failed correctness check.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pointcat/checkpoint.hpp"
#include "pointcat/config.hpp"
#include "pointcat/data.hpp"
#include "pointcat/gradcheck.hpp"
#include "pointcat/metrics.hpp"
#include "pointcat/model.hpp"
#include "pointcat/ops.hpp"
#include "pointcat/train.hpp"

namespace {

using namespace pointcat;

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// Remaining tokens of the form "--section.key value" become config overrides.
std::vector<std::pair<std::string, std::string>> collect_overrides(
    const std::vector<std::string>& extras) {
    std::vector<std::pair<std::string, std::string>> overrides;
    // CLI11 hands extras back in reverse order of appearance.
    std::vector<std::string> tokens(extras.rbegin(), extras.rend());
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        const std::string& tok = tokens[i];
        if (tok.rfind("--", 0) != 0 || tok.find('.') == std::string::npos)
            throw config_error("unrecognized argument '" + tok +
                               "' (expected --section.key value)");
        const std::size_t eq = tok.find('=');
        if (eq != std::string::npos) {
            overrides.push_back({tok.substr(2, eq - 2), tok.substr(eq + 1)});
        } else {
            if (i + 1 >= tokens.size())
                throw config_error("override '" + tok + "' is missing a value");
            overrides.push_back({tok.substr(2), tokens[++i]});
        }
    }
    return overrides;
}

struct built_data {
    dataset train;
    dataset test;
};

// Synthetic source: the training set holds data.per_class samples per class;
// the test set holds round(3*per_class*(1-f)/f) further samples (disjoint
// per-sample streams), spread over classes by largest remainder. With the
// defaults (per_class=100, f=0.75) that is 300 train / 100 test.
built_data build_synthetic(const run_config& cfg) {
    const std::int64_t per_class = cfg.data.per_class;
    const double f = cfg.data.train_fraction;
    if (!(f > 0.0 && f < 1.0))
        throw config_error("data.train_fraction must be in (0,1), got " + fmt(f));
    const std::int64_t test_total =
        std::llround(3.0 * static_cast<double>(per_class) * (1.0 - f) / f);
    std::int64_t test_base = test_total / 3;
    std::int64_t test_extra = test_total - 3 * test_base;  // first classes get one more

    dataset all = synth_shapes(per_class + test_base + (test_extra > 0 ? 1 : 0),
                               cfg.data.n_points, cfg.data.seed);
    const std::int64_t gen_per_class = all.size() / 3;

    built_data out;
    out.train.class_names = out.test.class_names = all.class_names;
    out.train.split = "train";
    out.test.split = "test";
    for (int c = 0; c < 3; ++c) {
        const std::int64_t test_c = test_base + (c < test_extra ? 1 : 0);
        for (std::int64_t s = 0; s < per_class + test_c; ++s) {
            auto& sample = all.samples[static_cast<std::size_t>(c * gen_per_class + s)];
            (s < per_class ? out.train : out.test).samples.push_back(std::move(sample));
        }
    }
    return out;
}

built_data build_data(const run_config& cfg) {
    if (cfg.data.source == "synthetic") return build_synthetic(cfg);
    auto [train, test] = load_manifest(cfg.data.manifest, cfg.data.n_points, cfg.data.seed);
    if (test.samples.empty()) {
        std::vector<std::string> warnings;
        auto split = split_dataset(train, cfg.data.train_fraction, cfg.data.seed, &warnings);
        for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
        return {std::move(split.first), std::move(split.second)};
    }
    return {std::move(train), std::move(test)};
}

// Fills model.num_classes from the dataset when left at 0.
void resolve_classes(run_config& cfg, const built_data& data) {
    int max_label = 0;
    for (const auto& ds : {&data.train, &data.test})
        for (const auto& s : ds->samples)
            if (s.label.has_value()) max_label = std::max(max_label, *s.label);
    const std::int64_t needed =
        std::max<std::int64_t>(static_cast<std::int64_t>(data.train.class_names.size()),
                               max_label + 1);
    if (cfg.model.num_classes == 0) {
        cfg.model.num_classes = needed;
    } else if (cfg.model.num_classes < needed) {
        throw config_error("model.num_classes=" + std::to_string(cfg.model.num_classes) +
                           " but the dataset has labels up to " + std::to_string(needed - 1));
    }
}

void write_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw config_error("cannot write " + path.string());
    out << text;
}

std::string metrics_csv(const train_history& history) {
    std::string csv = "epoch,loss,oa,macc\n";
    for (const auto& e : history.epochs)
        csv += std::to_string(e.epoch) + "," + fmt(e.loss) + "," + fmt(e.oa) + "," + fmt(e.macc) +
               "\n";
    return csv;
}

int run_train(const std::string& config_path,
              const std::vector<std::pair<std::string, std::string>>& overrides) {
    run_config cfg = load_run_config(config_path, overrides);
    built_data data = build_data(cfg);
    resolve_classes(cfg, data);
    cfg.model.validate();

    const std::filesystem::path out_dir = cfg.output.dir;
    std::filesystem::create_directories(out_dir);
    write_file(out_dir / "resolved_config.json", resolved_config_json(cfg));

    model m = build_classifier(cfg.model);
    std::cout << "training: " << data.train.size() << " train / " << data.test.size()
              << " test samples, " << m.parameter_count() << " parameters\n";

    train_history history = train_classifier(m, data.train, data.test, cfg.to_train_config());
    for (const auto& e : history.epochs)
        std::cout << "epoch " << e.epoch << ": loss=" << fmt(e.loss) << " oa=" << fmt(e.oa)
                  << " macc=" << fmt(e.macc) << "\n";

    write_file(out_dir / "metrics.csv", metrics_csv(history));
    save_checkpoint((out_dir / "final.ckpt").string(), m.parameters());
    std::cout << "wrote " << (out_dir / "metrics.csv").string() << ", "
              << (out_dir / "final.ckpt").string() << ", "
              << (out_dir / "resolved_config.json").string() << "\n";
    return 0;
}

int run_eval(const std::string& ckpt_path, const std::string& config_path,
             const std::vector<std::pair<std::string, std::string>>& overrides) {
    run_config cfg = load_run_config(config_path, overrides);
    built_data data = build_data(cfg);
    resolve_classes(cfg, data);
    cfg.model.validate();

    model m = build_classifier(cfg.model);
    load_checkpoint_into(ckpt_path, m.parameters());

    class_metrics cm = evaluate_classifier(m, data.test, cfg.train.jobs);
    for (const auto& w : cm.warnings) std::cerr << "warning: " << w << "\n";
    std::cout << "oa=" << fmt(cm.oa) << "\n";
    std::cout << "macc=" << fmt(cm.macc) << "\n";
    for (std::size_t c = 0; c < cm.per_class_acc.size(); ++c) {
        const std::string name = c < data.test.class_names.size() ? data.test.class_names[c]
                                                                  : "class" + std::to_string(c);
        if (cm.per_class_total[c] > 0)
            std::cout << "acc." << name << "=" << fmt(cm.per_class_acc[c]) << "\n";
    }

    const std::filesystem::path out_dir = cfg.output.dir;
    std::filesystem::create_directories(out_dir);
    const std::filesystem::path csv_path = out_dir / "eval.csv";
    const bool fresh = !std::filesystem::exists(csv_path);
    std::ofstream csv(csv_path, std::ios::app | std::ios::binary);
    if (!csv) throw config_error("cannot write " + csv_path.string());
    if (fresh) csv << "oa,macc\n";
    csv << fmt(cm.oa) << "," << fmt(cm.macc) << "\n";
    return 0;
}

int run_gradcheck(const std::string& config_path, bool inject_bug,
                  const std::vector<std::pair<std::string, std::string>>& overrides) {
    model_config mc;
    mc.n_input = 32;
    mc.d0 = 8;
    mc.d_ratio = 2;
    mc.k = 8;
    mc.stages = 2;
    mc.heads = 2;
    mc.layers = 1;
    mc.num_classes = 3;
    std::uint64_t data_seed = 42;
    if (!config_path.empty()) {
        run_config cfg = load_run_config(config_path, overrides);
        mc = cfg.model;
        if (mc.num_classes == 0) mc.num_classes = 3;
        data_seed = cfg.data.seed;
    }
    mc.validate();
    model m = build_classifier(mc);

    // Check at a generic point. Freshly built models start with biases and
    // group-shift vectors at exactly zero, which parks every group's
    // self-neighbor row (relative offset identically zero) on relu kinks and
    // max-pool tie boundaries -- the loss is not differentiable there, so
    // finite differences would disagree with any valid subgradient.
    for (parameter* p : m.parameters()) {
        rng_stream jiggle(data_seed, "gradcheck/jiggle/" + p->name);
        for (double& v : p->value.raw_values()) v += jiggle.uniform(-0.05, 0.05);
    }

    rng_stream rng(data_seed, "gradcheck/input");
    point_cloud cloud;
    cloud.coords.resize(static_cast<std::size_t>(mc.n_input));
    for (auto& p : cloud.coords)
        for (int a = 0; a < 3; ++a) p[a] = rng.normal();
    const std::vector<int> labels{1};

    auto forward = [&]() -> tensor {
        tensor loss = cross_entropy_mean(forward_classify(m, cloud), labels);
        if (inject_bug) {
            // Deliberately wrong gradient: a term that depends on a parameter
            // but enters the graph as a constant. Exercises the checker.
            double leak = 0.0;
            for (double v : m.embed_w.value.values()) leak += v;
            loss = add_const(loss, 0.01 * leak);
        }
        return loss;
    };

    grad_check_options opts;
    opts.seed = data_seed;
    grad_check_report report = finite_diff_check(forward, m.parameters(), opts);

    for (const auto& p : report.per_param)
        std::cout << "param " << p.name << ": coords=" << p.coords_checked
                  << " max_rel_err=" << fmt(p.max_rel_err) << "\n";
    std::cout << "total_coords=" << report.total_coords << "\n";
    std::cout << "max_rel_err=" << fmt(report.max_rel_err) << "\n";
    std::cout << "worst_param=" << report.worst_param << "\n";
    if (!report.passed(opts.tolerance)) {
        std::cerr << "check failed: max_rel_err " << fmt(report.max_rel_err) << " > tolerance "
                  << fmt(opts.tolerance) << " at " << report.worst_param << "["
                  << report.worst_flat_index << "] (analytic " << fmt(report.analytic_at_worst)
                  << ", numeric " << fmt(report.numeric_at_worst) << ")\n";
        return 3;
    }
    std::cout << "gradient check passed (tolerance " << fmt(opts.tolerance) << ")\n";
    return 0;
}

struct ablate_row {
    std::string key;
    double accuracy = 0.0;
    std::uint64_t macs = 0;
    std::uint64_t params = 0;
};

ablate_row ablate_one(const std::string& key, run_config cfg) {
    built_data data = build_data(cfg);
    resolve_classes(cfg, data);
    cfg.model.validate();
    model m = build_classifier(cfg.model);
    train_classifier(m, data.train, data.test, cfg.to_train_config());
    class_metrics cm = evaluate_classifier(m, data.test, cfg.train.jobs);
    cost_report costs = count_costs(
        m, cfg.model.msa_baseline ? attention_kind::self_baseline : attention_kind::cross);
    return {key, cm.oa, costs.total_macs, costs.param_count};
}

int run_ablate(const std::string& config_path, const std::string& sweep,
               const std::vector<std::pair<std::string, std::string>>& overrides) {
    if (sweep != "grouping" && sweep != "fusion" && sweep != "attention")
        throw config_error("unknown sweep '" + sweep + "' (grouping|fusion|attention)");
    run_config base = load_run_config(config_path, overrides);

    std::string header;
    std::vector<ablate_row> rows;
    if (sweep == "grouping") {
        header = "d,k,accuracy,macs,params";
        for (std::int64_t d : {2, 4}) {
            for (std::int64_t k : {8, 16, 32}) {
                run_config cfg = base;
                cfg.model.d_ratio = d;
                cfg.model.k = k;
                rows.push_back(ablate_one(std::to_string(d) + "," + std::to_string(k), cfg));
            }
        }
    } else if (sweep == "fusion") {
        header = "fusion,accuracy,macs,params";
        for (fusion_mode mode : {fusion_mode::all_features, fusion_mode::part_features,
                                 fusion_mode::all_tokens, fusion_mode::part_tokens}) {
            run_config cfg = base;
            cfg.model.fusion = mode;
            rows.push_back(ablate_one(fusion_mode_name(mode), cfg));
        }
    } else {
        header = "attention,accuracy,macs,params";
        for (bool msa : {false, true}) {
            run_config cfg = base;
            cfg.model.msa_baseline = msa;
            rows.push_back(ablate_one(msa ? "msa" : "ca", cfg));
        }
    }

    std::string csv = header + "\n";
    for (const auto& r : rows)
        csv += r.key + "," + fmt(r.accuracy) + "," + std::to_string(r.macs) + "," +
               std::to_string(r.params) + "\n";
    std::cout << csv;

    const std::filesystem::path out_dir = base.output.dir;
    std::filesystem::create_directories(out_dir);
    write_file(out_dir / ("ablate_" + sweep + ".csv"), csv);
    return 0;
}

int run_bench(const std::string& out_path) {
    std::string csv = "n,k,kernel,nanos\n";
    auto time_ns = [](const std::function<void()>& fn) {
        fn();  // warm-up
        std::int64_t best = -1;
        for (int rep = 0; rep < 5; ++rep) {
            const auto t0 = std::chrono::steady_clock::now();
            fn();
            const auto t1 = std::chrono::steady_clock::now();
            const auto ns =
                std::chrono::duration_cast<std::chrono::nanoseconds>(t1 - t0).count();
            if (best < 0 || ns < best) best = ns;
        }
        return best;
    };

    for (std::int64_t n : {256, 1024, 4096}) {
        rng_stream rng(0, "bench", static_cast<std::uint64_t>(n));
        std::vector<point3> pts(static_cast<std::size_t>(n));
        for (auto& p : pts)
            for (int a = 0; a < 3; ++a) p[a] = rng.normal();
        const std::int64_t n_centers = n / 4;

        const std::int64_t fps_ns =
            time_ns([&] { farthest_point_sample(pts, n_centers); });
        csv += std::to_string(n) + "," + std::to_string(n_centers) + ",fps," +
               std::to_string(fps_ns) + "\n";

        const std::vector<std::int64_t> centers = farthest_point_sample(pts, n_centers);
        for (std::int64_t k : {8, 16, 32}) {
            const std::int64_t knn_ns = time_ns([&] { knn_search(pts, centers, k); });
            csv += std::to_string(n) + "," + std::to_string(k) + ",knn," + std::to_string(knn_ns) +
                   "\n";
        }
    }
    std::cout << csv;
    if (!out_path.empty()) write_file(out_path, csv);
    return 0;
}

int dispatch(const std::function<int()>& fn) {
    try {
        return fn();
    } catch (const check_error& e) {
        std::cerr << "check failed: " << e.what() << "\n";
        return 3;
    } catch (const numeric_error& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return 2;
    } catch (const config_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const parse_error& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"dual-branch cross-attention point cloud trainer"};
    app.require_subcommand(1);

    std::string config_path, ckpt_path, out_dir, sweep, bench_out;
    bool inject_bug = false;

    CLI::App* train_cmd = app.add_subcommand("train", "train a classifier from a JSON config");
    train_cmd->add_option("config", config_path, "JSON config file")->required();
    train_cmd->add_option("--out", out_dir, "output directory (overrides output.dir)");
    train_cmd->allow_extras();

    CLI::App* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint on the test split");
    eval_cmd->add_option("checkpoint", ckpt_path, "checkpoint file")->required();
    eval_cmd->add_option("config", config_path, "JSON config file")->required();
    eval_cmd->add_option("--out", out_dir, "output directory (overrides output.dir)");
    eval_cmd->allow_extras();

    CLI::App* grad_cmd = app.add_subcommand("gradcheck", "finite-difference gradient check");
    grad_cmd->add_option("config", config_path, "JSON config (optional; tiny default otherwise)");
    grad_cmd->add_flag("--inject-bug", inject_bug,
                       "deliberately corrupt one gradient (checker self-test)");
    grad_cmd->allow_extras();

    CLI::App* ablate_cmd = app.add_subcommand("ablate", "run an ablation sweep");
    ablate_cmd->add_option("config", config_path, "JSON config file")->required();
    ablate_cmd->add_option("--sweep", sweep, "grouping | fusion | attention")->required();
    ablate_cmd->add_option("--out", out_dir, "output directory (overrides output.dir)");
    ablate_cmd->allow_extras();

    CLI::App* bench_cmd = app.add_subcommand("bench", "time the FPS/KNN kernels");
    bench_cmd->add_option("--out", bench_out, "also write the CSV here");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        app.exit(e);
        return 1;
    }

    return dispatch([&]() -> int {
        auto overrides_of = [&](CLI::App* cmd) {
            auto overrides = collect_overrides(cmd->remaining());
            if (!out_dir.empty()) overrides.push_back({"output.dir", out_dir});
            return overrides;
        };
        if (train_cmd->parsed()) return run_train(config_path, overrides_of(train_cmd));
        if (eval_cmd->parsed()) return run_eval(ckpt_path, config_path, overrides_of(eval_cmd));
        if (grad_cmd->parsed())
            return run_gradcheck(config_path, inject_bug, overrides_of(grad_cmd));
        if (ablate_cmd->parsed()) return run_ablate(config_path, sweep, overrides_of(ablate_cmd));
        if (bench_cmd->parsed()) return run_bench(bench_out);
        return 1;
    });
}
