// Release acceptance suite. Each numbered check below is one release
// criterion; the binary prints one PASS/FAIL line per criterion and exits
// with the number of failures. Checks that need an external process (the
// ablation harness, CLI determinism) spawn the installed binary via
// POINTCAT_BIN; everything else drives the library directly against
// independent straight-line reference implementations written in this file.
#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "pointcat/attention.hpp"
#include "pointcat/checkpoint.hpp"
#include "pointcat/data.hpp"
#include "pointcat/errors.hpp"
#include "pointcat/geometry.hpp"
#include "pointcat/gradcheck.hpp"
#include "pointcat/grouping.hpp"
#include "pointcat/metrics.hpp"
#include "pointcat/model.hpp"
#include "pointcat/ops.hpp"
#include "pointcat/rng.hpp"
#include "pointcat/train.hpp"

namespace fs = std::filesystem;
using namespace pointcat;

namespace {

struct result {
    bool ok = false;
    std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

bool bits_equal(const std::vector<double>& a, const std::vector<double>& b) {
    return a.size() == b.size() &&
           (a.empty() || std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0);
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::vector<std::string> lines_of(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line))
        if (!line.empty()) out.push_back(line);
    return out;
}

std::vector<std::string> csv_fields(const std::string& line) {
    std::vector<std::string> out;
    std::istringstream in(line);
    std::string f;
    while (std::getline(in, f, ',')) out.push_back(f);
    return out;
}

// --- scratch space + CLI spawning -------------------------------------------

fs::path scratch_root() {
    static fs::path root = [] {
        fs::path p = fs::temp_directory_path() /
                     ("pointcat_acceptance_" + std::to_string(::getpid()));
        fs::create_directories(p);
        return p;
    }();
    return root;
}

int run_cli(const std::string& args, std::string* out_text = nullptr,
            std::string* err_text = nullptr) {
    static int call = 0;
    const fs::path out = scratch_root() / ("cli_out_" + std::to_string(call) + ".txt");
    const fs::path err = scratch_root() / ("cli_err_" + std::to_string(call) + ".txt");
    ++call;
    const std::string cmd = std::string("\"") + POINTCAT_BIN + "\" " + args + " > \"" +
                            out.string() + "\" 2> \"" + err.string() + "\"";
    const int raw = std::system(cmd.c_str());
    if (out_text) *out_text = slurp(out);
    if (err_text) *err_text = slurp(err);
    return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
}

// Small run config shared by the CLI-driven checks (criteria 9 and 11).
fs::path write_tiny_config(const std::string& name, const fs::path& out_dir,
                           std::int64_t epochs) {
    const fs::path p = scratch_root() / name;
    std::ofstream(p) << "{\n"
                     << "  \"model\": {\"n_input\": 32, \"d0\": 4, \"k\": 8, \"stages\": 2,"
                     << " \"heads\": 2, \"layers\": 1},\n"
                     << "  \"train\": {\"epochs\": " << epochs
                     << ", \"batch\": 4, \"seed\": 42},\n"
                     << "  \"data\": {\"per_class\": 6},\n"
                     << "  \"output\": {\"dir\": \"" << out_dir.string() << "\"}\n"
                     << "}\n";
    return p;
}

// --- criterion 1: scale disclaimer ------------------------------------------

result criterion1() {
    return {true,
            "full-benchmark accuracy targets need large corpora and long training, which are"
            " out of scope here by design; the bar is the property and learning checks below"};
}

// --- criterion 2: end-to-end gradient check ----------------------------------

result criterion2() {
    const auto t0 = std::chrono::steady_clock::now();

    model_config mc;
    mc.n_input = 32;
    mc.d0 = 8;
    mc.d_ratio = 2;
    mc.k = 8;
    mc.stages = 2;
    mc.heads = 2;
    mc.layers = 1;
    mc.num_classes = 3;
    mc.seed = 42;
    mc.validate();
    model m = build_classifier(mc);

    // Fresh models start with biases and shift vectors at exactly zero, which
    // parks every group's self-neighbor row on relu kinks and max-pool ties;
    // finite differences are only meaningful at a generic point, so every
    // parameter is jiggled away from the boundary first.
    for (parameter* p : m.parameters()) {
        rng_stream jiggle(42, "acceptance/jiggle/" + p->name);
        for (double& v : p->value.raw_values()) v += jiggle.uniform(-0.05, 0.05);
    }

    rng_stream rng(42, "acceptance/gradcheck_input");
    point_cloud cloud;
    cloud.coords.resize(static_cast<std::size_t>(mc.n_input));
    for (auto& p : cloud.coords)
        for (int a = 0; a < 3; ++a) p[a] = rng.normal();
    const std::vector<int> labels{1};

    grad_check_options opts;  // h = 1e-5, tolerance = 1e-5
    opts.seed = 42;
    grad_check_report report = finite_diff_check(
        [&] { return cross_entropy_mean(forward_classify(m, cloud), labels); },
        m.parameters(), opts);

    const double secs = seconds_since(t0);
    const bool ok =
        report.passed(1e-5) && report.total_coords >= 500 && secs < 60.0;
    return {ok, "max_rel_err=" + fmt(report.max_rel_err) + " over " +
                    std::to_string(report.total_coords) + " coords (>=500) in " + fmt(secs) +
                    "s (<60s), tolerance 1e-5, worst param " + report.worst_param};
}

// --- criterion 3: permutation invariance / equivariance ----------------------

result criterion3() {
    model_config mc;
    mc.n_input = 64;
    mc.d0 = 4;
    mc.d_ratio = 2;
    mc.k = 8;
    mc.stages = 2;
    mc.heads = 2;
    mc.layers = 1;
    mc.num_classes = 3;
    mc.seed = 11;
    model cls = build_classifier(mc);

    model_config sc = mc;
    sc.n_categories = 3;
    sc.n_parts = 9;
    sc.label_embed_dim = 8;
    model seg = build_segmenter(sc);

    rng_stream rng(11, "acceptance/perm");
    int checked = 0;
    for (int trial = 0; trial < 100; ++trial) {
        point_cloud cloud;
        cloud.coords.resize(static_cast<std::size_t>(mc.n_input));
        for (auto& p : cloud.coords)
            for (int a = 0; a < 3; ++a) p[a] = rng.normal();
        cloud.category = trial % 3;

        const tensor base_logits = forward_classify(cls, cloud);
        const tensor base_parts = forward_part_segment(seg, cloud);

        for (int rep = 0; rep < 10; ++rep) {
            std::vector<std::int64_t> ord(static_cast<std::size_t>(mc.n_input));
            for (std::size_t i = 0; i < ord.size(); ++i) ord[i] = static_cast<std::int64_t>(i);
            rng.shuffle(ord);
            const point_cloud moved = apply_order(cloud, ord);

            const tensor logits = forward_classify(cls, moved);
            if (!bits_equal(logits.values(), base_logits.values()))
                return {false, "classification logits changed under a permutation (trial " +
                                   std::to_string(trial) + ")"};

            // Segmentation rows must track their points: row j of the permuted
            // run describes moved point j, which is base point ord[j].
            const tensor parts = forward_part_segment(seg, moved);
            for (std::int64_t j = 0; j < parts.rows(); ++j)
                for (std::int64_t c = 0; c < parts.cols(); ++c)
                    if (parts.at(j, c) != base_parts.at(ord[static_cast<std::size_t>(j)], c))
                        return {false, "segmentation logits not equivariant (trial " +
                                           std::to_string(trial) + ")"};
            ++checked;
        }
    }
    return {true, std::to_string(checked) +
                      " cloud-permutation pairs: classification logits bit-identical,"
                      " segmentation rows exactly equivariant"};
}

// --- criterion 4: grouped-offset normalization --------------------------------

result criterion4() {
    rng_stream rng(4, "acceptance/norm");
    const double eps = 1e-5;
    double worst_std_dev = 0.0;
    double worst_scale_dev = 0.0;

    for (int trial = 0; trial < 1000; ++trial) {
        const std::int64_t n_parent = 16 + static_cast<std::int64_t>(rng.uniform_index(17));
        const std::int64_t d = 4 + 2 * static_cast<std::int64_t>(rng.uniform_index(2));
        const double feature_scale = std::pow(10.0, rng.uniform(-1.5, 1.5));

        branch_features parent;
        parent.points.resize(static_cast<std::size_t>(n_parent));
        for (auto& p : parent.points)
            for (int a = 0; a < 3; ++a) p[a] = rng.normal();
        std::vector<double> feats(static_cast<std::size_t>(n_parent * d));
        for (double& v : feats) v = rng.normal() * feature_scale;
        parent.tokens = tensor::from_values({n_parent, d}, std::move(feats));

        const std::int64_t n_centers = 4 + static_cast<std::int64_t>(rng.uniform_index(5));
        const std::vector<std::int64_t> centers = farthest_point_sample(parent.points, n_centers);
        const neighbor_table nbrs = knn_search(parent.points, centers, 4);

        shift_params shift;
        shift.alpha = parameter{"alpha", tensor::full({d}, 1.0)};
        shift.beta = parameter{"beta", tensor::full({d}, 0.0)};

        const grouped_patch patch =
            group_normalize(parent, centers, nbrs, shift, sigma_scope::per_sample, eps);
        const double sigma = patch.sigma[0];
        if (sigma < 1e-2) continue;  // criterion conditions on sigma >= 1e-2

        // Population std of the pre-shift normalized block, the same statistic
        // the normalizer computes over the raw block.
        const std::vector<double>& nv = patch.normalized.values();
        double mean = 0.0;
        for (double v : nv) mean += v;
        mean /= static_cast<double>(nv.size());
        double var = 0.0;
        for (double v : nv) var += (v - mean) * (v - mean);
        var /= static_cast<double>(nv.size());
        const double got_std = std::sqrt(var);
        const double want_std = sigma / (sigma + eps);
        worst_std_dev = std::max(worst_std_dev, std::abs(got_std - want_std));
        if (std::abs(got_std - want_std) > 1e-3)
            return {false, "normalized std " + fmt(got_std) + " vs sigma/(sigma+eps) " +
                               fmt(want_std) + " differs by more than 1e-3 (trial " +
                               std::to_string(trial) + ")"};

        // Scaling the parent features x10 must not move the normalized block.
        branch_features scaled = parent;
        scaled.tokens = scale(parent.tokens, 10.0);
        const grouped_patch patch10 =
            group_normalize(scaled, centers, nbrs, shift, sigma_scope::per_sample, eps);
        const std::vector<double>& nv10 = patch10.normalized.values();
        for (std::size_t i = 0; i < nv.size(); ++i)
            worst_scale_dev = std::max(worst_scale_dev, std::abs(nv10[i] - nv[i]));
        if (worst_scale_dev > 1e-9)
            return {false, "x10 feature scaling moved the normalized block by " +
                               fmt(worst_scale_dev) + " (> 1e-9, trial " + std::to_string(trial) +
                               ")"};
    }
    return {true, "1000 stage inputs: |std - sigma/(sigma+eps)| <= " + fmt(worst_std_dev) +
                      " (<=1e-3), x10 scale shift <= " + fmt(worst_scale_dev) + " (<=1e-9)"};
}

// --- criterion 5: sampling and grouping vs brute force ------------------------

std::vector<std::int64_t> reference_fps(const std::vector<point3>& pts, std::int64_t n) {
    const std::int64_t total = static_cast<std::int64_t>(pts.size());
    std::int64_t seed = 0;
    for (std::int64_t i = 1; i < total; ++i)
        if (lex_less(pts[i], pts[seed])) seed = i;

    std::vector<std::int64_t> picked{seed};
    std::vector<char> taken(static_cast<std::size_t>(total), 0);
    taken[static_cast<std::size_t>(seed)] = 1;
    std::vector<double> min_d2(static_cast<std::size_t>(total));
    for (std::int64_t i = 0; i < total; ++i) min_d2[i] = dist2(pts[i], pts[seed]);

    while (static_cast<std::int64_t>(picked.size()) < n) {
        std::int64_t best = -1;
        for (std::int64_t i = 0; i < total; ++i) {
            if (taken[static_cast<std::size_t>(i)]) continue;
            if (best < 0 || min_d2[i] > min_d2[best] ||
                (min_d2[i] == min_d2[best] && lex_less(pts[i], pts[best])))
                best = i;  // ascending scan keeps the lowest index on full ties
        }
        picked.push_back(best);
        taken[static_cast<std::size_t>(best)] = 1;
        for (std::int64_t i = 0; i < total; ++i)
            min_d2[i] = std::min(min_d2[i], dist2(pts[i], pts[best]));
    }
    return picked;
}

std::vector<std::int64_t> reference_knn_row(const std::vector<point3>& pts, const point3& q,
                                            std::int64_t k) {
    std::vector<std::int64_t> order(pts.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<std::int64_t>(i);
    std::sort(order.begin(), order.end(), [&](std::int64_t a, std::int64_t b) {
        const double da = dist2(pts[a], q), db = dist2(pts[b], q);
        if (da != db) return da < db;
        if (lex_less(pts[a], pts[b])) return true;
        if (lex_less(pts[b], pts[a])) return false;
        return a < b;
    });
    order.resize(static_cast<std::size_t>(k));
    return order;
}

result criterion5() {
    rng_stream rng(5, "acceptance/oracle");
    for (int trial = 0; trial < 200; ++trial) {
        const std::int64_t total = 4 + static_cast<std::int64_t>(rng.uniform_index(125));
        std::vector<point3> pts(static_cast<std::size_t>(total));
        const bool quantize = rng.uniform() < 0.3;  // force distance/coordinate ties
        for (auto& p : pts)
            for (int a = 0; a < 3; ++a) {
                double v = rng.normal();
                if (quantize) v = std::round(v * 2.0) / 2.0;
                p[a] = v;
            }

        const std::int64_t n =
            1 + static_cast<std::int64_t>(rng.uniform_index(
                    static_cast<std::uint64_t>(std::min<std::int64_t>(32, total))));
        if (farthest_point_sample(pts, n) != reference_fps(pts, n))
            return {false, "farthest point sampling diverged from the brute-force reference"
                           " (trial " +
                               std::to_string(trial) + ")"};

        const std::int64_t k =
            1 + static_cast<std::int64_t>(rng.uniform_index(
                    static_cast<std::uint64_t>(std::min<std::int64_t>(16, total))));
        const std::vector<std::int64_t> centers = reference_fps(pts, std::min<std::int64_t>(n, 8));
        const neighbor_table got = knn_search(pts, centers, k);
        for (std::size_t row = 0; row < centers.size(); ++row) {
            const auto want = reference_knn_row(pts, pts[centers[row]], k);
            for (std::int64_t col = 0; col < k; ++col)
                if (got.at(static_cast<std::int64_t>(row), col) != want[col])
                    return {false, "knn diverged from the brute-force reference (trial " +
                                       std::to_string(trial) + ")"};
        }
    }
    return {true, "200 random instances (N<=128, n<=32, k<=16, with tie injection): FPS and"
                  " KNN match the in-test brute-force references index-for-index"};
}

// --- criterion 6: attention algebra -------------------------------------------

// Straight-line replica of one cross-attention direction on plain vectors.
struct attention_oracle {
    std::vector<double> cls_out;                     // final [c_self]
    std::vector<std::vector<double>> head_values;    // per head: m x dk, row-major
    std::vector<std::vector<double>> head_mix;       // per head: dk (weighted value sum)
};

std::vector<double> oracle_linear(const std::vector<double>& x, const tensor& w, const tensor& b) {
    const std::int64_t in = w.rows(), out = w.cols();
    std::vector<double> y(static_cast<std::size_t>(out), 0.0);
    for (std::int64_t o = 0; o < out; ++o) {
        double acc = 0.0;
        for (std::int64_t i = 0; i < in; ++i) acc += x[static_cast<std::size_t>(i)] * w.at(i, o);
        y[static_cast<std::size_t>(o)] = acc + b.values()[static_cast<std::size_t>(o)];
    }
    return y;
}

std::vector<double> oracle_layer_norm(const std::vector<double>& x, const tensor& gamma,
                                      const tensor& beta, double eps) {
    const std::size_t c = x.size();
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= static_cast<double>(c);
    double var = 0.0;
    for (double v : x) var += (v - mean) * (v - mean);
    var /= static_cast<double>(c);
    const double inv = 1.0 / std::sqrt(var + eps);
    std::vector<double> y(c);
    for (std::size_t j = 0; j < c; ++j)
        y[j] = gamma.values()[j] * ((x[j] - mean) * inv) + beta.values()[j];
    return y;
}

attention_oracle run_attention_oracle(const std::vector<double>& cls,
                                      const std::vector<std::vector<double>>& patch,
                                      const cross_attention_params& p, double eps) {
    const std::int64_t c_other = p.wq.value.rows();
    const std::int64_t heads = p.heads;
    const std::int64_t dk = c_other / heads;

    const std::vector<double> q_tok = oracle_layer_norm(
        oracle_linear(cls, p.proj_in.w.value, p.proj_in.b.value), p.ln_in.gamma.value,
        p.ln_in.beta.value, eps);

    std::vector<std::vector<double>> seq{q_tok};
    for (const auto& row : patch) seq.push_back(row);
    const std::int64_t m = static_cast<std::int64_t>(seq.size());

    auto project = [&](const std::vector<double>& x, const tensor& w) {
        std::vector<double> y(static_cast<std::size_t>(c_other), 0.0);
        for (std::int64_t o = 0; o < c_other; ++o)
            for (std::int64_t i = 0; i < c_other; ++i)
                y[static_cast<std::size_t>(o)] += x[static_cast<std::size_t>(i)] * w.at(i, o);
        return y;
    };

    const std::vector<double> q_all = project(q_tok, p.wq.value);
    std::vector<std::vector<double>> k_all, v_all;
    for (const auto& row : seq) {
        k_all.push_back(project(row, p.wk.value));
        v_all.push_back(project(row, p.wv.value));
    }

    attention_oracle out;
    std::vector<double> attn;
    for (std::int64_t h = 0; h < heads; ++h) {
        std::vector<double> scores(static_cast<std::size_t>(m), 0.0);
        for (std::int64_t j = 0; j < m; ++j) {
            double dot = 0.0;
            for (std::int64_t t = 0; t < dk; ++t)
                dot += q_all[static_cast<std::size_t>(h * dk + t)] *
                       k_all[static_cast<std::size_t>(j)][static_cast<std::size_t>(h * dk + t)];
            scores[static_cast<std::size_t>(j)] = dot / std::sqrt(static_cast<double>(dk));
        }
        const double mx = *std::max_element(scores.begin(), scores.end());
        double z = 0.0;
        std::vector<double> w(static_cast<std::size_t>(m));
        for (std::int64_t j = 0; j < m; ++j) {
            w[static_cast<std::size_t>(j)] = std::exp(scores[static_cast<std::size_t>(j)] - mx);
            z += w[static_cast<std::size_t>(j)];
        }
        for (double& wv : w) wv /= z;

        std::vector<double> values(static_cast<std::size_t>(m * dk));
        std::vector<double> mix(static_cast<std::size_t>(dk), 0.0);
        for (std::int64_t j = 0; j < m; ++j)
            for (std::int64_t t = 0; t < dk; ++t) {
                const double v =
                    v_all[static_cast<std::size_t>(j)][static_cast<std::size_t>(h * dk + t)];
                values[static_cast<std::size_t>(j * dk + t)] = v;
                mix[static_cast<std::size_t>(t)] += w[static_cast<std::size_t>(j)] * v;
            }
        out.head_values.push_back(std::move(values));
        out.head_mix.push_back(mix);
        attn.insert(attn.end(), mix.begin(), mix.end());
    }

    if (p.use_out_proj) attn = oracle_linear(attn, p.out_proj.w.value, p.out_proj.b.value);
    std::vector<double> tok(attn.size());
    for (std::size_t i = 0; i < tok.size(); ++i) tok[i] = attn[i] + q_tok[i];
    out.cls_out = oracle_layer_norm(oracle_linear(tok, p.proj_out.w.value, p.proj_out.b.value),
                                    p.ln_out.gamma.value, p.ln_out.beta.value, eps);
    return out;
}

result criterion6() {
    rng_stream rng(6, "acceptance/attention");
    const double eps = 1e-5;
    double worst_sum = 0.0, worst_oracle = 0.0;

    auto random_matrix = [&](const std::string& name, std::int64_t r, std::int64_t c) {
        std::vector<double> v(static_cast<std::size_t>(r * c));
        for (double& x : v) x = rng.normal() * 0.5;
        return parameter{name, tensor::from_values({r, c}, std::move(v))};
    };
    auto random_vec = [&](const std::string& name, std::int64_t c, double center) {
        std::vector<double> v(static_cast<std::size_t>(c));
        for (double& x : v) x = center + rng.normal() * 0.2;
        return parameter{name, tensor::from_values({c}, std::move(v))};
    };

    for (int trial = 0; trial < 1000; ++trial) {
        const std::int64_t c_self = 4 + 2 * static_cast<std::int64_t>(rng.uniform_index(2));
        const std::int64_t c_other = (rng.uniform_index(2) == 0) ? 4 : 8;
        const std::int64_t heads = (rng.uniform_index(2) == 0) ? 2 : (c_other == 8 ? 4 : 1);
        const std::int64_t n_other = 1 + static_cast<std::int64_t>(rng.uniform_index(6));
        const std::int64_t dk = c_other / heads;

        cross_attention_params p;
        p.heads = heads;
        p.use_out_proj = (trial % 2 == 0);
        p.proj_in = {random_matrix("win", c_self, c_other), random_vec("bin", c_other, 0.0)};
        p.ln_in = {random_vec("g1", c_other, 1.0), random_vec("b1", c_other, 0.0)};
        p.wq = random_matrix("wq", c_other, c_other);
        p.wk = random_matrix("wk", c_other, c_other);
        p.wv = random_matrix("wv", c_other, c_other);
        p.out_proj = {random_matrix("wo", c_other, c_other), random_vec("bo", c_other, 0.0)};
        p.proj_out = {random_matrix("wb", c_other, c_self), random_vec("bb", c_self, 0.0)};
        p.ln_out = {random_vec("g2", c_self, 1.0), random_vec("b2", c_self, 0.0)};

        std::vector<double> cls(static_cast<std::size_t>(c_self));
        for (double& v : cls) v = rng.normal();

        // Pre-sorting the patch rows makes the implementation's canonical
        // value order the identity, so its per-head weight rows line up with
        // the oracle's row indexing.
        std::vector<std::vector<double>> patch(static_cast<std::size_t>(n_other),
                                               std::vector<double>(static_cast<std::size_t>(c_other)));
        for (auto& row : patch)
            for (double& v : row) v = rng.normal();
        std::sort(patch.begin(), patch.end());

        branch_tokens self_tok;
        self_tok.cls = tensor::from_values({1, c_self}, std::vector<double>(cls));
        branch_tokens other_tok;
        std::vector<double> flat;
        for (const auto& row : patch) flat.insert(flat.end(), row.begin(), row.end());
        other_tok.patch = tensor::from_values({n_other, c_other}, std::move(flat));

        std::vector<tensor> weights;
        const branch_tokens got = cross_attention_step(self_tok, other_tok, p, eps, &weights);
        const attention_oracle want = run_attention_oracle(cls, patch, p, eps);

        if (static_cast<std::int64_t>(weights.size()) != heads)
            return {false, "expected one weight row per head"};
        const std::int64_t m = n_other + 1;
        for (std::int64_t h = 0; h < heads; ++h) {
            const std::vector<double>& w = weights[static_cast<std::size_t>(h)].values();
            double sum = 0.0;
            for (std::int64_t j = 0; j < m; ++j) {
                if (w[static_cast<std::size_t>(j)] < 0.0)
                    return {false, "negative attention weight"};
                sum += w[static_cast<std::size_t>(j)];
            }
            worst_sum = std::max(worst_sum, std::abs(sum - 1.0));
            if (std::abs(sum - 1.0) > 1e-12)
                return {false, "head weight row sums to " + fmt(sum) + ", off by more than 1e-12"};

            // Convex-hull bound: the implementation's weights applied to the
            // value rows must stay inside each value column's range.
            const std::vector<double>& vals = want.head_values[static_cast<std::size_t>(h)];
            for (std::int64_t t = 0; t < dk; ++t) {
                double lo = vals[static_cast<std::size_t>(t)], hi = lo, mixed = 0.0;
                for (std::int64_t j = 0; j < m; ++j) {
                    const double v = vals[static_cast<std::size_t>(j * dk + t)];
                    lo = std::min(lo, v);
                    hi = std::max(hi, v);
                    mixed += w[static_cast<std::size_t>(j)] * v;
                }
                if (mixed < lo - 1e-12 || mixed > hi + 1e-12)
                    return {false, "attention output escaped the convex hull of its values"};
            }
        }

        const std::vector<double>& got_cls = got.cls.values();
        for (std::int64_t i = 0; i < c_self; ++i)
            worst_oracle = std::max(
                worst_oracle, std::abs(got_cls[static_cast<std::size_t>(i)] -
                                       want.cls_out[static_cast<std::size_t>(i)]));
        if (worst_oracle > 1e-12)
            return {false, "single-query output differs from the straight-line oracle by " +
                               fmt(worst_oracle) + " (trial " + std::to_string(trial) + ")"};
    }
    return {true, "1000 microcases: row sums off by <= " + fmt(worst_sum) +
                      ", oracle max deviation " + fmt(worst_oracle) +
                      " (both <= 1e-12), convex-hull bound never violated"};
}

// --- criterion 7: cost accounting ---------------------------------------------

result criterion7() {
    model_config cfg;  // the default full-size configuration
    cfg.num_classes = 40;
    cfg.seed = 42;
    cfg.validate();
    model m = build_classifier(cfg);

    const cost_report ca = count_costs(m, attention_kind::cross);
    const cost_report msa = count_costs(m, attention_kind::self_baseline);

    // Single-query attention scores cost exactly 1/n_tokens of all-queries
    // attention over the same sequence, per direction and per layer.
    const std::uint64_t small_tokens = static_cast<std::uint64_t>(cfg.small_points()) + 1;
    const std::uint64_t large_tokens = static_cast<std::uint64_t>(cfg.large_points()) + 1;
    for (std::int64_t l = 0; l < cfg.layers; ++l) {
        const std::string layer = "layer" + std::to_string(l);
        const std::uint64_t ca_s = ca.macs_matching(layer + "/attend_small/scores");
        const std::uint64_t msa_s = msa.macs_matching(layer + "/attend_small/scores");
        const std::uint64_t ca_l = ca.macs_matching(layer + "/attend_large/scores");
        const std::uint64_t msa_l = msa.macs_matching(layer + "/attend_large/scores");
        if (ca_s == 0 || ca_l == 0) return {false, layer + ": missing score scopes"};
        if (ca_s * small_tokens != msa_s)
            return {false, layer + " small direction: score ratio is not exactly 1/" +
                               std::to_string(small_tokens)};
        if (ca_l * large_tokens != msa_l)
            return {false, layer + " large direction: score ratio is not exactly 1/" +
                               std::to_string(large_tokens)};
        if (ca.macs_matching(layer) >= msa.macs_matching(layer))
            return {false, layer + ": cross-attention layer MACs not strictly below baseline"};
    }

    if (ca.param_count >= msa.param_count)
        return {false, "cross-attention parameter count not strictly below the baseline"};

    return {true, "score-MAC ratios exactly 1/" + std::to_string(small_tokens) + " and 1/" +
                      std::to_string(large_tokens) + " per direction; stack MACs " +
                      std::to_string(ca.macs_matching("layer0")) + " < " +
                      std::to_string(msa.macs_matching("layer0")) + " per layer; params " +
                      std::to_string(ca.param_count) + " < " + std::to_string(msa.param_count)};
}

// --- criterion 8: desk-scale learning -----------------------------------------

// Mirrors the trainer CLI's synthetic source: per_class training samples per
// class plus round(3*per_class*(1-f)/f) test samples spread by largest
// remainder, drawn from disjoint per-sample streams of the same generator.
std::pair<dataset, dataset> synthetic_split(std::int64_t per_class, std::int64_t n_points,
                                            double f, std::uint64_t seed) {
    const std::int64_t test_total =
        std::llround(3.0 * static_cast<double>(per_class) * (1.0 - f) / f);
    const std::int64_t test_base = test_total / 3;
    const std::int64_t test_extra = test_total - 3 * test_base;

    dataset all = synth_shapes(per_class + test_base + (test_extra > 0 ? 1 : 0), n_points, seed);
    const std::int64_t gen_per_class = all.size() / 3;

    dataset train, test;
    train.class_names = test.class_names = all.class_names;
    train.split = "train";
    test.split = "test";
    for (int c = 0; c < 3; ++c) {
        const std::int64_t test_c = test_base + (c < test_extra ? 1 : 0);
        for (std::int64_t s = 0; s < per_class + test_c; ++s) {
            auto& sample = all.samples[static_cast<std::size_t>(c * gen_per_class + s)];
            (s < per_class ? train : test).samples.push_back(std::move(sample));
        }
    }
    return {std::move(train), std::move(test)};
}

result criterion8() {
    const auto t0 = std::chrono::steady_clock::now();

    auto [train_ds, test_ds] = synthetic_split(100, 512, 0.75, 42);
    if (train_ds.size() != 300 || test_ds.size() != 100)
        return {false, "expected the 300 train / 100 test synthetic split"};

    model_config mc;
    mc.n_input = 512;
    mc.d0 = 8;
    mc.d_ratio = 2;
    mc.k = 16;
    mc.stages = 2;
    mc.heads = 2;
    mc.layers = 1;
    mc.num_classes = 3;
    mc.fusion = fusion_mode::part_tokens;
    mc.aux_branch_loss = true;
    mc.seed = 42;
    mc.validate();
    model m = build_classifier(mc);

    train_config tc;
    tc.epochs = 50;
    tc.lr = 1e-3;
    tc.batch = 8;
    tc.seed = 42;
    tc.augment = true;
    tc.aug.max_dropout = 0.0;
    tc.target_oa = 0.95;

    const train_history history = train_classifier(m, train_ds, test_ds, tc);
    const double secs = seconds_since(t0);

    double best_oa = 0.0;
    std::int64_t best_epoch = 0;
    for (const auto& e : history.epochs)
        if (e.oa > best_oa) {
            best_oa = e.oa;
            best_epoch = e.epoch;
        }

    const bool ok = best_oa >= 0.95 && static_cast<std::int64_t>(history.epochs.size()) <= 50 &&
                    secs < 900.0;
    return {ok, "test OA " + fmt(best_oa * 100.0) + "% (>=95%) at epoch " +
                    std::to_string(best_epoch) + " of <=50, wall clock " + fmt(secs) +
                    "s (<900s), 300 train / 100 test synthetic samples, seed 42"};
}

// --- criterion 9: ablation harness --------------------------------------------

result criterion9() {
    const fs::path out_dir = scratch_root() / "ablate";
    const fs::path cfg = write_tiny_config("ablate.json", out_dir, 1);

    std::string err;
    if (run_cli("ablate \"" + cfg.string() + "\" --sweep grouping", nullptr, &err) != 0)
        return {false, "grouping sweep failed: " + err};
    const auto grows = lines_of(slurp(out_dir / "ablate_grouping.csv"));
    if (grows.size() != 7 || grows[0] != "d,k,accuracy,macs,params")
        return {false, "grouping sweep did not emit the 6-row (d,k) table"};
    std::set<std::string> cells;
    for (std::size_t i = 1; i < grows.size(); ++i) {
        const auto f = csv_fields(grows[i]);
        if (f.size() != 5) return {false, "grouping row has wrong arity"};
        cells.insert(f[0] + "," + f[1]);
    }
    if (cells != std::set<std::string>{"2,8", "2,16", "2,32", "4,8", "4,16", "4,32"})
        return {false, "grouping sweep grid is not {2,4} x {8,16,32}"};

    if (run_cli("ablate \"" + cfg.string() + "\" --sweep fusion", nullptr, &err) != 0)
        return {false, "fusion sweep failed: " + err};
    const auto frows = lines_of(slurp(out_dir / "ablate_fusion.csv"));
    if (frows.size() != 5 || frows[0] != "fusion,accuracy,macs,params")
        return {false, "fusion sweep did not emit the 4-mode table"};

    // Each row's parameter column must equal an independently built model's
    // total for that mode, and the four totals must be distinct.
    model_config mc;
    mc.n_input = 32;
    mc.d0 = 4;
    mc.d_ratio = 2;
    mc.k = 8;
    mc.stages = 2;
    mc.heads = 2;
    mc.layers = 1;
    mc.num_classes = 3;
    std::set<std::string> params_seen;
    std::string ordering;
    for (std::size_t i = 1; i < frows.size(); ++i) {
        const auto f = csv_fields(frows[i]);
        if (f.size() != 4) return {false, "fusion row has wrong arity"};
        model_config variant = mc;
        variant.fusion = parse_fusion_mode(f[0]);
        const std::int64_t want = build_classifier(variant).parameter_count();
        if (f[3] != std::to_string(want))
            return {false, "fusion mode " + f[0] + " reports " + f[3] +
                               " params; independent rebuild sums to " + std::to_string(want)};
        params_seen.insert(f[3]);
        ordering += (i > 1 ? ", " : "") + f[0] + "=" + f[1];
    }
    if (params_seen.size() != 4) return {false, "fusion parameter totals are not distinct"};

    // The accuracy ordering across modes is informational, not a gate.
    std::cout << "    fusion accuracies (reported, not asserted): " << ordering << "\n";

    return {true, "grouping sweep emits the (d,k) grid {2,4}x{8,16,32}; fusion sweep emits 4"
                  " modes with distinct parameter totals matching independent rebuilds"};
}

// --- criterion 10: ingestion robustness ----------------------------------------

result criterion10() {
    // Fuzz seeds: a well-formed cloud with attributes and a comment, and two
    // well-formed meshes (one with a quad fan and trailing color fields).
    point_cloud seed_cloud;
    rng_stream cloud_rng(10, "acceptance/fuzz_cloud");
    for (int i = 0; i < 12; ++i) {
        seed_cloud.coords.push_back({cloud_rng.normal(), cloud_rng.normal(), cloud_rng.normal()});
        seed_cloud.attrs.push_back(cloud_rng.uniform());
        seed_cloud.attrs.push_back(cloud_rng.uniform(-2.0, 2.0));
    }
    seed_cloud.attr_dim = 2;
    const std::vector<std::string> xyz_seeds{
        write_xyz(seed_cloud), "# header comment\n" + write_xyz(seed_cloud)};
    const std::vector<std::string> off_seeds{
        "OFF\n4 4 0\n0 0 0\n1 0 0\n0 1 0\n0 0 1\n3 0 1 2\n3 0 1 3\n3 0 2 3\n3 1 2 3\n",
        "OFF\n5 3 0\n0 0 0\n2 0 0\n2 2 0\n0 2 0\n1 1 3\n4 0 1 2 3 255 0 0\n3 0 1 4\n3 2 3 4\n"};

    rng_stream rng(10, "acceptance/fuzz");
    std::int64_t parsed_ok = 0, structured = 0, other = 0;
    std::string first_other;
    for (int trial = 0; trial < 10000; ++trial) {
        const bool xyz = trial % 2 == 0;
        const auto& seeds = xyz ? xyz_seeds : off_seeds;
        std::string text = seeds[rng.uniform_index(seeds.size())];

        const int mutations = 1 + static_cast<int>(rng.uniform_index(4));
        for (int mu = 0; mu < mutations && !text.empty(); ++mu) {
            const std::size_t pos = rng.uniform_index(text.size());
            switch (rng.uniform_index(5)) {
                case 0: text[pos] = static_cast<char>(rng.uniform_index(256)); break;
                case 1: text.erase(pos, 1); break;
                case 2:
                    text.insert(pos, 1, static_cast<char>(rng.uniform_index(256)));
                    break;
                case 3: text.resize(pos); break;
                default:
                    std::swap(text[pos], text[rng.uniform_index(text.size())]);
                    break;
            }
        }

        try {
            if (xyz)
                parse_xyz(text);
            else
                parse_off(text);
            ++parsed_ok;
        } catch (const parse_error&) {
            ++structured;
        } catch (const std::exception& e) {
            if (other == 0) first_other = e.what();
            ++other;
        } catch (...) {
            if (other == 0) first_other = "non-standard exception";
            ++other;
        }
    }
    if (other != 0)
        return {false, std::to_string(other) +
                           " mutated inputs escaped with a non-ingestion error; first: " +
                           first_other};

    // Checkpoint round trip: bit-exact values and bytes.
    model_config mc;
    mc.n_input = 32;
    mc.d0 = 4;
    mc.d_ratio = 2;
    mc.k = 8;
    mc.stages = 2;
    mc.heads = 2;
    mc.layers = 1;
    mc.num_classes = 3;
    mc.seed = 9;
    model a = build_classifier(mc);
    for (parameter* p : a.parameters()) {
        rng_stream jiggle(9, "acceptance/ckpt/" + p->name);
        for (double& v : p->value.raw_values()) v += jiggle.normal();
    }
    const fs::path path_a = scratch_root() / "roundtrip_a.ckpt";
    const fs::path path_b = scratch_root() / "roundtrip_b.ckpt";
    save_checkpoint(path_a.string(), a.parameters());

    model b = build_classifier(mc);
    load_checkpoint_into(path_a.string(), b.parameters());
    const auto pa = a.parameters();
    const auto pb = b.parameters();
    for (std::size_t i = 0; i < pa.size(); ++i)
        if (!bits_equal(pa[i]->value.values(), pb[i]->value.values()))
            return {false, "checkpoint round trip changed parameter " + pa[i]->name};
    save_checkpoint(path_b.string(), b.parameters());
    if (slurp(path_a) != slurp(path_b))
        return {false, "re-saved checkpoint bytes differ from the original"};

    return {true, "10000 mutated mesh/cloud inputs: " + std::to_string(structured) +
                      " structured ingestion errors, " + std::to_string(parsed_ok) +
                      " still parseable, 0 crashes or foreign errors; checkpoint round trip"
                      " is bit-exact in values and bytes"};
}

// --- criterion 11: run determinism ---------------------------------------------

result criterion11() {
    const fs::path dir_a = scratch_root() / "det_a";
    const fs::path dir_b = scratch_root() / "det_b";
    const fs::path cfg = write_tiny_config("determinism.json", dir_a, 2);

    std::string err;
    if (run_cli("train \"" + cfg.string() + "\"", nullptr, &err) != 0)
        return {false, "first training run failed: " + err};
    if (run_cli("train \"" + cfg.string() + "\" --out \"" + dir_b.string() + "\"", nullptr,
                &err) != 0)
        return {false, "second training run failed: " + err};

    const std::string metrics_a = slurp(dir_a / "metrics.csv");
    if (metrics_a.empty()) return {false, "first run wrote no metrics"};
    if (metrics_a != slurp(dir_b / "metrics.csv"))
        return {false, "metrics.csv differs between identical runs"};
    if (slurp(dir_a / "final.ckpt") != slurp(dir_b / "final.ckpt"))
        return {false, "final checkpoint differs between identical runs"};
    return {true, "two training runs with the same config and seed produced byte-identical"
                  " metrics.csv and final.ckpt"};
}

}  // namespace

int main() {
    struct entry {
        int num;
        const char* title;
        result (*fn)();
    };
    const entry checks[] = {
        {1, "scale disclaimer", criterion1},
        {2, "end-to-end gradient check", criterion2},
        {3, "permutation invariance", criterion3},
        {4, "offset normalization", criterion4},
        {5, "sampling vs brute force", criterion5},
        {6, "attention algebra", criterion6},
        {7, "cost accounting", criterion7},
        {8, "desk-scale learning", criterion8},
        {9, "ablation harness", criterion9},
        {10, "ingestion robustness", criterion10},
        {11, "run determinism", criterion11},
    };

    int failures = 0;
    for (const entry& c : checks) {
        result r;
        try {
            r = c.fn();
        } catch (const std::exception& e) {
            r = {false, std::string("unexpected exception: ") + e.what()};
        }
        if (!r.ok) ++failures;
        std::cout << "[" << (c.num < 10 ? " " : "") << c.num << "] "
                  << (r.ok ? "PASS" : "FAIL") << " — " << c.title << ": " << r.detail
                  << std::endl;
    }

    std::error_code ec;
    fs::remove_all(scratch_root(), ec);

    std::cout << "acceptance: " << (11 - failures) << "/11 passed" << std::endl;
    return failures;
}
