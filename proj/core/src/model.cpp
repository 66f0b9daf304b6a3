#include "pointcat/model.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "pointcat/ops.hpp"
#include "pointcat/rng.hpp"

namespace pointcat {

std::string fusion_mode_name(fusion_mode m) {
    switch (m) {
        case fusion_mode::all_features: return "all_features";
        case fusion_mode::part_features: return "part_features";
        case fusion_mode::all_tokens: return "all_tokens";
        case fusion_mode::part_tokens: return "part_tokens";
    }
    throw contract_error("unknown fusion mode");
}

fusion_mode parse_fusion_mode(const std::string& name) {
    if (name == "all_features") return fusion_mode::all_features;
    if (name == "part_features") return fusion_mode::part_features;
    if (name == "all_tokens") return fusion_mode::all_tokens;
    if (name == "part_tokens") return fusion_mode::part_tokens;
    throw config_error("unknown fusion mode '" + name +
                       "' (expected all_features|part_features|all_tokens|part_tokens)");
}

std::int64_t model_config::stage_points(std::int64_t s) const {
    std::int64_t n = n_input;
    for (std::int64_t i = 0; i < s; ++i) n /= d_ratio;
    return n;
}

std::int64_t model_config::stage_dim(std::int64_t s) const {
    std::int64_t c = d0;
    for (std::int64_t i = 0; i < s; ++i) c *= 2;
    return c;
}

void model_config::validate() const {
    if (n_input < 1) throw config_error("n_input must be >= 1, got " + std::to_string(n_input));
    if (d0 < 1) throw config_error("d0 must be >= 1, got " + std::to_string(d0));
    if (d_ratio < 1) throw config_error("d_ratio must be >= 1, got " + std::to_string(d_ratio));
    if (k < 1) throw config_error("k must be >= 1, got " + std::to_string(k));
    if (stages < 2)
        throw config_error("stages must be >= 2 (two branches are needed), got " +
                           std::to_string(stages));
    if (heads < 1) throw config_error("heads must be >= 1, got " + std::to_string(heads));
    if (layers < 1) throw config_error("layers must be >= 1, got " + std::to_string(layers));
    if (num_classes < 2)
        throw config_error("num_classes must be >= 2, got " + std::to_string(num_classes));
    if (!(eps > 0.0)) throw config_error("eps must be positive");

    std::int64_t ratio_pow = 1;
    for (std::int64_t i = 0; i < stages; ++i) {
        ratio_pow *= d_ratio;
        if (ratio_pow > n_input)
            throw config_error("n_input=" + std::to_string(n_input) + " not divisible by d_ratio^stages=" +
                               std::to_string(d_ratio) + "^" + std::to_string(stages));
    }
    if (n_input % ratio_pow != 0)
        throw config_error("n_input=" + std::to_string(n_input) + " not divisible by d_ratio^stages=" +
                           std::to_string(ratio_pow));
    if (large_dim() % heads != 0)
        throw config_error("heads=" + std::to_string(heads) + " does not divide large-branch dim " +
                           std::to_string(large_dim()));
    if (small_dim() % heads != 0)
        throw config_error("heads=" + std::to_string(heads) + " does not divide small-branch dim " +
                           std::to_string(small_dim()));
}

tensor apply_mlp(const mlp_head& head, const tensor& x) {
    if (head.layers.empty()) throw contract_error("apply_mlp: empty head");
    tensor y = x;
    for (std::size_t i = 0; i < head.layers.size(); ++i) {
        y = linear(y, head.layers[i].w.value, head.layers[i].b.value);
        if (i + 1 < head.layers.size()) y = relu(y);
    }
    return y;
}

namespace {

// --- parameter factories -------------------------------------------------
// Initialization draws from a stream keyed by the parameter's name, so the
// initial values do not depend on registration order.

parameter make_weight(const model_config& cfg, const std::string& name, std::int64_t rows,
                      std::int64_t cols) {
    parameter p;
    p.name = name;
    p.value = tensor::zeros({rows, cols}, true);
    rng_stream rng(cfg.seed, "init/" + name);
    const double stddev = std::sqrt(2.0 / static_cast<double>(rows + cols));
    for (auto& v : p.value.raw_values()) v = rng.normal(0.0, stddev);
    return p;
}

parameter make_vector(const std::string& name, std::int64_t n, double fill) {
    parameter p;
    p.name = name;
    p.value = tensor::full({n}, fill, true);
    return p;
}

parameter make_class_token(const model_config& cfg, const std::string& name, std::int64_t c) {
    parameter p;
    p.name = name;
    p.value = tensor::zeros({1, c}, true);
    rng_stream rng(cfg.seed, "init/" + name);
    for (auto& v : p.value.raw_values()) v = rng.normal(0.0, 0.02);
    return p;
}

linear_params make_linear(const model_config& cfg, const std::string& name, std::int64_t cin,
                          std::int64_t cout) {
    linear_params lp;
    lp.w = make_weight(cfg, name + ".w", cin, cout);
    lp.b = make_vector(name + ".b", cout, 0.0);
    return lp;
}

norm_params make_norm(const std::string& name, std::int64_t c) {
    norm_params np;
    np.gamma = make_vector(name + ".g", c, 1.0);
    np.beta = make_vector(name + ".b", c, 0.0);
    return np;
}

cross_attention_params make_cross_params(const model_config& cfg, const std::string& prefix,
                                         std::int64_t c_self, std::int64_t c_other) {
    cross_attention_params p;
    p.proj_in = make_linear(cfg, prefix + ".proj_in", c_self, c_other);
    p.ln_in = make_norm(prefix + ".ln_in", c_other);
    p.wq = make_weight(cfg, prefix + ".wq", c_other, c_other);
    p.wk = make_weight(cfg, prefix + ".wk", c_other, c_other);
    p.wv = make_weight(cfg, prefix + ".wv", c_other, c_other);
    p.use_out_proj = cfg.msa_out_proj;
    if (p.use_out_proj) p.out_proj = make_linear(cfg, prefix + ".out", c_other, c_other);
    p.proj_out = make_linear(cfg, prefix + ".proj_out", c_other, c_self);
    p.ln_out = make_norm(prefix + ".ln_out", c_self);
    p.heads = cfg.heads;
    return p;
}

msa_params make_msa_params(const model_config& cfg, const std::string& prefix, std::int64_t c) {
    msa_params p;
    p.wq = make_weight(cfg, prefix + ".wq", c, c);
    p.wk = make_weight(cfg, prefix + ".wk", c, c);
    p.wv = make_weight(cfg, prefix + ".wv", c, c);
    p.use_out_proj = cfg.msa_out_proj;
    if (p.use_out_proj) p.out_proj = make_linear(cfg, prefix + ".out", c, c);
    p.heads = cfg.heads;
    return p;
}

ffn_params make_ffn_params(const model_config& cfg, const std::string& prefix, std::int64_t c) {
    ffn_params p;
    p.ln = make_norm(prefix + ".ln", c);
    p.fc1 = make_linear(cfg, prefix + ".fc1", c, 4 * c);
    p.fc2 = make_linear(cfg, prefix + ".fc2", 4 * c, c);
    return p;
}

std::int64_t at_least_one(std::int64_t v) {
    return std::max<std::int64_t>(1, v);
}

// Token heads: one hidden layer (c -> c/2 -> C).
mlp_head make_token_head(const model_config& cfg, const std::string& name, std::int64_t c) {
    mlp_head h;
    h.layers.push_back(make_linear(cfg, name + ".fc1", c, at_least_one(c / 2)));
    h.layers.push_back(make_linear(cfg, name + ".fc2", at_least_one(c / 2), cfg.num_classes));
    return h;
}

// Feature heads: two hidden layers (c -> c/2 -> c/4 -> C).
mlp_head make_feature_head(const model_config& cfg, const std::string& name, std::int64_t c) {
    mlp_head h;
    h.layers.push_back(make_linear(cfg, name + ".fc1", c, at_least_one(c / 2)));
    h.layers.push_back(make_linear(cfg, name + ".fc2", at_least_one(c / 2), at_least_one(c / 4)));
    h.layers.push_back(make_linear(cfg, name + ".fc3", at_least_one(c / 4), cfg.num_classes));
    return h;
}

// Propagated feature width at each level: small-branch width at the coarsest
// level, then 2x the stage width as features flow toward the input points.
std::int64_t prop_dim(const model_config& cfg, std::int64_t level) {
    return level == cfg.stages ? cfg.small_dim() : 2 * cfg.stage_dim(level);
}

model build_common(const model_config& cfg) {
    cfg.validate();
    model m;
    m.cfg = cfg;
    m.embed_w = make_weight(cfg, "embed.w", 3, cfg.d0);
    m.embed_b = make_vector("embed.b", cfg.d0, 0.0);
    for (std::int64_t s = 1; s <= cfg.stages; ++s) {
        const std::string prefix = "stage" + std::to_string(s);
        const std::int64_t d_in = cfg.stage_dim(s - 1);
        group_stage_params sp;
        sp.shift.alpha = make_vector(prefix + ".alpha", d_in, 1.0);
        sp.shift.beta = make_vector(prefix + ".beta", d_in, 0.0);
        sp.mlp.in_w = make_weight(cfg, prefix + ".mlp.in.w", d_in, 2 * d_in);
        sp.mlp.in_b = make_vector(prefix + ".mlp.in.b", 2 * d_in, 0.0);
        sp.mlp.h1_w = make_weight(cfg, prefix + ".mlp.h1.w", 2 * d_in, 2 * d_in);
        sp.mlp.h1_b = make_vector(prefix + ".mlp.h1.b", 2 * d_in, 0.0);
        sp.mlp.h2_w = make_weight(cfg, prefix + ".mlp.h2.w", 2 * d_in, 2 * d_in);
        sp.mlp.h2_b = make_vector(prefix + ".mlp.h2.b", 2 * d_in, 0.0);
        m.stage_params.push_back(std::move(sp));
    }
    m.cls_large = make_class_token(cfg, "cls.large", cfg.large_dim());
    m.cls_small = make_class_token(cfg, "cls.small", cfg.small_dim());

    m.stack.eps = cfg.eps;
    m.stack.kind = cfg.msa_baseline ? attention_kind::self_baseline : attention_kind::cross;
    for (std::int64_t l = 0; l < cfg.layers; ++l) {
        const std::string prefix = "stack.l" + std::to_string(l);
        if (m.stack.kind == attention_kind::cross) {
            cross_layer_params lp;
            lp.large_dir = make_cross_params(cfg, prefix + ".large", cfg.large_dim(), cfg.small_dim());
            lp.small_dir = make_cross_params(cfg, prefix + ".small", cfg.small_dim(), cfg.large_dim());
            m.stack.cross_layers.push_back(std::move(lp));
        } else {
            msa_layer_params lp;
            lp.large_msa = make_msa_params(cfg, prefix + ".large.msa", cfg.large_dim());
            lp.small_msa = make_msa_params(cfg, prefix + ".small.msa", cfg.small_dim());
            lp.large_ffn = make_ffn_params(cfg, prefix + ".large.ffn", cfg.large_dim());
            lp.small_ffn = make_ffn_params(cfg, prefix + ".small.ffn", cfg.small_dim());
            m.stack.msa_layers.push_back(std::move(lp));
        }
    }
    return m;
}

void check_unique_names(model& m) {
    std::set<std::string> seen;
    for (parameter* p : m.parameters())
        if (!seen.insert(p->name).second)
            throw contract_error("duplicate parameter name '" + p->name + "'");
}

}  // namespace

model build_classifier(const model_config& cfg) {
    model m = build_common(cfg);
    switch (cfg.fusion) {
        case fusion_mode::part_tokens:
            m.head_large = make_token_head(cfg, "head.large", cfg.large_dim());
            m.head_small = make_token_head(cfg, "head.small", cfg.small_dim());
            break;
        case fusion_mode::all_tokens:
            m.head_joint = make_token_head(cfg, "head.joint", cfg.large_dim() + cfg.small_dim());
            break;
        case fusion_mode::all_features:
            m.feat_align = make_linear(cfg, "fusion.align", cfg.large_dim(), cfg.small_dim());
            m.head_joint = make_feature_head(cfg, "head.joint", cfg.small_dim());
            break;
        case fusion_mode::part_features:
            m.head_large = make_feature_head(cfg, "head.large", cfg.large_dim());
            m.head_small = make_feature_head(cfg, "head.small", cfg.small_dim());
            break;
    }
    check_unique_names(m);
    return m;
}

model build_segmenter(const model_config& cfg) {
    if (cfg.n_categories < 1)
        throw config_error("segmenter requires n_categories >= 1, got " +
                           std::to_string(cfg.n_categories));
    if (cfg.n_parts < 2)
        throw config_error("segmenter requires n_parts >= 2, got " + std::to_string(cfg.n_parts));
    if (cfg.label_embed_dim < 1)
        throw config_error("segmenter requires label_embed_dim >= 1");

    model m = build_common(cfg);
    m.segmentation = true;
    for (std::int64_t level = cfg.stages - 1; level >= 0; --level) {
        const std::int64_t in_dim = prop_dim(cfg, level + 1) + cfg.stage_dim(level);
        const std::int64_t out_dim = prop_dim(cfg, level);
        m.fp.push_back(make_linear(cfg, "seg.fp" + std::to_string(level), in_dim, out_dim));
    }
    m.label_embed = make_linear(cfg, "seg.label", cfg.n_categories, cfg.label_embed_dim);
    const std::int64_t point_dim =
        prop_dim(cfg, 0) + cfg.small_dim() + cfg.label_embed_dim + cfg.small_dim();
    m.seg_head.layers.push_back(make_linear(cfg, "seg.head.fc1", point_dim, cfg.small_dim()));
    m.seg_head.layers.push_back(
        make_linear(cfg, "seg.head.fc2", cfg.small_dim(), at_least_one(cfg.small_dim() / 2)));
    m.seg_head.layers.push_back(
        make_linear(cfg, "seg.head.fc3", at_least_one(cfg.small_dim() / 2), cfg.n_parts));
    check_unique_names(m);
    return m;
}

namespace {

void collect_linear(std::vector<parameter*>& out, linear_params& lp) {
    out.push_back(&lp.w);
    out.push_back(&lp.b);
}

void collect_norm(std::vector<parameter*>& out, norm_params& np) {
    out.push_back(&np.gamma);
    out.push_back(&np.beta);
}

void collect_cross(std::vector<parameter*>& out, cross_attention_params& p) {
    collect_linear(out, p.proj_in);
    collect_norm(out, p.ln_in);
    out.push_back(&p.wq);
    out.push_back(&p.wk);
    out.push_back(&p.wv);
    if (p.use_out_proj) collect_linear(out, p.out_proj);
    collect_linear(out, p.proj_out);
    collect_norm(out, p.ln_out);
}

void collect_msa(std::vector<parameter*>& out, msa_params& p) {
    out.push_back(&p.wq);
    out.push_back(&p.wk);
    out.push_back(&p.wv);
    if (p.use_out_proj) collect_linear(out, p.out_proj);
}

void collect_ffn(std::vector<parameter*>& out, ffn_params& p) {
    collect_norm(out, p.ln);
    collect_linear(out, p.fc1);
    collect_linear(out, p.fc2);
}

void collect_head(std::vector<parameter*>& out, mlp_head& h) {
    for (auto& layer : h.layers) collect_linear(out, layer);
}

}  // namespace

std::vector<parameter*> model::parameters() {
    std::vector<parameter*> out;
    out.push_back(&embed_w);
    out.push_back(&embed_b);
    for (auto& sp : stage_params) {
        out.push_back(&sp.shift.alpha);
        out.push_back(&sp.shift.beta);
        out.push_back(&sp.mlp.in_w);
        out.push_back(&sp.mlp.in_b);
        out.push_back(&sp.mlp.h1_w);
        out.push_back(&sp.mlp.h1_b);
        out.push_back(&sp.mlp.h2_w);
        out.push_back(&sp.mlp.h2_b);
    }
    out.push_back(&cls_large);
    out.push_back(&cls_small);
    for (auto& lp : stack.cross_layers) {
        collect_cross(out, lp.large_dir);
        collect_cross(out, lp.small_dir);
    }
    for (auto& lp : stack.msa_layers) {
        collect_msa(out, lp.large_msa);
        collect_ffn(out, lp.large_ffn);
        collect_msa(out, lp.small_msa);
        collect_ffn(out, lp.small_ffn);
    }
    collect_head(out, head_large);
    collect_head(out, head_small);
    collect_head(out, head_joint);
    if (feat_align.w.value.defined()) collect_linear(out, feat_align);
    for (auto& unit : fp) collect_linear(out, unit);
    if (label_embed.w.value.defined()) collect_linear(out, label_embed);
    collect_head(out, seg_head);
    return out;
}

std::vector<const parameter*> model::parameters() const {
    auto mutable_list = const_cast<model*>(this)->parameters();
    return std::vector<const parameter*>(mutable_list.begin(), mutable_list.end());
}

std::int64_t model::parameter_count() const {
    std::int64_t total = 0;
    for (const parameter* p : parameters()) total += p->value.numel();
    return total;
}

pyramid_trace run_pyramid(const model& m, const std::vector<point3>& pts) {
    pyramid_trace trace;
    {
        cost_scope scope("embed");
        trace.levels.push_back(embed_points(pts, m.embed_w, m.embed_b));
    }
    for (std::int64_t s = 1; s <= m.cfg.stages; ++s) {
        cost_scope scope("stage" + std::to_string(s));
        stage_config sc;
        sc.d_ratio = m.cfg.d_ratio;
        sc.k = m.cfg.k;
        sc.scope = m.cfg.sigma;
        sc.eps = m.cfg.eps;
        trace.levels.push_back(run_stage(trace.levels.back(), sc, m.stage_params[s - 1]));
    }
    return trace;
}

std::pair<branch_features, branch_features> build_pyramid(const model& m,
                                                          const std::vector<point3>& pts) {
    pyramid_trace trace = run_pyramid(m, pts);
    return {trace.levels[m.cfg.stages - 1], trace.levels[m.cfg.stages]};
}

namespace {

std::vector<point3> canonical_points(const model& m, const point_cloud& cloud,
                                     std::vector<std::int64_t>* order_out) {
    validate_cloud(cloud, false);
    if (cloud.size() != m.cfg.n_input)
        throw shape_error("model expects " + std::to_string(m.cfg.n_input) + " points, got " +
                          std::to_string(cloud.size()));
    std::vector<std::int64_t> order = canonical_order(cloud.coords, false);
    std::vector<point3> pts;
    pts.reserve(order.size());
    for (std::int64_t src : order) pts.push_back(cloud.coords[src]);
    if (order_out) *order_out = std::move(order);
    return pts;
}

classify_outputs classify_from_tokens(const model& m, const dual_tokens& tokens) {
    cost_scope scope("head");
    classify_outputs out;
    switch (m.cfg.fusion) {
        case fusion_mode::part_tokens:
            out.branch_large = apply_mlp(m.head_large, tokens.large.cls);
            out.branch_small = apply_mlp(m.head_small, tokens.small.cls);
            out.fused = add(out.branch_large, out.branch_small);
            break;
        case fusion_mode::all_tokens:
            out.fused = apply_mlp(m.head_joint, concat_cols(tokens.large.cls, tokens.small.cls));
            break;
        case fusion_mode::all_features: {
            tensor aligned = linear(tokens.large.patch, m.feat_align.w.value, m.feat_align.b.value);
            tensor pooled = max_pool_rows(concat_rows(aligned, tokens.small.patch));
            out.fused = apply_mlp(m.head_joint, pooled);
            break;
        }
        case fusion_mode::part_features:
            out.branch_large = apply_mlp(m.head_large, max_pool_rows(tokens.large.patch));
            out.branch_small = apply_mlp(m.head_small, max_pool_rows(tokens.small.patch));
            out.fused = add(out.branch_large, out.branch_small);
            break;
    }
    return out;
}

dual_tokens encode(const model& m, const std::vector<point3>& pts, pyramid_trace* trace_out) {
    pyramid_trace trace = run_pyramid(m, pts);
    dual_tokens tokens;
    tokens.large = append_class_token(trace.levels[m.cfg.stages - 1], m.cls_large);
    tokens.small = append_class_token(trace.levels[m.cfg.stages], m.cls_small);
    {
        cost_scope scope("stack");
        tokens = run_stack(tokens, m.stack);
    }
    if (trace_out) *trace_out = std::move(trace);
    return tokens;
}

}  // namespace

classify_outputs forward_classify_detail(const model& m, const point_cloud& cloud) {
    if (m.segmentation) throw contract_error("forward_classify on a segmentation model");
    std::vector<point3> pts = canonical_points(m, cloud, nullptr);
    dual_tokens tokens = encode(m, pts, nullptr);
    return classify_from_tokens(m, tokens);
}

tensor forward_classify(const model& m, const point_cloud& cloud) {
    return forward_classify_detail(m, cloud).fused;
}

tensor feature_propagate(const std::vector<point3>& coarse_pts, const tensor& coarse_feats,
                         const std::vector<point3>& fine_pts, const tensor& fine_feats,
                         const linear_params& unit) {
    if (coarse_pts.empty()) throw shape_error("feature_propagate: empty coarse set");
    if (static_cast<std::int64_t>(coarse_pts.size()) != coarse_feats.rows())
        throw shape_error("feature_propagate: coarse feats/points disagree");
    if (static_cast<std::int64_t>(fine_pts.size()) != fine_feats.rows())
        throw shape_error("feature_propagate: fine feats/points disagree");

    const std::int64_t kk = std::min<std::int64_t>(3, static_cast<std::int64_t>(coarse_pts.size()));
    neighbor_table nbrs = knn_points(coarse_pts, fine_pts, kk);
    std::vector<double> weights(nbrs.idx.size());
    for (std::size_t q = 0; q < fine_pts.size(); ++q) {
        double total = 0.0;
        for (std::int64_t t = 0; t < kk; ++t) {
            const double d2v = dist2(fine_pts[q], coarse_pts[nbrs.idx[q * kk + t]]);
            weights[q * kk + t] = 1.0 / (d2v + 1e-8);
            total += weights[q * kk + t];
        }
        for (std::int64_t t = 0; t < kk; ++t) weights[q * kk + t] /= total;
    }
    tensor interp = interpolate_rows(coarse_feats, nbrs.idx, weights, kk);
    tensor cat = concat_cols(interp, fine_feats);
    return relu(linear(cat, unit.w.value, unit.b.value));
}

tensor forward_part_segment(const model& m, const point_cloud& cloud,
                            const std::vector<double>& category_onehot) {
    if (!m.segmentation) throw contract_error("forward_part_segment on a classification model");
    if (static_cast<std::int64_t>(category_onehot.size()) != m.cfg.n_categories)
        throw shape_error("category one-hot length " + std::to_string(category_onehot.size()) +
                          " != n_categories " + std::to_string(m.cfg.n_categories));

    std::vector<std::int64_t> order;
    std::vector<point3> pts = canonical_points(m, cloud, &order);
    pyramid_trace trace;
    dual_tokens tokens = encode(m, pts, &trace);

    cost_scope scope("seg");
    tensor global_feat = max_pool_rows(tokens.small.patch);
    tensor label_feat = linear(tensor::from_values({1, m.cfg.n_categories}, category_onehot),
                               m.label_embed.w.value, m.label_embed.b.value);

    tensor feats = tokens.small.patch;
    for (std::int64_t level = m.cfg.stages - 1; level >= 0; --level) {
        const auto& coarse = trace.levels[level + 1];
        const auto& fine = trace.levels[level];
        feats = feature_propagate(coarse.points, feats, fine.points, fine.tokens,
                                  m.fp[m.cfg.stages - 1 - level]);
    }

    const std::int64_t n = m.cfg.n_input;
    tensor per_point = concat_cols({feats, broadcast_rows(global_feat, n),
                                    broadcast_rows(label_feat, n), broadcast_rows(tokens.small.cls, n)});
    tensor logits = apply_mlp(m.seg_head, per_point);

    // Undo the canonical ordering: output row j must describe input point j.
    std::vector<std::int64_t> inverse(order.size());
    for (std::size_t i = 0; i < order.size(); ++i) inverse[order[i]] = static_cast<std::int64_t>(i);
    return gather_rows(logits, inverse);
}

tensor forward_part_segment(const model& m, const point_cloud& cloud) {
    if (!cloud.category.has_value())
        throw shape_error("forward_part_segment: cloud has no category label");
    const int cat = *cloud.category;
    if (cat < 0 || cat >= m.cfg.n_categories)
        throw index_error("forward_part_segment: category " + std::to_string(cat) + " outside [0," +
                          std::to_string(m.cfg.n_categories) + ")");
    std::vector<double> onehot(static_cast<std::size_t>(m.cfg.n_categories), 0.0);
    onehot[static_cast<std::size_t>(cat)] = 1.0;
    return forward_part_segment(m, cloud, onehot);
}

cost_report count_costs(const model& m, attention_kind kind) {
    const model* subject = &m;
    model twin;
    if ((kind == attention_kind::self_baseline) != m.cfg.msa_baseline) {
        model_config cfg = m.cfg;
        cfg.msa_baseline = (kind == attention_kind::self_baseline);
        twin = m.segmentation ? build_segmenter(cfg) : build_classifier(cfg);
        subject = &twin;
    }

    // Deterministic synthetic input; MAC counts do not depend on values.
    rng_stream rng(m.cfg.seed, "count_costs");
    point_cloud cloud;
    cloud.coords.resize(static_cast<std::size_t>(m.cfg.n_input));
    for (auto& p : cloud.coords)
        for (int a = 0; a < 3; ++a) p[a] = rng.normal();

    cost_report report;
    {
        cost_collector collector(report);
        no_grad_guard ng;
        if (subject->segmentation) {
            std::vector<double> onehot(static_cast<std::size_t>(subject->cfg.n_categories), 0.0);
            onehot[0] = 1.0;
            forward_part_segment(*subject, cloud, onehot);
        } else {
            forward_classify(*subject, cloud);
        }
    }
    report.param_count = static_cast<std::uint64_t>(subject->parameter_count());
    return report;
}

}  // namespace pointcat
