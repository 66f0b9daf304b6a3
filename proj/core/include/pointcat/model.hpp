#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pointcat/attention.hpp"
#include "pointcat/costs.hpp"
#include "pointcat/geometry.hpp"
#include "pointcat/grouping.hpp"

namespace pointcat {

// How the two branches are fused into classification logits.
enum class fusion_mode {
    all_features,   // align large patches to small width, concat all rows, max-pool, one head
    part_features,  // per-branch patch max-pool + per-branch head, sum predictions
    all_tokens,     // one head over concat(cls_large, cls_small)
    part_tokens     // per-branch head on each class token, sum predictions
};

std::string fusion_mode_name(fusion_mode m);
fusion_mode parse_fusion_mode(const std::string& name);

struct model_config {
    std::int64_t n_input = 1024;
    std::int64_t d0 = 32;       // embedding width; doubles per stage
    std::int64_t d_ratio = 2;   // per-stage downsampling ratio
    std::int64_t k = 32;        // neighbors per group
    std::int64_t stages = 4;
    std::int64_t heads = 4;
    std::int64_t layers = 2;    // attention stack depth L
    std::int64_t num_classes = 0;
    fusion_mode fusion = fusion_mode::part_tokens;
    sigma_scope sigma = sigma_scope::per_sample;
    bool msa_baseline = false;  // replace cross-attention with per-branch self-attention
    bool msa_out_proj = true;   // head-merge projection after concatenating heads
    bool aux_branch_loss = false;
    double eps = 1e-5;
    std::uint64_t seed = 0;

    // Part segmentation (used by build_segmenter).
    std::int64_t n_categories = 0;
    std::int64_t n_parts = 0;
    std::int64_t label_embed_dim = 64;

    std::int64_t stage_points(std::int64_t s) const;  // n_input / d_ratio^s
    std::int64_t stage_dim(std::int64_t s) const;     // d0 * 2^s
    std::int64_t large_points() const { return stage_points(stages - 1); }
    std::int64_t small_points() const { return stage_points(stages); }
    std::int64_t large_dim() const { return stage_dim(stages - 1); }
    std::int64_t small_dim() const { return stage_dim(stages); }

    // Throws config_error naming the violated constraint.
    void validate() const;
};

// A stack of linear layers with ReLU between them (none after the last).
struct mlp_head {
    std::vector<linear_params> layers;
};

tensor apply_mlp(const mlp_head& head, const tensor& x);

struct model {
    model_config cfg;
    bool segmentation = false;

    parameter embed_w, embed_b;
    std::vector<group_stage_params> stage_params;
    parameter cls_large, cls_small;
    attention_stack_params stack;

    // Classification heads; which are populated depends on cfg.fusion.
    mlp_head head_large, head_small, head_joint;
    linear_params feat_align;  // all_features only

    // Segmentation decoder.
    std::vector<linear_params> fp;  // propagation units, coarsest level first
    linear_params label_embed;
    mlp_head seg_head;

    // All parameters in registration order; names are unique.
    std::vector<parameter*> parameters();
    std::vector<const parameter*> parameters() const;
    std::int64_t parameter_count() const;
};

model build_classifier(const model_config& cfg);
model build_segmenter(const model_config& cfg);

// The grouping pyramid on an already-ordered point list. levels[0] is the
// embedding level (n_input points), levels[s] the s-th stage output.
struct pyramid_trace {
    std::vector<branch_features> levels;
};

pyramid_trace run_pyramid(const model& m, const std::vector<point3>& pts);

// Stage (stages-1) output = large branch, stage (stages) output = small.
std::pair<branch_features, branch_features> build_pyramid(const model& m,
                                                          const std::vector<point3>& pts);

// Classification logits [1, num_classes]. The input is canonically ordered
// internally, so logits depend only on the point set (bit-exactly).
tensor forward_classify(const model& m, const point_cloud& cloud);

// Per-branch pieces for auxiliary losses (part_tokens / part_features modes;
// otherwise only `fused` is defined).
struct classify_outputs {
    tensor fused;
    tensor branch_large;
    tensor branch_small;
};

classify_outputs forward_classify_detail(const model& m, const point_cloud& cloud);

// Inverse-squared-distance interpolation (3 nearest coarse points, weights
// 1/(d^2+1e-8) normalized) concatenated with the fine skip features, then a
// linear+ReLU unit.
tensor feature_propagate(const std::vector<point3>& coarse_pts, const tensor& coarse_feats,
                         const std::vector<point3>& fine_pts, const tensor& fine_feats,
                         const linear_params& unit);

// Per-point part logits [n_input, n_parts]; row i corresponds to input point
// i (the internal canonical ordering is undone), so the output is exactly
// permutation equivariant.
tensor forward_part_segment(const model& m, const point_cloud& cloud,
                            const std::vector<double>& category_onehot);

// Convenience: builds the one-hot from cloud.category.
tensor forward_part_segment(const model& m, const point_cloud& cloud);

// MAC/parameter accounting for one forward pass. If `kind` differs from the
// model's own attention kind, a twin model is built from the same config with
// the flag flipped and measured instead.
cost_report count_costs(const model& m, attention_kind kind);

}  // namespace pointcat
