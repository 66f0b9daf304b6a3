#pragma once

#include <cstdint>
#include <vector>

#include "pointcat/geometry.hpp"
#include "pointcat/tensor.hpp"

namespace pointcat {

// Scope of the normalization statistic in the grouped-offset normalization:
// one scalar std over the whole sample's relative block (default), or one per
// group. Per-sample is more stable at small k.
enum class sigma_scope { per_sample, per_group };

// A point subset with its feature tokens ([n, c], one row per point).
struct branch_features {
    std::vector<point3> points;
    tensor tokens;

    std::int64_t count() const { return static_cast<std::int64_t>(points.size()); }
};

// Per-channel affine applied to normalized relative features (the learnable
// geometric shift). alpha starts at 1, beta at 0.
struct shift_params {
    parameter alpha;
    parameter beta;
};

// Per-neighbor residual MLP that doubles the channel count:
//   y0 = in(x)             d -> 2d
//   y  = relu(y0 + h2(relu(h1(y0))))
struct group_mlp_params {
    parameter in_w, in_b;
    parameter h1_w, h1_b;
    parameter h2_w, h2_b;
};

struct group_stage_params {
    shift_params shift;
    group_mlp_params mlp;
};

// One grouped stage input: n groups of k neighbors in feature space.
// Group blocks are stored flattened: row g*k+t is neighbor t of group g.
struct grouped_patch {
    std::vector<point3> centers;
    tensor center_tokens;  // [n, d] parent tokens at the centers
    tensor rel;            // [(n*k), d] neighbor - center offsets
    tensor normalized;     // [(n*k), d] rel / (sigma*(1+eps)), before the affine shift
    tensor shifted;        // [(n*k), d] alpha * normalized + beta
    std::vector<double> sigma;  // 1 entry (per_sample) or n entries (per_group)
    std::int64_t n = 0;
    std::int64_t k = 0;
};

// Stage 0: tokens = coords * W + b (pure linear embedding, no nonlinearity).
branch_features embed_points(const std::vector<point3>& pts, const parameter& w, const parameter& b);

// Gathers neighbor offsets in feature space and normalizes them by
// sigma*(1+eps), where sigma is the population std of the relative block.
// The relative epsilon keeps normalization exactly invariant to scaling the
// parent features; an all-zero block (sigma 0) passes through unchanged.
// Applies the per-channel affine shift last; intermediates are kept for
// inspection.
grouped_patch group_normalize(const branch_features& parent, const std::vector<std::int64_t>& centers,
                              const neighbor_table& nbrs, const shift_params& shift,
                              sigma_scope scope, double eps);

// Residual MLP per neighbor row, then max over each group's k rows.
branch_features aggregate_group(const grouped_patch& patch, const group_mlp_params& mlp);

struct stage_config {
    std::int64_t d_ratio = 2;
    std::int64_t k = 16;
    sigma_scope scope = sigma_scope::per_sample;
    double eps = 1e-5;
};

// One downsample-group-aggregate stage: FPS to n/d_ratio centers, kNN
// grouping (k clamped to the parent point count), normalization, residual-MLP
// aggregation. Output has n/d_ratio points and twice the channels.
branch_features run_stage(const branch_features& parent, const stage_config& cfg,
                          const group_stage_params& params);

}  // namespace pointcat
