#include "pointcat/grouping.hpp"

#include <cmath>

#include "pointcat/ops.hpp"

namespace pointcat {

namespace {

// Normalizes a relative block by sigma * (1 + eps). The epsilon is relative,
// not additive: scaling the parent features by any s > 0 scales rel and sigma
// identically, so the quotient is invariant (an additive epsilon would leak
// an O(eps/sigma) scale dependence). A zero sigma means every entry of the
// block is zero (offsets of identical tokens), so the block passes through
// unnormalized rather than dividing by zero.
tensor normalize_block(const tensor& block, const tensor& sigma, double eps) {
    if (sigma.values()[0] == 0.0) return block;
    return div_bscalar(block, scale(sigma, 1.0 + eps));
}

tensor coords_tensor(const std::vector<point3>& pts) {
    std::vector<double> flat;
    flat.reserve(pts.size() * 3);
    for (const auto& p : pts) {
        flat.push_back(p[0]);
        flat.push_back(p[1]);
        flat.push_back(p[2]);
    }
    return tensor::from_values({static_cast<std::int64_t>(pts.size()), 3}, std::move(flat));
}

// std over all entries of `block`, as a graph scalar [1]:
// sqrt(mean((x - mean(x))^2)) with population statistics.
tensor population_std(const tensor& block) {
    tensor mu = mean_all(block);
    tensor centered = sub_bscalar(block, mu);
    tensor var = mean_all(mul(centered, centered));
    return sqrt_elem(var);
}

}  // namespace

branch_features embed_points(const std::vector<point3>& pts, const parameter& w, const parameter& b) {
    if (pts.empty()) throw shape_error("embed_points: empty point set");
    branch_features out;
    out.points = pts;
    out.tokens = linear(coords_tensor(pts), w.value, b.value);
    return out;
}

grouped_patch group_normalize(const branch_features& parent, const std::vector<std::int64_t>& centers,
                              const neighbor_table& nbrs, const shift_params& shift,
                              sigma_scope scope, double eps) {
    const std::int64_t n = static_cast<std::int64_t>(centers.size());
    const std::int64_t k = nbrs.k;
    if (n < 1) throw shape_error("group_normalize: no centers");
    if (k < 1) throw shape_error("group_normalize: empty neighbor table");
    if (nbrs.rows() != n)
        throw shape_error("group_normalize: neighbor table has " + std::to_string(nbrs.rows()) +
                          " rows for " + std::to_string(n) + " centers");
    if (!(eps > 0.0)) throw numeric_error("group_normalize: eps must be positive");

    grouped_patch patch;
    patch.n = n;
    patch.k = k;
    patch.centers.reserve(static_cast<std::size_t>(n));
    for (std::int64_t c : centers) {
        if (c < 0 || c >= parent.count())
            throw index_error("group_normalize: center index " + std::to_string(c) + " out of range");
        patch.centers.push_back(parent.points[c]);
    }

    // Neighbor tokens and per-row repeated center tokens, then offsets.
    std::vector<std::int64_t> center_rep(static_cast<std::size_t>(n * k));
    for (std::int64_t g = 0; g < n; ++g)
        for (std::int64_t t = 0; t < k; ++t) center_rep[g * k + t] = centers[g];
    tensor neighbor_tokens = gather_rows(parent.tokens, nbrs.idx);
    tensor center_tokens_rep = gather_rows(parent.tokens, center_rep);
    patch.rel = sub(neighbor_tokens, center_tokens_rep);
    patch.center_tokens = gather_rows(parent.tokens, centers);

    if (scope == sigma_scope::per_sample) {
        tensor sigma = population_std(patch.rel);
        const double sv = sigma.values()[0];
        if (!std::isfinite(sv))
            throw numeric_error("group_normalize: non-finite sigma");
        patch.sigma.assign(1, sv);
        patch.normalized = normalize_block(patch.rel, sigma, eps);
    } else {
        std::vector<tensor> blocks;
        blocks.reserve(static_cast<std::size_t>(n));
        patch.sigma.reserve(static_cast<std::size_t>(n));
        for (std::int64_t g = 0; g < n; ++g) {
            tensor block = slice_rows(patch.rel, g * k, k);
            tensor sigma = population_std(block);
            const double sv = sigma.values()[0];
            if (!std::isfinite(sv))
                throw numeric_error("group_normalize: non-finite sigma in group " + std::to_string(g));
            patch.sigma.push_back(sv);
            blocks.push_back(normalize_block(block, sigma, eps));
        }
        patch.normalized = n == 1 ? blocks[0] : concat_rows(blocks);
    }

    patch.shifted = add_rowvec(mul_rowvec(patch.normalized, shift.alpha.value), shift.beta.value);
    return patch;
}

branch_features aggregate_group(const grouped_patch& patch, const group_mlp_params& mlp) {
    if (!patch.shifted.defined()) throw contract_error("aggregate_group: patch not normalized");
    tensor y0 = linear(patch.shifted, mlp.in_w.value, mlp.in_b.value);
    tensor r = linear(relu(linear(y0, mlp.h1_w.value, mlp.h1_b.value)), mlp.h2_w.value, mlp.h2_b.value);
    tensor y = relu(add(y0, r));
    branch_features out;
    out.points = patch.centers;
    out.tokens = max_pool_groups(y, patch.k);
    return out;
}

branch_features run_stage(const branch_features& parent, const stage_config& cfg,
                          const group_stage_params& params) {
    if (cfg.d_ratio < 1) throw shape_error("run_stage: d_ratio must be >= 1");
    const std::int64_t n_in = parent.count();
    const std::int64_t n_out = n_in / cfg.d_ratio;
    if (n_out < 1)
        throw shape_error("run_stage: " + std::to_string(n_in) + " points cannot be downsampled by " +
                          std::to_string(cfg.d_ratio));
    // k never exceeds the available points; small ablation configs rely on
    // this clamp at the deepest stages.
    const std::int64_t k_eff = std::min(cfg.k, n_in);
    if (cfg.k < 1) throw shape_error("run_stage: k must be >= 1");

    std::vector<std::int64_t> centers = farthest_point_sample(parent.points, n_out);
    neighbor_table nbrs = knn_search(parent.points, centers, k_eff);
    grouped_patch patch = group_normalize(parent, centers, nbrs, params.shift, cfg.scope, cfg.eps);
    return aggregate_group(patch, params.mlp);
}

}  // namespace pointcat
