// Grouping pyramid: the normalized-offset statistics, scale invariance,
// neighbor-order symmetry, the residual MLP wiring, and stage arithmetic.

#include <cmath>
#include <cstring>
#include <vector>

#include "doctest.h"
#include "pointcat/geometry.hpp"
#include "pointcat/grouping.hpp"
#include "pointcat/ops.hpp"
#include "pointcat/rng.hpp"

using namespace pointcat;

namespace {

branch_features random_branch(rng_stream& rng, std::int64_t n, std::int64_t d,
                              double token_scale = 1.0) {
    branch_features b;
    b.points.resize(static_cast<std::size_t>(n));
    for (auto& p : b.points)
        p = {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
    std::vector<double> tok(static_cast<std::size_t>(n * d));
    for (double& v : tok) v = token_scale * rng.uniform(-1.0, 1.0);
    b.tokens = tensor::from_values({n, d}, std::move(tok));
    return b;
}

shift_params identity_shift(std::int64_t d) {
    return {parameter{"alpha", tensor::full({d}, 1.0)}, parameter{"beta", tensor::zeros({d})}};
}

// Population std over every entry of a row-major block, plain loops.
double block_std(const std::vector<double>& v) {
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double var = 0.0;
    for (double x : v) var += (x - mean) * (x - mean);
    return std::sqrt(var / static_cast<double>(v.size()));
}

}  // namespace

TEST_CASE("normalized offsets: std equals sigma/(sigma+eps) on 1000 random inputs") {
    rng_stream rng(21, "grouping/norm");
    const double eps = 1e-5;
    int checked = 0;
    for (int inst = 0; inst < 1000; ++inst) {
        const std::int64_t n_pts = 12 + static_cast<std::int64_t>(rng.uniform_index(10));
        const std::int64_t d = 2 + static_cast<std::int64_t>(rng.uniform_index(4));
        // Mix in small-amplitude token fields to cover sigma near the 1e-2 gate.
        const double amp = (inst % 5 == 0) ? 0.02 : 1.0;
        branch_features parent = random_branch(rng, n_pts, d, amp);
        std::vector<std::int64_t> centers = farthest_point_sample(parent.points, n_pts / 2);
        neighbor_table nbrs = knn_search(parent.points, centers, 4);

        grouped_patch patch =
            group_normalize(parent, centers, nbrs, identity_shift(d), sigma_scope::per_sample, eps);

        // Independent sigma from first principles.
        std::vector<double> rel;
        for (std::size_t g = 0; g < centers.size(); ++g)
            for (std::int64_t t = 0; t < 4; ++t) {
                const std::int64_t pi = nbrs.at(static_cast<std::int64_t>(g), t);
                const std::int64_t ci = centers[g];
                for (std::int64_t c = 0; c < d; ++c)
                    rel.push_back(parent.tokens.at(pi, c) - parent.tokens.at(ci, c));
            }
        const double sigma = block_std(rel);
        REQUIRE(patch.sigma.size() == 1);
        CHECK(std::fabs(patch.sigma[0] - sigma) <= 1e-12 * std::max(1.0, sigma));

        if (sigma < 1e-2) continue;  // the property is gated on sigma >= 1e-2
        ++checked;
        const double got = block_std(patch.normalized.values());
        CHECK(std::fabs(got - sigma / (sigma + eps)) <= 1e-3);
        // ... and with sigma >= 1e-2 that ratio is within 1e-3 of 1.
        CHECK(std::fabs(got - 1.0) <= 1e-3);
    }
    CHECK(checked >= 900);  // the gate must not silently skip the property
}

TEST_CASE("normalization is invariant to scaling the parent features by 10") {
    rng_stream rng(22, "grouping/scale");
    for (int inst = 0; inst < 50; ++inst) {
        const std::int64_t n_pts = 16;
        const std::int64_t d = 4;
        branch_features parent = random_branch(rng, n_pts, d);
        branch_features scaled = parent;
        {
            std::vector<double> v = parent.tokens.values();
            for (double& x : v) x *= 10.0;
            scaled.tokens = tensor::from_values({n_pts, d}, std::move(v));
        }
        std::vector<std::int64_t> centers = farthest_point_sample(parent.points, 8);
        neighbor_table nbrs = knn_search(parent.points, centers, 4);
        grouped_patch a = group_normalize(parent, centers, nbrs, identity_shift(d),
                                          sigma_scope::per_sample, 1e-5);
        grouped_patch b = group_normalize(scaled, centers, nbrs, identity_shift(d),
                                          sigma_scope::per_sample, 1e-5);
        for (std::int64_t i = 0; i < a.normalized.numel(); ++i)
            CHECK(std::fabs(a.normalized.values()[static_cast<std::size_t>(i)] -
                            b.normalized.values()[static_cast<std::size_t>(i)]) <= 1e-9);
    }
}

TEST_CASE("per-group sigma normalizes each group independently") {
    rng_stream rng(23, "grouping/pergroup");
    branch_features parent = random_branch(rng, 20, 3);
    std::vector<std::int64_t> centers = farthest_point_sample(parent.points, 5);
    neighbor_table nbrs = knn_search(parent.points, centers, 4);
    grouped_patch patch =
        group_normalize(parent, centers, nbrs, identity_shift(3), sigma_scope::per_group, 1e-5);
    REQUIRE(patch.sigma.size() == 5);
    for (std::int64_t g = 0; g < 5; ++g) {
        std::vector<double> rows(patch.rel.values().begin() + g * 4 * 3,
                                 patch.rel.values().begin() + (g + 1) * 4 * 3);
        const double sigma = block_std(rows);
        CHECK(std::fabs(patch.sigma[static_cast<std::size_t>(g)] - sigma) <= 1e-12);
        std::vector<double> nrows(patch.normalized.values().begin() + g * 4 * 3,
                                  patch.normalized.values().begin() + (g + 1) * 4 * 3);
        if (sigma >= 1e-2) CHECK(std::fabs(block_std(nrows) - sigma / (sigma + 1e-5)) <= 1e-3);
    }
}

TEST_CASE("self-neighbor rows of the relative block are exactly zero") {
    rng_stream rng(24, "grouping/self");
    branch_features parent = random_branch(rng, 16, 4);
    std::vector<std::int64_t> centers = farthest_point_sample(parent.points, 8);
    neighbor_table nbrs = knn_search(parent.points, centers, 4);
    grouped_patch patch =
        group_normalize(parent, centers, nbrs, identity_shift(4), sigma_scope::per_sample, 1e-5);
    for (std::int64_t g = 0; g < 8; ++g) {
        // knn_search puts the center itself first (distance 0).
        CHECK(nbrs.at(g, 0) == centers[static_cast<std::size_t>(g)]);
        for (std::int64_t c = 0; c < 4; ++c) CHECK(patch.rel.at(g * 4, c) == 0.0);
    }
}

TEST_CASE("the affine shift applies alpha*x+beta per channel") {
    rng_stream rng(25, "grouping/shift");
    branch_features parent = random_branch(rng, 12, 2);
    std::vector<std::int64_t> centers = farthest_point_sample(parent.points, 4);
    neighbor_table nbrs = knn_search(parent.points, centers, 3);
    shift_params sp{parameter{"alpha", tensor::from_values({2}, {2.0, -0.5})},
                    parameter{"beta", tensor::from_values({2}, {0.25, 1.0})}};
    grouped_patch patch = group_normalize(parent, centers, nbrs, sp, sigma_scope::per_sample, 1e-5);
    for (std::int64_t r = 0; r < patch.shifted.rows(); ++r) {
        CHECK(patch.shifted.at(r, 0) ==
              doctest::Approx(2.0 * patch.normalized.at(r, 0) + 0.25).epsilon(1e-15));
        CHECK(patch.shifted.at(r, 1) ==
              doctest::Approx(-0.5 * patch.normalized.at(r, 1) + 1.0).epsilon(1e-15));
    }
}

TEST_CASE("aggregate_group matches the residual-MLP oracle and ignores neighbor order") {
    rng_stream rng(26, "grouping/mlp");
    const std::int64_t d = 3, k = 4, n = 5;
    branch_features parent = random_branch(rng, 20, d);
    std::vector<std::int64_t> centers = farthest_point_sample(parent.points, n);
    neighbor_table nbrs = knn_search(parent.points, centers, k);
    grouped_patch patch =
        group_normalize(parent, centers, nbrs, identity_shift(d), sigma_scope::per_sample, 1e-5);

    auto mk = [&](const char* name, std::int64_t r, std::int64_t c) {
        std::vector<double> v(static_cast<std::size_t>(r * c));
        for (double& x : v) x = rng.uniform(-0.7, 0.7);
        return parameter{name, tensor::from_values({r, c}, std::move(v))};
    };
    auto mkb = [&](const char* name, std::int64_t c) {
        std::vector<double> v(static_cast<std::size_t>(c));
        for (double& x : v) x = rng.uniform(-0.3, 0.3);
        return parameter{name, tensor::from_values({c}, std::move(v))};
    };
    group_mlp_params mlp{mk("in_w", d, 2 * d),     mkb("in_b", 2 * d),
                         mk("h1_w", 2 * d, 2 * d), mkb("h1_b", 2 * d),
                         mk("h2_w", 2 * d, 2 * d), mkb("h2_b", 2 * d)};

    branch_features out = aggregate_group(patch, mlp);
    REQUIRE(out.count() == n);
    REQUIRE(out.tokens.cols() == 2 * d);
    CHECK(out.points == std::vector<point3>(patch.centers));

    // Straight-line oracle: per neighbor row y0 = xW+b; y = relu(y0 +
    // h2(relu(h1(y0)))); per group max over the k rows.
    auto apply_row = [&](const std::vector<double>& x, const parameter& w, const parameter& b) {
        const std::int64_t rr = w.value.rows(), cc = w.value.cols();
        std::vector<double> y(static_cast<std::size_t>(cc));
        for (std::int64_t j = 0; j < cc; ++j) {
            double acc = b.value.values()[static_cast<std::size_t>(j)];
            for (std::int64_t t = 0; t < rr; ++t)
                acc += x[static_cast<std::size_t>(t)] * w.value.at(t, j);
            y[static_cast<std::size_t>(j)] = acc;
        }
        return y;
    };
    for (std::int64_t g = 0; g < n; ++g)
        for (std::int64_t c = 0; c < 2 * d; ++c) {
            double mx = -std::numeric_limits<double>::infinity();
            for (std::int64_t t = 0; t < k; ++t) {
                std::vector<double> x(static_cast<std::size_t>(d));
                for (std::int64_t j = 0; j < d; ++j) x[static_cast<std::size_t>(j)] = patch.shifted.at(g * k + t, j);
                std::vector<double> y0 = apply_row(x, mlp.in_w, mlp.in_b);
                std::vector<double> h1 = apply_row(y0, mlp.h1_w, mlp.h1_b);
                for (double& v : h1) v = std::max(0.0, v);
                std::vector<double> r = apply_row(h1, mlp.h2_w, mlp.h2_b);
                const double y = std::max(0.0, y0[static_cast<std::size_t>(c)] + r[static_cast<std::size_t>(c)]);
                mx = std::max(mx, y);
            }
            CHECK(out.tokens.at(g, c) == doctest::Approx(mx).epsilon(1e-13));
        }

    // Permuting rows inside each group leaves the pooled output bit-identical.
    grouped_patch permuted = patch;
    {
        std::vector<double> v = patch.shifted.values();
        std::vector<double> pv(v.size());
        rng_stream prng(27, "grouping/permute");
        for (std::int64_t g = 0; g < n; ++g) {
            std::vector<std::int64_t> order(static_cast<std::size_t>(k));
            std::iota(order.begin(), order.end(), std::int64_t{0});
            prng.shuffle(order);
            for (std::int64_t t = 0; t < k; ++t)
                std::memcpy(&pv[static_cast<std::size_t>((g * k + t) * d)],
                            &v[static_cast<std::size_t>((g * k + order[static_cast<std::size_t>(t)]) * d)],
                            static_cast<std::size_t>(d) * sizeof(double));
        }
        permuted.shifted = tensor::from_values({n * k, d}, std::move(pv));
    }
    branch_features out2 = aggregate_group(permuted, mlp);
    CHECK(std::memcmp(out.tokens.values().data(), out2.tokens.values().data(),
                      static_cast<std::size_t>(out.tokens.numel()) * sizeof(double)) == 0);
}

TEST_CASE("run_stage halves the points and doubles the channels") {
    rng_stream rng(28, "grouping/stage");
    branch_features level = random_branch(rng, 32, 4);
    group_stage_params params{
        identity_shift(4),
        group_mlp_params{parameter{"in_w", tensor::full({4, 8}, 0.1)},
                         parameter{"in_b", tensor::zeros({8})},
                         parameter{"h1_w", tensor::full({8, 8}, 0.05)},
                         parameter{"h1_b", tensor::zeros({8})},
                         parameter{"h2_w", tensor::full({8, 8}, 0.05)},
                         parameter{"h2_b", tensor::zeros({8})}}};
    stage_config cfg;
    cfg.d_ratio = 2;
    cfg.k = 6;
    branch_features next = run_stage(level, cfg, params);
    CHECK(next.count() == 16);
    CHECK(next.tokens.rows() == 16);
    CHECK(next.tokens.cols() == 8);

    // Two chained stages: 32 -> 16 -> 8 points, 4 -> 8 -> 16 channels.
    group_stage_params params2{
        identity_shift(8),
        group_mlp_params{parameter{"in_w", tensor::full({8, 16}, 0.1)},
                         parameter{"in_b", tensor::zeros({16})},
                         parameter{"h1_w", tensor::full({16, 16}, 0.05)},
                         parameter{"h1_b", tensor::zeros({16})},
                         parameter{"h2_w", tensor::full({16, 16}, 0.05)},
                         parameter{"h2_b", tensor::zeros({16})}}};
    branch_features third = run_stage(next, cfg, params2);
    CHECK(third.count() == 8);
    CHECK(third.tokens.cols() == 16);

    // k larger than the parent count is clamped, not an error.
    stage_config big;
    big.d_ratio = 2;
    big.k = 1000;
    CHECK_NOTHROW(run_stage(level, big, params));
}

TEST_CASE("embed_points is the plain linear map coords*W + b") {
    std::vector<point3> pts = {{1, 2, 3}, {-0.5, 0, 4}};
    parameter w{"w", tensor::from_values({3, 2}, {1, 0, 0, 1, 1, 1})};
    parameter b{"b", tensor::from_values({2}, {0.5, -1.0})};
    branch_features e = embed_points(pts, w, b);
    CHECK(e.tokens.at(0, 0) == doctest::Approx(1 + 3 + 0.5).epsilon(1e-15));
    CHECK(e.tokens.at(0, 1) == doctest::Approx(2 + 3 - 1.0).epsilon(1e-15));
    CHECK(e.tokens.at(1, 0) == doctest::Approx(-0.5 + 4 + 0.5).epsilon(1e-15));
    CHECK(e.points == pts);
}
