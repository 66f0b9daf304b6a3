#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "pointcat/errors.hpp"

namespace pointcat {

using point3 = std::array<double, 3>;

// A point set with optional per-point attributes and labels. attrs is
// row-major size() x attr_dim.
struct point_cloud {
    std::vector<point3> coords;
    std::vector<double> attrs;
    std::int64_t attr_dim = 0;
    std::optional<int> label;       // shape-level class
    std::optional<int> category;    // segmentation category
    std::vector<int> point_labels;  // per-point part ids (empty if none)

    std::int64_t size() const { return static_cast<std::int64_t>(coords.size()); }
};

// Squared Euclidean distance. All sampling and neighbor decisions in this
// library compare squared distances; no square roots are taken, so exact
// brute-force reimplementations agree bit-for-bit.
double dist2(const point3& a, const point3& b);

// Lexicographic (x, y, z) comparison.
bool lex_less(const point3& a, const point3& b);

// Checks N >= 1, finite coordinates/attributes, consistent attr/label sizes.
// strict_distinct additionally rejects duplicate coordinates.
void validate_cloud(const point_cloud& cloud, bool strict_distinct);

// Deterministic farthest point sampling of n points. The seed is the
// lexicographically smallest point (ties: lowest index); each next pick
// maximizes the squared distance to the selected set, with ties broken by
// lexicographic coordinates and then by original index. Returns indices in
// selection order.
std::vector<std::int64_t> farthest_point_sample(const std::vector<point3>& pts, std::int64_t n);

struct neighbor_table {
    std::int64_t k = 0;
    std::vector<std::int64_t> idx;  // row-major n_queries x k

    std::int64_t rows() const {
        return k == 0 ? 0 : static_cast<std::int64_t>(idx.size()) / k;
    }
    std::int64_t at(std::int64_t row, std::int64_t col) const { return idx[row * k + col]; }
};

// k nearest neighbors among `pts` for each query position. Rows are sorted by
// (squared distance, lexicographic coordinates, index) ascending, so results
// are unique even with distance ties. Requires 1 <= k <= pts.size().
neighbor_table knn_points(const std::vector<point3>& pts, const std::vector<point3>& queries,
                          std::int64_t k);

// Same, with queries given as indices into `pts` (each query's first neighbor
// is then the query point itself at distance 0).
neighbor_table knn_search(const std::vector<point3>& pts, const std::vector<std::int64_t>& centers,
                          std::int64_t k);

// Permutation that sorts points by (lexicographic coordinates, index). With
// strict=true duplicate coordinates raise an error; non-strict ordering is
// used to canonicalize model inputs, where duplicates (e.g. from dropout
// augmentation) are legitimate.
std::vector<std::int64_t> canonical_order(const std::vector<point3>& pts, bool strict);

// Reorders coords, attrs and point labels by `order` (out[i] = in[order[i]]).
point_cloud apply_order(const point_cloud& cloud, const std::vector<std::int64_t>& order);

}  // namespace pointcat
