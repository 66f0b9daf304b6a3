#include "pointcat/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace pointcat {

double dist2(const point3& a, const point3& b) {
    const double dx = a[0] - b[0];
    const double dy = a[1] - b[1];
    const double dz = a[2] - b[2];
    return dx * dx + dy * dy + dz * dz;
}

bool lex_less(const point3& a, const point3& b) {
    if (a[0] != b[0]) return a[0] < b[0];
    if (a[1] != b[1]) return a[1] < b[1];
    return a[2] < b[2];
}

void validate_cloud(const point_cloud& cloud, bool strict_distinct) {
    if (cloud.coords.empty()) throw shape_error("point cloud is empty");
    for (std::size_t i = 0; i < cloud.coords.size(); ++i)
        for (int a = 0; a < 3; ++a)
            if (!std::isfinite(cloud.coords[i][a]))
                throw numeric_error("non-finite coordinate at point " + std::to_string(i));
    if (cloud.attr_dim < 0) throw shape_error("negative attr_dim");
    if (static_cast<std::int64_t>(cloud.attrs.size()) != cloud.size() * cloud.attr_dim)
        throw shape_error("attrs size " + std::to_string(cloud.attrs.size()) + " != " +
                          std::to_string(cloud.size()) + " x " + std::to_string(cloud.attr_dim));
    for (std::size_t i = 0; i < cloud.attrs.size(); ++i)
        if (!std::isfinite(cloud.attrs[i]))
            throw numeric_error("non-finite attribute at flat index " + std::to_string(i));
    if (!cloud.point_labels.empty() &&
        static_cast<std::int64_t>(cloud.point_labels.size()) != cloud.size())
        throw shape_error("point_labels size " + std::to_string(cloud.point_labels.size()) +
                          " != point count " + std::to_string(cloud.size()));
    if (strict_distinct) {
        std::vector<point3> sorted = cloud.coords;
        std::sort(sorted.begin(), sorted.end(), lex_less);
        for (std::size_t i = 1; i < sorted.size(); ++i)
            if (sorted[i] == sorted[i - 1])
                throw shape_error("duplicate point (" + std::to_string(sorted[i][0]) + ", " +
                                  std::to_string(sorted[i][1]) + ", " + std::to_string(sorted[i][2]) +
                                  ")");
    }
}

std::vector<std::int64_t> farthest_point_sample(const std::vector<point3>& pts, std::int64_t n) {
    const std::int64_t total = static_cast<std::int64_t>(pts.size());
    if (total == 0) throw shape_error("farthest_point_sample: empty point set");
    if (n < 1 || n > total)
        throw shape_error("farthest_point_sample: n=" + std::to_string(n) + " outside [1," +
                          std::to_string(total) + "]");

    // Seed: lexicographically smallest point, lowest index on exact ties.
    std::int64_t seed = 0;
    for (std::int64_t i = 1; i < total; ++i)
        if (lex_less(pts[i], pts[seed])) seed = i;

    std::vector<std::int64_t> selected;
    selected.reserve(static_cast<std::size_t>(n));
    selected.push_back(seed);

    std::vector<double> min_d2(static_cast<std::size_t>(total));
    for (std::int64_t i = 0; i < total; ++i) min_d2[i] = dist2(pts[i], pts[seed]);
    std::vector<char> taken(static_cast<std::size_t>(total), 0);
    taken[seed] = 1;

    while (static_cast<std::int64_t>(selected.size()) < n) {
        std::int64_t best = -1;
        for (std::int64_t i = 0; i < total; ++i) {
            if (taken[i]) continue;
            if (best < 0) {
                best = i;
                continue;
            }
            if (min_d2[i] > min_d2[best]) {
                best = i;
            } else if (min_d2[i] == min_d2[best]) {
                // Tie on distance: lexicographic coordinates, then index.
                if (lex_less(pts[i], pts[best])) best = i;
                // equal coords: keep lower index (i > best already)
            }
        }
        taken[best] = 1;
        selected.push_back(best);
        for (std::int64_t i = 0; i < total; ++i) {
            if (taken[i]) continue;
            const double d = dist2(pts[i], pts[best]);
            if (d < min_d2[i]) min_d2[i] = d;
        }
    }
    return selected;
}

neighbor_table knn_points(const std::vector<point3>& pts, const std::vector<point3>& queries,
                          std::int64_t k) {
    const std::int64_t total = static_cast<std::int64_t>(pts.size());
    if (queries.empty()) throw shape_error("knn_points: no queries");
    if (k < 1 || k > total)
        throw shape_error("knn_points: k=" + std::to_string(k) + " outside [1," +
                          std::to_string(total) + "]");

    neighbor_table table;
    table.k = k;
    table.idx.resize(queries.size() * static_cast<std::size_t>(k));

    struct cand {
        double d2;
        std::int64_t i;
    };
    std::vector<cand> cands(static_cast<std::size_t>(total));
    for (std::size_t q = 0; q < queries.size(); ++q) {
        for (std::int64_t i = 0; i < total; ++i) cands[i] = {dist2(pts[i], queries[q]), i};
        auto cmp = [&pts](const cand& a, const cand& b) {
            if (a.d2 != b.d2) return a.d2 < b.d2;
            if (pts[a.i] != pts[b.i]) return lex_less(pts[a.i], pts[b.i]);
            return a.i < b.i;
        };
        std::partial_sort(cands.begin(), cands.begin() + k, cands.end(), cmp);
        for (std::int64_t j = 0; j < k; ++j) table.idx[q * k + j] = cands[j].i;
    }
    return table;
}

neighbor_table knn_search(const std::vector<point3>& pts, const std::vector<std::int64_t>& centers,
                          std::int64_t k) {
    std::vector<point3> queries;
    queries.reserve(centers.size());
    for (std::int64_t c : centers) {
        if (c < 0 || c >= static_cast<std::int64_t>(pts.size()))
            throw index_error("knn_search: center index " + std::to_string(c) + " outside [0," +
                              std::to_string(pts.size()) + ")");
        queries.push_back(pts[c]);
    }
    return knn_points(pts, queries, k);
}

std::vector<std::int64_t> canonical_order(const std::vector<point3>& pts, bool strict) {
    std::vector<std::int64_t> order(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) order[i] = static_cast<std::int64_t>(i);
    std::sort(order.begin(), order.end(), [&pts](std::int64_t a, std::int64_t b) {
        if (pts[a] != pts[b]) return lex_less(pts[a], pts[b]);
        return a < b;
    });
    if (strict) {
        for (std::size_t i = 1; i < order.size(); ++i)
            if (pts[order[i]] == pts[order[i - 1]])
                throw shape_error("canonical_order: duplicate point at original indices " +
                                  std::to_string(order[i - 1]) + " and " + std::to_string(order[i]));
    }
    return order;
}

point_cloud apply_order(const point_cloud& cloud, const std::vector<std::int64_t>& order) {
    if (static_cast<std::int64_t>(order.size()) != cloud.size())
        throw shape_error("apply_order: permutation size mismatch");
    point_cloud out;
    out.attr_dim = cloud.attr_dim;
    out.label = cloud.label;
    out.category = cloud.category;
    out.coords.reserve(order.size());
    for (std::int64_t src : order) {
        if (src < 0 || src >= cloud.size())
            throw index_error("apply_order: index " + std::to_string(src) + " out of range");
        out.coords.push_back(cloud.coords[src]);
    }
    if (cloud.attr_dim > 0) {
        out.attrs.resize(cloud.attrs.size());
        for (std::size_t i = 0; i < order.size(); ++i)
            std::copy(cloud.attrs.begin() + order[i] * cloud.attr_dim,
                      cloud.attrs.begin() + (order[i] + 1) * cloud.attr_dim,
                      out.attrs.begin() + static_cast<std::int64_t>(i) * cloud.attr_dim);
    }
    if (!cloud.point_labels.empty()) {
        out.point_labels.reserve(order.size());
        for (std::int64_t src : order) out.point_labels.push_back(cloud.point_labels[src]);
    }
    return out;
}

}  // namespace pointcat
