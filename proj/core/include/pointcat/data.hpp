#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "pointcat/geometry.hpp"
#include "pointcat/rng.hpp"

namespace pointcat {

// A labeled collection of equally-sized point clouds plus its vocabularies.
struct dataset {
    std::vector<point_cloud> samples;
    std::vector<std::string> class_names;
    std::vector<std::string> part_names;   // empty unless part labels exist
    std::vector<int> part_category;        // part id -> owning category (parallel to part_names)
    std::string split;                     // informational tag ("train"/"test"/"")

    std::int64_t size() const { return static_cast<std::int64_t>(samples.size()); }
    std::int64_t num_classes() const { return static_cast<std::int64_t>(class_names.size()); }
    std::int64_t num_parts() const { return static_cast<std::int64_t>(part_names.size()); }
};

// --- XYZ text format ------------------------------------------------------
// One point per line: x y z [attr...]; `#` starts a comment line; extra
// numeric fields become per-point attributes (count must be consistent).

point_cloud parse_xyz(const std::string& text);

// Emits with enough digits (%.17g) that parse_xyz(write_xyz(c)) is bit-exact.
std::string write_xyz(const point_cloud& cloud);

// --- OFF mesh format --------------------------------------------------------

struct triangle_mesh {
    std::vector<point3> vertices;
    std::vector<std::array<std::int64_t, 3>> faces;
};

// Tolerates the common header where "OFF" is fused with the counts on one
// line; faces with more than 3 vertices are fan-triangulated; trailing
// numbers on vertex/face lines (colors) are ignored. Malformed input raises
// parse_error naming the line.
triangle_mesh parse_off(const std::string& text);

// n points sampled proportionally to triangle area with uniform barycentric
// coordinates, then centered on the centroid and scaled to unit max radius.
point_cloud sample_mesh_surface(const triangle_mesh& mesh, std::int64_t n, rng_stream& rng);

// --- Synthetic shapes -------------------------------------------------------
// Desk-scale stand-in dataset: analytic sphere / cube / cylinder surfaces with
// a random rotation per sample. With `with_parts`, points carry part labels
// (sphere: 1 part, cube: 6 faces, cylinder: cap/side) for segmentation tests.

dataset synth_shapes(std::int64_t per_class, std::int64_t n_points, std::uint64_t seed,
                     bool with_parts = false);

// --- Augmentation -----------------------------------------------------------

struct augment_config {
    double scale_lo = 0.8;
    double scale_hi = 1.2;
    double shift_range = 0.2;
    double max_dropout = 0.875;  // dropout ratio is drawn from U[0, max_dropout]
};

struct augment_draw {
    point3 scale{1.0, 1.0, 1.0};
    point3 shift{0.0, 0.0, 0.0};
    double drop_ratio = 0.0;
};

augment_draw draw_augment(rng_stream& rng, const augment_config& cfg);

// Applies the draw: per-axis scale, per-axis shift, then the first
// floor(drop_ratio * N) points are replaced by duplicates of the first kept
// point (N is preserved). Labels and attributes pass through.
point_cloud apply_augment(const point_cloud& cloud, const augment_draw& d);

point_cloud augment_cloud(const point_cloud& cloud, rng_stream& rng,
                          const augment_config& cfg = {});

// --- Splits -----------------------------------------------------------------

// Stratified train/test split, deterministic under the seed. Classes with
// fewer than 2 samples trigger a warning (appended to *warnings) and a global
// unstratified split. Per-class train counts use largest-remainder rounding so
// the total equals round(N * train_fraction).
std::pair<dataset, dataset> split_dataset(const dataset& ds, double train_fraction,
                                          std::uint64_t seed,
                                          std::vector<std::string>* warnings = nullptr);

// --- Manifest ---------------------------------------------------------------
// One sample per line: `path,label[,split]`.

struct manifest_entry {
    std::string path;
    int label = 0;
    std::string split;  // "", "train" or "test"
};

std::vector<manifest_entry> parse_manifest(const std::string& text);

// Loads every entry (OFF meshes are surface-sampled, XYZ clouds resampled to
// exactly n_points using a deterministic per-sample stream), splitting into
// train/test by the entries' tags; untagged entries land in train.
std::pair<dataset, dataset> load_manifest(const std::string& manifest_path, std::int64_t n_points,
                                          std::uint64_t seed);

}  // namespace pointcat
