#include "pointcat/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>

namespace pointcat {

namespace {

constexpr double kPi = 3.14159265358979323846;

bool is_blank_or_comment(const std::string& line) {
    for (char ch : line) {
        if (ch == '#') return true;
        if (!std::isspace(static_cast<unsigned char>(ch))) return false;
    }
    return true;
}

std::vector<std::string> split_lines(const std::string& text) {
    std::vector<std::string> lines;
    std::string current;
    for (char ch : text) {
        if (ch == '\n') {
            lines.push_back(std::move(current));
            current.clear();
        } else if (ch != '\r') {
            current.push_back(ch);
        }
    }
    if (!current.empty()) lines.push_back(std::move(current));
    return lines;
}

// Parses every whitespace-separated token on the line as a double. strtod is
// used instead of std::stod because stod throws out_of_range for subnormal
// values such as 5e-324, which are exactly representable and round-trip
// through our own writer. Values that overflow to infinity are rejected;
// subnormals (strtod's underflow case) are kept as parsed.
std::vector<double> parse_number_line(const std::string& line, std::int64_t line_no,
                                      const char* what) {
    std::vector<double> out;
    std::istringstream in(line);
    std::string token;
    while (in >> token) {
        if (!token.empty() && token[0] == '#') break;  // trailing comment
        char* end = nullptr;
        const double v = std::strtod(token.c_str(), &end);
        if (end != token.c_str() + token.size() || end == token.c_str())
            throw parse_error(std::string(what) + ": line " + std::to_string(line_no) +
                              ": not a number: '" + token + "'");
        if (std::isinf(v))
            throw parse_error(std::string(what) + ": line " + std::to_string(line_no) +
                              ": number out of range: '" + token + "'");
        out.push_back(v);
    }
    return out;
}

}  // namespace

point_cloud parse_xyz(const std::string& text) {
    point_cloud cloud;
    const std::vector<std::string> lines = split_lines(text);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const std::int64_t line_no = static_cast<std::int64_t>(i) + 1;
        if (is_blank_or_comment(lines[i])) continue;
        std::vector<double> nums = parse_number_line(lines[i], line_no, "xyz");
        if (nums.size() < 3)
            throw parse_error("xyz: line " + std::to_string(line_no) + ": expected at least 3 numbers, got " +
                              std::to_string(nums.size()));
        const std::int64_t extra = static_cast<std::int64_t>(nums.size()) - 3;
        if (cloud.coords.empty()) {
            cloud.attr_dim = extra;
        } else if (extra != cloud.attr_dim) {
            throw parse_error("xyz: line " + std::to_string(line_no) + ": inconsistent attribute count (" +
                              std::to_string(extra) + " vs " + std::to_string(cloud.attr_dim) + ")");
        }
        cloud.coords.push_back({nums[0], nums[1], nums[2]});
        for (std::int64_t a = 0; a < extra; ++a) cloud.attrs.push_back(nums[3 + a]);
    }
    if (cloud.coords.empty()) throw parse_error("xyz: no points");
    return cloud;
}

std::string write_xyz(const point_cloud& cloud) {
    std::string out;
    char buf[64];
    for (std::size_t i = 0; i < cloud.coords.size(); ++i) {
        for (int a = 0; a < 3; ++a) {
            std::snprintf(buf, sizeof(buf), "%.17g", cloud.coords[i][a]);
            if (a) out.push_back(' ');
            out += buf;
        }
        for (std::int64_t a = 0; a < cloud.attr_dim; ++a) {
            std::snprintf(buf, sizeof(buf), "%.17g",
                          cloud.attrs[static_cast<std::size_t>(i) * cloud.attr_dim + a]);
            out.push_back(' ');
            out += buf;
        }
        out.push_back('\n');
    }
    return out;
}

namespace {

// Line cursor over an OFF file that skips blanks and comments.
struct off_cursor {
    const std::vector<std::string>& lines;
    std::size_t next = 0;

    // Returns the next content line, or throws with the expected item name.
    std::pair<const std::string*, std::int64_t> take(const char* expecting) {
        while (next < lines.size() && is_blank_or_comment(lines[next])) ++next;
        if (next >= lines.size())
            throw parse_error("off: unexpected end of file, expecting " + std::string(expecting) +
                              " (after line " + std::to_string(lines.size()) + ")");
        const std::string* line = &lines[next];
        return {line, static_cast<std::int64_t>(next++) + 1};
    }
};

std::int64_t to_count(double v, std::int64_t line_no, const char* what) {
    if (v < 0 || v != std::floor(v) || v > 5e7)
        throw parse_error("off: line " + std::to_string(line_no) + ": implausible " + what + " count");
    return static_cast<std::int64_t>(v);
}

}  // namespace

triangle_mesh parse_off(const std::string& text) {
    const std::vector<std::string> lines = split_lines(text);
    off_cursor cur{lines};

    auto [header, header_line] = cur.take("OFF header");
    std::istringstream head_in(*header);
    std::string magic;
    head_in >> magic;
    if (magic.size() < 3 || magic.compare(0, 3, "OFF") != 0)
        throw parse_error("off: line " + std::to_string(header_line) + ": missing OFF header");

    std::vector<double> counts;
    if (magic.size() > 3) {
        // Header fused with the first count, e.g. "OFF490 518 0".
        std::size_t used = 0;
        double first = 0.0;
        try {
            first = std::stod(magic.substr(3), &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != magic.size() - 3)
            throw parse_error("off: line " + std::to_string(header_line) + ": malformed OFF header '" +
                              magic + "'");
        counts.push_back(first);
    }
    {
        std::string rest;
        std::getline(head_in, rest);
        for (double v : parse_number_line(rest, header_line, "off")) counts.push_back(v);
    }
    if (counts.empty()) {
        auto [count_line, count_line_no] = cur.take("vertex/face counts");
        counts = parse_number_line(*count_line, count_line_no, "off");
        header_line = count_line_no;
    }
    if (counts.size() < 2)
        throw parse_error("off: line " + std::to_string(header_line) +
                          ": expected vertex and face counts");
    const std::int64_t nv = to_count(counts[0], header_line, "vertex");
    const std::int64_t nf = to_count(counts[1], header_line, "face");

    triangle_mesh mesh;
    mesh.vertices.reserve(static_cast<std::size_t>(nv));
    for (std::int64_t i = 0; i < nv; ++i) {
        auto [line, line_no] = cur.take("vertex");
        std::vector<double> nums = parse_number_line(*line, line_no, "off");
        if (nums.size() < 3)
            throw parse_error("off: line " + std::to_string(line_no) + ": vertex needs 3 coordinates, got " +
                              std::to_string(nums.size()));
        mesh.vertices.push_back({nums[0], nums[1], nums[2]});  // extras (colors) ignored
    }
    for (std::int64_t f = 0; f < nf; ++f) {
        auto [line, line_no] = cur.take("face");
        std::vector<double> nums = parse_number_line(*line, line_no, "off");
        if (nums.empty())
            throw parse_error("off: line " + std::to_string(line_no) + ": empty face record");
        const std::int64_t m = to_count(nums[0], line_no, "face-vertex");
        if (m < 3)
            throw parse_error("off: line " + std::to_string(line_no) + ": non-polygonal face with " +
                              std::to_string(m) + " vertices");
        if (static_cast<std::int64_t>(nums.size()) < 1 + m)
            throw parse_error("off: line " + std::to_string(line_no) + ": face lists " + std::to_string(m) +
                              " vertices but has " + std::to_string(nums.size() - 1));
        std::vector<std::int64_t> idx(static_cast<std::size_t>(m));
        for (std::int64_t t = 0; t < m; ++t) {
            const double v = nums[static_cast<std::size_t>(1 + t)];
            if (v != std::floor(v) || v < 0 || v >= static_cast<double>(nv))
                throw parse_error("off: line " + std::to_string(line_no) + ": vertex index " +
                                  std::to_string(v) + " out of range [0," + std::to_string(nv) + ")");
            idx[static_cast<std::size_t>(t)] = static_cast<std::int64_t>(v);
        }
        for (std::int64_t t = 1; t + 1 < m; ++t)  // fan triangulation
            mesh.faces.push_back({idx[0], idx[static_cast<std::size_t>(t)],
                                  idx[static_cast<std::size_t>(t + 1)]});
    }
    return mesh;
}

point_cloud sample_mesh_surface(const triangle_mesh& mesh, std::int64_t n, rng_stream& rng) {
    if (n < 1) throw contract_error("sample_mesh_surface: n must be >= 1");
    if (mesh.faces.empty()) throw parse_error("degenerate mesh: no faces");

    std::vector<double> cumulative(mesh.faces.size());
    double total = 0.0;
    for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
        const point3& a = mesh.vertices[static_cast<std::size_t>(mesh.faces[f][0])];
        const point3& b = mesh.vertices[static_cast<std::size_t>(mesh.faces[f][1])];
        const point3& c = mesh.vertices[static_cast<std::size_t>(mesh.faces[f][2])];
        const point3 u{b[0] - a[0], b[1] - a[1], b[2] - a[2]};
        const point3 v{c[0] - a[0], c[1] - a[1], c[2] - a[2]};
        const point3 cx{u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2],
                        u[0] * v[1] - u[1] * v[0]};
        total += 0.5 * std::sqrt(cx[0] * cx[0] + cx[1] * cx[1] + cx[2] * cx[2]);
        cumulative[f] = total;
    }
    if (!(total > 0.0)) throw parse_error("degenerate mesh: zero total surface area");

    point_cloud cloud;
    cloud.coords.resize(static_cast<std::size_t>(n));
    for (auto& p : cloud.coords) {
        const double pick = rng.uniform() * total;
        const std::size_t f = static_cast<std::size_t>(
            std::upper_bound(cumulative.begin(), cumulative.end(), pick) - cumulative.begin());
        const auto& face = mesh.faces[std::min(f, mesh.faces.size() - 1)];
        const point3& a = mesh.vertices[static_cast<std::size_t>(face[0])];
        const point3& b = mesh.vertices[static_cast<std::size_t>(face[1])];
        const point3& c = mesh.vertices[static_cast<std::size_t>(face[2])];
        const double su = std::sqrt(rng.uniform());
        const double r2 = rng.uniform();
        for (int axis = 0; axis < 3; ++axis)
            p[axis] = (1.0 - su) * a[axis] + su * (1.0 - r2) * b[axis] + su * r2 * c[axis];
    }

    point3 centroid{0.0, 0.0, 0.0};
    for (const auto& p : cloud.coords)
        for (int axis = 0; axis < 3; ++axis) centroid[axis] += p[axis];
    for (int axis = 0; axis < 3; ++axis) centroid[axis] /= static_cast<double>(n);
    double max_r2 = 0.0;
    for (auto& p : cloud.coords) {
        for (int axis = 0; axis < 3; ++axis) p[axis] -= centroid[axis];
        max_r2 = std::max(max_r2, p[0] * p[0] + p[1] * p[1] + p[2] * p[2]);
    }
    if (!(max_r2 > 0.0)) throw parse_error("degenerate mesh: all sampled points coincide");
    const double inv_r = 1.0 / std::sqrt(max_r2);
    for (auto& p : cloud.coords)
        for (int axis = 0; axis < 3; ++axis) p[axis] *= inv_r;
    return cloud;
}

namespace {

using rot3 = std::array<std::array<double, 3>, 3>;

// Uniform random rotation (Shoemake's quaternion method).
rot3 random_rotation(rng_stream& rng) {
    const double u1 = rng.uniform(), u2 = rng.uniform(), u3 = rng.uniform();
    const double qx = std::sqrt(1.0 - u1) * std::sin(2.0 * kPi * u2);
    const double qy = std::sqrt(1.0 - u1) * std::cos(2.0 * kPi * u2);
    const double qz = std::sqrt(u1) * std::sin(2.0 * kPi * u3);
    const double qw = std::sqrt(u1) * std::cos(2.0 * kPi * u3);
    return rot3{{{1 - 2 * (qy * qy + qz * qz), 2 * (qx * qy - qz * qw), 2 * (qx * qz + qy * qw)},
                 {2 * (qx * qy + qz * qw), 1 - 2 * (qx * qx + qz * qz), 2 * (qy * qz - qx * qw)},
                 {2 * (qx * qz - qy * qw), 2 * (qy * qz + qx * qw), 1 - 2 * (qx * qx + qy * qy)}}};
}

point3 rotate(const rot3& r, const point3& p) {
    return {r[0][0] * p[0] + r[0][1] * p[1] + r[0][2] * p[2],
            r[1][0] * p[0] + r[1][1] * p[1] + r[1][2] * p[2],
            r[2][0] * p[0] + r[2][1] * p[1] + r[2][2] * p[2]};
}

// Part id layout: sphere {0}; cube faces {1..6}; cylinder {7=cap, 8=side}.
point3 sample_sphere(rng_stream& rng, int* part) {
    const double z = rng.uniform(-1.0, 1.0);
    const double phi = rng.uniform(0.0, 2.0 * kPi);
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    if (part) *part = 0;
    return {r * std::cos(phi), r * std::sin(phi), z};
}

point3 sample_cube(rng_stream& rng, int* part) {
    const int face = static_cast<int>(rng.uniform_index(6));
    const double u = rng.uniform(-1.0, 1.0);
    const double v = rng.uniform(-1.0, 1.0);
    if (part) *part = 1 + face;
    const double s = (face % 2 == 0) ? 1.0 : -1.0;
    switch (face / 2) {
        case 0: return {s, u, v};
        case 1: return {u, s, v};
        default: return {u, v, s};
    }
}

point3 sample_cylinder(rng_stream& rng, int* part) {
    // Radius 1, height 2: side area 4*pi, each cap pi.
    const double pick = rng.uniform() * 6.0 * kPi;
    if (pick < 4.0 * kPi) {
        const double phi = rng.uniform(0.0, 2.0 * kPi);
        const double z = rng.uniform(-1.0, 1.0);
        if (part) *part = 8;
        return {std::cos(phi), std::sin(phi), z};
    }
    const double z = pick < 5.0 * kPi ? -1.0 : 1.0;
    const double r = std::sqrt(rng.uniform());
    const double phi = rng.uniform(0.0, 2.0 * kPi);
    if (part) *part = 7;
    return {r * std::cos(phi), r * std::sin(phi), z};
}

}  // namespace

dataset synth_shapes(std::int64_t per_class, std::int64_t n_points, std::uint64_t seed,
                     bool with_parts) {
    if (n_points < 8) throw contract_error("synth_shapes: n_points must be >= 8");
    if (per_class < 1) throw contract_error("synth_shapes: per_class must be >= 1");

    dataset ds;
    ds.class_names = {"sphere", "cube", "cylinder"};
    if (with_parts) {
        ds.part_names = {"sphere_surface", "cube_face0", "cube_face1", "cube_face2",
                         "cube_face3",     "cube_face4", "cube_face5", "cylinder_cap",
                         "cylinder_side"};
        ds.part_category = {0, 1, 1, 1, 1, 1, 1, 2, 2};
    }

    for (int cls = 0; cls < 3; ++cls) {
        for (std::int64_t s = 0; s < per_class; ++s) {
            rng_stream rng(seed, "synth/" + ds.class_names[static_cast<std::size_t>(cls)],
                           static_cast<std::uint64_t>(s));
            const rot3 rot = random_rotation(rng);
            point_cloud cloud;
            cloud.coords.resize(static_cast<std::size_t>(n_points));
            if (with_parts) cloud.point_labels.resize(static_cast<std::size_t>(n_points));
            for (std::int64_t i = 0; i < n_points; ++i) {
                int part = 0;
                point3 p;
                switch (cls) {
                    case 0: p = sample_sphere(rng, &part); break;
                    case 1: p = sample_cube(rng, &part); break;
                    default: p = sample_cylinder(rng, &part); break;
                }
                cloud.coords[static_cast<std::size_t>(i)] = rotate(rot, p);
                if (with_parts) cloud.point_labels[static_cast<std::size_t>(i)] = part;
            }
            cloud.label = cls;
            cloud.category = cls;
            ds.samples.push_back(std::move(cloud));
        }
    }
    return ds;
}

augment_draw draw_augment(rng_stream& rng, const augment_config& cfg) {
    augment_draw d;
    for (int a = 0; a < 3; ++a) d.scale[a] = rng.uniform(cfg.scale_lo, cfg.scale_hi);
    for (int a = 0; a < 3; ++a) d.shift[a] = rng.uniform(-cfg.shift_range, cfg.shift_range);
    d.drop_ratio = cfg.max_dropout > 0.0 ? rng.uniform(0.0, cfg.max_dropout) : 0.0;
    return d;
}

point_cloud apply_augment(const point_cloud& cloud, const augment_draw& d) {
    point_cloud out = cloud;
    for (auto& p : out.coords)
        for (int a = 0; a < 3; ++a) p[a] = p[a] * d.scale[a] + d.shift[a];
    const std::int64_t n = out.size();
    const std::int64_t drop = std::min<std::int64_t>(
        n - 1, static_cast<std::int64_t>(std::floor(d.drop_ratio * static_cast<double>(n))));
    if (drop > 0) {
        for (std::int64_t i = 0; i < drop; ++i) {
            out.coords[static_cast<std::size_t>(i)] = out.coords[static_cast<std::size_t>(drop)];
            if (!out.point_labels.empty())
                out.point_labels[static_cast<std::size_t>(i)] =
                    out.point_labels[static_cast<std::size_t>(drop)];
            for (std::int64_t a = 0; a < out.attr_dim; ++a)
                out.attrs[static_cast<std::size_t>(i * out.attr_dim + a)] =
                    out.attrs[static_cast<std::size_t>(drop * out.attr_dim + a)];
        }
    }
    return out;
}

point_cloud augment_cloud(const point_cloud& cloud, rng_stream& rng, const augment_config& cfg) {
    return apply_augment(cloud, draw_augment(rng, cfg));
}

std::pair<dataset, dataset> split_dataset(const dataset& ds, double train_fraction,
                                          std::uint64_t seed, std::vector<std::string>* warnings) {
    if (!(train_fraction >= 0.0 && train_fraction <= 1.0))
        throw contract_error("split_dataset: train_fraction must be in [0,1]");
    if (ds.samples.empty()) throw contract_error("split_dataset: empty dataset");

    std::vector<std::vector<std::int64_t>> by_class(ds.class_names.empty()
                                                        ? 0
                                                        : ds.class_names.size());
    bool stratify = !by_class.empty();
    for (std::int64_t i = 0; i < ds.size(); ++i) {
        const auto& s = ds.samples[static_cast<std::size_t>(i)];
        if (!s.label.has_value() || *s.label < 0 ||
            *s.label >= static_cast<int>(by_class.size())) {
            stratify = false;
            break;
        }
        by_class[static_cast<std::size_t>(*s.label)].push_back(i);
    }
    if (stratify) {
        for (std::size_t c = 0; c < by_class.size(); ++c) {
            if (by_class[c].size() < 2) {
                if (warnings)
                    warnings->push_back("class '" + ds.class_names[c] + "' has " +
                                        std::to_string(by_class[c].size()) +
                                        " samples; falling back to a global split");
                stratify = false;
            }
        }
    }

    const std::int64_t target_train =
        std::llround(static_cast<double>(ds.size()) * train_fraction);
    std::vector<bool> in_train(static_cast<std::size_t>(ds.size()), false);

    if (stratify) {
        // Largest-remainder allocation of per-class train counts.
        std::vector<std::int64_t> quota(by_class.size());
        std::vector<std::pair<double, std::size_t>> remainders;
        std::int64_t assigned = 0;
        for (std::size_t c = 0; c < by_class.size(); ++c) {
            const double ideal = static_cast<double>(by_class[c].size()) * train_fraction;
            quota[c] = static_cast<std::int64_t>(std::floor(ideal));
            assigned += quota[c];
            remainders.push_back({ideal - std::floor(ideal), c});
        }
        std::sort(remainders.begin(), remainders.end(), [](const auto& a, const auto& b) {
            if (a.first != b.first) return a.first > b.first;
            return a.second < b.second;
        });
        for (std::size_t r = 0; assigned < target_train && r < remainders.size(); ++r) {
            std::size_t c = remainders[r].second;
            if (quota[c] < static_cast<std::int64_t>(by_class[c].size())) {
                ++quota[c];
                ++assigned;
            }
        }
        for (std::size_t c = 0; c < by_class.size(); ++c) {
            rng_stream rng(seed, "split/class", static_cast<std::uint64_t>(c));
            rng.shuffle(by_class[c]);
            for (std::int64_t t = 0; t < quota[c]; ++t)
                in_train[static_cast<std::size_t>(by_class[c][static_cast<std::size_t>(t)])] = true;
        }
    } else {
        std::vector<std::int64_t> order(static_cast<std::size_t>(ds.size()));
        std::iota(order.begin(), order.end(), 0);
        rng_stream rng(seed, "split/global");
        rng.shuffle(order);
        for (std::int64_t t = 0; t < target_train; ++t)
            in_train[static_cast<std::size_t>(order[static_cast<std::size_t>(t)])] = true;
    }

    dataset train, test;
    train.class_names = test.class_names = ds.class_names;
    train.part_names = test.part_names = ds.part_names;
    train.part_category = test.part_category = ds.part_category;
    train.split = "train";
    test.split = "test";
    for (std::int64_t i = 0; i < ds.size(); ++i)
        (in_train[static_cast<std::size_t>(i)] ? train : test)
            .samples.push_back(ds.samples[static_cast<std::size_t>(i)]);
    return {std::move(train), std::move(test)};
}

std::vector<manifest_entry> parse_manifest(const std::string& text) {
    std::vector<manifest_entry> entries;
    const std::vector<std::string> lines = split_lines(text);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const std::int64_t line_no = static_cast<std::int64_t>(i) + 1;
        if (is_blank_or_comment(lines[i])) continue;
        std::vector<std::string> fields;
        std::string field;
        std::istringstream in(lines[i]);
        while (std::getline(in, field, ',')) fields.push_back(field);
        if (fields.size() < 2 || fields.size() > 3)
            throw parse_error("manifest: line " + std::to_string(line_no) +
                              ": expected 'path,label[,split]'");
        manifest_entry e;
        e.path = fields[0];
        try {
            std::size_t used = 0;
            e.label = std::stoi(fields[1], &used);
            if (used != fields[1].size()) throw std::invalid_argument("trailing");
        } catch (const std::exception&) {
            throw parse_error("manifest: line " + std::to_string(line_no) + ": bad label '" +
                              fields[1] + "'");
        }
        if (e.label < 0)
            throw parse_error("manifest: line " + std::to_string(line_no) + ": negative label");
        if (fields.size() == 3) {
            e.split = fields[2];
            if (e.split != "train" && e.split != "test")
                throw parse_error("manifest: line " + std::to_string(line_no) + ": split must be " +
                                  "'train' or 'test', got '" + e.split + "'");
        }
        entries.push_back(std::move(e));
    }
    if (entries.empty()) throw parse_error("manifest: no entries");
    return entries;
}

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw parse_error("cannot open file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

// Resamples a cloud to exactly n points: a deterministic shuffled subset when
// larger, cyclic duplication when smaller.
point_cloud resample_cloud(const point_cloud& cloud, std::int64_t n, rng_stream& rng) {
    const std::int64_t src_n = cloud.size();
    std::vector<std::int64_t> pick;
    if (src_n >= n) {
        std::vector<std::int64_t> order(static_cast<std::size_t>(src_n));
        std::iota(order.begin(), order.end(), 0);
        rng.shuffle(order);
        pick.assign(order.begin(), order.begin() + n);
        std::sort(pick.begin(), pick.end());
    } else {
        pick.resize(static_cast<std::size_t>(n));
        for (std::int64_t i = 0; i < n; ++i) pick[static_cast<std::size_t>(i)] = i % src_n;
    }
    point_cloud out;
    out.attr_dim = cloud.attr_dim;
    out.label = cloud.label;
    out.category = cloud.category;
    for (std::int64_t idx : pick) {
        out.coords.push_back(cloud.coords[static_cast<std::size_t>(idx)]);
        if (!cloud.point_labels.empty())
            out.point_labels.push_back(cloud.point_labels[static_cast<std::size_t>(idx)]);
        for (std::int64_t a = 0; a < cloud.attr_dim; ++a)
            out.attrs.push_back(cloud.attrs[static_cast<std::size_t>(idx * cloud.attr_dim + a)]);
    }
    return out;
}

bool ends_with(const std::string& s, const std::string& suffix) {
    return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

}  // namespace

std::pair<dataset, dataset> load_manifest(const std::string& manifest_path, std::int64_t n_points,
                                          std::uint64_t seed) {
    if (n_points < 1) throw contract_error("load_manifest: n_points must be >= 1");
    const std::vector<manifest_entry> entries = parse_manifest(read_file(manifest_path));
    const std::filesystem::path base = std::filesystem::path(manifest_path).parent_path();

    int max_label = 0;
    for (const auto& e : entries) max_label = std::max(max_label, e.label);

    dataset train, test;
    train.split = "train";
    test.split = "test";
    for (int c = 0; c <= max_label; ++c) {
        train.class_names.push_back("class" + std::to_string(c));
        test.class_names.push_back("class" + std::to_string(c));
    }

    for (std::size_t i = 0; i < entries.size(); ++i) {
        const auto& e = entries[i];
        const std::filesystem::path path = std::filesystem::path(e.path).is_absolute()
                                               ? std::filesystem::path(e.path)
                                               : base / e.path;
        const std::string text = read_file(path.string());
        rng_stream rng(seed, "manifest/sample", static_cast<std::uint64_t>(i));
        point_cloud cloud;
        if (ends_with(e.path, ".off") || ends_with(e.path, ".OFF")) {
            cloud = sample_mesh_surface(parse_off(text), n_points, rng);
        } else {
            cloud = resample_cloud(parse_xyz(text), n_points, rng);
        }
        cloud.label = e.label;
        (e.split == "test" ? test : train).samples.push_back(std::move(cloud));
    }
    return {std::move(train), std::move(test)};
}

}  // namespace pointcat
