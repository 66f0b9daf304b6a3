#include "pointcat/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace pointcat {

namespace {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

std::string type_name(const json& v) {
    return v.type_name();
}

void require_known_keys(const json& obj, const std::string& prefix,
                        const std::set<std::string>& known) {
    for (const auto& item : obj.items())
        if (known.find(item.key()) == known.end())
            throw config_error("unknown config key '" + prefix + item.key() + "'");
}

std::int64_t get_int(const json& sec, const std::string& prefix, const char* key,
                     std::int64_t def) {
    if (!sec.contains(key)) return def;
    const json& v = sec.at(key);
    if (!v.is_number_integer())
        throw config_error("config key '" + prefix + key + "' must be an integer, got " +
                           type_name(v));
    return v.get<std::int64_t>();
}

std::uint64_t get_uint(const json& sec, const std::string& prefix, const char* key,
                       std::uint64_t def) {
    const std::int64_t v = get_int(sec, prefix, key, static_cast<std::int64_t>(def));
    if (v < 0) throw config_error("config key '" + prefix + key + "' must be non-negative");
    return static_cast<std::uint64_t>(v);
}

double get_double(const json& sec, const std::string& prefix, const char* key, double def) {
    if (!sec.contains(key)) return def;
    const json& v = sec.at(key);
    if (!v.is_number())
        throw config_error("config key '" + prefix + key + "' must be a number, got " +
                           type_name(v));
    return v.get<double>();
}

bool get_bool(const json& sec, const std::string& prefix, const char* key, bool def) {
    if (!sec.contains(key)) return def;
    const json& v = sec.at(key);
    if (!v.is_boolean())
        throw config_error("config key '" + prefix + key + "' must be a boolean, got " +
                           type_name(v));
    return v.get<bool>();
}

std::string get_string(const json& sec, const std::string& prefix, const char* key,
                       const std::string& def) {
    if (!sec.contains(key)) return def;
    const json& v = sec.at(key);
    if (!v.is_string())
        throw config_error("config key '" + prefix + key + "' must be a string, got " +
                           type_name(v));
    return v.get<std::string>();
}

sigma_scope parse_sigma(const std::string& s) {
    if (s == "per_sample") return sigma_scope::per_sample;
    if (s == "per_group") return sigma_scope::per_group;
    throw config_error("model.sigma must be 'per_sample' or 'per_group', got '" + s + "'");
}

run_config parse_json(const json& j) {
    if (!j.is_object()) throw config_error("config root must be a JSON object");
    require_known_keys(j, "", {"model", "train", "data", "output"});

    run_config cfg;
    const json empty = json::object();

    const json& t = j.contains("train") ? j.at("train") : empty;
    if (!t.is_object()) throw config_error("config section 'train' must be an object");
    require_known_keys(t, "train.",
                       {"epochs", "lr", "batch", "seed", "augment", "max_dropout", "target_oa",
                        "jobs"});
    cfg.train.epochs = get_int(t, "train.", "epochs", cfg.train.epochs);
    cfg.train.lr = get_double(t, "train.", "lr", cfg.train.lr);
    cfg.train.batch = get_int(t, "train.", "batch", cfg.train.batch);
    cfg.train.seed = get_uint(t, "train.", "seed", cfg.train.seed);
    cfg.train.augment = get_bool(t, "train.", "augment", cfg.train.augment);
    cfg.train.max_dropout = get_double(t, "train.", "max_dropout", cfg.train.max_dropout);
    cfg.train.target_oa = get_double(t, "train.", "target_oa", cfg.train.target_oa);
    cfg.train.jobs = static_cast<int>(get_int(t, "train.", "jobs", cfg.train.jobs));

    const json& m = j.contains("model") ? j.at("model") : empty;
    if (!m.is_object()) throw config_error("config section 'model' must be an object");
    require_known_keys(m, "model.",
                       {"n_input", "d0", "d_ratio", "k", "stages", "heads", "layers",
                        "num_classes", "fusion", "sigma", "msa_baseline", "msa_out_proj",
                        "aux_branch_loss", "eps", "seed", "n_categories", "n_parts",
                        "label_embed_dim"});
    cfg.model.n_input = get_int(m, "model.", "n_input", cfg.model.n_input);
    cfg.model.d0 = get_int(m, "model.", "d0", cfg.model.d0);
    cfg.model.d_ratio = get_int(m, "model.", "d_ratio", cfg.model.d_ratio);
    cfg.model.k = get_int(m, "model.", "k", cfg.model.k);
    cfg.model.stages = get_int(m, "model.", "stages", cfg.model.stages);
    cfg.model.heads = get_int(m, "model.", "heads", cfg.model.heads);
    cfg.model.layers = get_int(m, "model.", "layers", cfg.model.layers);
    cfg.model.num_classes = get_int(m, "model.", "num_classes", cfg.model.num_classes);
    cfg.model.fusion = parse_fusion_mode(get_string(m, "model.", "fusion",
                                                    fusion_mode_name(cfg.model.fusion)));
    cfg.model.sigma = parse_sigma(get_string(
        m, "model.", "sigma", cfg.model.sigma == sigma_scope::per_sample ? "per_sample" : "per_group"));
    cfg.model.msa_baseline = get_bool(m, "model.", "msa_baseline", cfg.model.msa_baseline);
    cfg.model.msa_out_proj = get_bool(m, "model.", "msa_out_proj", cfg.model.msa_out_proj);
    cfg.model.aux_branch_loss = get_bool(m, "model.", "aux_branch_loss", cfg.model.aux_branch_loss);
    cfg.model.eps = get_double(m, "model.", "eps", cfg.model.eps);
    cfg.model.seed = get_uint(m, "model.", "seed", m.contains("seed") ? 0 : cfg.train.seed);
    cfg.model.n_categories = get_int(m, "model.", "n_categories", cfg.model.n_categories);
    cfg.model.n_parts = get_int(m, "model.", "n_parts", cfg.model.n_parts);
    cfg.model.label_embed_dim = get_int(m, "model.", "label_embed_dim", cfg.model.label_embed_dim);

    const json& d = j.contains("data") ? j.at("data") : empty;
    if (!d.is_object()) throw config_error("config section 'data' must be an object");
    require_known_keys(d, "data.",
                       {"source", "manifest", "n_points", "per_class", "train_fraction", "seed"});
    cfg.data.source = get_string(d, "data.", "source", cfg.data.source);
    if (cfg.data.source != "synthetic" && cfg.data.source != "manifest")
        throw config_error("data.source must be 'synthetic' or 'manifest', got '" +
                           cfg.data.source + "'");
    cfg.data.manifest = get_string(d, "data.", "manifest", cfg.data.manifest);
    if (cfg.data.source == "manifest" && cfg.data.manifest.empty())
        throw config_error("data.source is 'manifest' but data.manifest is not set");
    cfg.data.n_points = get_int(d, "data.", "n_points", cfg.data.n_points);
    cfg.data.per_class = get_int(d, "data.", "per_class", cfg.data.per_class);
    cfg.data.train_fraction = get_double(d, "data.", "train_fraction", cfg.data.train_fraction);
    cfg.data.seed = get_uint(d, "data.", "seed", d.contains("seed") ? 0 : cfg.train.seed);

    const json& o = j.contains("output") ? j.at("output") : empty;
    if (!o.is_object()) throw config_error("config section 'output' must be an object");
    require_known_keys(o, "output.", {"dir"});
    cfg.output.dir = get_string(o, "output.", "dir", cfg.output.dir);

    if (cfg.data.n_points == 0) cfg.data.n_points = cfg.model.n_input;
    if (cfg.data.n_points != cfg.model.n_input)
        throw config_error("data.n_points (" + std::to_string(cfg.data.n_points) +
                           ") must equal model.n_input (" + std::to_string(cfg.model.n_input) + ")");
    return cfg;
}

}  // namespace

train_config run_config::to_train_config() const {
    train_config tc;
    tc.epochs = train.epochs;
    tc.lr = train.lr;
    tc.batch = train.batch;
    tc.seed = train.seed;
    tc.augment = train.augment;
    tc.aug.max_dropout = train.max_dropout;
    tc.target_oa = train.target_oa;
    tc.jobs = train.jobs;
    return tc;
}

run_config parse_run_config(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        throw config_error(std::string("config: invalid JSON: ") + e.what());
    }
    return parse_json(j);
}

run_config load_run_config(const std::string& path) {
    return load_run_config(path, {});
}

run_config load_run_config(const std::string& path,
                           const std::vector<std::pair<std::string, std::string>>& overrides) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw config_error("cannot open config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();

    json j;
    try {
        j = json::parse(buf.str());
    } catch (const json::exception& e) {
        throw config_error("config " + path + ": invalid JSON: " + e.what());
    }
    if (!j.is_object()) throw config_error("config root must be a JSON object");

    for (const auto& [path_key, value] : overrides) {
        const std::size_t dot = path_key.find('.');
        if (dot == std::string::npos || path_key.find('.', dot + 1) != std::string::npos)
            throw config_error("override '" + path_key + "' must have the form section.key");
        const std::string section = path_key.substr(0, dot);
        const std::string key = path_key.substr(dot + 1);
        json parsed;
        try {
            parsed = json::parse(value);
        } catch (const json::exception&) {
            parsed = value;  // unquoted strings like --model.fusion all_tokens
        }
        if (!j.contains(section) || !j[section].is_object()) j[section] = json::object();
        j[section][key] = parsed;
    }
    return parse_json(j);
}

std::string resolved_config_json(const run_config& cfg) {
    ordered_json j;
    j["model"] = {{"n_input", cfg.model.n_input},
                  {"d0", cfg.model.d0},
                  {"d_ratio", cfg.model.d_ratio},
                  {"k", cfg.model.k},
                  {"stages", cfg.model.stages},
                  {"heads", cfg.model.heads},
                  {"layers", cfg.model.layers},
                  {"num_classes", cfg.model.num_classes},
                  {"fusion", fusion_mode_name(cfg.model.fusion)},
                  {"sigma", cfg.model.sigma == sigma_scope::per_sample ? "per_sample" : "per_group"},
                  {"msa_baseline", cfg.model.msa_baseline},
                  {"msa_out_proj", cfg.model.msa_out_proj},
                  {"aux_branch_loss", cfg.model.aux_branch_loss},
                  {"eps", cfg.model.eps},
                  {"seed", cfg.model.seed},
                  {"n_categories", cfg.model.n_categories},
                  {"n_parts", cfg.model.n_parts},
                  {"label_embed_dim", cfg.model.label_embed_dim}};
    j["train"] = {{"epochs", cfg.train.epochs},
                  {"lr", cfg.train.lr},
                  {"batch", cfg.train.batch},
                  {"seed", cfg.train.seed},
                  {"augment", cfg.train.augment},
                  {"max_dropout", cfg.train.max_dropout},
                  {"target_oa", cfg.train.target_oa},
                  {"jobs", cfg.train.jobs}};
    j["data"] = {{"source", cfg.data.source},
                 {"manifest", cfg.data.manifest},
                 {"n_points", cfg.data.n_points},
                 {"per_class", cfg.data.per_class},
                 {"train_fraction", cfg.data.train_fraction},
                 {"seed", cfg.data.seed}};
    j["output"] = {{"dir", cfg.output.dir}};
    return j.dump(2) + "\n";
}

}  // namespace pointcat
