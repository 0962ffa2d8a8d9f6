#include "spikegrid/config.hpp"

#include <cmath>
#include <fstream>

#include <json.hpp>

namespace spikegrid {

using nlohmann::json;

namespace {

const json& require_field(const json& j, const char* key, const char* where) {
    auto it = j.find(key);
    if (it == j.end()) throw ConfigError(std::string("config: missing field '") + key + "' in " + where);
    return *it;
}

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
    auto it = j.find(key);
    if (it == j.end()) return fallback;
    try {
        return it->get<T>();
    } catch (const json::exception&) {
        throw ConfigError(std::string("config: field '") + key + "' has the wrong type");
    }
}

std::vector<std::vector<int>> parse_branch_kernels(const json& j, const char* key,
                                                   std::vector<std::vector<int>> fallback) {
    auto it = j.find(key);
    if (it == j.end()) return fallback;
    if (!it->is_array()) throw ConfigError(std::string("config: '") + key + "' must be a list of kernel-size lists");
    std::vector<std::vector<int>> out;
    for (const auto& branch : *it) {
        if (!branch.is_array()) throw ConfigError(std::string("config: '") + key + "' entries must be lists of ints");
        std::vector<int> ks;
        for (const auto& v : branch) ks.push_back(v.get<int>());
        out.push_back(std::move(ks));
    }
    return out;
}

}  // namespace

std::string surrogate_kind_name(SurrogateKind kind) {
    switch (kind) {
        case SurrogateKind::AadArcsin: return "aad_arcsin";
        case SurrogateKind::AadArccos: return "aad_arccos";
        case SurrogateKind::Rectangular: return "rectangular";
    }
    return "aad_arcsin";
}

SurrogateKind surrogate_kind_from_name(const std::string& name) {
    if (name == "aad_arcsin") return SurrogateKind::AadArcsin;
    if (name == "aad_arccos") return SurrogateKind::AadArccos;
    if (name == "rectangular") return SurrogateKind::Rectangular;
    throw ConfigError("config: unknown surrogate kind '" + name + "'");
}

void RunConfig::validate() const {
    if (cube_path.empty()) throw ConfigError("config: 'cube' path must be set");
    if (labels_path.empty()) throw ConfigError("config: 'labels' path must be set");
    if (output_dir.empty()) throw ConfigError("config: 'output_dir' must be set");
    if (pca_components < 1) throw ConfigError("config: 'pca_components' must be >= 1");
    NetworkSpec net = network;
    net.num_classes = 2;  // resolved from the label file at run time
    net.input_channels = pca_components;
    net.validate();
    train.validate();
    if (train.patch_size != network.patch_size || train.time_steps != network.time_steps)
        throw ConfigError("config: network and train patch/time settings diverged");
}

RunConfig parse_run_config(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: JSON parse failure: ") + e.what());
    }

    RunConfig cfg;
    cfg.cube_path = require_field(j, "cube", "document root").get<std::string>();
    cfg.labels_path = require_field(j, "labels", "document root").get<std::string>();
    cfg.output_dir = require_field(j, "output_dir", "document root").get<std::string>();

    const json net = j.value("network", json::object());
    cfg.pca_components = get_or(net, "pca_components", 30);
    cfg.network.input_channels = cfg.pca_components;
    cfg.network.patch_size = get_or(net, "patch_size", 17);
    cfg.network.time_steps = get_or(net, "time_steps", 10);
    cfg.network.base_channels = get_or(net, "base_channels", 64);
    cfg.network.width_factor = get_or(net, "width_factor", 2);
    cfg.network.swmr2_blocks = get_or(net, "swmr2_blocks", 2);
    cfg.network.swmr1_branch_kernels = parse_branch_kernels(net, "swmr1_branch_kernels", {{1, 3}, {1, 3}});
    cfg.network.swmr2_branch_kernels = parse_branch_kernels(net, "swmr2_branch_kernels", {{1, 3}, {3, 5}});
    if (net.contains("lif")) {
        const json& lif = net["lif"];
        cfg.network.lif.v_threshold = get_or(lif, "v_threshold", 1.0f);
        cfg.network.lif.v_rest = get_or(lif, "v_rest", 0.0f);
        cfg.network.lif.decay = get_or(lif, "decay", 0.5f);
    }

    const json tr = j.value("train", json::object());
    cfg.train.learning_rate = get_or(tr, "learning_rate", 0.085f);
    cfg.train.lr_decay_every = get_or(tr, "lr_decay_every", 25);
    cfg.train.lr_decay_factor = get_or(tr, "lr_decay_factor", 0.1f);
    cfg.train.epochs = get_or(tr, "epochs", 100);
    cfg.train.batch_size = get_or(tr, "batch_size", 16);
    cfg.train.momentum = get_or(tr, "momentum", 0.9f);
    cfg.train.seed = get_or(tr, "seed", std::uint64_t{1});
    cfg.train.time_steps = cfg.network.time_steps;
    cfg.train.patch_size = cfg.network.patch_size;
    if (tr.contains("surrogate")) {
        const json& s = tr["surrogate"];
        cfg.train.surrogate.kind = surrogate_kind_from_name(get_or<std::string>(s, "kind", "aad_arcsin"));
        cfg.train.surrogate.lambda = get_or(s, "lambda", 1.0f);
    }
    const std::string loss = get_or<std::string>(tr, "loss", "cross_entropy");
    if (loss == "cross_entropy")
        cfg.train.loss = LossKind::CrossEntropy;
    else if (loss == "mse")
        cfg.train.loss = LossKind::MeanSquaredError;
    else
        throw ConfigError("config: unknown loss '" + loss + "'");

    const json sp = j.value("split", json::object());
    const std::string mode = get_or<std::string>(sp, "mode", "per_class_count");
    if (mode == "per_class_count")
        cfg.split.mode = SplitSpec::Mode::PerClassCount;
    else if (mode == "per_class_fraction")
        cfg.split.mode = SplitSpec::Mode::PerClassFraction;
    else
        throw ConfigError("config: unknown split mode '" + mode + "'");
    cfg.split.count = get_or(sp, "count", 200);
    cfg.split.fraction = get_or(sp, "fraction", 0.8);
    cfg.split.seed = get_or(sp, "seed", cfg.train.seed);

    cfg.validate();
    return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open config file " + path.string());
    std::string text((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
    return parse_run_config(text);
}

ClassPalette ClassPalette::default_for(int num_classes) {
    ClassPalette p;
    p.colors.reserve(static_cast<std::size_t>(num_classes));
    for (int i = 0; i < num_classes; ++i) {
        // Golden-angle hue walk, alternating value bands for extra contrast.
        const double hue = std::fmod(i * 137.50776405003785, 360.0);
        const double sat = 0.85;
        const double val = (i % 2 == 0) ? 0.95 : 0.65;
        const double c = val * sat;
        const double x = c * (1.0 - std::fabs(std::fmod(hue / 60.0, 2.0) - 1.0));
        const double m = val - c;
        double r = 0, g = 0, b = 0;
        if (hue < 60) { r = c; g = x; }
        else if (hue < 120) { r = x; g = c; }
        else if (hue < 180) { g = c; b = x; }
        else if (hue < 240) { g = x; b = c; }
        else if (hue < 300) { r = x; b = c; }
        else { r = c; b = x; }
        p.colors.push_back({static_cast<unsigned char>(std::lround((r + m) * 255.0)),
                            static_cast<unsigned char>(std::lround((g + m) * 255.0)),
                            static_cast<unsigned char>(std::lround((b + m) * 255.0))});
    }
    return p;
}

std::array<unsigned char, 3> ClassPalette::color(int class_label) const {
    if (class_label < 1 || class_label > static_cast<int>(colors.size())) return {0, 0, 0};
    return colors[static_cast<std::size_t>(class_label - 1)];
}

}  // namespace spikegrid
