#include "spikegrid/network.hpp"

#include <sstream>

#include "spikegrid/autograd.hpp"

namespace spikegrid {

int ParamStore::add(std::string name, Tensor value) {
    if (index_of(name) >= 0) throw ConfigError("ParamStore: duplicate parameter name " + name);
    entries.push_back({std::move(name), std::move(value)});
    return count() - 1;
}

int ParamStore::index_of(const std::string& name) const {
    for (int i = 0; i < count(); ++i)
        if (entries[static_cast<std::size_t>(i)].name == name) return i;
    return -1;
}

GradientSet GradientSet::zeros_like(const ParamStore& params) {
    GradientSet g;
    g.grads.reserve(params.entries.size());
    for (const auto& e : params.entries) g.grads.push_back(Tensor::zeros(e.value.shape));
    return g;
}

void GradientSet::add_(const GradientSet& other) {
    if (grads.size() != other.grads.size()) throw ShapeError("GradientSet: size mismatch");
    for (std::size_t i = 0; i < grads.size(); ++i) grads[i].add_(other.grads[i]);
}

void GradientSet::scale_(float s) {
    for (auto& g : grads) g.scale_(s);
}

void NetworkSpec::validate() const {
    if (input_channels < 1) throw ConfigError("NetworkSpec: input_channels must be >= 1");
    if (patch_size < 5 || patch_size % 2 == 0) throw ConfigError("NetworkSpec: patch_size must be odd and >= 5");
    if (time_steps < 1) throw ConfigError("NetworkSpec: time_steps must be >= 1");
    if (num_classes < 2) throw ConfigError("NetworkSpec: num_classes must be >= 2");
    if (base_channels < 1) throw ConfigError("NetworkSpec: base_channels must be >= 1");
    if (width_factor < 1) throw ConfigError("NetworkSpec: width_factor must be >= 1");
    if (swmr2_blocks < 0) throw ConfigError("NetworkSpec: swmr2_blocks must be >= 0");
    if (swmr1_branch_kernels.empty() || swmr2_branch_kernels.empty())
        throw ConfigError("NetworkSpec: branch kernel lists must not be empty");
    for (int stage = 1; stage <= 2; ++stage) {
        const int channels = stage == 1 ? base_channels : 2 * base_channels;
        for (const auto& ks : (stage == 1 ? swmr1_branch_kernels : swmr2_branch_kernels)) {
            if (ks.empty()) throw ConfigError("NetworkSpec: a branch needs at least one kernel group");
            for (int k : ks)
                if (k < 1 || k % 2 == 0) throw ConfigError("NetworkSpec: kernel sizes must be odd");
            if (channels % static_cast<int>(ks.size()) != 0)
                throw ConfigError("NetworkSpec: stage " + std::to_string(stage) + " channels not divisible into groups");
        }
    }
    if (patch_size / 2 / 2 < 1) throw ConfigError("NetworkSpec: patch too small for two pooling stages");
    lif.validate();
}

std::vector<std::vector<int>> NetworkSpec::branches_for_stage(int stage) const {
    std::vector<std::vector<int>> out = stage == 1 ? swmr1_branch_kernels : swmr2_branch_kernels;
    while (static_cast<int>(out.size()) < width_factor) out.push_back(out.back());
    out.resize(static_cast<std::size_t>(width_factor), out.back());
    return out;
}

std::string NetworkSpec::schema_string() const {
    std::ostringstream os;
    os << "spikegrid-net/v1;in=" << input_channels << ";patch=" << patch_size << ";T=" << time_steps
       << ";classes=" << num_classes << ";base=" << base_channels << ";width=" << width_factor
       << ";blocks2=" << swmr2_blocks << ";lif=" << lif.v_threshold << "," << lif.v_rest << "," << lif.decay << ";k1=";
    for (const auto& b : branches_for_stage(1)) {
        os << "(";
        for (std::size_t i = 0; i < b.size(); ++i) os << (i ? "," : "") << b[i];
        os << ")";
    }
    os << ";k2=";
    for (const auto& b : branches_for_stage(2)) {
        os << "(";
        for (std::size_t i = 0; i < b.size(); ++i) os << (i ? "," : "") << b[i];
        os << ")";
    }
    return os.str();
}

namespace {

SwmrDesc build_swmr(const std::string& name, int channels, const std::vector<std::vector<int>>& branch_kernels,
                    ParamStore& params, Rng& rng) {
    SwmrDesc d;
    d.name = name;
    d.channels = channels;
    for (std::size_t b = 0; b < branch_kernels.size(); ++b) {
        SwmrBranchDesc branch;
        branch.kernel_sizes = branch_kernels[b];
        const int groups = static_cast<int>(branch.kernel_sizes.size());
        const int gsize = channels / groups;
        for (int g = 0; g < groups; ++g) {
            const int k = branch.kernel_sizes[static_cast<std::size_t>(g)];
            branch.dw_weights.push_back(params.add(name + ".b" + std::to_string(b) + ".dw" + std::to_string(g) + ".weight",
                                                   Tensor::uniform_fan_in({gsize, k, k}, k * k, rng)));
        }
        branch.pw_weight = params.add(name + ".b" + std::to_string(b) + ".pw.weight",
                                      Tensor::uniform_fan_in({channels, channels, 1, 1}, channels, rng));
        d.branches.push_back(std::move(branch));
    }
    return d;
}

}  // namespace

Network::Network(NetworkSpec spec, Rng& rng) {
    spec.validate();
    spec_ = std::move(spec);
    const int base = spec_.base_channels;

    SConvDesc sconv{"sconv", -1, 3, spec_.input_channels, base};
    sconv.weight = params_.add("sconv.weight",
                               Tensor::uniform_fan_in({base, spec_.input_channels, 3, 3}, spec_.input_channels * 9, rng));
    layers_.emplace_back(sconv);

    layers_.emplace_back(build_swmr("swmr1", base, spec_.branches_for_stage(1), params_, rng));

    SConvDesc trans1{"transition1", -1, 1, base, 2 * base};
    trans1.weight = params_.add("transition1.weight", Tensor::uniform_fan_in({2 * base, base, 1, 1}, base, rng));
    layers_.emplace_back(trans1);
    layers_.emplace_back(PoolDesc{"pool1", 2});

    for (int i = 0; i < spec_.swmr2_blocks; ++i) {
        const std::string name = "swmr2" + std::string(1, static_cast<char>('a' + i));
        layers_.emplace_back(build_swmr(name, 2 * base, spec_.branches_for_stage(2), params_, rng));
    }

    SConvDesc trans2{"transition2", -1, 1, 2 * base, 4 * base};
    trans2.weight = params_.add("transition2.weight", Tensor::uniform_fan_in({4 * base, 2 * base, 1, 1}, 2 * base, rng));
    layers_.emplace_back(trans2);
    layers_.emplace_back(PoolDesc{"pool2", 2});

    const int h1 = spec_.patch_size / 2;
    const int h2 = h1 / 2;
    FcDesc fc{"fc", -1, 4 * base * h2 * h2};
    fc.weight = params_.add("fc.weight", Tensor::uniform_fan_in({spec_.num_classes, fc.features}, fc.features, rng));
    layers_.emplace_back(fc);
}

Network Network::custom(NetworkSpec spec, ParamStore params, std::vector<LayerDesc> layers) {
    Network net;
    net.spec_ = std::move(spec);
    net.params_ = std::move(params);
    net.layers_ = std::move(layers);
    return net;
}

Tensor Network::forward(const Tensor& input_train) const { return run_network(*this, input_train, nullptr, {}); }

std::vector<ShapeAuditRow> Network::shape_report() const {
    std::vector<ShapeAuditRow> rows;
    int c = spec_.input_channels, h = spec_.patch_size, w = spec_.patch_size;
    for (const auto& layer : layers_) {
        if (const auto* sc = std::get_if<SConvDesc>(&layer)) {
            rows.push_back({sc->name, {c, h, w}, {sc->out_channels, h, w}});
            c = sc->out_channels;
        } else if (const auto* sw = std::get_if<SwmrDesc>(&layer)) {
            rows.push_back({sw->name + ".sdc", {c, h, w}, {sw->channels, h, w}});
            rows.push_back({sw->name + ".spc", {sw->channels, h, w}, {sw->channels, h, w}});
            c = sw->channels;
        } else if (const auto* p = std::get_if<PoolDesc>(&layer)) {
            const int nh = h / p->k, nw = w / p->k;
            rows.push_back({p->name, {c, h, w}, {c, nh, nw}});
            h = nh;
            w = nw;
        } else if (const auto* f = std::get_if<FcDesc>(&layer)) {
            rows.push_back({f->name, {c, h, w}, {spec_.num_classes}});
        }
    }
    return rows;
}

std::uint64_t Network::schema_hash() const { return fnv1a64(spec_.schema_string()); }

std::uint64_t fnv1a64(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace spikegrid
