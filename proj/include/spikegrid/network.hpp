#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "spikegrid/layers.hpp"
#include "spikegrid/rng.hpp"

namespace spikegrid {

// Named parameter tensors; layers refer to entries by index.
struct ParamStore {
    struct Entry {
        std::string name;
        Tensor value;
    };
    std::vector<Entry> entries;

    int add(std::string name, Tensor value);
    int index_of(const std::string& name) const;  // -1 if absent
    Tensor& value(int id) { return entries[static_cast<std::size_t>(id)].value; }
    const Tensor& value(int id) const { return entries[static_cast<std::size_t>(id)].value; }
    const std::string& name(int id) const { return entries[static_cast<std::size_t>(id)].name; }
    int count() const { return static_cast<int>(entries.size()); }
};

// One gradient tensor per parameter, shape-matched and index-aligned.
struct GradientSet {
    std::vector<Tensor> grads;

    static GradientSet zeros_like(const ParamStore& params);
    void add_(const GradientSet& other);
    void scale_(float s);
};

// Declarative description of the classification network. The channel plan is
// base -> 2*base (before the first pooling) -> 4*base (before the second).
struct NetworkSpec {
    int input_channels = 30;
    int patch_size = 17;
    int time_steps = 10;
    int num_classes = 2;
    int base_channels = 64;
    int width_factor = 2;
    int swmr2_blocks = 2;
    // Kernel sizes per branch for the shallow and deep residual stages.
    std::vector<std::vector<int>> swmr1_branch_kernels{{1, 3}, {1, 3}};
    std::vector<std::vector<int>> swmr2_branch_kernels{{1, 3}, {3, 5}};
    LifConfig lif;

    void validate() const;
    // Branch kernel lists resized to width_factor (extra branches repeat the
    // last configured one).
    std::vector<std::vector<int>> branches_for_stage(int stage) const;
    // Canonical text form used to fingerprint checkpoints.
    std::string schema_string() const;
};

struct SConvDesc {
    std::string name;
    int weight = -1;
    int k = 0;
    int in_channels = 0;
    int out_channels = 0;
};

struct SwmrBranchDesc {
    std::vector<int> dw_weights;      // param ids, one per kernel group
    std::vector<int> kernel_sizes;    // matching group kernel sizes
    int pw_weight = -1;
};

struct SwmrDesc {
    std::string name;
    int channels = 0;
    std::vector<SwmrBranchDesc> branches;
};

struct PoolDesc {
    std::string name;
    int k = 2;
};

struct FcDesc {
    std::string name;
    int weight = -1;
    int features = 0;
};

using LayerDesc = std::variant<SConvDesc, SwmrDesc, PoolDesc, FcDesc>;

struct ShapeAuditRow {
    std::string name;
    std::vector<int> in_shape;   // [C,H,W]
    std::vector<int> out_shape;  // [C,H,W], or [K] for the readout
};

class Network {
public:
    // Builds the full architecture described by `spec` with fan-in scaled
    // uniform initialization drawn from `rng`.
    Network(NetworkSpec spec, Rng& rng);
    // Assembles a network from explicit layers/parameters (tests, tooling).
    static Network custom(NetworkSpec spec, ParamStore params, std::vector<LayerDesc> layers);

    const NetworkSpec& spec() const { return spec_; }
    ParamStore& params() { return params_; }
    const ParamStore& params() const { return params_; }
    const std::vector<LayerDesc>& layers() const { return layers_; }

    // Forward pass over an input current train [T,C,H,W] -> logits [K].
    Tensor forward(const Tensor& input_train) const;

    std::vector<ShapeAuditRow> shape_report() const;
    std::uint64_t schema_hash() const;

private:
    Network() = default;
    NetworkSpec spec_;
    ParamStore params_;
    std::vector<LayerDesc> layers_;
};

std::uint64_t fnv1a64(const std::string& s);

}  // namespace spikegrid
