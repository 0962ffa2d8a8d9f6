#pragma once

#include <vector>

#include "spikegrid/conv.hpp"
#include "spikegrid/neuron.hpp"
#include "spikegrid/spike_train.hpp"

namespace spikegrid {

// Mixed-kernel depthwise stage: channels split into equal groups, group i
// convolved depthwise with its own kernel size.
struct SmcSpec {
    std::vector<int> group_kernel_sizes;  // odd, one per group
    int in_channels = 0;
    int out_channels = 0;

    int group_count() const { return static_cast<int>(group_kernel_sizes.size()); }
    int group_size() const { return in_channels / group_count(); }
    void validate() const;
};

struct SmcParams {
    std::vector<Tensor> depthwise;  // per group: [group_size, k_i, k_i]
    Tensor pointwise;               // [out_channels, in_channels, 1, 1]
};

struct SmcStates {
    LifState sdc;
    LifState spc;
};

struct SwmrSpec {
    int width_factor = 2;
    std::vector<SmcSpec> branch_specs;  // one per branch, channel-preserving

    void validate() const;
};

struct SwmrParams {
    std::vector<SmcParams> branches;
};

struct SwmrStates {
    std::vector<LifState> branch_sdc;  // one per branch
    LifState merge;                    // the branch-merging (SPC) neurons
};

// Depthwise-convolve each channel group of `input` with its group's kernels
// (same padding, stride 1). group_kernels[g] is [group_size, k_g, k_g].
Tensor mixed_depthwise(const Tensor& input, const std::vector<Tensor>& group_kernels);

// Spiking convolution: per step, conv2d followed by a LIF update. The
// membrane state persists across the train's steps; reset it between samples.
SpikeTrain sconv_forward(const SpikeTrain& input, const Tensor& weights, const LifConfig& cfg, LifState& state);

// Spiking mixed convolution: grouped depthwise -> LIF -> 1x1 pointwise -> LIF.
SpikeTrain smc_forward(const SpikeTrain& input, const SmcSpec& spec, const SmcParams& params, const LifConfig& cfg,
                       SmcStates& states);

// Width-mixed residual block. Each branch runs depthwise -> LIF -> pointwise;
// the pointwise currents of all branches plus the shortcut current
// (v_threshold per input spike) drive one merging LIF population, so the
// residual sum happens in membrane-potential space and the output stays binary.
SpikeTrain swmr_forward(const SpikeTrain& input, const SwmrSpec& spec, const SwmrParams& params, const LifConfig& cfg,
                        SwmrStates& states);

// Per-step max pooling; binary in, binary out.
SpikeTrain pool_forward(const SpikeTrain& input, int k);

// Non-spiking readout: accumulate fc_weights * flatten(step) over all steps
// and divide by the step count.
Tensor output_integrate(const SpikeTrain& input, const Tensor& fc_weights);

// Fresh resting states sized for the given spatial extent.
SmcStates make_smc_states(const SmcSpec& spec, int h, int w, const LifConfig& cfg);
SwmrStates make_swmr_states(const SwmrSpec& spec, int h, int w, const LifConfig& cfg);

}  // namespace spikegrid
