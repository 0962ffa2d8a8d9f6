#include "spikegrid/layers.hpp"

#include <cmath>

namespace spikegrid {

SpikeTrain SpikeTrain::wrap(Tensor t, bool validate_binary) {
    if (t.rank() != 4) throw ShapeError("SpikeTrain: expected [T,C,H,W], got " + t.shape_str());
    SpikeTrain st{std::move(t)};
    if (validate_binary && !st.is_binary()) throw DomainError("SpikeTrain: elements must be 0 or 1");
    return st;
}

Tensor SpikeTrain::step(int t) const {
    const auto n = step_size();
    Tensor out = Tensor::zeros({channels(), height(), width()});
    const float* src = &data.data[static_cast<std::size_t>(t) * n];
    std::copy(src, src + n, out.data.begin());
    return out;
}

void SpikeTrain::set_step(int t, const Tensor& v) {
    const auto n = step_size();
    if (v.size() != n) throw ShapeError("SpikeTrain::set_step: slice size mismatch");
    std::copy(v.data.begin(), v.data.end(), data.data.begin() + static_cast<std::ptrdiff_t>(t) * n);
}

bool SpikeTrain::is_binary() const {
    for (float v : data.data)
        if (v != 0.0f && v != 1.0f) return false;
    return true;
}

void SmcSpec::validate() const {
    if (group_kernel_sizes.empty()) throw ConfigError("SmcSpec: at least one kernel group required");
    for (int k : group_kernel_sizes)
        if (k < 1 || k % 2 == 0) throw ConfigError("SmcSpec: kernel sizes must be odd and positive");
    if (in_channels <= 0 || out_channels <= 0) throw ConfigError("SmcSpec: channel counts must be positive");
    if (in_channels % group_count() != 0)
        throw ConfigError("SmcSpec: in_channels " + std::to_string(in_channels) + " not divisible into " +
                          std::to_string(group_count()) + " groups");
}

void SwmrSpec::validate() const {
    if (width_factor < 1) throw ConfigError("SwmrSpec: width_factor must be >= 1");
    if (static_cast<int>(branch_specs.size()) != width_factor)
        throw ConfigError("SwmrSpec: expected " + std::to_string(width_factor) + " branch specs, got " +
                          std::to_string(branch_specs.size()));
    for (const auto& b : branch_specs) {
        b.validate();
        if (b.in_channels != b.out_channels)
            throw ConfigError("SwmrSpec: residual branches must preserve channel count");
        if (b.in_channels != branch_specs.front().in_channels)
            throw ConfigError("SwmrSpec: all branches must share the input channel count");
    }
}

Tensor mixed_depthwise(const Tensor& input, const std::vector<Tensor>& group_kernels) {
    const int c = input.dim(0);
    const int groups = static_cast<int>(group_kernels.size());
    if (groups == 0 || c % groups != 0) throw ConfigError("mixed_depthwise: channels not divisible into groups");
    const int gsize = c / groups;
    Tensor out = Tensor::zeros(input.shape);
    for (int g = 0; g < groups; ++g) {
        if (group_kernels[static_cast<std::size_t>(g)].dim(0) != gsize)
            throw ShapeError("mixed_depthwise: group kernel count mismatch");
        depthwise_conv2d_range(input, g * gsize, gsize, group_kernels[static_cast<std::size_t>(g)], out);
    }
    return out;
}

SpikeTrain sconv_forward(const SpikeTrain& input, const Tensor& weights, const LifConfig& cfg, LifState& state) {
    cfg.validate();
    const int t_steps = input.steps();
    const int c_out = weights.dim(0);
    Tensor out = Tensor::zeros({t_steps, c_out, input.height(), input.width()});
    SpikeTrain result{std::move(out)};
    Tensor spikes = Tensor::zeros({c_out, input.height(), input.width()});
    for (int t = 0; t < t_steps; ++t) {
        Tensor current = conv2d(input.step(t), weights, 1, PaddingMode::Same);
        lif_step_inplace(state.v, current, cfg, spikes, nullptr);
        result.set_step(t, spikes);
    }
    return result;
}

SpikeTrain smc_forward(const SpikeTrain& input, const SmcSpec& spec, const SmcParams& params, const LifConfig& cfg,
                       SmcStates& states) {
    spec.validate();
    cfg.validate();
    if (input.channels() != spec.in_channels) throw ShapeError("smc_forward: input channel mismatch");
    const int t_steps = input.steps();
    Tensor out = Tensor::zeros({t_steps, spec.out_channels, input.height(), input.width()});
    SpikeTrain result{std::move(out)};
    Tensor sdc_spikes = Tensor::zeros({spec.in_channels, input.height(), input.width()});
    Tensor spc_spikes = Tensor::zeros({spec.out_channels, input.height(), input.width()});
    for (int t = 0; t < t_steps; ++t) {
        Tensor dw_current = mixed_depthwise(input.step(t), params.depthwise);
        lif_step_inplace(states.sdc.v, dw_current, cfg, sdc_spikes, nullptr);
        Tensor pw_current = conv2d(sdc_spikes, params.pointwise, 1, PaddingMode::Same);
        lif_step_inplace(states.spc.v, pw_current, cfg, spc_spikes, nullptr);
        result.set_step(t, spc_spikes);
    }
    return result;
}

SpikeTrain swmr_forward(const SpikeTrain& input, const SwmrSpec& spec, const SwmrParams& params, const LifConfig& cfg,
                        SwmrStates& states) {
    spec.validate();
    cfg.validate();
    if (static_cast<int>(params.branches.size()) != spec.width_factor)
        throw ConfigError("swmr_forward: branch parameter count mismatch");
    if (input.channels() != spec.branch_specs.front().in_channels)
        throw ShapeError("swmr_forward: input channel mismatch");
    const int t_steps = input.steps();
    Tensor out = Tensor::zeros(input.data.shape);
    SpikeTrain result{std::move(out)};
    Tensor sdc_spikes = Tensor::zeros({input.channels(), input.height(), input.width()});
    Tensor merge_spikes = Tensor::zeros({input.channels(), input.height(), input.width()});
    for (int t = 0; t < t_steps; ++t) {
        Tensor step_in = input.step(t);
        // Shortcut current: v_threshold per input spike, so an input spike
        // alone can fire the merging neuron.
        Tensor merged = step_in;
        merged.scale_(cfg.v_threshold);
        for (int b = 0; b < spec.width_factor; ++b) {
            const auto& bp = params.branches[static_cast<std::size_t>(b)];
            Tensor dw_current = mixed_depthwise(step_in, bp.depthwise);
            lif_step_inplace(states.branch_sdc[static_cast<std::size_t>(b)].v, dw_current, cfg, sdc_spikes, nullptr);
            Tensor pw_current = conv2d(sdc_spikes, bp.pointwise, 1, PaddingMode::Same);
            merged.add_(pw_current);
        }
        lif_step_inplace(states.merge.v, merged, cfg, merge_spikes, nullptr);
        result.set_step(t, merge_spikes);
    }
    return result;
}

SpikeTrain pool_forward(const SpikeTrain& input, int k) {
    const int t_steps = input.steps();
    PoolResult first = max_pool2d(input.step(0), k);
    Tensor out = Tensor::zeros({t_steps, first.output.dim(0), first.output.dim(1), first.output.dim(2)});
    SpikeTrain result{std::move(out)};
    result.set_step(0, first.output);
    for (int t = 1; t < t_steps; ++t) result.set_step(t, max_pool2d(input.step(t), k).output);
    return result;
}

Tensor output_integrate(const SpikeTrain& input, const Tensor& fc_weights) {
    if (fc_weights.rank() != 2) throw ShapeError("output_integrate: fc_weights must be [K,F]");
    const int features = fc_weights.dim(1);
    if (input.step_size() != features)
        throw ShapeError("output_integrate: flattened step size " + std::to_string(input.step_size()) +
                         " vs fc features " + std::to_string(features));
    const int k = fc_weights.dim(0);
    const int t_steps = input.steps();
    std::vector<double> acc(static_cast<std::size_t>(k), 0.0);
    for (int t = 0; t < t_steps; ++t) {
        const float* x = &input.data.data[static_cast<std::size_t>(t) * features];
        for (int row = 0; row < k; ++row) {
            const float* w = &fc_weights.data[static_cast<std::size_t>(row) * features];
            double s = 0.0;
            for (int f = 0; f < features; ++f) s += static_cast<double>(w[f]) * static_cast<double>(x[f]);
            acc[static_cast<std::size_t>(row)] += s;
        }
    }
    Tensor out = Tensor::zeros({k});
    for (int row = 0; row < k; ++row) out[row] = static_cast<float>(acc[static_cast<std::size_t>(row)] / t_steps);
    require_finite(out, "output_integrate");
    return out;
}

SmcStates make_smc_states(const SmcSpec& spec, int h, int w, const LifConfig& cfg) {
    return SmcStates{LifState::resting({spec.in_channels, h, w}, cfg), LifState::resting({spec.out_channels, h, w}, cfg)};
}

SwmrStates make_swmr_states(const SwmrSpec& spec, int h, int w, const LifConfig& cfg) {
    SwmrStates st;
    const int c = spec.branch_specs.front().in_channels;
    for (int b = 0; b < spec.width_factor; ++b) st.branch_sdc.push_back(LifState::resting({c, h, w}, cfg));
    st.merge = LifState::resting({c, h, w}, cfg);
    return st;
}

}  // namespace spikegrid
