#include "spikegrid/neuron.hpp"

#include <cmath>

namespace spikegrid {

void LifConfig::validate() const {
    if (!(decay > 0.0f && decay <= 1.0f)) throw ConfigError("LifConfig: decay must be in (0,1]");
    if (!(v_threshold > v_rest)) throw ConfigError("LifConfig: v_threshold must exceed v_rest");
}

void SurrogateSpec::validate() const {
    if (!(lambda > 0.0f && lambda <= 1.0f)) throw ConfigError("SurrogateSpec: lambda must be in (0,1]");
}

std::pair<Tensor, LifState> lif_step(const LifState& state, const Tensor& input_current, const LifConfig& cfg) {
    require_same_shape(state.v, input_current, "lif_step");
    LifState next{state.v};
    Tensor spikes = Tensor::zeros(state.v.shape);
    lif_step_inplace(next.v, input_current, cfg, spikes, nullptr);
    return {std::move(spikes), std::move(next)};
}

void lif_step_inplace(Tensor& v, const Tensor& input_current, const LifConfig& cfg, Tensor& spikes,
                      Tensor* save_v_minus_th) {
    require_same_shape(v, input_current, "lif_step");
    const float rest = cfg.v_rest, decay = cfg.decay, th = cfg.v_threshold;
    const std::size_t n = v.data.size();
    float* vp = v.data.data();
    const float* ip = input_current.data.data();
    float* sp = spikes.data.data();
    float* hp = save_v_minus_th ? save_v_minus_th->data.data() : nullptr;
    for (std::size_t i = 0; i < n; ++i) {
        const float charged = rest + decay * (vp[i] - rest) + ip[i];
        const bool fired = charged >= th;
        if (hp) hp[i] = charged - th;
        sp[i] = fired ? 1.0f : 0.0f;
        vp[i] = fired ? rest : charged;
    }
}

Tensor heaviside(const Tensor& v_minus_th) {
    Tensor out = Tensor::zeros(v_minus_th.shape);
    for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] = v_minus_th.data[i] >= 0.0f ? 1.0f : 0.0f;
    return out;
}

float surrogate_grad_scalar(float v_minus_th, const SurrogateSpec& spec) {
    const double x = static_cast<double>(v_minus_th);
    const double lambda = static_cast<double>(spec.lambda);
    if (!(std::fabs(x) < lambda)) return 0.0f;
    switch (spec.kind) {
        case SurrogateKind::AadArcsin: {
            const double c = std::clamp(x, -1.0, 1.0);
            return static_cast<float>(std::fabs(1.0 - std::fabs(std::asin(c))));
        }
        case SurrogateKind::AadArccos: {
            const double c = std::clamp(x, -1.0, 1.0);
            return static_cast<float>(std::fabs(1.0 - std::fabs(std::acos(c) - 1.5707963267948966)));
        }
        case SurrogateKind::Rectangular:
            return static_cast<float>(1.0 / (2.0 * lambda));
    }
    return 0.0f;
}

Tensor surrogate_grad(const Tensor& v_minus_th, const SurrogateSpec& spec) {
    spec.validate();
    Tensor out = Tensor::zeros(v_minus_th.shape);
    for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] = surrogate_grad_scalar(v_minus_th.data[i], spec);
    return out;
}

}  // namespace spikegrid
