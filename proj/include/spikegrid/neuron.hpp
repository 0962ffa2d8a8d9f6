#pragma once

#include <utility>

#include "spikegrid/tensor.hpp"

namespace spikegrid {

enum class ResetMode { HardToRest };

// Leaky integrate-and-fire parameters. The discrete update is
//   v' = v_rest + decay * (v - v_rest) + I
// with a spike (and hard reset to v_rest) whenever v' >= v_threshold.
struct LifConfig {
    float v_threshold = 1.0f;
    float v_rest = 0.0f;
    float decay = 0.5f;  // in (0, 1]
    ResetMode reset_mode = ResetMode::HardToRest;

    void validate() const;
};

struct LifState {
    Tensor v;  // membrane potential per neuron

    static LifState resting(std::vector<int> shape, const LifConfig& cfg) {
        return LifState{Tensor::full(std::move(shape), cfg.v_rest)};
    }
};

// One membrane update over a whole layer. Pure: returns the spike map and
// the post-reset state. Shapes of state.v and input_current must match.
std::pair<Tensor, LifState> lif_step(const LifState& state, const Tensor& input_current, const LifConfig& cfg);

// In-place variant used by the layer engine. `v` is updated to the
// post-reset potential, `spikes` receives the binary spike map, and when
// `save_v_minus_th` is non-null it receives the pre-threshold potential
// minus v_threshold (what the surrogate derivative is evaluated at).
void lif_step_inplace(Tensor& v, const Tensor& input_current, const LifConfig& cfg, Tensor& spikes,
                      Tensor* save_v_minus_th);

// 1 where the argument is >= 0, else 0 (spike condition is inclusive).
Tensor heaviside(const Tensor& v_minus_th);

enum class SurrogateKind { AadArcsin, AadArccos, Rectangular };

struct SurrogateSpec {
    SurrogateKind kind = SurrogateKind::AadArcsin;
    float lambda = 1.0f;  // support half-width, in (0, 1]

    void validate() const;
};

// Surrogate factor substituted for the spike derivative at v - v_th = x:
//   AadArcsin:   |1 - |arcsin(clamp(x,-1,1))||  for |x| < lambda, else 0
//   AadArccos:   |1 - |arccos(clamp(x,-1,1)) - pi/2||  for |x| < lambda, else 0
//   Rectangular: 1/(2*lambda)  for |x| < lambda, else 0
float surrogate_grad_scalar(float v_minus_th, const SurrogateSpec& spec);
Tensor surrogate_grad(const Tensor& v_minus_th, const SurrogateSpec& spec);

}  // namespace spikegrid
