#pragma once

#include <cstdint>
#include <vector>

#include "spikegrid/network.hpp"

namespace spikegrid {

// How spike generation behaves during a recorded forward pass. SmoothTwin
// replaces the step function with a sigmoid (and the backward pass with its
// exact derivative, reset path included) so tape gradients can be checked
// against finite differences.
enum class FireMode { Spike, SmoothTwin };

struct ForwardOptions {
    FireMode fire_mode = FireMode::Spike;
    float twin_alpha = 4.0f;  // sigmoid sharpness in SmoothTwin mode
};

enum class OpKind : std::uint8_t { Conv2d, MixedDepthwise, Lif, AddScaled, MaxPool, LinearAccum, Scale };

// One recorded primitive application at one time step.
struct TapeNode {
    TapeNode(OpKind kind_, int t_, int in_a_, int in_b_, int out_, int param = -1)
        : kind(kind_), t(t_), in_a(in_a_), in_b(in_b_), out(out_), param_id(param) {}

    OpKind kind;
    int t = -1;
    int in_a = -1;  // value id of the primary input
    int in_b = -1;  // secondary input (AddScaled b, LinearAccum step input)
    int out = -1;   // value id of the output
    int param_id = -1;
    std::vector<int> group_param_ids;    // MixedDepthwise: per-group kernels
    int state_slot = -1;                 // Lif: membrane-carry channel
    float scale = 1.0f;                  // AddScaled: out = a + scale*b; Scale: out = scale*a
    std::vector<std::int32_t> argmax;    // MaxPool winners
    int pool_k = 0;
    Tensor saved;                        // Lif: charged potential minus threshold
    FireMode fire_mode = FireMode::Spike;
    float twin_alpha = 0.0f;
    LifConfig lif;
};

// Execution-ordered record of a full forward pass. All intermediate values
// (including the per-step input slices) live in `vals`; nodes reference them
// by index, so the tape replays and differentiates without external state.
struct Tape {
    std::vector<TapeNode> nodes;
    std::vector<Tensor> vals;
    int logits_id = -1;
    int num_state_slots = 0;

    int add_val(Tensor v) {
        vals.push_back(std::move(v));
        return static_cast<int>(vals.size()) - 1;
    }
    int lif_node_count() const;
};

// Runs the network over an input current train [T,C,H,W]; when `tape` is
// non-null every primitive is recorded. Returns the logits.
Tensor run_network(const Network& net, const Tensor& input_train, Tape* tape, const ForwardOptions& opts);

inline Tensor forward_record(const Network& net, const Tensor& input_train, Tape& tape,
                             const ForwardOptions& opts = {}) {
    return run_network(net, input_train, &tape, opts);
}

// Re-executes the recorded nodes from the stored inputs; must reproduce the
// recorded logits bit-exactly.
Tensor tape_replay(const Network& net, const Tape& tape);

// Reverse pass. At every spike node the local derivative is the surrogate
// factor evaluated at the saved pre-threshold potential; the membrane
// recurrence carries gradient between steps through the decay path with the
// reset treated as constant. SmoothTwin nodes use the exact sigmoid
// derivative instead (reset differentiated).
GradientSet backward(const Tape& tape, const Network& net, const Tensor& d_logits, const SurrogateSpec& spec);

}  // namespace spikegrid
