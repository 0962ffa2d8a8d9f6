#pragma once

#include <cstdint>
#include <vector>

#include "spikegrid/tensor.hpp"

namespace spikegrid {

enum class PaddingMode { Same, Valid };

// input [C_in,H,W], kernels [C_out,C_in,k,k], k odd -> [C_out,H',W'].
// Same padding pads with zeros; accumulation is in double.
Tensor conv2d(const Tensor& input, const Tensor& kernels, int stride, PaddingMode padding);

// input [C,H,W], kernels [C,k,k]: channel i convolved with kernel i only.
Tensor depthwise_conv2d(const Tensor& input, const Tensor& kernels, int stride, PaddingMode padding);

struct PoolResult {
    Tensor output;                 // [C, floor(H/k), floor(W/k)]
    std::vector<std::int32_t> argmax;  // flat input index of each window winner
};

// Non-overlapping k x k max pooling; trailing rows/cols that do not fill a
// window are dropped (floor semantics).
PoolResult max_pool2d(const Tensor& input, int k);

// Gradients for the kernels above (stride 1 only, the only stride the
// network uses). g_out has the forward output's shape.
Tensor conv2d_grad_input(const Tensor& g_out, const Tensor& kernels, int in_h, int in_w, PaddingMode padding);
Tensor conv2d_grad_kernels(const Tensor& g_out, const Tensor& input, int k, PaddingMode padding);
Tensor depthwise_grad_input(const Tensor& g_out, const Tensor& kernels, int in_h, int in_w, PaddingMode padding);
Tensor depthwise_grad_kernels(const Tensor& g_out, const Tensor& input, int k, PaddingMode padding);
Tensor max_pool2d_backward(const Tensor& g_out, const std::vector<std::int32_t>& argmax, int in_c, int in_h, int in_w);

// Depthwise convolution over the channel range [c0, c0+count) of `input`,
// writing into the same range of `out` (both [C,H,W], same padding, stride 1).
// kernels is [count,k,k]. Lets mixed-kernel groups run without slicing copies.
void depthwise_conv2d_range(const Tensor& input, int c0, int count, const Tensor& kernels, Tensor& out);
void depthwise_range_grad_input(const Tensor& g_out, int c0, int count, const Tensor& kernels, Tensor& g_in);
void depthwise_range_grad_kernels(const Tensor& g_out, int c0, int count, const Tensor& input, int k, Tensor& g_kernels);

}  // namespace spikegrid
