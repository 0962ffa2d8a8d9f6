#include "spikegrid/conv.hpp"

#include <algorithm>
#include <cmath>

namespace spikegrid {

namespace {

void check_conv_args(const Tensor& input, const Tensor& kernels, int stride, int in_rank, int kern_rank) {
    if (input.rank() != in_rank) throw ShapeError("conv: input must be rank " + std::to_string(in_rank) + ", got " + input.shape_str());
    if (kernels.rank() != kern_rank)
        throw ShapeError("conv: kernels must be rank " + std::to_string(kern_rank) + ", got " + kernels.shape_str());
    if (stride < 1) throw ShapeError("conv: stride must be >= 1");
    const int k = kernels.shape.back();
    if (k % 2 == 0) throw ShapeError("conv: kernel size must be odd, got " + std::to_string(k));
    if (kernels.shape[kern_rank - 2] != k) throw ShapeError("conv: kernels must be square, got " + kernels.shape_str());
}

int out_extent(int in, int k, int stride, int pad) {
    const int span = in + 2 * pad - k;
    if (span < 0) throw ShapeError("conv: kernel larger than padded input");
    return span / stride + 1;
}

// acc[oy*ow + ox] += w * in_plane[(oy*stride + ky - p)*w_in + ox*stride + kx - p]
// for every valid (oy, ox). Stride-1 fast path keeps both sides contiguous.
void accumulate_tap(std::vector<double>& acc, const float* in_plane, int h_in, int w_in, int oh, int ow, int stride,
                    int pad, int ky, int kx, float w) {
    if (w == 0.0f) return;
    const double wd = static_cast<double>(w);
    if (stride == 1) {
        const int oy_lo = std::max(0, pad - ky);
        const int oy_hi = std::min(oh - 1, h_in - 1 + pad - ky);
        const int ox_lo = std::max(0, pad - kx);
        const int ox_hi = std::min(ow - 1, w_in - 1 + pad - kx);
        for (int oy = oy_lo; oy <= oy_hi; ++oy) {
            const float* src = in_plane + static_cast<std::size_t>(oy + ky - pad) * w_in + (ox_lo + kx - pad);
            double* dst = acc.data() + static_cast<std::size_t>(oy) * ow + ox_lo;
            const int n = ox_hi - ox_lo + 1;
            for (int i = 0; i < n; ++i) dst[i] += wd * static_cast<double>(src[i]);
        }
        return;
    }
    for (int oy = 0; oy < oh; ++oy) {
        const int iy = oy * stride + ky - pad;
        if (iy < 0 || iy >= h_in) continue;
        for (int ox = 0; ox < ow; ++ox) {
            const int ix = ox * stride + kx - pad;
            if (ix < 0 || ix >= w_in) continue;
            acc[static_cast<std::size_t>(oy) * ow + ox] += wd * static_cast<double>(in_plane[static_cast<std::size_t>(iy) * w_in + ix]);
        }
    }
}

void store_plane(const std::vector<double>& acc, float* out_plane) {
    for (std::size_t i = 0; i < acc.size(); ++i) out_plane[i] = static_cast<float>(acc[i]);
}

}  // namespace

Tensor conv2d(const Tensor& input, const Tensor& kernels, int stride, PaddingMode padding) {
    check_conv_args(input, kernels, stride, 3, 4);
    const int c_in = input.dim(0), h = input.dim(1), w = input.dim(2);
    const int c_out = kernels.dim(0), k = kernels.dim(3);
    if (kernels.dim(1) != c_in)
        throw ShapeError("conv2d: input channels " + std::to_string(c_in) + " vs kernel C_in " + std::to_string(kernels.dim(1)));
    const int pad = padding == PaddingMode::Same ? (k - 1) / 2 : 0;
    const int oh = out_extent(h, k, stride, pad);
    const int ow = out_extent(w, k, stride, pad);

    Tensor out = Tensor::zeros({c_out, oh, ow});
    std::vector<double> acc(static_cast<std::size_t>(oh) * ow);
    for (int co = 0; co < c_out; ++co) {
        std::fill(acc.begin(), acc.end(), 0.0);
        for (int ci = 0; ci < c_in; ++ci) {
            const float* in_plane = &input.data[static_cast<std::size_t>(ci) * h * w];
            const float* kern = &kernels.data[(static_cast<std::size_t>(co) * c_in + ci) * k * k];
            for (int ky = 0; ky < k; ++ky)
                for (int kx = 0; kx < k; ++kx)
                    accumulate_tap(acc, in_plane, h, w, oh, ow, stride, pad, ky, kx, kern[ky * k + kx]);
        }
        store_plane(acc, &out.data[static_cast<std::size_t>(co) * oh * ow]);
    }
    require_finite(out, "conv2d");
    return out;
}

Tensor depthwise_conv2d(const Tensor& input, const Tensor& kernels, int stride, PaddingMode padding) {
    check_conv_args(input, kernels, stride, 3, 3);
    const int c = input.dim(0), h = input.dim(1), w = input.dim(2);
    const int k = kernels.dim(2);
    if (kernels.dim(0) != c)
        throw ShapeError("depthwise_conv2d: need one kernel per channel, got " + kernels.shape_str() + " for input " +
                         input.shape_str());
    const int pad = padding == PaddingMode::Same ? (k - 1) / 2 : 0;
    const int oh = out_extent(h, k, stride, pad);
    const int ow = out_extent(w, k, stride, pad);

    Tensor out = Tensor::zeros({c, oh, ow});
    std::vector<double> acc(static_cast<std::size_t>(oh) * ow);
    for (int ci = 0; ci < c; ++ci) {
        std::fill(acc.begin(), acc.end(), 0.0);
        const float* in_plane = &input.data[static_cast<std::size_t>(ci) * h * w];
        const float* kern = &kernels.data[static_cast<std::size_t>(ci) * k * k];
        for (int ky = 0; ky < k; ++ky)
            for (int kx = 0; kx < k; ++kx)
                accumulate_tap(acc, in_plane, h, w, oh, ow, stride, pad, ky, kx, kern[ky * k + kx]);
        store_plane(acc, &out.data[static_cast<std::size_t>(ci) * oh * ow]);
    }
    require_finite(out, "depthwise_conv2d");
    return out;
}

PoolResult max_pool2d(const Tensor& input, int k) {
    if (input.rank() != 3) throw ShapeError("max_pool2d: input must be [C,H,W], got " + input.shape_str());
    if (k < 1) throw ShapeError("max_pool2d: k must be >= 1");
    const int c = input.dim(0), h = input.dim(1), w = input.dim(2);
    const int oh = h / k, ow = w / k;
    if (oh < 1 || ow < 1) throw ShapeError("max_pool2d: window larger than input");

    PoolResult res;
    res.output = Tensor::zeros({c, oh, ow});
    res.argmax.assign(static_cast<std::size_t>(c) * oh * ow, 0);
    for (int ci = 0; ci < c; ++ci) {
        const float* in_plane = &input.data[static_cast<std::size_t>(ci) * h * w];
        for (int oy = 0; oy < oh; ++oy) {
            for (int ox = 0; ox < ow; ++ox) {
                float best = in_plane[static_cast<std::size_t>(oy * k) * w + ox * k];
                int best_iy = oy * k, best_ix = ox * k;
                for (int dy = 0; dy < k; ++dy) {
                    for (int dx = 0; dx < k; ++dx) {
                        const float v = in_plane[static_cast<std::size_t>(oy * k + dy) * w + ox * k + dx];
                        if (v > best) {
                            best = v;
                            best_iy = oy * k + dy;
                            best_ix = ox * k + dx;
                        }
                    }
                }
                const std::size_t oi = (static_cast<std::size_t>(ci) * oh + oy) * ow + ox;
                res.output.data[oi] = best;
                res.argmax[oi] = static_cast<std::int32_t>((static_cast<std::size_t>(ci) * h + best_iy) * w + best_ix);
            }
        }
    }
    require_finite(res.output, "max_pool2d");
    return res;
}

Tensor conv2d_grad_input(const Tensor& g_out, const Tensor& kernels, int in_h, int in_w, PaddingMode padding) {
    const int c_out = g_out.dim(0), oh = g_out.dim(1), ow = g_out.dim(2);
    const int c_in = kernels.dim(1), k = kernels.dim(3);
    const int pad = padding == PaddingMode::Same ? (k - 1) / 2 : 0;
    Tensor g_in = Tensor::zeros({c_in, in_h, in_w});
    std::vector<double> acc(static_cast<std::size_t>(in_h) * in_w);
    for (int ci = 0; ci < c_in; ++ci) {
        std::fill(acc.begin(), acc.end(), 0.0);
        for (int co = 0; co < c_out; ++co) {
            const float* g_plane = &g_out.data[static_cast<std::size_t>(co) * oh * ow];
            const float* kern = &kernels.data[(static_cast<std::size_t>(co) * c_in + ci) * k * k];
            for (int ky = 0; ky < k; ++ky) {
                for (int kx = 0; kx < k; ++kx) {
                    const float w = kern[ky * k + kx];
                    if (w == 0.0f) continue;
                    const double wd = static_cast<double>(w);
                    const int oy_lo = std::max(0, pad - ky);
                    const int oy_hi = std::min(oh - 1, in_h - 1 + pad - ky);
                    const int ox_lo = std::max(0, pad - kx);
                    const int ox_hi = std::min(ow - 1, in_w - 1 + pad - kx);
                    for (int oy = oy_lo; oy <= oy_hi; ++oy) {
                        const float* src = g_plane + static_cast<std::size_t>(oy) * ow + ox_lo;
                        double* dst = acc.data() + static_cast<std::size_t>(oy + ky - pad) * in_w + (ox_lo + kx - pad);
                        const int n = ox_hi - ox_lo + 1;
                        for (int i = 0; i < n; ++i) dst[i] += wd * static_cast<double>(src[i]);
                    }
                }
            }
        }
        store_plane(acc, &g_in.data[static_cast<std::size_t>(ci) * in_h * in_w]);
    }
    return g_in;
}

Tensor conv2d_grad_kernels(const Tensor& g_out, const Tensor& input, int k, PaddingMode padding) {
    const int c_out = g_out.dim(0), oh = g_out.dim(1), ow = g_out.dim(2);
    const int c_in = input.dim(0), in_h = input.dim(1), in_w = input.dim(2);
    const int pad = padding == PaddingMode::Same ? (k - 1) / 2 : 0;
    Tensor g_k = Tensor::zeros({c_out, c_in, k, k});
    for (int co = 0; co < c_out; ++co) {
        const float* g_plane = &g_out.data[static_cast<std::size_t>(co) * oh * ow];
        for (int ci = 0; ci < c_in; ++ci) {
            const float* in_plane = &input.data[static_cast<std::size_t>(ci) * in_h * in_w];
            float* dst = &g_k.data[(static_cast<std::size_t>(co) * c_in + ci) * k * k];
            for (int ky = 0; ky < k; ++ky) {
                for (int kx = 0; kx < k; ++kx) {
                    const int oy_lo = std::max(0, pad - ky);
                    const int oy_hi = std::min(oh - 1, in_h - 1 + pad - ky);
                    const int ox_lo = std::max(0, pad - kx);
                    const int ox_hi = std::min(ow - 1, in_w - 1 + pad - kx);
                    double s = 0.0;
                    for (int oy = oy_lo; oy <= oy_hi; ++oy) {
                        const float* g_row = g_plane + static_cast<std::size_t>(oy) * ow + ox_lo;
                        const float* in_row = in_plane + static_cast<std::size_t>(oy + ky - pad) * in_w + (ox_lo + kx - pad);
                        const int n = ox_hi - ox_lo + 1;
                        for (int i = 0; i < n; ++i) s += static_cast<double>(g_row[i]) * static_cast<double>(in_row[i]);
                    }
                    dst[ky * k + kx] = static_cast<float>(s);
                }
            }
        }
    }
    return g_k;
}

namespace {

void dw_grad_input_pad(const Tensor& g_out, int c0, int count, const Tensor& kernels, int pad, Tensor& g_in) {
    const int h = g_in.dim(1), w = g_in.dim(2);
    const int oh = g_out.dim(1), ow = g_out.dim(2);
    const int k = kernels.dim(kernels.rank() - 1);
    std::vector<double> acc(static_cast<std::size_t>(h) * w);
    for (int i = 0; i < count; ++i) {
        std::fill(acc.begin(), acc.end(), 0.0);
        const float* g_plane = &g_out.data[static_cast<std::size_t>(c0 + i) * oh * ow];
        const float* kern = &kernels.data[static_cast<std::size_t>(i) * k * k];
        for (int ky = 0; ky < k; ++ky) {
            for (int kx = 0; kx < k; ++kx) {
                const float wv = kern[ky * k + kx];
                if (wv == 0.0f) continue;
                const double wd = static_cast<double>(wv);
                const int oy_lo = std::max(0, pad - ky);
                const int oy_hi = std::min(oh - 1, h - 1 + pad - ky);
                const int ox_lo = std::max(0, pad - kx);
                const int ox_hi = std::min(ow - 1, w - 1 + pad - kx);
                for (int oy = oy_lo; oy <= oy_hi; ++oy) {
                    const float* src = g_plane + static_cast<std::size_t>(oy) * ow + ox_lo;
                    double* dst = acc.data() + static_cast<std::size_t>(oy + ky - pad) * w + (ox_lo + kx - pad);
                    const int n = ox_hi - ox_lo + 1;
                    for (int j = 0; j < n; ++j) dst[j] += wd * static_cast<double>(src[j]);
                }
            }
        }
        float* out_plane = &g_in.data[static_cast<std::size_t>(c0 + i) * h * w];
        for (std::size_t j = 0; j < acc.size(); ++j) out_plane[j] += static_cast<float>(acc[j]);
    }
}

void dw_grad_kernels_pad(const Tensor& g_out, int c0, int count, const Tensor& input, int k, int pad, Tensor& g_kernels) {
    const int h = input.dim(1), w = input.dim(2);
    const int oh = g_out.dim(1), ow = g_out.dim(2);
    for (int i = 0; i < count; ++i) {
        const float* g_plane = &g_out.data[static_cast<std::size_t>(c0 + i) * oh * ow];
        const float* in_plane = &input.data[static_cast<std::size_t>(c0 + i) * h * w];
        float* dst = &g_kernels.data[static_cast<std::size_t>(i) * k * k];
        for (int ky = 0; ky < k; ++ky) {
            for (int kx = 0; kx < k; ++kx) {
                const int oy_lo = std::max(0, pad - ky);
                const int oy_hi = std::min(oh - 1, h - 1 + pad - ky);
                const int ox_lo = std::max(0, pad - kx);
                const int ox_hi = std::min(ow - 1, w - 1 + pad - kx);
                double s = 0.0;
                for (int oy = oy_lo; oy <= oy_hi; ++oy) {
                    const float* g_row = g_plane + static_cast<std::size_t>(oy) * ow + ox_lo;
                    const float* in_row = in_plane + static_cast<std::size_t>(oy + ky - pad) * w + (ox_lo + kx - pad);
                    const int n = ox_hi - ox_lo + 1;
                    for (int j = 0; j < n; ++j) s += static_cast<double>(g_row[j]) * static_cast<double>(in_row[j]);
                }
                dst[ky * k + kx] += static_cast<float>(s);
            }
        }
    }
}

}  // namespace

Tensor depthwise_grad_input(const Tensor& g_out, const Tensor& kernels, int in_h, int in_w, PaddingMode padding) {
    const int c = g_out.dim(0);
    const int k = kernels.dim(2);
    const int pad = padding == PaddingMode::Same ? (k - 1) / 2 : 0;
    Tensor g_in = Tensor::zeros({c, in_h, in_w});
    dw_grad_input_pad(g_out, 0, c, kernels, pad, g_in);
    return g_in;
}

Tensor depthwise_grad_kernels(const Tensor& g_out, const Tensor& input, int k, PaddingMode padding) {
    const int c = g_out.dim(0);
    const int pad = padding == PaddingMode::Same ? (k - 1) / 2 : 0;
    Tensor g_k = Tensor::zeros({c, k, k});
    dw_grad_kernels_pad(g_out, 0, c, input, k, pad, g_k);
    return g_k;
}

Tensor max_pool2d_backward(const Tensor& g_out, const std::vector<std::int32_t>& argmax, int in_c, int in_h, int in_w) {
    Tensor g_in = Tensor::zeros({in_c, in_h, in_w});
    for (std::size_t i = 0; i < g_out.data.size(); ++i) g_in.data[static_cast<std::size_t>(argmax[i])] += g_out.data[i];
    return g_in;
}

void depthwise_conv2d_range(const Tensor& input, int c0, int count, const Tensor& kernels, Tensor& out) {
    const int h = input.dim(1), w = input.dim(2);
    const int k = kernels.dim(2);
    const int pad = (k - 1) / 2;
    std::vector<double> acc(static_cast<std::size_t>(h) * w);
    for (int i = 0; i < count; ++i) {
        std::fill(acc.begin(), acc.end(), 0.0);
        const float* in_plane = &input.data[static_cast<std::size_t>(c0 + i) * h * w];
        const float* kern = &kernels.data[static_cast<std::size_t>(i) * k * k];
        for (int ky = 0; ky < k; ++ky)
            for (int kx = 0; kx < k; ++kx)
                accumulate_tap(acc, in_plane, h, w, h, w, 1, pad, ky, kx, kern[ky * k + kx]);
        store_plane(acc, &out.data[static_cast<std::size_t>(c0 + i) * h * w]);
    }
}

void depthwise_range_grad_input(const Tensor& g_out, int c0, int count, const Tensor& kernels, Tensor& g_in) {
    const int k = kernels.dim(2);
    dw_grad_input_pad(g_out, c0, count, kernels, (k - 1) / 2, g_in);
}

void depthwise_range_grad_kernels(const Tensor& g_out, int c0, int count, const Tensor& input, int k, Tensor& g_kernels) {
    dw_grad_kernels_pad(g_out, c0, count, input, k, (k - 1) / 2, g_kernels);
}

}  // namespace spikegrid
