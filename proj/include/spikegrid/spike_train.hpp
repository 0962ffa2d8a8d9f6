#pragma once

#include "spikegrid/tensor.hpp"

namespace spikegrid {

// Time-major train of binary maps, shape [T,C,H,W].
struct SpikeTrain {
    Tensor data;

    static SpikeTrain wrap(Tensor t, bool validate_binary = true);

    int steps() const { return data.dim(0); }
    int channels() const { return data.dim(1); }
    int height() const { return data.dim(2); }
    int width() const { return data.dim(3); }
    std::int64_t step_size() const { return data.size() / steps(); }

    Tensor step(int t) const;               // copy of one [C,H,W] slice
    void set_step(int t, const Tensor& v);  // write one slice back

    bool is_binary() const;
};

}  // namespace spikegrid
