#pragma once

#include <cstdint>
#include <initializer_list>
#include <string>
#include <vector>

#include "spikegrid/errors.hpp"

namespace spikegrid {

class Rng;

// Dense N-dimensional float32 array, row-major with the last axis fastest.
// Invariant: product(shape) == data.size().
struct Tensor {
    std::vector<int> shape;
    std::vector<float> data;

    Tensor() = default;
    Tensor(std::vector<int> s, std::vector<float> d);

    static Tensor zeros(std::vector<int> shape);
    static Tensor full(std::vector<int> shape, float value);
    // Fan-in scaled uniform init: U(-sqrt(3/fan_in), +sqrt(3/fan_in)).
    static Tensor uniform_fan_in(std::vector<int> shape, int fan_in, Rng& rng);

    std::int64_t size() const { return static_cast<std::int64_t>(data.size()); }
    int rank() const { return static_cast<int>(shape.size()); }
    int dim(int i) const { return shape[static_cast<std::size_t>(i)]; }

    float& operator[](std::int64_t i) { return data[static_cast<std::size_t>(i)]; }
    float operator[](std::int64_t i) const { return data[static_cast<std::size_t>(i)]; }

    float& at(std::initializer_list<int> idx);
    float at(std::initializer_list<int> idx) const;

    // Same buffer, new shape; element count must match.
    Tensor reshaped(std::vector<int> new_shape) const;

    bool same_shape(const Tensor& other) const { return shape == other.shape; }
    std::string shape_str() const;

    void fill(float v);
    bool all_finite() const;

    // In-place elementwise helpers (shapes must match for the binary ones).
    void add_(const Tensor& other);
    void add_scaled_(const Tensor& other, float scale);
    void scale_(float s);
};

std::int64_t shape_product(const std::vector<int>& shape);
std::string shape_to_string(const std::vector<int>& shape);

// Throws ShapeError unless the two shapes are identical.
void require_same_shape(const Tensor& a, const Tensor& b, const char* what);
// Throws NumericError if any element is NaN/Inf.
void require_finite(const Tensor& t, const char* what);

// out[m,n] = sum_k a[m,k] * b[k,n]; accumulation in double.
Tensor matmul(const Tensor& a, const Tensor& b);
// out[m] = sum_k a[m,k] * x[k].
Tensor matvec(const Tensor& a, const Tensor& x);

float max_abs(const Tensor& t);

}  // namespace spikegrid
