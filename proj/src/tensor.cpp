#include "spikegrid/tensor.hpp"

#include <cmath>
#include <sstream>

#include "spikegrid/rng.hpp"

namespace spikegrid {

std::int64_t shape_product(const std::vector<int>& shape) {
    std::int64_t p = 1;
    for (int d : shape) {
        if (d <= 0) throw ShapeError("tensor dimensions must be positive, got " + shape_to_string(shape));
        p *= d;
    }
    return p;
}

std::string shape_to_string(const std::vector<int>& shape) {
    std::ostringstream os;
    os << "[";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) os << ",";
        os << shape[i];
    }
    os << "]";
    return os.str();
}

Tensor::Tensor(std::vector<int> s, std::vector<float> d) : shape(std::move(s)), data(std::move(d)) {
    if (shape_product(shape) != static_cast<std::int64_t>(data.size()))
        throw ShapeError("tensor data length " + std::to_string(data.size()) + " does not match shape " +
                         shape_to_string(shape));
}

Tensor Tensor::zeros(std::vector<int> shape) {
    const auto n = shape_product(shape);
    Tensor t;
    t.shape = std::move(shape);
    t.data.assign(static_cast<std::size_t>(n), 0.0f);
    return t;
}

Tensor Tensor::full(std::vector<int> shape, float value) {
    Tensor t = zeros(std::move(shape));
    t.fill(value);
    return t;
}

Tensor Tensor::uniform_fan_in(std::vector<int> shape, int fan_in, Rng& rng) {
    if (fan_in <= 0) throw ShapeError("fan_in must be positive");
    const double bound = std::sqrt(3.0 / static_cast<double>(fan_in));
    Tensor t = zeros(std::move(shape));
    for (auto& v : t.data) v = static_cast<float>(rng.uniform(-bound, bound));
    return t;
}

namespace {

std::int64_t flat_index(const std::vector<int>& shape, std::initializer_list<int> idx) {
    if (idx.size() != shape.size())
        throw ShapeError("index rank " + std::to_string(idx.size()) + " vs tensor rank " + std::to_string(shape.size()));
    std::int64_t flat = 0;
    int axis = 0;
    for (int i : idx) {
        if (i < 0 || i >= shape[static_cast<std::size_t>(axis)])
            throw ShapeError("index out of range on axis " + std::to_string(axis));
        flat = flat * shape[static_cast<std::size_t>(axis)] + i;
        ++axis;
    }
    return flat;
}

}  // namespace

float& Tensor::at(std::initializer_list<int> idx) { return data[static_cast<std::size_t>(flat_index(shape, idx))]; }

float Tensor::at(std::initializer_list<int> idx) const { return data[static_cast<std::size_t>(flat_index(shape, idx))]; }

Tensor Tensor::reshaped(std::vector<int> new_shape) const {
    if (shape_product(new_shape) != size())
        throw ShapeError("cannot reshape " + shape_str() + " to " + shape_to_string(new_shape));
    Tensor t;
    t.shape = std::move(new_shape);
    t.data = data;
    return t;
}

std::string Tensor::shape_str() const { return shape_to_string(shape); }

void Tensor::fill(float v) {
    for (auto& x : data) x = v;
}

bool Tensor::all_finite() const {
    for (float v : data)
        if (!std::isfinite(v)) return false;
    return true;
}

void Tensor::add_(const Tensor& other) {
    require_same_shape(*this, other, "add_");
    for (std::size_t i = 0; i < data.size(); ++i) data[i] += other.data[i];
}

void Tensor::add_scaled_(const Tensor& other, float scale) {
    require_same_shape(*this, other, "add_scaled_");
    for (std::size_t i = 0; i < data.size(); ++i) data[i] += scale * other.data[i];
}

void Tensor::scale_(float s) {
    for (auto& x : data) x *= s;
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* what) {
    if (!a.same_shape(b))
        throw ShapeError(std::string(what) + ": shape mismatch " + a.shape_str() + " vs " + b.shape_str());
}

void require_finite(const Tensor& t, const char* what) {
    if (!t.all_finite()) throw NumericError(std::string(what) + " produced a non-finite value");
}

Tensor matmul(const Tensor& a, const Tensor& b) {
    if (a.rank() != 2 || b.rank() != 2 || a.dim(1) != b.dim(0))
        throw ShapeError("matmul: incompatible shapes " + a.shape_str() + " x " + b.shape_str());
    const int m = a.dim(0), k = a.dim(1), n = b.dim(1);
    Tensor out = Tensor::zeros({m, n});
    std::vector<double> row(static_cast<std::size_t>(n));
    for (int i = 0; i < m; ++i) {
        std::fill(row.begin(), row.end(), 0.0);
        for (int p = 0; p < k; ++p) {
            const double av = a.data[static_cast<std::size_t>(i) * k + p];
            const float* brow = &b.data[static_cast<std::size_t>(p) * n];
            for (int j = 0; j < n; ++j) row[static_cast<std::size_t>(j)] += av * brow[j];
        }
        for (int j = 0; j < n; ++j) out.data[static_cast<std::size_t>(i) * n + j] = static_cast<float>(row[static_cast<std::size_t>(j)]);
    }
    require_finite(out, "matmul");
    return out;
}

Tensor matvec(const Tensor& a, const Tensor& x) {
    if (a.rank() != 2 || a.dim(1) != static_cast<int>(x.size()))
        throw ShapeError("matvec: incompatible shapes " + a.shape_str() + " x " + x.shape_str());
    const int m = a.dim(0), k = a.dim(1);
    Tensor out = Tensor::zeros({m});
    for (int i = 0; i < m; ++i) {
        double acc = 0.0;
        const float* arow = &a.data[static_cast<std::size_t>(i) * k];
        for (int p = 0; p < k; ++p) acc += static_cast<double>(arow[p]) * x.data[static_cast<std::size_t>(p)];
        out.data[static_cast<std::size_t>(i)] = static_cast<float>(acc);
    }
    require_finite(out, "matvec");
    return out;
}

float max_abs(const Tensor& t) {
    float m = 0.0f;
    for (float v : t.data) m = std::max(m, std::abs(v));
    return m;
}

}  // namespace spikegrid
