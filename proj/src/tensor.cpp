#include "ulsad/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <sstream>

namespace ulsad {

namespace {

std::int64_t shape_numel(const std::vector<int>& shape) {
    std::int64_t n = 1;
    for (int d : shape) {
        if (d <= 0) throw ShapeError("tensor dimension must be positive");
        n *= d;
    }
    return n;
}

}  // namespace

Tensor::Tensor(std::vector<int> shape) : shape_(std::move(shape)) {
    data_.assign(static_cast<size_t>(shape_numel(shape_)), 0.0);
}

Tensor::Tensor(std::vector<int> shape, std::vector<real> values) : shape_(std::move(shape)) {
    if (shape_numel(shape_) != static_cast<std::int64_t>(values.size())) {
        throw ShapeError("tensor value count does not match shape");
    }
    data_ = std::move(values);
}

Tensor Tensor::full(std::vector<int> shape, real value) {
    Tensor t(std::move(shape));
    t.fill(value);
    return t;
}

Tensor Tensor::reshaped(std::vector<int> new_shape) const {
    if (shape_numel(new_shape) != numel()) {
        throw ShapeError("reshape changes element count: " + shape_str());
    }
    Tensor out;
    out.shape_ = std::move(new_shape);
    out.data_ = data_;
    return out;
}

void Tensor::fill(real value) { std::fill(data_.begin(), data_.end(), value); }

void Tensor::add_(const Tensor& other) {
    if (other.shape_ != shape_) throw ShapeError("add_: shape mismatch");
    for (size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
}

void Tensor::add_scaled_(const Tensor& other, real scale) {
    if (other.shape_ != shape_) throw ShapeError("add_scaled_: shape mismatch");
    for (size_t i = 0; i < data_.size(); ++i) data_[i] += scale * other.data_[i];
}

void Tensor::scale_(real factor) {
    for (real& v : data_) v *= factor;
}

real Tensor::sum() const {
    real s = 0.0;
    for (real v : data_) s += v;
    return s;
}

real Tensor::min() const {
    if (data_.empty()) throw ShapeError("min of empty tensor");
    return *std::min_element(data_.begin(), data_.end());
}

real Tensor::max() const {
    if (data_.empty()) throw ShapeError("max of empty tensor");
    return *std::max_element(data_.begin(), data_.end());
}

bool Tensor::all_finite() const {
    for (real v : data_) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

std::string Tensor::shape_str() const {
    std::ostringstream os;
    os << "(";
    for (size_t i = 0; i < shape_.size(); ++i) {
        if (i) os << "x";
        os << shape_[i];
    }
    os << ")";
    return os.str();
}

std::uint64_t hash_bytes(const void* data, size_t n, std::uint64_t seed) {
    const auto* p = static_cast<const unsigned char*>(data);
    std::uint64_t h = seed;
    for (size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 1099511628211ull;
    }
    return h;
}

std::uint64_t hash_tensor(const Tensor& t, std::uint64_t seed) {
    return hash_bytes(t.data(), sizeof(real) * static_cast<size_t>(t.numel()), seed);
}

}  // namespace ulsad
