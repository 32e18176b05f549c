#pragma once

#include <cstdint>
#include <initializer_list>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "ulsad/errors.hpp"

namespace ulsad {

using real = double;

// Dense row-major tensor of doubles, up to 4 dimensions (NCHW at most).
// Deep-copy value semantics; reshape is a metadata change on a copy/move.
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(std::vector<int> shape);
    Tensor(std::vector<int> shape, std::vector<real> values);

    static Tensor zeros(std::vector<int> shape) { return Tensor(std::move(shape)); }
    static Tensor full(std::vector<int> shape, real value);

    bool empty() const { return data_.empty(); }
    int dim() const { return static_cast<int>(shape_.size()); }
    const std::vector<int>& shape() const { return shape_; }
    int shape(int axis) const { return shape_.at(static_cast<size_t>(axis)); }
    std::int64_t numel() const { return static_cast<std::int64_t>(data_.size()); }

    real* data() { return data_.data(); }
    const real* data() const { return data_.data(); }
    std::vector<real>& storage() { return data_; }
    const std::vector<real>& storage() const { return data_; }

    real& operator[](std::int64_t i) { return data_[static_cast<size_t>(i)]; }
    real operator[](std::int64_t i) const { return data_[static_cast<size_t>(i)]; }

    // Unchecked indexed access; the caller owns shape discipline.
    real& at(int a, int b) { return data_[static_cast<size_t>(a) * shape_[1] + b]; }
    real at(int a, int b) const { return data_[static_cast<size_t>(a) * shape_[1] + b]; }
    real& at(int a, int b, int c) {
        return data_[(static_cast<size_t>(a) * shape_[1] + b) * shape_[2] + c];
    }
    real at(int a, int b, int c) const {
        return data_[(static_cast<size_t>(a) * shape_[1] + b) * shape_[2] + c];
    }
    real& at(int a, int b, int c, int d) {
        return data_[((static_cast<size_t>(a) * shape_[1] + b) * shape_[2] + c) * shape_[3] + d];
    }
    real at(int a, int b, int c, int d) const {
        return data_[((static_cast<size_t>(a) * shape_[1] + b) * shape_[2] + c) * shape_[3] + d];
    }

    Tensor reshaped(std::vector<int> new_shape) const;

    void fill(real value);
    void add_(const Tensor& other);          // elementwise, shapes must match
    void add_scaled_(const Tensor& other, real scale);
    void scale_(real factor);
    real sum() const;
    real min() const;
    real max() const;
    bool all_finite() const;

    std::string shape_str() const;

private:
    std::vector<int> shape_;
    std::vector<real> data_;
};

// Seeded RNG wrapper so every stochastic choice in the library is owned
// by an explicit seed.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    real normal(real mean = 0.0, real stddev = 1.0) {
        return std::normal_distribution<real>(mean, stddev)(gen_);
    }
    real uniform(real lo = 0.0, real hi = 1.0) {
        return std::uniform_real_distribution<real>(lo, hi)(gen_);
    }
    std::int64_t integer(std::int64_t lo, std::int64_t hi) {  // inclusive
        return std::uniform_int_distribution<std::int64_t>(lo, hi)(gen_);
    }
    std::mt19937_64& engine() { return gen_; }

private:
    std::mt19937_64 gen_;
};

// FNV-1a over raw tensor bytes; used for frozen-weight contracts.
std::uint64_t hash_bytes(const void* data, size_t n, std::uint64_t seed = 1469598103934665603ull);
std::uint64_t hash_tensor(const Tensor& t, std::uint64_t seed = 1469598103934665603ull);

}  // namespace ulsad
