#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "ulsad/tensor.hpp"

namespace ulsad {

struct Param {
    std::string name;
    Tensor value;
    Tensor grad;

    void zero_grad() { grad.fill(0.0); }
};

// Minimal layer protocol. `forward(x, true)` caches whatever `backward`
// needs; `infer` is the cache-free eval path (const, safe to call from
// multiple threads on an immutable network).
class Layer {
public:
    virtual ~Layer() = default;
    virtual Tensor forward(const Tensor& x, bool training) = 0;
    virtual Tensor infer(const Tensor& x) const = 0;
    virtual Tensor backward(const Tensor& grad_out) = 0;
    virtual void collect_params(std::vector<Param*>& out) {}
};

class Conv2d : public Layer {
public:
    Conv2d(int in_channels, int out_channels, int kernel, int stride, int padding,
           Rng& rng, std::string name);

    Tensor forward(const Tensor& x, bool training) override;
    Tensor infer(const Tensor& x) const override;
    Tensor backward(const Tensor& grad_out) override;
    void collect_params(std::vector<Param*>& out) override;

    Param& weight() { return weight_; }
    Param& bias() { return bias_; }
    int out_size(int in_size) const { return (in_size + 2 * padding_ - kernel_) / stride_ + 1; }

private:
    Tensor run(const Tensor& x) const;

    int in_c_, out_c_, kernel_, stride_, padding_;
    Param weight_;  // (out_c, in_c*k*k)
    Param bias_;    // (out_c)
    Tensor x_cache_;
};

class ConvTranspose2d : public Layer {
public:
    ConvTranspose2d(int in_channels, int out_channels, int kernel, int stride, int padding,
                    Rng& rng, std::string name);

    Tensor forward(const Tensor& x, bool training) override;
    Tensor infer(const Tensor& x) const override;
    Tensor backward(const Tensor& grad_out) override;
    void collect_params(std::vector<Param*>& out) override;

    int out_size(int in_size) const { return (in_size - 1) * stride_ - 2 * padding_ + kernel_; }

private:
    Tensor run(const Tensor& x) const;

    int in_c_, out_c_, kernel_, stride_, padding_;
    Param weight_;  // (in_c, out_c*k*k)
    Param bias_;    // (out_c)
    Tensor x_cache_;
};

class BatchNorm2d : public Layer {
public:
    BatchNorm2d(int channels, std::string name, real momentum = 0.1, real eps = 1e-5);

    Tensor forward(const Tensor& x, bool training) override;
    Tensor infer(const Tensor& x) const override;
    Tensor backward(const Tensor& grad_out) override;
    void collect_params(std::vector<Param*>& out) override;

    Tensor& running_mean() { return running_mean_; }
    Tensor& running_var() { return running_var_; }
    Param& gamma() { return gamma_; }
    Param& beta() { return beta_; }

private:
    int channels_;
    real momentum_, eps_;
    Param gamma_, beta_;
    Tensor running_mean_, running_var_;
    // caches from the last training forward
    Tensor x_hat_cache_;
    std::vector<real> inv_std_cache_;
};

class LeakyReLU : public Layer {
public:
    explicit LeakyReLU(real slope = 0.01) : slope_(slope) {}

    Tensor forward(const Tensor& x, bool training) override;
    Tensor infer(const Tensor& x) const override;
    Tensor backward(const Tensor& grad_out) override;

private:
    real slope_;
    Tensor x_cache_;
};

class ReLU : public LeakyReLU {
public:
    ReLU() : LeakyReLU(0.0) {}
};

class MaxPool2d : public Layer {
public:
    MaxPool2d(int kernel, int stride, int padding);

    Tensor forward(const Tensor& x, bool training) override;
    Tensor infer(const Tensor& x) const override;
    Tensor backward(const Tensor& grad_out) override;

private:
    int kernel_, stride_, padding_;
    std::vector<int> in_shape_;
    std::vector<std::int64_t> argmax_;
};

// Fixed-target-size spatial resampling layer (used by the global decoder).
class Interpolate : public Layer {
public:
    Interpolate(int out_h, int out_w, bool bilinear = true)
        : out_h_(out_h), out_w_(out_w), bilinear_(bilinear) {}

    Tensor forward(const Tensor& x, bool training) override;
    Tensor infer(const Tensor& x) const override;
    Tensor backward(const Tensor& grad_out) override;

private:
    int out_h_, out_w_;
    bool bilinear_;
    std::vector<int> in_shape_;
};

class Sequential : public Layer {
public:
    Sequential() = default;

    template <typename L, typename... Args>
    L* emplace(Args&&... args) {
        auto layer = std::make_unique<L>(std::forward<Args>(args)...);
        L* raw = layer.get();
        layers_.push_back(std::move(layer));
        return raw;
    }
    void append(std::unique_ptr<Layer> layer) { layers_.push_back(std::move(layer)); }

    Tensor forward(const Tensor& x, bool training) override;
    Tensor infer(const Tensor& x) const override;
    Tensor backward(const Tensor& grad_out) override;
    void collect_params(std::vector<Param*>& out) override;

    size_t size() const { return layers_.size(); }
    Layer& layer(size_t i) { return *layers_[i]; }

private:
    std::vector<std::unique_ptr<Layer>> layers_;
};

// Adam with L2 weight decay folded into the gradient (torch-style
// Adam(weight_decay=...), not AdamW).
class Adam {
public:
    Adam(std::vector<Param*> params, real lr, real weight_decay = 0.0,
         real beta1 = 0.9, real beta2 = 0.999, real eps = 1e-8);

    void zero_grad();
    void step();
    std::int64_t steps_taken() const { return t_; }
    const std::vector<Param*>& params() const { return params_; }

private:
    std::vector<Param*> params_;
    std::vector<Tensor> m_, v_;
    real lr_, weight_decay_, beta1_, beta2_, eps_;
    std::int64_t t_ = 0;
};

// Resampling helpers shared by the aggregator, the Interpolate layer and
// anomaly-map upsampling. align_corners=false convention.
Tensor bilinear_resize(const Tensor& x, int out_h, int out_w);           // (N,C,H,W) or (C,H,W)
Tensor bilinear_resize_backward(const Tensor& grad_out, int in_h, int in_w);
Tensor nearest_resize(const Tensor& x, int out_h, int out_w);

std::uint64_t params_hash(const std::vector<Param*>& params);

}  // namespace ulsad
