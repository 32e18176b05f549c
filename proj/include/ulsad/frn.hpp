#pragma once

#include <utility>

#include "ulsad/nn.hpp"

namespace ulsad {

struct FRNConfig {
    int width = 384;           // c*; encoder widths are (2c*,4c*,4c*), decoder emits 2c*
    real leaky_slope = 0.01;   // encoder activation slope
};

// Feature reconstruction network: a strided conv encoder over the aggregated
// feature map and a transposed-conv decoder whose 2c* output carries two
// heads — the structural reconstruction and the local-global coupling head.
class FRN {
public:
    FRN(const FRNConfig& cfg, std::uint64_t seed);

    Tensor forward(const Tensor& u, bool training);  // (c,h,w)/(N,c,h,w) -> 2c channels
    Tensor infer(const Tensor& u) const;
    Tensor backward(const Tensor& grad_out);
    void collect_params(std::vector<Param*>& out) { net_.collect_params(out); }

    int width() const { return cfg_.width; }
    const FRNConfig& config() const { return cfg_; }

    // First c* channels are the structural head U~', the rest the coupling
    // head U~''. The split order is a persisted checkpoint convention.
    static std::pair<Tensor, Tensor> split_heads(const Tensor& decoder_out);
    static Tensor merge_head_grads(const Tensor& grad_prime, const Tensor& grad_double_prime);

private:
    FRNConfig cfg_;
    Sequential net_;
};

}  // namespace ulsad
