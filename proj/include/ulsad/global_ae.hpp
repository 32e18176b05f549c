#pragma once

#include "ulsad/nn.hpp"

namespace ulsad {

struct GlobalAEConfig {
    int width = 384;           // c*: output channels
    int input_channels = 3;
    int input_size = 256;      // H = W of the model input
    int feature_size = 32;     // h* = w* of the target feature grid
    int bottleneck_kernel = 8; // must satisfy input_size/32 + 2 - kernel + 1 >= 1
    real leaky_slope = 0.01;
};

// Image-to-feature-space autoencoder of the global branch: five stride-2
// convolutions and a wide-kernel bottleneck, then an interpolate+conv ladder
// back up to the feature grid. The bottleneck forces a global code, which is
// what lets the branch notice arrangement-level (logical) deviations.
class GlobalAE {
public:
    GlobalAE(const GlobalAEConfig& cfg, std::uint64_t seed);

    Tensor forward(const Tensor& image, bool training);  // (3,H,W)/(N,3,H,W) -> (c*,h*,w*)
    Tensor infer(const Tensor& image) const;
    Tensor backward(const Tensor& grad_out);
    void collect_params(std::vector<Param*>& out) { net_.collect_params(out); }

    const GlobalAEConfig& config() const { return cfg_; }

private:
    GlobalAEConfig cfg_;
    Sequential net_;
};

}  // namespace ulsad
