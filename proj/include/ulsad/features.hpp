#pragma once

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "ulsad/nn.hpp"
#include "ulsad/tensor.hpp"

namespace ulsad {

struct BackboneConfig {
    std::string arch = "wide_resnet50_2";  // resnet50|resnet152|wide_resnet50_2|wide_resnet101_2
    int tap_layer = 2;                     // taps are (tap_layer, tap_layer+1)
    int projection_channels = 384;         // c*
    int input_size = 256;
    std::string upsample = "bilinear";     // or "nearest"
    std::string weights_file;              // optional pre-trained weight container
    std::uint64_t seed = 20240901;         // deterministic init when no weights file
};

// Channel-wise standardization statistics of the aggregated feature map,
// pooled over all spatial positions and images of the fitting set.
struct ChannelStats {
    static constexpr real kSigmaFloor = 1e-6;

    std::vector<real> mu;
    std::vector<real> sigma;

    bool valid() const { return !mu.empty() && mu.size() == sigma.size(); }
    int channels() const { return static_cast<int>(mu.size()); }
};

// Single-pass (Welford) moment accumulator, iteration-order independent in
// exact arithmetic and stable in floating point.
class ChannelStatsAccumulator {
public:
    explicit ChannelStatsAccumulator(int channels);
    void add(const Tensor& feature_map);  // (c,h,w)
    ChannelStats finalize() const;
    std::int64_t count() const { return count_; }

private:
    std::vector<real> mean_, m2_;
    std::int64_t count_ = 0;
};

// ImageNet preprocessing: [0,1] RGB -> standardized model input.
Tensor preprocess_image(const Tensor& rgb01);

// Frozen feature extractor over the ResNet bottleneck family. Construction
// either seeds deterministic weights or loads a converted pre-trained
// container; afterwards the network is immutable and extract() is const and
// safe to call concurrently.
class Backbone {
public:
    explicit Backbone(const BackboneConfig& cfg);

    // (3,H,W) or (N,3,H,W) -> feature maps at layers tap and tap+1
    std::pair<Tensor, Tensor> extract(const Tensor& image) const;

    int tap_channels_shallow() const { return tap_channels_shallow_; }
    int tap_channels_deep() const { return tap_channels_deep_; }
    const BackboneConfig& config() const { return cfg_; }
    std::uint64_t weight_hash() const;
    void load_weights(const std::string& path);

private:
    struct Bottleneck {
        std::unique_ptr<Conv2d> conv1, conv2, conv3, down_conv;
        std::unique_ptr<BatchNorm2d> bn1, bn2, bn3, down_bn;
    };

    Tensor run_block(const Bottleneck& b, const Tensor& x) const;
    void register_layer(const std::string& name, Conv2d* conv);
    void register_layer(const std::string& name, BatchNorm2d* bn);

    BackboneConfig cfg_;
    std::unique_ptr<Conv2d> conv1_;
    std::unique_ptr<BatchNorm2d> bn1_;
    std::vector<std::vector<Bottleneck>> stages_;
    std::vector<std::pair<std::string, Tensor*>> named_;  // weights + BN running stats
    int tap_channels_shallow_ = 0, tap_channels_deep_ = 0;
};

// Upsamples the deeper tap to the shallower tap's grid, concatenates along
// channels and projects to c* with a learnable 1x1 convolution.
class FeatureAggregator {
public:
    FeatureAggregator(int in_channels, int out_channels, std::string upsample_mode,
                      std::uint64_t seed);

    Tensor forward(const Tensor& shallow, const Tensor& deep, bool training);
    Tensor infer(const Tensor& shallow, const Tensor& deep) const;
    // Accumulates projection gradients; the upstream backbone is frozen so
    // nothing propagates further.
    void backward(const Tensor& grad_out);

    Param& projection_weight() { return projection_->weight(); }
    void collect_params(std::vector<Param*>& out) { projection_->collect_params(out); }
    int out_channels() const { return out_channels_; }

private:
    Tensor fuse(const Tensor& shallow, const Tensor& deep) const;

    int in_channels_, out_channels_;
    bool bilinear_;
    std::unique_ptr<Conv2d> projection_;
};

// The invertible transform f between (c,h,w) tensors and (c,k) patch
// matrices, k = h*w, spatial positions in row-major order.
Tensor flatten_features(const Tensor& u);
Tensor unflatten_features(const Tensor& z, int h, int w);

Tensor normalize_features(const Tensor& u, const ChannelStats& stats);
// Chain-rule factor of normalize_features (division by sigma per channel).
Tensor normalize_features_backward(const Tensor& grad, const ChannelStats& stats);

}  // namespace ulsad
