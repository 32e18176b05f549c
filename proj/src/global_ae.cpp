#include "ulsad/global_ae.hpp"

namespace ulsad {

GlobalAE::GlobalAE(const GlobalAEConfig& cfg, std::uint64_t seed) : cfg_(cfg) {
    if (cfg_.input_size % 32 != 0) {
        throw ConfigError("global AE input size must be divisible by 32");
    }
    const int pre_bottleneck = cfg_.input_size / 32;
    const int bottleneck_out = pre_bottleneck + 2 - cfg_.bottleneck_kernel + 1;
    if (bottleneck_out < 1) {
        throw ConfigError("bottleneck kernel " + std::to_string(cfg_.bottleneck_kernel) +
                          " too large for input size " + std::to_string(cfg_.input_size));
    }
    Rng rng(seed);

    const int enc_widths[5] = {32, 32, 64, 64, 64};
    int in_c = cfg_.input_channels;
    for (int i = 0; i < 5; ++i) {
        const std::string name = "gae.enc" + std::to_string(i + 1);
        net_.emplace<Conv2d>(in_c, enc_widths[i], 4, 2, 1, rng, name);
        net_.emplace<BatchNorm2d>(enc_widths[i], name + ".bn");
        net_.emplace<LeakyReLU>(cfg_.leaky_slope);
        in_c = enc_widths[i];
    }
    net_.emplace<Conv2d>(64, 64, cfg_.bottleneck_kernel, 1, 1, rng, "gae.bottleneck");
    net_.emplace<BatchNorm2d>(64, "gae.bottleneck.bn");
    net_.emplace<LeakyReLU>(cfg_.leaky_slope);

    // monotone upsampling ladder: 4 -> 8 -> ... -> feature_size
    std::vector<int> rungs;
    for (int t = 4; t < cfg_.feature_size; t *= 2) rungs.push_back(t);
    rungs.push_back(cfg_.feature_size);
    int idx = 1;
    for (int target : rungs) {
        const std::string name = "gae.dec" + std::to_string(idx++);
        net_.emplace<Interpolate>(target, target, /*bilinear=*/true);
        net_.emplace<Conv2d>(64, 64, 3, 1, 1, rng, name);
        net_.emplace<BatchNorm2d>(64, name + ".bn");
        net_.emplace<ReLU>();
    }
    net_.emplace<Conv2d>(64, 64, 3, 1, 1, rng, "gae.head1");
    net_.emplace<BatchNorm2d>(64, "gae.head1.bn");
    net_.emplace<ReLU>();
    net_.emplace<Conv2d>(64, cfg_.width, 3, 1, 1, rng, "gae.head2");  // linear output
}

Tensor GlobalAE::forward(const Tensor& image, bool training) {
    const int h = image.shape(image.dim() - 2), w = image.shape(image.dim() - 1);
    if (h != cfg_.input_size || w != cfg_.input_size) {
        throw ShapeError("global AE: image is " + image.shape_str() + ", expected " +
                         std::to_string(cfg_.input_size) + "^2");
    }
    return net_.forward(image, training);
}

Tensor GlobalAE::infer(const Tensor& image) const { return net_.infer(image); }

Tensor GlobalAE::backward(const Tensor& grad_out) { return net_.backward(grad_out); }

}  // namespace ulsad
