#include "ulsad/frn.hpp"

#include <cstring>

namespace ulsad {

FRN::FRN(const FRNConfig& cfg, std::uint64_t seed) : cfg_(cfg) {
    if (cfg_.width <= 0) throw ConfigError("FRN width must be positive");
    const int c = cfg_.width;
    Rng rng(seed);

    // encoder: two stride-2 compressions plus one full-resolution mix
    net_.emplace<Conv2d>(c, 2 * c, 3, 2, 1, rng, "frn.enc1");
    net_.emplace<BatchNorm2d>(2 * c, "frn.enc1.bn");
    net_.emplace<LeakyReLU>(cfg_.leaky_slope);
    net_.emplace<Conv2d>(2 * c, 4 * c, 3, 2, 1, rng, "frn.enc2");
    net_.emplace<BatchNorm2d>(4 * c, "frn.enc2.bn");
    net_.emplace<LeakyReLU>(cfg_.leaky_slope);
    net_.emplace<Conv2d>(4 * c, 4 * c, 3, 1, 1, rng, "frn.enc3");
    net_.emplace<BatchNorm2d>(4 * c, "frn.enc3.bn");
    net_.emplace<LeakyReLU>(cfg_.leaky_slope);

    // decoder: mirror upsampling; the last layer is linear so the output can
    // span the standardized feature space
    net_.emplace<ConvTranspose2d>(4 * c, 2 * c, 4, 2, 1, rng, "frn.dec1");
    net_.emplace<BatchNorm2d>(2 * c, "frn.dec1.bn");
    net_.emplace<ReLU>();
    net_.emplace<ConvTranspose2d>(2 * c, c, 4, 2, 1, rng, "frn.dec2");
    net_.emplace<BatchNorm2d>(c, "frn.dec2.bn");
    net_.emplace<ReLU>();
    net_.emplace<ConvTranspose2d>(c, 2 * c, 5, 1, 2, rng, "frn.dec3");
}

Tensor FRN::forward(const Tensor& u, bool training) {
    const int h = u.shape(u.dim() - 2), w = u.shape(u.dim() - 1);
    if (h % 4 != 0 || w % 4 != 0 || h < 4 || w < 4) {
        throw ShapeError("FRN: spatial size must be a multiple of 4, got " + u.shape_str());
    }
    return net_.forward(u, training);
}

Tensor FRN::infer(const Tensor& u) const { return net_.infer(u); }

Tensor FRN::backward(const Tensor& grad_out) { return net_.backward(grad_out); }

std::pair<Tensor, Tensor> FRN::split_heads(const Tensor& decoder_out) {
    const bool batched = decoder_out.dim() == 4;
    if (!batched && decoder_out.dim() != 3) {
        throw ShapeError("split_heads: expected (2c,h,w) or (N,2c,h,w)");
    }
    const int n = batched ? decoder_out.shape(0) : 1;
    const int c2 = decoder_out.shape(batched ? 1 : 0);
    if (c2 % 2 != 0) throw ShapeError("split_heads: channel count must be even");
    const int c = c2 / 2;
    const int h = decoder_out.shape(batched ? 2 : 1);
    const int w = decoder_out.shape(batched ? 3 : 2);
    const std::int64_t half = static_cast<std::int64_t>(c) * h * w;

    Tensor prime(batched ? std::vector<int>{n, c, h, w} : std::vector<int>{c, h, w});
    Tensor double_prime(prime.shape());
    for (int i = 0; i < n; ++i) {
        const real* src = decoder_out.data() + static_cast<std::int64_t>(i) * 2 * half;
        std::memcpy(prime.data() + i * half, src, sizeof(real) * static_cast<size_t>(half));
        std::memcpy(double_prime.data() + i * half, src + half,
                    sizeof(real) * static_cast<size_t>(half));
    }
    return {std::move(prime), std::move(double_prime)};
}

Tensor FRN::merge_head_grads(const Tensor& grad_prime, const Tensor& grad_double_prime) {
    if (grad_prime.shape() != grad_double_prime.shape()) {
        throw ShapeError("merge_head_grads: shape mismatch");
    }
    const bool batched = grad_prime.dim() == 4;
    const int n = batched ? grad_prime.shape(0) : 1;
    const int c = grad_prime.shape(batched ? 1 : 0);
    const int h = grad_prime.shape(batched ? 2 : 1);
    const int w = grad_prime.shape(batched ? 3 : 2);
    const std::int64_t half = static_cast<std::int64_t>(c) * h * w;

    Tensor merged(batched ? std::vector<int>{n, 2 * c, h, w} : std::vector<int>{2 * c, h, w});
    for (int i = 0; i < n; ++i) {
        real* dst = merged.data() + static_cast<std::int64_t>(i) * 2 * half;
        std::memcpy(dst, grad_prime.data() + i * half, sizeof(real) * static_cast<size_t>(half));
        std::memcpy(dst + half, grad_double_prime.data() + i * half,
                    sizeof(real) * static_cast<size_t>(half));
    }
    return merged;
}

}  // namespace ulsad
