#include "ulsad/features.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <set>

#include "ulsad/serialize.hpp"

namespace ulsad {

// ---------------------------------------------------------------------------
// Channel statistics
// ---------------------------------------------------------------------------

ChannelStatsAccumulator::ChannelStatsAccumulator(int channels)
    : mean_(static_cast<size_t>(channels), 0.0), m2_(static_cast<size_t>(channels), 0.0) {}

void ChannelStatsAccumulator::add(const Tensor& feature_map) {
    if (feature_map.dim() != 3 ||
        feature_map.shape(0) != static_cast<int>(mean_.size())) {
        throw ShapeError("ChannelStatsAccumulator: expected (c,h,w) with c=" +
                         std::to_string(mean_.size()));
    }
    const int c = feature_map.shape(0);
    const std::int64_t plane =
        static_cast<std::int64_t>(feature_map.shape(1)) * feature_map.shape(2);
    for (int ch = 0; ch < c; ++ch) {
        const real* p = feature_map.data() + static_cast<std::int64_t>(ch) * plane;
        real mean = mean_[static_cast<size_t>(ch)];
        real m2 = m2_[static_cast<size_t>(ch)];
        std::int64_t n = count_;
        for (std::int64_t i = 0; i < plane; ++i) {
            ++n;
            const real delta = p[i] - mean;
            mean += delta / static_cast<real>(n);
            m2 += delta * (p[i] - mean);
        }
        mean_[static_cast<size_t>(ch)] = mean;
        m2_[static_cast<size_t>(ch)] = m2;
    }
    count_ += plane;
}

ChannelStats ChannelStatsAccumulator::finalize() const {
    if (count_ == 0) throw DataError("channel stats: empty fitting set");
    ChannelStats stats;
    stats.mu = mean_;
    stats.sigma.resize(mean_.size());
    for (size_t c = 0; c < mean_.size(); ++c) {
        const real var = m2_[c] / static_cast<real>(count_);  // population variance
        stats.sigma[c] = std::max(std::sqrt(var), ChannelStats::kSigmaFloor);
    }
    return stats;
}

Tensor normalize_features(const Tensor& u, const ChannelStats& stats) {
    if (!stats.valid()) throw CalibrationError("normalize_features: stats not fitted");
    if (u.dim() != 3 || u.shape(0) != stats.channels()) {
        throw ShapeError("normalize_features: shape " + u.shape_str() + " vs " +
                         std::to_string(stats.channels()) + " channels");
    }
    for (real s : stats.sigma) {
        if (!(s > 0.0)) throw CalibrationError("normalize_features: non-positive sigma");
    }
    Tensor out(u.shape());
    const std::int64_t plane = static_cast<std::int64_t>(u.shape(1)) * u.shape(2);
    for (int c = 0; c < stats.channels(); ++c) {
        const real mu = stats.mu[static_cast<size_t>(c)];
        const real inv = 1.0 / stats.sigma[static_cast<size_t>(c)];
        const real* p = u.data() + static_cast<std::int64_t>(c) * plane;
        real* o = out.data() + static_cast<std::int64_t>(c) * plane;
        for (std::int64_t i = 0; i < plane; ++i) o[i] = (p[i] - mu) * inv;
    }
    return out;
}

Tensor normalize_features_backward(const Tensor& grad, const ChannelStats& stats) {
    Tensor out(grad.shape());
    const std::int64_t plane = static_cast<std::int64_t>(grad.shape(1)) * grad.shape(2);
    for (int c = 0; c < stats.channels(); ++c) {
        const real inv = 1.0 / stats.sigma[static_cast<size_t>(c)];
        const real* p = grad.data() + static_cast<std::int64_t>(c) * plane;
        real* o = out.data() + static_cast<std::int64_t>(c) * plane;
        for (std::int64_t i = 0; i < plane; ++i) o[i] = p[i] * inv;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Flatten transform f and its inverse
// ---------------------------------------------------------------------------

Tensor flatten_features(const Tensor& u) {
    if (u.dim() != 3) throw ShapeError("flatten: expected (c,h,w), got " + u.shape_str());
    return u.reshaped({u.shape(0), u.shape(1) * u.shape(2)});
}

Tensor unflatten_features(const Tensor& z, int h, int w) {
    if (z.dim() != 2) throw ShapeError("unflatten: expected (c,k), got " + z.shape_str());
    if (z.shape(1) != h * w) {
        throw ShapeError("unflatten: k=" + std::to_string(z.shape(1)) + " != " +
                         std::to_string(h) + "*" + std::to_string(w));
    }
    return z.reshaped({z.shape(0), h, w});
}

// ---------------------------------------------------------------------------
// Image preprocessing
// ---------------------------------------------------------------------------

Tensor preprocess_image(const Tensor& rgb01) {
    if (rgb01.dim() != 3 || rgb01.shape(0) != 3) {
        throw ShapeError("preprocess_image: expected (3,H,W), got " + rgb01.shape_str());
    }
    static constexpr real kMean[3] = {0.485, 0.456, 0.406};
    static constexpr real kStd[3] = {0.229, 0.224, 0.225};
    Tensor out(rgb01.shape());
    const std::int64_t plane = static_cast<std::int64_t>(rgb01.shape(1)) * rgb01.shape(2);
    for (int c = 0; c < 3; ++c) {
        const real* p = rgb01.data() + c * plane;
        real* o = out.data() + c * plane;
        for (std::int64_t i = 0; i < plane; ++i) o[i] = (p[i] - kMean[c]) / kStd[c];
    }
    return out;
}

// ---------------------------------------------------------------------------
// Backbone
// ---------------------------------------------------------------------------

namespace {

struct ArchSpec {
    std::vector<int> blocks;
    int width_per_group;
};

ArchSpec arch_spec(const std::string& arch) {
    if (arch == "resnet50") return {{3, 4, 6, 3}, 64};
    if (arch == "resnet152") return {{3, 8, 36, 3}, 64};
    if (arch == "wide_resnet50_2") return {{3, 4, 6, 3}, 128};
    if (arch == "wide_resnet101_2") return {{3, 4, 23, 3}, 128};
    throw ConfigError("unsupported backbone architecture: " + arch);
}

// Frozen-backbone convs follow the usual BN-eats-the-bias convention.
void he_init_conv(Conv2d& conv, Rng& rng, int fan_in) {
    Tensor& w = conv.weight().value;
    const real stddev = std::sqrt(2.0 / fan_in);
    for (std::int64_t i = 0; i < w.numel(); ++i) w[i] = rng.normal(0.0, stddev);
    conv.bias().value.fill(0.0);
}

}  // namespace

Backbone::Backbone(const BackboneConfig& cfg) : cfg_(cfg) {
    if (cfg_.tap_layer < 1 || cfg_.tap_layer > 3) {
        throw ConfigError("tap_layer must be in [1,3] so that taps (j, j+1) exist");
    }
    const ArchSpec spec = arch_spec(cfg_.arch);
    Rng rng(cfg_.seed);

    conv1_ = std::make_unique<Conv2d>(3, 64, 7, 2, 3, rng, "conv1_seed");
    he_init_conv(*conv1_, rng, 3 * 7 * 7);
    conv1_->weight().name = "conv1.weight";
    bn1_ = std::make_unique<BatchNorm2d>(64, "bn1");
    register_layer("conv1", conv1_.get());
    register_layer("bn1", bn1_.get());

    const int deepest_stage = cfg_.tap_layer + 1;
    int inplanes = 64;
    for (int stage = 1; stage <= deepest_stage; ++stage) {
        const int planes = 64 << (stage - 1);
        const int stride = stage == 1 ? 1 : 2;
        const int width = planes * spec.width_per_group / 64;
        std::vector<Bottleneck> blocks;
        for (int b = 0; b < spec.blocks[static_cast<size_t>(stage - 1)]; ++b) {
            const std::string prefix =
                "layer" + std::to_string(stage) + "." + std::to_string(b) + ".";
            Bottleneck blk;
            const int s = b == 0 ? stride : 1;
            blk.conv1 = std::make_unique<Conv2d>(inplanes, width, 1, 1, 0, rng, prefix + "conv1");
            he_init_conv(*blk.conv1, rng, inplanes);
            blk.bn1 = std::make_unique<BatchNorm2d>(width, prefix + "bn1");
            blk.conv2 = std::make_unique<Conv2d>(width, width, 3, s, 1, rng, prefix + "conv2");
            he_init_conv(*blk.conv2, rng, width * 9);
            blk.bn2 = std::make_unique<BatchNorm2d>(width, prefix + "bn2");
            blk.conv3 = std::make_unique<Conv2d>(width, planes * 4, 1, 1, 0, rng, prefix + "conv3");
            he_init_conv(*blk.conv3, rng, width);
            blk.bn3 = std::make_unique<BatchNorm2d>(planes * 4, prefix + "bn3");
            if (b == 0 && (s != 1 || inplanes != planes * 4)) {
                blk.down_conv = std::make_unique<Conv2d>(inplanes, planes * 4, 1, s, 0, rng,
                                                         prefix + "downsample.0");
                he_init_conv(*blk.down_conv, rng, inplanes);
                blk.down_bn = std::make_unique<BatchNorm2d>(planes * 4, prefix + "downsample.1");
            }
            register_layer(prefix + "conv1", blk.conv1.get());
            register_layer(prefix + "bn1", blk.bn1.get());
            register_layer(prefix + "conv2", blk.conv2.get());
            register_layer(prefix + "bn2", blk.bn2.get());
            register_layer(prefix + "conv3", blk.conv3.get());
            register_layer(prefix + "bn3", blk.bn3.get());
            if (blk.down_conv) {
                register_layer(prefix + "downsample.0", blk.down_conv.get());
                register_layer(prefix + "downsample.1", blk.down_bn.get());
            }
            blocks.push_back(std::move(blk));
            inplanes = planes * 4;
        }
        stages_.push_back(std::move(blocks));
    }
    tap_channels_shallow_ = (64 << (cfg_.tap_layer - 1)) * 4;
    tap_channels_deep_ = (64 << cfg_.tap_layer) * 4;

    if (!cfg_.weights_file.empty()) load_weights(cfg_.weights_file);
}

void Backbone::register_layer(const std::string& name, Conv2d* conv) {
    conv->weight().name = name + ".weight";
    named_.emplace_back(name + ".weight", &conv->weight().value);
}

void Backbone::register_layer(const std::string& name, BatchNorm2d* bn) {
    bn->gamma().name = name + ".weight";
    bn->beta().name = name + ".bias";
    named_.emplace_back(name + ".weight", &bn->gamma().value);
    named_.emplace_back(name + ".bias", &bn->beta().value);
    named_.emplace_back(name + ".running_mean", &bn->running_mean());
    named_.emplace_back(name + ".running_var", &bn->running_var());
}

Tensor Backbone::run_block(const Bottleneck& b, const Tensor& x) const {
    Tensor out = b.bn1->infer(b.conv1->infer(x));
    for (std::int64_t i = 0; i < out.numel(); ++i) out[i] = std::max(out[i], 0.0);
    out = b.bn2->infer(b.conv2->infer(out));
    for (std::int64_t i = 0; i < out.numel(); ++i) out[i] = std::max(out[i], 0.0);
    out = b.bn3->infer(b.conv3->infer(out));
    const Tensor identity = b.down_conv ? b.down_bn->infer(b.down_conv->infer(x)) : x;
    out.add_(identity);
    for (std::int64_t i = 0; i < out.numel(); ++i) out[i] = std::max(out[i], 0.0);
    return out;
}

std::pair<Tensor, Tensor> Backbone::extract(const Tensor& image) const {
    const bool batched = image.dim() == 4;
    if (!(image.dim() == 3 || batched) || image.shape(batched ? 1 : 0) != 3) {
        throw ShapeError("extract: expected (3,H,W) or (N,3,H,W), got " + image.shape_str());
    }
    const int h = image.shape(batched ? 2 : 1), w = image.shape(batched ? 3 : 2);
    if (h != cfg_.input_size || w != cfg_.input_size) {
        throw ShapeError("extract: image is " + image.shape_str() + ", configured input size is " +
                         std::to_string(cfg_.input_size));
    }

    Tensor x = bn1_->infer(conv1_->infer(image));
    for (std::int64_t i = 0; i < x.numel(); ++i) x[i] = std::max(x[i], 0.0);
    x = MaxPool2d(3, 2, 1).infer(x);

    Tensor shallow;
    for (size_t stage = 0; stage < stages_.size(); ++stage) {
        for (const Bottleneck& blk : stages_[stage]) x = run_block(blk, x);
        if (static_cast<int>(stage) + 1 == cfg_.tap_layer) shallow = x;
    }
    return {std::move(shallow), std::move(x)};
}

std::uint64_t Backbone::weight_hash() const {
    std::uint64_t h = 1469598103934665603ull;
    for (const auto& [name, tensor] : named_) {
        h = hash_bytes(name.data(), name.size(), h);
        h = hash_tensor(*tensor, h);
    }
    return h;
}

void Backbone::load_weights(const std::string& path) {
    ArrayMap arrays = read_array_file(path);
    std::set<std::string> assigned;
    for (auto& [name, tensor] : named_) {
        auto it = arrays.find(name);
        if (it == arrays.end()) continue;
        if (it->second.numel() != tensor->numel()) {
            throw PersistenceError("backbone weights: size mismatch for " + name);
        }
        *tensor = it->second.reshaped(tensor->shape());
        assigned.insert(name);
    }
    for (const auto& [name, tensor] : named_) {
        if (!assigned.count(name)) {
            throw PersistenceError("backbone weights: missing array " + name + " in " + path);
        }
    }
}

// ---------------------------------------------------------------------------
// Feature aggregator
// ---------------------------------------------------------------------------

FeatureAggregator::FeatureAggregator(int in_channels, int out_channels,
                                     std::string upsample_mode, std::uint64_t seed)
    : in_channels_(in_channels), out_channels_(out_channels),
      bilinear_(upsample_mode != "nearest") {
    if (upsample_mode != "bilinear" && upsample_mode != "nearest") {
        throw ConfigError("aggregator upsample mode must be bilinear or nearest");
    }
    Rng rng(seed);
    projection_ = std::make_unique<Conv2d>(in_channels_, out_channels_, 1, 1, 0, rng,
                                           "aggregator.projection");
}

Tensor FeatureAggregator::fuse(const Tensor& shallow, const Tensor& deep) const {
    if (shallow.dim() != 3 || deep.dim() != 3) {
        throw ShapeError("aggregate: expected (c,h,w) feature maps");
    }
    const int h = shallow.shape(1), w = shallow.shape(2);
    if (h % deep.shape(1) != 0 || w % deep.shape(2) != 0) {
        throw ShapeError("aggregate: deep map " + deep.shape_str() +
                         " does not divide shallow map " + shallow.shape_str());
    }
    if (shallow.shape(0) + deep.shape(0) != in_channels_) {
        throw ShapeError("aggregate: channel total != configured input channels");
    }
    const Tensor up =
        bilinear_ ? bilinear_resize(deep, h, w) : nearest_resize(deep, h, w);
    Tensor cat({in_channels_, h, w});
    std::memcpy(cat.data(), shallow.data(), sizeof(real) * static_cast<size_t>(shallow.numel()));
    std::memcpy(cat.data() + shallow.numel(), up.data(),
                sizeof(real) * static_cast<size_t>(up.numel()));
    return cat;
}

Tensor FeatureAggregator::forward(const Tensor& shallow, const Tensor& deep, bool training) {
    return projection_->forward(fuse(shallow, deep), training);
}

Tensor FeatureAggregator::infer(const Tensor& shallow, const Tensor& deep) const {
    return projection_->infer(fuse(shallow, deep));
}

void FeatureAggregator::backward(const Tensor& grad_out) { projection_->backward(grad_out); }

}  // namespace ulsad
