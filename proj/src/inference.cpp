#include "ulsad/inference.hpp"

#include <algorithm>
#include <cmath>

#include "ulsad/nn.hpp"

namespace ulsad {

namespace {

AnomalyMap distance_map(const Tensor& pred, const Tensor& target, real lambda, real eps,
                        MapKind kind) {
    if (pred.dim() != 3 || target.dim() != 3) {
        throw ShapeError("anomaly map: expected (c,h,w) feature maps");
    }
    if (pred.shape() != target.shape()) {
        throw ShapeError("anomaly map: shape mismatch " + pred.shape_str() + " vs " +
                         target.shape_str());
    }
    const int c = pred.shape(0), h = pred.shape(1), w = pred.shape(2);
    const std::int64_t plane = static_cast<std::int64_t>(h) * w;
    AnomalyMap out{Tensor({h, w}), kind, false};
    std::vector<real> a(static_cast<size_t>(c)), b(static_cast<size_t>(c));
    for (std::int64_t i = 0; i < plane; ++i) {
        for (int ch = 0; ch < c; ++ch) {
            a[static_cast<size_t>(ch)] = pred[static_cast<std::int64_t>(ch) * plane + i];
            b[static_cast<size_t>(ch)] = target[static_cast<std::int64_t>(ch) * plane + i];
        }
        out.data[i] = distance_v(a, b) + lambda * distance_d(a, b, eps);
    }
    return out;
}

}  // namespace

AnomalyMap local_map(const Tensor& u, const Tensor& u_tilde_prime, const LossConfig& cfg) {
    return distance_map(u_tilde_prime, u, cfg.lambda_l, cfg.epsilon_norm, MapKind::local);
}

AnomalyMap global_map(const Tensor& u_tilde_double_prime, const Tensor& u_hat,
                      const LossConfig& cfg) {
    return distance_map(u_tilde_double_prime, u_hat, cfg.lambda_g, cfg.epsilon_norm,
                        MapKind::global);
}

real empirical_quantile(std::vector<real> values, real level) {
    if (values.empty()) throw CalibrationError("empirical_quantile: empty pool");
    if (!(level > 0.0 && level < 1.0)) {
        throw CalibrationError("empirical_quantile: level must be in (0,1)");
    }
    std::sort(values.begin(), values.end());
    const auto n = static_cast<std::int64_t>(values.size());
    std::int64_t rank = static_cast<std::int64_t>(std::ceil(level * static_cast<real>(n)));
    rank = std::clamp<std::int64_t>(rank, 1, n);
    return values[static_cast<size_t>(rank - 1)];
}

AnomalyMap normalize_map(const AnomalyMap& m, real q_alpha, real q_beta) {
    if (!(q_alpha < q_beta)) {
        throw CalibrationError(
            "normalize_map: degenerate quantiles (q_alpha >= q_beta); the validation pool has "
            "too little score spread — use more or more varied validation images");
    }
    AnomalyMap out{Tensor(m.data.shape()), m.kind, true};
    const real scale = 0.1 / (q_beta - q_alpha);
    for (std::int64_t i = 0; i < m.data.numel(); ++i) {
        out.data[i] = scale * (m.data[i] - q_alpha);
    }
    return out;
}

AnomalyMap combine_maps(const AnomalyMap& local_norm, const AnomalyMap& global_norm) {
    if (!local_norm.calibrated || !global_norm.calibrated) {
        throw CalibrationError("combine_maps: both maps must be calibrated");
    }
    if (local_norm.data.shape() != global_norm.data.shape()) {
        throw ShapeError("combine_maps: shape mismatch");
    }
    AnomalyMap out{Tensor(local_norm.data.shape()), MapKind::combined, true};
    for (std::int64_t i = 0; i < out.data.numel(); ++i) {
        out.data[i] = 0.5 * (local_norm.data[i] + global_norm.data[i]);
    }
    return out;
}

real image_score(const AnomalyMap& m) {
    if (m.data.numel() == 0) throw ShapeError("image_score: empty map");
    return m.data.max();
}

Tensor upsample_map(const Tensor& raw, int out_h, int out_w, real sigma) {
    if (raw.dim() != 2) throw ShapeError("upsample_map: expected (h,w)");
    if (out_h < raw.shape(0) || out_w < raw.shape(1)) {
        throw Error("upsample_map: target " + std::to_string(out_h) + "x" +
                    std::to_string(out_w) + " is smaller than the source map");
    }
    Tensor up = bilinear_resize(raw.reshaped({1, raw.shape(0), raw.shape(1)}), out_h, out_w)
                    .reshaped({out_h, out_w});
    return sigma > 0.0 ? gaussian_blur(up, sigma) : up;
}

Tensor gaussian_blur(const Tensor& map2d, real sigma) {
    if (map2d.dim() != 2) throw ShapeError("gaussian_blur: expected (h,w)");
    if (sigma <= 0.0) return map2d;
    const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
    std::vector<real> kernel(static_cast<size_t>(2 * radius + 1));
    for (int i = -radius; i <= radius; ++i) {
        kernel[static_cast<size_t>(i + radius)] = std::exp(-0.5 * (i * i) / (sigma * sigma));
    }

    const int h = map2d.shape(0), w = map2d.shape(1);
    // Separable passes with border renormalization, so constants stay exact.
    Tensor tmp({h, w}), out({h, w});
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            real acc = 0.0, wsum = 0.0;
            for (int i = -radius; i <= radius; ++i) {
                const int xx = x + i;
                if (xx < 0 || xx >= w) continue;
                const real kv = kernel[static_cast<size_t>(i + radius)];
                acc += kv * map2d.at(y, xx);
                wsum += kv;
            }
            tmp.at(y, x) = acc / wsum;
        }
    }
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            real acc = 0.0, wsum = 0.0;
            for (int i = -radius; i <= radius; ++i) {
                const int yy = y + i;
                if (yy < 0 || yy >= h) continue;
                const real kv = kernel[static_cast<size_t>(i + radius)];
                acc += kv * tmp.at(yy, x);
                wsum += kv;
            }
            out.at(y, x) = acc / wsum;
        }
    }
    return out;
}

}  // namespace ulsad
