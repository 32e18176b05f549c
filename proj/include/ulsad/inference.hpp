#pragma once

#include <vector>

#include "ulsad/losses.hpp"
#include "ulsad/tensor.hpp"

namespace ulsad {

enum class MapKind { local, global, combined };

struct AnomalyMap {
    Tensor data;  // (h,w), raw or calibrated scores
    MapKind kind = MapKind::local;
    bool calibrated = false;
};

// Branch quantiles fitted on pooled validation anomaly-map pixels.
struct QuantileCalibration {
    real alpha = 0.9;
    real beta = 0.995;
    real q_alpha_l = 0.0, q_beta_l = 0.0;
    real q_alpha_g = 0.0, q_beta_g = 0.0;
};

// Per-position combined distance between a feature map and its
// reconstruction: M[h,w] = l_v + lambda * l_d over the channel vectors.
AnomalyMap local_map(const Tensor& u, const Tensor& u_tilde_prime, const LossConfig& cfg);
AnomalyMap global_map(const Tensor& u_tilde_double_prime, const Tensor& u_hat,
                      const LossConfig& cfg);

// Nearest-rank (inverted CDF) empirical quantile; level in (0,1).
real empirical_quantile(std::vector<real> values, real level);

// t(M) = 0.1 * (M - q_alpha) / (q_beta - q_alpha): maps q_alpha to 0 and
// q_beta to 0.1. Strictly increasing, so ranking metrics are unaffected.
AnomalyMap normalize_map(const AnomalyMap& m, real q_alpha, real q_beta);

// Elementwise mean of the two calibrated branch maps.
AnomalyMap combine_maps(const AnomalyMap& local_norm, const AnomalyMap& global_norm);

// Image-level anomaly score: maximum of the calibrated map.
real image_score(const AnomalyMap& m);

// Bilinear upsampling to image resolution with optional Gaussian smoothing
// (sigma in output pixels; 0 disables). Refuses to downscale.
Tensor upsample_map(const Tensor& raw, int out_h, int out_w, real sigma);

Tensor gaussian_blur(const Tensor& map2d, real sigma);

}  // namespace ulsad
