#pragma once

#include <span>

#include "ulsad/tensor.hpp"

namespace ulsad {

struct LossConfig {
    real lambda_l = 0.5;        // weight of the direction term in the patch loss
    real lambda_g = 0.5;        // weight of the direction term in the global losses
    real epsilon_norm = 1e-8;   // floor on vector norms in the cosine term
};

// Squared L2 distance between two feature vectors.
real distance_v(std::span<const real> a, std::span<const real> b);

// Cosine distance 1 - cos(a,b) in [0,2]; norms are floored at eps so zero
// vectors are well defined.
real distance_d(std::span<const real> a, std::span<const real> b, real eps = 1e-8);

// Column-wise combined distance over a patch matrix pair:
//   (1/k) * sum_k [ l_v(pred_k, target_k) + lambda * l_d(pred_k, target_k) ]
// pred and target are (c, k) with patches as columns.
real patch_loss(const Tensor& pred, const Tensor& target, real lambda, real eps = 1e-8);

struct PatchLossGrad {
    real value = 0.0;
    Tensor grad_pred;    // d value / d pred
    Tensor grad_target;  // d value / d target (filled only by the _both variant)
};

PatchLossGrad patch_loss_grad(const Tensor& pred, const Tensor& target, real lambda,
                              real eps = 1e-8);
PatchLossGrad patch_loss_grad_both(const Tensor& pred, const Tensor& target, real lambda,
                                   real eps = 1e-8);

// Named losses of the framework. Targets are treated as constants; gradient
// helpers above provide the differentiable paths the trainer needs.
inline real loss_pl(const Tensor& z_tilde_prime, const Tensor& z, const LossConfig& cfg) {
    return patch_loss(z_tilde_prime, z, cfg.lambda_l, cfg.epsilon_norm);
}

inline real loss_pg(const Tensor& a_hat, const Tensor& a, const LossConfig& cfg) {
    return patch_loss(a_hat, a, cfg.lambda_g, cfg.epsilon_norm);
}

// Direct variant of the global consistency loss: same combining rule applied
// to the raw feature columns instead of attention columns.
inline real loss_pg_direct(const Tensor& z_hat, const Tensor& z, const LossConfig& cfg) {
    return patch_loss(z_hat, z, cfg.lambda_g, cfg.epsilon_norm);
}

inline real loss_lg(const Tensor& z_tilde_double_prime, const Tensor& z_hat,
                    const LossConfig& cfg) {
    return patch_loss(z_tilde_double_prime, z_hat, cfg.lambda_g, cfg.epsilon_norm);
}

}  // namespace ulsad
