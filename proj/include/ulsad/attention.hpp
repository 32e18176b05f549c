#pragma once

#include "ulsad/tensor.hpp"

namespace ulsad {

// Attention weights W are (k,k) and column-stochastic: W[p,q] is the weight
// of patch p when mixing the attention vector for query position q. The
// attention map A = Z * W is (c,k).
struct AttentionResult {
    Tensor weights;
    Tensor map;
};

// W[p,q] = softmax_p( z_p . z_q / sqrt(c) ), A = Z W.
AttentionResult self_attention(const Tensor& z);

// What[p,q] = softmax_p( z_p . zhat_q / sqrt(c) ), Ahat = Z What.
// Queries come from zhat; keys and values from z.
AttentionResult cross_attention(const Tensor& z, const Tensor& z_hat);

// Gradient of a scalar loss through Ahat = Z * softmax(Z^T Zhat / sqrt(c))
// with respect to Zhat; Z is a constant. grad_map is dLoss/dAhat.
Tensor cross_attention_backward(const Tensor& z, const Tensor& weights,
                                const Tensor& grad_map);

}  // namespace ulsad
