#include "ulsad/attention.hpp"

#include <Eigen/Dense>

#include <cmath>

namespace ulsad {

namespace {

using RowMat = Eigen::Matrix<real, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMat = Eigen::Map<RowMat>;
using ConstMapMat = Eigen::Map<const RowMat>;

void check_patch_matrix(const Tensor& z, const char* what) {
    if (z.dim() != 2) throw ShapeError(std::string(what) + ": expected a (c,k) matrix");
}

// In-place column-wise stable softmax of a (k,k) logit matrix.
void column_softmax(Tensor& logits) {
    const int k = logits.shape(0);
    for (int q = 0; q < k; ++q) {
        real max_logit = -1e300;
        for (int p = 0; p < k; ++p) max_logit = std::max(max_logit, logits.at(p, q));
        real denom = 0.0;
        for (int p = 0; p < k; ++p) {
            const real e = std::exp(logits.at(p, q) - max_logit);
            logits.at(p, q) = e;
            denom += e;
        }
        for (int p = 0; p < k; ++p) logits.at(p, q) /= denom;
    }
}

AttentionResult attention_impl(const Tensor& z, const Tensor& queries) {
    const int c = z.shape(0), k = z.shape(1);
    if (!z.all_finite() || !queries.all_finite()) {
        throw NumericError("attention: non-finite patch features");
    }
    Tensor logits({k, k});
    {
        ConstMapMat zm(z.data(), c, k);
        ConstMapMat qm(queries.data(), c, k);
        MapMat lm(logits.data(), k, k);
        lm.noalias() = (zm.transpose() * qm) / std::sqrt(static_cast<real>(c));
    }
    column_softmax(logits);
    Tensor map({c, k});
    {
        ConstMapMat zm(z.data(), c, k);
        ConstMapMat wm(logits.data(), k, k);
        MapMat am(map.data(), c, k);
        am.noalias() = zm * wm;
    }
    return {std::move(logits), std::move(map)};
}

}  // namespace

AttentionResult self_attention(const Tensor& z) {
    check_patch_matrix(z, "self_attention");
    return attention_impl(z, z);
}

AttentionResult cross_attention(const Tensor& z, const Tensor& z_hat) {
    check_patch_matrix(z, "cross_attention");
    check_patch_matrix(z_hat, "cross_attention");
    if (z.shape() != z_hat.shape()) {
        throw ShapeError("cross_attention: shape mismatch " + z.shape_str() + " vs " +
                         z_hat.shape_str());
    }
    return attention_impl(z, z_hat);
}

Tensor cross_attention_backward(const Tensor& z, const Tensor& weights,
                                const Tensor& grad_map) {
    const int c = z.shape(0), k = z.shape(1);
    if (weights.dim() != 2 || weights.shape(0) != k || weights.shape(1) != k) {
        throw ShapeError("cross_attention_backward: bad weight shape");
    }
    if (grad_map.shape() != z.shape()) {
        throw ShapeError("cross_attention_backward: grad shape mismatch");
    }

    // dL/dW = Z^T dA
    Tensor dw({k, k});
    {
        ConstMapMat zm(z.data(), c, k);
        ConstMapMat gm(grad_map.data(), c, k);
        MapMat dwm(dw.data(), k, k);
        dwm.noalias() = zm.transpose() * gm;
    }
    // Softmax Jacobian per column: dlogit = W .* (dW - <W, dW>_col)
    Tensor dlogits({k, k});
    for (int q = 0; q < k; ++q) {
        real inner = 0.0;
        for (int p = 0; p < k; ++p) inner += weights.at(p, q) * dw.at(p, q);
        for (int p = 0; p < k; ++p) {
            dlogits.at(p, q) = weights.at(p, q) * (dw.at(p, q) - inner);
        }
    }
    // logits[p,q] = z_p . zhat_q / sqrt(c)  =>  dZhat = Z dlogits / sqrt(c)
    Tensor dz_hat({c, k});
    {
        ConstMapMat zm(z.data(), c, k);
        ConstMapMat dlm(dlogits.data(), k, k);
        MapMat out(dz_hat.data(), c, k);
        out.noalias() = (zm * dlm) / std::sqrt(static_cast<real>(c));
    }
    return dz_hat;
}

}  // namespace ulsad
