#include "ulsad/losses.hpp"

#include <cmath>

namespace ulsad {

namespace {

void check_pair(const Tensor& pred, const Tensor& target) {
    if (pred.dim() != 2 || target.dim() != 2) {
        throw ShapeError("patch loss expects 2D (c,k) matrices");
    }
    if (pred.shape() != target.shape()) {
        throw ShapeError("patch loss shape mismatch: " + pred.shape_str() + " vs " +
                         target.shape_str());
    }
}

}  // namespace

real distance_v(std::span<const real> a, std::span<const real> b) {
    if (a.size() != b.size()) throw ShapeError("distance_v: length mismatch");
    real s = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        const real d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

real distance_d(std::span<const real> a, std::span<const real> b, real eps) {
    if (a.size() != b.size()) throw ShapeError("distance_d: length mismatch");
    real dot = 0.0, na2 = 0.0, nb2 = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na2 += a[i] * a[i];
        nb2 += b[i] * b[i];
    }
    const real na = std::max(std::sqrt(na2), eps);
    const real nb = std::max(std::sqrt(nb2), eps);
    return 1.0 - dot / (na * nb);
}

real patch_loss(const Tensor& pred, const Tensor& target, real lambda, real eps) {
    check_pair(pred, target);
    const int c = pred.shape(0), k = pred.shape(1);
    real total = 0.0;
    std::vector<real> pcol(static_cast<size_t>(c)), tcol(static_cast<size_t>(c));
    for (int j = 0; j < k; ++j) {
        for (int i = 0; i < c; ++i) {
            pcol[static_cast<size_t>(i)] = pred.at(i, j);
            tcol[static_cast<size_t>(i)] = target.at(i, j);
        }
        total += distance_v(pcol, tcol) + lambda * distance_d(pcol, tcol, eps);
    }
    return total / k;
}

namespace {

// Per-column gradients of l_v + lambda*l_d with respect to one or both
// arguments; the 1/k averaging is applied by the callers below.
void column_grads(const real* a, const real* b, int c, real lambda, real eps,
                  real* grad_a, real* grad_b) {
    real dot = 0.0, na2 = 0.0, nb2 = 0.0;
    for (int i = 0; i < c; ++i) {
        dot += a[i] * b[i];
        na2 += a[i] * a[i];
        nb2 += b[i] * b[i];
    }
    const real na_raw = std::sqrt(na2), nb_raw = std::sqrt(nb2);
    const real na = std::max(na_raw, eps), nb = std::max(nb_raw, eps);
    const real inv = 1.0 / (na * nb);
    // When a norm is floored it is constant w.r.t. its vector, so the
    // corresponding normalization term drops out of the derivative.
    const bool a_floored = na_raw < eps, b_floored = nb_raw < eps;
    for (int i = 0; i < c; ++i) {
        const real dv = 2.0 * (a[i] - b[i]);
        if (grad_a) {
            real dd = -b[i] * inv;
            if (!a_floored) dd += dot * a[i] / (na * na * na * nb);
            grad_a[i] = dv + lambda * dd;
        }
        if (grad_b) {
            real dd = -a[i] * inv;
            if (!b_floored) dd += dot * b[i] / (nb * nb * nb * na);
            grad_b[i] = -dv + lambda * dd;
        }
    }
}

PatchLossGrad grads_impl(const Tensor& pred, const Tensor& target, real lambda, real eps,
                         bool want_target) {
    check_pair(pred, target);
    const int c = pred.shape(0), k = pred.shape(1);
    PatchLossGrad out;
    out.value = patch_loss(pred, target, lambda, eps);
    out.grad_pred = Tensor({c, k});
    if (want_target) out.grad_target = Tensor({c, k});
    std::vector<real> a(static_cast<size_t>(c)), b(static_cast<size_t>(c));
    std::vector<real> ga(static_cast<size_t>(c)), gb(static_cast<size_t>(c));
    const real inv_k = 1.0 / k;
    for (int j = 0; j < k; ++j) {
        for (int i = 0; i < c; ++i) {
            a[static_cast<size_t>(i)] = pred.at(i, j);
            b[static_cast<size_t>(i)] = target.at(i, j);
        }
        column_grads(a.data(), b.data(), c, lambda, eps, ga.data(),
                     want_target ? gb.data() : nullptr);
        for (int i = 0; i < c; ++i) {
            out.grad_pred.at(i, j) = ga[static_cast<size_t>(i)] * inv_k;
            if (want_target) out.grad_target.at(i, j) = gb[static_cast<size_t>(i)] * inv_k;
        }
    }
    return out;
}

}  // namespace

PatchLossGrad patch_loss_grad(const Tensor& pred, const Tensor& target, real lambda, real eps) {
    return grads_impl(pred, target, lambda, eps, false);
}

PatchLossGrad patch_loss_grad_both(const Tensor& pred, const Tensor& target, real lambda,
                                   real eps) {
    return grads_impl(pred, target, lambda, eps, true);
}

}  // namespace ulsad
