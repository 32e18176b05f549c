#include "ulsad/nn.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstring>

namespace ulsad {

namespace {

using RowMat = Eigen::Matrix<real, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMat = Eigen::Map<RowMat>;
using ConstMapMat = Eigen::Map<const RowMat>;

// Lays out one image (C,H,W) as a (C*k*k) x (out_h*out_w) patch matrix.
void im2col(const real* x, int C, int H, int W, int k, int stride, int pad,
            int out_h, int out_w, real* cols) {
    const std::int64_t L = static_cast<std::int64_t>(out_h) * out_w;
    std::int64_t row = 0;
    for (int c = 0; c < C; ++c) {
        const real* xc = x + static_cast<std::int64_t>(c) * H * W;
        for (int ki = 0; ki < k; ++ki) {
            for (int kj = 0; kj < k; ++kj, ++row) {
                real* dst = cols + row * L;
                for (int oh = 0; oh < out_h; ++oh) {
                    const int ih = oh * stride - pad + ki;
                    if (ih < 0 || ih >= H) {
                        std::memset(dst + static_cast<std::int64_t>(oh) * out_w, 0,
                                    sizeof(real) * out_w);
                        continue;
                    }
                    const real* src_row = xc + static_cast<std::int64_t>(ih) * W;
                    real* dst_row = dst + static_cast<std::int64_t>(oh) * out_w;
                    for (int ow = 0; ow < out_w; ++ow) {
                        const int iw = ow * stride - pad + kj;
                        dst_row[ow] = (iw >= 0 && iw < W) ? src_row[iw] : 0.0;
                    }
                }
            }
        }
    }
}

// Adjoint of im2col: scatter-adds patch columns back into an image.
void col2im(const real* cols, int C, int H, int W, int k, int stride, int pad,
            int out_h, int out_w, real* x) {
    const std::int64_t L = static_cast<std::int64_t>(out_h) * out_w;
    std::int64_t row = 0;
    for (int c = 0; c < C; ++c) {
        real* xc = x + static_cast<std::int64_t>(c) * H * W;
        for (int ki = 0; ki < k; ++ki) {
            for (int kj = 0; kj < k; ++kj, ++row) {
                const real* src = cols + row * L;
                for (int oh = 0; oh < out_h; ++oh) {
                    const int ih = oh * stride - pad + ki;
                    if (ih < 0 || ih >= H) continue;
                    real* x_row = xc + static_cast<std::int64_t>(ih) * W;
                    const real* src_row = src + static_cast<std::int64_t>(oh) * out_w;
                    for (int ow = 0; ow < out_w; ++ow) {
                        const int iw = ow * stride - pad + kj;
                        if (iw >= 0 && iw < W) x_row[iw] += src_row[ow];
                    }
                }
            }
        }
    }
}

void uniform_init(Tensor& t, real bound, Rng& rng) {
    for (std::int64_t i = 0; i < t.numel(); ++i) t[i] = rng.uniform(-bound, bound);
}

struct Shape4 {
    int n, c, h, w;
};

Shape4 as4d(const Tensor& x) {
    if (x.dim() == 4) return {x.shape(0), x.shape(1), x.shape(2), x.shape(3)};
    if (x.dim() == 3) return {1, x.shape(0), x.shape(1), x.shape(2)};
    throw ShapeError("expected 3D or 4D tensor, got " + x.shape_str());
}

}  // namespace

// ---------------------------------------------------------------------------
// Conv2d
// ---------------------------------------------------------------------------

Conv2d::Conv2d(int in_channels, int out_channels, int kernel, int stride, int padding,
               Rng& rng, std::string name)
    : in_c_(in_channels), out_c_(out_channels), kernel_(kernel), stride_(stride),
      padding_(padding) {
    const int fan_in = in_c_ * kernel_ * kernel_;
    weight_.name = name + ".weight";
    weight_.value = Tensor({out_c_, fan_in});
    weight_.grad = Tensor({out_c_, fan_in});
    bias_.name = name + ".bias";
    bias_.value = Tensor({out_c_});
    bias_.grad = Tensor({out_c_});
    const real bound = std::sqrt(1.0 / fan_in);
    uniform_init(weight_.value, bound, rng);
    uniform_init(bias_.value, bound, rng);
}

Tensor Conv2d::run(const Tensor& x) const {
    const Shape4 s = as4d(x);
    if (s.c != in_c_) {
        throw ShapeError("Conv2d " + weight_.name + ": expected " + std::to_string(in_c_) +
                         " channels, got " + x.shape_str());
    }
    const int oh = out_size(s.h), ow = out_size(s.w);
    if (oh <= 0 || ow <= 0) throw ShapeError("Conv2d " + weight_.name + ": output size <= 0");
    const int K = in_c_ * kernel_ * kernel_;
    const std::int64_t L = static_cast<std::int64_t>(oh) * ow;

    Tensor out({s.n, out_c_, oh, ow});
    Tensor cols({K, static_cast<int>(L)});
    ConstMapMat w(weight_.value.data(), out_c_, K);
    for (int n = 0; n < s.n; ++n) {
        im2col(x.data() + static_cast<std::int64_t>(n) * s.c * s.h * s.w, s.c, s.h, s.w,
               kernel_, stride_, padding_, oh, ow, cols.data());
        ConstMapMat cm(cols.data(), K, L);
        MapMat om(out.data() + static_cast<std::int64_t>(n) * out_c_ * L, out_c_, L);
        om.noalias() = w * cm;
        for (int c = 0; c < out_c_; ++c) om.row(c).array() += bias_.value[c];
    }
    return x.dim() == 3 ? out.reshaped({out_c_, oh, ow}) : out;
}

Tensor Conv2d::forward(const Tensor& x, bool) {
    x_cache_ = x;
    return run(x);
}

Tensor Conv2d::infer(const Tensor& x) const { return run(x); }

Tensor Conv2d::backward(const Tensor& grad_out) {
    const Shape4 s = as4d(x_cache_);
    const Shape4 gs = as4d(grad_out);
    const int K = in_c_ * kernel_ * kernel_;
    const std::int64_t L = static_cast<std::int64_t>(gs.h) * gs.w;

    Tensor dx({s.n, s.c, s.h, s.w});
    Tensor cols({K, static_cast<int>(L)});
    Tensor dcols({K, static_cast<int>(L)});
    ConstMapMat w(weight_.value.data(), out_c_, K);
    MapMat dw(weight_.grad.data(), out_c_, K);
    for (int n = 0; n < s.n; ++n) {
        const real* xn = x_cache_.data() + static_cast<std::int64_t>(n) * s.c * s.h * s.w;
        im2col(xn, s.c, s.h, s.w, kernel_, stride_, padding_, gs.h, gs.w, cols.data());
        ConstMapMat cm(cols.data(), K, L);
        ConstMapMat gm(grad_out.data() + static_cast<std::int64_t>(n) * out_c_ * L, out_c_, L);
        dw.noalias() += gm * cm.transpose();
        for (int c = 0; c < out_c_; ++c) bias_.grad[c] += gm.row(c).sum();
        MapMat dcm(dcols.data(), K, L);
        dcm.noalias() = w.transpose() * gm;
        col2im(dcols.data(), s.c, s.h, s.w, kernel_, stride_, padding_, gs.h, gs.w,
               dx.data() + static_cast<std::int64_t>(n) * s.c * s.h * s.w);
    }
    return x_cache_.dim() == 3 ? dx.reshaped({s.c, s.h, s.w}) : dx;
}

void Conv2d::collect_params(std::vector<Param*>& out) {
    out.push_back(&weight_);
    out.push_back(&bias_);
}

// ---------------------------------------------------------------------------
// ConvTranspose2d
// ---------------------------------------------------------------------------

ConvTranspose2d::ConvTranspose2d(int in_channels, int out_channels, int kernel, int stride,
                                 int padding, Rng& rng, std::string name)
    : in_c_(in_channels), out_c_(out_channels), kernel_(kernel), stride_(stride),
      padding_(padding) {
    const int cols = out_c_ * kernel_ * kernel_;
    weight_.name = name + ".weight";
    weight_.value = Tensor({in_c_, cols});
    weight_.grad = Tensor({in_c_, cols});
    bias_.name = name + ".bias";
    bias_.value = Tensor({out_c_});
    bias_.grad = Tensor({out_c_});
    const real bound = std::sqrt(1.0 / (in_c_ * kernel_ * kernel_));
    uniform_init(weight_.value, bound, rng);
    uniform_init(bias_.value, bound, rng);
}

Tensor ConvTranspose2d::run(const Tensor& x) const {
    const Shape4 s = as4d(x);
    if (s.c != in_c_) {
        throw ShapeError("ConvTranspose2d " + weight_.name + ": expected " +
                         std::to_string(in_c_) + " channels, got " + x.shape_str());
    }
    const int oh = out_size(s.h), ow = out_size(s.w);
    if (oh <= 0 || ow <= 0) throw ShapeError("ConvTranspose2d: output size <= 0");
    const int K = out_c_ * kernel_ * kernel_;
    const std::int64_t L = static_cast<std::int64_t>(s.h) * s.w;

    Tensor out({s.n, out_c_, oh, ow});
    Tensor tmp({K, static_cast<int>(L)});
    ConstMapMat w(weight_.value.data(), in_c_, K);
    for (int n = 0; n < s.n; ++n) {
        ConstMapMat xm(x.data() + static_cast<std::int64_t>(n) * in_c_ * L, in_c_, L);
        MapMat tm(tmp.data(), K, L);
        tm.noalias() = w.transpose() * xm;
        real* on = out.data() + static_cast<std::int64_t>(n) * out_c_ * oh * ow;
        // input grid positions act as the "output" grid of the adjoint conv
        col2im(tmp.data(), out_c_, oh, ow, kernel_, stride_, padding_, s.h, s.w, on);
        for (int c = 0; c < out_c_; ++c) {
            real* oc = on + static_cast<std::int64_t>(c) * oh * ow;
            for (std::int64_t i = 0; i < static_cast<std::int64_t>(oh) * ow; ++i)
                oc[i] += bias_.value[c];
        }
    }
    return x.dim() == 3 ? out.reshaped({out_c_, oh, ow}) : out;
}

Tensor ConvTranspose2d::forward(const Tensor& x, bool) {
    x_cache_ = x;
    return run(x);
}

Tensor ConvTranspose2d::infer(const Tensor& x) const { return run(x); }

Tensor ConvTranspose2d::backward(const Tensor& grad_out) {
    const Shape4 s = as4d(x_cache_);
    const Shape4 gs = as4d(grad_out);
    const int K = out_c_ * kernel_ * kernel_;
    const std::int64_t L = static_cast<std::int64_t>(s.h) * s.w;

    Tensor dx({s.n, s.c, s.h, s.w});
    Tensor gcols({K, static_cast<int>(L)});
    ConstMapMat w(weight_.value.data(), in_c_, K);
    MapMat dw(weight_.grad.data(), in_c_, K);
    for (int n = 0; n < s.n; ++n) {
        const real* gn = grad_out.data() + static_cast<std::int64_t>(n) * out_c_ * gs.h * gs.w;
        im2col(gn, out_c_, gs.h, gs.w, kernel_, stride_, padding_, s.h, s.w, gcols.data());
        ConstMapMat gcm(gcols.data(), K, L);
        ConstMapMat xm(x_cache_.data() + static_cast<std::int64_t>(n) * in_c_ * L, in_c_, L);
        dw.noalias() += xm * gcm.transpose();
        MapMat dxm(dx.data() + static_cast<std::int64_t>(n) * in_c_ * L, in_c_, L);
        dxm.noalias() = w * gcm;
        ConstMapMat gm(gn, out_c_, static_cast<std::int64_t>(gs.h) * gs.w);
        for (int c = 0; c < out_c_; ++c) bias_.grad[c] += gm.row(c).sum();
    }
    return x_cache_.dim() == 3 ? dx.reshaped({s.c, s.h, s.w}) : dx;
}

void ConvTranspose2d::collect_params(std::vector<Param*>& out) {
    out.push_back(&weight_);
    out.push_back(&bias_);
}

// ---------------------------------------------------------------------------
// BatchNorm2d
// ---------------------------------------------------------------------------

BatchNorm2d::BatchNorm2d(int channels, std::string name, real momentum, real eps)
    : channels_(channels), momentum_(momentum), eps_(eps) {
    gamma_.name = name + ".weight";
    gamma_.value = Tensor::full({channels_}, 1.0);
    gamma_.grad = Tensor({channels_});
    beta_.name = name + ".bias";
    beta_.value = Tensor({channels_});
    beta_.grad = Tensor({channels_});
    running_mean_ = Tensor({channels_});
    running_var_ = Tensor::full({channels_}, 1.0);
}

Tensor BatchNorm2d::forward(const Tensor& x, bool training) {
    if (!training) return infer(x);
    const Shape4 s = as4d(x);
    if (s.c != channels_) throw ShapeError("BatchNorm2d: channel mismatch");
    const std::int64_t plane = static_cast<std::int64_t>(s.h) * s.w;
    const std::int64_t m = static_cast<std::int64_t>(s.n) * plane;

    Tensor out(x.shape());
    x_hat_cache_ = Tensor(x.shape());
    inv_std_cache_.assign(channels_, 0.0);
    for (int c = 0; c < channels_; ++c) {
        real mean = 0.0;
        for (int n = 0; n < s.n; ++n) {
            const real* p = x.data() + (static_cast<std::int64_t>(n) * s.c + c) * plane;
            for (std::int64_t i = 0; i < plane; ++i) mean += p[i];
        }
        mean /= static_cast<real>(m);
        real var = 0.0;
        for (int n = 0; n < s.n; ++n) {
            const real* p = x.data() + (static_cast<std::int64_t>(n) * s.c + c) * plane;
            for (std::int64_t i = 0; i < plane; ++i) {
                const real d = p[i] - mean;
                var += d * d;
            }
        }
        var /= static_cast<real>(m);
        const real inv_std = 1.0 / std::sqrt(var + eps_);
        inv_std_cache_[c] = inv_std;
        const real g = gamma_.value[c], b = beta_.value[c];
        for (int n = 0; n < s.n; ++n) {
            const std::int64_t base = (static_cast<std::int64_t>(n) * s.c + c) * plane;
            const real* p = x.data() + base;
            real* xh = x_hat_cache_.data() + base;
            real* o = out.data() + base;
            for (std::int64_t i = 0; i < plane; ++i) {
                xh[i] = (p[i] - mean) * inv_std;
                o[i] = g * xh[i] + b;
            }
        }
        const real unbiased = m > 1 ? var * static_cast<real>(m) / static_cast<real>(m - 1) : var;
        running_mean_[c] = (1.0 - momentum_) * running_mean_[c] + momentum_ * mean;
        running_var_[c] = (1.0 - momentum_) * running_var_[c] + momentum_ * unbiased;
    }
    return out;
}

Tensor BatchNorm2d::infer(const Tensor& x) const {
    const Shape4 s = as4d(x);
    if (s.c != channels_) throw ShapeError("BatchNorm2d: channel mismatch");
    const std::int64_t plane = static_cast<std::int64_t>(s.h) * s.w;
    Tensor out(x.shape());
    for (int c = 0; c < channels_; ++c) {
        const real inv_std = 1.0 / std::sqrt(running_var_[c] + eps_);
        const real g = gamma_.value[c] * inv_std;
        const real b = beta_.value[c] - gamma_.value[c] * running_mean_[c] * inv_std;
        for (int n = 0; n < s.n; ++n) {
            const std::int64_t base = (static_cast<std::int64_t>(n) * s.c + c) * plane;
            const real* p = x.data() + base;
            real* o = out.data() + base;
            for (std::int64_t i = 0; i < plane; ++i) o[i] = g * p[i] + b;
        }
    }
    return out;
}

Tensor BatchNorm2d::backward(const Tensor& grad_out) {
    const Shape4 s = as4d(grad_out);
    const std::int64_t plane = static_cast<std::int64_t>(s.h) * s.w;
    const real m = static_cast<real>(static_cast<std::int64_t>(s.n) * plane);

    Tensor dx(grad_out.shape());
    for (int c = 0; c < channels_; ++c) {
        real sum_dy = 0.0, sum_dy_xhat = 0.0;
        for (int n = 0; n < s.n; ++n) {
            const std::int64_t base = (static_cast<std::int64_t>(n) * s.c + c) * plane;
            const real* dy = grad_out.data() + base;
            const real* xh = x_hat_cache_.data() + base;
            for (std::int64_t i = 0; i < plane; ++i) {
                sum_dy += dy[i];
                sum_dy_xhat += dy[i] * xh[i];
            }
        }
        beta_.grad[c] += sum_dy;
        gamma_.grad[c] += sum_dy_xhat;
        const real g_inv_std = gamma_.value[c] * inv_std_cache_[c];
        for (int n = 0; n < s.n; ++n) {
            const std::int64_t base = (static_cast<std::int64_t>(n) * s.c + c) * plane;
            const real* dy = grad_out.data() + base;
            const real* xh = x_hat_cache_.data() + base;
            real* d = dx.data() + base;
            for (std::int64_t i = 0; i < plane; ++i) {
                d[i] = g_inv_std * (dy[i] - sum_dy / m - xh[i] * sum_dy_xhat / m);
            }
        }
    }
    return dx;
}

void BatchNorm2d::collect_params(std::vector<Param*>& out) {
    out.push_back(&gamma_);
    out.push_back(&beta_);
}

// ---------------------------------------------------------------------------
// Activations / pooling / resampling
// ---------------------------------------------------------------------------

Tensor LeakyReLU::forward(const Tensor& x, bool) {
    x_cache_ = x;
    return infer(x);
}

Tensor LeakyReLU::infer(const Tensor& x) const {
    Tensor out(x.shape());
    for (std::int64_t i = 0; i < x.numel(); ++i) {
        const real v = x[i];
        out[i] = v > 0.0 ? v : slope_ * v;
    }
    return out;
}

Tensor LeakyReLU::backward(const Tensor& grad_out) {
    Tensor dx(grad_out.shape());
    for (std::int64_t i = 0; i < grad_out.numel(); ++i) {
        dx[i] = x_cache_[i] > 0.0 ? grad_out[i] : slope_ * grad_out[i];
    }
    return dx;
}

MaxPool2d::MaxPool2d(int kernel, int stride, int padding)
    : kernel_(kernel), stride_(stride), padding_(padding) {}

Tensor MaxPool2d::forward(const Tensor& x, bool) {
    const Shape4 s = as4d(x);
    in_shape_ = x.shape();
    const int oh = (s.h + 2 * padding_ - kernel_) / stride_ + 1;
    const int ow = (s.w + 2 * padding_ - kernel_) / stride_ + 1;
    Tensor out(x.dim() == 3 ? std::vector<int>{s.c, oh, ow}
                            : std::vector<int>{s.n, s.c, oh, ow});
    argmax_.assign(static_cast<size_t>(out.numel()), 0);
    std::int64_t oi = 0;
    for (int n = 0; n < s.n; ++n) {
        for (int c = 0; c < s.c; ++c) {
            const real* xc = x.data() + (static_cast<std::int64_t>(n) * s.c + c) * s.h * s.w;
            for (int ohi = 0; ohi < oh; ++ohi) {
                for (int owi = 0; owi < ow; ++owi, ++oi) {
                    real best = -1e300;
                    std::int64_t best_idx = 0;
                    for (int ki = 0; ki < kernel_; ++ki) {
                        const int ih = ohi * stride_ - padding_ + ki;
                        if (ih < 0 || ih >= s.h) continue;
                        for (int kj = 0; kj < kernel_; ++kj) {
                            const int iw = owi * stride_ - padding_ + kj;
                            if (iw < 0 || iw >= s.w) continue;
                            const real v = xc[static_cast<std::int64_t>(ih) * s.w + iw];
                            if (v > best) {
                                best = v;
                                best_idx = static_cast<std::int64_t>(ih) * s.w + iw;
                            }
                        }
                    }
                    out[oi] = best;
                    argmax_[static_cast<size_t>(oi)] =
                        (static_cast<std::int64_t>(n) * s.c + c) * s.h * s.w + best_idx;
                }
            }
        }
    }
    return out;
}

Tensor MaxPool2d::infer(const Tensor& x) const {
    MaxPool2d scratch(kernel_, stride_, padding_);
    return scratch.forward(x, false);
}

Tensor MaxPool2d::backward(const Tensor& grad_out) {
    Tensor dx(in_shape_);
    for (std::int64_t i = 0; i < grad_out.numel(); ++i) {
        dx[argmax_[static_cast<size_t>(i)]] += grad_out[i];
    }
    return dx;
}

Tensor Interpolate::forward(const Tensor& x, bool) {
    in_shape_ = x.shape();
    return infer(x);
}

Tensor Interpolate::infer(const Tensor& x) const {
    return bilinear_ ? bilinear_resize(x, out_h_, out_w_) : nearest_resize(x, out_h_, out_w_);
}

Tensor Interpolate::backward(const Tensor& grad_out) {
    const Shape4 s = as4d(Tensor(in_shape_));
    if (bilinear_) return bilinear_resize_backward(grad_out, s.h, s.w).reshaped(in_shape_);
    // nearest: each output pixel maps to exactly one source pixel
    Tensor dx(in_shape_);
    const Shape4 gs = as4d(grad_out);
    const real sh = static_cast<real>(s.h) / gs.h;
    const real sw = static_cast<real>(s.w) / gs.w;
    for (int n = 0; n < gs.n; ++n) {
        for (int c = 0; c < gs.c; ++c) {
            const std::int64_t in_base = (static_cast<std::int64_t>(n) * s.c + c) * s.h * s.w;
            const std::int64_t out_base =
                (static_cast<std::int64_t>(n) * gs.c + c) * gs.h * gs.w;
            for (int oh = 0; oh < gs.h; ++oh) {
                const int ih = std::min(static_cast<int>(oh * sh), s.h - 1);
                for (int ow = 0; ow < gs.w; ++ow) {
                    const int iw = std::min(static_cast<int>(ow * sw), s.w - 1);
                    dx[in_base + static_cast<std::int64_t>(ih) * s.w + iw] +=
                        grad_out[out_base + static_cast<std::int64_t>(oh) * gs.w + ow];
                }
            }
        }
    }
    return dx;
}

// ---------------------------------------------------------------------------
// Sequential / Adam
// ---------------------------------------------------------------------------

Tensor Sequential::forward(const Tensor& x, bool training) {
    Tensor cur = x;
    for (auto& layer : layers_) cur = layer->forward(cur, training);
    return cur;
}

Tensor Sequential::infer(const Tensor& x) const {
    Tensor cur = x;
    for (const auto& layer : layers_) cur = layer->infer(cur);
    return cur;
}

Tensor Sequential::backward(const Tensor& grad_out) {
    Tensor cur = grad_out;
    for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) cur = (*it)->backward(cur);
    return cur;
}

void Sequential::collect_params(std::vector<Param*>& out) {
    for (auto& layer : layers_) layer->collect_params(out);
}

Adam::Adam(std::vector<Param*> params, real lr, real weight_decay, real beta1, real beta2,
           real eps)
    : params_(std::move(params)), lr_(lr), weight_decay_(weight_decay), beta1_(beta1),
      beta2_(beta2), eps_(eps) {
    for (Param* p : params_) {
        m_.emplace_back(p->value.shape());
        v_.emplace_back(p->value.shape());
    }
}

void Adam::zero_grad() {
    for (Param* p : params_) p->zero_grad();
}

void Adam::step() {
    ++t_;
    const real bc1 = 1.0 - std::pow(beta1_, static_cast<real>(t_));
    const real bc2 = 1.0 - std::pow(beta2_, static_cast<real>(t_));
    for (size_t i = 0; i < params_.size(); ++i) {
        Param& p = *params_[i];
        Tensor& m = m_[i];
        Tensor& v = v_[i];
        for (std::int64_t j = 0; j < p.value.numel(); ++j) {
            const real g = p.grad[j] + weight_decay_ * p.value[j];
            m[j] = beta1_ * m[j] + (1.0 - beta1_) * g;
            v[j] = beta2_ * v[j] + (1.0 - beta2_) * g * g;
            p.value[j] -= lr_ * (m[j] / bc1) / (std::sqrt(v[j] / bc2) + eps_);
        }
    }
}

// ---------------------------------------------------------------------------
// Resampling helpers
// ---------------------------------------------------------------------------

namespace {

struct LinearWeight {
    int i0, i1;
    real w0, w1;
};

// align_corners=false source mapping, clamped at the borders
std::vector<LinearWeight> linear_weights(int in, int out) {
    std::vector<LinearWeight> ws(static_cast<size_t>(out));
    const real scale = static_cast<real>(in) / out;
    for (int o = 0; o < out; ++o) {
        real src = (o + 0.5) * scale - 0.5;
        if (src < 0.0) src = 0.0;
        if (src > in - 1) src = static_cast<real>(in - 1);
        const int i0 = static_cast<int>(src);
        const int i1 = std::min(i0 + 1, in - 1);
        const real w1 = src - i0;
        ws[static_cast<size_t>(o)] = {i0, i1, 1.0 - w1, w1};
    }
    return ws;
}

}  // namespace

Tensor bilinear_resize(const Tensor& x, int out_h, int out_w) {
    const Shape4 s = as4d(x);
    const auto wy = linear_weights(s.h, out_h);
    const auto wx = linear_weights(s.w, out_w);
    Tensor out(x.dim() == 3 ? std::vector<int>{s.c, out_h, out_w}
                            : std::vector<int>{s.n, s.c, out_h, out_w});
    std::int64_t oi = 0;
    for (int n = 0; n < s.n; ++n) {
        for (int c = 0; c < s.c; ++c) {
            const real* xc = x.data() + (static_cast<std::int64_t>(n) * s.c + c) * s.h * s.w;
            for (int oh = 0; oh < out_h; ++oh) {
                const LinearWeight& ly = wy[static_cast<size_t>(oh)];
                const real* r0 = xc + static_cast<std::int64_t>(ly.i0) * s.w;
                const real* r1 = xc + static_cast<std::int64_t>(ly.i1) * s.w;
                for (int ow = 0; ow < out_w; ++ow, ++oi) {
                    const LinearWeight& lx = wx[static_cast<size_t>(ow)];
                    out[oi] = ly.w0 * (lx.w0 * r0[lx.i0] + lx.w1 * r0[lx.i1]) +
                              ly.w1 * (lx.w0 * r1[lx.i0] + lx.w1 * r1[lx.i1]);
                }
            }
        }
    }
    return out;
}

Tensor bilinear_resize_backward(const Tensor& grad_out, int in_h, int in_w) {
    const Shape4 s = as4d(grad_out);
    const auto wy = linear_weights(in_h, s.h);
    const auto wx = linear_weights(in_w, s.w);
    Tensor dx(grad_out.dim() == 3 ? std::vector<int>{s.c, in_h, in_w}
                                  : std::vector<int>{s.n, s.c, in_h, in_w});
    std::int64_t oi = 0;
    for (int n = 0; n < s.n; ++n) {
        for (int c = 0; c < s.c; ++c) {
            real* xc = dx.data() + (static_cast<std::int64_t>(n) * s.c + c) * in_h * in_w;
            for (int oh = 0; oh < s.h; ++oh) {
                const LinearWeight& ly = wy[static_cast<size_t>(oh)];
                for (int ow = 0; ow < s.w; ++ow, ++oi) {
                    const LinearWeight& lx = wx[static_cast<size_t>(ow)];
                    const real g = grad_out[oi];
                    xc[static_cast<std::int64_t>(ly.i0) * in_w + lx.i0] += ly.w0 * lx.w0 * g;
                    xc[static_cast<std::int64_t>(ly.i0) * in_w + lx.i1] += ly.w0 * lx.w1 * g;
                    xc[static_cast<std::int64_t>(ly.i1) * in_w + lx.i0] += ly.w1 * lx.w0 * g;
                    xc[static_cast<std::int64_t>(ly.i1) * in_w + lx.i1] += ly.w1 * lx.w1 * g;
                }
            }
        }
    }
    return dx;
}

Tensor nearest_resize(const Tensor& x, int out_h, int out_w) {
    const Shape4 s = as4d(x);
    const real sh = static_cast<real>(s.h) / out_h;
    const real sw = static_cast<real>(s.w) / out_w;
    Tensor out(x.dim() == 3 ? std::vector<int>{s.c, out_h, out_w}
                            : std::vector<int>{s.n, s.c, out_h, out_w});
    std::int64_t oi = 0;
    for (int n = 0; n < s.n; ++n) {
        for (int c = 0; c < s.c; ++c) {
            const real* xc = x.data() + (static_cast<std::int64_t>(n) * s.c + c) * s.h * s.w;
            for (int oh = 0; oh < out_h; ++oh) {
                const int ih = std::min(static_cast<int>(oh * sh), s.h - 1);
                for (int ow = 0; ow < out_w; ++ow, ++oi) {
                    const int iw = std::min(static_cast<int>(ow * sw), s.w - 1);
                    out[oi] = xc[static_cast<std::int64_t>(ih) * s.w + iw];
                }
            }
        }
    }
    return out;
}

std::uint64_t params_hash(const std::vector<Param*>& params) {
    std::uint64_t h = 1469598103934665603ull;
    for (const Param* p : params) h = hash_tensor(p->value, h);
    return h;
}

}  // namespace ulsad
