#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "da/common.hpp"
#include "da/rng.hpp"
#include "da/tensor.hpp"

namespace da::nn {

// Registry of learnable tensors and their gradients. Flags drive the
// optimizer: `decay` marks conv/linear weights (decoupled weight decay),
// `mlp_lr` marks shift-MLP tensors (trained at the lower rate). Buffers are
// non-learnable state (batch-norm running stats).
template <class T>
struct ParamRef {
    std::string name;
    TensorT<T>* value;
    TensorT<T>* grad;
    bool decay;
    bool mlp_lr;
};

template <class T>
struct BufferRef {
    std::string name;
    TensorT<T>* value;
};

template <class T>
struct ParamSet {
    std::vector<ParamRef<T>> params;
    std::vector<BufferRef<T>> buffers;

    void add(const std::string& name, TensorT<T>* v, TensorT<T>* g, bool decay,
             bool mlp_lr = false) {
        params.push_back({name, v, g, decay, mlp_lr});
    }
    void add_buffer(const std::string& name, TensorT<T>* v) { buffers.push_back({name, v}); }

    void zero_grads() {
        for (auto& p : params) p.grad->zero();
    }
    size_t count_values(const std::string& prefix = "") const {
        size_t n = 0;
        for (const auto& p : params)
            if (p.name.rfind(prefix, 0) == 0) n += p.value->numel();
        return n;
    }
};

// ---------------------------------------------------------------------------
// Conv2d: stride-1 KxK convolution with zero padding and optional groups.
// Caches its input for the backward pass; grads accumulate until zeroed.
// ---------------------------------------------------------------------------
template <class T>
class Conv2d {
public:
    Conv2d() = default;
    Conv2d(int in_c, int out_c, int ksize, int groups = 1)
        : in_c_(in_c), out_c_(out_c), k_(ksize), pad_(ksize / 2), groups_(groups) {
        if (in_c % groups || out_c % groups)
            throw ConfigError("conv groups must divide channel counts");
        weight_ = TensorT<T>({out_c, in_c / groups, ksize, ksize});
        wgrad_ = TensorT<T>({out_c, in_c / groups, ksize, ksize});
        bias_ = TensorT<T>({out_c});
        bgrad_ = TensorT<T>({out_c});
    }

    void init(Pcg32& rng) {
        T std = static_cast<T>(std::sqrt(2.0 / (static_cast<double>(in_c_ / groups_) * k_ * k_)));
        for (auto& w : weight_.v) w = static_cast<T>(rng.next_gauss()) * std;
        bias_.zero();
    }

    TensorT<T> forward(const TensorT<T>& x) {
        x_ = x;
        const int b = x.dim(0), h = x.dim(2), w = x.dim(3);
        TensorT<T> y({b, out_c_, h, w});
        const int cig = in_c_ / groups_, cog = out_c_ / groups_;
#pragma omp parallel for
        for (int n = 0; n < b; ++n) {
            for (int oc = 0; oc < out_c_; ++oc) {
                const int g = oc / cog;
                T* yp = &y.at4(n, oc, 0, 0);
                for (int i = 0; i < h * w; ++i) yp[i] = bias_[oc];
                for (int icg = 0; icg < cig; ++icg) {
                    const int ic = g * cig + icg;
                    const T* xp = &x.at4(n, ic, 0, 0);
                    for (int kh = 0; kh < k_; ++kh) {
                        for (int kw = 0; kw < k_; ++kw) {
                            const T wv = weight_.at4(oc, icg, kh, kw);
                            accumulate_shifted(yp, xp, wv, h, w, kh - pad_, kw - pad_);
                        }
                    }
                }
            }
        }
        return y;
    }

    // Returns grad wrt input and accumulates weight/bias grads.
    TensorT<T> backward(const TensorT<T>& gy) { return backward_impl(gy, true); }
    // Input grad only (frozen feature stacks).
    TensorT<T> backward_input(const TensorT<T>& gy) { return backward_impl(gy, false); }

    void collect(ParamSet<T>& ps, const std::string& prefix) {
        ps.add(prefix + ".weight", &weight_, &wgrad_, /*decay=*/true);
        ps.add(prefix + ".bias", &bias_, &bgrad_, /*decay=*/false);
    }

    TensorT<T>& weight() { return weight_; }
    TensorT<T>& bias() { return bias_; }
    int out_channels() const { return out_c_; }

private:
    // y[oh,ow] += wv * x[oh+dh, ow+dw] over the valid window.
    static void accumulate_shifted(T* y, const T* x, T wv, int h, int w, int dh, int dw) {
        const int oh0 = std::max(0, -dh), oh1 = std::min(h, h - dh);
        const int ow0 = std::max(0, -dw), ow1 = std::min(w, w - dw);
        for (int oh = oh0; oh < oh1; ++oh) {
            T* yr = y + static_cast<size_t>(oh) * w;
            const T* xr = x + static_cast<size_t>(oh + dh) * w + dw;
            for (int ow = ow0; ow < ow1; ++ow) yr[ow] += wv * xr[ow];
        }
    }

    TensorT<T> backward_impl(const TensorT<T>& gy, bool with_params) {
        // Stride-1 same-padding: input and output share spatial dims, so the
        // input gradient needs no cached activation at all.
        const int b = gy.dim(0), h = gy.dim(2), w = gy.dim(3);
        const int cig = in_c_ / groups_, cog = out_c_ / groups_;
        TensorT<T> gx({b, in_c_, h, w});
#pragma omp parallel for
        for (int n = 0; n < b; ++n) {
            for (int oc = 0; oc < out_c_; ++oc) {
                const int g = oc / cog;
                const T* gyp = &gy.at4(n, oc, 0, 0);
                for (int icg = 0; icg < cig; ++icg) {
                    const int ic = g * cig + icg;
                    T* gxp = &gx.at4(n, ic, 0, 0);
                    for (int kh = 0; kh < k_; ++kh)
                        for (int kw = 0; kw < k_; ++kw)
                            accumulate_shifted(gxp, gyp, weight_.at4(oc, icg, kh, kw), h, w,
                                               pad_ - kh, pad_ - kw);
                }
            }
        }
        if (with_params) {
            // Parallel over output channels, serial over batch: gradient sums
            // have a fixed accumulation order for any thread count.
#pragma omp parallel for
            for (int oc = 0; oc < out_c_; ++oc) {
                const int g = oc / cog;
                for (int n = 0; n < b; ++n) {
                    const T* gyp = &gy.at4(n, oc, 0, 0);
                    T bsum = 0;
                    for (int i = 0; i < h * w; ++i) bsum += gyp[i];
                    bgrad_[oc] += bsum;
                    for (int icg = 0; icg < cig; ++icg) {
                        const int ic = g * cig + icg;
                        const T* xp = &x_.at4(n, ic, 0, 0);
                        for (int kh = 0; kh < k_; ++kh) {
                            for (int kw = 0; kw < k_; ++kw) {
                                const int dh = kh - pad_, dw = kw - pad_;
                                const int oh0 = std::max(0, -dh), oh1 = std::min(h, h - dh);
                                const int ow0 = std::max(0, -dw), ow1 = std::min(w, w - dw);
                                T acc = 0;
                                for (int oh = oh0; oh < oh1; ++oh) {
                                    const T* gr = gyp + static_cast<size_t>(oh) * w;
                                    const T* xr = xp + static_cast<size_t>(oh + dh) * w + dw;
                                    for (int ow = ow0; ow < ow1; ++ow) acc += gr[ow] * xr[ow];
                                }
                                wgrad_.at4(oc, icg, kh, kw) += acc;
                            }
                        }
                    }
                }
            }
        }
        return gx;
    }

    int in_c_ = 0, out_c_ = 0, k_ = 0, pad_ = 0, groups_ = 1;
    TensorT<T> weight_, wgrad_, bias_, bgrad_;
    TensorT<T> x_;
};

// ---------------------------------------------------------------------------
// BatchNorm2d over (N,H,W) per channel. Train mode normalizes with batch
// statistics and updates running stats (momentum 0.1, unbiased running var);
// eval mode uses the running stats.
// ---------------------------------------------------------------------------
template <class T>
class BatchNorm2d {
public:
    BatchNorm2d() = default;
    explicit BatchNorm2d(int channels) : c_(channels) {
        gamma_ = TensorT<T>({channels});
        beta_ = TensorT<T>({channels});
        ggrad_ = TensorT<T>({channels});
        bgrad_ = TensorT<T>({channels});
        running_mean_ = TensorT<T>({channels});
        running_var_ = TensorT<T>({channels});
        reset();
    }

    void reset() {
        gamma_.fill(T(1));
        beta_.zero();
        running_mean_.zero();
        running_var_.fill(T(1));
    }

    TensorT<T> forward(const TensorT<T>& x, bool train) {
        train_ = train;
        const int b = x.dim(0), h = x.dim(2), w = x.dim(3);
        const size_t plane = static_cast<size_t>(h) * w;
        const size_t cnt = static_cast<size_t>(b) * plane;
        TensorT<T> y(x.shape);
        xhat_ = TensorT<T>(x.shape);
        invstd_ = TensorT<T>({c_});
        count_ = cnt;
#pragma omp parallel for
        for (int c = 0; c < c_; ++c) {
            T mean, var;
            if (train) {
                T sum = 0;
                for (int n = 0; n < b; ++n) {
                    const T* xp = &x.at4(n, c, 0, 0);
                    for (size_t i = 0; i < plane; ++i) sum += xp[i];
                }
                mean = sum / static_cast<T>(cnt);
                T sq = 0;
                for (int n = 0; n < b; ++n) {
                    const T* xp = &x.at4(n, c, 0, 0);
                    for (size_t i = 0; i < plane; ++i) {
                        T d = xp[i] - mean;
                        sq += d * d;
                    }
                }
                var = sq / static_cast<T>(cnt);
                T unbiased = cnt > 1 ? sq / static_cast<T>(cnt - 1) : var;
                running_mean_[c] = (T(1) - momentum_) * running_mean_[c] + momentum_ * mean;
                running_var_[c] = (T(1) - momentum_) * running_var_[c] + momentum_ * unbiased;
            } else {
                mean = running_mean_[c];
                var = running_var_[c];
            }
            const T istd = T(1) / std::sqrt(var + eps_);
            invstd_[c] = istd;
            for (int n = 0; n < b; ++n) {
                const T* xp = &x.at4(n, c, 0, 0);
                T* xh = &xhat_.at4(n, c, 0, 0);
                T* yp = &y.at4(n, c, 0, 0);
                for (size_t i = 0; i < plane; ++i) {
                    xh[i] = (xp[i] - mean) * istd;
                    yp[i] = gamma_[c] * xh[i] + beta_[c];
                }
            }
        }
        return y;
    }

    TensorT<T> backward(const TensorT<T>& gy) {
        const int b = gy.dim(0), h = gy.dim(2), w = gy.dim(3);
        const size_t plane = static_cast<size_t>(h) * w;
        TensorT<T> gx(gy.shape);
#pragma omp parallel for
        for (int c = 0; c < c_; ++c) {
            T sum_gy = 0, sum_gy_xhat = 0;
            for (int n = 0; n < b; ++n) {
                const T* gp = &gy.at4(n, c, 0, 0);
                const T* xh = &xhat_.at4(n, c, 0, 0);
                for (size_t i = 0; i < plane; ++i) {
                    sum_gy += gp[i];
                    sum_gy_xhat += gp[i] * xh[i];
                }
            }
            ggrad_[c] += sum_gy_xhat;
            bgrad_[c] += sum_gy;
            const T istd = invstd_[c];
            if (train_) {
                const T inv_cnt = T(1) / static_cast<T>(count_);
                for (int n = 0; n < b; ++n) {
                    const T* gp = &gy.at4(n, c, 0, 0);
                    const T* xh = &xhat_.at4(n, c, 0, 0);
                    T* gxp = &gx.at4(n, c, 0, 0);
                    for (size_t i = 0; i < plane; ++i)
                        gxp[i] = gamma_[c] * istd *
                                 (gp[i] - inv_cnt * (sum_gy + xh[i] * sum_gy_xhat));
                }
            } else {
                for (int n = 0; n < b; ++n) {
                    const T* gp = &gy.at4(n, c, 0, 0);
                    T* gxp = &gx.at4(n, c, 0, 0);
                    for (size_t i = 0; i < plane; ++i) gxp[i] = gamma_[c] * istd * gp[i];
                }
            }
        }
        return gx;
    }

    void collect(ParamSet<T>& ps, const std::string& prefix) {
        ps.add(prefix + ".gamma", &gamma_, &ggrad_, /*decay=*/false);
        ps.add(prefix + ".beta", &beta_, &bgrad_, /*decay=*/false);
        ps.add_buffer(prefix + ".running_mean", &running_mean_);
        ps.add_buffer(prefix + ".running_var", &running_var_);
    }

private:
    int c_ = 0;
    T eps_ = static_cast<T>(1e-5);
    T momentum_ = static_cast<T>(0.1);
    bool train_ = true;
    size_t count_ = 0;
    TensorT<T> gamma_, beta_, ggrad_, bgrad_, running_mean_, running_var_;
    TensorT<T> xhat_, invstd_;
};

template <class T>
class ReLU {
public:
    TensorT<T> forward(const TensorT<T>& x) {
        x_ = x;
        TensorT<T> y(x.shape);
        for (size_t i = 0; i < x.numel(); ++i) y[i] = x[i] > T(0) ? x[i] : T(0);
        return y;
    }
    TensorT<T> backward(const TensorT<T>& gy) {
        TensorT<T> gx(gy.shape);
        for (size_t i = 0; i < gy.numel(); ++i) gx[i] = x_[i] > T(0) ? gy[i] : T(0);
        return gx;
    }

private:
    TensorT<T> x_;
};

template <class T>
class Tanh {
public:
    TensorT<T> forward(const TensorT<T>& x) {
        y_ = TensorT<T>(x.shape);
        for (size_t i = 0; i < x.numel(); ++i) y_[i] = std::tanh(x[i]);
        return y_;
    }
    TensorT<T> backward(const TensorT<T>& gy) {
        TensorT<T> gx(gy.shape);
        for (size_t i = 0; i < gy.numel(); ++i) gx[i] = gy[i] * (T(1) - y_[i] * y_[i]);
        return gx;
    }

private:
    TensorT<T> y_;
};

template <class T>
class Sigmoid {
public:
    TensorT<T> forward(const TensorT<T>& x) {
        y_ = TensorT<T>(x.shape);
        for (size_t i = 0; i < x.numel(); ++i) y_[i] = T(1) / (T(1) + std::exp(-x[i]));
        return y_;
    }
    TensorT<T> backward(const TensorT<T>& gy) {
        TensorT<T> gx(gy.shape);
        for (size_t i = 0; i < gy.numel(); ++i) gx[i] = gy[i] * y_[i] * (T(1) - y_[i]);
        return gx;
    }

private:
    TensorT<T> y_;
};

template <class T>
class Linear {
public:
    Linear() = default;
    Linear(int in_dim, int out_dim) : in_(in_dim), out_(out_dim) {
        weight_ = TensorT<T>({out_dim, in_dim});
        wgrad_ = TensorT<T>({out_dim, in_dim});
        bias_ = TensorT<T>({out_dim});
        bgrad_ = TensorT<T>({out_dim});
    }

    void init(Pcg32& rng) {
        T std = static_cast<T>(std::sqrt(2.0 / in_));
        for (auto& w : weight_.v) w = static_cast<T>(rng.next_gauss()) * std;
        bias_.zero();
    }

    TensorT<T> forward(const TensorT<T>& x) {
        x_ = x;
        const int b = x.dim(0);
        TensorT<T> y({b, out_});
#pragma omp parallel for
        for (int n = 0; n < b; ++n) {
            const T* xp = &x.at2(n, 0);
            for (int o = 0; o < out_; ++o) {
                const T* wp = &weight_.at2(o, 0);
                T acc = bias_[o];
                for (int i = 0; i < in_; ++i) acc += wp[i] * xp[i];
                y.at2(n, o) = acc;
            }
        }
        return y;
    }

    TensorT<T> backward(const TensorT<T>& gy) {
        const int b = gy.dim(0);
        TensorT<T> gx({b, in_});
#pragma omp parallel for
        for (int n = 0; n < b; ++n) {
            T* gxp = &gx.at2(n, 0);
            for (int o = 0; o < out_; ++o) {
                const T g = gy.at2(n, o);
                const T* wp = &weight_.at2(o, 0);
                for (int i = 0; i < in_; ++i) gxp[i] += g * wp[i];
            }
        }
#pragma omp parallel for
        for (int o = 0; o < out_; ++o) {
            T* wg = &wgrad_.at2(o, 0);
            T bacc = 0;
            for (int n = 0; n < b; ++n) {
                const T g = gy.at2(n, o);
                bacc += g;
                const T* xp = &x_.at2(n, 0);
                for (int i = 0; i < in_; ++i) wg[i] += g * xp[i];
            }
            bgrad_[o] += bacc;
        }
        return gx;
    }

    void collect(ParamSet<T>& ps, const std::string& prefix) {
        ps.add(prefix + ".weight", &weight_, &wgrad_, /*decay=*/true);
        ps.add(prefix + ".bias", &bias_, &bgrad_, /*decay=*/false);
    }

    TensorT<T>& weight() { return weight_; }
    TensorT<T>& bias() { return bias_; }

private:
    int in_ = 0, out_ = 0;
    TensorT<T> weight_, wgrad_, bias_, bgrad_;
    TensorT<T> x_;
};

// Zeroes every channel not listed in the per-sample active set. Active
// channels pass through unscaled; the masked positions back-propagate zero.
template <class T>
class ChannelMask {
public:
    TensorT<T> forward(const TensorT<T>& x, const std::vector<std::vector<uint32_t>>& active) {
        const int b = x.dim(0), c = x.dim(1);
        const size_t plane = static_cast<size_t>(x.dim(2)) * x.dim(3);
        if (static_cast<int>(active.size()) != b)
            throw PatternShapeMismatch("active set count != batch size");
        for (const auto& idxs : active)
            for (uint32_t idx : idxs)
                if (idx >= static_cast<uint32_t>(c))
                    throw PatternShapeMismatch("channel index " + std::to_string(idx) +
                                               " >= " + std::to_string(c));
        active_ = active;  // owned copy; backward runs after the caller's set is gone
        TensorT<T> y(x.shape);  // zero-initialized; copy only active channels
        for (int n = 0; n < b; ++n) {
            for (uint32_t idx : active[n]) {
                const T* xp = &x.at4(n, static_cast<int>(idx), 0, 0);
                T* yp = &y.at4(n, static_cast<int>(idx), 0, 0);
                for (size_t i = 0; i < plane; ++i) yp[i] = xp[i];
            }
        }
        return y;
    }

    TensorT<T> backward(const TensorT<T>& gy) {
        const int b = gy.dim(0);
        const size_t plane = static_cast<size_t>(gy.dim(2)) * gy.dim(3);
        TensorT<T> gx(gy.shape);
        for (int n = 0; n < b; ++n) {
            for (uint32_t idx : active_[n]) {
                const T* gp = &gy.at4(n, static_cast<int>(idx), 0, 0);
                T* gxp = &gx.at4(n, static_cast<int>(idx), 0, 0);
                for (size_t i = 0; i < plane; ++i) gxp[i] = gp[i];
            }
        }
        return gx;
    }

private:
    std::vector<std::vector<uint32_t>> active_;
};

template <class T>
class Upsample2x {
public:
    TensorT<T> forward(const TensorT<T>& x) {
        const int b = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
        TensorT<T> y({b, c, h * 2, w * 2});
        for (int n = 0; n < b; ++n)
            for (int ch = 0; ch < c; ++ch)
                for (int i = 0; i < h; ++i) {
                    const T* xr = &x.at4(n, ch, i, 0);
                    T* y0 = &y.at4(n, ch, 2 * i, 0);
                    T* y1 = &y.at4(n, ch, 2 * i + 1, 0);
                    for (int j = 0; j < w; ++j) {
                        y0[2 * j] = y0[2 * j + 1] = xr[j];
                        y1[2 * j] = y1[2 * j + 1] = xr[j];
                    }
                }
        return y;
    }
    TensorT<T> backward(const TensorT<T>& gy) {
        const int b = gy.dim(0), c = gy.dim(1), h = gy.dim(2) / 2, w = gy.dim(3) / 2;
        TensorT<T> gx({b, c, h, w});
        for (int n = 0; n < b; ++n)
            for (int ch = 0; ch < c; ++ch)
                for (int i = 0; i < h; ++i) {
                    T* gxr = &gx.at4(n, ch, i, 0);
                    const T* g0 = &gy.at4(n, ch, 2 * i, 0);
                    const T* g1 = &gy.at4(n, ch, 2 * i + 1, 0);
                    for (int j = 0; j < w; ++j)
                        gxr[j] = g0[2 * j] + g0[2 * j + 1] + g1[2 * j] + g1[2 * j + 1];
                }
        return gx;
    }
};

template <class T>
class GlobalAvgPool {
public:
    TensorT<T> forward(const TensorT<T>& x) {
        h_ = x.dim(2);
        w_ = x.dim(3);
        const int b = x.dim(0), c = x.dim(1);
        TensorT<T> y({b, c});
        const T inv = T(1) / static_cast<T>(h_ * w_);
        for (int n = 0; n < b; ++n)
            for (int ch = 0; ch < c; ++ch) {
                const T* xp = &x.at4(n, ch, 0, 0);
                T acc = 0;
                for (int i = 0; i < h_ * w_; ++i) acc += xp[i];
                y.at2(n, ch) = acc * inv;
            }
        return y;
    }
    TensorT<T> backward(const TensorT<T>& gy) {
        const int b = gy.dim(0), c = gy.dim(1);
        TensorT<T> gx({b, c, h_, w_});
        const T inv = T(1) / static_cast<T>(h_ * w_);
        for (int n = 0; n < b; ++n)
            for (int ch = 0; ch < c; ++ch) {
                const T g = gy.at2(n, ch) * inv;
                T* gxp = &gx.at4(n, ch, 0, 0);
                for (int i = 0; i < h_ * w_; ++i) gxp[i] = g;
            }
        return gx;
    }

private:
    int h_ = 0, w_ = 0;
};

// 2x2 average pool, stride 2 (perceptual feature stack only).
template <class T>
class AvgPool2x {
public:
    TensorT<T> forward(const TensorT<T>& x) {
        const int b = x.dim(0), c = x.dim(1), h = x.dim(2) / 2, w = x.dim(3) / 2;
        TensorT<T> y({b, c, h, w});
        for (int n = 0; n < b; ++n)
            for (int ch = 0; ch < c; ++ch)
                for (int i = 0; i < h; ++i) {
                    const T* x0 = &x.at4(n, ch, 2 * i, 0);
                    const T* x1 = &x.at4(n, ch, 2 * i + 1, 0);
                    T* yr = &y.at4(n, ch, i, 0);
                    for (int j = 0; j < w; ++j)
                        yr[j] = (x0[2 * j] + x0[2 * j + 1] + x1[2 * j] + x1[2 * j + 1]) * T(0.25);
                }
        return y;
    }
    TensorT<T> backward(const TensorT<T>& gy) {
        const int b = gy.dim(0), c = gy.dim(1), h = gy.dim(2), w = gy.dim(3);
        TensorT<T> gx({b, c, h * 2, w * 2});
        for (int n = 0; n < b; ++n)
            for (int ch = 0; ch < c; ++ch)
                for (int i = 0; i < h; ++i) {
                    const T* gr = &gy.at4(n, ch, i, 0);
                    T* g0 = &gx.at4(n, ch, 2 * i, 0);
                    T* g1 = &gx.at4(n, ch, 2 * i + 1, 0);
                    for (int j = 0; j < w; ++j) {
                        const T g = gr[j] * T(0.25);
                        g0[2 * j] = g0[2 * j + 1] = g;
                        g1[2 * j] = g1[2 * j + 1] = g;
                    }
                }
        return gx;
    }
};

// Post-activation residual block: relu(bn2(conv2(relu(bn1(conv1(x))))) + x).
template <class T>
class ResidualBlock {
public:
    ResidualBlock() = default;
    ResidualBlock(int channels, int groups)
        : conv1_(channels, channels, 3, groups),
          bn1_(channels),
          conv2_(channels, channels, 3, groups),
          bn2_(channels) {}

    void init(Pcg32& rng) {
        conv1_.init(rng);
        conv2_.init(rng);
    }

    TensorT<T> forward(const TensorT<T>& x, bool train) {
        TensorT<T> t = relu1_.forward(bn1_.forward(conv1_.forward(x), train));
        TensorT<T> t2 = bn2_.forward(conv2_.forward(t), train);
        for (size_t i = 0; i < t2.numel(); ++i) t2[i] += x[i];
        return relu2_.forward(t2);
    }

    TensorT<T> backward(const TensorT<T>& gy) {
        TensorT<T> g = relu2_.backward(gy);
        TensorT<T> gb = conv1_.backward(bn1_.backward(relu1_.backward(conv2_.backward(bn2_.backward(g)))));
        for (size_t i = 0; i < gb.numel(); ++i) gb[i] += g[i];  // skip connection
        return gb;
    }

    void collect(ParamSet<T>& ps, const std::string& prefix) {
        conv1_.collect(ps, prefix + ".conv1");
        bn1_.collect(ps, prefix + ".bn1");
        conv2_.collect(ps, prefix + ".conv2");
        bn2_.collect(ps, prefix + ".bn2");
    }

private:
    Conv2d<T> conv1_;
    BatchNorm2d<T> bn1_;
    Conv2d<T> conv2_;
    BatchNorm2d<T> bn2_;
    ReLU<T> relu1_, relu2_;
};

}  // namespace da::nn
