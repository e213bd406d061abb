#pragma once

#include <memory>
#include <string>
#include <vector>

#include "da/nn.hpp"
#include "da/tensorio.hpp"

namespace da {

template <class T>
struct LossGrad {
    T loss = 0;
    TensorT<T> grad;  // wrt the first argument (the prediction)
};

template <class T>
class Distance {
public:
    virtual ~Distance() = default;
    virtual LossGrad<T> operator()(const TensorT<T>& pred, const TensorT<T>& target,
                                   bool need_grad) = 0;
};

template <class T>
class MseDistance : public Distance<T> {
public:
    LossGrad<T> operator()(const TensorT<T>& pred, const TensorT<T>& target,
                           bool need_grad) override {
        if (pred.shape != target.shape) throw ConfigError("distance: shape mismatch");
        LossGrad<T> out;
        const size_t n = pred.numel();
        const T inv = T(1) / static_cast<T>(n);
        T acc = 0;
        for (size_t i = 0; i < n; ++i) {
            const T d = pred[i] - target[i];
            acc += d * d;
        }
        out.loss = acc * inv;
        if (need_grad) {
            out.grad = TensorT<T>(pred.shape);
            for (size_t i = 0; i < n; ++i)
                out.grad[i] = T(2) * (pred[i] - target[i]) * inv;
        }
        return out;
    }
};

// Perceptual distance: both images run through a fixed convolutional stack
// (3x3 convs + ReLU taps, 2x2 average pooling between taps); feature maps are
// unit-normalized across channels at every spatial position; the distance is
// the mean over taps of the mean squared difference. The stack's weights come
// from an external DAWT asset (tensors conv{i}.weight / conv{i}.bias) and are
// never trained here.
template <class T>
class PerceptualDistance : public Distance<T> {
public:
    explicit PerceptualDistance(const std::string& asset_path) {
        TensorFile tf;
        try {
            tf = TensorFile::load(asset_path);
        } catch (const Error& e) {
            throw DistanceAssetError(std::string("cannot load feature asset: ") + e.what());
        }
        int in_c = 3;
        for (int i = 0;; ++i) {
            const Tensor* w = tf.find("conv" + std::to_string(i) + ".weight");
            if (!w) break;
            const Tensor* b = tf.find("conv" + std::to_string(i) + ".bias");
            if (!b) throw DistanceAssetError("conv" + std::to_string(i) + ".bias missing");
            if (w->shape.size() != 4 || w->dim(1) != in_c || w->dim(2) != 3 || w->dim(3) != 3)
                throw DistanceAssetError("conv" + std::to_string(i) + ".weight has wrong shape");
            if (b->shape.size() != 1 || b->dim(0) != w->dim(0))
                throw DistanceAssetError("conv" + std::to_string(i) + ".bias has wrong shape");
            nn::Conv2d<T> conv(in_c, w->dim(0), 3);
            conv.weight() = w->template cast<T>();
            conv.bias() = b->template cast<T>();
            convs_.push_back(std::move(conv));
            in_c = w->dim(0);
        }
        if (convs_.empty()) throw DistanceAssetError("feature asset has no conv layers");
    }

    LossGrad<T> operator()(const TensorT<T>& pred, const TensorT<T>& target,
                           bool need_grad) override {
        if (pred.shape != target.shape) throw ConfigError("distance: shape mismatch");
        Trace tp = run(pred);
        Trace tt = run(target);

        LossGrad<T> out;
        const T layer_w = T(1) / static_cast<T>(convs_.size());
        std::vector<TensorT<T>> tap_grads(convs_.size());
        for (size_t l = 0; l < convs_.size(); ++l) {
            const auto& fa = tp.normed[l];
            const auto& fb = tt.normed[l];
            const T inv = T(1) / static_cast<T>(fa.numel());
            T acc = 0;
            for (size_t i = 0; i < fa.numel(); ++i) {
                const T d = fa[i] - fb[i];
                acc += d * d;
            }
            out.loss += acc * inv * layer_w;
            if (need_grad) {
                tap_grads[l] = TensorT<T>(fa.shape);
                for (size_t i = 0; i < fa.numel(); ++i)
                    tap_grads[l][i] = T(2) * (fa[i] - fb[i]) * inv * layer_w;
            }
        }
        if (need_grad) out.grad = backprop(tp, tap_grads);
        return out;
    }

    size_t layers() const { return convs_.size(); }

private:
    struct Trace {
        std::vector<TensorT<T>> taps;    // relu outputs (also the relu masks)
        std::vector<TensorT<T>> normed;  // unit-normalized taps
        std::vector<TensorT<T>> norms;   // (b,1,h,w) channel norms per tap
    };

    Trace run(const TensorT<T>& x) {
        Trace tr;
        TensorT<T> h = x;
        nn::AvgPool2x<T> pool;
        for (size_t l = 0; l < convs_.size(); ++l) {
            TensorT<T> pre = convs_[l].forward(h);
            h = TensorT<T>(pre.shape);
            for (size_t i = 0; i < pre.numel(); ++i) h[i] = pre[i] > T(0) ? pre[i] : T(0);
            tr.taps.push_back(h);
            push_normed(tr, h);
            if (l + 1 < convs_.size()) h = pool.forward(h);
        }
        return tr;
    }

    void push_normed(Trace& tr, const TensorT<T>& f) {
        const int b = f.dim(0), c = f.dim(1), h = f.dim(2), w = f.dim(3);
        TensorT<T> nf(f.shape);
        TensorT<T> norms({b, 1, h, w});
        for (int n = 0; n < b; ++n)
            for (int i = 0; i < h; ++i)
                for (int j = 0; j < w; ++j) {
                    T s = 0;
                    for (int ch = 0; ch < c; ++ch) {
                        const T v = f.at4(n, ch, i, j);
                        s += v * v;
                    }
                    const T norm = std::sqrt(s + norm_eps_);
                    norms.at4(n, 0, i, j) = norm;
                    for (int ch = 0; ch < c; ++ch) nf.at4(n, ch, i, j) = f.at4(n, ch, i, j) / norm;
                }
        tr.normed.push_back(std::move(nf));
        tr.norms.push_back(std::move(norms));
    }

    // grad through f_hat = f / sqrt(|f|^2 + eps):
    // df = (g - f_hat * <g, f_hat>) / norm, per spatial position.
    TensorT<T> norm_backward(const Trace& tr, size_t l, const TensorT<T>& g) const {
        const auto& nf = tr.normed[l];
        const auto& norms = tr.norms[l];
        const int b = nf.dim(0), c = nf.dim(1), h = nf.dim(2), w = nf.dim(3);
        TensorT<T> gf(nf.shape);
        for (int n = 0; n < b; ++n)
            for (int i = 0; i < h; ++i)
                for (int j = 0; j < w; ++j) {
                    T dot = 0;
                    for (int ch = 0; ch < c; ++ch) dot += g.at4(n, ch, i, j) * nf.at4(n, ch, i, j);
                    const T inv_norm = T(1) / norms.at4(n, 0, i, j);
                    for (int ch = 0; ch < c; ++ch)
                        gf.at4(n, ch, i, j) =
                            (g.at4(n, ch, i, j) - nf.at4(n, ch, i, j) * dot) * inv_norm;
                }
        return gf;
    }

    TensorT<T> backprop(const Trace& tr, const std::vector<TensorT<T>>& tap_grads) {
        const size_t L = convs_.size();
        nn::AvgPool2x<T> pool;
        TensorT<T> g;
        for (size_t l = L; l-- > 0;) {
            TensorT<T> tap_g = norm_backward(tr, l, tap_grads[l]);
            if (l + 1 < L) {
                TensorT<T> pooled_back = pool.backward(g);
                for (size_t i = 0; i < tap_g.numel(); ++i) tap_g[i] += pooled_back[i];
            }
            for (size_t i = 0; i < tap_g.numel(); ++i)
                if (!(tr.taps[l][i] > T(0))) tap_g[i] = T(0);
            g = convs_[l].backward_input(tap_g);
        }
        return g;
    }

    T norm_eps_ = static_cast<T>(1e-10);
    std::vector<nn::Conv2d<T>> convs_;
};

template <class T>
std::unique_ptr<Distance<T>> make_distance(const std::string& kind, const std::string& asset_path) {
    if (kind == "mse") return std::make_unique<MseDistance<T>>();
    if (kind == "perceptual") {
        if (asset_path.empty())
            throw DistanceAssetError("perceptual distance needs a feature asset path");
        return std::make_unique<PerceptualDistance<T>>(asset_path);
    }
    throw RunConfigError("unknown distance kind: " + kind);
}

// Writes a seeded random feature stack in the asset layout; a stand-in for
// externally supplied weights when smoke-testing the perceptual path.
void write_random_feature_asset(const std::string& path, const std::vector<int>& channels,
                                uint64_t seed);

}  // namespace da
