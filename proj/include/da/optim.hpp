#pragma once

#include <cmath>
#include <vector>

#include "da/nn.hpp"

namespace da {

// Linear weight-decay warmup: 0 -> wd_max over the first wd_warmup_epochs.
inline double wd_schedule(int epoch, double wd_max, int wd_warmup_epochs) {
    if (wd_warmup_epochs <= 0) return wd_max;
    double frac = static_cast<double>(epoch) / static_cast<double>(wd_warmup_epochs);
    return wd_max * std::min(1.0, frac);
}

// AdamW with decoupled weight decay. Decay applies only to params flagged
// `decay` (conv/linear weights); shift-MLP params train at lr_mlp.
template <class T>
class AdamW {
public:
    T beta1 = static_cast<T>(0.9);
    T beta2 = static_cast<T>(0.999);
    T eps = static_cast<T>(1e-8);

    explicit AdamW(const nn::ParamSet<T>& ps) {
        m_.reserve(ps.params.size());
        v_.reserve(ps.params.size());
        for (const auto& p : ps.params) {
            m_.emplace_back(p.value->shape);
            v_.emplace_back(p.value->shape);
        }
    }

    void step(nn::ParamSet<T>& ps, T lr_main, T lr_mlp, T weight_decay) {
        ++t_;
        const T bc1 = T(1) - static_cast<T>(std::pow(static_cast<double>(beta1), t_));
        const T bc2 = T(1) - static_cast<T>(std::pow(static_cast<double>(beta2), t_));
        for (size_t i = 0; i < ps.params.size(); ++i) {
            auto& p = ps.params[i];
            const T lr = p.mlp_lr ? lr_mlp : lr_main;
            const T wd = p.decay ? weight_decay : T(0);
            T* val = p.value->data();
            const T* g = p.grad->data();
            T* m = m_[i].data();
            T* v = v_[i].data();
            const size_t n = p.value->numel();
            for (size_t j = 0; j < n; ++j) {
                m[j] = beta1 * m[j] + (T(1) - beta1) * g[j];
                v[j] = beta2 * v[j] + (T(1) - beta2) * g[j] * g[j];
                const T mhat = m[j] / bc1;
                const T vhat = v[j] / bc2;
                val[j] = val[j] - lr * wd * val[j] - lr * mhat / (std::sqrt(vhat) + eps);
            }
        }
    }

    int64_t steps() const { return t_; }
    void set_steps(int64_t t) { t_ = t; }
    std::vector<TensorT<T>>& first_moments() { return m_; }
    std::vector<TensorT<T>>& second_moments() { return v_; }

private:
    int64_t t_ = 0;
    std::vector<TensorT<T>> m_, v_;
};

// Exponential moving average of the parameters. Batch-norm running stats are
// not averaged; evaluation pairs the shadow params with the live stats.
template <class T>
class Ema {
public:
    Ema() = default;
    explicit Ema(const nn::ParamSet<T>& ps) {
        shadow_.reserve(ps.params.size());
        for (const auto& p : ps.params) shadow_.push_back(*p.value);
    }

    void update(const nn::ParamSet<T>& ps, T decay) {
        for (size_t i = 0; i < shadow_.size(); ++i) {
            const T* p = ps.params[i].value->data();
            T* s = shadow_[i].data();
            const size_t n = shadow_[i].numel();
            for (size_t j = 0; j < n; ++j) s[j] = decay * s[j] + (T(1) - decay) * p[j];
        }
    }

    void copy_to(nn::ParamSet<T>& ps) const {
        for (size_t i = 0; i < shadow_.size(); ++i) *ps.params[i].value = shadow_[i];
    }

    std::vector<TensorT<T>>& shadows() { return shadow_; }
    const std::vector<TensorT<T>>& shadows() const { return shadow_; }

private:
    std::vector<TensorT<T>> shadow_;
};

}  // namespace da
