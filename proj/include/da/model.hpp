#pragma once

#include <memory>
#include <string>
#include <vector>

#include "da/codebook.hpp"
#include "da/nn.hpp"

namespace da {

// Generator g: dropout pattern (+ shift amount) -> image.
//
// The encoder has no image input: it runs on a learnable constant tensor and
// the per-sample identity enters purely through the channel masks, so the
// same network both reconstructs training items and decodes fresh patterns.
struct ModelConfig {
    std::vector<int> hierarchy_channels{128, 256, 512};
    std::vector<int> active_channels{1, 4, 16};
    int latent_dim = 512;
    int encoder_spatial = 4;
    int blocks_per_hierarchy = 2;
    int decoder_groups = 8;
    int mlp_hidden = 64;
    int out_hw = 32;
    int max_shift = 8;
    bool shift_concat = false;  // concat conditioning instead of additive

    int decoder_stages() const {
        int s = 0, hw = encoder_spatial;
        while (hw < out_hw) {
            hw *= 2;
            ++s;
        }
        return s;
    }

    void validate() const {
        if (hierarchy_channels.empty() || hierarchy_channels.size() != active_channels.size())
            throw ConfigError("hierarchy_channels and active_channels must match in length");
        for (size_t i = 0; i < hierarchy_channels.size(); ++i) {
            if (hierarchy_channels[i] <= 0) throw ConfigError("hierarchy channels must be positive");
            if (active_channels[i] < 0 || active_channels[i] > hierarchy_channels[i])
                throw ConfigError("active_channels must be in [0, hierarchy_channels]");
        }
        if (latent_dim <= 0 || encoder_spatial <= 0 || blocks_per_hierarchy <= 0 ||
            decoder_groups <= 0 || mlp_hidden <= 0 || max_shift < 0)
            throw ConfigError("model dimensions must be positive");
        int hw = encoder_spatial;
        while (hw < out_hw) hw *= 2;
        if (hw != out_hw) throw ConfigError("out_hw must be encoder_spatial * 2^k");
        int c = hierarchy_channels.back();
        for (int s = 0; s < decoder_stages(); ++s) {
            c /= 2;
            if (c <= 0) throw ConfigError("decoder channel schedule bottoms out; widen hierarchy");
            if (c % decoder_groups) throw ConfigError("decoder_groups must divide stage channels");
        }
    }

    CodebookSpec codebook_layers(uint32_t n_clusters = 1, uint64_t seed = 0) const {
        CodebookSpec s;
        for (size_t i = 0; i < hierarchy_channels.size(); ++i)
            s.layers.push_back({static_cast<uint32_t>(hierarchy_channels[i]),
                                static_cast<uint32_t>(active_channels[i])});
        s.n_clusters = n_clusters;
        s.seed = seed;
        return s;
    }
};

template <class T>
class Generator {
public:
    explicit Generator(ModelConfig cfg) : cfg_(std::move(cfg)) {
        cfg_.validate();
        const int s = cfg_.encoder_spatial;
        const int c0 = cfg_.hierarchy_channels[0];
        enc_const_ = TensorT<T>({c0, s, s});
        enc_const_grad_ = TensorT<T>({c0, s, s});

        const size_t nh = cfg_.hierarchy_channels.size();
        hier_.resize(nh);
        masks_.resize(nh);
        for (size_t l = 0; l < nh; ++l) {
            const int c = cfg_.hierarchy_channels[l];
            for (int b = 0; b < cfg_.blocks_per_hierarchy; ++b)
                hier_[l].blocks.emplace_back(c, /*groups=*/1);
            if (l + 1 < nh) {
                hier_[l].proj_conv = nn::Conv2d<T>(c, cfg_.hierarchy_channels[l + 1], 1);
                hier_[l].proj_bn = nn::BatchNorm2d<T>(cfg_.hierarchy_channels[l + 1]);
                hier_[l].has_proj = true;
            }
        }
        latent_fc_ = nn::Linear<T>(cfg_.hierarchy_channels.back(), cfg_.latent_dim);

        mlp_fc1_ = nn::Linear<T>(1, cfg_.mlp_hidden);
        mlp_fc2_ = nn::Linear<T>(cfg_.mlp_hidden, cfg_.latent_dim);

        const int dc0 = cfg_.hierarchy_channels.back();
        const int dec_in = cfg_.shift_concat ? 2 * cfg_.latent_dim : cfg_.latent_dim;
        dec_fc_ = nn::Linear<T>(dec_in, dc0 * s * s);
        dec_bn_in_ = nn::BatchNorm2d<T>(dc0);
        int c = dc0;
        for (int i = 0; i < cfg_.decoder_stages(); ++i) {
            Stage st;
            st.proj_conv = nn::Conv2d<T>(c, c / 2, 1);
            st.proj_bn = nn::BatchNorm2d<T>(c / 2);
            st.block = nn::ResidualBlock<T>(c / 2, cfg_.decoder_groups);
            stages_.push_back(std::move(st));
            c /= 2;
        }
        out_conv_ = nn::Conv2d<T>(c, 3, 3);

        build_param_set();
    }

    void init(uint64_t seed) {
        Pcg32 rng(mix_seed(seed, 0x1717));
        for (auto& w : enc_const_.v) w = static_cast<T>(rng.next_gauss() * 0.1);
        for (auto& h : hier_) {
            for (auto& b : h.blocks) b.init(rng);
            if (h.has_proj) h.proj_conv.init(rng);
        }
        latent_fc_.init(rng);
        mlp_fc1_.init(rng);
        mlp_fc2_.init(rng);
        dec_fc_.init(rng);
        for (auto& st : stages_) {
            st.proj_conv.init(rng);
            st.block.init(rng);
        }
        out_conv_.init(rng);
    }

    // Pattern masks -> latent vector (b, latent_dim).
    TensorT<T> encode(const std::vector<const DropoutPattern*>& patterns, bool train) {
        const int b = static_cast<int>(patterns.size());
        const size_t nh = hier_.size();
        for (const auto* p : patterns)
            if (p->per_layer.size() != nh)
                throw PatternShapeMismatch("pattern has " + std::to_string(p->per_layer.size()) +
                                           " layers, model has " + std::to_string(nh));
        const int s = cfg_.encoder_spatial;
        const int c0 = cfg_.hierarchy_channels[0];
        TensorT<T> x({b, c0, s, s});
        const size_t stride = enc_const_.numel();
        for (int n = 0; n < b; ++n)
            std::copy(enc_const_.v.begin(), enc_const_.v.end(), x.v.begin() + n * stride);
        batch_ = b;

        for (size_t l = 0; l < nh; ++l) {
            for (auto& blk : hier_[l].blocks) x = blk.forward(x, train);
            std::vector<std::vector<uint32_t>> active(b);
            for (int n = 0; n < b; ++n) active[n] = patterns[n]->per_layer[l];
            x = masks_[l].forward(x, active);
            if (hier_[l].has_proj)
                x = hier_[l].proj_relu.forward(
                    hier_[l].proj_bn.forward(hier_[l].proj_conv.forward(x), train));
        }
        return latent_fc_.forward(gap_.forward(x));
    }

    // Shift conditioning vector (b, latent_dim); input is r / max_shift.
    TensorT<T> shift_embed(const std::vector<int>& shifts) {
        const int b = static_cast<int>(shifts.size());
        TensorT<T> r({b, 1});
        for (int n = 0; n < b; ++n) {
            if (std::abs(shifts[n]) > cfg_.max_shift)
                throw ShiftOutOfRange("|r| > max_shift in shift_embed");
            r.at2(n, 0) = cfg_.max_shift
                              ? static_cast<T>(shifts[n]) / static_cast<T>(cfg_.max_shift)
                              : T(0);
        }
        return mlp_fc2_.forward(mlp_tanh_.forward(mlp_fc1_.forward(r)));
    }

    TensorT<T> combine(const TensorT<T>& latent, const TensorT<T>& cond) const {
        if (!cfg_.shift_concat) {
            TensorT<T> z = latent;
            for (size_t i = 0; i < z.numel(); ++i) z[i] += cond[i];
            return z;
        }
        const int b = latent.dim(0), d = latent.dim(1);
        TensorT<T> z({b, 2 * d});
        for (int n = 0; n < b; ++n) {
            std::copy(&latent.at2(n, 0), &latent.at2(n, 0) + d, &z.at2(n, 0));
            std::copy(&cond.at2(n, 0), &cond.at2(n, 0) + d, &z.at2(n, d));
        }
        return z;
    }

    // Latent (+conditioning) -> image batch (b, 3, out_hw, out_hw) in [0,1].
    TensorT<T> decode(const TensorT<T>& z, bool train) {
        const int b = z.dim(0), s = cfg_.encoder_spatial;
        const int dc0 = cfg_.hierarchy_channels.back();
        TensorT<T> h = dec_fc_.forward(z);
        h.reshape({b, dc0, s, s});
        h = dec_relu_in_.forward(dec_bn_in_.forward(h, train));
        for (auto& st : stages_) {
            h = st.up.forward(h);
            h = st.proj_relu.forward(st.proj_bn.forward(st.proj_conv.forward(h), train));
            h = st.block.forward(h, train);
        }
        return out_sigmoid_.forward(out_conv_.forward(h));
    }

    TensorT<T> forward(const std::vector<const DropoutPattern*>& patterns,
                       const std::vector<int>& shifts, bool train) {
        if (patterns.size() != shifts.size())
            throw ConfigError("patterns/shifts batch size mismatch");
        TensorT<T> z = encode(patterns, train);
        TensorT<T> cond = shift_embed(shifts);
        return decode(combine(z, cond), train);
    }

    // Full reverse pass; accumulates grads for every parameter.
    void backward(const TensorT<T>& gy) {
        TensorT<T> g = out_conv_.backward(out_sigmoid_.backward(gy));
        for (size_t i = stages_.size(); i-- > 0;) {
            auto& st = stages_[i];
            g = st.block.backward(g);
            g = st.proj_conv.backward(st.proj_bn.backward(st.proj_relu.backward(g)));
            g = st.up.backward(g);
        }
        g = dec_bn_in_.backward(dec_relu_in_.backward(g));
        const int b = g.dim(0);
        g.reshape({b, static_cast<int>(g.numel()) / b});
        g = dec_fc_.backward(g);

        TensorT<T> g_latent, g_cond;
        if (!cfg_.shift_concat) {
            g_latent = g;
            g_cond = g;
        } else {
            const int d = cfg_.latent_dim;
            g_latent = TensorT<T>({b, d});
            g_cond = TensorT<T>({b, d});
            for (int n = 0; n < b; ++n) {
                std::copy(&g.at2(n, 0), &g.at2(n, 0) + d, &g_latent.at2(n, 0));
                std::copy(&g.at2(n, d), &g.at2(n, d) + d, &g_cond.at2(n, 0));
            }
        }
        mlp_fc1_.backward(mlp_tanh_.backward(mlp_fc2_.backward(g_cond)));

        g = gap_.backward(latent_fc_.backward(g_latent));
        for (size_t l = hier_.size(); l-- > 0;) {
            auto& hl = hier_[l];
            if (hl.has_proj)
                g = hl.proj_conv.backward(hl.proj_bn.backward(hl.proj_relu.backward(g)));
            g = masks_[l].backward(g);
            for (size_t k = hl.blocks.size(); k-- > 0;) g = hl.blocks[k].backward(g);
        }
        const size_t stride = enc_const_.numel();
        for (int n = 0; n < batch_; ++n)
            for (size_t i = 0; i < stride; ++i) enc_const_grad_[i] += g.v[n * stride + i];
    }

    void zero_grads() { params_.zero_grads(); }
    nn::ParamSet<T>& params() { return params_; }
    const ModelConfig& config() const { return cfg_; }

private:
    void build_param_set() {
        params_.add("enc.const", &enc_const_, &enc_const_grad_, /*decay=*/false);
        for (size_t l = 0; l < hier_.size(); ++l) {
            const std::string hp = "enc.h" + std::to_string(l);
            for (size_t b = 0; b < hier_[l].blocks.size(); ++b)
                hier_[l].blocks[b].collect(params_, hp + ".b" + std::to_string(b));
            if (hier_[l].has_proj) {
                hier_[l].proj_conv.collect(params_, hp + ".proj.conv");
                hier_[l].proj_bn.collect(params_, hp + ".proj.bn");
            }
        }
        latent_fc_.collect(params_, "enc.latent");
        mlp_fc1_.collect(params_, "mlp.fc1");
        mlp_fc2_.collect(params_, "mlp.fc2");
        dec_fc_.collect(params_, "dec.fc");
        dec_bn_in_.collect(params_, "dec.bn_in");
        for (size_t i = 0; i < stages_.size(); ++i) {
            const std::string sp = "dec.s" + std::to_string(i);
            stages_[i].proj_conv.collect(params_, sp + ".proj.conv");
            stages_[i].proj_bn.collect(params_, sp + ".proj.bn");
            stages_[i].block.collect(params_, sp + ".block");
        }
        out_conv_.collect(params_, "dec.out");
        for (auto& p : params_.params)
            if (p.name.rfind("mlp.", 0) == 0) p.mlp_lr = true;
    }

    struct Hierarchy {
        std::vector<nn::ResidualBlock<T>> blocks;
        bool has_proj = false;
        nn::Conv2d<T> proj_conv;
        nn::BatchNorm2d<T> proj_bn;
        nn::ReLU<T> proj_relu;
    };
    struct Stage {
        nn::Upsample2x<T> up;
        nn::Conv2d<T> proj_conv;
        nn::BatchNorm2d<T> proj_bn;
        nn::ReLU<T> proj_relu;
        nn::ResidualBlock<T> block;
    };

    ModelConfig cfg_;
    TensorT<T> enc_const_, enc_const_grad_;
    std::vector<Hierarchy> hier_;
    std::vector<nn::ChannelMask<T>> masks_;
    nn::GlobalAvgPool<T> gap_;
    nn::Linear<T> latent_fc_;
    nn::Linear<T> mlp_fc1_, mlp_fc2_;
    nn::Tanh<T> mlp_tanh_;
    nn::Linear<T> dec_fc_;
    nn::BatchNorm2d<T> dec_bn_in_;
    nn::ReLU<T> dec_relu_in_;
    std::vector<Stage> stages_;
    nn::Conv2d<T> out_conv_;
    nn::Sigmoid<T> out_sigmoid_;
    nn::ParamSet<T> params_;
    int batch_ = 0;
};

// Convenience overloads working on owned pattern vectors.
template <class T>
std::vector<const DropoutPattern*> pattern_ptrs(const std::vector<DropoutPattern>& ps) {
    std::vector<const DropoutPattern*> out;
    out.reserve(ps.size());
    for (const auto& p : ps) out.push_back(&p);
    return out;
}

}  // namespace da
