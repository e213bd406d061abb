#include "da/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace da {

namespace {

// Forward in fixed-size chunks so huge sample counts stay memory-bounded.
constexpr int kChunk = 64;

void check_spec_matches(const CheckpointData& ckpt) {
    const auto& hc = ckpt.model_cfg.hierarchy_channels;
    const auto& spec = ckpt.cb_spec;
    if (spec.layers.size() != hc.size())
        throw RunConfigError("checkpoint codebook spec does not match model hierarchy count");
    for (size_t l = 0; l < hc.size(); ++l)
        if (spec.layers[l].n_channels != static_cast<uint32_t>(hc[l]))
            throw RunConfigError("checkpoint codebook spec does not match model channels");
}

}  // namespace

Tensor generate(const CheckpointData& ckpt, const SampleRequest& req) {
    if (req.count < 1) throw ConfigError("sample count must be >= 1");
    check_spec_matches(ckpt);
    Generator<float> gen = ckpt.build_generator(req.use_ema);

    const std::vector<double>* weights = nullptr;
    std::vector<double> occupancy;
    if (ckpt.cb_spec.clustered()) {
        if (!req.cluster_weights.empty()) {
            weights = &req.cluster_weights;
        } else if (!ckpt.cluster_occupancy.empty()) {
            occupancy = ckpt.cluster_occupancy;
            weights = &occupancy;
        }
    }

    Pcg32 rng(mix_seed(req.seed, 0x5A3D));
    std::vector<DropoutPattern> patterns;
    patterns.reserve(req.count);
    for (int i = 0; i < req.count; ++i)
        patterns.push_back(sample_novel_pattern(ckpt.cb_spec, weights, rng));

    const int hw = ckpt.model_cfg.out_hw;
    Tensor out({req.count, 3, hw, hw});
    const size_t img = static_cast<size_t>(3) * hw * hw;
    for (int start = 0; start < req.count; start += kChunk) {
        const int b = std::min(kChunk, req.count - start);
        std::vector<const DropoutPattern*> ptrs(b);
        for (int i = 0; i < b; ++i) ptrs[i] = &patterns[start + i];
        Tensor chunk = gen.forward(ptrs, std::vector<int>(b, 0), /*train=*/false);
        std::copy(chunk.v.begin(), chunk.v.end(), out.v.begin() + start * img);
    }
    return out;
}

Tensor reconstruct(const CheckpointData& ckpt, const Codebook& cb,
                   const std::vector<uint32_t>& indices, bool use_ema) {
    check_spec_matches(ckpt);
    for (uint32_t i : indices)
        if (i >= cb.size())
            throw ConfigError("reconstruct index " + std::to_string(i) + " >= N = " +
                              std::to_string(cb.size()));
    Generator<float> gen = ckpt.build_generator(use_ema);
    const int hw = ckpt.model_cfg.out_hw;
    const int count = static_cast<int>(indices.size());
    Tensor out({count, 3, hw, hw});
    const size_t img = static_cast<size_t>(3) * hw * hw;
    for (int start = 0; start < count; start += kChunk) {
        const int b = std::min(kChunk, count - start);
        std::vector<const DropoutPattern*> ptrs(b);
        for (int i = 0; i < b; ++i) ptrs[i] = &cb.patterns[indices[start + i]];
        Tensor chunk = gen.forward(ptrs, std::vector<int>(b, 0), /*train=*/false);
        std::copy(chunk.v.begin(), chunk.v.end(), out.v.begin() + start * img);
    }
    return out;
}

std::vector<double> psnr(const Tensor& a, const Tensor& b) {
    if (a.shape != b.shape) throw ConfigError("psnr: shape mismatch");
    const int n = a.dim(0);
    const size_t img = a.numel() / static_cast<size_t>(n);
    std::vector<double> out(n);
    for (int i = 0; i < n; ++i) {
        const float* pa = a.data() + i * img;
        const float* pb = b.data() + i * img;
        double mse = 0.0;
        for (size_t j = 0; j < img; ++j) {
            const double d = static_cast<double>(pa[j]) - static_cast<double>(pb[j]);
            mse += d * d;
        }
        mse /= static_cast<double>(img);
        out[i] = mse == 0.0 ? std::numeric_limits<double>::infinity() : 10.0 * std::log10(1.0 / mse);
    }
    return out;
}

std::string psnr_table(const std::vector<uint32_t>& indices, const std::vector<double>& db) {
    std::string out = "index\tpsnr_db\n";
    double sum = 0.0;
    for (size_t i = 0; i < db.size(); ++i) {
        const double capped = std::min(db[i], 99.0);
        sum += capped;
        char line[64];
        std::snprintf(line, sizeof(line), "%u\t%.2f\n", indices[i], capped);
        out += line;
    }
    if (!db.empty()) {
        char line[64];
        std::snprintf(line, sizeof(line), "mean\t%.2f\n", sum / static_cast<double>(db.size()));
        out += line;
    }
    return out;
}

DiversityReport diversity_report(const Tensor& images, const Dataset* train) {
    const int n = images.dim(0);
    if (n < 2) throw ConfigError("diversity report needs >= 2 images");
    const size_t img = images.numel() / static_cast<size_t>(n);
    DiversityReport rep;
    rep.min_pairwise = std::numeric_limits<double>::max();
    double sum = 0.0;
    size_t pairs = 0;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            const float* a = images.data() + i * img;
            const float* b = images.data() + j * img;
            double d2 = 0.0;
            for (size_t t = 0; t < img; ++t) {
                const double d = static_cast<double>(a[t]) - static_cast<double>(b[t]);
                d2 += d * d;
            }
            const double d = std::sqrt(d2);
            rep.min_pairwise = std::min(rep.min_pairwise, d);
            sum += d;
            ++pairs;
        }
    rep.mean_pairwise = sum / static_cast<double>(pairs);

    if (train && train->size() > 0) {
        if (train->image_size() != img) throw ConfigError("diversity: training image size mismatch");
        rep.nearest_train.resize(n);
#pragma omp parallel for
        for (int i = 0; i < n; ++i) {
            const float* a = images.data() + i * img;
            double best = std::numeric_limits<double>::max();
            int64_t best_j = -1;
            for (size_t j = 0; j < train->size(); ++j) {
                const float* b = train->image(j);
                double d2 = 0.0;
                for (size_t t = 0; t < img; ++t) {
                    const double d = static_cast<double>(a[t]) - static_cast<double>(b[t]);
                    d2 += d * d;
                }
                if (d2 < best) {
                    best = d2;
                    best_j = static_cast<int64_t>(j);
                }
            }
            rep.nearest_train[i] = {best_j, std::sqrt(best)};
        }
    }
    return rep;
}

std::string diversity_text(const DiversityReport& rep) {
    char head[128];
    std::snprintf(head, sizeof(head), "# min_pairwise_l2 %.6g\n# mean_pairwise_l2 %.6g\n",
                  rep.min_pairwise, rep.mean_pairwise);
    std::string out = head;
    for (size_t i = 0; i < rep.nearest_train.size(); ++i) {
        char line[96];
        std::snprintf(line, sizeof(line), "%zu\t%lld\t%.6g\n", i,
                      static_cast<long long>(rep.nearest_train[i].first),
                      rep.nearest_train[i].second);
        out += line;
    }
    return out;
}

}  // namespace da
