#pragma once

#include <string>
#include <vector>

#include "da/codebook.hpp"
#include "da/dataset.hpp"
#include "da/train.hpp"

namespace da {

struct SampleRequest {
    int count = 16;
    uint64_t seed = 0;
    std::vector<double> cluster_weights;  // empty = training occupancy
    bool use_ema = true;
};

// Novel images from fresh dropout patterns, r = 0, eval mode. Deterministic
// for a fixed (checkpoint, request).
Tensor generate(const CheckpointData& ckpt, const SampleRequest& req);

// Forward the stored training pattern z_i of each index (r = 0, eval mode).
Tensor reconstruct(const CheckpointData& ckpt, const Codebook& cb,
                   const std::vector<uint32_t>& indices, bool use_ema = true);

// Per-image 10*log10(1/mse); +inf when mse == 0.
std::vector<double> psnr(const Tensor& a, const Tensor& b);
// Rendered table; infinite values capped at 99 dB.
std::string psnr_table(const std::vector<uint32_t>& indices, const std::vector<double>& db);

struct DiversityReport {
    double min_pairwise = 0.0;
    double mean_pairwise = 0.0;
    std::vector<std::pair<int64_t, double>> nearest_train;  // (train index, L2) per sample
};

// Exact pairwise L2 stats, plus brute-force nearest-training-neighbor when a
// training set is supplied.
DiversityReport diversity_report(const Tensor& images, const Dataset* train = nullptr);
std::string diversity_text(const DiversityReport& rep);

}  // namespace da
