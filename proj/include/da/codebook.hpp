#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "da/bigint.hpp"
#include "da/common.hpp"
#include "da/rng.hpp"

namespace da {

// One channel-dropout layer: n_channels in the feature map, k_active of them
// kept per item.
struct LayerSpec {
    uint32_t n_channels = 0;
    uint32_t k_active = 0;
};

struct CodebookSpec {
    std::vector<LayerSpec> layers;
    uint32_t n_clusters = 1;  // 1 means unclustered
    uint64_t seed = 0;

    void validate() const;
    bool clustered() const { return n_clusters > 1; }
    // Stock configuration: layers (128,1)(256,4)(512,16).
    static CodebookSpec defaults(uint64_t seed = 0, uint32_t n_clusters = 1);
};

// Per-layer sorted active channel indices; the identity code of one item.
struct DropoutPattern {
    std::vector<std::vector<uint32_t>> per_layer;

    bool operator==(const DropoutPattern& o) const { return per_layer == o.per_layer; }
    uint64_t hash() const;
};

struct Codebook {
    CodebookSpec spec;
    std::vector<DropoutPattern> patterns;
    std::vector<uint16_t> cluster_of;  // empty when absent
    uint64_t retries = 0;              // collision re-draws during assignment

    size_t size() const { return patterns.size(); }
    // Cluster histogram normalized to weights; empty when unclustered.
    std::vector<double> cluster_occupancy() const;
};

// Number of expressible patterns, exact. With clustering the first-layer
// factor becomes n_clusters * C(n0 - c, k0 - 1) (admissible sets under the
// cluster-encoding rule).
BigUint capacity(const CodebookSpec& spec);

// rank-th k-subset of {0..n-1} in lexicographic order of sorted tuples.
std::vector<uint32_t> unrank_subset(uint32_t n, uint32_t k, const BigUint& rank);
BigUint rank_subset(uint32_t n, const std::vector<uint32_t>& indices);

// Deterministic unique-pattern assignment for n_items training points.
Codebook assign_patterns(uint64_t n_items, const CodebookSpec& spec,
                         const std::vector<uint16_t>* cluster_of = nullptr);

// Fresh pattern from the training distribution. cluster_weights, when given,
// selects the first-layer cluster id proportionally; callers default this to
// training-set occupancy.
DropoutPattern sample_novel_pattern(const CodebookSpec& spec,
                                    const std::vector<double>* cluster_weights, Pcg32& rng);

void save_codebook(const Codebook& cb, const std::string& path);
Codebook load_codebook(const std::string& path);

}  // namespace da
