#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "da/dataset.hpp"

namespace da {

struct ClusterModel {
    uint32_t k = 0;
    uint32_t dim = 0;
    std::vector<float> centroids;  // k * dim
    double inertia = 0.0;
    uint64_t seed = 0;

    const float* centroid(uint32_t c) const { return centroids.data() + static_cast<size_t>(c) * dim; }
};

struct KmeansResult {
    ClusterModel model;
    std::vector<uint16_t> assignments;
    int iterations = 0;
    std::vector<double> inertia_trace;  // inertia at each assignment step
};

// Lloyd's algorithm on flattened raw pixels, k-means++ seeding, empty
// clusters re-seeded to the farthest point. Deterministic given (ds, k, seed).
KmeansResult kmeans_fit(const Dataset& ds, uint32_t k, uint64_t seed, int max_iters = 100,
                        double tol = 1e-4);

uint32_t kmeans_predict(const ClusterModel& model, const float* x, size_t dim);

// "DACL" cluster file: u32 k, u32 dim, u64 n_items, f32 centroids,
// u16 assignment per item.
void save_clusters(const ClusterModel& model, const std::vector<uint16_t>& assignments,
                   const std::string& path);
std::pair<ClusterModel, std::vector<uint16_t>> load_clusters(const std::string& path);

}  // namespace da
