#include "da/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "da/binio.hpp"

namespace da {

namespace {

double sq_dist(const float* a, const float* b, size_t dim) {
    double acc = 0.0;
    for (size_t i = 0; i < dim; ++i) {
        const double d = static_cast<double>(a[i]) - static_cast<double>(b[i]);
        acc += d * d;
    }
    return acc;
}

}  // namespace

KmeansResult kmeans_fit(const Dataset& ds, uint32_t k, uint64_t seed, int max_iters, double tol) {
    const size_t n = ds.size();
    const size_t dim = ds.image_size();
    if (k < 1) throw ClusterConfigError("k must be >= 1");
    if (k > n) throw ClusterConfigError("k > number of points");

    KmeansResult res;
    res.model.k = k;
    res.model.dim = static_cast<uint32_t>(dim);
    res.model.seed = seed;
    res.model.centroids.resize(static_cast<size_t>(k) * dim);
    res.assignments.assign(n, 0);

    Pcg32 rng(mix_seed(seed, 0xC1u));
    auto* cent = res.model.centroids.data();

    // k-means++ seeding
    std::vector<double> d2(n, std::numeric_limits<double>::max());
    {
        size_t first = rng.below(static_cast<uint32_t>(n));
        std::copy(ds.image(first), ds.image(first) + dim, cent);
        for (uint32_t c = 1; c < k; ++c) {
            const float* prev = cent + static_cast<size_t>(c - 1) * dim;
#pragma omp parallel for
            for (long long i = 0; i < static_cast<long long>(n); ++i)
                d2[i] = std::min(d2[i], sq_dist(ds.image(i), prev, dim));
            // serial reduction keeps the draw independent of thread count
            double total = 0.0;
            for (size_t i = 0; i < n; ++i) total += d2[i];
            size_t pick;
            if (total <= 0.0) {
                pick = rng.below(static_cast<uint32_t>(n));
            } else {
                double u = rng.next_double() * total;
                double acc = 0.0;
                pick = n - 1;
                for (size_t i = 0; i < n; ++i) {
                    acc += d2[i];
                    if (u < acc) {
                        pick = i;
                        break;
                    }
                }
            }
            std::copy(ds.image(pick), ds.image(pick) + dim, cent + static_cast<size_t>(c) * dim);
        }
    }

    std::vector<double> sums(static_cast<size_t>(k) * dim);
    std::vector<size_t> counts(k);
    std::vector<float> prev_cent;
    double prev_inertia = std::numeric_limits<double>::max();
    for (int iter = 0; iter < max_iters; ++iter) {
        // assignment
        std::vector<double> min_d2(n);
#pragma omp parallel for
        for (long long i = 0; i < static_cast<long long>(n); ++i) {
            double best = std::numeric_limits<double>::max();
            uint32_t best_c = 0;
            for (uint32_t c = 0; c < k; ++c) {
                double d = sq_dist(ds.image(i), cent + static_cast<size_t>(c) * dim, dim);
                if (d < best) {
                    best = d;
                    best_c = c;
                }
            }
            res.assignments[i] = static_cast<uint16_t>(best_c);
            min_d2[i] = best;
        }
        double inertia = 0.0;
        for (size_t i = 0; i < n; ++i) inertia += min_d2[i];
        // Lloyd guarantees monotone inertia; allow only fp-roundoff slack.
        if (inertia > prev_inertia * (1.0 + 1e-9) + 1e-12)
            throw ClusterConfigError("inertia increased across iterations");
        prev_inertia = inertia;
        res.model.inertia = inertia;
        res.inertia_trace.push_back(inertia);
        res.iterations = iter + 1;

        // update
        std::fill(sums.begin(), sums.end(), 0.0);
        std::fill(counts.begin(), counts.end(), 0);
        for (size_t i = 0; i < n; ++i) {
            double* s = sums.data() + static_cast<size_t>(res.assignments[i]) * dim;
            const float* x = ds.image(i);
            for (size_t j = 0; j < dim; ++j) s[j] += x[j];
            ++counts[res.assignments[i]];
        }
        prev_cent.assign(res.model.centroids.begin(), res.model.centroids.end());
        std::vector<char> used(n, 0);
        for (uint32_t c = 0; c < k; ++c) {
            float* cc = cent + static_cast<size_t>(c) * dim;
            if (counts[c] == 0) {
                // re-seed to the farthest unused point
                size_t far = 0;
                double far_d = -1.0;
                for (size_t i = 0; i < n; ++i)
                    if (!used[i] && min_d2[i] > far_d) {
                        far_d = min_d2[i];
                        far = i;
                    }
                used[far] = 1;
                std::copy(ds.image(far), ds.image(far) + dim, cc);
            } else {
                const double* s = sums.data() + static_cast<size_t>(c) * dim;
                const double inv = 1.0 / static_cast<double>(counts[c]);
                for (size_t j = 0; j < dim; ++j) cc[j] = static_cast<float>(s[j] * inv);
            }
        }

        double shift = 0.0;
        for (size_t j = 0; j < res.model.centroids.size(); ++j) {
            const double d = static_cast<double>(res.model.centroids[j]) - prev_cent[j];
            shift += d * d;
        }
        if (std::sqrt(shift) < tol) break;
    }

    // final assignment against the converged centroids
    std::vector<double> min_d2(n);
#pragma omp parallel for
    for (long long i = 0; i < static_cast<long long>(n); ++i) {
        double best = std::numeric_limits<double>::max();
        uint32_t best_c = 0;
        for (uint32_t c = 0; c < k; ++c) {
            double d = sq_dist(ds.image(i), cent + static_cast<size_t>(c) * dim, dim);
            if (d < best) {
                best = d;
                best_c = c;
            }
        }
        res.assignments[i] = static_cast<uint16_t>(best_c);
        min_d2[i] = best;
    }
    double inertia = 0.0;
    for (size_t i = 0; i < n; ++i) inertia += min_d2[i];
    res.model.inertia = inertia;
    res.inertia_trace.push_back(inertia);
    return res;
}

uint32_t kmeans_predict(const ClusterModel& model, const float* x, size_t dim) {
    if (dim != model.dim) throw ClusterConfigError("feature dim mismatch");
    double best = std::numeric_limits<double>::max();
    uint32_t best_c = 0;
    for (uint32_t c = 0; c < model.k; ++c) {
        double d = sq_dist(x, model.centroid(c), dim);
        if (d < best) {
            best = d;
            best_c = c;
        }
    }
    return best_c;
}

void save_clusters(const ClusterModel& model, const std::vector<uint16_t>& assignments,
                   const std::string& path) {
    auto os = open_out<ClusterFileError>(path);
    os.write("DACL", 4);
    write_le<uint32_t>(os, model.k);
    write_le<uint32_t>(os, model.dim);
    write_le<uint64_t>(os, assignments.size());
    os.write(reinterpret_cast<const char*>(model.centroids.data()),
             static_cast<std::streamsize>(model.centroids.size() * sizeof(float)));
    for (uint16_t a : assignments) write_le<uint16_t>(os, a);
    if (!os) throw ClusterFileError("write failed: " + path);
}

std::pair<ClusterModel, std::vector<uint16_t>> load_clusters(const std::string& path) {
    using E = ClusterFileError;
    auto is = open_in<E>(path);
    expect_magic<E>(is, "DACL", path);
    ClusterModel m;
    m.k = read_le<uint32_t, E>(is, "k");
    m.dim = read_le<uint32_t, E>(is, "dim");
    if (m.k == 0) throw E("k must be >= 1");
    uint64_t n = read_le<uint64_t, E>(is, "item count");
    m.centroids.resize(static_cast<size_t>(m.k) * m.dim);
    read_bytes<E>(is, m.centroids.data(), m.centroids.size() * sizeof(float), "centroids");
    std::vector<uint16_t> assignments(n);
    for (auto& a : assignments) {
        a = read_le<uint16_t, E>(is, "assignment");
        if (a >= m.k) throw E("assignment id >= k");
    }
    is.peek();
    if (!is.eof()) throw E("trailing bytes in " + path);
    return {std::move(m), std::move(assignments)};
}

}  // namespace da
