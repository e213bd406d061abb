#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <map>

#include "da/clustering.hpp"

using namespace da;
namespace fs = std::filesystem;

namespace {

// Two well-separated gaussian blobs; returns the generating labels.
std::pair<Dataset, std::vector<int>> two_blobs(size_t per_blob, uint64_t seed) {
    Dataset ds;
    ds.source = DataSource::synthetic;
    ds.h = 2;
    ds.w = 2;  // dim 12
    const size_t dim = ds.image_size();
    const double offset = 1.0 / std::sqrt(static_cast<double>(dim));  // centers L2 distance 1.0
    Pcg32 rng(seed);
    std::vector<int> labels;
    for (size_t i = 0; i < 2 * per_blob; ++i) {
        const int lab = i < per_blob ? 0 : 1;
        labels.push_back(lab);
        for (size_t j = 0; j < dim; ++j) {
            double v = 0.3 + lab * offset + rng.next_gauss() * 0.01;
            ds.pixels.push_back(static_cast<float>(v));
        }
    }
    return {ds, labels};
}

double adjusted_rand_index(const std::vector<int>& a, const std::vector<uint16_t>& b) {
    REQUIRE(a.size() == b.size());
    std::map<std::pair<int, int>, long long> table;
    std::map<int, long long> rows;
    std::map<int, long long> cols;
    for (size_t i = 0; i < a.size(); ++i) {
        ++table[{a[i], b[i]}];
        ++rows[a[i]];
        ++cols[b[i]];
    }
    auto c2 = [](long long n) { return n * (n - 1) / 2.0; };
    double sum_table = 0, sum_rows = 0, sum_cols = 0;
    for (auto& [k, v] : table) sum_table += c2(v);
    for (auto& [k, v] : rows) sum_rows += c2(v);
    for (auto& [k, v] : cols) sum_cols += c2(v);
    const double total = c2(static_cast<long long>(a.size()));
    const double expected = sum_rows * sum_cols / total;
    const double max_index = 0.5 * (sum_rows + sum_cols);
    return (sum_table - expected) / (max_index - expected);
}

}  // namespace

TEST_CASE("kmeans recovers two separated blobs exactly") {
    auto [ds, labels] = two_blobs(100, 17);
    KmeansResult res = kmeans_fit(ds, 2, 4);
    CHECK(adjusted_rand_index(labels, res.assignments) == doctest::Approx(1.0));
    for (size_t i = 1; i < res.inertia_trace.size(); ++i)
        CHECK(res.inertia_trace[i] <= res.inertia_trace[i - 1] * (1.0 + 1e-9) + 1e-12);
}

TEST_CASE("kmeans k=1 centroid is the dataset mean") {
    Dataset ds = synth_dataset(50, 23, 4, 4);
    KmeansResult res = kmeans_fit(ds, 1, 0);
    const size_t dim = ds.image_size();
    for (size_t j = 0; j < dim; ++j) {
        double mean = 0;
        for (size_t i = 0; i < ds.size(); ++i) mean += ds.image(i)[j];
        mean /= static_cast<double>(ds.size());
        CHECK(std::abs(res.model.centroids[j] - mean) < 1e-6);
    }
}

TEST_CASE("kmeans k=N drives inertia to zero") {
    Dataset ds = synth_dataset(12, 31, 4, 4);
    KmeansResult res = kmeans_fit(ds, 12, 5);
    CHECK(res.model.inertia == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("kmeans argument validation") {
    Dataset ds = synth_dataset(5, 1, 4, 4);
    CHECK_THROWS_AS(kmeans_fit(ds, 6, 0), ClusterConfigError);
    CHECK_THROWS_AS(kmeans_fit(ds, 0, 0), ClusterConfigError);
}

TEST_CASE("kmeans determinism") {
    Dataset ds = synth_dataset(60, 8, 4, 4);
    KmeansResult a = kmeans_fit(ds, 4, 9);
    KmeansResult b = kmeans_fit(ds, 4, 9);
    CHECK(a.assignments == b.assignments);
    CHECK(a.model.centroids == b.model.centroids);
}

TEST_CASE("kmeans_predict picks nearest, ties to lowest id") {
    ClusterModel m;
    m.k = 5;
    m.dim = 2;
    m.centroids = {0, 0, /*1:*/ 2, 0, /*2:*/ 9, 9, /*3:*/ 5, 5, /*4:*/ 4, 0};
    float at3[2] = {5, 5};
    CHECK(kmeans_predict(m, at3, 2) == 3);
    float mid14[2] = {3, 0};  // equidistant between centroids 1 and 4
    CHECK(kmeans_predict(m, mid14, 2) == 1);
    float bad[3] = {0, 0, 0};
    CHECK_THROWS_AS(kmeans_predict(m, bad, 3), ClusterConfigError);
}

TEST_CASE("blob test point lands in its blob") {
    auto [ds, labels] = two_blobs(50, 3);
    KmeansResult res = kmeans_fit(ds, 2, 1);
    // a fresh point near blob 1's center
    std::vector<float> x(ds.image_size());
    const float offset = 1.0f / std::sqrt(static_cast<float>(ds.image_size()));
    for (auto& v : x) v = 0.3f + offset;
    uint32_t pred = kmeans_predict(res.model, x.data(), x.size());
    // the cluster that holds the majority of generating label 1
    int count1 = 0;
    for (size_t i = 50; i < 100; ++i) count1 += res.assignments[i] == pred;
    CHECK(count1 == 50);
}

TEST_CASE("cluster file round trip and corruption") {
    auto [ds, labels] = two_blobs(20, 2);
    KmeansResult res = kmeans_fit(ds, 2, 0);
    std::string path = (fs::temp_directory_path() / "clusters.dacl").string();
    save_clusters(res.model, res.assignments, path);
    auto [model, assign] = load_clusters(path);
    CHECK(model.k == 2);
    CHECK(model.dim == res.model.dim);
    CHECK(model.centroids == res.model.centroids);
    CHECK(assign == res.assignments);

    fs::resize_file(path, fs::file_size(path) - 3);
    CHECK_THROWS_AS(load_clusters(path), ClusterFileError);
    std::ofstream(path, std::ios::binary) << "WHAT";
    CHECK_THROWS_AS(load_clusters(path), ClusterFileError);
    fs::remove(path);
}
