#include "doctest.h"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>

#include "da/codebook.hpp"

using namespace da;
namespace fs = std::filesystem;

namespace {

// Independent oracle: every k-subset of {0..n-1} in lexicographic order,
// generated by plain successor stepping.
std::vector<std::vector<uint32_t>> all_subsets_lex(uint32_t n, uint32_t k) {
    std::vector<std::vector<uint32_t>> out;
    if (k > n) return out;
    std::vector<uint32_t> cur(k);
    for (uint32_t i = 0; i < k; ++i) cur[i] = i;
    for (;;) {
        out.push_back(cur);
        if (k == 0) break;
        int i = static_cast<int>(k) - 1;
        while (i >= 0 && cur[i] == n - k + i) --i;
        if (i < 0) break;
        ++cur[i];
        for (uint32_t j = i + 1; j < k; ++j) cur[j] = cur[j - 1] + 1;
    }
    return out;
}

std::string temp_path(const char* name) {
    return (fs::temp_directory_path() / name).string();
}

}  // namespace

TEST_CASE("unrank matches lexicographic enumeration") {
    CHECK(unrank_subset(5, 2, BigUint(0)) == std::vector<uint32_t>{0, 1});
    CHECK(unrank_subset(5, 2, BigUint(9)) == std::vector<uint32_t>{3, 4});
    BigUint last = binomial(8, 3);
    last.sub(BigUint(1));
    CHECK(unrank_subset(8, 3, last) == std::vector<uint32_t>{5, 6, 7});

    auto oracle = all_subsets_lex(6, 3);
    for (size_t r = 0; r < oracle.size(); ++r)
        CHECK(unrank_subset(6, 3, BigUint(r)) == oracle[r]);
}

TEST_CASE("rank is the inverse and matches enumeration position") {
    CHECK(rank_subset(5, {0, 1}).as_u64() == 0);
    CHECK(rank_subset(5, {3, 4}).as_u64() == 9);

    auto oracle = all_subsets_lex(6, 3);
    auto it = std::find(oracle.begin(), oracle.end(), std::vector<uint32_t>{0, 2, 5});
    REQUIRE(it != oracle.end());
    CHECK(rank_subset(6, {0, 2, 5}).as_u64() ==
          static_cast<uint64_t>(it - oracle.begin()));
}

TEST_CASE("rank/unrank bijection, exhaustive on small shapes") {
    for (auto [n, k] : {std::pair<uint32_t, uint32_t>{5, 2}, {6, 3}, {8, 3}, {10, 4}}) {
        auto oracle = all_subsets_lex(n, k);
        std::vector<uint32_t> prev;
        for (size_t r = 0; r < oracle.size(); ++r) {
            auto subset = unrank_subset(n, k, BigUint(r));
            CHECK(subset == oracle[r]);
            CHECK(rank_subset(n, subset).as_u64() == r);
            if (r > 0) CHECK(std::lexicographical_compare(prev.begin(), prev.end(),
                                                          subset.begin(), subset.end()));
            prev = subset;
        }
    }
}

TEST_CASE("rank/unrank degenerate and error cases") {
    CHECK(unrank_subset(7, 0, BigUint(0)).empty());
    CHECK(rank_subset(7, {}).is_zero());
    CHECK(unrank_subset(4, 4, BigUint(0)) == std::vector<uint32_t>{0, 1, 2, 3});
    CHECK_THROWS_AS(unrank_subset(5, 2, BigUint(10)), RankOutOfRange);
    CHECK_THROWS_AS(unrank_subset(3, 5, BigUint(0)), RankOutOfRange);
    CHECK_THROWS_AS(rank_subset(5, {1, 1}), InvalidSubset);
    CHECK_THROWS_AS(rank_subset(5, {2, 1}), InvalidSubset);
    CHECK_THROWS_AS(rank_subset(5, {1, 5}), InvalidSubset);
}

TEST_CASE("capacity") {
    CodebookSpec one;
    one.layers = {{7, 0}};
    CHECK(capacity(one).to_string() == "1");

    CodebookSpec small;
    small.layers = {{5, 2}};
    CHECK(capacity(small).as_u64() == 10);

    auto stock = CodebookSpec::defaults();
    std::string cap = capacity(stock).to_string();
    CHECK(cap.size() == 41);
    CHECK(cap.substr(0, 3) == "188");  // value / 10^40 in [1.88, 1.89)

    // clustered: first-layer factor becomes c * C(n0-c, k0-1)
    CodebookSpec clustered;
    clustered.layers = {{6, 2}, {3, 1}};
    clustered.n_clusters = 2;
    // 2 * C(4,1) * C(3,1) = 24
    CHECK(capacity(clustered).as_u64() == 24);
}

TEST_CASE("assign_patterns determinism and distinctness") {
    CodebookSpec spec;
    spec.layers = {{4, 1}};
    spec.seed = 7;
    Codebook a = assign_patterns(3, spec);
    Codebook b = assign_patterns(3, spec);
    REQUIRE(a.size() == 3);
    std::set<std::vector<uint32_t>> uniq;
    for (size_t i = 0; i < 3; ++i) {
        CHECK(a.patterns[i].per_layer == b.patterns[i].per_layer);
        CHECK(a.patterns[i].per_layer[0].size() == 1);
        uniq.insert(a.patterns[i].per_layer[0]);
    }
    CHECK(uniq.size() == 3);
}

TEST_CASE("assign_patterns exceeding capacity") {
    CodebookSpec spec;
    spec.layers = {{4, 2}};  // capacity 6
    CHECK_THROWS_AS(assign_patterns(17, spec), CapacityExceeded);
    CHECK_NOTHROW(assign_patterns(6, spec));  // exactly full space
}

TEST_CASE("assign_patterns with clusters forces first layer") {
    CodebookSpec spec;
    spec.layers = {{8, 2}, {6, 2}};
    spec.n_clusters = 4;
    spec.seed = 11;
    std::vector<uint16_t> cluster_of = {0, 3, 1, 2, 3, 0, 1, 1};
    Codebook cb = assign_patterns(cluster_of.size(), spec, &cluster_of);
    for (size_t i = 0; i < cb.size(); ++i) {
        const auto& first = cb.patterns[i].per_layer[0];
        REQUIRE(first.size() == 2);
        CHECK(first[0] == cluster_of[i]);       // lowest active index = cluster id
        CHECK(first[1] >= spec.n_clusters);     // remainder drawn from channels >= c
    }
    auto occ = cb.cluster_occupancy();
    REQUIRE(occ.size() == 4);
    CHECK(occ[1] == doctest::Approx(3.0 / 8.0));
}

TEST_CASE("assign_patterns argument validation") {
    CodebookSpec spec;
    spec.layers = {{8, 1}};
    spec.n_clusters = 4;
    CHECK_THROWS_AS(assign_patterns(4, spec), ConfigError);  // ids required
    std::vector<uint16_t> bad = {0, 1, 9, 2};
    CHECK_THROWS_AS(assign_patterns(4, spec, &bad), ConfigError);
}

TEST_CASE("sample_novel_pattern") {
    Pcg32 rng(42);
    CodebookSpec full;
    full.layers = {{5, 5}};
    for (int i = 0; i < 8; ++i)
        CHECK(sample_novel_pattern(full, nullptr, rng).per_layer[0] ==
              std::vector<uint32_t>{0, 1, 2, 3, 4});

    CodebookSpec coin;
    coin.layers = {{2, 1}};
    int zeros = 0;
    const int draws = 10000;
    for (int i = 0; i < draws; ++i)
        zeros += sample_novel_pattern(coin, nullptr, rng).per_layer[0][0] == 0;
    double freq = static_cast<double>(zeros) / draws;
    CHECK(freq > 0.47);
    CHECK(freq < 0.53);

    auto stock = CodebookSpec::defaults(0, 32);
    std::vector<double> degenerate(32, 0.0);
    degenerate[5] = 1.0;
    for (int i = 0; i < 16; ++i) {
        auto p = sample_novel_pattern(stock, &degenerate, rng);
        REQUIRE(p.per_layer[0].size() == 1);
        CHECK(p.per_layer[0][0] == 5);
        CHECK(p.per_layer[1].size() == 4);
        CHECK(p.per_layer[2].size() == 16);
    }

    std::vector<double> zero_w(32, 0.0);
    CHECK_THROWS_AS(sample_novel_pattern(stock, &zero_w, rng), ConfigError);
}

TEST_CASE("codebook save/load round trip") {
    auto spec = CodebookSpec::defaults(123, 4);
    std::vector<uint16_t> cluster_of(8);
    for (size_t i = 0; i < 8; ++i) cluster_of[i] = static_cast<uint16_t>(i % 4);
    Codebook cb = assign_patterns(8, spec, &cluster_of);
    std::string path = temp_path("cb_roundtrip.dacb");
    save_codebook(cb, path);
    Codebook loaded = load_codebook(path);
    CHECK(loaded.spec.seed == cb.spec.seed);
    CHECK(loaded.spec.n_clusters == cb.spec.n_clusters);
    REQUIRE(loaded.size() == cb.size());
    for (size_t i = 0; i < cb.size(); ++i) CHECK(loaded.patterns[i] == cb.patterns[i]);
    CHECK(loaded.cluster_of == cb.cluster_of);
    fs::remove(path);
}

TEST_CASE("codebook deterministic file bytes") {
    auto spec = CodebookSpec::defaults(9);
    Codebook a = assign_patterns(16, spec);
    Codebook b = assign_patterns(16, spec);
    std::string pa = temp_path("cb_det_a.dacb"), pb = temp_path("cb_det_b.dacb");
    save_codebook(a, pa);
    save_codebook(b, pb);
    CHECK(fnv1a_file(pa) == fnv1a_file(pb));
    fs::remove(pa);
    fs::remove(pb);
}

TEST_CASE("codebook load rejects corrupt files") {
    auto spec = CodebookSpec::defaults(5);
    Codebook cb = assign_patterns(4, spec);
    std::string path = temp_path("cb_corrupt.dacb");
    save_codebook(cb, path);

    // truncation
    auto size = fs::file_size(path);
    fs::resize_file(path, size - 7);
    CHECK_THROWS_AS(load_codebook(path), CodebookFormatError);

    // k_active > n_channels in the header
    save_codebook(cb, path);
    std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
    // header: magic(4) version(2) seed(8) layer_count(2), then n(4) k(4)
    f.seekp(4 + 2 + 8 + 2 + 4);
    uint32_t bad_k = 10000;
    f.write(reinterpret_cast<const char*>(&bad_k), 4);
    f.close();
    CHECK_THROWS_AS(load_codebook(path), CodebookFormatError);

    // wrong magic
    std::ofstream(path, std::ios::binary) << "NOPE";
    CHECK_THROWS_AS(load_codebook(path), CodebookFormatError);
    fs::remove(path);
}
