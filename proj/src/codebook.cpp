#include "da/codebook.hpp"

#include <algorithm>
#include <unordered_set>

#include "da/binio.hpp"

namespace da {

void CodebookSpec::validate() const {
    if (layers.empty()) throw ConfigError("codebook spec needs at least one layer");
    for (const auto& l : layers) {
        if (l.n_channels == 0) throw ConfigError("layer n_channels must be positive");
        if (l.k_active > l.n_channels) throw ConfigError("layer k_active exceeds n_channels");
    }
    if (n_clusters == 0) throw ConfigError("n_clusters must be >= 1");
    if (n_clusters > 1) {
        if (n_clusters > layers[0].n_channels)
            throw ConfigError("n_clusters exceeds first-layer channel count");
        if (layers[0].k_active == 0)
            throw ConfigError("cluster encoding needs k_active >= 1 in the first layer");
    }
}

CodebookSpec CodebookSpec::defaults(uint64_t seed, uint32_t n_clusters) {
    CodebookSpec s;
    s.layers = {{128, 1}, {256, 4}, {512, 16}};
    s.n_clusters = n_clusters;
    s.seed = seed;
    return s;
}

uint64_t DropoutPattern::hash() const {
    uint64_t h = 0xcbf29ce484222325ull;
    for (const auto& layer : per_layer) {
        h = fnv1a(layer.data(), layer.size() * sizeof(uint32_t), h);
        h ^= 0x9e3779b97f4a7c15ull;
        h *= 0x100000001b3ull;
    }
    return h;
}

std::vector<double> Codebook::cluster_occupancy() const {
    if (!spec.clustered() || cluster_of.empty()) return {};
    std::vector<double> w(spec.n_clusters, 0.0);
    for (uint16_t c : cluster_of) w[c] += 1.0;
    for (double& v : w) v /= static_cast<double>(cluster_of.size());
    return w;
}

BigUint capacity(const CodebookSpec& spec) {
    spec.validate();
    BigUint cap(1);
    for (size_t l = 0; l < spec.layers.size(); ++l) {
        const auto& ls = spec.layers[l];
        BigUint factor;
        if (l == 0 && spec.clustered()) {
            factor = binomial(ls.n_channels - spec.n_clusters, ls.k_active - 1);
            factor.mul_small(spec.n_clusters);
        } else {
            factor = binomial(ls.n_channels, ls.k_active);
        }
        cap = cap.mul(factor);
    }
    return cap;
}

std::vector<uint32_t> unrank_subset(uint32_t n, uint32_t k, const BigUint& rank) {
    BigUint total = binomial(n, k);
    if (!(rank < total))
        throw RankOutOfRange("rank " + rank.to_string() + " >= C(" + std::to_string(n) + "," +
                             std::to_string(k) + ")");
    std::vector<uint32_t> out;
    out.reserve(k);
    if (k == 0) return out;

    BigUint r = rank;
    uint32_t m = n;       // candidates remaining, channels n-m .. n-1
    uint32_t kk = k;      // slots remaining
    BigUint cnt = binomial(m - 1, kk - 1);  // subsets whose lowest element is the current candidate
    while (kk > 0) {
        uint32_t cur = n - m;
        if (r < cnt) {
            out.push_back(cur);
            --kk;
            if (kk > 0) {
                // C(m-2, kk-1) from C(m-1, kk); product is exactly divisible.
                cnt.mul_small(kk);
                cnt.div_small_exact(m - 1);
            }
        } else {
            r.sub(cnt);
            cnt.mul_small(m - kk);
            cnt.div_small_exact(m - 1);
        }
        --m;
    }
    return out;
}

BigUint rank_subset(uint32_t n, const std::vector<uint32_t>& indices) {
    for (size_t i = 0; i < indices.size(); ++i) {
        if (indices[i] >= n) throw InvalidSubset("index out of range");
        if (i > 0 && indices[i] <= indices[i - 1])
            throw InvalidSubset("indices must be strictly increasing");
    }
    uint32_t k = static_cast<uint32_t>(indices.size());
    BigUint r(0);
    if (k == 0) return r;

    uint32_t m = n;
    uint32_t kk = k;
    size_t next = 0;
    BigUint cnt = binomial(m - 1, kk - 1);
    while (kk > 0) {
        uint32_t cur = n - m;
        if (cur == indices[next]) {
            ++next;
            --kk;
            if (kk > 0) {
                cnt.mul_small(kk);
                cnt.div_small_exact(m - 1);
            }
        } else {
            r.add(cnt);
            cnt.mul_small(m - kk);
            cnt.div_small_exact(m - 1);
        }
        --m;
    }
    return r;
}

namespace {

std::string pattern_key(const DropoutPattern& p) {
    std::string key;
    for (const auto& layer : p.per_layer) {
        key.append(reinterpret_cast<const char*>(layer.data()), layer.size() * sizeof(uint32_t));
        key.push_back('|');
    }
    return key;
}

DropoutPattern draw_pattern(const CodebookSpec& spec, const std::vector<BigUint>& layer_counts,
                            int cluster, Pcg32& rng) {
    DropoutPattern p;
    p.per_layer.resize(spec.layers.size());
    for (size_t l = 0; l < spec.layers.size(); ++l) {
        const auto& ls = spec.layers[l];
        if (l == 0 && cluster >= 0) {
            auto& idxs = p.per_layer[0];
            idxs.push_back(static_cast<uint32_t>(cluster));
            if (ls.k_active > 1) {
                BigUint r = BigUint::random_below(layer_counts[0], rng);
                auto rest = unrank_subset(ls.n_channels - spec.n_clusters, ls.k_active - 1, r);
                for (uint32_t v : rest) idxs.push_back(v + spec.n_clusters);
            }
        } else {
            if (ls.k_active == 0) continue;
            BigUint r = BigUint::random_below(layer_counts[l], rng);
            p.per_layer[l] = unrank_subset(ls.n_channels, ls.k_active, r);
        }
    }
    return p;
}

std::vector<BigUint> per_layer_counts(const CodebookSpec& spec) {
    std::vector<BigUint> counts;
    counts.reserve(spec.layers.size());
    for (size_t l = 0; l < spec.layers.size(); ++l) {
        const auto& ls = spec.layers[l];
        if (l == 0 && spec.clustered())
            counts.push_back(binomial(ls.n_channels - spec.n_clusters, ls.k_active - 1));
        else
            counts.push_back(binomial(ls.n_channels, ls.k_active));
    }
    return counts;
}

}  // namespace

Codebook assign_patterns(uint64_t n_items, const CodebookSpec& spec,
                         const std::vector<uint16_t>* cluster_of) {
    spec.validate();
    if (spec.clustered()) {
        if (!cluster_of) throw ConfigError("clustered spec requires cluster ids");
        if (cluster_of->size() != n_items) throw ConfigError("cluster_of length != n_items");
        for (uint16_t c : *cluster_of)
            if (c >= spec.n_clusters) throw ConfigError("cluster id out of range");
    }
    if (capacity(spec) < BigUint(n_items))
        throw CapacityExceeded(std::to_string(n_items) + " items exceed capacity " +
                               capacity(spec).to_string());

    Codebook cb;
    cb.spec = spec;
    cb.patterns.reserve(n_items);
    if (cluster_of) cb.cluster_of = *cluster_of;

    auto counts = per_layer_counts(spec);
    Pcg32 rng(spec.seed);
    std::unordered_set<std::string> seen;
    seen.reserve(n_items * 2);
    for (uint64_t i = 0; i < n_items; ++i) {
        int cluster = spec.clustered() ? static_cast<int>((*cluster_of)[i]) : -1;
        for (;;) {
            DropoutPattern p = draw_pattern(spec, counts, cluster, rng);
            if (seen.insert(pattern_key(p)).second) {
                cb.patterns.push_back(std::move(p));
                break;
            }
            ++cb.retries;
        }
    }
    return cb;
}

DropoutPattern sample_novel_pattern(const CodebookSpec& spec,
                                    const std::vector<double>* cluster_weights, Pcg32& rng) {
    spec.validate();
    int cluster = -1;
    if (spec.clustered()) {
        if (cluster_weights) {
            if (cluster_weights->size() != spec.n_clusters)
                throw ConfigError("cluster_weights size != n_clusters");
            double total = 0.0;
            for (double w : *cluster_weights) {
                if (w < 0.0) throw ConfigError("cluster weights must be nonnegative");
                total += w;
            }
            if (total <= 0.0) throw ConfigError("cluster weights sum to zero");
            double u = rng.next_double() * total;
            double acc = 0.0;
            cluster = static_cast<int>(spec.n_clusters) - 1;
            for (uint32_t c = 0; c < spec.n_clusters; ++c) {
                acc += (*cluster_weights)[c];
                if (u < acc) {
                    cluster = static_cast<int>(c);
                    break;
                }
            }
        } else {
            cluster = static_cast<int>(rng.below(spec.n_clusters));
        }
    }
    auto counts = per_layer_counts(spec);
    return draw_pattern(spec, counts, cluster, rng);
}

void save_codebook(const Codebook& cb, const std::string& path) {
    auto os = open_out<CodebookFormatError>(path);
    os.write("DACB", 4);
    write_le<uint16_t>(os, 1);
    write_le<uint64_t>(os, cb.spec.seed);
    write_le<uint16_t>(os, static_cast<uint16_t>(cb.spec.layers.size()));
    for (const auto& l : cb.spec.layers) {
        write_le<uint32_t>(os, l.n_channels);
        write_le<uint32_t>(os, l.k_active);
    }
    write_le<uint32_t>(os, cb.spec.n_clusters);
    write_le<uint64_t>(os, cb.patterns.size());
    write_le<uint8_t>(os, cb.cluster_of.empty() ? 0 : 1);
    for (const auto& p : cb.patterns)
        for (const auto& layer : p.per_layer)
            for (uint32_t idx : layer) write_le<uint32_t>(os, idx);
    for (uint16_t c : cb.cluster_of) write_le<uint16_t>(os, c);
    if (!os) throw CodebookFormatError("write failed: " + path);
}

Codebook load_codebook(const std::string& path) {
    using E = CodebookFormatError;
    auto is = open_in<E>(path);
    expect_magic<E>(is, "DACB", path);
    uint16_t version = read_le<uint16_t, E>(is, "version");
    if (version != 1) throw E("unsupported version " + std::to_string(version));

    Codebook cb;
    cb.spec.seed = read_le<uint64_t, E>(is, "seed");
    uint16_t n_layers = read_le<uint16_t, E>(is, "layer count");
    if (n_layers == 0) throw E("zero layers");
    cb.spec.layers.resize(n_layers);
    for (auto& l : cb.spec.layers) {
        l.n_channels = read_le<uint32_t, E>(is, "n_channels");
        l.k_active = read_le<uint32_t, E>(is, "k_active");
        if (l.k_active > l.n_channels) throw E("k_active > n_channels");
    }
    cb.spec.n_clusters = read_le<uint32_t, E>(is, "n_clusters");
    uint64_t n = read_le<uint64_t, E>(is, "pattern count");
    uint8_t flags = read_le<uint8_t, E>(is, "flags");

    cb.patterns.resize(n);
    for (auto& p : cb.patterns) {
        p.per_layer.resize(n_layers);
        for (uint16_t l = 0; l < n_layers; ++l) {
            auto& layer = p.per_layer[l];
            layer.resize(cb.spec.layers[l].k_active);
            for (size_t j = 0; j < layer.size(); ++j) {
                layer[j] = read_le<uint32_t, E>(is, "pattern index");
                if (layer[j] >= cb.spec.layers[l].n_channels) throw E("channel index out of range");
                if (j > 0 && layer[j] <= layer[j - 1]) throw E("indices not strictly increasing");
            }
        }
    }
    if (flags & 1) {
        cb.cluster_of.resize(n);
        for (auto& c : cb.cluster_of) c = read_le<uint16_t, E>(is, "cluster id");
    }
    is.peek();
    if (!is.eof()) throw E("trailing bytes in " + path);
    return cb;
}

}  // namespace da
