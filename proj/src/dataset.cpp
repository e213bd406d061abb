#include "da/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>

#include "da/binio.hpp"

namespace fs = std::filesystem;

namespace da {

namespace {
constexpr size_t kCifarRecord = 3073;
constexpr size_t kCifarPixels = 3072;
}  // namespace

Tensor Dataset::gather(const std::vector<uint32_t>& indices) const {
    Tensor out({static_cast<int>(indices.size()), 3, h, w});
    const size_t sz = image_size();
    for (size_t i = 0; i < indices.size(); ++i)
        std::copy(image(indices[i]), image(indices[i]) + sz, out.data() + i * sz);
    return out;
}

uint64_t Dataset::content_hash() const {
    uint64_t hash = fnv1a(pixels.data(), pixels.size() * sizeof(float));
    return fnv1a(labels.data(), labels.size(), hash);
}

static void load_cifar_records(const std::string& path, Dataset& ds) {
    std::error_code ec;
    auto fsize = fs::file_size(path, ec);
    if (ec) throw DatasetNotFound(path);
    if (fsize == 0 || fsize % kCifarRecord != 0)
        throw DatasetFormatError(path + ": size " + std::to_string(fsize) +
                                 " not a multiple of 3073");
    auto is = open_in<DatasetNotFound>(path);
    const size_t n_records = fsize / kCifarRecord;
    std::vector<uint8_t> record(kCifarRecord);
    ds.pixels.reserve(ds.pixels.size() + n_records * kCifarPixels);
    for (size_t r = 0; r < n_records; ++r) {
        read_bytes<DatasetFormatError>(is, record.data(), kCifarRecord, "cifar record");
        if (record[0] > 9)
            throw DatasetFormatError(path + ": label byte " + std::to_string(record[0]) + " > 9");
        ds.labels.push_back(record[0]);
        for (size_t i = 0; i < kCifarPixels; ++i)
            ds.pixels.push_back(static_cast<float>(record[1 + i]) / 255.0f);
    }
}

Dataset load_cifar10(const std::string& dir) {
    Dataset ds;
    ds.source = DataSource::cifar10;
    for (int b = 1; b <= 5; ++b) {
        fs::path p = fs::path(dir) / ("data_batch_" + std::to_string(b) + ".bin");
        if (!fs::exists(p)) throw DatasetNotFound(p.string());
        load_cifar_records(p.string(), ds);
    }
    return ds;
}

Dataset load_cifar10_file(const std::string& path) {
    if (!fs::exists(path)) throw DatasetNotFound(path);
    Dataset ds;
    ds.source = DataSource::cifar10;
    load_cifar_records(path, ds);
    return ds;
}

void write_cifar10_file(const std::string& path, const Dataset& ds) {
    if (ds.h != 32 || ds.w != 32) throw DatasetFormatError("cifar records are 32x32");
    auto os = open_out<DatasetFormatError>(path);
    const size_t sz = ds.image_size();
    for (size_t i = 0; i < ds.size(); ++i) {
        uint8_t label = i < ds.labels.size() ? ds.labels[i] : 0;
        os.put(static_cast<char>(label));
        const float* img = ds.image(i);
        for (size_t j = 0; j < sz; ++j) {
            float v = std::clamp(img[j], 0.0f, 1.0f);
            os.put(static_cast<char>(static_cast<uint8_t>(std::lround(v * 255.0f))));
        }
    }
    if (!os) throw DatasetFormatError("write failed: " + path);
}

std::vector<float> preprocess_celeba(const uint8_t* planar, int h, int w) {
    if (h != 218 || w != 178)
        throw DatasetFormatError("celeba frame must be 218x178, got " + std::to_string(h) + "x" +
                                 std::to_string(w));
    const int crop = 160, out_hw = 32, box = crop / out_hw;  // 5x5 pooling
    const int r0 = (h - crop) / 2, c0 = (w - crop) / 2;
    std::vector<float> out(3 * out_hw * out_hw);
    for (int ch = 0; ch < 3; ++ch) {
        const uint8_t* plane = planar + static_cast<size_t>(ch) * h * w;
        for (int i = 0; i < out_hw; ++i)
            for (int j = 0; j < out_hw; ++j) {
                uint32_t acc = 0;
                for (int bi = 0; bi < box; ++bi)
                    for (int bj = 0; bj < box; ++bj)
                        acc += plane[(r0 + i * box + bi) * w + (c0 + j * box + bj)];
                out[(ch * out_hw + i) * out_hw + j] =
                    static_cast<float>(acc) / static_cast<float>(box * box * 255);
            }
    }
    return out;
}

Dataset load_celeba_packed(const std::string& path) {
    using E = DatasetFormatError;
    if (!fs::exists(path)) throw DatasetNotFound(path);
    auto is = open_in<DatasetNotFound>(path);
    expect_magic<E>(is, "DAIM", path);
    uint32_t count = read_le<uint32_t, E>(is, "frame count");
    uint16_t h = read_le<uint16_t, E>(is, "height");
    uint16_t w = read_le<uint16_t, E>(is, "width");
    Dataset ds;
    ds.source = DataSource::celeba;
    const size_t frame_sz = static_cast<size_t>(3) * h * w;
    std::vector<uint8_t> frame(frame_sz);
    ds.pixels.reserve(static_cast<size_t>(count) * 3 * 32 * 32);
    for (uint32_t i = 0; i < count; ++i) {
        read_bytes<E>(is, frame.data(), frame_sz, "celeba frame");
        auto img = preprocess_celeba(frame.data(), h, w);
        ds.pixels.insert(ds.pixels.end(), img.begin(), img.end());
    }
    return ds;
}

void write_daim(const std::string& path, const std::vector<uint8_t>& planar, uint32_t count,
                uint16_t h, uint16_t w) {
    if (planar.size() != static_cast<size_t>(count) * 3 * h * w)
        throw DatasetFormatError("daim payload size mismatch");
    auto os = open_out<DatasetFormatError>(path);
    os.write("DAIM", 4);
    write_le<uint32_t>(os, count);
    write_le<uint16_t>(os, h);
    write_le<uint16_t>(os, w);
    os.write(reinterpret_cast<const char*>(planar.data()),
             static_cast<std::streamsize>(planar.size()));
    if (!os) throw DatasetFormatError("write failed: " + path);
}

Dataset synth_dataset(size_t n, uint64_t seed, int h, int w) {
    Dataset ds;
    ds.source = DataSource::synthetic;
    ds.h = h;
    ds.w = w;
    ds.pixels.resize(n * ds.image_size());
    Pcg32 rng(mix_seed(seed, 0xDA7A));
    for (size_t i = 0; i < n; ++i) {
        float* img = ds.pixels.data() + i * ds.image_size();
        float base[3], gradx[3], grady[3];
        for (int c = 0; c < 3; ++c) {
            base[c] = static_cast<float>(rng.next_double());
            gradx[c] = static_cast<float>(rng.next_double() - 0.5) * 0.6f;
            grady[c] = static_cast<float>(rng.next_double() - 0.5) * 0.6f;
        }
        const int n_blobs = rng.uniform_int(2, 4);
        std::vector<std::array<float, 6>> blobs;  // cx, cy, inv_2s2, amp[3]
        for (int bidx = 0; bidx < n_blobs; ++bidx) {
            float cx = static_cast<float>(rng.next_double()) * w;
            float cy = static_cast<float>(rng.next_double()) * h;
            float sigma = 2.0f + static_cast<float>(rng.next_double()) * 6.0f;
            std::array<float, 6> blob{cx, cy, 1.0f / (2.0f * sigma * sigma), 0, 0, 0};
            for (int c = 0; c < 3; ++c)
                blob[3 + c] = static_cast<float>(rng.next_double() * 1.4 - 0.7);
            blobs.push_back(blob);
        }
        for (int c = 0; c < 3; ++c)
            for (int y = 0; y < h; ++y)
                for (int x = 0; x < w; ++x) {
                    float v = base[c] + gradx[c] * (static_cast<float>(x) / w - 0.5f) +
                              grady[c] * (static_cast<float>(y) / h - 0.5f);
                    for (const auto& bl : blobs) {
                        float dx = static_cast<float>(x) - bl[0];
                        float dy = static_cast<float>(y) - bl[1];
                        v += bl[3 + c] * std::exp(-(dx * dx + dy * dy) * bl[2]);
                    }
                    img[(c * h + y) * w + x] = std::clamp(v, 0.0f, 1.0f);
                }
    }
    return ds;
}

std::vector<std::vector<uint32_t>> epoch_batches(size_t n, size_t batch_size, Pcg32& rng) {
    std::vector<uint32_t> perm(n);
    for (size_t i = 0; i < n; ++i) perm[i] = static_cast<uint32_t>(i);
    for (size_t i = n; i > 1; --i)
        std::swap(perm[i - 1], perm[rng.below(static_cast<uint32_t>(i))]);
    std::vector<std::vector<uint32_t>> batches;
    for (size_t start = 0; start < n; start += batch_size) {
        size_t end = std::min(n, start + batch_size);
        batches.emplace_back(perm.begin() + start, perm.begin() + end);
    }
    return batches;
}

}  // namespace da
