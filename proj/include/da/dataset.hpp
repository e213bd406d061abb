#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "da/common.hpp"
#include "da/rng.hpp"
#include "da/tensor.hpp"

namespace da {

enum class DataSource { cifar10, celeba, synthetic };

// Training images as float planes in [0,1], stored contiguously (N,3,h,w).
struct Dataset {
    DataSource source = DataSource::synthetic;
    int h = 32, w = 32;
    std::vector<float> pixels;
    std::vector<uint8_t> labels;  // empty when unlabeled

    size_t image_size() const { return static_cast<size_t>(3) * h * w; }
    size_t size() const { return image_size() ? pixels.size() / image_size() : 0; }
    const float* image(size_t i) const { return pixels.data() + i * image_size(); }

    // Batch tensor (b,3,h,w) for the given dataset indices.
    Tensor gather(const std::vector<uint32_t>& indices) const;
    uint64_t content_hash() const;
};

// Official CIFAR-10 binary batches: data_batch_1..5.bin, 3073-byte records
// (label byte, then 3072 bytes of R,G,B planes row-major).
Dataset load_cifar10(const std::string& dir);
// Single file in the same record format, any record count.
Dataset load_cifar10_file(const std::string& path);
void write_cifar10_file(const std::string& path, const Dataset& ds);

// Center 160x160 crop of a (3,218,178) frame, 5x box-average to 32x32.
std::vector<float> preprocess_celeba(const uint8_t* planar, int h, int w);

// Packed raw-image container "DAIM": u32 count, u16 h, u16 w, then
// count x 3 x h x w planar RGB bytes.
Dataset load_celeba_packed(const std::string& path);
void write_daim(const std::string& path, const std::vector<uint8_t>& planar, uint32_t count,
                uint16_t h, uint16_t w);

// Seeded smooth random images (blobs + gradients); stands in for natural
// data in toy runs and tests.
Dataset synth_dataset(size_t n, uint64_t seed, int h = 32, int w = 32);

// Horizontal shift by r pixels (positive = rightward), vacated columns
// zero-filled. T(x,0) is a bitwise copy.
template <class T>
TensorT<T> shift_transform(const TensorT<T>& x, int r, int max_shift = 8) {
    if (std::abs(r) > max_shift)
        throw ShiftOutOfRange("|" + std::to_string(r) + "| > " + std::to_string(max_shift));
    TensorT<T> y(x.shape);
    const int b = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
    for (int n = 0; n < b; ++n)
        for (int ch = 0; ch < c; ++ch)
            for (int i = 0; i < h; ++i) {
                const T* xr = &x.at4(n, ch, i, 0);
                T* yr = &y.at4(n, ch, i, 0);
                for (int j = 0; j < w; ++j) {
                    const int src = j - r;
                    yr[j] = (src >= 0 && src < w) ? xr[src] : T(0);
                }
            }
    return y;
}

// One epoch worth of batches: a seeded permutation of [0,n) chopped into
// batch_size chunks, the short tail kept.
std::vector<std::vector<uint32_t>> epoch_batches(size_t n, size_t batch_size, Pcg32& rng);

}  // namespace da
