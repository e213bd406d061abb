#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "da/tensor.hpp"

namespace da {

struct Rgb8Image {
    int h = 0, w = 0;
    std::vector<uint8_t> rgb;  // interleaved, row-major
};

// round(clamp(x,0,1)*255) quantization of one CHW float image.
Rgb8Image quantize_image(const float* chw, int h, int w);

void write_png(const std::string& path, const Rgb8Image& img);
Rgb8Image read_png(const std::string& path);

// (1,3,h,w) float batch from a PNG, values byte/255.
Tensor read_png_as_batch(const std::string& path);

// Zero-padded 000000.png ... files, one per batch image.
void export_for_fid(const Tensor& images, const std::string& dir);

// Single grid PNG of the whole batch, `cols` images per row.
void write_png_grid(const Tensor& images, const std::string& path, int cols);

}  // namespace da
