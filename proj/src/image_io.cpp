#include "da/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <memory>

#include "da/common.hpp"

namespace fs = std::filesystem;

namespace da {

Rgb8Image quantize_image(const float* chw, int h, int w) {
    Rgb8Image out;
    out.h = h;
    out.w = w;
    out.rgb.resize(static_cast<size_t>(3) * h * w);
    const size_t plane = static_cast<size_t>(h) * w;
    for (size_t i = 0; i < plane; ++i)
        for (int c = 0; c < 3; ++c) {
            float v = std::clamp(chw[c * plane + i], 0.0f, 1.0f);
            out.rgb[i * 3 + c] = static_cast<uint8_t>(std::lround(v * 255.0f));
        }
    return out;
}

namespace {

struct FileCloser {
    void operator()(FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<FILE, FileCloser>;

}  // namespace

void write_png(const std::string& path, const Rgb8Image& img) {
    FilePtr fp(std::fopen(path.c_str(), "wb"));
    if (!fp) throw Error(ErrorFamily::data, "cannot open for writing: " + path);
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_write_struct(&png, &info);
        throw Error(ErrorFamily::data, "libpng init failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw Error(ErrorFamily::data, "png write failed: " + path);
    }
    png_init_io(png, fp.get());
    png_set_compression_level(png, 6);  // pinned so re-exports are byte-identical
    png_set_IHDR(png, info, img.w, img.h, 8, PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    std::vector<png_bytep> rows(img.h);
    for (int i = 0; i < img.h; ++i)
        rows[i] = const_cast<png_bytep>(img.rgb.data() + static_cast<size_t>(i) * img.w * 3);
    png_write_image(png, rows.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

Rgb8Image read_png(const std::string& path) {
    FilePtr fp(std::fopen(path.c_str(), "rb"));
    if (!fp) throw Error(ErrorFamily::data, "cannot open: " + path);
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw Error(ErrorFamily::format, "libpng init failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw Error(ErrorFamily::format, "png read failed: " + path);
    }
    png_init_io(png, fp.get());
    png_read_info(png, info);
    png_set_expand(png);
    png_set_strip_16(png);
    png_set_strip_alpha(png);
    if (png_get_color_type(png, info) == PNG_COLOR_TYPE_GRAY ||
        png_get_color_type(png, info) == PNG_COLOR_TYPE_GRAY_ALPHA)
        png_set_gray_to_rgb(png);
    png_read_update_info(png, info);

    Rgb8Image img;
    img.h = static_cast<int>(png_get_image_height(png, info));
    img.w = static_cast<int>(png_get_image_width(png, info));
    img.rgb.resize(static_cast<size_t>(3) * img.h * img.w);
    std::vector<png_bytep> rows(img.h);
    for (int i = 0; i < img.h; ++i)
        rows[i] = img.rgb.data() + static_cast<size_t>(i) * img.w * 3;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    return img;
}

Tensor read_png_as_batch(const std::string& path) {
    Rgb8Image img = read_png(path);
    Tensor t({1, 3, img.h, img.w});
    const size_t plane = static_cast<size_t>(img.h) * img.w;
    for (size_t i = 0; i < plane; ++i)
        for (int c = 0; c < 3; ++c)
            t[c * plane + i] = static_cast<float>(img.rgb[i * 3 + c]) / 255.0f;
    return t;
}

void export_for_fid(const Tensor& images, const std::string& dir) {
    fs::create_directories(dir);
    const int b = images.empty() ? 0 : images.dim(0);
    const int h = b ? images.dim(2) : 0, w = b ? images.dim(3) : 0;
    for (int i = 0; i < b; ++i) {
        char name[16];
        std::snprintf(name, sizeof(name), "%06d.png", i);
        write_png((fs::path(dir) / name).string(),
                  quantize_image(&images.at4(i, 0, 0, 0), h, w));
    }
}

void write_png_grid(const Tensor& images, const std::string& path, int cols) {
    const int b = images.dim(0), h = images.dim(2), w = images.dim(3);
    cols = std::max(1, std::min(cols, b));
    const int rows = (b + cols - 1) / cols;
    Rgb8Image grid;
    grid.h = rows * h;
    grid.w = cols * w;
    grid.rgb.assign(static_cast<size_t>(3) * grid.h * grid.w, 0);
    for (int i = 0; i < b; ++i) {
        Rgb8Image cell = quantize_image(&images.at4(i, 0, 0, 0), h, w);
        const int r0 = (i / cols) * h, c0 = (i % cols) * w;
        for (int y = 0; y < h; ++y)
            std::copy(cell.rgb.begin() + static_cast<size_t>(y) * w * 3,
                      cell.rgb.begin() + static_cast<size_t>(y + 1) * w * 3,
                      grid.rgb.begin() + (static_cast<size_t>(r0 + y) * grid.w + c0) * 3);
    }
    write_png(path, grid);
}

}  // namespace da
