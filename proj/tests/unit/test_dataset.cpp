#include "doctest.h"

#include <cstring>
#include <filesystem>
#include <fstream>

#include "da/dataset.hpp"

using namespace da;
namespace fs = std::filesystem;

namespace {

std::string temp_path(const char* name) { return (fs::temp_directory_path() / name).string(); }

void write_raw(const std::string& path, const std::vector<uint8_t>& bytes) {
    std::ofstream os(path, std::ios::binary);
    os.write(reinterpret_cast<const char*>(bytes.data()),
             static_cast<std::streamsize>(bytes.size()));
}

std::vector<uint8_t> cifar_record(uint8_t label, uint8_t fill) {
    std::vector<uint8_t> rec(3073, fill);
    rec[0] = label;
    return rec;
}

}  // namespace

TEST_CASE("cifar single-record file decodes byte-exactly") {
    std::string path = temp_path("one_record.bin");
    write_raw(path, cifar_record(3, 255));
    Dataset ds = load_cifar10_file(path);
    REQUIRE(ds.size() == 1);
    CHECK(ds.h == 32);
    CHECK(ds.labels[0] == 3);
    for (size_t i = 0; i < ds.image_size(); ++i) CHECK(ds.image(0)[i] == 1.0f);

    Dataset again = load_cifar10_file(path);
    CHECK(again.pixels == ds.pixels);
    fs::remove(path);
}

TEST_CASE("cifar loader rejects malformed files") {
    std::string path = temp_path("bad_record.bin");
    std::vector<uint8_t> truncated(3072, 0);
    write_raw(path, truncated);
    CHECK_THROWS_AS(load_cifar10_file(path), DatasetFormatError);

    write_raw(path, cifar_record(10, 0));  // label byte > 9
    CHECK_THROWS_AS(load_cifar10_file(path), DatasetFormatError);
    fs::remove(path);

    CHECK_THROWS_AS(load_cifar10_file(temp_path("missing.bin")), DatasetNotFound);
    CHECK_THROWS_AS(load_cifar10(temp_path("missing_dir")), DatasetNotFound);
}

TEST_CASE("cifar directory loader concatenates the five batches in order") {
    fs::path dir = fs::temp_directory_path() / "cifar_mini";
    fs::create_directories(dir);
    for (int b = 1; b <= 5; ++b) {
        std::vector<uint8_t> bytes;
        for (int r = 0; r < 3; ++r) {
            auto rec = cifar_record(static_cast<uint8_t>(b % 10), static_cast<uint8_t>(10 * b + r));
            bytes.insert(bytes.end(), rec.begin(), rec.end());
        }
        write_raw((dir / ("data_batch_" + std::to_string(b) + ".bin")).string(), bytes);
    }
    Dataset ds = load_cifar10(dir.string());
    CHECK(ds.size() == 15);
    CHECK(ds.image(0)[0] == doctest::Approx(10.0f / 255.0f));
    CHECK(ds.image(14)[0] == doctest::Approx(52.0f / 255.0f));
    fs::remove_all(dir);
}

TEST_CASE("cifar writer/loader round trip through quantization") {
    Dataset ds = synth_dataset(4, 99);
    std::string path = temp_path("synth_as_cifar.bin");
    write_cifar10_file(path, ds);
    Dataset back = load_cifar10_file(path);
    REQUIRE(back.size() == 4);
    for (size_t i = 0; i < ds.pixels.size(); ++i) {
        float q = std::lround(ds.pixels[i] * 255.0f) / 255.0f;
        CHECK(back.pixels[i] == doctest::Approx(q).epsilon(1e-6));
    }
    fs::remove(path);
}

TEST_CASE("celeba preprocess averages and crops") {
    const int h = 218, w = 178;
    std::vector<uint8_t> frame(3 * h * w, 128);
    auto out = preprocess_celeba(frame.data(), h, w);
    REQUIRE(out.size() == 3 * 32 * 32);
    for (float v : out) CHECK(v == doctest::Approx(128.0f / 255.0f));

    // impulse inside exactly one 5x5 pooling cell
    std::fill(frame.begin(), frame.end(), 0);
    const int r0 = (h - 160) / 2, c0 = (w - 160) / 2;
    const int cell_i = 7, cell_j = 19;
    frame[static_cast<size_t>(0) * h * w + (r0 + cell_i * 5 + 2) * w + (c0 + cell_j * 5 + 4)] = 255;
    out = preprocess_celeba(frame.data(), h, w);
    for (int i = 0; i < 32; ++i)
        for (int j = 0; j < 32; ++j) {
            float expect = (i == cell_i && j == cell_j) ? 1.0f / 25.0f : 0.0f;
            CHECK(out[(0 * 32 + i) * 32 + j] == doctest::Approx(expect));
        }

    CHECK_THROWS_AS(preprocess_celeba(frame.data(), 178, 218), DatasetFormatError);
}

TEST_CASE("daim packed file round trip") {
    const int h = 218, w = 178;
    std::vector<uint8_t> frames(2 * 3 * h * w);
    for (size_t i = 0; i < frames.size(); ++i) frames[i] = static_cast<uint8_t>(i * 31);
    std::string path = temp_path("frames.daim");
    write_daim(path, frames, 2, h, w);
    Dataset ds = load_celeba_packed(path);
    CHECK(ds.size() == 2);
    CHECK(ds.h == 32);
    CHECK(ds.source == DataSource::celeba);
    fs::remove(path);
}

TEST_CASE("shift_transform identity is bitwise") {
    Dataset ds = synth_dataset(2, 5);
    Tensor x = ds.gather({0, 1});
    Tensor y = shift_transform(x, 0);
    CHECK(std::memcmp(x.data(), y.data(), x.numel() * sizeof(float)) == 0);
}

TEST_CASE("shift_transform moves an impulse and zero-fills") {
    Tensor x({1, 3, 32, 32});
    for (int i = 0; i < 32; ++i) x.at4(0, 1, i, 10) = 0.5f;
    Tensor y = shift_transform(x, 3);
    for (int i = 0; i < 32; ++i) {
        CHECK(y.at4(0, 1, i, 13) == 0.5f);
        CHECK(y.at4(0, 1, i, 10) == 0.0f);
        for (int j = 0; j < 3; ++j) CHECK(y.at4(0, 1, i, j) == 0.0f);
    }
    CHECK_THROWS_AS(shift_transform(x, 9), ShiftOutOfRange);
    CHECK_THROWS_AS(shift_transform(x, -9), ShiftOutOfRange);
}

TEST_CASE("shift_transform matches a naive oracle and inverts on kept columns") {
    Dataset ds = synth_dataset(1, 77);
    Tensor x = ds.gather({0});
    for (int r = -8; r <= 8; ++r) {
        Tensor y = shift_transform(x, r);
        // naive per-element oracle
        for (int c = 0; c < 3; ++c)
            for (int i = 0; i < 32; ++i)
                for (int j = 0; j < 32; ++j) {
                    float expect = (j - r >= 0 && j - r < 32) ? x.at4(0, c, i, j - r) : 0.0f;
                    CHECK(y.at4(0, c, i, j) == expect);
                }
        // mask-aware inverse
        Tensor back = shift_transform(y, -r);
        for (int c = 0; c < 3; ++c)
            for (int i = 0; i < 32; ++i)
                for (int j = 0; j < 32; ++j) {
                    bool kept = (j + r >= 0 && j + r < 32) && (j >= 0 && j < 32);
                    if (kept) CHECK(back.at4(0, c, i, j) == x.at4(0, c, i, j));
                }
    }
}

TEST_CASE("epoch_batches partitions every index exactly once") {
    Pcg32 rng(3);
    auto batches = epoch_batches(10, 4, rng);
    REQUIRE(batches.size() == 3);
    CHECK(batches[0].size() == 4);
    CHECK(batches[1].size() == 4);
    CHECK(batches[2].size() == 2);
    std::vector<int> seen(10, 0);
    for (const auto& b : batches)
        for (uint32_t i : b) ++seen[i];
    for (int c : seen) CHECK(c == 1);

    Pcg32 r1(3), r2(3);
    CHECK(epoch_batches(10, 4, r1) == epoch_batches(10, 4, r2));

    Pcg32 big(1);
    auto full = epoch_batches(50000, 256, big);
    CHECK(full.size() == 196);  // 195 * 256 + 80
    CHECK(full.back().size() == 80);
}
