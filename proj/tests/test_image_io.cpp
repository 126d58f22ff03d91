#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "camfuse/errors.hpp"
#include "camfuse/image_io.hpp"
#include "camfuse/rng.hpp"
#include "helpers.hpp"

using namespace camfuse;
using testutil::bits_equal;
using testutil::random_tensor;
using testutil::scratch_dir;

namespace {

RgbImage random_rgb(std::size_t h, std::size_t w, SplitMix64& rng) {
    RgbImage img;
    img.height = h;
    img.width = w;
    img.pixels.resize(h * w * 3);
    for (auto& p : img.pixels) p = static_cast<std::uint8_t>(rng.next_below(256));
    return img;
}

std::vector<char> read_all(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return std::vector<char>(std::istreambuf_iterator<char>(in),
                             std::istreambuf_iterator<char>());
}

void write_all(const std::string& path, const std::vector<char>& bytes) {
    std::ofstream out(path, std::ios::binary);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

bool images_equal(const RgbImage& a, const RgbImage& b) {
    return a.height == b.height && a.width == b.width && a.pixels == b.pixels;
}

}  // namespace

TEST_CASE("PPM round-trip preserves every byte") {
    const std::string dir = scratch_dir("io_ppm");
    SplitMix64 rng(91);
    const RgbImage img = random_rgb(5, 9, rng);
    save_ppm(dir + "/img.ppm", img);
    CHECK(images_equal(load_ppm(dir + "/img.ppm"), img));
    CHECK(images_equal(load_rgb_file(dir + "/img.ppm"), img));
}

TEST_CASE("a handwritten two-pixel PPM loads with the exact colors") {
    const std::string dir = scratch_dir("io_ppm_fixed");
    std::ofstream out(dir + "/two.ppm", std::ios::binary);
    out << "P6\n# a comment\n2 1\n255\n";
    const unsigned char px[6] = {255, 0, 0, 0, 0, 255};  // red, blue
    out.write(reinterpret_cast<const char*>(px), 6);
    out.close();

    const RgbImage img = load_ppm(dir + "/two.ppm");
    REQUIRE(img.width == 2);
    REQUIRE(img.height == 1);
    CHECK(img.pixels == std::vector<std::uint8_t>{255, 0, 0, 0, 0, 255});
}

TEST_CASE("PNG round-trip preserves every byte") {
    const std::string dir = scratch_dir("io_png");
    SplitMix64 rng(92);
    for (int rep = 0; rep < 5; ++rep) {
        const std::size_t h = 1 + rng.next_below(40);
        const std::size_t w = 1 + rng.next_below(40);
        const RgbImage img = random_rgb(h, w, rng);
        const std::string path = dir + "/img" + std::to_string(rep) + ".png";
        save_png(path, img);
        CHECK(images_equal(load_png(path), img));
        CHECK(images_equal(load_rgb_file(path), img));
    }
}

TEST_CASE("tensor conversion is exact on the 8-bit grid and within half a step otherwise") {
    SplitMix64 rng(93);
    // Exact grid values survive a double round-trip unchanged.
    RgbImage img = random_rgb(4, 4, rng);
    const Tensor unit = to_unit_tensor(img);
    CHECK(unit.shape() == std::vector<std::size_t>{3, 4, 4});
    for (std::size_t i = 0; i < unit.size(); ++i) {
        CHECK(unit[i] >= 0.0);
        CHECK(unit[i] <= 1.0);
    }
    CHECK(images_equal(to_rgb_image(unit), img));

    // Arbitrary [0,1] values quantize to the nearest 1/255 step.
    const Tensor arbitrary = random_tensor({3, 3, 3}, rng, 0.0, 1.0);
    const RgbImage quantized = to_rgb_image(arbitrary);
    const Tensor back = to_unit_tensor(quantized);
    for (std::size_t i = 0; i < arbitrary.size(); ++i)
        CHECK(std::fabs(back[i] - arbitrary[i]) <= 0.5 / 255.0 + 1e-12);
}

TEST_CASE("PNG loading rejects truncated and corrupt files") {
    const std::string dir = scratch_dir("io_bad");
    SplitMix64 rng(94);
    const RgbImage img = random_rgb(8, 8, rng);
    save_png(dir + "/good.png", img);
    const std::vector<char> bytes = read_all(dir + "/good.png");

    std::vector<char> truncated(bytes.begin(), bytes.begin() + 20);
    write_all(dir + "/short.png", truncated);
    CHECK_THROWS_AS(load_png(dir + "/short.png"), FormatError);

    std::vector<char> magic = bytes;
    magic[1] = 'X';
    write_all(dir + "/magic.png", magic);
    CHECK_THROWS_AS(load_png(dir + "/magic.png"), FormatError);

    write_all(dir + "/empty.png", {});
    CHECK_THROWS_AS(load_png(dir + "/empty.png"), FormatError);
    CHECK_THROWS_AS(load_rgb_file(dir + "/empty.png"), FormatError);

    CHECK_THROWS_AS(load_png(dir + "/missing.png"), IoError);
}

TEST_CASE("mask round-trip keeps the binary foreground pattern") {
    const std::string dir = scratch_dir("io_mask");
    SplitMix64 rng(95);
    Tensor mask({16, 16});
    for (std::size_t i = 0; i < mask.size(); ++i)
        mask[i] = rng.next_below(2) ? 1.0 : 0.0;
    save_mask_png(dir + "/mask.png", mask);
    const Tensor loaded = load_mask_png(dir + "/mask.png");
    CHECK(bits_equal(loaded, mask));
}

TEST_CASE("grayscale PNG loads with the gray value in all three channels") {
    const std::string dir = scratch_dir("io_gray");
    Tensor mask({2, 2});
    mask.at2(0, 0) = 1.0;
    save_mask_png(dir + "/gray.png", mask);
    const RgbImage img = load_png(dir + "/gray.png");
    REQUIRE(img.pixels.size() == 12);
    CHECK(img.pixels[0] == 255);
    CHECK(img.pixels[1] == 255);
    CHECK(img.pixels[2] == 255);
    CHECK(img.pixels[3] == 0);
}

TEST_CASE("the colormap endpoints are blue, green and red") {
    const std::array<double, 3> lo = heat_colormap(0.0);
    CHECK(lo[0] == 0.0);
    CHECK(lo[1] == 0.0);
    CHECK(lo[2] == 1.0);

    const std::array<double, 3> mid = heat_colormap(0.5);
    CHECK(mid[0] == 0.0);
    CHECK(mid[1] == 1.0);
    CHECK(mid[2] == 0.0);

    const std::array<double, 3> hi = heat_colormap(1.0);
    CHECK(hi[0] == 1.0);
    CHECK(hi[1] == 0.0);
    CHECK(hi[2] == 0.0);

    // Out-of-range values clamp to the endpoints.
    CHECK(heat_colormap(-2.0) == lo);
    CHECK(heat_colormap(3.0) == hi);
}

TEST_CASE("heatmap rendering blends the colormap over the image") {
    SplitMix64 rng(96);
    const SaliencyMap map{random_tensor({6, 6}, rng, 0.0, 1.0)};
    const Tensor image = random_tensor({3, 6, 6}, rng, 0.0, 1.0);
    const RgbImage rendered = render_heatmap(map, image, 0.5);
    CHECK(rendered.height == 6);
    CHECK(rendered.width == 6);
    CHECK(rendered.pixels.size() == 108);

    // alpha = 1 is the pure colormap.
    const RgbImage pure = render_heatmap(map, image, 1.0);
    CHECK(images_equal(pure, render_colormap(map)));
}

TEST_CASE("saving a heatmap writes a loadable PNG of the right size") {
    const std::string dir = scratch_dir("io_heat");
    SplitMix64 rng(97);
    const SaliencyMap map{random_tensor({32, 32}, rng, 0.0, 1.0)};
    const Tensor image = random_tensor({3, 32, 32}, rng, 0.0, 1.0);
    save_heatmap(dir + "/heat.png", map, image);
    const RgbImage loaded = load_png(dir + "/heat.png");
    CHECK(loaded.height == 32);
    CHECK(loaded.width == 32);
}

TEST_CASE("load_image returns the unit tensor of the stored PNG") {
    const std::string dir = scratch_dir("io_load_image");
    SplitMix64 rng(98);
    const RgbImage img = random_rgb(10, 7, rng);
    save_png(dir + "/img.png", img);
    const Tensor t = load_image(dir + "/img.png");
    CHECK(t.shape() == std::vector<std::size_t>{3, 10, 7});
    CHECK(bits_equal(t, to_unit_tensor(img)));
}
