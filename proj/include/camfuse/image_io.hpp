#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "camfuse/cam.hpp"
#include "camfuse/tensor.hpp"

namespace camfuse {

// 8-bit interleaved RGB buffer used at the file boundary.
struct RgbImage {
    std::size_t height = 0;
    std::size_t width = 0;
    std::vector<std::uint8_t> pixels;  // height * width * 3
};

// PNG support: 8-bit grayscale / RGB / RGBA, non-interlaced. Alpha is
// dropped on load; gray replicates to three channels. Anything else
// raises FormatError, as do truncated or corrupt files.
RgbImage load_png(const std::string& path);
void save_png(const std::string& path, const RgbImage& image);

// Binary PPM (P6), maxval 255.
RgbImage load_ppm(const std::string& path);
void save_ppm(const std::string& path, const RgbImage& image);

// Dispatches on file magic (PNG signature or "P6").
RgbImage load_rgb_file(const std::string& path);

// [0,1] doubles <-> 8-bit with round-to-nearest on save.
Tensor to_unit_tensor(const RgbImage& image);          // [3, H, W]
RgbImage to_rgb_image(const Tensor& image_unit);       // from [3, H, W]

// Convenience: load any supported file as a [3, H, W] tensor in [0,1].
Tensor load_image(const std::string& path);

// Grayscale mask I/O: nonzero pixels mean foreground. Returned tensor is
// rank-2 holding exactly 0.0 or 1.0.
Tensor load_mask_png(const std::string& path);
void save_mask_png(const std::string& path, const Tensor& mask);

// Fixed diverging colormap: blue (0,0,1) -> green (0,1,0) on [0, 0.5],
// green -> red (1,0,0) on [0.5, 1]. Input is clamped to [0,1].
std::array<double, 3> heat_colormap(double v);

// Colormapped map blended over the image at alpha 0.5, quantized to 8-bit.
RgbImage render_heatmap(const SaliencyMap& map, const Tensor& image_unit,
                        double alpha = 0.5);

// Pure colormap rendering without an underlay.
RgbImage render_colormap(const SaliencyMap& map);

void save_heatmap(const std::string& path, const SaliencyMap& map,
                  const Tensor& image_unit, double alpha = 0.5);

}  // namespace camfuse
