#pragma once

#include <array>
#include <cstddef>

#include "camfuse/tensor.hpp"

namespace camfuse {

// Raw [0,1] RGB image -> model input: per-channel bilinear resize to
// (resize_h, resize_w), then (x - mean[c]) / std[c]. Defaults are the
// usual RGB normalization constants and the 32x32 input profile.
struct Preprocessing {
    std::size_t resize_h = 32;
    std::size_t resize_w = 32;
    std::array<double, 3> mean{0.485, 0.456, 0.406};
    std::array<double, 3> stddev{0.229, 0.224, 0.225};
};

Tensor preprocess(const Tensor& image_raw, const Preprocessing& prep = Preprocessing{});

// preprocess applied to the all-zero raw image of the target size.
Tensor black_input(const Preprocessing& prep = Preprocessing{});

// Per-channel resize without normalization (raw stays in [0,1]).
Tensor resize_raw(const Tensor& image_raw, std::size_t out_h, std::size_t out_w);

}  // namespace camfuse
