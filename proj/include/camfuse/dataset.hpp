#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "camfuse/tensor.hpp"

namespace camfuse {

// Synthetic classification set: one bright shape on a dark background per
// 3x32x32 image, pixel values in [0,1]. Classes cycle square, disk,
// cross, triangle so any multiple-of-4 count is exactly balanced. Each
// mask is rank-2 with 1.0 exactly where the shape was painted.
struct ShapesDataset {
    std::vector<Tensor> images;
    std::vector<int> labels;
    std::vector<Tensor> masks;
    std::uint64_t seed = 0;
};

inline constexpr int kNumShapeClasses = 4;

const char* shape_class_name(int label);

// Deterministic for (n, seed, noise_level): position, extent and colors
// come from one splitmix64 stream, then uniform pixel noise of amplitude
// noise_level is added and the result clamped to [0,1]. noise_level must
// lie in [0, 0.5]. The noise draw count is independent of noise_level, so
// two seeds-equal datasets differ only by the noise term.
ShapesDataset gen_shapes_dataset(std::size_t n, std::uint64_t seed, double noise_level);

}  // namespace camfuse
