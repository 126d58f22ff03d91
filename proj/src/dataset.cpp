#include "camfuse/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

#include "camfuse/errors.hpp"
#include "camfuse/model.hpp"
#include "camfuse/rng.hpp"

namespace camfuse {

const char* shape_class_name(int label) {
    switch (label) {
        case 0: return "square";
        case 1: return "disk";
        case 2: return "cross";
        case 3: return "triangle";
    }
    return "?";
}

namespace {

constexpr std::size_t kSide = MicroCNN::kInputHeight;

bool inside_shape(int label, int y, int x, int cy, int cx, int half) {
    const int dy = y - cy;
    const int dx = x - cx;
    switch (label) {
        case 0:  // square
            return std::abs(dy) <= half && std::abs(dx) <= half;
        case 1:  // disk
            return dy * dy + dx * dx <= half * half;
        case 2: {  // cross: two crossing bars
            const int bar = std::max(1, half / 3);
            return (std::abs(dy) <= bar && std::abs(dx) <= half) ||
                   (std::abs(dx) <= bar && std::abs(dy) <= half);
        }
        case 3:  // upward triangle: apex at cy-half, base at cy+half
            if (dy < -half || dy > half) return false;
            // Width grows linearly from 0 at the apex to `half` at the base.
            return std::abs(dx) * 2 * half <= (dy + half) * half;
    }
    return false;
}

}  // namespace

ShapesDataset gen_shapes_dataset(std::size_t n, std::uint64_t seed, double noise_level) {
    if (noise_level < 0.0 || noise_level > 0.5)
        throw ValueError("gen_shapes_dataset: noise_level must be in [0, 0.5]");
    ShapesDataset ds;
    ds.seed = seed;
    ds.images.reserve(n);
    ds.labels.reserve(n);
    ds.masks.reserve(n);
    SplitMix64 rng(seed);
    for (std::size_t i = 0; i < n; ++i) {
        const int label = static_cast<int>(i % kNumShapeClasses);
        // Shape geometry: half-extent in pixels, center kept fully in frame.
        const int half = 8 + static_cast<int>(rng.next_below(5));  // 8..12
        const int lo = half + 1;
        const int hi = static_cast<int>(kSide) - half - 2;
        const int cy = lo + static_cast<int>(rng.next_below(
                                static_cast<std::uint64_t>(hi - lo + 1)));
        const int cx = lo + static_cast<int>(rng.next_below(
                                static_cast<std::uint64_t>(hi - lo + 1)));
        double fg[3], bg[3];
        for (double& v : fg) v = rng.next_range(0.7, 1.0);
        for (double& v : bg) v = rng.next_range(0.0, 0.25);

        Tensor img({3, kSide, kSide});
        Tensor mask({kSide, kSide});
        for (std::size_t y = 0; y < kSide; ++y) {
            for (std::size_t x = 0; x < kSide; ++x) {
                const bool painted = inside_shape(label, static_cast<int>(y),
                                                  static_cast<int>(x), cy, cx, half);
                if (painted) mask.at2(y, x) = 1.0;
                for (std::size_t c = 0; c < 3; ++c)
                    img.at3(c, y, x) = painted ? fg[c] : bg[c];
            }
        }
        // Noise draws happen regardless of amplitude so the stream layout
        // does not depend on noise_level.
        for (std::size_t c = 0; c < 3; ++c) {
            for (std::size_t y = 0; y < kSide; ++y) {
                for (std::size_t x = 0; x < kSide; ++x) {
                    const double u = rng.next_range(-1.0, 1.0) * noise_level;
                    img.at3(c, y, x) = std::clamp(img.at3(c, y, x) + u, 0.0, 1.0);
                }
            }
        }
        ds.images.push_back(std::move(img));
        ds.labels.push_back(label);
        ds.masks.push_back(std::move(mask));
    }
    return ds;
}

}  // namespace camfuse
