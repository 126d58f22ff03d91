#pragma once

#include <algorithm>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <string>

#include "camfuse/dataset.hpp"
#include "camfuse/model.hpp"
#include "camfuse/rng.hpp"
#include "camfuse/tensor.hpp"
#include "camfuse/train.hpp"

namespace testutil {

inline double rel_err(double a, double b) {
    const double scale = std::max(std::fabs(a), std::fabs(b));
    if (scale < 1e-8) return std::fabs(a - b);  // absolute near zero
    return std::fabs(a - b) / scale;
}

inline camfuse::Tensor random_tensor(const std::vector<std::size_t>& shape,
                                     camfuse::SplitMix64& rng, double lo = -1.0,
                                     double hi = 1.0) {
    camfuse::Tensor t(shape);
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = rng.next_range(lo, hi);
    return t;
}

inline bool bits_equal(const camfuse::Tensor& a, const camfuse::Tensor& b) {
    if (a.shape() != b.shape()) return false;
    return std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

// Small deterministic trained model shared by CAM/fusion/metrics tests.
// 240 images, 10 epochs: under ten seconds, trains to ~0.88 accuracy so
// maps and confidence deltas carry real signal.
inline const camfuse::MicroCNN& mini_model() {
    static const camfuse::MicroCNN model = [] {
        const camfuse::ShapesDataset data = camfuse::gen_shapes_dataset(240, 8, 0.05);
        camfuse::TrainConfig config;
        config.epochs = 10;
        config.learning_rate = 0.05;
        config.batch_size = 8;
        config.seed = 8;
        return camfuse::train_sgd(data, config).model;
    }();
    return model;
}

// Fixed raw [0,1] test image (and its label) for oracle checks.
inline const camfuse::ShapesDataset& fixture_images() {
    static const camfuse::ShapesDataset data = camfuse::gen_shapes_dataset(8, 1234, 0.05);
    return data;
}

// Unique scratch directory under the test binary's working directory.
inline std::string scratch_dir(const std::string& name) {
    const std::filesystem::path dir = std::filesystem::path("scratch") / name;
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir.string();
}

}  // namespace testutil
