#pragma once

#include <cstdint>
#include <vector>

#include "camfuse/dataset.hpp"
#include "camfuse/model.hpp"

namespace camfuse {

struct TrainConfig {
    std::size_t epochs = 30;
    double learning_rate = 0.05;
    std::size_t batch_size = 16;
    std::uint64_t seed = 42;
};

struct TrainResult {
    MicroCNN model;
    std::vector<double> epoch_loss;  // mean cross-entropy per epoch
};

// Plain SGD on softmax cross-entropy. Parameter init and the per-epoch
// Fisher-Yates shuffle both draw from splitmix64 streams derived from the
// seed, so the result is bit-reproducible. Single-threaded. A zero
// learning rate leaves the parameters at their initialization.
TrainResult train_sgd(const ShapesDataset& data, const TrainConfig& config);

// Fraction of images whose argmax probability matches the label.
double evaluate_accuracy(const MicroCNN& model, const ShapesDataset& data);

}  // namespace camfuse
