#pragma once

#include <cstddef>
#include <vector>

#include "camfuse/model.hpp"
#include "camfuse/preprocess.hpp"
#include "camfuse/tensor.hpp"

namespace camfuse {

// Rank-2 saliency map with values in [0,1] (all-zero when degenerate).
struct SaliencyMap {
    Tensor values;

    std::size_t height() const { return values.extent(0); }
    std::size_t width() const { return values.extent(1); }
    double at(std::size_t i, std::size_t j) const { return values.at2(i, j); }
};

// Min-max normalization: (x - min) / (max - min); a constant map becomes
// all zeros. A map already spanning exactly [0,1] is returned unchanged.
SaliencyMap normalize_map(const Tensor& raw);

// ReLU(sum_k weights[k] * activations[k]) over a [K, h, w] stack; the
// shared core of both CAM variants. Channels are accumulated in ascending
// order.
Tensor weighted_channel_sum_relu(const Tensor& activations,
                                 const std::vector<double>& weights);

// Gradient-weighted CAM: channel weights are spatial means of
// d probs[c] / d A^layer, the weighted activation sum is rectified,
// bilinearly upsampled to the model input size, then normalized.
SaliencyMap grad_cam(const MicroCNN& model, const ForwardTrace& trace, std::size_t c,
                     std::size_t layer);

// Convenience wrapper: forwards preprocess(image_raw) itself (one extra
// forward pass) and delegates.
SaliencyMap grad_cam(const MicroCNN& model, const Tensor& image_raw, std::size_t c,
                     std::size_t layer, const Preprocessing& prep = Preprocessing{});

struct ScoreCamResult {
    SaliencyMap map;
    std::vector<double> channel_weights;  // probs_c(masked) - probs_c(black)
    double baseline_prob = 0.0;           // probs_c(black input), computed once
};

// Activation-masking CAM. Each channel of A^layer is upsampled to the
// input size and min-max normalized into a mask H_k; its weight is
// probs_c(H_k * image_raw) - probs_c(black), with the black baseline
// evaluated exactly once. With a caller-provided trace this performs
// exactly K+1 forward passes (K masked + 1 black); passing nullptr adds
// one activation-extraction pass. Masks multiply raw [0,1] pixels across
// all channels before preprocessing.
ScoreCamResult score_cam_detail(const MicroCNN& model, const Tensor& image_raw,
                                std::size_t c, std::size_t layer,
                                const Preprocessing& prep = Preprocessing{},
                                const ForwardTrace* trace = nullptr);

SaliencyMap score_cam(const MicroCNN& model, const Tensor& image_raw, std::size_t c,
                      std::size_t layer, const Preprocessing& prep = Preprocessing{});

}  // namespace camfuse
