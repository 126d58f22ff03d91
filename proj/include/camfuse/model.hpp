#pragma once

#include <atomic>
#include <cstdint>
#include <string>
#include <vector>

#include "camfuse/layers.hpp"
#include "camfuse/tensor.hpp"

namespace camfuse {

// Outputs of a full forward pass: one activation tensor per layer (the
// last one is the logits) plus the softmax probabilities.
struct ForwardTrace {
    std::vector<Tensor> activations;
    std::vector<double> probs;

    const Tensor& logits() const { return activations.back(); }
};

// Fixed little CNN for 3x32x32 inputs:
//   conv 3x3 3->8 pad 1, relu, maxpool2, conv 3x3 8->16 pad 1, relu,
//   maxpool2, gap, dense 16->C.
// The architecture is not configurable; only the class count C varies
// (default 4). Parameters start at zero; use init_params or load_weights.
class MicroCNN {
  public:
    static constexpr std::size_t kInputChannels = 3;
    static constexpr std::size_t kInputHeight = 32;
    static constexpr std::size_t kInputWidth = 32;
    static constexpr std::size_t kDefaultNumClasses = 4;
    // Trace index of the second pooling output (16 channels, 8x8): the
    // last convolutional block's output and the default CAM target.
    static constexpr std::size_t kDefaultCamLayer = 5;

    explicit MicroCNN(std::size_t num_classes = kDefaultNumClasses);

    // The atomic counter is not copyable; carry its value across instead.
    MicroCNN(const MicroCNN& other)
        : num_classes_(other.num_classes_),
          layers_(other.layers_),
          params_(other.params_),
          forward_calls_(other.forward_calls_.load()) {}
    MicroCNN(MicroCNN&& other) noexcept
        : num_classes_(other.num_classes_),
          layers_(std::move(other.layers_)),
          params_(std::move(other.params_)),
          forward_calls_(other.forward_calls_.load()) {}
    MicroCNN& operator=(const MicroCNN& other) {
        num_classes_ = other.num_classes_;
        layers_ = other.layers_;
        params_ = other.params_;
        forward_calls_.store(other.forward_calls_.load());
        return *this;
    }
    MicroCNN& operator=(MicroCNN&& other) noexcept {
        num_classes_ = other.num_classes_;
        layers_ = std::move(other.layers_);
        params_ = std::move(other.params_);
        forward_calls_.store(other.forward_calls_.load());
        return *this;
    }

    std::size_t num_classes() const { return num_classes_; }
    const std::vector<LayerSpec>& layers() const { return layers_; }
    std::vector<LayerParams>& params() { return params_; }
    const std::vector<LayerParams>& params() const { return params_; }

    // Seeded uniform init: weights ~ U[-s, s] with s = sqrt(6/(fan_in+fan_out)),
    // biases zero. Same seed => bit-identical parameters.
    void init_params(std::uint64_t seed);

    // Full forward pass on a preprocessed 3x32x32 image. Records every
    // layer output. Thread-safe counter increments once per call.
    ForwardTrace forward(const Tensor& input) const;

    // Resumes the forward pass treating `activation` as the output of
    // layer `layer`; returns class probabilities. Counts as one forward
    // pass.
    std::vector<double> forward_from(std::size_t layer, const Tensor& activation) const;

    // d probs[c] / d activations[layer], backpropagated through softmax.
    // `layer` must index a layer with spatial (rank-3) output.
    Tensor grad_wrt_layer(const ForwardTrace& trace, std::size_t c,
                          std::size_t layer) const;

    // d probs[c] / d theta for every trainable parameter. Entries align
    // with params(); non-parametric layers hold empty tensors.
    std::vector<LayerParams> grad_wrt_params(const ForwardTrace& trace, std::size_t c,
                                             const Tensor& input) const;

    // d loss / d theta given d loss / d logits (used by the trainer).
    std::vector<LayerParams> param_grads_from_logit_grad(
        const ForwardTrace& trace, const Tensor& input,
        const std::vector<double>& logit_grad) const;

    std::uint64_t forward_calls() const { return forward_calls_.load(); }
    void reset_forward_calls() const { forward_calls_.store(0); }

    // Trace indices whose activation is spatial (rank 3).
    bool layer_is_spatial(std::size_t layer) const;

  private:
    std::vector<LayerParams> backward_impl(const ForwardTrace& trace, const Tensor& input,
                                           const std::vector<double>& logit_grad,
                                           long stop_layer, Tensor* act_grad_out,
                                           bool want_param_grads) const;

    std::size_t num_classes_;
    std::vector<LayerSpec> layers_;
    std::vector<LayerParams> params_;
    mutable std::atomic<std::uint64_t> forward_calls_{0};
};

// Binary weight file: magic "CAMF", u32 LE version (currently 1), u32 LE
// record count, then per parameter tensor (layer order, weight before
// bias): u32 LE rank, u32 LE dims..., IEEE-754 f64 LE values row-major.
// Distinct errors: FormatError (magic/truncation), VersionError,
// ArchitectureError (shape mismatch with the fixed architecture).
void save_weights(const MicroCNN& model, const std::string& path);
MicroCNN load_weights(const std::string& path);

}  // namespace camfuse
