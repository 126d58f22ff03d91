#pragma once

#include <cstddef>
#include <vector>

#include "camfuse/tensor.hpp"

namespace camfuse {

enum class LayerKind { conv2d, relu, maxpool2, gap, dense };

const char* layer_kind_name(LayerKind kind);

// Static description of one layer. Only the fields for the layer's kind
// are meaningful; use the factory helpers below so invariants (odd kernel,
// stride >= 1) are checked once at construction.
struct LayerSpec {
    LayerKind kind = LayerKind::relu;
    // conv2d
    std::size_t in_channels = 0;
    std::size_t out_channels = 0;
    std::size_t kernel = 0;
    std::size_t stride = 1;
    std::size_t padding = 0;
    // dense
    std::size_t in_units = 0;
    std::size_t out_units = 0;

    bool has_params() const {
        return kind == LayerKind::conv2d || kind == LayerKind::dense;
    }
};

LayerSpec conv2d_spec(std::size_t in_channels, std::size_t out_channels,
                      std::size_t kernel, std::size_t stride, std::size_t padding);
LayerSpec relu_spec();
LayerSpec maxpool2_spec();
LayerSpec gap_spec();
LayerSpec dense_spec(std::size_t in_units, std::size_t out_units);

// Weight/bias pair; both tensors are empty for non-parametric layers.
// conv2d weight is [out_ch, in_ch, k, k] with bias [out_ch];
// dense weight is [out_units, in_units] with bias [out_units].
struct LayerParams {
    Tensor weight;
    Tensor bias;
};

// Gradients returned by layer_backward. weight_grad/bias_grad are empty
// for non-parametric layers.
struct LayerGrads {
    Tensor input_grad;
    Tensor weight_grad;
    Tensor bias_grad;
};

std::vector<std::size_t> layer_output_shape(const LayerSpec& spec,
                                            const std::vector<std::size_t>& input_shape);

Tensor layer_forward(const LayerSpec& spec, const LayerParams& params,
                     const Tensor& input);

// upstream holds d(scalar)/d(output); returns gradients w.r.t. input and
// parameters. Max-pool ties resolve to the first maximum in row-major
// window order.
LayerGrads layer_backward(const LayerSpec& spec, const LayerParams& params,
                          const Tensor& input, const Tensor& upstream);

// Numerically stable softmax (max subtraction). Throws ValueError on
// empty input.
std::vector<double> softmax(const std::vector<double>& logits);

// Bilinear resampling of a rank-2 map with half-pixel centers: the source
// coordinate for output index i is (i + 0.5) * src / out - 0.5, clamped to
// the valid range. Output values never leave [min(input), max(input)].
Tensor bilinear_resize(const Tensor& input, std::size_t out_h, std::size_t out_w);

}  // namespace camfuse
