#include "camfuse/layers.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "camfuse/errors.hpp"

namespace camfuse {

const char* layer_kind_name(LayerKind kind) {
    switch (kind) {
        case LayerKind::conv2d: return "conv2d";
        case LayerKind::relu: return "relu";
        case LayerKind::maxpool2: return "maxpool2";
        case LayerKind::gap: return "gap";
        case LayerKind::dense: return "dense";
    }
    return "?";
}

LayerSpec conv2d_spec(std::size_t in_channels, std::size_t out_channels,
                      std::size_t kernel, std::size_t stride, std::size_t padding) {
    if (in_channels == 0 || out_channels == 0)
        throw ValueError("conv2d: channel counts must be positive");
    if (kernel == 0 || kernel % 2 == 0)
        throw ValueError("conv2d: kernel size must be odd, got " + std::to_string(kernel));
    if (stride == 0) throw ValueError("conv2d: stride must be >= 1");
    LayerSpec s;
    s.kind = LayerKind::conv2d;
    s.in_channels = in_channels;
    s.out_channels = out_channels;
    s.kernel = kernel;
    s.stride = stride;
    s.padding = padding;
    return s;
}

LayerSpec relu_spec() {
    LayerSpec s;
    s.kind = LayerKind::relu;
    return s;
}

LayerSpec maxpool2_spec() {
    LayerSpec s;
    s.kind = LayerKind::maxpool2;
    return s;
}

LayerSpec gap_spec() {
    LayerSpec s;
    s.kind = LayerKind::gap;
    return s;
}

LayerSpec dense_spec(std::size_t in_units, std::size_t out_units) {
    if (in_units == 0 || out_units == 0)
        throw ValueError("dense: unit counts must be positive");
    LayerSpec s;
    s.kind = LayerKind::dense;
    s.in_units = in_units;
    s.out_units = out_units;
    return s;
}

std::vector<std::size_t> layer_output_shape(const LayerSpec& spec,
                                            const std::vector<std::size_t>& in) {
    switch (spec.kind) {
        case LayerKind::conv2d: {
            if (in.size() != 3 || in[0] != spec.in_channels)
                throw ShapeError("conv2d: expected input [" +
                                 std::to_string(spec.in_channels) +
                                 ", H, W], got " + shape_to_string(in));
            std::size_t span_h = in[1] + 2 * spec.padding;
            std::size_t span_w = in[2] + 2 * spec.padding;
            if (span_h < spec.kernel || span_w < spec.kernel)
                throw ShapeError("conv2d: kernel " + std::to_string(spec.kernel) +
                                 " larger than padded input " + shape_to_string(in));
            std::size_t oh = (span_h - spec.kernel) / spec.stride + 1;
            std::size_t ow = (span_w - spec.kernel) / spec.stride + 1;
            return {spec.out_channels, oh, ow};
        }
        case LayerKind::relu:
            return in;
        case LayerKind::maxpool2: {
            if (in.size() != 3 || in[1] < 2 || in[2] < 2)
                throw ShapeError("maxpool2: expected input [C, H>=2, W>=2], got " +
                                 shape_to_string(in));
            return {in[0], in[1] / 2, in[2] / 2};
        }
        case LayerKind::gap: {
            if (in.size() != 3)
                throw ShapeError("gap: expected rank-3 input, got " + shape_to_string(in));
            return {in[0]};
        }
        case LayerKind::dense: {
            if (in.size() != 1 || in[0] != spec.in_units)
                throw ShapeError("dense: expected input [" + std::to_string(spec.in_units) +
                                 "], got " + shape_to_string(in));
            return {spec.out_units};
        }
    }
    throw ValueError("layer_output_shape: unknown layer kind");
}

namespace {

void check_conv_params(const LayerSpec& spec, const LayerParams& params) {
    std::vector<std::size_t> w{spec.out_channels, spec.in_channels, spec.kernel, spec.kernel};
    require_shape(params.weight, w, "conv2d weight");
    require_shape(params.bias, {spec.out_channels}, "conv2d bias");
}

void check_dense_params(const LayerSpec& spec, const LayerParams& params) {
    require_shape(params.weight, {spec.out_units, spec.in_units}, "dense weight");
    require_shape(params.bias, {spec.out_units}, "dense bias");
}

Tensor conv2d_forward(const LayerSpec& spec, const LayerParams& params,
                      const Tensor& input) {
    check_conv_params(spec, params);
    Tensor out(layer_output_shape(spec, input.shape()));
    const std::size_t ih = input.extent(1), iw = input.extent(2);
    const std::size_t oh = out.extent(1), ow = out.extent(2);
    const std::size_t k = spec.kernel;
    const long pad = static_cast<long>(spec.padding);
    const long stride = static_cast<long>(spec.stride);
    for (std::size_t oc = 0; oc < spec.out_channels; ++oc) {
        for (std::size_t i = 0; i < oh; ++i) {
            for (std::size_t j = 0; j < ow; ++j) {
                double acc = params.bias[oc];
                for (std::size_t ic = 0; ic < spec.in_channels; ++ic) {
                    for (std::size_t u = 0; u < k; ++u) {
                        long y = static_cast<long>(i) * stride - pad + static_cast<long>(u);
                        if (y < 0 || y >= static_cast<long>(ih)) continue;
                        for (std::size_t v = 0; v < k; ++v) {
                            long x = static_cast<long>(j) * stride - pad + static_cast<long>(v);
                            if (x < 0 || x >= static_cast<long>(iw)) continue;
                            acc += params.weight[((oc * spec.in_channels + ic) * k + u) * k + v] *
                                   input.at3(ic, static_cast<std::size_t>(y),
                                             static_cast<std::size_t>(x));
                        }
                    }
                }
                out.at3(oc, i, j) = acc;
            }
        }
    }
    return out;
}

LayerGrads conv2d_backward(const LayerSpec& spec, const LayerParams& params,
                           const Tensor& input, const Tensor& upstream) {
    check_conv_params(spec, params);
    require_shape(upstream, layer_output_shape(spec, input.shape()), "conv2d upstream");
    LayerGrads g;
    g.input_grad = Tensor(input.shape());
    g.weight_grad = Tensor(params.weight.shape());
    g.bias_grad = Tensor(params.bias.shape());
    const std::size_t ih = input.extent(1), iw = input.extent(2);
    const std::size_t oh = upstream.extent(1), ow = upstream.extent(2);
    const std::size_t k = spec.kernel;
    const long pad = static_cast<long>(spec.padding);
    const long stride = static_cast<long>(spec.stride);
    for (std::size_t oc = 0; oc < spec.out_channels; ++oc) {
        for (std::size_t i = 0; i < oh; ++i) {
            for (std::size_t j = 0; j < ow; ++j) {
                const double go = upstream.at3(oc, i, j);
                g.bias_grad[oc] += go;
                for (std::size_t ic = 0; ic < spec.in_channels; ++ic) {
                    for (std::size_t u = 0; u < k; ++u) {
                        long y = static_cast<long>(i) * stride - pad + static_cast<long>(u);
                        if (y < 0 || y >= static_cast<long>(ih)) continue;
                        for (std::size_t v = 0; v < k; ++v) {
                            long x = static_cast<long>(j) * stride - pad + static_cast<long>(v);
                            if (x < 0 || x >= static_cast<long>(iw)) continue;
                            const std::size_t widx =
                                ((oc * spec.in_channels + ic) * k + u) * k + v;
                            g.weight_grad[widx] +=
                                go * input.at3(ic, static_cast<std::size_t>(y),
                                               static_cast<std::size_t>(x));
                            g.input_grad.at3(ic, static_cast<std::size_t>(y),
                                             static_cast<std::size_t>(x)) +=
                                go * params.weight[widx];
                        }
                    }
                }
            }
        }
    }
    return g;
}

Tensor maxpool2_forward(const Tensor& input) {
    Tensor out(layer_output_shape(maxpool2_spec(), input.shape()));
    const std::size_t c = input.extent(0);
    const std::size_t oh = out.extent(1), ow = out.extent(2);
    for (std::size_t ch = 0; ch < c; ++ch) {
        for (std::size_t i = 0; i < oh; ++i) {
            for (std::size_t j = 0; j < ow; ++j) {
                double best = input.at3(ch, 2 * i, 2 * j);
                best = std::max(best, input.at3(ch, 2 * i, 2 * j + 1));
                best = std::max(best, input.at3(ch, 2 * i + 1, 2 * j));
                best = std::max(best, input.at3(ch, 2 * i + 1, 2 * j + 1));
                out.at3(ch, i, j) = best;
            }
        }
    }
    return out;
}

LayerGrads maxpool2_backward(const Tensor& input, const Tensor& upstream) {
    require_shape(upstream, layer_output_shape(maxpool2_spec(), input.shape()),
                  "maxpool2 upstream");
    LayerGrads g;
    g.input_grad = Tensor(input.shape());
    const std::size_t c = input.extent(0);
    const std::size_t oh = upstream.extent(1), ow = upstream.extent(2);
    for (std::size_t ch = 0; ch < c; ++ch) {
        for (std::size_t i = 0; i < oh; ++i) {
            for (std::size_t j = 0; j < ow; ++j) {
                // First maximum wins in row-major window order.
                std::size_t by = 2 * i, bx = 2 * j;
                double best = input.at3(ch, by, bx);
                const std::size_t ys[2] = {2 * i, 2 * i + 1};
                const std::size_t xs[2] = {2 * j, 2 * j + 1};
                for (std::size_t wy : ys) {
                    for (std::size_t wx : xs) {
                        double v = input.at3(ch, wy, wx);
                        if (v > best) {
                            best = v;
                            by = wy;
                            bx = wx;
                        }
                    }
                }
                g.input_grad.at3(ch, by, bx) += upstream.at3(ch, i, j);
            }
        }
    }
    return g;
}

Tensor gap_forward(const Tensor& input) {
    Tensor out(layer_output_shape(gap_spec(), input.shape()));
    const std::size_t c = input.extent(0);
    const std::size_t hw = input.extent(1) * input.extent(2);
    for (std::size_t ch = 0; ch < c; ++ch) {
        double s = 0.0;
        for (std::size_t p = 0; p < hw; ++p) s += input[ch * hw + p];
        out[ch] = s / static_cast<double>(hw);
    }
    return out;
}

LayerGrads gap_backward(const Tensor& input, const Tensor& upstream) {
    require_shape(upstream, {input.extent(0)}, "gap upstream");
    LayerGrads g;
    g.input_grad = Tensor(input.shape());
    const std::size_t c = input.extent(0);
    const std::size_t hw = input.extent(1) * input.extent(2);
    for (std::size_t ch = 0; ch < c; ++ch) {
        const double share = upstream[ch] / static_cast<double>(hw);
        for (std::size_t p = 0; p < hw; ++p) g.input_grad[ch * hw + p] = share;
    }
    return g;
}

Tensor dense_forward(const LayerSpec& spec, const LayerParams& params,
                     const Tensor& input) {
    check_dense_params(spec, params);
    require_shape(input, {spec.in_units}, "dense input");
    Tensor out({spec.out_units});
    for (std::size_t m = 0; m < spec.out_units; ++m) {
        double acc = params.bias[m];
        for (std::size_t n = 0; n < spec.in_units; ++n)
            acc += params.weight[m * spec.in_units + n] * input[n];
        out[m] = acc;
    }
    return out;
}

LayerGrads dense_backward(const LayerSpec& spec, const LayerParams& params,
                          const Tensor& input, const Tensor& upstream) {
    check_dense_params(spec, params);
    require_shape(input, {spec.in_units}, "dense input");
    require_shape(upstream, {spec.out_units}, "dense upstream");
    LayerGrads g;
    g.input_grad = Tensor(input.shape());
    g.weight_grad = Tensor(params.weight.shape());
    g.bias_grad = Tensor(params.bias.shape());
    for (std::size_t m = 0; m < spec.out_units; ++m) {
        const double go = upstream[m];
        g.bias_grad[m] = go;
        for (std::size_t n = 0; n < spec.in_units; ++n) {
            g.weight_grad[m * spec.in_units + n] = go * input[n];
            g.input_grad[n] += go * params.weight[m * spec.in_units + n];
        }
    }
    return g;
}

}  // namespace

Tensor layer_forward(const LayerSpec& spec, const LayerParams& params,
                     const Tensor& input) {
    switch (spec.kind) {
        case LayerKind::conv2d:
            return conv2d_forward(spec, params, input);
        case LayerKind::relu: {
            Tensor out(input.shape());
            for (std::size_t i = 0; i < input.size(); ++i)
                out[i] = input[i] > 0.0 ? input[i] : 0.0;
            return out;
        }
        case LayerKind::maxpool2:
            return maxpool2_forward(input);
        case LayerKind::gap:
            return gap_forward(input);
        case LayerKind::dense:
            return dense_forward(spec, params, input);
    }
    throw ValueError("layer_forward: unknown layer kind");
}

LayerGrads layer_backward(const LayerSpec& spec, const LayerParams& params,
                          const Tensor& input, const Tensor& upstream) {
    switch (spec.kind) {
        case LayerKind::conv2d:
            return conv2d_backward(spec, params, input, upstream);
        case LayerKind::relu: {
            require_shape(upstream, input.shape(), "relu upstream");
            LayerGrads g;
            g.input_grad = Tensor(input.shape());
            for (std::size_t i = 0; i < input.size(); ++i)
                g.input_grad[i] = input[i] > 0.0 ? upstream[i] : 0.0;
            return g;
        }
        case LayerKind::maxpool2:
            return maxpool2_backward(input, upstream);
        case LayerKind::gap:
            return gap_backward(input, upstream);
        case LayerKind::dense:
            return dense_backward(spec, params, input, upstream);
    }
    throw ValueError("layer_backward: unknown layer kind");
}

std::vector<double> softmax(const std::vector<double>& logits) {
    if (logits.empty()) throw ValueError("softmax: empty input");
    const double m = *std::max_element(logits.begin(), logits.end());
    std::vector<double> out(logits.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        out[i] = std::exp(logits[i] - m);
        sum += out[i];
    }
    for (double& v : out) v /= sum;
    return out;
}

Tensor bilinear_resize(const Tensor& input, std::size_t out_h, std::size_t out_w) {
    if (input.rank() != 2)
        throw ShapeError("bilinear_resize: expected rank-2 input, got " +
                         shape_to_string(input.shape()));
    if (out_h == 0 || out_w == 0)
        throw ValueError("bilinear_resize: output size must be positive");
    const std::size_t sh = input.extent(0), sw = input.extent(1);
    if (sh == 0 || sw == 0)
        throw ValueError("bilinear_resize: input size must be positive");
    Tensor out({out_h, out_w});
    for (std::size_t i = 0; i < out_h; ++i) {
        double y = (static_cast<double>(i) + 0.5) * static_cast<double>(sh) /
                       static_cast<double>(out_h) -
                   0.5;
        y = std::clamp(y, 0.0, static_cast<double>(sh - 1));
        const std::size_t y0 = static_cast<std::size_t>(y);
        const std::size_t y1 = std::min(y0 + 1, sh - 1);
        const double dy = y - static_cast<double>(y0);
        for (std::size_t j = 0; j < out_w; ++j) {
            double x = (static_cast<double>(j) + 0.5) * static_cast<double>(sw) /
                           static_cast<double>(out_w) -
                       0.5;
            x = std::clamp(x, 0.0, static_cast<double>(sw - 1));
            const std::size_t x0 = static_cast<std::size_t>(x);
            const std::size_t x1 = std::min(x0 + 1, sw - 1);
            const double dx = x - static_cast<double>(x0);
            const double c00 = input.at2(y0, x0), c01 = input.at2(y0, x1);
            const double c10 = input.at2(y1, x0), c11 = input.at2(y1, x1);
            const double top = c00 + dx * (c01 - c00);
            const double bot = c10 + dx * (c11 - c10);
            double v = top + dy * (bot - top);
            // Rounding must not push the sample past its corners.
            const double lo = std::min(std::min(c00, c01), std::min(c10, c11));
            const double hi = std::max(std::max(c00, c01), std::max(c10, c11));
            out.at2(i, j) = std::clamp(v, lo, hi);
        }
    }
    return out;
}

}  // namespace camfuse
