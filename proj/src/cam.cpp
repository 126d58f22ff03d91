#include "camfuse/cam.hpp"

#include <cmath>

#include "camfuse/errors.hpp"
#include "camfuse/layers.hpp"

namespace camfuse {

SaliencyMap normalize_map(const Tensor& raw) {
    if (raw.rank() != 2)
        throw ShapeError("normalize_map: expected rank-2 map, got " +
                         shape_to_string(raw.shape()));
    if (raw.size() == 0) throw ValueError("normalize_map: empty map");
    if (!raw.all_finite()) throw ValueError("normalize_map: non-finite values");
    const double lo = raw.min_value();
    const double hi = raw.max_value();
    SaliencyMap out{Tensor(raw.shape())};
    if (hi == lo) return out;  // constant map -> all zeros
    const double span = hi - lo;
    for (std::size_t i = 0; i < raw.size(); ++i) out.values[i] = (raw[i] - lo) / span;
    return out;
}

Tensor weighted_channel_sum_relu(const Tensor& activations,
                                 const std::vector<double>& weights) {
    if (activations.rank() != 3)
        throw ShapeError("weighted_channel_sum_relu: expected [K, h, w], got " +
                         shape_to_string(activations.shape()));
    if (activations.extent(0) != weights.size())
        throw ShapeError("weighted_channel_sum_relu: " +
                         std::to_string(weights.size()) + " weights for " +
                         std::to_string(activations.extent(0)) + " channels");
    const std::size_t k = activations.extent(0);
    const std::size_t hw = activations.extent(1) * activations.extent(2);
    Tensor out({activations.extent(1), activations.extent(2)});
    for (std::size_t p = 0; p < hw; ++p) {
        double acc = 0.0;
        for (std::size_t ch = 0; ch < k; ++ch) acc += weights[ch] * activations[ch * hw + p];
        out[p] = acc > 0.0 ? acc : 0.0;
    }
    return out;
}

namespace {

void check_cam_args(const MicroCNN& model, std::size_t c, std::size_t layer) {
    if (c >= model.num_classes()) throw ValueError("cam: class index out of range");
    if (!model.layer_is_spatial(layer))
        throw ValueError("cam: layer " + std::to_string(layer) +
                         " has no spatial output");
}

}  // namespace

SaliencyMap grad_cam(const MicroCNN& model, const ForwardTrace& trace, std::size_t c,
                     std::size_t layer) {
    check_cam_args(model, c, layer);
    const Tensor& acts = trace.activations[layer];
    const Tensor grads = model.grad_wrt_layer(trace, c, layer);
    const std::size_t k = acts.extent(0);
    const std::size_t hw = acts.extent(1) * acts.extent(2);
    std::vector<double> alpha(k);
    for (std::size_t ch = 0; ch < k; ++ch) {
        double s = 0.0;
        for (std::size_t p = 0; p < hw; ++p) s += grads[ch * hw + p];
        alpha[ch] = s / static_cast<double>(hw);
    }
    Tensor raw = weighted_channel_sum_relu(acts, alpha);
    Tensor up = bilinear_resize(raw, MicroCNN::kInputHeight, MicroCNN::kInputWidth);
    return normalize_map(up);
}

SaliencyMap grad_cam(const MicroCNN& model, const Tensor& image_raw, std::size_t c,
                     std::size_t layer, const Preprocessing& prep) {
    ForwardTrace trace = model.forward(preprocess(image_raw, prep));
    return grad_cam(model, trace, c, layer);
}

ScoreCamResult score_cam_detail(const MicroCNN& model, const Tensor& image_raw,
                                std::size_t c, std::size_t layer,
                                const Preprocessing& prep, const ForwardTrace* trace) {
    check_cam_args(model, c, layer);
    require_shape(image_raw,
                  {MicroCNN::kInputChannels, MicroCNN::kInputHeight, MicroCNN::kInputWidth},
                  "score_cam image");
    ForwardTrace own;
    if (!trace) {
        own = model.forward(preprocess(image_raw, prep));
        trace = &own;
    }
    const Tensor& acts = trace->activations[layer];
    const std::size_t k = acts.extent(0);
    const std::size_t ah = acts.extent(1), aw = acts.extent(2);
    const std::size_t ih = MicroCNN::kInputHeight, iw = MicroCNN::kInputWidth;
    const std::size_t hw = ih * iw;

    ScoreCamResult result;
    // Black baseline probability: computed once, reused for every channel.
    result.baseline_prob = model.forward(black_input(prep)).probs[c];

    Tensor masks({k, ih, iw});
    result.channel_weights.resize(k);
    for (std::size_t ch = 0; ch < k; ++ch) {
        Tensor plane({ah, aw});
        for (std::size_t p = 0; p < ah * aw; ++p) plane[p] = acts[ch * ah * aw + p];
        SaliencyMap mask = normalize_map(bilinear_resize(plane, ih, iw));
        Tensor masked({3, ih, iw});
        for (std::size_t cc = 0; cc < 3; ++cc)
            for (std::size_t p = 0; p < hw; ++p)
                masked[cc * hw + p] = mask.values[p] * image_raw[cc * hw + p];
        const double prob = model.forward(preprocess(masked, prep)).probs[c];
        result.channel_weights[ch] = prob - result.baseline_prob;
        for (std::size_t p = 0; p < hw; ++p) masks[ch * hw + p] = mask.values[p];
    }
    Tensor raw = weighted_channel_sum_relu(masks, result.channel_weights);
    result.map = normalize_map(raw);
    return result;
}

SaliencyMap score_cam(const MicroCNN& model, const Tensor& image_raw, std::size_t c,
                      std::size_t layer, const Preprocessing& prep) {
    return score_cam_detail(model, image_raw, c, layer, prep, nullptr).map;
}

}  // namespace camfuse
