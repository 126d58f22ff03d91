#include "camfuse/model.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>

#include "camfuse/errors.hpp"
#include "camfuse/rng.hpp"

namespace camfuse {

MicroCNN::MicroCNN(std::size_t num_classes) : num_classes_(num_classes) {
    if (num_classes_ < 2) throw ValueError("MicroCNN: need at least 2 classes");
    layers_ = {
        conv2d_spec(kInputChannels, 8, 3, 1, 1),
        relu_spec(),
        maxpool2_spec(),
        conv2d_spec(8, 16, 3, 1, 1),
        relu_spec(),
        maxpool2_spec(),
        gap_spec(),
        dense_spec(16, num_classes_),
    };
    params_.resize(layers_.size());
    for (std::size_t i = 0; i < layers_.size(); ++i) {
        const LayerSpec& s = layers_[i];
        if (s.kind == LayerKind::conv2d) {
            params_[i].weight =
                Tensor({s.out_channels, s.in_channels, s.kernel, s.kernel});
            params_[i].bias = Tensor({s.out_channels});
        } else if (s.kind == LayerKind::dense) {
            params_[i].weight = Tensor({s.out_units, s.in_units});
            params_[i].bias = Tensor({s.out_units});
        }
    }
}

void MicroCNN::init_params(std::uint64_t seed) {
    SplitMix64 rng(seed);
    for (std::size_t i = 0; i < layers_.size(); ++i) {
        const LayerSpec& s = layers_[i];
        if (!s.has_params()) continue;
        std::size_t fan_in, fan_out;
        if (s.kind == LayerKind::conv2d) {
            fan_in = s.in_channels * s.kernel * s.kernel;
            fan_out = s.out_channels * s.kernel * s.kernel;
        } else {
            fan_in = s.in_units;
            fan_out = s.out_units;
        }
        const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
        for (std::size_t j = 0; j < params_[i].weight.size(); ++j)
            params_[i].weight[j] = rng.next_range(-limit, limit);
        for (std::size_t j = 0; j < params_[i].bias.size(); ++j)
            params_[i].bias[j] = 0.0;
    }
}

ForwardTrace MicroCNN::forward(const Tensor& input) const {
    require_shape(input, {kInputChannels, kInputHeight, kInputWidth}, "MicroCNN input");
    forward_calls_.fetch_add(1, std::memory_order_relaxed);
    ForwardTrace trace;
    trace.activations.reserve(layers_.size());
    const Tensor* cur = &input;
    for (std::size_t i = 0; i < layers_.size(); ++i) {
        trace.activations.push_back(layer_forward(layers_[i], params_[i], *cur));
        cur = &trace.activations.back();
    }
    const Tensor& logits = trace.activations.back();
    trace.probs = softmax({logits.data(), logits.data() + logits.size()});
    return trace;
}

std::vector<double> MicroCNN::forward_from(std::size_t layer,
                                           const Tensor& activation) const {
    if (layer >= layers_.size())
        throw ValueError("forward_from: layer index out of range");
    forward_calls_.fetch_add(1, std::memory_order_relaxed);
    Tensor cur = activation;
    for (std::size_t i = layer + 1; i < layers_.size(); ++i)
        cur = layer_forward(layers_[i], params_[i], cur);
    return softmax({cur.data(), cur.data() + cur.size()});
}

bool MicroCNN::layer_is_spatial(std::size_t layer) const {
    if (layer >= layers_.size()) return false;
    switch (layers_[layer].kind) {
        case LayerKind::conv2d:
        case LayerKind::relu:
        case LayerKind::maxpool2:
            return true;
        default:
            return false;
    }
}

std::vector<LayerParams> MicroCNN::backward_impl(
    const ForwardTrace& trace, const Tensor& input,
    const std::vector<double>& logit_grad, long stop_layer, Tensor* act_grad_out,
    bool want_param_grads) const {
    if (trace.activations.size() != layers_.size())
        throw ValueError("backward: trace does not match architecture");
    std::vector<LayerParams> param_grads;
    if (want_param_grads) param_grads.resize(layers_.size());
    Tensor upstream({num_classes_});
    for (std::size_t i = 0; i < num_classes_; ++i) upstream[i] = logit_grad[i];
    for (long i = static_cast<long>(layers_.size()) - 1; i > stop_layer; --i) {
        const Tensor& layer_in =
            (i == 0) ? input : trace.activations[static_cast<std::size_t>(i - 1)];
        LayerGrads g = layer_backward(layers_[static_cast<std::size_t>(i)],
                                      params_[static_cast<std::size_t>(i)], layer_in,
                                      upstream);
        if (want_param_grads && layers_[static_cast<std::size_t>(i)].has_params()) {
            param_grads[static_cast<std::size_t>(i)].weight = std::move(g.weight_grad);
            param_grads[static_cast<std::size_t>(i)].bias = std::move(g.bias_grad);
        }
        upstream = std::move(g.input_grad);
    }
    if (act_grad_out) *act_grad_out = std::move(upstream);
    return param_grads;
}

Tensor MicroCNN::grad_wrt_layer(const ForwardTrace& trace, std::size_t c,
                                std::size_t layer) const {
    if (c >= num_classes_) throw ValueError("grad_wrt_layer: class index out of range");
    if (!layer_is_spatial(layer))
        throw ValueError("grad_wrt_layer: layer " + std::to_string(layer) +
                         " has no spatial output");
    // d probs[c] / d logits_j = probs[c] * ([j == c] - probs[j]).
    std::vector<double> logit_grad(num_classes_);
    for (std::size_t j = 0; j < num_classes_; ++j)
        logit_grad[j] = trace.probs[c] * ((j == c ? 1.0 : 0.0) - trace.probs[j]);
    Tensor act_grad;
    backward_impl(trace, Tensor(), logit_grad, static_cast<long>(layer), &act_grad,
                  false);
    return act_grad;
}

std::vector<LayerParams> MicroCNN::grad_wrt_params(const ForwardTrace& trace,
                                                   std::size_t c,
                                                   const Tensor& input) const {
    if (c >= num_classes_) throw ValueError("grad_wrt_params: class index out of range");
    std::vector<double> logit_grad(num_classes_);
    for (std::size_t j = 0; j < num_classes_; ++j)
        logit_grad[j] = trace.probs[c] * ((j == c ? 1.0 : 0.0) - trace.probs[j]);
    return backward_impl(trace, input, logit_grad, -1, nullptr, true);
}

std::vector<LayerParams> MicroCNN::param_grads_from_logit_grad(
    const ForwardTrace& trace, const Tensor& input,
    const std::vector<double>& logit_grad) const {
    return backward_impl(trace, input, logit_grad, -1, nullptr, true);
}

namespace {

constexpr char kMagic[4] = {'C', 'A', 'M', 'F'};
constexpr std::uint32_t kVersion = 1;

void write_u32(std::ofstream& out, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v & 0xFF),
                          static_cast<unsigned char>((v >> 8) & 0xFF),
                          static_cast<unsigned char>((v >> 16) & 0xFF),
                          static_cast<unsigned char>((v >> 24) & 0xFF)};
    out.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t read_u32(std::ifstream& in, const std::string& what) {
    unsigned char b[4];
    if (!in.read(reinterpret_cast<char*>(b), 4))
        throw FormatError("weight file truncated while reading " + what);
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) |
           (static_cast<std::uint32_t>(b[3]) << 24);
}

void write_f64(std::ofstream& out, double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((bits >> (8 * i)) & 0xFF);
    out.write(reinterpret_cast<const char*>(b), 8);
}

double read_f64(std::ifstream& in, const std::string& what) {
    unsigned char b[8];
    if (!in.read(reinterpret_cast<char*>(b), 8))
        throw FormatError("weight file truncated while reading " + what);
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
}

void write_record(std::ofstream& out, const Tensor& t) {
    write_u32(out, static_cast<std::uint32_t>(t.rank()));
    for (std::size_t d : t.shape()) write_u32(out, static_cast<std::uint32_t>(d));
    for (std::size_t i = 0; i < t.size(); ++i) write_f64(out, t[i]);
}

Tensor read_record(std::ifstream& in, const std::string& what) {
    const std::uint32_t rank = read_u32(in, what + " rank");
    if (rank == 0 || rank > 8)
        throw FormatError("weight file: implausible rank " + std::to_string(rank) +
                          " for " + what);
    std::vector<std::size_t> shape(rank);
    for (std::uint32_t i = 0; i < rank; ++i) shape[i] = read_u32(in, what + " dims");
    Tensor t(shape);
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = read_f64(in, what + " values");
    return t;
}

}  // namespace

void save_weights(const MicroCNN& model, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open weight file for writing: " + path);
    out.write(kMagic, 4);
    write_u32(out, kVersion);
    std::uint32_t records = 0;
    for (const LayerSpec& s : model.layers())
        if (s.has_params()) records += 2;
    write_u32(out, records);
    for (std::size_t i = 0; i < model.layers().size(); ++i) {
        if (!model.layers()[i].has_params()) continue;
        write_record(out, model.params()[i].weight);
        write_record(out, model.params()[i].bias);
    }
    if (!out) throw IoError("failed writing weight file: " + path);
}

MicroCNN load_weights(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open weight file: " + path);
    char magic[4];
    if (!in.read(magic, 4)) throw FormatError("weight file truncated while reading magic");
    if (std::memcmp(magic, kMagic, 4) != 0)
        throw FormatError("weight file has bad magic (expected CAMF)");
    const std::uint32_t version = read_u32(in, "version");
    if (version != kVersion)
        throw VersionError("weight file version " + std::to_string(version) +
                           " unsupported (expected " + std::to_string(kVersion) + ")");
    const std::uint32_t records = read_u32(in, "record count");
    if (records != 6)
        throw ArchitectureError("weight file has " + std::to_string(records) +
                                " records, fixed architecture expects 6");
    Tensor w1 = read_record(in, "conv1 weight");
    Tensor b1 = read_record(in, "conv1 bias");
    Tensor w2 = read_record(in, "conv2 weight");
    Tensor b2 = read_record(in, "conv2 bias");
    Tensor wd = read_record(in, "dense weight");
    Tensor bd = read_record(in, "dense bias");

    auto check = [](const Tensor& t, const std::vector<std::size_t>& expected,
                    const std::string& what) {
        if (t.shape() != expected)
            throw ArchitectureError("weight file: " + what + " has shape " +
                                    shape_to_string(t.shape()) + ", architecture expects " +
                                    shape_to_string(expected));
    };
    check(w1, {8, 3, 3, 3}, "conv1 weight");
    check(b1, {8}, "conv1 bias");
    check(w2, {16, 8, 3, 3}, "conv2 weight");
    check(b2, {16}, "conv2 bias");
    if (wd.rank() != 2 || wd.extent(1) != 16 || wd.extent(0) < 2)
        throw ArchitectureError("weight file: dense weight has shape " +
                                shape_to_string(wd.shape()) +
                                ", architecture expects [C>=2, 16]");
    const std::size_t num_classes = wd.extent(0);
    check(bd, {num_classes}, "dense bias");

    MicroCNN model(num_classes);
    model.params()[0] = {std::move(w1), std::move(b1)};
    model.params()[3] = {std::move(w2), std::move(b2)};
    model.params()[7] = {std::move(wd), std::move(bd)};
    return model;
}

}  // namespace camfuse
