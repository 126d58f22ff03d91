#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>

#include "camfuse/errors.hpp"
#include "camfuse/layers.hpp"
#include "camfuse/rng.hpp"
#include "helpers.hpp"

using namespace camfuse;
using testutil::bits_equal;
using testutil::random_tensor;
using testutil::rel_err;

namespace {

// Scalar functional J = sum(upstream * output) lets one backward pass be
// checked against central differences in every coordinate.
double functional(const LayerSpec& spec, const LayerParams& params, const Tensor& input,
                  const Tensor& upstream) {
    const Tensor out = layer_forward(spec, params, input);
    double j = 0.0;
    for (std::size_t i = 0; i < out.size(); ++i) j += upstream[i] * out[i];
    return j;
}

void check_gradients(const LayerSpec& spec, LayerParams params, Tensor input,
                     SplitMix64& rng) {
    const Tensor out = layer_forward(spec, params, input);
    Tensor upstream = random_tensor(out.shape(), rng);
    const LayerGrads grads = layer_backward(spec, params, input, upstream);
    const double h = 1e-6;

    for (std::size_t i = 0; i < input.size(); ++i) {
        const double keep = input[i];
        input[i] = keep + h;
        const double jp = functional(spec, params, input, upstream);
        input[i] = keep - h;
        const double jm = functional(spec, params, input, upstream);
        input[i] = keep;
        const double fd = (jp - jm) / (2.0 * h);
        CAPTURE(i);
        CHECK(rel_err(grads.input_grad[i], fd) < 1e-6);
    }
    if (!spec.has_params()) return;
    for (std::size_t i = 0; i < params.weight.size(); ++i) {
        const double keep = params.weight[i];
        params.weight[i] = keep + h;
        const double jp = functional(spec, params, input, upstream);
        params.weight[i] = keep - h;
        const double jm = functional(spec, params, input, upstream);
        params.weight[i] = keep;
        const double fd = (jp - jm) / (2.0 * h);
        CHECK(rel_err(grads.weight_grad[i], fd) < 1e-6);
    }
    for (std::size_t i = 0; i < params.bias.size(); ++i) {
        const double keep = params.bias[i];
        params.bias[i] = keep + h;
        const double jp = functional(spec, params, input, upstream);
        params.bias[i] = keep - h;
        const double jm = functional(spec, params, input, upstream);
        params.bias[i] = keep;
        const double fd = (jp - jm) / (2.0 * h);
        CHECK(rel_err(grads.bias_grad[i], fd) < 1e-6);
    }
}

LayerParams random_conv_params(const LayerSpec& spec, SplitMix64& rng) {
    LayerParams p;
    p.weight = random_tensor({spec.out_channels, spec.in_channels, spec.kernel, spec.kernel},
                             rng);
    p.bias = random_tensor({spec.out_channels}, rng);
    return p;
}

}  // namespace

TEST_CASE("relu forward and backward on fixed values") {
    Tensor in({3});
    in[0] = -1.0;
    in[1] = 0.0;
    in[2] = 2.0;
    const Tensor out = layer_forward(relu_spec(), {}, in);
    CHECK(out[0] == 0.0);
    CHECK(out[1] == 0.0);
    CHECK(out[2] == 2.0);

    Tensor up({3});
    up[0] = 5.0;
    up[1] = 5.0;
    up[2] = 5.0;
    Tensor neg({3});
    neg[0] = -3.0;
    neg[1] = 1.0;
    neg[2] = -0.5;
    const LayerGrads g = layer_backward(relu_spec(), {}, neg, up);
    CHECK(g.input_grad[0] == 0.0);  // gradient does not pass a negative input
    CHECK(g.input_grad[1] == 5.0);
    CHECK(g.input_grad[2] == 0.0);
}

TEST_CASE("conv2d with 1x1 identity kernel reproduces the input") {
    const LayerSpec spec = conv2d_spec(1, 1, 1, 1, 0);
    LayerParams p;
    p.weight = Tensor({1, 1, 1, 1});
    p.weight[0] = 1.0;
    p.bias = Tensor({1});
    SplitMix64 rng(3);
    const Tensor in = random_tensor({1, 5, 4}, rng);
    const Tensor out = layer_forward(spec, p, in);
    CHECK(bits_equal(in, out));
}

TEST_CASE("3x3 all-ones conv on all-ones 3x3 input, zero padding 1") {
    const LayerSpec spec = conv2d_spec(1, 1, 3, 1, 1);
    LayerParams p;
    p.weight = Tensor({1, 1, 3, 3}, 1.0);
    p.bias = Tensor({1});
    const Tensor in = Tensor({1, 3, 3}, 1.0);
    const Tensor out = layer_forward(spec, p, in);
    // Zero padding: corners see 4 ones, edges 6, the center all 9.
    const double expected[9] = {4, 6, 4, 6, 9, 6, 4, 6, 4};
    for (std::size_t i = 0; i < 9; ++i) CHECK(out[i] == expected[i]);
}

TEST_CASE("conv2d rejects invalid construction") {
    CHECK_THROWS_AS(conv2d_spec(1, 1, 2, 1, 0), ValueError);  // even kernel
    CHECK_THROWS_AS(conv2d_spec(1, 1, 3, 0, 0), ValueError);  // zero stride
    CHECK_THROWS_AS(conv2d_spec(0, 1, 3, 1, 0), ValueError);
}

TEST_CASE("conv2d rejects mismatched input channels") {
    const LayerSpec spec = conv2d_spec(2, 1, 3, 1, 1);
    SplitMix64 rng(4);
    const LayerParams p = random_conv_params(spec, rng);
    const Tensor in = random_tensor({3, 4, 4}, rng);
    CHECK_THROWS_AS(layer_forward(spec, p, in), ShapeError);
}

TEST_CASE("maxpool2 backward ties route to the first window entry in row-major order") {
    Tensor in({1, 2, 2}, 1.0);  // all four equal
    Tensor up({1, 1, 1});
    up[0] = 7.0;
    const LayerGrads g = layer_backward(maxpool2_spec(), {}, in, up);
    CHECK(g.input_grad[0] == 7.0);
    CHECK(g.input_grad[1] == 0.0);
    CHECK(g.input_grad[2] == 0.0);
    CHECK(g.input_grad[3] == 0.0);
}

TEST_CASE("gap backward spreads the upstream value uniformly") {
    Tensor in({1, 2, 2});
    Tensor up({1});
    up[0] = 1.0;
    const LayerGrads g = layer_backward(gap_spec(), {}, in, up);
    for (std::size_t i = 0; i < 4; ++i) CHECK(g.input_grad[i] == 0.25);
}

TEST_CASE("conv2d parameter gradient matches finite differences on a random 4x4 input") {
    SplitMix64 rng(11);
    const LayerSpec spec = conv2d_spec(2, 3, 3, 1, 1);
    check_gradients(spec, random_conv_params(spec, rng), random_tensor({2, 4, 4}, rng),
                    rng);
}

TEST_CASE("every layer kind matches central finite differences on randomized instances") {
    SplitMix64 rng(99);
    // conv2d: varied channels, kernel, stride, padding.
    for (int rep = 0; rep < 30; ++rep) {
        const std::size_t ic = 1 + rng.next_below(3);
        const std::size_t oc = 1 + rng.next_below(3);
        const std::size_t k = rng.next_below(2) ? 1 : 3;
        const std::size_t stride = 1 + rng.next_below(2);
        const std::size_t pad = rng.next_below(2);
        const std::size_t h = k + rng.next_below(4);
        const std::size_t w = k + rng.next_below(4);
        const LayerSpec spec = conv2d_spec(ic, oc, k, stride, pad);
        check_gradients(spec, random_conv_params(spec, rng), random_tensor({ic, h, w}, rng),
                        rng);
    }
    // relu: keep inputs away from the kink where the derivative jumps.
    for (int rep = 0; rep < 25; ++rep) {
        Tensor in = random_tensor({2, 3, 3}, rng);
        for (std::size_t i = 0; i < in.size(); ++i)
            if (std::fabs(in[i]) < 1e-3) in[i] = 0.5;
        check_gradients(relu_spec(), {}, in, rng);
    }
    // maxpool2: distinct values avoid argmax flips under the probe step.
    for (int rep = 0; rep < 25; ++rep) {
        const std::size_t c = 1 + rng.next_below(2);
        Tensor in = random_tensor({c, 4, 6}, rng);
        check_gradients(maxpool2_spec(), {}, in, rng);
    }
    for (int rep = 0; rep < 25; ++rep)
        check_gradients(gap_spec(), {}, random_tensor({3, 2, 4}, rng), rng);
    for (int rep = 0; rep < 25; ++rep) {
        const std::size_t n = 2 + rng.next_below(5);
        const std::size_t m = 2 + rng.next_below(4);
        const LayerSpec spec = dense_spec(n, m);
        LayerParams p;
        p.weight = random_tensor({m, n}, rng);
        p.bias = random_tensor({m}, rng);
        check_gradients(spec, std::move(p), random_tensor({n}, rng), rng);
    }
}

TEST_CASE("softmax fixed values") {
    const std::vector<double> half = softmax({0.0, 0.0});
    CHECK(half[0] == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(half[1] == doctest::Approx(0.5).epsilon(1e-15));

    const std::vector<double> thirds = softmax({std::log(2.0), 0.0});
    CHECK(std::fabs(thirds[0] - 2.0 / 3.0) < 1e-12);
    CHECK(std::fabs(thirds[1] - 1.0 / 3.0) < 1e-12);
}

TEST_CASE("softmax is shift invariant and sums to one") {
    SplitMix64 rng(5);
    for (int rep = 0; rep < 200; ++rep) {
        const std::size_t n = 2 + rng.next_below(6);
        std::vector<double> logits(n);
        for (double& v : logits) v = rng.next_range(-30.0, 30.0);
        const std::vector<double> base = softmax(logits);
        double sum = 0.0;
        for (double v : base) sum += v;
        CHECK(std::fabs(sum - 1.0) < 1e-12);

        const double shift = rng.next_range(-100.0, 100.0);
        std::vector<double> shifted = logits;
        for (double& v : shifted) v += shift;
        const std::vector<double> moved = softmax(shifted);
        for (std::size_t i = 0; i < n; ++i) CHECK(std::fabs(base[i] - moved[i]) < 1e-12);
    }
}

TEST_CASE("softmax rejects empty input") {
    CHECK_THROWS_AS(softmax({}), ValueError);
}

TEST_CASE("softmax stays finite for extreme logits") {
    const std::vector<double> out = softmax({1000.0, -1000.0, 999.0});
    double sum = 0.0;
    for (double v : out) {
        CHECK(std::isfinite(v));
        sum += v;
    }
    CHECK(std::fabs(sum - 1.0) < 1e-12);
}

TEST_CASE("bilinear resize of a constant map is exactly constant") {
    const Tensor in({3, 5}, 0.37);
    const Tensor out = bilinear_resize(in, 7, 11);
    for (std::size_t i = 0; i < out.size(); ++i) CHECK(out[i] == 0.37);
}

TEST_CASE("bilinear resize of a 1x1 map fills the output with its value") {
    Tensor in({1, 1});
    in[0] = -2.5;
    const Tensor out = bilinear_resize(in, 4, 6);
    for (std::size_t i = 0; i < out.size(); ++i) CHECK(out[i] == -2.5);
}

TEST_CASE("bilinear 2x2 -> 4x4 equals direct evaluation of the sampling formula") {
    Tensor in({2, 2});
    in.at2(0, 0) = 0.0;
    in.at2(0, 1) = 1.0;
    in.at2(1, 0) = 0.0;
    in.at2(1, 1) = 1.0;
    const Tensor out = bilinear_resize(in, 4, 4);
    // Source x for output j: (j+0.5)/2 - 0.5 = -0.25, 0.25, 0.75, 1.25,
    // clamped to [0,1]; interpolating 0 -> 1 gives these row values.
    const double expected[4] = {0.0, 0.25, 0.75, 1.0};
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 4; ++j) CHECK(out.at2(i, j) == expected[j]);
}

TEST_CASE("bilinear resize respects global min and max bounds") {
    SplitMix64 rng(17);
    for (int rep = 0; rep < 50; ++rep) {
        const std::size_t sh = 1 + rng.next_below(8);
        const std::size_t sw = 1 + rng.next_below(8);
        const std::size_t oh = 1 + rng.next_below(40);
        const std::size_t ow = 1 + rng.next_below(40);
        const Tensor in = random_tensor({sh, sw}, rng, -3.0, 3.0);
        const Tensor out = bilinear_resize(in, oh, ow);
        const double lo = in.min_value();
        const double hi = in.max_value();
        for (std::size_t i = 0; i < out.size(); ++i) {
            CHECK(out[i] >= lo);
            CHECK(out[i] <= hi);
        }
    }
}

TEST_CASE("bilinear resize validates its arguments") {
    CHECK_THROWS_AS(bilinear_resize(Tensor({2, 2}), 0, 3), ValueError);
    CHECK_THROWS_AS(bilinear_resize(Tensor({2, 2, 2}), 3, 3), ShapeError);
}

TEST_CASE("kernels are bit-deterministic across repeated runs") {
    SplitMix64 rng(23);
    const LayerSpec spec = conv2d_spec(3, 4, 3, 2, 1);
    const LayerParams p = random_conv_params(spec, rng);
    const Tensor in = random_tensor({3, 9, 7}, rng);
    const Tensor a = layer_forward(spec, p, in);
    const Tensor b = layer_forward(spec, p, in);
    CHECK(bits_equal(a, b));

    const Tensor up = random_tensor(a.shape(), rng);
    const LayerGrads g1 = layer_backward(spec, p, in, up);
    const LayerGrads g2 = layer_backward(spec, p, in, up);
    CHECK(bits_equal(g1.input_grad, g2.input_grad));
    CHECK(bits_equal(g1.weight_grad, g2.weight_grad));

    const Tensor map = random_tensor({9, 7}, rng);
    CHECK(bits_equal(bilinear_resize(map, 32, 32), bilinear_resize(map, 32, 32)));
}

TEST_CASE("layer outputs stay finite for finite inputs") {
    SplitMix64 rng(31);
    for (int rep = 0; rep < 20; ++rep) {
        const LayerSpec spec = conv2d_spec(2, 2, 3, 1, 1);
        const LayerParams p = random_conv_params(spec, rng);
        const Tensor in = random_tensor({2, 6, 6}, rng, -100.0, 100.0);
        CHECK(layer_forward(spec, p, in).all_finite());
        CHECK(layer_forward(maxpool2_spec(), {}, in).all_finite());
        CHECK(layer_forward(gap_spec(), {}, in).all_finite());
    }
}
