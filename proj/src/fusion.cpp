#include "camfuse/fusion.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "camfuse/errors.hpp"

namespace camfuse {

namespace {

double now_seconds() {
    return std::chrono::duration<double>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

void check_unit_range(const Tensor& t, const char* what) {
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (!(t[i] >= 0.0 && t[i] <= 1.0))
            throw ValueError(std::string(what) + ": value outside [0,1]");
    }
}

}  // namespace

SaliencyMap denoise(const SaliencyMap& map, double theta) {
    if (!(theta >= 0.0 && theta < 100.0))
        throw ValueError("denoise: theta must be in [0, 100), got " +
                         std::to_string(theta));
    if (map.values.rank() != 2) throw ShapeError("denoise: expected rank-2 map");
    if (map.values.size() == 0) throw ValueError("denoise: empty map");
    if (theta == 0.0) return map;  // threshold -inf: bit-identical copy

    const std::size_t n = map.values.size();
    // Multiply before dividing so integral percentiles are exact.
    const std::size_t k =
        static_cast<std::size_t>(std::floor(theta * static_cast<double>(n) / 100.0));
    std::vector<double> sorted(map.values.data(), map.values.data() + n);
    std::nth_element(sorted.begin(), sorted.begin() + static_cast<long>(k), sorted.end());
    const double threshold = sorted[k];

    SaliencyMap out{Tensor(map.values.shape())};
    for (std::size_t i = 0; i < n; ++i)
        out.values[i] = map.values[i] >= threshold ? map.values[i] : 0.0;
    return out;
}

double contribution_weight(const MicroCNN& model, const Tensor& image_raw,
                           const SaliencyMap& map, std::size_t c,
                           const Preprocessing& prep) {
    if (c >= model.num_classes())
        throw ValueError("contribution_weight: class index out of range");
    if (image_raw.rank() != 3 || image_raw.extent(0) != 3)
        throw ShapeError("contribution_weight: expected [3, H, W] image");
    if (map.height() != image_raw.extent(1) || map.width() != image_raw.extent(2))
        throw ShapeError("contribution_weight: map " +
                         shape_to_string(map.values.shape()) + " vs image " +
                         shape_to_string(image_raw.shape()));
    const std::size_t hw = map.values.size();
    Tensor masked(image_raw.shape());
    for (std::size_t cc = 0; cc < 3; ++cc)
        for (std::size_t p = 0; p < hw; ++p)
            masked[cc * hw + p] = map.values[p] * image_raw[cc * hw + p];
    const double masked_prob = model.forward(preprocess(masked, prep)).probs[c];
    const double black_prob = model.forward(black_input(prep)).probs[c];
    return masked_prob - black_prob;
}

Tensor combine(const SaliencyMap& degrad, const SaliencyMap& region, double beta_degrad,
               double beta_region, bool clamp) {
    if (!degrad.values.same_shape(region.values))
        throw ShapeError("combine: map shapes differ: " +
                         shape_to_string(degrad.values.shape()) + " vs " +
                         shape_to_string(region.values.shape()));
    const double bd = clamp ? std::max(beta_degrad, 0.0) : beta_degrad;
    const double br = clamp ? std::max(beta_region, 0.0) : beta_region;
    Tensor out(degrad.values.shape());
    if (bd == 0.0 && br == 0.0) {
        // Both contributions vanished: fall back to the plain average so
        // the pipeline still produces a usable map.
        for (std::size_t i = 0; i < out.size(); ++i)
            out[i] = (degrad.values[i] + region.values[i]) / 2.0;
        return out;
    }
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = bd * degrad.values[i] + br * region.values[i];
    return out;
}

std::pair<Tensor, Tensor> reweight(const SaliencyMap& combined, const SaliencyMap& region,
                                   double beta_gradregion, double beta_region,
                                   bool clamp) {
    if (!combined.values.same_shape(region.values))
        throw ShapeError("reweight: map shapes differ");
    check_unit_range(combined.values, "reweight combined");
    check_unit_range(region.values, "reweight region");
    const double bg = clamp ? std::max(beta_gradregion, 0.0) : beta_gradregion;
    const double br = clamp ? std::max(beta_region, 0.0) : beta_region;
    Tensor l1(combined.values.shape());
    Tensor l2(region.values.shape());
    for (std::size_t i = 0; i < l1.size(); ++i) l1[i] = bg * combined.values[i];
    for (std::size_t i = 0; i < l2.size(); ++i) l2[i] = br * region.values[i];
    double m = 0.0;
    for (std::size_t i = 0; i < l1.size(); ++i) m = std::max(m, l1[i]);
    for (std::size_t i = 0; i < l2.size(); ++i) m = std::max(m, l2[i]);
    if (m > 0.0) {
        // One shared divisor keeps the two maps on a common scale.
        for (std::size_t i = 0; i < l1.size(); ++i) l1[i] /= m;
        for (std::size_t i = 0; i < l2.size(); ++i) l2[i] /= m;
    } else {
        for (std::size_t i = 0; i < l1.size(); ++i) l1[i] = 0.0;
        for (std::size_t i = 0; i < l2.size(); ++i) l2[i] = 0.0;
    }
    return {std::move(l1), std::move(l2)};
}

Tensor similarity(const Tensor& l1, const Tensor& l2) {
    if (!l1.same_shape(l2)) throw ShapeError("similarity: map shapes differ");
    check_unit_range(l1, "similarity L1");
    check_unit_range(l2, "similarity L2");
    Tensor out(l1.shape());
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = 1.0 - std::fabs(l1[i] - l2[i]);
    return out;
}

Tensor fuse_raw(const Tensor& l1, const Tensor& l2, const Tensor& sim) {
    if (!l1.same_shape(l2) || !l1.same_shape(sim))
        throw ShapeError("fuse: map shapes differ");
    Tensor out(l1.shape());
    for (std::size_t i = 0; i < out.size(); ++i) {
        const double s = sim[i];
        const double hi = std::max(l1[i], l2[i]);
        const double avg = (l1[i] + l2[i]) / 2.0;
        out[i] = s * hi + (1.0 - s) * avg;
    }
    return out;
}

SaliencyMap fuse(const Tensor& l1, const Tensor& l2, const Tensor& sim) {
    return normalize_map(fuse_raw(l1, l2, sim));
}

FusionResult fusion_cam(const MicroCNN& model, const Tensor& image_raw, std::size_t c,
                        const FusionConfig& config) {
    require_shape(image_raw,
                  {MicroCNN::kInputChannels, MicroCNN::kInputHeight, MicroCNN::kInputWidth},
                  "fusion_cam image");
    FusionResult result;
    FusionDiagnostics diag;
    std::vector<StageTiming>& timings = diag.stage_seconds;
    double t0 = now_seconds();
    auto mark = [&](const char* stage) {
        const double t1 = now_seconds();
        timings.push_back({stage, t1 - t0});
        t0 = t1;
    };

    ForwardTrace trace = model.forward(preprocess(image_raw, config.prep));
    mark("forward");

    SaliencyMap grad = grad_cam(model, trace, c, config.layer);
    mark("grad_cam");

    SaliencyMap degrad = config.skip_denoise ? grad : denoise(grad, config.theta);
    mark("denoise");

    SaliencyMap region =
        score_cam_detail(model, image_raw, c, config.layer, config.prep, &trace).map;
    mark("score_cam");

    ContributionWeights betas;
    betas.degrad = contribution_weight(model, image_raw, degrad, c, config.prep);
    betas.region = contribution_weight(model, image_raw, region, c, config.prep);
    mark("contribution_weights");

    SaliencyMap gradregion = normalize_map(
        combine(degrad, region, betas.degrad, betas.region, config.beta_clamp));
    betas.gradregion = contribution_weight(model, image_raw, gradregion, c, config.prep);
    mark("combine");

    auto [l1, l2] =
        reweight(gradregion, region, betas.gradregion, betas.region, config.beta_clamp);
    Tensor sim = similarity(l1, l2);
    result.map = fuse(l1, l2, sim);
    mark("fuse");

    if (config.record_diagnostics) {
        diag.grad = std::move(grad);
        diag.degrad = std::move(degrad);
        diag.region = std::move(region);
        diag.gradregion = std::move(gradregion);
        diag.weighted_gradregion = std::move(l1);
        diag.weighted_region = std::move(l2);
        diag.similarity = std::move(sim);
        diag.betas = betas;
        result.diagnostics = std::move(diag);
    }
    return result;
}

}  // namespace camfuse
