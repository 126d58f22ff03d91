#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "camfuse/cam.hpp"
#include "camfuse/model.hpp"
#include "camfuse/preprocess.hpp"
#include "camfuse/tensor.hpp"

namespace camfuse {

struct FusionConfig {
    double theta = 10.0;                              // percentile in [0, 100)
    std::size_t layer = MicroCNN::kDefaultCamLayer;   // CAM target layer
    bool beta_clamp = true;                           // clamp betas at zero
    bool skip_denoise = false;                        // bypass the percentile stage
    bool record_diagnostics = false;
    Preprocessing prep{};
};

struct ContributionWeights {
    double degrad = 0.0;
    double region = 0.0;
    double gradregion = 0.0;
};

struct StageTiming {
    std::string stage;
    double seconds = 0.0;
};

// Every intermediate of the pipeline plus weights and wall-clock spent
// per stage.
struct FusionDiagnostics {
    SaliencyMap grad;         // gradient CAM before denoising
    SaliencyMap degrad;       // after percentile denoising
    SaliencyMap region;       // activation-masking CAM
    SaliencyMap gradregion;   // weighted union, normalized
    Tensor weighted_gradregion;  // L1 of the joint rescale
    Tensor weighted_region;      // L2 of the joint rescale
    Tensor similarity;        // 1 - |L1 - L2|
    ContributionWeights betas;
    std::vector<StageTiming> stage_seconds;
};

struct FusionResult {
    SaliencyMap map;
    std::optional<FusionDiagnostics> diagnostics;
};

// Percentile denoising: T is the (k+1)-th smallest map value with
// k = floor(theta/100 * H*W); values >= T survive, the rest become zero.
// theta = 0 keeps everything (threshold -inf). theta must be in [0, 100).
SaliencyMap denoise(const SaliencyMap& map, double theta);

// beta = probs_c(preprocess(map * image_raw)) - probs_c(preprocess(black)).
// The mask multiplies raw [0,1] pixels of all channels before
// preprocessing. Exactly two forward passes. Map and image must share
// spatial dimensions.
double contribution_weight(const MicroCNN& model, const Tensor& image_raw,
                           const SaliencyMap& map, std::size_t c,
                           const Preprocessing& prep = Preprocessing{});

// Weighted union: clamp ? max(beta,0) : beta, then
// out = b_deg * degrad + b_reg * region. If clamping zeroes both weights
// the result falls back to the plain average of the two maps. Output is
// not normalized.
Tensor combine(const SaliencyMap& degrad, const SaliencyMap& region, double beta_degrad,
               double beta_region, bool clamp = true);

// L1 = b_gr * combined, L2 = b_reg * region, then both jointly divided by
// m = max(max L1, max L2) when m > 0 (relative scale preserved); m == 0
// yields two all-zero maps. Inputs must already lie in [0,1].
std::pair<Tensor, Tensor> reweight(const SaliencyMap& combined, const SaliencyMap& region,
                                   double beta_gradregion, double beta_region,
                                   bool clamp = true);

// S = 1 - |L1 - L2| elementwise. Errors if either input leaves [0,1].
Tensor similarity(const Tensor& l1, const Tensor& l2);

// Consensus-gated blend before normalization:
// out = S * max(L1,L2) + (1-S) * (L1+L2)/2.
Tensor fuse_raw(const Tensor& l1, const Tensor& l2, const Tensor& sim);

// fuse_raw followed by min-max normalization.
SaliencyMap fuse(const Tensor& l1, const Tensor& l2, const Tensor& sim);

// Full pipeline: gradient CAM -> denoise -> activation-masking CAM ->
// contribution weights -> weighted union (normalized) -> joint rescale ->
// similarity-gated fusion -> normalize. One shared forward trace feeds
// both CAM stages.
FusionResult fusion_cam(const MicroCNN& model, const Tensor& image_raw, std::size_t c,
                        const FusionConfig& config = FusionConfig{});

}  // namespace camfuse
