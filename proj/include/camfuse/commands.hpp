#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "camfuse/cam.hpp"
#include "camfuse/fusion.hpp"
#include "camfuse/model.hpp"
#include "camfuse/tensor.hpp"

namespace camfuse::cli {

inline constexpr int kReportFormatVersion = 1;

inline const std::vector<std::string> kKnownMethods = {"grad-cam", "score-cam",
                                                       "fusion-cam"};

// One labeled image loaded from a dataset directory.
struct DatasetEntry {
    std::string filename;
    int label = 0;
    Tensor image;                 // [3, 32, 32] raw [0,1]
    std::optional<Tensor> mask;   // rank-2 binary, when masks/ has a file
};

// Reads labels.tsv (filename<TAB>class_index per line), images/<name> and
// optional masks/<name>. Throws IoError listing every offending file.
std::vector<DatasetEntry> load_dataset_dir(const std::string& dir);

struct GenDataOptions {
    std::string out_dir;
    std::size_t n_train = 800;
    std::size_t n_test = 100;
    std::uint64_t seed = 42;
    double noise = 0.05;
};
void cmd_gen_data(const GenDataOptions& opts);

struct TrainOptions {
    std::string data_dir;
    std::string weights;  // output path
    std::string out_dir;  // training log location; defaults next to weights
    std::size_t epochs = 30;
    double learning_rate = 0.05;
    std::size_t batch_size = 16;
    std::uint64_t seed = 42;
};
void cmd_train(const TrainOptions& opts);

struct ExplainOptions {
    std::string weights;
    std::string image;
    std::string out_dir = ".";
    double theta = 10.0;
    std::size_t layer = MicroCNN::kDefaultCamLayer;
    int target_class = -1;  // -1: use the argmax prediction
    bool diagnostics = false;
};
// Writes <stem>_fusion.png, with --diagnostics also input/grad/degrad/
// region/gradregion/similarity renderings, plus <stem>_explain.json.
void cmd_explain(const ExplainOptions& opts);

struct EvaluateOptions {
    std::string weights;
    std::string data_dir;
    std::string out_dir = ".";
    double theta = 10.0;
    std::size_t layer = MicroCNN::kDefaultCamLayer;
    std::vector<std::string> methods = kKnownMethods;
    std::uint64_t seed = 42;
};
// Writes report.json (deterministic) and timings.json (wall-clock).
void cmd_evaluate(const EvaluateOptions& opts);

struct SweepThetaOptions {
    std::string weights;
    std::string data_dir;
    std::string out_dir = ".";
    std::size_t layer = MicroCNN::kDefaultCamLayer;
    std::size_t limit = 0;  // 0: all images
    std::uint64_t seed = 42;
};
// Ten rows, theta in {0,10,...,90}: average drop, average increase and
// mean overall score of the fused maps. Writes sweep.json and prints the
// table.
void cmd_sweep_theta(const SweepThetaOptions& opts);

struct AblateOptions {
    std::string weights;
    std::string data_dir;  // dataset mode: AD/AI per setting
    std::string image;     // image mode: per-setting map renderings
    std::string out_dir = ".";
    double theta = 10.0;
    std::size_t layer = MicroCNN::kDefaultCamLayer;
    int target_class = -1;  // image mode only
    std::uint64_t seed = 42;
};
void cmd_ablate(const AblateOptions& opts);

// The four pipeline stages compared by cmd_ablate:
//   1: plain sum of the two CAMs, 2: + percentile denoising,
//   3: + contribution-weighted union, 4: full similarity-gated fusion.
// Setting 4 is exactly fusion_cam.
SaliencyMap ablation_map(int setting, const MicroCNN& model, const Tensor& image_raw,
                         std::size_t c, const FusionConfig& config);

}  // namespace camfuse::cli
