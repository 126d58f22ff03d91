#include "camfuse/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "camfuse/dataset.hpp"
#include "camfuse/errors.hpp"
#include "camfuse/image_io.hpp"
#include "camfuse/json_out.hpp"
#include "camfuse/metrics.hpp"
#include "camfuse/preprocess.hpp"
#include "camfuse/train.hpp"

namespace fs = std::filesystem;

namespace camfuse::cli {

namespace {

double now_seconds() {
    return std::chrono::duration<double>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create directory " + dir + ": " + ec.message());
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open file for writing: " + path);
    out << text;
    if (!out) throw IoError("failed writing file: " + path);
}

std::string image_filename(std::size_t index) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "img_%05zu.png", index);
    return buf;
}

std::size_t argmax_prob(const std::vector<double>& probs) {
    return static_cast<std::size_t>(
        std::max_element(probs.begin(), probs.end()) - probs.begin());
}

void check_theta(double theta) {
    if (!(theta >= 0.0 && theta < 100.0))
        throw UsageError("theta must be in [0, 100), got " + std::to_string(theta));
}

void check_layer(const MicroCNN& model, std::size_t layer) {
    if (!model.layer_is_spatial(layer))
        throw UsageError("layer " + std::to_string(layer) +
                         " has no spatial output (valid: 0..5)");
}

void check_class(const MicroCNN& model, int target_class) {
    if (target_class >= 0 &&
        static_cast<std::size_t>(target_class) >= model.num_classes())
        throw UsageError("class " + std::to_string(target_class) +
                         " out of range for model with " +
                         std::to_string(model.num_classes()) + " classes");
}

// probs[c] on the full image and on the map-masked image; the masking
// convention matches the contribution weights (raw pixels, all channels).
ScorePair masked_score_pair(const MicroCNN& model, const Tensor& image_raw,
                            const SaliencyMap& map, std::size_t c,
                            const Preprocessing& prep) {
    ScorePair pair;
    pair.y = model.forward(preprocess(image_raw, prep)).probs[c];
    const std::size_t hw = map.values.size();
    Tensor masked(image_raw.shape());
    for (std::size_t cc = 0; cc < 3; ++cc)
        for (std::size_t p = 0; p < hw; ++p)
            masked[cc * hw + p] = map.values[p] * image_raw[cc * hw + p];
    pair.o = model.forward(preprocess(masked, prep)).probs[c];
    return pair;
}

SaliencyMap method_map(const std::string& method, const MicroCNN& model,
                       const Tensor& image_raw, std::size_t c,
                       const FusionConfig& config) {
    if (method == "grad-cam")
        return grad_cam(model, image_raw, c, config.layer, config.prep);
    if (method == "score-cam")
        return score_cam(model, image_raw, c, config.layer, config.prep);
    if (method == "fusion-cam") return fusion_cam(model, image_raw, c, config).map;
    throw UsageError("unknown method: " + method +
                     " (expected grad-cam, score-cam or fusion-cam)");
}

JsonValue methods_json(const std::vector<std::string>& methods) {
    JsonValue arr = JsonValue::array();
    for (const std::string& m : methods) arr.push_back(m);
    return arr;
}

}  // namespace

std::vector<DatasetEntry> load_dataset_dir(const std::string& dir) {
    const fs::path root(dir);
    const fs::path labels_path = root / "labels.tsv";
    std::ifstream labels(labels_path);
    if (!labels)
        throw IoError("cannot open labels file: " + labels_path.string());

    std::vector<DatasetEntry> entries;
    std::vector<std::string> bad;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(labels, line)) {
        ++line_no;
        if (line.empty()) continue;
        const std::size_t tab = line.find('\t');
        bool malformed = tab == std::string::npos || tab == 0 || tab + 1 >= line.size();
        int label = -1;
        if (!malformed) {
            try {
                std::size_t used = 0;
                label = std::stoi(line.substr(tab + 1), &used);
                if (used != line.size() - tab - 1 || label < 0) malformed = true;
            } catch (const std::exception&) {
                malformed = true;
            }
        }
        if (malformed) {
            bad.push_back(labels_path.string() + ":" + std::to_string(line_no) +
                          " (malformed line)");
            continue;
        }
        DatasetEntry entry;
        entry.filename = line.substr(0, tab);
        entry.label = label;
        const fs::path img_path = root / "images" / entry.filename;
        try {
            entry.image = resize_raw(load_image(img_path.string()),
                                     MicroCNN::kInputHeight, MicroCNN::kInputWidth);
        } catch (const Error& e) {
            bad.push_back(img_path.string() + " (" + e.what() + ")");
            continue;
        }
        const fs::path mask_path = root / "masks" / entry.filename;
        if (fs::exists(mask_path)) {
            try {
                entry.mask = load_mask_png(mask_path.string());
            } catch (const Error& e) {
                bad.push_back(mask_path.string() + " (" + e.what() + ")");
                continue;
            }
        }
        entries.push_back(std::move(entry));
    }
    if (!bad.empty()) {
        std::string msg = "dataset has unreadable or malformed files:";
        for (const std::string& b : bad) msg += "\n  " + b;
        throw IoError(msg);
    }
    if (entries.empty())
        throw IoError("dataset is empty: " + labels_path.string());
    return entries;
}

void cmd_gen_data(const GenDataOptions& opts) {
    if (opts.out_dir.empty()) throw UsageError("gen-data requires --out-dir");
    if (opts.n_train == 0 && opts.n_test == 0)
        throw UsageError("gen-data: nothing to generate");
    const ShapesDataset ds =
        gen_shapes_dataset(opts.n_train + opts.n_test, opts.seed, opts.noise);

    struct Split {
        const char* name;
        std::size_t begin, end;
    };
    const Split splits[2] = {{"train", 0, opts.n_train},
                             {"test", opts.n_train, opts.n_train + opts.n_test}};
    for (const Split& split : splits) {
        if (split.begin == split.end) continue;
        const fs::path dir = fs::path(opts.out_dir) / split.name;
        ensure_dir((dir / "images").string());
        ensure_dir((dir / "masks").string());
        std::string labels;
        for (std::size_t i = split.begin; i < split.end; ++i) {
            const std::string name = image_filename(i);
            save_png((dir / "images" / name).string(), to_rgb_image(ds.images[i]));
            save_mask_png((dir / "masks" / name).string(), ds.masks[i]);
            labels += name + "\t" + std::to_string(ds.labels[i]) + "\n";
        }
        write_text_file((dir / "labels.tsv").string(), labels);
    }

    JsonValue manifest = JsonValue::object();
    JsonValue config = JsonValue::object();
    config["n_test"] = opts.n_test;
    config["n_train"] = opts.n_train;
    config["noise"] = opts.noise;
    config["out_dir"] = opts.out_dir;
    config["seed"] = static_cast<std::int64_t>(opts.seed);
    manifest["classes"] = [] {
        JsonValue arr = JsonValue::array();
        for (int i = 0; i < kNumShapeClasses; ++i) arr.push_back(shape_class_name(i));
        return arr;
    }();
    manifest["config"] = std::move(config);
    manifest["format_version"] = kReportFormatVersion;
    ensure_dir(opts.out_dir);
    write_text_file((fs::path(opts.out_dir) / "gen_manifest.json").string(),
                    manifest.dump());
}

void cmd_train(const TrainOptions& opts) {
    if (opts.data_dir.empty()) throw UsageError("train requires --data-dir");
    if (opts.weights.empty()) throw UsageError("train requires --weights (output path)");
    const std::vector<DatasetEntry> entries = load_dataset_dir(opts.data_dir);

    ShapesDataset ds;
    ds.seed = opts.seed;
    for (const DatasetEntry& e : entries) {
        ds.images.push_back(e.image);
        ds.labels.push_back(e.label);
        ds.masks.emplace_back();
    }
    TrainConfig config;
    config.epochs = opts.epochs;
    config.learning_rate = opts.learning_rate;
    config.batch_size = opts.batch_size;
    config.seed = opts.seed;
    TrainResult result = train_sgd(ds, config);

    const fs::path weights_path(opts.weights);
    if (weights_path.has_parent_path()) ensure_dir(weights_path.parent_path().string());
    save_weights(result.model, opts.weights);

    const double train_accuracy = evaluate_accuracy(result.model, ds);
    JsonValue log = JsonValue::object();
    JsonValue cfg = JsonValue::object();
    cfg["batch_size"] = config.batch_size;
    cfg["data_dir"] = opts.data_dir;
    cfg["epochs"] = config.epochs;
    cfg["learning_rate"] = config.learning_rate;
    cfg["seed"] = static_cast<std::int64_t>(config.seed);
    cfg["weights"] = opts.weights;
    log["config"] = std::move(cfg);
    log["epoch_loss"] = [&] {
        JsonValue arr = JsonValue::array();
        for (double l : result.epoch_loss) arr.push_back(l);
        return arr;
    }();
    log["format_version"] = kReportFormatVersion;
    log["train_accuracy"] = train_accuracy;
    const fs::path log_dir =
        opts.out_dir.empty()
            ? (weights_path.has_parent_path() ? weights_path.parent_path() : fs::path("."))
            : fs::path(opts.out_dir);
    ensure_dir(log_dir.string());
    write_text_file((log_dir / "train_log.json").string(), log.dump());
}

void cmd_explain(const ExplainOptions& opts) {
    if (opts.weights.empty()) throw UsageError("explain requires --weights");
    if (opts.image.empty()) throw UsageError("explain requires --image");
    check_theta(opts.theta);
    const MicroCNN model = load_weights(opts.weights);
    check_layer(model, opts.layer);
    check_class(model, opts.target_class);

    const Tensor raw = resize_raw(load_image(opts.image), MicroCNN::kInputHeight,
                                  MicroCNN::kInputWidth);
    FusionConfig config;
    config.theta = opts.theta;
    config.layer = opts.layer;
    config.record_diagnostics = true;

    const ForwardTrace trace = model.forward(preprocess(raw, config.prep));
    const std::size_t predicted = argmax_prob(trace.probs);
    const std::size_t target =
        opts.target_class >= 0 ? static_cast<std::size_t>(opts.target_class) : predicted;

    const double t0 = now_seconds();
    const FusionResult result = fusion_cam(model, raw, target, config);
    const double total_seconds = now_seconds() - t0;
    const FusionDiagnostics& diag = *result.diagnostics;

    ensure_dir(opts.out_dir);
    const std::string stem =
        (fs::path(opts.out_dir) / fs::path(opts.image).stem()).string();
    save_heatmap(stem + "_fusion.png", result.map, raw);
    if (opts.diagnostics) {
        save_png(stem + "_input.png", to_rgb_image(raw));
        save_heatmap(stem + "_grad.png", diag.grad, raw);
        save_heatmap(stem + "_degrad.png", diag.degrad, raw);
        save_heatmap(stem + "_region.png", diag.region, raw);
        save_heatmap(stem + "_gradregion.png", diag.gradregion, raw);
        save_heatmap(stem + "_similarity.png", SaliencyMap{diag.similarity}, raw);
    }

    JsonValue side = JsonValue::object();
    JsonValue betas = JsonValue::object();
    betas["degrad"] = diag.betas.degrad;
    betas["gradregion"] = diag.betas.gradregion;
    betas["region"] = diag.betas.region;
    side["betas"] = std::move(betas);
    JsonValue cfg = JsonValue::object();
    cfg["diagnostics"] = opts.diagnostics;
    cfg["image"] = opts.image;
    cfg["layer"] = opts.layer;
    cfg["out_dir"] = opts.out_dir;
    cfg["theta"] = opts.theta;
    cfg["weights"] = opts.weights;
    side["config"] = std::move(cfg);
    side["format_version"] = kReportFormatVersion;
    side["predicted_class"] = predicted;
    side["target_class"] = target;
    side["theta"] = opts.theta;
    JsonValue times = JsonValue::object();
    for (const StageTiming& t : diag.stage_seconds) times[t.stage] = t.seconds;
    times["total"] = total_seconds;
    side["timings_seconds"] = std::move(times);
    write_text_file(stem + "_explain.json", side.dump());
}

namespace {

struct ImageEval {
    std::string filename;
    int label = 0;
    std::size_t predicted = 0;
    ScorePair pair;
    double insertion_auc = 0.0;
    double deletion_auc = 0.0;
    double overall = 0.0;
    std::optional<double> loc_mass;
    double map_seconds = 0.0;
};

struct MethodEval {
    std::vector<ImageEval> images;
    double average_drop_value = 0.0;
    double average_increase_value = 0.0;
    double mean_insertion = 0.0;
    double mean_deletion = 0.0;
    double mean_overall = 0.0;
    std::optional<double> mean_loc_mass;
    double mean_map_seconds = 0.0;
};

MethodEval evaluate_method(const std::string& method, const MicroCNN& model,
                           const std::vector<DatasetEntry>& entries,
                           const FusionConfig& config) {
    MethodEval eval;
    std::vector<ScorePair> pairs;
    double ins_sum = 0, del_sum = 0, overall_sum = 0, loc_sum = 0, time_sum = 0;
    std::size_t loc_count = 0;
    for (const DatasetEntry& entry : entries) {
        ImageEval img;
        img.filename = entry.filename;
        img.label = entry.label;
        const std::size_t c = static_cast<std::size_t>(entry.label);
        if (c >= model.num_classes())
            throw ValueError("dataset label " + std::to_string(entry.label) +
                             " out of range for model");
        const double t0 = now_seconds();
        const SaliencyMap map = method_map(method, model, entry.image, c, config);
        img.map_seconds = now_seconds() - t0;

        img.predicted =
            argmax_prob(model.forward(preprocess(entry.image, config.prep)).probs);
        img.pair = masked_score_pair(model, entry.image, map, c, config.prep);
        const PerturbationCurve ins = perturbation_curve(
            model, entry.image, map, c, PerturbationMode::insertion, config.prep);
        const PerturbationCurve del = perturbation_curve(
            model, entry.image, map, c, PerturbationMode::deletion, config.prep);
        img.insertion_auc = ins.auc;
        img.deletion_auc = del.auc;
        img.overall = overall_score(ins.auc, del.auc);
        if (entry.mask) {
            double total = 0.0;
            for (std::size_t i = 0; i < map.values.size(); ++i) total += map.values[i];
            if (total > 0.0) {
                img.loc_mass = localization_mass(map, *entry.mask);
                loc_sum += *img.loc_mass;
                ++loc_count;
            }
        }
        pairs.push_back(img.pair);
        ins_sum += img.insertion_auc;
        del_sum += img.deletion_auc;
        overall_sum += img.overall;
        time_sum += img.map_seconds;
        eval.images.push_back(std::move(img));
    }
    const double n = static_cast<double>(eval.images.size());
    eval.average_drop_value = average_drop(pairs);
    eval.average_increase_value = average_increase(pairs);
    eval.mean_insertion = ins_sum / n;
    eval.mean_deletion = del_sum / n;
    eval.mean_overall = overall_sum / n;
    if (loc_count > 0) eval.mean_loc_mass = loc_sum / static_cast<double>(loc_count);
    eval.mean_map_seconds = time_sum / n;
    return eval;
}

}  // namespace

void cmd_evaluate(const EvaluateOptions& opts) {
    if (opts.weights.empty()) throw UsageError("evaluate requires --weights");
    if (opts.data_dir.empty()) throw UsageError("evaluate requires --data-dir");
    check_theta(opts.theta);
    if (opts.methods.empty()) throw UsageError("evaluate: --methods is empty");
    for (const std::string& m : opts.methods)
        if (std::find(kKnownMethods.begin(), kKnownMethods.end(), m) ==
            kKnownMethods.end())
            throw UsageError("unknown method: " + m);
    const MicroCNN model = load_weights(opts.weights);
    check_layer(model, opts.layer);
    const std::vector<DatasetEntry> entries = load_dataset_dir(opts.data_dir);

    FusionConfig config;
    config.theta = opts.theta;
    config.layer = opts.layer;

    JsonValue methods_obj = JsonValue::object();
    JsonValue timing_methods = JsonValue::object();
    const double run_start = now_seconds();
    for (const std::string& method : opts.methods) {
        const MethodEval eval = evaluate_method(method, model, entries, config);
        JsonValue agg = JsonValue::object();
        agg["average_drop"] = eval.average_drop_value;
        agg["average_increase"] = eval.average_increase_value;
        agg["mean_deletion_auc"] = eval.mean_deletion;
        agg["mean_insertion_auc"] = eval.mean_insertion;
        agg["mean_overall"] = eval.mean_overall;
        agg["mean_localization_mass"] =
            eval.mean_loc_mass ? JsonValue(*eval.mean_loc_mass) : JsonValue(nullptr);
        JsonValue per_image = JsonValue::array();
        for (const ImageEval& img : eval.images) {
            JsonValue rec = JsonValue::object();
            rec["deletion_auc"] = img.deletion_auc;
            rec["image"] = img.filename;
            rec["insertion_auc"] = img.insertion_auc;
            rec["label"] = img.label;
            rec["localization_mass"] =
                img.loc_mass ? JsonValue(*img.loc_mass) : JsonValue(nullptr);
            rec["o"] = img.pair.o;
            rec["overall"] = img.overall;
            rec["predicted_class"] = img.predicted;
            rec["y"] = img.pair.y;
            per_image.push_back(std::move(rec));
        }
        JsonValue method_obj = JsonValue::object();
        method_obj["aggregates"] = std::move(agg);
        method_obj["per_image"] = std::move(per_image);
        methods_obj[method] = std::move(method_obj);
        timing_methods[method] = eval.mean_map_seconds;
    }

    JsonValue report = JsonValue::object();
    JsonValue cfg = JsonValue::object();
    cfg["data_dir"] = opts.data_dir;
    cfg["layer"] = opts.layer;
    cfg["methods"] = methods_json(opts.methods);
    cfg["out_dir"] = opts.out_dir;
    cfg["seed"] = static_cast<std::int64_t>(opts.seed);
    cfg["theta"] = opts.theta;
    cfg["weights"] = opts.weights;
    report["config"] = std::move(cfg);
    report["format_version"] = kReportFormatVersion;
    report["methods"] = std::move(methods_obj);
    report["num_images"] = entries.size();
    ensure_dir(opts.out_dir);
    write_text_file((fs::path(opts.out_dir) / "report.json").string(), report.dump());

    // Wall-clock lives in its own file so report.json stays bit-stable.
    JsonValue timings = JsonValue::object();
    timings["format_version"] = kReportFormatVersion;
    timings["mean_seconds_per_map"] = std::move(timing_methods);
    timings["total_seconds"] = now_seconds() - run_start;
    write_text_file((fs::path(opts.out_dir) / "timings.json").string(), timings.dump());
}

void cmd_sweep_theta(const SweepThetaOptions& opts) {
    if (opts.weights.empty()) throw UsageError("sweep-theta requires --weights");
    if (opts.data_dir.empty()) throw UsageError("sweep-theta requires --data-dir");
    const MicroCNN model = load_weights(opts.weights);
    check_layer(model, opts.layer);
    std::vector<DatasetEntry> entries = load_dataset_dir(opts.data_dir);
    if (opts.limit > 0 && entries.size() > opts.limit) entries.resize(opts.limit);

    JsonValue rows = JsonValue::array();
    std::ostringstream table;
    table << "theta  average_drop  average_increase  mean_overall\n";
    for (int theta = 0; theta <= 90; theta += 10) {
        FusionConfig config;
        config.theta = static_cast<double>(theta);
        config.layer = opts.layer;
        std::vector<ScorePair> pairs;
        double overall_sum = 0.0;
        for (const DatasetEntry& entry : entries) {
            const std::size_t c = static_cast<std::size_t>(entry.label);
            const SaliencyMap map = fusion_cam(model, entry.image, c, config).map;
            pairs.push_back(masked_score_pair(model, entry.image, map, c, config.prep));
            const PerturbationCurve ins = perturbation_curve(
                model, entry.image, map, c, PerturbationMode::insertion, config.prep);
            const PerturbationCurve del = perturbation_curve(
                model, entry.image, map, c, PerturbationMode::deletion, config.prep);
            overall_sum += overall_score(ins.auc, del.auc);
        }
        const double ad = average_drop(pairs);
        const double ai = average_increase(pairs);
        const double mean_overall = overall_sum / static_cast<double>(entries.size());
        JsonValue row = JsonValue::object();
        row["average_drop"] = ad;
        row["average_increase"] = ai;
        row["mean_overall"] = mean_overall;
        row["theta"] = theta;
        rows.push_back(std::move(row));
        char line[128];
        std::snprintf(line, sizeof(line), "%5d  %12.4f  %16.4f  %12.6f\n", theta, ad, ai,
                      mean_overall);
        table << line;
    }
    JsonValue out = JsonValue::object();
    JsonValue cfg = JsonValue::object();
    cfg["data_dir"] = opts.data_dir;
    cfg["layer"] = opts.layer;
    cfg["limit"] = opts.limit;
    cfg["out_dir"] = opts.out_dir;
    cfg["seed"] = static_cast<std::int64_t>(opts.seed);
    cfg["weights"] = opts.weights;
    out["config"] = std::move(cfg);
    out["format_version"] = kReportFormatVersion;
    out["rows"] = std::move(rows);
    ensure_dir(opts.out_dir);
    write_text_file((fs::path(opts.out_dir) / "sweep.json").string(), out.dump());
    std::cout << table.str();
}

SaliencyMap ablation_map(int setting, const MicroCNN& model, const Tensor& image_raw,
                         std::size_t c, const FusionConfig& config) {
    if (setting < 1 || setting > 4)
        throw ValueError("ablation_map: setting must be 1..4");
    if (setting == 4) return fusion_cam(model, image_raw, c, config).map;

    const ForwardTrace trace = model.forward(preprocess(image_raw, config.prep));
    const SaliencyMap grad = grad_cam(model, trace, c, config.layer);
    const SaliencyMap region =
        score_cam_detail(model, image_raw, c, config.layer, config.prep, &trace).map;
    if (setting == 1) return normalize_map(combine(grad, region, 1.0, 1.0));
    const SaliencyMap degrad = denoise(grad, config.theta);
    if (setting == 2) return normalize_map(combine(degrad, region, 1.0, 1.0));
    const double beta_degrad =
        contribution_weight(model, image_raw, degrad, c, config.prep);
    const double beta_region =
        contribution_weight(model, image_raw, region, c, config.prep);
    return normalize_map(
        combine(degrad, region, beta_degrad, beta_region, config.beta_clamp));
}

void cmd_ablate(const AblateOptions& opts) {
    if (opts.weights.empty()) throw UsageError("ablate requires --weights");
    if (opts.data_dir.empty() == opts.image.empty())
        throw UsageError("ablate requires exactly one of --data-dir or --image");
    check_theta(opts.theta);
    const MicroCNN model = load_weights(opts.weights);
    check_layer(model, opts.layer);
    check_class(model, opts.target_class);

    FusionConfig config;
    config.theta = opts.theta;
    config.layer = opts.layer;

    static const char* kDescriptions[4] = {
        "unweighted sum of gradient and activation-masking maps",
        "plus percentile denoising of the gradient map",
        "plus contribution-weighted union",
        "full similarity-gated fusion",
    };

    ensure_dir(opts.out_dir);
    JsonValue out = JsonValue::object();
    JsonValue cfg = JsonValue::object();
    cfg["layer"] = opts.layer;
    cfg["out_dir"] = opts.out_dir;
    cfg["seed"] = static_cast<std::int64_t>(opts.seed);
    cfg["theta"] = opts.theta;
    cfg["weights"] = opts.weights;

    if (!opts.image.empty()) {
        const Tensor raw = resize_raw(load_image(opts.image), MicroCNN::kInputHeight,
                                      MicroCNN::kInputWidth);
        const ForwardTrace trace = model.forward(preprocess(raw, config.prep));
        const std::size_t target = opts.target_class >= 0
                                       ? static_cast<std::size_t>(opts.target_class)
                                       : argmax_prob(trace.probs);
        const std::string stem =
            (fs::path(opts.out_dir) / fs::path(opts.image).stem()).string();
        JsonValue settings = JsonValue::array();
        for (int s = 1; s <= 4; ++s) {
            const SaliencyMap map = ablation_map(s, model, raw, target, config);
            const std::string png = stem + "_setting" + std::to_string(s) + ".png";
            save_heatmap(png, map, raw);
            JsonValue row = JsonValue::object();
            row["description"] = kDescriptions[s - 1];
            row["png"] = png;
            row["setting"] = s;
            settings.push_back(std::move(row));
        }
        cfg["image"] = opts.image;
        cfg["target_class"] = static_cast<std::int64_t>(target);
        out["config"] = std::move(cfg);
        out["format_version"] = kReportFormatVersion;
        out["settings"] = std::move(settings);
        write_text_file((fs::path(opts.out_dir) / "ablation.json").string(), out.dump());
        return;
    }

    const std::vector<DatasetEntry> entries = load_dataset_dir(opts.data_dir);
    JsonValue settings = JsonValue::array();
    std::ostringstream table;
    table << "setting  average_drop  average_increase  description\n";
    for (int s = 1; s <= 4; ++s) {
        std::vector<ScorePair> pairs;
        for (const DatasetEntry& entry : entries) {
            const std::size_t c = static_cast<std::size_t>(entry.label);
            const SaliencyMap map = ablation_map(s, model, entry.image, c, config);
            pairs.push_back(masked_score_pair(model, entry.image, map, c, config.prep));
        }
        const double ad = average_drop(pairs);
        const double ai = average_increase(pairs);
        JsonValue row = JsonValue::object();
        row["average_drop"] = ad;
        row["average_increase"] = ai;
        row["description"] = kDescriptions[s - 1];
        row["setting"] = s;
        settings.push_back(std::move(row));
        char line[160];
        std::snprintf(line, sizeof(line), "%7d  %12.4f  %16.4f  %s\n", s, ad, ai,
                      kDescriptions[s - 1]);
        table << line;
    }
    cfg["data_dir"] = opts.data_dir;
    out["config"] = std::move(cfg);
    out["format_version"] = kReportFormatVersion;
    out["settings"] = std::move(settings);
    write_text_file((fs::path(opts.out_dir) / "ablation.json").string(), out.dump());
    std::cout << table.str();
}

}  // namespace camfuse::cli
