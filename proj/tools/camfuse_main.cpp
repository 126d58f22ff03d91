#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "camfuse/commands.hpp"
#include "camfuse/errors.hpp"

namespace {

using namespace camfuse;

const CLI::Validator ThetaRange = CLI::Validator(
    [](std::string& value) -> std::string {
        try {
            const double v = std::stod(value);
            if (v >= 0.0 && v < 100.0) return {};
        } catch (const std::exception&) {
        }
        return "theta must be a number in [0, 100)";
    },
    "THETA in [0,100)");

// All subcommands, their bound option structs, and the shared --config path.
// CLI::App is not movable, so two-pass parsing builds one Cli per pass.
struct Cli {
    CLI::App app{"saliency-map fusion toolkit for a built-in micro CNN"};

    cli::GenDataOptions gen;
    cli::TrainOptions train;
    cli::ExplainOptions explain;
    cli::EvaluateOptions evaluate;
    cli::SweepThetaOptions sweep;
    cli::AblateOptions ablate;
    std::string config_path;

    CLI::App* gen_cmd;
    CLI::App* train_cmd;
    CLI::App* explain_cmd;
    CLI::App* eval_cmd;
    CLI::App* sweep_cmd;
    CLI::App* ablate_cmd;

    Cli() {
        app.require_subcommand(1);

        gen_cmd = app.add_subcommand("gen-data", "generate a synthetic shapes dataset");
        gen_cmd->add_option("--out-dir", gen.out_dir, "output directory")->required();
        gen_cmd->add_option("--n-train", gen.n_train, "training images");
        gen_cmd->add_option("--n-test", gen.n_test, "test images");
        gen_cmd->add_option("--seed", gen.seed, "generator seed");
        gen_cmd->add_option("--noise", gen.noise, "uniform pixel noise amplitude in [0, 0.5]")
            ->check(CLI::Range(0.0, 0.5));

        train_cmd = app.add_subcommand("train", "train the micro CNN");
        train_cmd->add_option("--data-dir", train.data_dir, "dataset directory")->required();
        train_cmd->add_option("--weights", train.weights, "output weight file")->required();
        train_cmd->add_option("--out-dir", train.out_dir, "training log directory");
        train_cmd->add_option("--epochs", train.epochs, "training epochs");
        train_cmd->add_option("--lr", train.learning_rate, "learning rate")
            ->check(CLI::NonNegativeNumber);
        train_cmd->add_option("--batch", train.batch_size, "batch size")
            ->check(CLI::PositiveNumber);
        train_cmd->add_option("--seed", train.seed, "init and shuffle seed");

        explain_cmd = app.add_subcommand("explain", "write fused saliency maps for one image");
        explain_cmd->add_option("--weights", explain.weights, "weight file")->required();
        explain_cmd->add_option("--image", explain.image, "input image (PNG or PPM)")
            ->required();
        explain_cmd->add_option("--out-dir", explain.out_dir, "output directory");
        explain_cmd->add_option("--theta", explain.theta, "denoise percentile")
            ->check(ThetaRange);
        explain_cmd->add_option("--layer", explain.layer, "CAM layer index (0..5)")
            ->check(CLI::Range(0, 5));
        explain_cmd->add_option("--class", explain.target_class,
                                "target class (default: argmax prediction)");
        explain_cmd->add_flag("--diagnostics", explain.diagnostics,
                              "also write per-stage map renderings");

        eval_cmd = app.add_subcommand("evaluate", "faithfulness metrics over a dataset");
        eval_cmd->add_option("--weights", evaluate.weights, "weight file")->required();
        eval_cmd->add_option("--data-dir", evaluate.data_dir, "dataset directory")->required();
        eval_cmd->add_option("--out-dir", evaluate.out_dir, "output directory");
        eval_cmd->add_option("--theta", evaluate.theta, "denoise percentile")
            ->check(ThetaRange);
        eval_cmd->add_option("--layer", evaluate.layer, "CAM layer index (0..5)")
            ->check(CLI::Range(0, 5));
        eval_cmd
            ->add_option("--methods", evaluate.methods,
                         "comma-separated: grad-cam,score-cam,fusion-cam")
            ->delimiter(',')
            ->check(CLI::IsMember(cli::kKnownMethods));
        eval_cmd->add_option("--seed", evaluate.seed, "seed recorded in the report");

        sweep_cmd = app.add_subcommand("sweep-theta", "fused-map metrics for theta 0,10,...,90");
        sweep_cmd->add_option("--weights", sweep.weights, "weight file")->required();
        sweep_cmd->add_option("--data-dir", sweep.data_dir, "dataset directory")->required();
        sweep_cmd->add_option("--out-dir", sweep.out_dir, "output directory");
        sweep_cmd->add_option("--layer", sweep.layer, "CAM layer index (0..5)")
            ->check(CLI::Range(0, 5));
        sweep_cmd->add_option("--limit", sweep.limit, "evaluate only the first N images");
        sweep_cmd->add_option("--seed", sweep.seed, "seed recorded in the report");

        ablate_cmd = app.add_subcommand("ablate", "compare the four pipeline stages");
        ablate_cmd->add_option("--weights", ablate.weights, "weight file")->required();
        ablate_cmd->add_option("--data-dir", ablate.data_dir,
                               "dataset directory (metric table mode)");
        ablate_cmd->add_option("--image", ablate.image, "single image (map rendering mode)");
        ablate_cmd->add_option("--out-dir", ablate.out_dir, "output directory");
        ablate_cmd->add_option("--theta", ablate.theta, "denoise percentile")
            ->check(ThetaRange);
        ablate_cmd->add_option("--layer", ablate.layer, "CAM layer index (0..5)")
            ->check(CLI::Range(0, 5));
        ablate_cmd->add_option("--class", ablate.target_class,
                               "target class (image mode; default argmax)");
        ablate_cmd->add_option("--seed", ablate.seed, "seed recorded in the report");

        for (CLI::App* sub : app.get_subcommands([](CLI::App*) { return true; })) {
            sub->add_option("--config", config_path,
                            "key=value file with defaults for this command; "
                            "command-line flags override file values");
        }
    }

    CLI::App* parsed_sub() {
        for (CLI::App* sub :
             {gen_cmd, train_cmd, explain_cmd, eval_cmd, sweep_cmd, ablate_cmd}) {
            if (sub->parsed()) return sub;
        }
        return nullptr;
    }

    // The probe pass only identifies the subcommand, the config path, and the
    // explicitly set options, so options missing until the config is read must
    // not fail it. The second pass enforces requirements on the merged args.
    void relax_requirements() {
        for (CLI::App* sub : app.get_subcommands([](CLI::App*) { return true; })) {
            for (CLI::Option* opt : sub->get_options()) opt->required(false);
        }
    }
};

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return {};
    const auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

std::vector<std::pair<std::string, std::string>> read_config_pairs(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open config file: " + path);
    std::vector<std::pair<std::string, std::string>> pairs;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string s = trim(line);
        if (s.empty() || s[0] == '#' || s[0] == ';') continue;
        const auto eq = s.find('=');
        if (eq == std::string::npos) {
            throw UsageError(path + ":" + std::to_string(lineno) + ": expected key=value");
        }
        std::string key = trim(s.substr(0, eq));
        std::string value = trim(s.substr(eq + 1));
        if (key.rfind("--", 0) == 0) key.erase(0, 2);
        if (key.empty()) {
            throw UsageError(path + ":" + std::to_string(lineno) + ": empty key");
        }
        if (value.size() >= 2 && (value.front() == '"' || value.front() == '\'') &&
            value.back() == value.front()) {
            value = value.substr(1, value.size() - 2);
        }
        pairs.emplace_back(std::move(key), std::move(value));
    }
    return pairs;
}

// Splices config values into the raw args as --key=value tokens right after
// the subcommand name, skipping keys the command line already set so explicit
// flags override the file. Values re-enter through a normal parse, so the
// option validators apply to them too.
std::vector<std::string> apply_config(const std::vector<std::string>& args, CLI::App* sub,
                                      const std::string& config_path) {
    std::vector<std::string> extra;
    for (const auto& [key, value] : read_config_pairs(config_path)) {
        if (key == "config") continue;
        CLI::Option* opt = sub->get_option_no_throw("--" + key);
        if (opt == nullptr) {
            throw UsageError("config file: unknown option '" + key + "' for command '" +
                             sub->get_name() + "'");
        }
        if (opt->count() > 0) continue;
        extra.push_back("--" + key + "=" + value);
    }

    std::vector<std::string> merged;
    merged.reserve(args.size() + extra.size());
    bool spliced = false;
    for (const std::string& tok : args) {
        merged.push_back(tok);
        if (!spliced && tok == sub->get_name()) {
            merged.insert(merged.end(), extra.begin(), extra.end());
            spliced = true;
        }
    }
    return merged;
}

// Returns an exit code when parsing ends the run (help or a parse error).
std::optional<int> parse_args(Cli& c, const std::vector<std::string>& args) {
    std::vector<const char*> argv;
    argv.reserve(args.size() + 1);
    argv.push_back("camfuse");
    for (const std::string& a : args) argv.push_back(a.c_str());
    try {
        c.app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& e) {
        return c.app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return c.app.exit(e);
    } catch (const CLI::ParseError& e) {
        c.app.exit(e);
        return 2;
    }
    return std::nullopt;
}

int run(const std::vector<std::string>& args) {
    Cli probe;
    probe.relax_requirements();
    if (const auto rc = parse_args(probe, args)) return *rc;

    std::vector<std::string> merged = args;
    if (CLI::App* sub = probe.parsed_sub(); sub != nullptr && !probe.config_path.empty()) {
        merged = apply_config(args, sub, probe.config_path);
    }

    Cli real;
    if (const auto rc = parse_args(real, merged)) return *rc;

    if (real.gen_cmd->parsed()) cli::cmd_gen_data(real.gen);
    if (real.train_cmd->parsed()) cli::cmd_train(real.train);
    if (real.explain_cmd->parsed()) cli::cmd_explain(real.explain);
    if (real.eval_cmd->parsed()) cli::cmd_evaluate(real.evaluate);
    if (real.sweep_cmd->parsed()) cli::cmd_sweep_theta(real.sweep);
    if (real.ablate_cmd->parsed()) cli::cmd_ablate(real.ablate);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    const std::vector<std::string> args(argv + 1, argv + argc);
    try {
        return run(args);
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
