#include "camfuse/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "camfuse/errors.hpp"
#include "camfuse/preprocess.hpp"
#include "camfuse/rng.hpp"

namespace camfuse {

TrainResult train_sgd(const ShapesDataset& data, const TrainConfig& config) {
    if (data.images.empty()) throw ValueError("train_sgd: empty dataset");
    if (data.images.size() != data.labels.size())
        throw ValueError("train_sgd: images/labels size mismatch");
    if (config.batch_size == 0) throw ValueError("train_sgd: batch_size must be >= 1");
    if (config.learning_rate < 0.0)
        throw ValueError("train_sgd: learning_rate must be >= 0");

    TrainResult result{MicroCNN(), {}};
    MicroCNN& model = result.model;
    model.init_params(config.seed);

    const Preprocessing prep;
    std::vector<Tensor> inputs;
    inputs.reserve(data.images.size());
    for (const Tensor& img : data.images) inputs.push_back(preprocess(img, prep));

    // Separate stream from init so adding epochs never perturbs the init.
    SplitMix64 shuffle_rng(config.seed ^ 0x5DEECE66DULL);
    std::vector<std::size_t> order(inputs.size());
    std::iota(order.begin(), order.end(), 0);

    const std::size_t c_count = model.num_classes();
    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        for (std::size_t i = order.size(); i > 1; --i) {
            const std::size_t j = shuffle_rng.next_below(i);
            std::swap(order[i - 1], order[j]);
        }
        double loss_sum = 0.0;
        for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
            const std::size_t end = std::min(start + config.batch_size, order.size());
            const double inv_batch = 1.0 / static_cast<double>(end - start);
            std::vector<LayerParams> acc(model.layers().size());
            for (std::size_t b = start; b < end; ++b) {
                const std::size_t idx = order[b];
                const Tensor& x = inputs[idx];
                const int label = data.labels[idx];
                if (label < 0 || static_cast<std::size_t>(label) >= c_count)
                    throw ValueError("train_sgd: label out of range");
                ForwardTrace trace = model.forward(x);
                loss_sum += -std::log(trace.probs[static_cast<std::size_t>(label)]);
                // d CE / d logits = probs - onehot
                std::vector<double> logit_grad = trace.probs;
                logit_grad[static_cast<std::size_t>(label)] -= 1.0;
                std::vector<LayerParams> grads =
                    model.param_grads_from_logit_grad(trace, x, logit_grad);
                for (std::size_t l = 0; l < grads.size(); ++l) {
                    if (grads[l].weight.size() == 0) continue;
                    if (acc[l].weight.size() == 0) {
                        acc[l] = std::move(grads[l]);
                    } else {
                        for (std::size_t k = 0; k < acc[l].weight.size(); ++k)
                            acc[l].weight[k] += grads[l].weight[k];
                        for (std::size_t k = 0; k < acc[l].bias.size(); ++k)
                            acc[l].bias[k] += grads[l].bias[k];
                    }
                }
            }
            for (std::size_t l = 0; l < acc.size(); ++l) {
                if (acc[l].weight.size() == 0) continue;
                for (std::size_t k = 0; k < acc[l].weight.size(); ++k)
                    model.params()[l].weight[k] -=
                        config.learning_rate * acc[l].weight[k] * inv_batch;
                for (std::size_t k = 0; k < acc[l].bias.size(); ++k)
                    model.params()[l].bias[k] -=
                        config.learning_rate * acc[l].bias[k] * inv_batch;
            }
        }
        result.epoch_loss.push_back(loss_sum / static_cast<double>(order.size()));
    }
    return result;
}

double evaluate_accuracy(const MicroCNN& model, const ShapesDataset& data) {
    if (data.images.empty()) throw ValueError("evaluate_accuracy: empty dataset");
    const Preprocessing prep;
    std::size_t hits = 0;
    for (std::size_t i = 0; i < data.images.size(); ++i) {
        ForwardTrace trace = model.forward(preprocess(data.images[i], prep));
        const std::size_t pred = static_cast<std::size_t>(
            std::max_element(trace.probs.begin(), trace.probs.end()) -
            trace.probs.begin());
        if (pred == static_cast<std::size_t>(data.labels[i])) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(data.images.size());
}

}  // namespace camfuse
