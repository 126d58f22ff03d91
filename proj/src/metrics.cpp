#include "camfuse/metrics.hpp"

#include <algorithm>
#include <numeric>

#include "camfuse/errors.hpp"

namespace camfuse {

double average_drop(const std::vector<ScorePair>& pairs) {
    if (pairs.empty()) throw ValueError("average_drop: empty score list");
    double acc = 0.0;
    for (const ScorePair& p : pairs) {
        if (!(p.y > 0.0)) throw ValueError("average_drop: baseline score must be > 0");
        acc += std::max(0.0, p.y - p.o) / p.y;
    }
    return acc / static_cast<double>(pairs.size()) * 100.0;
}

double average_increase(const std::vector<ScorePair>& pairs) {
    if (pairs.empty()) throw ValueError("average_increase: empty score list");
    std::size_t hits = 0;
    for (const ScorePair& p : pairs)
        if (p.o > p.y) ++hits;
    return static_cast<double>(hits) / static_cast<double>(pairs.size()) * 100.0;
}

std::vector<std::size_t> saliency_ranking(const SaliencyMap& map) {
    std::vector<std::size_t> order(map.values.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return map.values[a] > map.values[b];
    });
    return order;
}

double trapezoid_auc(const std::vector<double>& fractions,
                     const std::vector<double>& scores) {
    if (fractions.size() != scores.size())
        throw ValueError("trapezoid_auc: fraction/score size mismatch");
    if (fractions.size() < 2) throw ValueError("trapezoid_auc: need at least 2 points");
    double auc = 0.0;
    for (std::size_t i = 1; i < fractions.size(); ++i) {
        const double dx = fractions[i] - fractions[i - 1];
        if (!(dx > 0.0))
            throw ValueError("trapezoid_auc: fractions must be strictly increasing");
        auc += dx * (scores[i] + scores[i - 1]) / 2.0;
    }
    return auc;
}

PerturbationCurve perturbation_curve(const MicroCNN& model, const Tensor& image_raw,
                                     const SaliencyMap& map, std::size_t c,
                                     PerturbationMode mode, const Preprocessing& prep) {
    if (c >= model.num_classes())
        throw ValueError("perturbation_curve: class index out of range");
    if (map.height() != image_raw.extent(1) || map.width() != image_raw.extent(2))
        throw ShapeError("perturbation_curve: map/image dimensions differ");
    const std::size_t total = map.values.size();
    const std::size_t hw = total;
    const std::vector<std::size_t> order = saliency_ranking(map);

    // Deletion walks from the intact image toward black; insertion from
    // black toward the intact image. Both advance through the same ranked
    // prefix, so each pixel flips exactly once.
    Tensor work = (mode == PerturbationMode::deletion) ? image_raw
                                                       : Tensor(image_raw.shape());
    PerturbationCurve curve;
    curve.mode = mode;
    curve.fractions.reserve(101);
    curve.scores.reserve(101);
    std::size_t flipped = 0;
    for (std::size_t step = 0; step <= 100; ++step) {
        const std::size_t want = step * total / 100;
        while (flipped < want) {
            const std::size_t p = order[flipped];
            for (std::size_t cc = 0; cc < 3; ++cc)
                work[cc * hw + p] = (mode == PerturbationMode::deletion)
                                        ? 0.0
                                        : image_raw[cc * hw + p];
            ++flipped;
        }
        curve.fractions.push_back(static_cast<double>(step) / 100.0);
        curve.scores.push_back(model.forward(preprocess(work, prep)).probs[c]);
    }
    curve.auc = trapezoid_auc(curve.fractions, curve.scores);
    return curve;
}

double overall_score(double insertion_auc, double deletion_auc) {
    return insertion_auc - deletion_auc;
}

double localization_mass(const SaliencyMap& map, const Tensor& mask) {
    if (!map.values.same_shape(mask))
        throw ShapeError("localization_mass: map " +
                         shape_to_string(map.values.shape()) + " vs mask " +
                         shape_to_string(mask.shape()));
    double total = 0.0;
    double inside = 0.0;
    for (std::size_t i = 0; i < mask.size(); ++i) {
        total += map.values[i];
        if (mask[i] != 0.0) inside += map.values[i];
    }
    if (!(total > 0.0))
        throw ValueError("localization_mass: map has no mass (all-zero map)");
    return inside / total;
}

}  // namespace camfuse
