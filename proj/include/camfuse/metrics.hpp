#pragma once

#include <cstddef>
#include <vector>

#include "camfuse/cam.hpp"
#include "camfuse/model.hpp"
#include "camfuse/preprocess.hpp"
#include "camfuse/tensor.hpp"

namespace camfuse {

// y: class probability on the full image; o: probability on the
// map-masked image (same masking convention as the contribution weights).
struct ScorePair {
    double y = 0.0;
    double o = 0.0;
};

// (1/N) * sum max(0, y - o) / y, as a percentage. Errors on an empty list
// or any y <= 0.
double average_drop(const std::vector<ScorePair>& pairs);

// Percentage of pairs with o strictly greater than y.
double average_increase(const std::vector<ScorePair>& pairs);

enum class PerturbationMode { deletion, insertion };

// 101 fractions 0.00, 0.01, ..., 1.00. At fraction i/100 the top
// floor(i*P/100) pixels by map value (ties broken by ascending row-major
// index) are blackened (deletion, starting from the full image) or
// revealed (insertion, starting from black). Scores are probs[c] of the
// preprocessed perturbed image; auc is the trapezoid integral over the
// fraction axis.
struct PerturbationCurve {
    PerturbationMode mode = PerturbationMode::deletion;
    std::vector<double> fractions;
    std::vector<double> scores;
    double auc = 0.0;
};

PerturbationCurve perturbation_curve(const MicroCNN& model, const Tensor& image_raw,
                                     const SaliencyMap& map, std::size_t c,
                                     PerturbationMode mode,
                                     const Preprocessing& prep = Preprocessing{});

// Trapezoid rule over (fractions, scores); fractions must be strictly
// increasing and the lists equally sized with at least two points.
double trapezoid_auc(const std::vector<double>& fractions,
                     const std::vector<double>& scores);

// insertion - deletion. Plain difference; works for [0,1] fractions and
// percent values alike.
double overall_score(double insertion_auc, double deletion_auc);

// Fraction of total map mass inside the binary mask. Errors when the map
// sums to zero or shapes differ. Invariant under positive rescaling of
// the map.
double localization_mass(const SaliencyMap& map, const Tensor& mask);

// Pixel visitation order used by perturbation_curve: map value descending,
// row-major index ascending on ties. Exposed so schedule properties are
// testable.
std::vector<std::size_t> saliency_ranking(const SaliencyMap& map);

}  // namespace camfuse
