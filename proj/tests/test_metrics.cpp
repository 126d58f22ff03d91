#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <vector>

#include "camfuse/errors.hpp"
#include "camfuse/metrics.hpp"
#include "camfuse/preprocess.hpp"
#include "camfuse/rng.hpp"
#include "helpers.hpp"

using namespace camfuse;
using testutil::fixture_images;
using testutil::mini_model;
using testutil::random_tensor;

namespace {

const Tensor& fixture_raw(std::size_t i = 0) { return fixture_images().images[i]; }

bool same_bits(double a, double b) {
    return std::memcmp(&a, &b, sizeof(double)) == 0;
}

}  // namespace

TEST_CASE("average drop on fixed score pairs") {
    // Halving 0.8 drops by 50%; a raised score contributes zero.
    CHECK(average_drop({{0.8, 0.4}}) == 50.0);
    CHECK(average_drop({{0.5, 0.7}}) == 0.0);
    // (50% + 0%) / 2.
    CHECK(average_drop({{0.8, 0.4}, {0.5, 0.7}}) == 25.0);
    CHECK(average_drop({{0.6, 0.6}}) == 0.0);
}

TEST_CASE("average drop rejects empty input and non-positive full-image scores") {
    CHECK_THROWS_AS(average_drop({}), ValueError);
    CHECK_THROWS_AS(average_drop({{0.0, 0.1}}), ValueError);
    CHECK_THROWS_AS(average_drop({{-0.2, 0.1}}), ValueError);
}

TEST_CASE("average increase counts strict improvements") {
    CHECK(average_increase({{0.3, 0.5}}) == 100.0);
    CHECK(average_increase({{0.5, 0.3}}) == 0.0);
    CHECK(average_increase({{0.5, 0.5}}) == 0.0);  // ties are not increases
    CHECK(average_increase({{0.3, 0.5}, {0.5, 0.3}}) == 50.0);
    CHECK_THROWS_AS(average_increase({}), ValueError);
}

TEST_CASE("average metrics are bounded percentages on random pairs") {
    SplitMix64 rng(81);
    for (int rep = 0; rep < 50; ++rep) {
        std::vector<ScorePair> pairs(1 + rng.next_below(20));
        for (ScorePair& p : pairs) {
            p.y = rng.next_range(0.05, 1.0);
            p.o = rng.next_range(0.0, 1.0);
        }
        const double ad = average_drop(pairs);
        const double ai = average_increase(pairs);
        CHECK(ad >= 0.0);
        CHECK(ad <= 100.0);
        CHECK(ai >= 0.0);
        CHECK(ai <= 100.0);
    }
}

TEST_CASE("trapezoid AUC of a linear 1 to 0 ramp is one half") {
    std::vector<double> fractions(101), scores(101);
    for (int i = 0; i <= 100; ++i) {
        fractions[i] = static_cast<double>(i) / 100.0;
        scores[i] = 1.0 - fractions[i];
    }
    CHECK(std::fabs(trapezoid_auc(fractions, scores) - 0.5) < 1e-12);
}

TEST_CASE("trapezoid AUC of a constant curve is the constant") {
    CHECK(trapezoid_auc({0.0, 0.25, 1.0}, {0.4, 0.4, 0.4}) == doctest::Approx(0.4));
}

TEST_CASE("trapezoid AUC validates its arguments") {
    CHECK_THROWS_AS(trapezoid_auc({0.0}, {1.0}), ValueError);
    CHECK_THROWS_AS(trapezoid_auc({0.0, 1.0}, {1.0}), ValueError);
    CHECK_THROWS_AS(trapezoid_auc({0.0, 0.5, 0.5}, {1.0, 1.0, 1.0}), ValueError);
    CHECK_THROWS_AS(trapezoid_auc({0.5, 0.0}, {1.0, 1.0}), ValueError);
}

TEST_CASE("overall score is the plain difference of the two areas") {
    CHECK(overall_score(0.9, 0.2) == doctest::Approx(0.7));
    // Percent-scale inputs work unchanged.
    CHECK(std::fabs(overall_score(67.12, 19.26) - 47.86) < 1e-9);
    CHECK(std::fabs(overall_score(61.19, 18.23) - 42.96) < 1e-9);
    CHECK(overall_score(0.2, 0.9) < 0.0);
}

TEST_CASE("saliency ranking sorts by value with row-major tie-breaks") {
    Tensor vals({2, 3});
    // 0.5 0.9 0.5
    // 0.1 0.9 0.5
    vals[0] = 0.5;
    vals[1] = 0.9;
    vals[2] = 0.5;
    vals[3] = 0.1;
    vals[4] = 0.9;
    vals[5] = 0.5;
    const std::vector<std::size_t> order = saliency_ranking(SaliencyMap{vals});
    const std::vector<std::size_t> expected = {1, 4, 0, 2, 5, 3};
    CHECK(order == expected);
}

TEST_CASE("saliency ranking is a permutation of all pixel indices") {
    SplitMix64 rng(82);
    const SaliencyMap map{random_tensor({9, 11}, rng, 0.0, 1.0)};
    std::vector<std::size_t> order = saliency_ranking(map);
    REQUIRE(order.size() == 99);
    std::vector<std::size_t> sorted = order;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < sorted.size(); ++i) CHECK(sorted[i] == i);
}

TEST_CASE("perturbation curves hit the exact full-image and black-image endpoints") {
    const MicroCNN& model = mini_model();
    const Tensor& raw = fixture_raw();
    const std::size_t c = 0;
    const Preprocessing prep;
    SplitMix64 rng(83);
    const SaliencyMap map{random_tensor({32, 32}, rng, 0.0, 1.0)};

    const double full_score = model.forward(preprocess(raw, prep)).probs[c];
    const double black_score = model.forward(black_input(prep)).probs[c];

    const PerturbationCurve del =
        perturbation_curve(model, raw, map, c, PerturbationMode::deletion, prep);
    const PerturbationCurve ins =
        perturbation_curve(model, raw, map, c, PerturbationMode::insertion, prep);

    REQUIRE(del.scores.size() == 101);
    REQUIRE(del.fractions.size() == 101);
    REQUIRE(ins.scores.size() == 101);
    CHECK(del.mode == PerturbationMode::deletion);
    CHECK(ins.mode == PerturbationMode::insertion);

    CHECK(same_bits(del.scores.front(), full_score));
    CHECK(same_bits(del.scores.back(), black_score));
    CHECK(same_bits(ins.scores.front(), black_score));
    CHECK(same_bits(ins.scores.back(), full_score));
}

TEST_CASE("perturbation curves use the 101-point fraction grid and report their own AUC") {
    const MicroCNN& model = mini_model();
    SplitMix64 rng(84);
    const SaliencyMap map{random_tensor({32, 32}, rng, 0.0, 1.0)};
    const PerturbationCurve curve =
        perturbation_curve(model, fixture_raw(1), map, 2, PerturbationMode::deletion);
    for (int i = 0; i <= 100; ++i) {
        CHECK(curve.fractions[i] == static_cast<double>(i) / 100.0);
        CHECK(curve.scores[i] >= 0.0);
        CHECK(curve.scores[i] <= 1.0);
    }
    CHECK(same_bits(curve.auc, trapezoid_auc(curve.fractions, curve.scores)));
}

TEST_CASE("the first deletion step blackens exactly the top-ranked pixels") {
    const MicroCNN& model = mini_model();
    const Tensor& raw = fixture_raw(2);
    const std::size_t c = 1;
    const Preprocessing prep;
    SplitMix64 rng(85);
    const SaliencyMap map{random_tensor({32, 32}, rng, 0.0, 1.0)};

    // Fraction 0.01 of 1024 pixels: floor(1*1024/100) = 10 pixels.
    const std::vector<std::size_t> order = saliency_ranking(map);
    Tensor work = raw;
    for (std::size_t r = 0; r < 10; ++r) {
        const std::size_t i = order[r] / 32;
        const std::size_t j = order[r] % 32;
        for (std::size_t ch = 0; ch < 3; ++ch) work.at3(ch, i, j) = 0.0;
    }
    const double expected = model.forward(preprocess(work, prep)).probs[c];
    const PerturbationCurve del =
        perturbation_curve(model, raw, map, c, PerturbationMode::deletion, prep);
    CHECK(same_bits(del.scores[1], expected));
}

TEST_CASE("perturbation curves are deterministic") {
    const MicroCNN& model = mini_model();
    SplitMix64 rng(86);
    const SaliencyMap map{random_tensor({32, 32}, rng, 0.0, 1.0)};
    const PerturbationCurve a =
        perturbation_curve(model, fixture_raw(3), map, 3, PerturbationMode::insertion);
    const PerturbationCurve b =
        perturbation_curve(model, fixture_raw(3), map, 3, PerturbationMode::insertion);
    for (std::size_t i = 0; i < a.scores.size(); ++i)
        CHECK(same_bits(a.scores[i], b.scores[i]));
    CHECK(same_bits(a.auc, b.auc));
}

TEST_CASE("perturbation curve validates shapes and class index") {
    SplitMix64 rng(87);
    const SaliencyMap small{random_tensor({16, 16}, rng, 0.0, 1.0)};
    CHECK_THROWS_AS(perturbation_curve(mini_model(), fixture_raw(), small, 0,
                                       PerturbationMode::deletion),
                    ShapeError);
    const SaliencyMap map{random_tensor({32, 32}, rng, 0.0, 1.0)};
    CHECK_THROWS_AS(perturbation_curve(mini_model(), fixture_raw(), map, 7,
                                       PerturbationMode::deletion),
                    ValueError);
}

TEST_CASE("localization mass on fixed maps and masks") {
    Tensor vals({2, 2});
    vals.at2(0, 0) = 0.3;
    vals.at2(1, 1) = 0.3;
    Tensor mask({2, 2});
    mask.at2(0, 0) = 1.0;
    CHECK(localization_mass(SaliencyMap{vals}, mask) == 0.5);

    Tensor full_mask({2, 2}, 1.0);
    CHECK(localization_mass(SaliencyMap{vals}, full_mask) == 1.0);

    Tensor empty_mask({2, 2});
    CHECK(localization_mass(SaliencyMap{vals}, empty_mask) == 0.0);
}

TEST_CASE("localization mass is invariant under positive rescaling of the map") {
    SplitMix64 rng(88);
    for (int rep = 0; rep < 30; ++rep) {
        Tensor vals = random_tensor({8, 8}, rng, 0.0, 1.0);
        Tensor mask({8, 8});
        for (std::size_t i = 0; i < mask.size(); ++i)
            mask[i] = rng.next_below(2) ? 1.0 : 0.0;
        const double base = localization_mass(SaliencyMap{vals}, mask);
        CHECK(base >= 0.0);
        CHECK(base <= 1.0);
        Tensor scaled = vals;
        for (std::size_t i = 0; i < scaled.size(); ++i) scaled[i] *= 7.25;
        CHECK(std::fabs(localization_mass(SaliencyMap{scaled}, mask) - base) < 1e-12);
    }
}

TEST_CASE("localization mass rejects a zero-mass map and mismatched shapes") {
    CHECK_THROWS_AS(localization_mass(SaliencyMap{Tensor({4, 4})}, Tensor({4, 4}, 1.0)),
                    ValueError);
    CHECK_THROWS_AS(
        localization_mass(SaliencyMap{Tensor({4, 4}, 0.5)}, Tensor({4, 5}, 1.0)),
        ShapeError);
}

TEST_CASE("the trained fixture model localizes better than a uniform map on its shapes") {
    // Not a tight bound, only a sanity link between maps and masks: the
    // uniform map scores exactly the mask's area fraction.
    const ShapesDataset& data = fixture_images();
    const SaliencyMap uniform{Tensor({32, 32}, 1.0)};
    const double area = localization_mass(uniform, data.masks[0]);
    CHECK(area > 0.0);
    CHECK(area < 1.0);
}
