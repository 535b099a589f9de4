#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "lightyear/data.hpp"
#include "lightyear/metrics.hpp"
#include "lightyear/nn.hpp"
#include "lightyear/rng.hpp"

using namespace lightyear;

namespace {

ParamVector zero_model(const ModelSpec& spec) {
    ParamVector p;
    p.spec = spec;
    p.values.assign(spec.param_count(), 0.0);
    return p;
}

}  // namespace

TEST_SUITE_BEGIN("metrics");

TEST_CASE("accuracy of a constant-class model is the class frequency") {
    // Zero parameters give all-equal logits; argmax ties resolve to class 0.
    LabeledDataset d;
    d.n_features = 2;
    d.n_classes = 3;
    const std::vector<int> labels{0, 0, 1, 2, 0, 1, 0};
    for (std::size_t i = 0; i < labels.size(); ++i)
        d.push_row(std::vector<double>{static_cast<double>(i), 1.0}, labels[i]);
    const ParamVector p = zero_model(ModelSpec{{2, 3}, Activation::relu});
    CHECK(accuracy(p, d) == doctest::Approx(4.0 / 7.0).epsilon(1e-12));
}

TEST_CASE("accuracy sees through a hand-built perfect classifier") {
    // W maps feature k straight to logit k, so the argmax is the largest
    // feature; build rows whose largest feature index is the label.
    LabeledDataset d;
    d.n_features = 3;
    d.n_classes = 3;
    d.push_row(std::vector<double>{5.0, 1.0, 0.0}, 0);
    d.push_row(std::vector<double>{0.0, 4.0, 1.0}, 1);
    d.push_row(std::vector<double>{1.0, 0.0, 9.0}, 2);
    ParamVector p = zero_model(ModelSpec{{3, 3}, Activation::relu});
    p.values[0] = 1.0;  // W[0][0]
    p.values[4] = 1.0;  // W[1][1]
    p.values[8] = 1.0;  // W[2][2]
    CHECK(accuracy(p, d) == 1.0);
}

TEST_CASE("random models on a balanced task score near chance") {
    // Weak separation: with widely spaced clusters a random projection can
    // accidentally align with the geometry and leave the chance band.
    const LabeledDataset d = gen_gaussian_task(4, 8, 200, 1.0, 51);
    const ModelSpec spec{{8, 16, 4}, Activation::relu};
    for (int seed = 0; seed < 20; ++seed) {
        const ParamVector p = init_params(spec, static_cast<std::uint64_t>(seed) + 1000);
        const double acc = accuracy(p, d);
        CAPTURE(seed);
        CHECK(acc >= 0.1);
        CHECK(acc <= 0.45);
    }
}

TEST_CASE("accuracy rejects an empty dataset") {
    LabeledDataset d;
    d.n_features = 2;
    d.n_classes = 2;
    const ParamVector p = zero_model(ModelSpec{{2, 2}, Activation::relu});
    CHECK_THROWS_AS(accuracy(p, d), std::invalid_argument);
}

TEST_CASE("ece matches the hand-computed fixture") {
    // Four bins of width 0.25. Bin (0.5,0.75] holds 0.6 and 0.55: mean conf
    // 0.575, mean acc 0.5, gap 0.075, weight 1/2. Bin (0.75,1] holds 0.9 and
    // 0.8: mean conf 0.85, mean acc 1.0, gap 0.15, weight 1/2.
    // 0.5*0.075 + 0.5*0.15 = 0.1125.
    const std::vector<double> conf{0.9, 0.8, 0.6, 0.55};
    const std::vector<bool> correct{true, true, false, true};
    CHECK(ece_from_scores(conf, correct, 4) == doctest::Approx(0.1125).epsilon(1e-12));
}

TEST_CASE("ece is zero when every bin is perfectly calibrated") {
    // 4 of 5 correct at confidence 0.8: bin mean conf = bin accuracy.
    const std::vector<double> conf{0.8, 0.8, 0.8, 0.8, 0.8};
    const std::vector<bool> correct{true, true, true, true, false};
    CHECK(ece_from_scores(conf, correct, 10) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("ece of a confidently correct model is zero") {
    const std::vector<double> conf{1.0, 1.0, 1.0};
    const std::vector<bool> correct{true, true, true};
    CHECK(ece_from_scores(conf, correct, 10) == 0.0);
}

TEST_CASE("ece is permutation invariant and bounded") {
    Rng rng(8);
    std::vector<double> conf;
    std::vector<bool> correct;
    for (int i = 0; i < 100; ++i) {
        conf.push_back(0.25 + 0.75 * rng.uniform01());
        correct.push_back(rng.uniform01() < 0.6);
    }
    const double base = ece_from_scores(conf, correct, 10);
    CHECK(base >= 0.0);
    CHECK(base <= 1.0);

    // Reverse both in lockstep: binning is order-free.
    std::vector<double> rconf(conf.rbegin(), conf.rend());
    std::vector<bool> rcorrect(correct.rbegin(), correct.rend());
    CHECK(ece_from_scores(rconf, rcorrect, 10) == doctest::Approx(base).epsilon(1e-12));
}

TEST_CASE("boundary confidences land in the closed-top bins") {
    // 0.25 belongs to (0, 0.25], 0.250001 to (0.25, 0.5]; a confidence of
    // exactly 0 joins the lowest bin.
    const std::vector<double> conf{0.25, 0.0};
    const std::vector<bool> correct{true, false};
    // Both land in bin 0: mean conf 0.125, mean acc 0.5 -> |0.5-0.125| = 0.375.
    CHECK(ece_from_scores(conf, correct, 4) == doctest::Approx(0.375).epsilon(1e-12));
}

TEST_CASE("model ece agrees with a manual confidence extraction") {
    const LabeledDataset d = gen_gaussian_task(3, 4, 150, 2.0, 61);
    const ParamVector p = init_params(ModelSpec{{4, 8, 3}, Activation::tanh_act}, 5);
    std::vector<double> conf;
    std::vector<bool> correct;
    for (int i = 0; i < d.size(); ++i) {
        const std::vector<double> probs = predict_proba(p, d.row(i));
        int best = 0;
        for (int k = 1; k < 3; ++k)
            if (probs[static_cast<std::size_t>(k)] > probs[static_cast<std::size_t>(best)]) best = k;
        conf.push_back(probs[static_cast<std::size_t>(best)]);
        correct.push_back(best == d.labels[static_cast<std::size_t>(i)]);
    }
    CHECK(ece(p, d, 10) == doctest::Approx(ece_from_scores(conf, correct, 10)).epsilon(1e-12));
}

TEST_CASE("ece input validation") {
    CHECK_THROWS_AS(ece_from_scores(std::vector<double>{}, std::vector<bool>{}, 10),
                    std::invalid_argument);
    CHECK_THROWS_AS(ece_from_scores(std::vector<double>{0.5}, std::vector<bool>{true, false}, 10),
                    std::invalid_argument);
    CHECK_THROWS_AS(ece_from_scores(std::vector<double>{1.5}, std::vector<bool>{true}, 10),
                    std::invalid_argument);
    CHECK_THROWS_AS(ece_from_scores(std::vector<double>{0.5}, std::vector<bool>{true}, 0),
                    std::invalid_argument);
}

TEST_CASE("normalized entropy hits its landmarks") {
    CHECK(normalized_entropy(std::vector<double>{0.25, 0.25, 0.25, 0.25}) ==
          doctest::Approx(1.0).epsilon(1e-12));
    CHECK(normalized_entropy(std::vector<double>{1.0, 0.0, 0.0, 0.0}) == 0.0);
    // H(0.5, 0.5, 0, 0) = ln 2; normalized by ln 4 -> exactly one half.
    CHECK(normalized_entropy(std::vector<double>{0.5, 0.5, 0.0, 0.0}) ==
          doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("raw entropy is the normalized value scaled by ln K") {
    const std::vector<double> p{0.7, 0.1, 0.1, 0.1};
    CHECK(raw_entropy(p) == doctest::Approx(normalized_entropy(p) * std::log(4.0)).epsilon(1e-12));
}

TEST_CASE("entropy validates its input distribution") {
    CHECK_THROWS_AS(normalized_entropy(std::vector<double>{0.5, 0.6}), std::invalid_argument);
    CHECK_THROWS_AS(normalized_entropy(std::vector<double>{-0.1, 1.1}), std::invalid_argument);
    CHECK_THROWS_AS(normalized_entropy(std::vector<double>{1.0}), std::invalid_argument);
}

TEST_CASE("evaluate bundles accuracy, ece and mean entropy consistently") {
    const LabeledDataset d = gen_gaussian_task(3, 3, 120, 3.0, 71);
    const ParamVector p = init_params(ModelSpec{{3, 6, 3}, Activation::relu}, 9);
    const EvalReport rep = evaluate(p, d, 10);
    CHECK(rep.accuracy == doctest::Approx(accuracy(p, d)).epsilon(1e-12));
    CHECK(rep.ece == doctest::Approx(ece(p, d, 10)).epsilon(1e-12));
    double mean_h = 0.0;
    for (int i = 0; i < d.size(); ++i) mean_h += normalized_entropy(predict_proba(p, d.row(i)));
    CHECK(rep.mean_normalized_entropy == doctest::Approx(mean_h / d.size()).epsilon(1e-12));
}

TEST_SUITE_END();
