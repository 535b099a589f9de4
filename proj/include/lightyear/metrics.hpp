#pragma once

#include <span>
#include <vector>

#include "lightyear/data.hpp"
#include "lightyear/nn.hpp"

namespace lightyear {

// Fraction of rows whose argmax prediction matches the label. Argmax ties
// resolve to the lowest class index. Requires a nonempty dataset.
double accuracy(const ParamVector& params, const LabeledDataset& data);

// Expected calibration error over `n_bins` equal-width confidence bins on
// (0, 1]; the lowest bin also admits 0. Empty bins contribute nothing.
// conf[i] is the winning-class probability, correct[i] whether that class
// was the label.
double ece_from_scores(std::span<const double> conf, const std::vector<bool>& correct, int n_bins);

// ECE of a model's top-1 confidences on `data`.
double ece(const ParamVector& params, const LabeledDataset& data, int n_bins);

// Shannon entropy of a distribution divided by ln(K), so the result lies in
// [0, 1]. `probs` must be a valid distribution (sum within 1e-9 of 1, no
// negative entries, K >= 2).
double normalized_entropy(std::span<const double> probs);

// Same validation, natural-log entropy without the 1/ln(K) factor.
double raw_entropy(std::span<const double> probs);

struct EvalReport {
    double accuracy = 0.0;
    double ece = 0.0;
    double mean_normalized_entropy = 0.0;
};

EvalReport evaluate(const ParamVector& params, const LabeledDataset& data, int ece_bins);

}  // namespace lightyear
