#include "lightyear/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace lightyear {

namespace {

// Winning class with ties resolved to the lowest index.
int argmax_lowest(std::span<const double> v) {
    int best = 0;
    for (int k = 1; k < static_cast<int>(v.size()); ++k)
        if (v[static_cast<std::size_t>(k)] > v[static_cast<std::size_t>(best)]) best = k;
    return best;
}

// Equal-width bins on (0, 1]; bin b covers (b/B, (b+1)/B], except bin 0
// which also admits confidence 0.
int bin_index(double conf, int n_bins) {
    if (conf <= 0.0) return 0;
    const int b = static_cast<int>(std::ceil(conf * n_bins)) - 1;
    return std::clamp(b, 0, n_bins - 1);
}

void check_distribution(std::span<const double> probs) {
    if (probs.size() < 2)
        throw std::invalid_argument("entropy needs a distribution over at least 2 classes");
    double sum = 0.0;
    for (const double p : probs) {
        if (p < 0.0) throw std::invalid_argument("entropy: negative probability");
        sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9)
        throw std::invalid_argument("entropy: probabilities must sum to 1");
}

}  // namespace

double accuracy(const ParamVector& params, const LabeledDataset& data) {
    if (data.size() == 0) throw std::invalid_argument("accuracy: empty dataset");
    int hits = 0;
    for (int i = 0; i < data.size(); ++i) {
        const std::vector<double> z = logits(params, data.row(i));
        if (argmax_lowest(z) == data.labels[static_cast<std::size_t>(i)]) ++hits;
    }
    return static_cast<double>(hits) / data.size();
}

double ece_from_scores(std::span<const double> conf, const std::vector<bool>& correct, int n_bins) {
    if (n_bins < 1) throw std::invalid_argument("ece: n_bins must satisfy n_bins >= 1");
    if (conf.size() != correct.size()) throw std::invalid_argument("ece: mismatched input lengths");
    if (conf.empty()) throw std::invalid_argument("ece: empty inputs");
    for (const double c : conf)
        if (!(c >= 0.0 && c <= 1.0)) throw std::invalid_argument("ece: confidence outside [0,1]");

    std::vector<double> conf_sum(static_cast<std::size_t>(n_bins), 0.0);
    std::vector<double> acc_sum(static_cast<std::size_t>(n_bins), 0.0);
    std::vector<int> count(static_cast<std::size_t>(n_bins), 0);
    for (std::size_t i = 0; i < conf.size(); ++i) {
        const int b = bin_index(conf[i], n_bins);
        conf_sum[static_cast<std::size_t>(b)] += conf[i];
        acc_sum[static_cast<std::size_t>(b)] += correct[i] ? 1.0 : 0.0;
        ++count[static_cast<std::size_t>(b)];
    }
    const double n = static_cast<double>(conf.size());
    double ece = 0.0;
    for (int b = 0; b < n_bins; ++b) {
        const int c = count[static_cast<std::size_t>(b)];
        if (c == 0) continue;
        const double mean_conf = conf_sum[static_cast<std::size_t>(b)] / c;
        const double mean_acc = acc_sum[static_cast<std::size_t>(b)] / c;
        ece += (c / n) * std::abs(mean_acc - mean_conf);
    }
    return ece;
}

double ece(const ParamVector& params, const LabeledDataset& data, int n_bins) {
    if (data.size() == 0) throw std::invalid_argument("ece: empty dataset");
    std::vector<double> conf(static_cast<std::size_t>(data.size()));
    std::vector<bool> correct(static_cast<std::size_t>(data.size()));
    for (int i = 0; i < data.size(); ++i) {
        const std::vector<double> p = predict_proba(params, data.row(i));
        const int pred = argmax_lowest(p);
        conf[static_cast<std::size_t>(i)] = p[static_cast<std::size_t>(pred)];
        correct[static_cast<std::size_t>(i)] = pred == data.labels[static_cast<std::size_t>(i)];
    }
    return ece_from_scores(conf, correct, n_bins);
}

double raw_entropy(std::span<const double> probs) {
    check_distribution(probs);
    double h = 0.0;
    for (const double p : probs)
        if (p > 0.0) h -= p * std::log(p);
    return h;
}

double normalized_entropy(std::span<const double> probs) {
    return raw_entropy(probs) / std::log(static_cast<double>(probs.size()));
}

EvalReport evaluate(const ParamVector& params, const LabeledDataset& data, int ece_bins) {
    if (data.size() == 0) throw std::invalid_argument("evaluate: empty dataset");
    std::vector<double> conf(static_cast<std::size_t>(data.size()));
    std::vector<bool> correct(static_cast<std::size_t>(data.size()));
    double entropy_sum = 0.0;
    int hits = 0;
    for (int i = 0; i < data.size(); ++i) {
        const std::vector<double> p = predict_proba(params, data.row(i));
        const int pred = argmax_lowest(p);
        conf[static_cast<std::size_t>(i)] = p[static_cast<std::size_t>(pred)];
        const bool ok = pred == data.labels[static_cast<std::size_t>(i)];
        correct[static_cast<std::size_t>(i)] = ok;
        hits += ok ? 1 : 0;
        entropy_sum += normalized_entropy(p);
    }
    EvalReport rep;
    rep.accuracy = static_cast<double>(hits) / data.size();
    rep.ece = ece_from_scores(conf, correct, ece_bins);
    rep.mean_normalized_entropy = entropy_sum / data.size();
    return rep;
}

}  // namespace lightyear
