#pragma once

#include <set>
#include <vector>

#include "lightyear/data.hpp"
#include "lightyear/nn.hpp"

namespace lightyear {

enum class AccAgreementMode { literal, symmetric };

struct AgreementConfig {
    double tau = 0.75;
    int ece_bins = 10;
    AccAgreementMode acc_mode = AccAgreementMode::symmetric;
    bool entropy_normalized = true;

    void validate() const;
};

// Accuracy-agreement between a local model and a peer on the local
// validation set. literal: mean(correct_i - correct_j), signed, in [-1, 1].
// symmetric: 1 - |literal|, in [0, 1] with identical models scoring 1.
double acc_agreement(const ParamVector& h_i, const ParamVector& h_j, const LabeledDataset& val,
                     AccAgreementMode mode);

// 1 - |ECE(h_i; val) - ECE(h_j; val)|, both calibration errors measured on
// the caller's validation set with the same binning.
double ece_agreement(const ParamVector& h_i, const ParamVector& h_j, const LabeledDataset& val,
                     int n_bins);

// 1 - mean |H(p_i(x)) - H(p_j(x))| over the validation set, using
// normalized entropy by default so the score stays in [0, 1].
double sharp_agreement(const ParamVector& h_i, const ParamVector& h_j, const LabeledDataset& val,
                       bool normalized);

struct AgreementReport {
    int peer_id = -1;
    double a_acc = 0.0;
    double a_ece = 0.0;
    double a_sharp = 0.0;
    double composite = 0.0;
};

// Composite score: mean of the three components under the given config.
AgreementReport agreement_score(const ParamVector& h_i, const ParamVector& h_j,
                                const LabeledDataset& val, const AgreementConfig& cfg,
                                int peer_id = -1);

// Peers whose composite score clears tau. Never selects by identity, only
// by score, so a client id appears iff its report passed the threshold.
std::set<int> select_aggregation_set(const std::vector<AgreementReport>& reports, double tau);

}  // namespace lightyear
