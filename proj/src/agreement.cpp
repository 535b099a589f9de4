#include "lightyear/agreement.hpp"

#include <cmath>
#include <stdexcept>

#include "lightyear/metrics.hpp"

namespace lightyear {

namespace {

struct ModelOnVal {
    std::vector<double> conf;     // winning-class probability per row
    std::vector<bool> correct;    // winning class == label
    std::vector<double> entropy;  // per-row prediction entropy
};

int argmax_lowest(const std::vector<double>& v) {
    int best = 0;
    for (int k = 1; k < static_cast<int>(v.size()); ++k)
        if (v[static_cast<std::size_t>(k)] > v[static_cast<std::size_t>(best)]) best = k;
    return best;
}

ModelOnVal profile(const ParamVector& params, const LabeledDataset& val, bool normalized_entropy_flag) {
    ModelOnVal m;
    m.conf.resize(static_cast<std::size_t>(val.size()));
    m.correct.resize(static_cast<std::size_t>(val.size()));
    m.entropy.resize(static_cast<std::size_t>(val.size()));
    for (int i = 0; i < val.size(); ++i) {
        const std::vector<double> p = predict_proba(params, val.row(i));
        const int pred = argmax_lowest(p);
        m.conf[static_cast<std::size_t>(i)] = p[static_cast<std::size_t>(pred)];
        m.correct[static_cast<std::size_t>(i)] = pred == val.labels[static_cast<std::size_t>(i)];
        m.entropy[static_cast<std::size_t>(i)] = normalized_entropy_flag ? normalized_entropy(p) : raw_entropy(p);
    }
    return m;
}

double literal_acc(const ModelOnVal& mi, const ModelOnVal& mj) {
    double s = 0.0;
    for (std::size_t r = 0; r < mi.correct.size(); ++r)
        s += (mi.correct[r] ? 1.0 : 0.0) - (mj.correct[r] ? 1.0 : 0.0);
    return s / static_cast<double>(mi.correct.size());
}

void check_inputs(const ParamVector& h_i, const ParamVector& h_j, const LabeledDataset& val) {
    require_same_spec(h_i, h_j, "agreement");
    if (val.size() == 0) throw std::invalid_argument("agreement: empty validation set");
}

}  // namespace

void AgreementConfig::validate() const {
    if (ece_bins < 1) throw std::invalid_argument("ece_bins must satisfy ece_bins >= 1");
}

double acc_agreement(const ParamVector& h_i, const ParamVector& h_j, const LabeledDataset& val,
                     AccAgreementMode mode) {
    check_inputs(h_i, h_j, val);
    const ModelOnVal mi = profile(h_i, val, true);
    const ModelOnVal mj = profile(h_j, val, true);
    const double lit = literal_acc(mi, mj);
    return mode == AccAgreementMode::literal ? lit : 1.0 - std::abs(lit);
}

double ece_agreement(const ParamVector& h_i, const ParamVector& h_j, const LabeledDataset& val,
                     int n_bins) {
    check_inputs(h_i, h_j, val);
    const ModelOnVal mi = profile(h_i, val, true);
    const ModelOnVal mj = profile(h_j, val, true);
    const double e_i = ece_from_scores(mi.conf, mi.correct, n_bins);
    const double e_j = ece_from_scores(mj.conf, mj.correct, n_bins);
    return 1.0 - std::abs(e_i - e_j);
}

double sharp_agreement(const ParamVector& h_i, const ParamVector& h_j, const LabeledDataset& val,
                       bool normalized) {
    check_inputs(h_i, h_j, val);
    const ModelOnVal mi = profile(h_i, val, normalized);
    const ModelOnVal mj = profile(h_j, val, normalized);
    double s = 0.0;
    for (std::size_t r = 0; r < mi.entropy.size(); ++r) s += std::abs(mi.entropy[r] - mj.entropy[r]);
    return 1.0 - s / static_cast<double>(mi.entropy.size());
}

AgreementReport agreement_score(const ParamVector& h_i, const ParamVector& h_j,
                                const LabeledDataset& val, const AgreementConfig& cfg, int peer_id) {
    check_inputs(h_i, h_j, val);
    cfg.validate();

    // One profile per model serves all three components.
    const ModelOnVal mi = profile(h_i, val, cfg.entropy_normalized);
    const ModelOnVal mj = profile(h_j, val, cfg.entropy_normalized);

    AgreementReport rep;
    rep.peer_id = peer_id;
    const double lit = literal_acc(mi, mj);
    rep.a_acc = cfg.acc_mode == AccAgreementMode::literal ? lit : 1.0 - std::abs(lit);
    const double e_i = ece_from_scores(mi.conf, mi.correct, cfg.ece_bins);
    const double e_j = ece_from_scores(mj.conf, mj.correct, cfg.ece_bins);
    rep.a_ece = 1.0 - std::abs(e_i - e_j);
    double s = 0.0;
    for (std::size_t r = 0; r < mi.entropy.size(); ++r) s += std::abs(mi.entropy[r] - mj.entropy[r]);
    rep.a_sharp = 1.0 - s / static_cast<double>(mi.entropy.size());
    rep.composite = (rep.a_acc + rep.a_ece + rep.a_sharp) / 3.0;
    return rep;
}

std::set<int> select_aggregation_set(const std::vector<AgreementReport>& reports, double tau) {
    std::set<int> selected;
    for (const AgreementReport& r : reports)
        if (r.composite >= tau) selected.insert(r.peer_id);
    return selected;
}

}  // namespace lightyear
