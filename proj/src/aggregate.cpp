#include "lightyear/aggregate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace lightyear {

namespace {

void check_uniform_specs(const std::vector<ParamVector>& updates, const std::string& where) {
    for (std::size_t i = 1; i < updates.size(); ++i) require_same_spec(updates[0], updates[i], where);
}

}  // namespace

void LightyearConfig::validate() const {
    if (!(gamma > 0.0 && gamma <= 1.0)) throw std::invalid_argument("gamma must satisfy gamma in (0,1]");
    if (round_index_base < 0) throw std::invalid_argument("round_index_base must satisfy round_index_base >= 0");
}

void BaselineConfig::validate() const {
    if (krum_f < 0) throw std::invalid_argument("krum_f must satisfy krum_f >= 0");
    if (!(balance_gamma > 0.0)) throw std::invalid_argument("balance_gamma must satisfy balance_gamma > 0");
    if (!(balance_kappa >= 0.0)) throw std::invalid_argument("balance_kappa must satisfy balance_kappa >= 0");
    if (!(scclip_radius >= 0.0)) throw std::invalid_argument("scclip_radius must satisfy scclip_radius >= 0");
}

ParamVector fedavg(const std::vector<ParamVector>& updates) {
    if (updates.empty()) throw std::invalid_argument("fedavg: no updates");
    check_uniform_specs(updates, "fedavg");
    ParamVector mean = updates[0];
    for (std::size_t u = 1; u < updates.size(); ++u)
        for (std::size_t i = 0; i < mean.values.size(); ++i) mean.values[i] += updates[u].values[i];
    const double inv = 1.0 / static_cast<double>(updates.size());
    for (double& v : mean.values) v *= inv;
    return mean;
}

ParamVector lightyear_aggregate(const ParamVector& own, const std::vector<ParamVector>& selected,
                                int round_t, const LightyearConfig& cfg) {
    cfg.validate();
    if (selected.empty()) return own;
    const int exponent = round_t - cfg.round_index_base;
    if (exponent < 0)
        throw std::invalid_argument("lightyear_aggregate: round_t must satisfy round_t >= round_index_base");
    for (const ParamVector& p : selected) require_same_spec(own, p, "lightyear_aggregate");

    const ParamVector mean = fedavg(selected);
    const double g = std::pow(cfg.gamma, exponent);
    ParamVector out = own;
    // own + g*(mean - own), written as a convex combination so g == 1
    // reproduces the plain mean bit for bit.
    for (std::size_t i = 0; i < out.values.size(); ++i)
        out.values[i] = (1.0 - g) * own.values[i] + g * mean.values[i];
    return out;
}

ParamVector krum(const std::vector<ParamVector>& updates, int f) {
    const int n = static_cast<int>(updates.size());
    if (f < 0) throw std::invalid_argument("krum: f must satisfy f >= 0");
    if (n < f + 3)
        throw std::invalid_argument("krum: needs at least f + 3 updates, got " + std::to_string(n));
    check_uniform_specs(updates, "krum");

    // Squared distances once; each row then keeps its n - f - 2 smallest.
    std::vector<std::vector<double>> d2(static_cast<std::size_t>(n),
                                        std::vector<double>(static_cast<std::size_t>(n), 0.0));
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            const double d = l2_distance(updates[static_cast<std::size_t>(i)], updates[static_cast<std::size_t>(j)]);
            d2[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = d * d;
            d2[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)] = d * d;
        }

    const int keep = n - f - 2;
    int best = -1;
    double best_score = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) {
        std::vector<double> row;
        row.reserve(static_cast<std::size_t>(n) - 1);
        for (int j = 0; j < n; ++j)
            if (j != i) row.push_back(d2[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]);
        std::sort(row.begin(), row.end());
        double score = 0.0;
        for (int k = 0; k < keep; ++k) score += row[static_cast<std::size_t>(k)];
        if (score < best_score) {  // strict: ties resolve to the lowest index
            best_score = score;
            best = i;
        }
    }
    return updates[static_cast<std::size_t>(best)];
}

ParamVector balance(const ParamVector& own, const std::vector<ParamVector>& updates, int round_t,
                    int total_rounds, const BaselineConfig& cfg) {
    cfg.validate();
    if (total_rounds < 1) throw std::invalid_argument("balance: total_rounds must satisfy total_rounds >= 1");
    if (round_t < 0) throw std::invalid_argument("balance: round_t must satisfy round_t >= 0");

    const double threshold =
        cfg.balance_gamma * std::exp(-cfg.balance_kappa * static_cast<double>(round_t) / total_rounds) *
        l2_norm(own);

    std::vector<ParamVector> accepted;
    for (const ParamVector& u : updates) {
        require_same_spec(own, u, "balance");
        if (l2_distance(u, own) <= threshold) accepted.push_back(u);
    }
    if (accepted.empty()) return own;

    const ParamVector mean = fedavg(accepted);
    ParamVector out = own;
    for (std::size_t i = 0; i < out.values.size(); ++i)
        out.values[i] = 0.5 * own.values[i] + 0.5 * mean.values[i];
    return out;
}

ParamVector scclip(const ParamVector& own, const std::vector<ParamVector>& updates, double radius) {
    if (!(radius > 0.0)) throw std::invalid_argument("scclip: radius must satisfy radius > 0");
    if (updates.empty()) throw std::invalid_argument("scclip: no updates");

    ParamVector offset_mean = own;
    std::fill(offset_mean.values.begin(), offset_mean.values.end(), 0.0);
    for (const ParamVector& u : updates) {
        require_same_spec(own, u, "scclip");
        const double dist = l2_distance(u, own);
        const double scale = dist > radius ? radius / dist : 1.0;
        for (std::size_t i = 0; i < own.values.size(); ++i)
            offset_mean.values[i] += scale * (u.values[i] - own.values[i]);
    }
    const double inv = 1.0 / static_cast<double>(updates.size());
    ParamVector out = own;
    for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] += inv * offset_mean.values[i];
    return out;
}

}  // namespace lightyear
