#pragma once

#include <string>

#include "lightyear/nn.hpp"
#include "lightyear/rng.hpp"

namespace lightyear {

enum class AttackKind { none, ana, sfa, random_weights, dynamic };

enum class AnaForm { plain, scaled };

struct AttackSpec {
    AttackKind kind = AttackKind::none;
    AnaForm ana_form = AnaForm::scaled;
    double ana_sigma = 1.0;      // plain form: additive N(0, sigma^2) per coordinate
    double ana_scaling_s = 120.5;  // scaled form: noise proportional to s/100 of each weight
    double sfa_alpha = 1.0;

    void validate() const;
};

// Additive-noise corruption. plain: theta_k + sigma*eps_k. scaled:
// theta_k + eps_k * (s/100) * theta_k, eps_k ~ N(0,1). One normal draw per
// coordinate, in index order.
ParamVector ana(const ParamVector& params, const AttackSpec& spec, Rng& rng);

// Sign flip scaled by alpha: -alpha * theta. alpha must be > 0.
ParamVector sfa(const ParamVector& params, double alpha);

// A fresh initializer draw: plausible magnitudes, no training signal.
ParamVector random_update(const ModelSpec& spec, Rng& rng);

// Uniform choice among the three concrete attacks (never none, never
// dynamic itself).
AttackKind dynamic_choose(Rng& rng);

struct AttackResult {
    ParamVector params;
    AttackKind applied = AttackKind::none;  // resolved kind (dynamic reports its draw)
};

// Dispatch on spec.kind against the honest update. kind none passes the
// update through untouched.
AttackResult apply_attack(const ParamVector& honest, const AttackSpec& spec, Rng& rng);

std::string to_string(AttackKind kind);

}  // namespace lightyear
