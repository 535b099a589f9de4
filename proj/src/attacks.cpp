#include "lightyear/attacks.hpp"

#include <stdexcept>

namespace lightyear {

void AttackSpec::validate() const {
    if (!(ana_sigma >= 0.0)) throw std::invalid_argument("ana_sigma must satisfy ana_sigma >= 0");
    if (!(ana_scaling_s >= 0.0)) throw std::invalid_argument("ana_scaling_s must satisfy ana_scaling_s >= 0");
    if (!(sfa_alpha > 0.0)) throw std::invalid_argument("sfa_alpha must satisfy sfa_alpha > 0");
}

ParamVector ana(const ParamVector& params, const AttackSpec& spec, Rng& rng) {
    spec.validate();
    ParamVector out = params;
    if (spec.ana_form == AnaForm::plain) {
        for (double& v : out.values) v += spec.ana_sigma * rng.normal();
    } else {
        const double scale = spec.ana_scaling_s / 100.0;
        for (double& v : out.values) v += rng.normal() * scale * v;
    }
    return out;
}

ParamVector sfa(const ParamVector& params, double alpha) {
    if (!(alpha > 0.0)) throw std::invalid_argument("sfa: alpha must satisfy alpha > 0");
    ParamVector out = params;
    for (double& v : out.values) v = -alpha * v;
    return out;
}

ParamVector random_update(const ModelSpec& spec, Rng& rng) { return init_params(spec, rng); }

AttackKind dynamic_choose(Rng& rng) {
    static constexpr AttackKind kChoices[] = {AttackKind::ana, AttackKind::sfa,
                                              AttackKind::random_weights};
    return kChoices[rng.next_below(3)];
}

AttackResult apply_attack(const ParamVector& honest, const AttackSpec& spec, Rng& rng) {
    spec.validate();
    AttackKind kind = spec.kind;
    if (kind == AttackKind::dynamic) kind = dynamic_choose(rng);

    AttackResult res;
    res.applied = kind;
    switch (kind) {
        case AttackKind::none: res.params = honest; break;
        case AttackKind::ana: res.params = ana(honest, spec, rng); break;
        case AttackKind::sfa: res.params = sfa(honest, spec.sfa_alpha); break;
        case AttackKind::random_weights: res.params = random_update(honest.spec, rng); break;
        case AttackKind::dynamic: throw std::logic_error("dynamic must resolve before dispatch");
    }
    return res;
}

std::string to_string(AttackKind kind) {
    switch (kind) {
        case AttackKind::none: return "none";
        case AttackKind::ana: return "ana";
        case AttackKind::sfa: return "sfa";
        case AttackKind::random_weights: return "random_weights";
        case AttackKind::dynamic: return "dynamic";
    }
    return "unknown";
}

}  // namespace lightyear
