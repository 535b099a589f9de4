#pragma once

#include <vector>

#include "lightyear/nn.hpp"

namespace lightyear {

struct LightyearConfig {
    double gamma = 0.95;
    // Exponent is round_t - round_index_base; the default 0 makes the first
    // communication round (t = 1) use gamma^1.
    int round_index_base = 0;

    void validate() const;
};

struct BaselineConfig {
    int krum_f = 1;
    double balance_gamma = 0.3;
    double balance_kappa = 1.0;
    // 0 means "calibrate per receiver": the first round's median update
    // distance becomes that receiver's fixed radius.
    double scclip_radius = 0.0;

    void validate() const;
};

// Round-decayed regularized step toward the mean of the selected updates:
//   result = own + gamma^(t-base) * (mean(selected) - own).
// Empty selection returns `own` unchanged. Requires t - base >= 0.
ParamVector lightyear_aggregate(const ParamVector& own,
                                const std::vector<ParamVector>& selected, int round_t,
                                const LightyearConfig& cfg);

// Unweighted elementwise mean. Requires at least one update.
ParamVector fedavg(const std::vector<ParamVector>& updates);

// Returns the update with the smallest sum of squared distances to its
// n - f - 2 nearest peers; ties resolve to the lowest index. Requires
// n >= f + 3.
ParamVector krum(const std::vector<ParamVector>& updates, int f);

// Accepts peers within gamma_b * exp(-kappa * t / T) * ||own|| of `own`,
// then blends own and the accepted mean half and half. With no acceptances
// the own model is kept.
ParamVector balance(const ParamVector& own, const std::vector<ParamVector>& updates,
                    int round_t, int total_rounds, const BaselineConfig& cfg);

// Clips each update's offset from `own` to the given radius, then adds the
// mean clipped offset. Requires radius > 0.
ParamVector scclip(const ParamVector& own, const std::vector<ParamVector>& updates,
                   double radius);

}  // namespace lightyear
