#pragma once

#include <random>

#include "llmjoin/cost_model.hpp"
#include "llmjoin/cost_params.hpp"

namespace testsupport {

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
    double u = static_cast<double>(rng() >> 11) * 0x1p-53;
    return lo + (hi - lo) * u;
}

/// Valid random cost parameters: the budget always fits at least one tuple
/// from each table with generous headroom.
inline llmjoin::CostParams random_params(std::mt19937_64& rng) {
    llmjoin::CostParams p;
    p.r1 = 1 + static_cast<std::int64_t>(rng() % 2000);
    p.r2 = 1 + static_cast<std::int64_t>(rng() % 2000);
    p.s1 = uniform(rng, 1.0, 80.0);
    p.s2 = uniform(rng, 1.0, 80.0);
    p.s3 = uniform(rng, 0.5, 6.0);
    double u = uniform(rng, 0.0, 1.0);
    p.sigma = u * u;  // bias toward selective joins
    p.g = uniform(rng, 1.0, 4.0);
    p.p = uniform(rng, 0.0, 120.0);
    p.t = (p.s1 + p.s2 + p.sigma * p.s3) * uniform(rng, 1.5, 40.0);
    return p;
}

/// A batch-size pair strictly inside the feasible region.
inline llmjoin::BatchSizes random_feasible_batches(std::mt19937_64& rng,
                                                   const llmjoin::CostParams& p) {
    for (;;) {
        double b1_max = 0.9 * p.t / p.s1;
        double b1 = uniform(rng, 1.0, std::max(1.0, b1_max));
        double room = (p.t - b1 * p.s1) / (p.s2 + b1 * p.s3 * p.sigma);
        if (room < 1.0) continue;
        double b2 = uniform(rng, 1.0, room);
        llmjoin::BatchSizes b{b1, b2};
        if (llmjoin::feasible(p, b)) return b;
    }
}

} // namespace testsupport
