#pragma once

#include <cmath>
#include <cstdint>
#include <string>

#include "llmjoin/cost_params.hpp"
#include "llmjoin/errors.hpp"

namespace llmjoin {

/// Tuples per prompt for each table. The analysis treats batch sizes as
/// continuous; execution uses the integer counterparts.
struct BatchSizes {
    double b1 = 1.0;
    double b2 = 1.0;
};

struct IntBatchSizes {
    std::int64_t b1 = 1;
    std::int64_t b2 = 1;

    BatchSizes as_continuous() const {
        return BatchSizes{static_cast<double>(b1), static_cast<double>(b2)};
    }
};

// Comparisons against the budget use a tiny relative slack so that batch
// sizes derived from the saturation equation stay feasible.
inline constexpr double kBudgetSlack = 1e-9;

/// Token cost of comparing one tuple pair: static prompt, both tuples,
/// and the single generated answer token.
inline double tuple_pair_cost(const CostParams& params) {
    return params.p + params.s1 + params.s2 + params.g;
}

/// Total cost of the pairwise nested loops join.
inline double tuple_join_cost(const CostParams& params) {
    return static_cast<double>(params.r1) * static_cast<double>(params.r2) *
           tuple_pair_cost(params);
}

/// Expected tokens processed per invocation of the batched join: static
/// prompt, both batches, and the expected result pairs.
inline double block_prompt_size(const CostParams& params, const BatchSizes& b) {
    return params.p + b.b1 * params.s1 + b.b2 * params.s2 +
           b.b1 * b.b2 * params.sigma * params.s3;
}

/// Like block_prompt_size but weighs the generated pairs by g.
inline double block_prompt_cost(const CostParams& params, const BatchSizes& b) {
    return params.p + b.b1 * params.s1 + b.b2 * params.s2 +
           b.b1 * b.b2 * params.sigma * params.s3 * params.g;
}

/// Continuous invocation count (r1/b1)*(r2/b2).
inline double block_invocations(const CostParams& params, const BatchSizes& b) {
    return (static_cast<double>(params.r1) / b.b1) *
           (static_cast<double>(params.r2) / b.b2);
}

/// Invocation count of the concrete execution, with partial trailing batches.
inline std::int64_t block_invocations_int(const CostParams& params, const IntBatchSizes& b) {
    auto ceil_div = [](std::int64_t a, std::int64_t d) { return (a + d - 1) / d; };
    return ceil_div(params.r1, b.b1) * ceil_div(params.r2, b.b2);
}

/// Does the expected prompt content fit within the token budget?
inline bool feasible(const CostParams& params, const BatchSizes& b) {
    if (b.b1 < 1.0 || b.b2 < 1.0) return false;
    double used = b.b1 * params.s1 + b.b2 * params.s2 +
                  b.b1 * b.b2 * params.s3 * params.sigma;
    return used <= params.t * (1.0 + kBudgetSlack);
}

/// Total join cost c(b1,b2) under the continuous analysis.
inline double block_join_cost(const CostParams& params, const BatchSizes& b) {
    if (!feasible(params, b)) {
        throw InfeasibleBatch("batch sizes (" + std::to_string(b.b1) + ", " +
                              std::to_string(b.b2) + ") exceed the token budget t=" +
                              std::to_string(params.t));
    }
    return block_invocations(params, b) * block_prompt_cost(params, b);
}

inline double block_join_cost(const CostParams& params, const IntBatchSizes& b) {
    return block_join_cost(params, b.as_continuous());
}

/// Join cost as a function of b1 alone, with b2 chosen to saturate the
/// token budget: c*(b1) = c(b1, b2(b1)).
inline double cstar(const CostParams& params, double b1) {
    if (b1 <= 0.0 || b1 * params.s1 >= params.t) {
        throw DomainError("cstar: b1 must satisfy 0 < b1*s1 < t, got b1=" +
                          std::to_string(b1));
    }
    double rr = static_cast<double>(params.r1) * static_cast<double>(params.r2);
    double out = params.s3 * params.sigma;
    return rr * ((params.s2 / b1 + out) * (params.p + b1 * params.s1) /
                     (params.t - b1 * params.s1) +
                 params.s2 / b1 + out * params.g);
}

} // namespace llmjoin
