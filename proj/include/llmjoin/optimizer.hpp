#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>

#include "llmjoin/cost_model.hpp"
#include "llmjoin/cost_params.hpp"
#include "llmjoin/errors.hpp"

namespace llmjoin {

/// Largest b2 that still fits the budget for a given b1; any cost-minimal
/// solution saturates the token constraint with equality.
inline double b2_of_b1(const CostParams& params, double b1) {
    if (b1 <= 0.0 || b1 * params.s1 >= params.t) {
        throw DomainError("b2_of_b1: need 0 < b1*s1 < t, got b1=" + std::to_string(b1));
    }
    return (params.t - b1 * params.s1) / (params.s2 + b1 * params.s3 * params.sigma);
}

/// Batch size for the first table minimizing c*(b1).
///
/// Computed as s2*t / (sqrt(s1^2*s2^2 + s1*s2*s3*sigma*t) + s1*s2), which
/// equals the quadratic root for sigma > 0 and degrades gracefully to
/// t/(2*s1) as sigma -> 0.
inline double optimal_b1(const CostParams& params) {
    double s1s2 = params.s1 * params.s2;
    double root = std::sqrt(s1s2 * s1s2 + s1s2 * params.s3 * params.sigma * params.t);
    return params.s2 * params.t / (root + s1s2);
}

/// First-order derivative of c*(b1).
inline double derivative_cstar(const CostParams& params, double b1) {
    if (b1 <= 0.0 || b1 * params.s1 >= params.t) {
        throw DomainError("derivative_cstar: need 0 < b1*s1 < t, got b1=" +
                          std::to_string(b1));
    }
    double rr = static_cast<double>(params.r1) * static_cast<double>(params.r2);
    double numerator = b1 * b1 * params.s1 * params.s3 * params.sigma +
                       2.0 * b1 * params.s1 * params.s2 - params.s2 * params.t;
    double rest = params.t - b1 * params.s1;
    return rr * (params.t + params.p) * numerator / (rest * rest * b1 * b1);
}

struct OptimizerResult {
    double b1_star = 0.0;
    double b2_star = 0.0;
    std::int64_t ib1 = 1;
    std::int64_t ib2 = 1;
    double predicted_cost = 0.0;         ///< c(b1*, b2*) at the continuous optimum
    double predicted_invocations = 0.0;  ///< (r1/b1*)*(r2/b2*)
    double integer_cost = 0.0;           ///< c evaluated at (ib1, ib2)
};

/// Continuous optimum plus integer batch sizes found by scanning the
/// feasible lattice near the continuous solution (the cost surface is flat
/// there, so a small window suffices).
inline OptimizerResult optimize(const CostParams& params) {
    params.validate();
    OptimizerResult result;
    result.b1_star = optimal_b1(params);
    result.b2_star = b2_of_b1(params, result.b1_star);
    result.predicted_cost = block_join_cost(params, BatchSizes{result.b1_star, result.b2_star});
    result.predicted_invocations =
        block_invocations(params, BatchSizes{result.b1_star, result.b2_star});

    std::optional<double> best;
    std::int64_t lo = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::floor(result.b1_star)) - 4);
    std::int64_t hi = static_cast<std::int64_t>(std::ceil(result.b1_star)) + 4;
    for (std::int64_t ib1 = lo; ib1 <= hi; ++ib1) {
        if (static_cast<double>(ib1) * params.s1 >= params.t) break;
        std::int64_t ib2 =
            static_cast<std::int64_t>(std::floor(b2_of_b1(params, static_cast<double>(ib1))));
        if (ib2 < 1) continue;
        double cost = block_join_cost(params, IntBatchSizes{ib1, ib2});
        bool better = !best || cost < *best ||
                      (cost == *best && (ib1 < result.ib1 ||
                                         (ib1 == result.ib1 && ib2 < result.ib2)));
        if (better) {
            best = cost;
            result.ib1 = ib1;
            result.ib2 = ib2;
            result.integer_cost = cost;
        }
    }
    if (!best) {
        throw InfeasibleBudget("no integer batch sizes fit the token budget");
    }
    return result;
}

struct GridSearchResult {
    std::int64_t b1 = 1;
    std::int64_t b2 = 1;
    double cost = 0.0;
};

/// Exhaustive minimum of c over all feasible integer batch-size pairs up to
/// the given bounds. Ties break toward smaller b1, then smaller b2.
inline GridSearchResult grid_search_oracle(const CostParams& params,
                                           std::int64_t max_b1, std::int64_t max_b2) {
    if (max_b1 < 1 || max_b2 < 1) throw DomainError("grid bounds must be >= 1");
    std::optional<GridSearchResult> best;
    for (std::int64_t b1 = 1; b1 <= max_b1; ++b1) {
        for (std::int64_t b2 = 1; b2 <= max_b2; ++b2) {
            BatchSizes b{static_cast<double>(b1), static_cast<double>(b2)};
            if (!feasible(params, b)) break;  // larger b2 stays infeasible
            double cost = block_invocations(params, b) * block_prompt_cost(params, b);
            if (!best || cost < best->cost) {
                best = GridSearchResult{b1, b2, cost};
            }
        }
    }
    if (!best) {
        throw InfeasibleBudget("no feasible batch sizes under the token budget");
    }
    return *best;
}

/// Concrete execution layout for one block join pass: balanced batch
/// sizes and the resulting batch counts for both tables.
struct ExecutionPlan {
    IntBatchSizes batches;
    std::int64_t n_batches_1 = 1;
    std::int64_t n_batches_2 = 1;
    double predicted_token_cost = 0.0;
};

/// Output-reservation margin of the execution planner, in result pairs.
/// Realized match counts per batch deviate from the expectation; this
/// margin absorbs the deviation of the stratified simulation oracle (and
/// mild skew on real data) so that a correctly estimated selectivity does
/// not overflow.
inline constexpr std::int64_t kPlannerHeadroomPairs = 8;

/// Plans integer batch sizes for execution by minimizing the predicted
/// ledger spend, which depends on the batch *counts*: every pass over a
/// batch of table 1 re-reads all of table 2 and vice versa, so
///   reads  = n1*n2*p + n2*r1*s1 + n1*r2*s2
///   writes = sigma*r1*r2*s3 + n1*n2 (one sentinel token per invocation).
/// One output token per invocation is held back for the sentinel, plus a
/// small margin for realized match counts exceeding their expectation.
inline ExecutionPlan plan_block_execution(const CostParams& params) {
    params.validate();
    auto ceil_div = [](std::int64_t a, std::int64_t d) { return (a + d - 1) / d; };
    double dr1 = static_cast<double>(params.r1);
    double dr2 = static_cast<double>(params.r2);

    double b1c = std::clamp(optimal_b1(params), 1.0, dr1);
    std::int64_t center = std::clamp<std::int64_t>(
        static_cast<std::int64_t>(std::llround(dr1 / b1c)), 1, params.r1);

    std::optional<ExecutionPlan> best;
    std::int64_t lo = std::max<std::int64_t>(1, center - 16);
    std::int64_t hi = std::min<std::int64_t>(params.r1, center + 16);
    double reserve = 1.0 + static_cast<double>(kPlannerHeadroomPairs) * params.s3;
    for (std::int64_t candidate = lo; candidate <= hi; ++candidate) {
        std::int64_t ib1 = ceil_div(params.r1, candidate);
        std::int64_t n1 = ceil_div(params.r1, ib1);  // actual batch count under ib1
        double b2_room = (params.t - reserve - static_cast<double>(ib1) * params.s1) /
                         (params.s2 + static_cast<double>(ib1) * params.s3 * params.sigma);
        if (b2_room < 1.0) continue;
        std::int64_t b2_cap = std::min<std::int64_t>(
            static_cast<std::int64_t>(std::floor(b2_room)), params.r2);
        std::int64_t ib2 = ceil_div(params.r2, ceil_div(params.r2, b2_cap));
        std::int64_t n2 = ceil_div(params.r2, ib2);

        double dn1 = static_cast<double>(n1);
        double dn2 = static_cast<double>(n2);
        double reads = dn1 * dn2 * params.p + dn2 * dr1 * params.s1 + dn1 * dr2 * params.s2;
        double writes = params.sigma * dr1 * dr2 * params.s3 + dn1 * dn2;
        double cost = reads + params.g * writes;
        if (!best || cost < best->predicted_token_cost ||
            (cost == best->predicted_token_cost &&
             n1 * n2 < best->n_batches_1 * best->n_batches_2)) {
            best = ExecutionPlan{IntBatchSizes{ib1, ib2}, n1, n2, cost};
        }
    }
    if (!best) {
        throw InfeasibleBudget(
            "token budget cannot fit one tuple from each table plus the output reservation");
    }
    return *best;
}

} // namespace llmjoin
