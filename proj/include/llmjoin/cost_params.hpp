#pragma once

#include <cstdint>
#include <string>

#include "llmjoin/errors.hpp"

namespace llmjoin {

/// All data and model properties that the cost formulas depend on.
///
/// Row counts and tuple sizes describe the input tables; sigma is the join
/// predicate selectivity; s3 the token size of one emitted result index
/// pair; g the price of generating a token relative to reading one; p the
/// token size of the static task description; and t the per-invocation
/// token budget, already net of p.
struct CostParams {
    std::int64_t r1 = 1;
    std::int64_t r2 = 1;
    double s1 = 1.0;
    double s2 = 1.0;
    double s3 = 1.0;
    double sigma = 0.0;
    double g = 1.0;
    double p = 0.0;
    double t = 1.0;

    void validate() const {
        if (r1 < 1 || r2 < 1) throw DomainError("row counts must be positive");
        if (s1 <= 0 || s2 <= 0 || s3 <= 0) throw DomainError("tuple sizes must be positive");
        if (sigma < 0 || sigma > 1) throw DomainError("selectivity must lie in [0,1]");
        if (g < 1) throw DomainError("relative write cost g must be >= 1");
        if (p < 0) throw DomainError("static prompt size must be nonnegative");
        if (t <= 0) throw DomainError("token budget must be positive");
        if (t <= s1 + s2 + sigma * s3) {
            throw InfeasibleBudget(
                "token budget t=" + std::to_string(t) +
                " cannot fit one tuple from each table plus its expected output (" +
                std::to_string(s1 + s2 + sigma * s3) + " tokens)");
        }
    }

    CostParams with_sigma(double estimate) const {
        CostParams copy = *this;
        copy.sigma = estimate;
        return copy;
    }
};

/// Per-token prices. Token-cost units translate to currency via the read
/// price; generated tokens carry the write price.
struct Pricing {
    double read_cost_per_token = 0.0;
    double write_cost_per_token = 0.0;

    double relative_write_cost() const {
        if (read_cost_per_token <= 0) return 1.0;
        return write_cost_per_token / read_cost_per_token;
    }
};

/// Cumulative token accounting for one join execution. All fields only
/// ever grow; monetary cost is recomputable from the counters at any time.
struct TokenLedger {
    std::int64_t tokens_read = 0;
    std::int64_t tokens_written = 0;
    std::int64_t invocations = 0;
    std::int64_t overflows = 0;

    void add_invocation(std::int64_t prompt_tokens, std::int64_t output_tokens) {
        tokens_read += prompt_tokens;
        tokens_written += output_tokens;
        ++invocations;
    }

    void add_overflow() { ++overflows; }

    void merge(const TokenLedger& other) {
        tokens_read += other.tokens_read;
        tokens_written += other.tokens_written;
        invocations += other.invocations;
        overflows += other.overflows;
    }

    double monetary_cost(const Pricing& pricing) const {
        return static_cast<double>(tokens_read) * pricing.read_cost_per_token +
               static_cast<double>(tokens_written) * pricing.write_cost_per_token;
    }

    /// Read-equivalent token units: reads plus g-weighted writes.
    double token_cost(double g) const {
        return static_cast<double>(tokens_read) + g * static_cast<double>(tokens_written);
    }
};

} // namespace llmjoin
