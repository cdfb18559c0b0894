#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "llmjoin/cost_params.hpp"
#include "llmjoin/errors.hpp"
#include "llmjoin/join.hpp"
#include "llmjoin/simulated.hpp"
#include "llmjoin/table.hpp"

namespace llmjoin {

/// Simulation defaults: 5000x5000 rows of 30-token tuples, selectivity
/// 0.001, two output tokens per result pair, 50 static prompt tokens, a
/// budget of 8192 tokens net of the static prompt, and writes costing
/// twice as much as reads.
inline CostParams default_params() {
    CostParams params;
    params.r1 = 5000;
    params.r2 = 5000;
    params.s1 = 30.0;
    params.s2 = 30.0;
    params.s3 = 2.0;
    params.sigma = 0.001;
    params.g = 2.0;
    params.p = 50.0;
    params.t = 8192.0;
    return params;
}

/// 3 cents per 1,000 tokens read, 6 cents per 1,000 tokens generated.
inline Pricing default_pricing() {
    return Pricing{0.00003, 0.00006};
}

inline constexpr double kDefaultAlpha = 4.0;
/// Adaptive runs start from an estimate of sigma divided by this factor.
inline constexpr double kDefaultEstimateDivisor = 100.0;

/// Constant-size synthetic table: ids 0..rows-1, fixed per-tuple token
/// counts taken from the cost parameters rather than a tokenizer.
inline Table synthetic_table(std::int64_t rows, std::int64_t tokens_per_tuple,
                             std::string_view prefix) {
    std::vector<Tuple> tuples;
    tuples.reserve(static_cast<std::size_t>(rows));
    for (std::int64_t i = 0; i < rows; ++i) {
        tuples.push_back(Tuple{i, std::string(prefix) + "-" + std::to_string(i),
                               tokens_per_tuple});
    }
    return Table(std::move(tuples));
}

enum class SweepVariable { R1, S1, Sigma };

enum class SweepOperator { Tuple, BlockConservative, BlockInformed, Adaptive };

inline std::string_view sweep_variable_name(SweepVariable v) {
    switch (v) {
    case SweepVariable::R1: return "r1";
    case SweepVariable::S1: return "s1";
    case SweepVariable::Sigma: return "sigma";
    }
    return "";
}

inline SweepVariable parse_sweep_variable(std::string_view name) {
    if (name == "r1") return SweepVariable::R1;
    if (name == "s1") return SweepVariable::S1;
    if (name == "sigma") return SweepVariable::Sigma;
    throw ParseError("unknown sweep variable: '" + std::string(name) +
                     "' (expected r1, s1, or sigma)");
}

inline std::string_view sweep_operator_name(SweepOperator op) {
    switch (op) {
    case SweepOperator::Tuple: return "tuple";
    case SweepOperator::BlockConservative: return "conservative_block";
    case SweepOperator::BlockInformed: return "informed_block";
    case SweepOperator::Adaptive: return "adaptive";
    }
    return "";
}

inline SweepOperator parse_sweep_operator(std::string_view name) {
    if (name == "tuple") return SweepOperator::Tuple;
    if (name == "conservative_block" || name == "block_conservative")
        return SweepOperator::BlockConservative;
    if (name == "informed_block" || name == "block_informed")
        return SweepOperator::BlockInformed;
    if (name == "adaptive") return SweepOperator::Adaptive;
    throw ParseError("unknown operator: '" + std::string(name) + "'");
}

struct SweepConfig {
    SweepVariable variable = SweepVariable::R1;
    std::vector<double> values;
    CostParams defaults = default_params();
    Pricing pricing = default_pricing();
    std::vector<SweepOperator> operators = {
        SweepOperator::Tuple, SweepOperator::BlockConservative,
        SweepOperator::BlockInformed, SweepOperator::Adaptive};
    std::uint64_t seed = 7;
    double alpha = kDefaultAlpha;
    double estimate_divisor = kDefaultEstimateDivisor;

    void validate() const {
        if (values.empty()) throw ParseError("sweep needs at least one value");
        for (std::size_t i = 1; i < values.size(); ++i) {
            if (values[i] <= values[i - 1]) {
                throw ParseError("sweep values must be strictly increasing");
            }
        }
        if (operators.empty()) throw ParseError("sweep needs at least one operator");
        if (alpha <= 1.0) throw ParseError("alpha must exceed one");
        if (estimate_divisor < 1.0) throw ParseError("estimate divisor must be >= 1");
    }
};

struct OperatorOutcome {
    double token_cost = 0.0;  ///< reads + g * writes
    double currency = 0.0;
    std::int64_t tokens_read = 0;
    std::int64_t tokens_written = 0;
    std::int64_t invocations = 0;
    std::int64_t overflows = 0;
    bool completed = true;
};

struct SweepRow {
    double value = 0.0;
    std::vector<std::pair<SweepOperator, OperatorOutcome>> results;

    const OperatorOutcome* find(SweepOperator op) const {
        for (const auto& [o, outcome] : results) {
            if (o == op) return &outcome;
        }
        return nullptr;
    }
};

/// Runs every configured operator end to end through the simulated backend
/// for each sweep value, over constant-size synthetic tables and a seeded
/// match oracle realizing the configured selectivity.
inline std::vector<SweepRow> run_sweep(const SweepConfig& config) {
    config.validate();
    std::vector<SweepRow> rows;
    rows.reserve(config.values.size());
    const std::string predicate = "the two entries match";

    for (double value : config.values) {
        CostParams params = config.defaults;
        switch (config.variable) {
        case SweepVariable::R1:
            params.r1 = static_cast<std::int64_t>(std::llround(value));
            break;
        case SweepVariable::S1:
            params.s1 = static_cast<double>(std::llround(value));
            break;
        case SweepVariable::Sigma:
            params.sigma = value;
            break;
        }
        params.validate();

        std::int64_t size1 = std::llround(params.s1);
        std::int64_t size2 = std::llround(params.s2);
        Table table1 = synthetic_table(params.r1, size1, "left");
        Table table2 = synthetic_table(params.r2, size2, "right");

        SimulatedWorld world;
        world.match_oracle = selectivity_oracle(params.sigma, config.seed);
        world.per_pair_output_tokens = std::llround(params.s3);
        world.token_budget = std::llround(params.t);
        world.static_prompt_tokens = std::llround(params.p);
        SimulatedBackend backend(world);
        ExecutionBudget budget = ExecutionBudget::measured_from(params);

        SweepRow row;
        row.value = value;
        for (SweepOperator op : config.operators) {
            JoinReport report;
            switch (op) {
            case SweepOperator::Tuple:
                report = tuple_join(table1, table2, predicate, backend);
                break;
            case SweepOperator::BlockConservative: {
                ExecutionPlan plan = plan_block_execution(params.with_sigma(1.0));
                report = block_join(table1, table2, predicate, plan.batches, backend,
                                    budget, 1.0);
                break;
            }
            case SweepOperator::BlockInformed: {
                ExecutionPlan plan = plan_block_execution(params);
                report = block_join(table1, table2, predicate, plan.batches, backend,
                                    budget, params.sigma);
                break;
            }
            case SweepOperator::Adaptive:
                report = adaptive_join(table1, table2, predicate,
                                       params.sigma / config.estimate_divisor,
                                       config.alpha, params, backend, budget);
                break;
            }
            OperatorOutcome outcome;
            outcome.token_cost = report.ledger.token_cost(params.g);
            outcome.currency = report.ledger.monetary_cost(config.pricing);
            outcome.tokens_read = report.ledger.tokens_read;
            outcome.tokens_written = report.ledger.tokens_written;
            outcome.invocations = report.ledger.invocations;
            outcome.overflows = report.ledger.overflows;
            outcome.completed = report.status == JoinStatus::Completed;
            row.results.emplace_back(op, outcome);
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

namespace detail {

inline std::string format_double(double v, const char* fmt = "%.10g") {
    char buf[64];
    std::snprintf(buf, sizeof buf, fmt, v);
    return std::string(buf);
}

} // namespace detail

/// Writes sweep results as CSV: the swept variable, per-operator cost in
/// token units, then currency, then token/invocation counters.
inline void emit_csv(const std::vector<SweepRow>& rows, const SweepConfig& config,
                     std::ostream& out) {
    if (rows.empty()) throw ParseError("emit_csv: no rows");
    out << sweep_variable_name(config.variable);
    for (SweepOperator op : config.operators) {
        out << ',' << sweep_operator_name(op) << "_cost";
    }
    for (SweepOperator op : config.operators) {
        out << ',' << sweep_operator_name(op) << "_usd";
    }
    for (SweepOperator op : config.operators) {
        std::string_view name = sweep_operator_name(op);
        out << ',' << name << "_tokens_read"
            << ',' << name << "_tokens_written"
            << ',' << name << "_invocations"
            << ',' << name << "_overflows";
    }
    out << '\n';
    for (const SweepRow& row : rows) {
        out << detail::format_double(row.value);
        for (const auto& [op, outcome] : row.results) {
            out << ',' << detail::format_double(outcome.token_cost);
        }
        for (const auto& [op, outcome] : row.results) {
            out << ',' << detail::format_double(outcome.currency, "%.4f");
        }
        for (const auto& [op, outcome] : row.results) {
            out << ',' << outcome.tokens_read << ',' << outcome.tokens_written << ','
                << outcome.invocations << ',' << outcome.overflows;
        }
        out << '\n';
    }
}

inline void emit_csv(const std::vector<SweepRow>& rows, const SweepConfig& config,
                     const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("cannot write sweep CSV: " + path);
    emit_csv(rows, config, out);
}

} // namespace llmjoin
