#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "llmjoin/backend.hpp"
#include "llmjoin/cost_model.hpp"
#include "llmjoin/cost_params.hpp"
#include "llmjoin/errors.hpp"
#include "llmjoin/optimizer.hpp"
#include "llmjoin/prompts.hpp"
#include "llmjoin/table.hpp"
#include "llmjoin/tokenizer.hpp"

namespace llmjoin {

enum class JoinOperator { Tuple, Block, Adaptive, Embedding };

struct JoinSpec {
    std::string predicate_text;
    JoinOperator op = JoinOperator::Adaptive;
    std::optional<IntBatchSizes> batch_sizes;  ///< block join; planned when absent
    double initial_estimate = 0.01;            ///< adaptive e0
    double alpha = 4.0;                        ///< adaptive growth factor
    bool symmetric_embedding = false;
};

enum class AttemptOutcome { Completed, Overflow };

struct AttemptRecord {
    double estimate = 0.0;  ///< selectivity estimate the batch sizes were planned for
    IntBatchSizes batches;
    AttemptOutcome outcome = AttemptOutcome::Completed;
    TokenLedger ledger;     ///< tokens spent by this attempt alone
};

enum class JoinStatus { Completed, Overflow, BackendFailure };

struct JoinReport {
    std::vector<std::pair<std::int64_t, std::int64_t>> pairs;
    TokenLedger ledger;
    std::vector<AttemptRecord> attempts;
    double wall_time_seconds = 0.0;
    JoinStatus status = JoinStatus::Completed;
    std::string error;  ///< diagnostic when status == BackendFailure
    std::int64_t malformed_fragments = 0;
};

/// How many output tokens an invocation may generate: the context window
/// (t plus the static prompt size) minus the prompt. Simulated runs measure
/// the prompt from per-tuple token sizes; real backends estimate it from
/// the rendered text with a safety margin against tokenizer undercount.
struct ExecutionBudget {
    double t = 1.0;
    double p = 0.0;
    bool measured = true;
    double safety_margin = 1.0;
    Tokenizer tokenizer = Tokenizer::chars_div_4();

    static ExecutionBudget measured_from(const CostParams& params) {
        ExecutionBudget budget;
        budget.t = params.t;
        budget.p = params.p;
        budget.measured = true;
        return budget;
    }

    static ExecutionBudget estimated(double t, double p, double margin,
                                     Tokenizer tokenizer) {
        ExecutionBudget budget;
        budget.t = t;
        budget.p = p;
        budget.measured = false;
        budget.safety_margin = margin;
        budget.tokenizer = tokenizer;
        return budget;
    }

    std::int64_t max_output_tokens(std::span<const Tuple> batch1,
                                   std::span<const Tuple> batch2,
                                   const std::string& predicate) const {
        double prompt_tokens;
        if (measured) {
            prompt_tokens = p;
            for (const Tuple& tup : batch1) prompt_tokens += static_cast<double>(tup.token_size);
            for (const Tuple& tup : batch2) prompt_tokens += static_cast<double>(tup.token_size);
        } else {
            std::string prompt = block_prompt(batch1, batch2, predicate);
            prompt_tokens = safety_margin *
                            static_cast<double>(tokenizer.count(prompt));
        }
        return static_cast<std::int64_t>(std::floor(t + p - prompt_tokens));
    }
};

namespace detail {

inline bool is_yes_answer(std::string_view text) {
    std::size_t begin = 0;
    std::size_t end = text.size();
    auto skippable = [](char c) {
        return std::isspace(static_cast<unsigned char>(c)) || c == '.' || c == ',' ||
               c == '!' || c == '"' || c == '\'' || c == ':' || c == ';';
    };
    while (begin < end && skippable(text[begin])) ++begin;
    while (end > begin && skippable(text[end - 1])) --end;
    return equals_ignore_case(text.substr(begin, end - begin), "yes");
}

inline void finalize_pairs(JoinReport& report) {
    std::sort(report.pairs.begin(), report.pairs.end());
    report.pairs.erase(std::unique(report.pairs.begin(), report.pairs.end()),
                       report.pairs.end());
}

class WallTimer {
public:
    WallTimer() : start_(std::chrono::steady_clock::now()) {}
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_)
            .count();
    }

private:
    std::chrono::steady_clock::time_point start_;
};

} // namespace detail

/// Pairwise nested loops join: one Yes/No invocation per tuple pair, capped
/// at a single output token. Backend failures end the join early with the
/// pairs found so far preserved.
inline JoinReport tuple_join(const Table& r1, const Table& r2,
                             const std::string& predicate,
                             CompletionBackend& backend) {
    if (r1.empty() || r2.empty()) throw EmptyTable("tuple_join: empty input table");
    detail::WallTimer timer;
    JoinReport report;
    for (const Tuple& t1 : r1.tuples()) {
        for (const Tuple& t2 : r2.tuples()) {
            CompletionOutcome outcome;
            try {
                outcome = backend.complete_pair(t1, t2, predicate);
            } catch (const BackendError& e) {
                report.status = JoinStatus::BackendFailure;
                report.error = e.what();
                detail::finalize_pairs(report);
                report.wall_time_seconds = timer.seconds();
                return report;
            }
            report.ledger.add_invocation(outcome.prompt_tokens, outcome.output_tokens);
            if (detail::is_yes_answer(outcome.text)) {
                report.pairs.emplace_back(t1.id, t2.id);
            }
        }
    }
    detail::finalize_pairs(report);
    report.wall_time_seconds = timer.seconds();
    return report;
}

/// Batched nested loops join. Both tables are cut into consecutive batches
/// (the trailing batch may be smaller); each batch pair costs one
/// invocation whose output budget is the context-window residue. An answer
/// that does not end with the sentinel aborts the join with Overflow:
/// partial pairs are discarded, spent tokens stay in the ledger.
inline JoinReport block_join(const Table& r1, const Table& r2,
                             const std::string& predicate, IntBatchSizes batches,
                             CompletionBackend& backend, const ExecutionBudget& budget,
                             double planned_estimate = 0.0) {
    if (r1.empty() || r2.empty()) throw EmptyTable("block_join: empty input table");
    if (batches.b1 < 1 || batches.b2 < 1) {
        throw DomainError("block_join: batch sizes must be >= 1");
    }
    detail::WallTimer timer;
    JoinReport report;
    AttemptRecord attempt;
    attempt.estimate = planned_estimate;
    attempt.batches = batches;

    const auto& tuples1 = r1.tuples();
    const auto& tuples2 = r2.tuples();
    std::size_t step1 = static_cast<std::size_t>(batches.b1);
    std::size_t step2 = static_cast<std::size_t>(batches.b2);

    for (std::size_t off1 = 0; off1 < tuples1.size(); off1 += step1) {
        std::span<const Tuple> batch1(tuples1.data() + off1,
                                      std::min(step1, tuples1.size() - off1));
        for (std::size_t off2 = 0; off2 < tuples2.size(); off2 += step2) {
            std::span<const Tuple> batch2(tuples2.data() + off2,
                                          std::min(step2, tuples2.size() - off2));
            std::int64_t max_output = budget.max_output_tokens(batch1, batch2, predicate);
            CompletionOutcome outcome;
            bool overflowed = false;
            if (max_output < 1) {
                // Prompt alone exhausts the window; nothing can be generated.
                overflowed = true;
            } else {
                try {
                    outcome = backend.complete_block(batch1, batch2, predicate, max_output);
                } catch (const BackendError& e) {
                    report.ledger.merge(attempt.ledger);
                    report.attempts.push_back(attempt);
                    report.status = JoinStatus::BackendFailure;
                    report.error = e.what();
                    detail::finalize_pairs(report);
                    report.wall_time_seconds = timer.seconds();
                    return report;
                }
                attempt.ledger.add_invocation(outcome.prompt_tokens, outcome.output_tokens);
                ParsedAnswer parsed = parse_block_answer(
                    outcome.text, static_cast<std::int64_t>(batch1.size()),
                    static_cast<std::int64_t>(batch2.size()));
                report.malformed_fragments += parsed.malformed_fragments;
                if (parsed.finished) {
                    for (const auto& [x, y] : parsed.index_pairs) {
                        report.pairs.emplace_back(batch1[static_cast<std::size_t>(x - 1)].id,
                                                  batch2[static_cast<std::size_t>(y - 1)].id);
                    }
                } else {
                    overflowed = true;
                }
            }
            if (overflowed) {
                attempt.ledger.add_overflow();
                attempt.outcome = AttemptOutcome::Overflow;
                report.ledger.merge(attempt.ledger);
                report.attempts.push_back(attempt);
                report.pairs.clear();
                report.status = JoinStatus::Overflow;
                report.wall_time_seconds = timer.seconds();
                return report;
            }
        }
    }
    attempt.outcome = AttemptOutcome::Completed;
    report.ledger.merge(attempt.ledger);
    report.attempts.push_back(attempt);
    detail::finalize_pairs(report);
    report.wall_time_seconds = timer.seconds();
    return report;
}

/// Block join that learns the selectivity: batch sizes are planned for an
/// optimistic estimate, and every overflow multiplies the estimate by alpha
/// and restarts the block join from scratch. Tokens spent by failed
/// attempts stay in the ledger. The estimate is capped at one; overflowing
/// there means the per-result output size was underestimated.
inline JoinReport adaptive_join(const Table& r1, const Table& r2,
                                const std::string& predicate, double initial_estimate,
                                double alpha, const CostParams& model_params,
                                CompletionBackend& backend, const ExecutionBudget& budget) {
    if (r1.empty() || r2.empty()) throw EmptyTable("adaptive_join: empty input table");
    if (initial_estimate <= 0.0) throw DomainError("adaptive_join: e0 must be positive");
    if (alpha <= 1.0) throw DomainError("adaptive_join: alpha must exceed one");
    detail::WallTimer timer;

    TableStats stats1 = r1.stats();
    TableStats stats2 = r2.stats();
    CostParams params = model_params;
    params.r1 = stats1.row_count;
    params.r2 = stats2.row_count;
    params.s1 = stats1.avg_tuple_tokens();
    params.s2 = stats2.avg_tuple_tokens();

    JoinReport report;
    double estimate = std::min(initial_estimate, 1.0);
    while (true) {
        ExecutionPlan plan = plan_block_execution(params.with_sigma(estimate));
        JoinReport attempt_report =
            block_join(r1, r2, predicate, plan.batches, backend, budget, estimate);
        report.ledger.merge(attempt_report.ledger);
        report.malformed_fragments += attempt_report.malformed_fragments;
        for (const AttemptRecord& a : attempt_report.attempts) report.attempts.push_back(a);
        if (attempt_report.status == JoinStatus::BackendFailure) {
            report.status = JoinStatus::BackendFailure;
            report.error = attempt_report.error;
            report.pairs = std::move(attempt_report.pairs);
            report.wall_time_seconds = timer.seconds();
            return report;
        }
        if (attempt_report.status == JoinStatus::Completed) {
            report.pairs = std::move(attempt_report.pairs);
            report.status = JoinStatus::Completed;
            report.wall_time_seconds = timer.seconds();
            return report;
        }
        if (estimate >= 1.0) {
            throw NonConvergence(
                "join overflowed with the selectivity estimate capped at one; "
                "the per-result output size is larger than configured");
        }
        estimate = std::min(estimate * alpha, 1.0);
    }
}

/// Similarity baseline: embeds every tuple once and pairs each tuple of the
/// first table with its highest-cosine counterpart in the second (both
/// directions in symmetric mode). Ties break toward the lower tuple id.
/// Reads all input once and writes nothing.
inline JoinReport embedding_join(const Table& r1, const Table& r2,
                                 EmbeddingBackend& backend, bool symmetric = false) {
    if (r1.empty() || r2.empty()) throw EmptyTable("embedding_join: empty input table");
    detail::WallTimer timer;
    JoinReport report;

    auto embed_table = [&](const Table& table) {
        std::vector<std::string> texts;
        texts.reserve(static_cast<std::size_t>(table.row_count()));
        for (const Tuple& t : table.tuples()) texts.push_back(t.text);
        auto vectors = backend.embed(texts);
        report.ledger.add_invocation(backend.last_tokens_read(), 0);
        return vectors;
    };

    std::vector<std::vector<double>> emb1;
    std::vector<std::vector<double>> emb2;
    try {
        emb1 = embed_table(r1);
        emb2 = embed_table(r2);
    } catch (const BackendError& e) {
        report.status = JoinStatus::BackendFailure;
        report.error = e.what();
        report.wall_time_seconds = timer.seconds();
        return report;
    }

    auto dot = [](const std::vector<double>& a, const std::vector<double>& b) {
        double s = 0.0;
        std::size_t n = std::min(a.size(), b.size());
        for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
        return s;
    };
    // Vectors are unit-norm, so the dot product is the cosine similarity.
    auto best_match = [&](const std::vector<double>& query,
                          const std::vector<std::vector<double>>& candidates,
                          const Table& table) {
        std::size_t best = 0;
        double best_sim = -2.0;
        for (std::size_t j = 0; j < candidates.size(); ++j) {
            double sim = dot(query, candidates[j]);
            const Tuple& cand = table.tuples()[j];
            if (sim > best_sim ||
                (sim == best_sim && cand.id < table.tuples()[best].id)) {
                best = j;
                best_sim = sim;
            }
        }
        return best;
    };

    for (std::size_t i = 0; i < emb1.size(); ++i) {
        std::size_t j = best_match(emb1[i], emb2, r2);
        report.pairs.emplace_back(r1.tuples()[i].id, r2.tuples()[j].id);
    }
    if (symmetric) {
        for (std::size_t j = 0; j < emb2.size(); ++j) {
            std::size_t i = best_match(emb2[j], emb1, r1);
            report.pairs.emplace_back(r1.tuples()[i].id, r2.tuples()[j].id);
        }
    }
    detail::finalize_pairs(report);
    report.wall_time_seconds = timer.seconds();
    return report;
}

} // namespace llmjoin
