#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>
#include <vector>

#include "llmjoin/bench.hpp"
#include "llmjoin/join.hpp"
#include "llmjoin/simulated.hpp"
#include "test_support.hpp"

using namespace llmjoin;
using testsupport::uniform;

namespace {

Table constant_table(std::int64_t rows, std::int64_t size, std::int64_t id_offset = 0) {
    Table t;
    for (std::int64_t i = 0; i < rows; ++i) {
        t.add(Tuple{id_offset + i, "tuple-" + std::to_string(id_offset + i), size});
    }
    return t;
}

SimulatedWorld world_for(const CostParams& params,
                         std::function<bool(const Tuple&, const Tuple&)> oracle) {
    SimulatedWorld world;
    world.match_oracle = std::move(oracle);
    world.per_pair_output_tokens = std::llround(params.s3);
    world.token_budget = std::llround(params.t);
    world.static_prompt_tokens = std::llround(params.p);
    return world;
}

/// Wraps a backend and fails every request after the first `allowed`.
class FlakyBackend : public CompletionBackend {
public:
    FlakyBackend(CompletionBackend& inner, int allowed)
        : inner_(&inner), allowed_(allowed) {}

    CompletionOutcome complete(const CompletionRequest& request) override {
        maybe_fail();
        return inner_->complete(request);
    }
    CompletionOutcome complete_pair(const Tuple& a, const Tuple& b,
                                    const std::string& predicate) override {
        maybe_fail();
        return inner_->complete_pair(a, b, predicate);
    }
    CompletionOutcome complete_block(std::span<const Tuple> b1, std::span<const Tuple> b2,
                                     const std::string& predicate,
                                     std::int64_t max_output) override {
        maybe_fail();
        return inner_->complete_block(b1, b2, predicate, max_output);
    }

private:
    void maybe_fail() {
        if (calls_++ >= allowed_) throw BackendTimeout("injected timeout");
    }
    CompletionBackend* inner_;
    int allowed_;
    int calls_ = 0;
};

} // namespace

TEST_SUITE("join_ops") {

TEST_CASE("pairwise join over a never-matching oracle") {
    CostParams params;
    params.r1 = 3; params.r2 = 3; params.s1 = 7; params.s2 = 5;
    params.s3 = 1; params.p = 9; params.g = 2; params.t = 100;
    SimulatedBackend backend(
        world_for(params, [](const Tuple&, const Tuple&) { return false; }));
    JoinReport report = tuple_join(constant_table(3, 7), constant_table(3, 5, 100),
                                   "never", backend);
    CHECK(report.pairs.empty());
    CHECK(report.ledger.invocations == 9);
    CHECK(report.ledger.tokens_written == 9);
    CHECK(report.ledger.tokens_read == 9 * (9 + 7 + 5));
    CHECK(report.status == JoinStatus::Completed);
}

TEST_CASE("pairwise join finds id-equal tuples") {
    CostParams params;
    params.r1 = 5; params.r2 = 5; params.s1 = 4; params.s2 = 4;
    params.s3 = 1; params.p = 2; params.g = 1; params.t = 100;
    SimulatedBackend backend(
        world_for(params, [](const Tuple& a, const Tuple& b) { return a.id == b.id; }));
    Table t1 = constant_table(5, 4);
    Table t2 = constant_table(5, 4);
    JoinReport report = tuple_join(t1, t2, "same id", backend);
    REQUIRE(report.pairs.size() == 5);
    for (std::int64_t i = 0; i < 5; ++i) {
        CHECK(report.pairs[static_cast<std::size_t>(i)] ==
              std::pair<std::int64_t, std::int64_t>{i, i});
    }
}

TEST_CASE("pairwise ledger reproduces the cost formula exactly") {
    CostParams params;
    params.r1 = 4; params.r2 = 3; params.s1 = 7; params.s2 = 5;
    params.s3 = 1; params.p = 9; params.g = 2; params.t = 100;
    SimulatedBackend backend(
        world_for(params, [](const Tuple& a, const Tuple& b) { return a.id < b.id; }));
    JoinReport report = tuple_join(constant_table(4, 7), constant_table(3, 5, 50),
                                   "ordered", backend);
    CHECK(report.ledger.token_cost(params.g) == doctest::Approx(tuple_join_cost(params)));
}

TEST_CASE("block join returns exactly the oracle matches") {
    CostParams params;
    params.r1 = 12; params.r2 = 9; params.s1 = 6; params.s2 = 6;
    params.s3 = 2; params.p = 4; params.g = 1;
    params.t = 12 * 6 + 9 * 6 + 12 * 9 * 2 + 40;  // everything fits
    std::set<std::pair<std::int64_t, std::int64_t>> truth = {
        {0, 0}, {0, 8}, {3, 4}, {7, 2}, {11, 8}, {11, 0}, {5, 5}};
    SimulatedBackend backend(world_for(params, ground_truth_oracle(truth)));
    Table t1 = constant_table(12, 6);
    Table t2 = constant_table(9, 6);
    ExecutionBudget budget = ExecutionBudget::measured_from(params);

    for (IntBatchSizes batches : {IntBatchSizes{5, 4}, IntBatchSizes{12, 9},
                                  IntBatchSizes{1, 1}, IntBatchSizes{7, 2}}) {
        JoinReport report = block_join(t1, t2, "truth", batches, backend, budget);
        REQUIRE(report.status == JoinStatus::Completed);
        std::set<std::pair<std::int64_t, std::int64_t>> got(report.pairs.begin(),
                                                            report.pairs.end());
        CHECK(got == truth);
        QualityMetrics m = score(report.pairs, truth);
        CHECK(m.f1 == doctest::Approx(1.0));
    }
}

TEST_CASE("block join maps indices correctly in trailing partial batches") {
    CostParams params;
    params.r1 = 7; params.r2 = 5; params.s1 = 3; params.s2 = 3;
    params.s3 = 1; params.p = 1; params.g = 1;
    params.t = 500;
    // matches concentrated in the final partial batches
    std::set<std::pair<std::int64_t, std::int64_t>> truth = {{6, 4}, {5, 4}, {6, 0}};
    SimulatedBackend backend(world_for(params, ground_truth_oracle(truth)));
    JoinReport report = block_join(constant_table(7, 3), constant_table(5, 3), "t",
                                   IntBatchSizes{3, 2}, backend,
                                   ExecutionBudget::measured_from(params));
    std::set<std::pair<std::int64_t, std::int64_t>> got(report.pairs.begin(),
                                                        report.pairs.end());
    CHECK(got == truth);
}

TEST_CASE("block join with an optimizer plan completes without overflow") {
    CostParams params;
    params.r1 = 1200; params.r2 = 1200; params.s1 = 20; params.s2 = 20;
    params.s3 = 2; params.sigma = 0.005; params.p = 50; params.g = 2; params.t = 4096;
    SimulatedBackend backend(world_for(params, selectivity_oracle(params.sigma, 11)));
    Table t1 = constant_table(1200, 20);
    Table t2 = constant_table(1200, 20);

    OptimizerResult opt = optimize(params);
    JoinReport report =
        block_join(t1, t2, "sim", IntBatchSizes{opt.ib1, opt.ib2}, backend,
                   ExecutionBudget::measured_from(params), params.sigma);
    REQUIRE(report.status == JoinStatus::Completed);
    CHECK(report.ledger.overflows == 0);
    // ledger tracks the continuous formula up to batch-count ceiling effects
    double formula = block_join_cost(params, IntBatchSizes{opt.ib1, opt.ib2});
    CHECK(report.ledger.token_cost(params.g) ==
          doctest::Approx(formula).epsilon(0.05));
}

TEST_CASE("underestimated output space overflows on the first saturated batch") {
    CostParams params;
    params.r1 = 100; params.r2 = 100; params.s1 = 10; params.s2 = 10;
    params.s3 = 2; params.sigma = 1.0; params.p = 10; params.g = 1; params.t = 800;
    SimulatedBackend backend(
        world_for(params, [](const Tuple&, const Tuple&) { return true; }));
    Table t1 = constant_table(100, 10);
    Table t2 = constant_table(100, 10);

    OptimizerResult opt = optimize(params.with_sigma(0.001));
    JoinReport report =
        block_join(t1, t2, "always", IntBatchSizes{opt.ib1, opt.ib2}, backend,
                   ExecutionBudget::measured_from(params), 0.001);
    CHECK(report.status == JoinStatus::Overflow);
    CHECK(report.pairs.empty());
    CHECK(report.ledger.invocations == 1);
    CHECK(report.ledger.overflows == 1);
    REQUIRE(report.attempts.size() == 1);
    CHECK(report.attempts[0].outcome == AttemptOutcome::Overflow);
}

TEST_CASE("adaptive join with the true selectivity completes in one attempt") {
    CostParams params;
    params.r1 = 300; params.r2 = 300; params.s1 = 20; params.s2 = 20;
    params.s3 = 2; params.sigma = 0.01; params.p = 30; params.g = 2; params.t = 2500;
    SimulatedBackend backend(world_for(params, selectivity_oracle(params.sigma, 13)));
    Table t1 = constant_table(300, 20);
    Table t2 = constant_table(300, 20);
    ExecutionBudget budget = ExecutionBudget::measured_from(params);

    JoinReport adaptive =
        adaptive_join(t1, t2, "sim", params.sigma, 4.0, params, backend, budget);
    REQUIRE(adaptive.status == JoinStatus::Completed);
    CHECK(adaptive.attempts.size() == 1);
    CHECK(adaptive.attempts[0].outcome == AttemptOutcome::Completed);

    ExecutionPlan plan = plan_block_execution(params);
    JoinReport informed = block_join(t1, t2, "sim", plan.batches, backend, budget,
                                     params.sigma);
    CHECK(adaptive.pairs == informed.pairs);
    CHECK(adaptive.ledger.tokens_read == informed.ledger.tokens_read);
    CHECK(adaptive.ledger.tokens_written == informed.ledger.tokens_written);
    CHECK(adaptive.ledger.invocations == informed.ledger.invocations);
}

TEST_CASE("adaptive join grows its estimate by alpha until completion") {
    CostParams params;
    params.r1 = 400; params.r2 = 400; params.s1 = 20; params.s2 = 20;
    params.s3 = 2; params.sigma = 0.02; params.p = 50; params.g = 2; params.t = 4096;
    SimulatedBackend backend(world_for(params, selectivity_oracle(params.sigma, 17)));
    Table t1 = constant_table(400, 20);
    Table t2 = constant_table(400, 20);

    double e0 = params.sigma / 100.0;
    JoinReport report = adaptive_join(t1, t2, "sim", e0, 4.0, params, backend,
                                      ExecutionBudget::measured_from(params));
    REQUIRE(report.status == JoinStatus::Completed);
    REQUIRE(!report.attempts.empty());

    std::int64_t overflow_attempts = 0;
    for (std::size_t k = 0; k < report.attempts.size(); ++k) {
        const AttemptRecord& a = report.attempts[k];
        CHECK(a.estimate == doctest::Approx(std::min(e0 * std::pow(4.0, k), 1.0)));
        if (k + 1 < report.attempts.size()) {
            CHECK(a.outcome == AttemptOutcome::Overflow);
            CHECK(a.estimate < report.attempts[k + 1].estimate);
            ++overflow_attempts;
        } else {
            CHECK(a.outcome == AttemptOutcome::Completed);
        }
    }
    CHECK(overflow_attempts <= 4);  // ceil(log_4 100)

    // rerunning is bit-identical
    JoinReport again = adaptive_join(t1, t2, "sim", e0, 4.0, params, backend,
                                     ExecutionBudget::measured_from(params));
    CHECK(again.pairs == report.pairs);
    CHECK(again.ledger.tokens_read == report.ledger.tokens_read);
    CHECK(again.ledger.tokens_written == report.ledger.tokens_written);
    CHECK(again.ledger.overflows == report.ledger.overflows);

    // the ledger is the sum over attempts, failed ones included
    TokenLedger sum;
    for (const AttemptRecord& a : report.attempts) sum.merge(a.ledger);
    CHECK(sum.tokens_read == report.ledger.tokens_read);
    CHECK(sum.tokens_written == report.ledger.tokens_written);
    CHECK(sum.invocations == report.ledger.invocations);
}

TEST_CASE("adaptive join reports non-convergence when output sizes are understated") {
    CostParams params;
    params.r1 = 10; params.r2 = 10; params.s1 = 5; params.s2 = 5;
    params.s3 = 2; params.sigma = 1.0; params.p = 5; params.g = 1; params.t = 200;
    SimulatedWorld world = world_for(params, [](const Tuple&, const Tuple&) { return true; });
    world.per_pair_output_tokens = 6;  // actual answers are three times larger
    SimulatedBackend backend(world);
    Table t1 = constant_table(10, 5);
    Table t2 = constant_table(10, 5);
    CHECK_THROWS_AS(adaptive_join(t1, t2, "always", 0.5, 4.0, params, backend,
                                  ExecutionBudget::measured_from(params)),
                    NonConvergence);
}

TEST_CASE("adaptive join validates its tuning parameters") {
    CostParams params;
    params.r1 = 2; params.r2 = 2; params.s1 = 1; params.s2 = 1;
    params.s3 = 1; params.p = 0; params.g = 1; params.t = 100;
    SimulatedBackend backend(world_for(params, [](const Tuple&, const Tuple&) { return false; }));
    Table t = constant_table(2, 1);
    ExecutionBudget budget = ExecutionBudget::measured_from(params);
    CHECK_THROWS_AS(adaptive_join(t, t, "p", 0.0, 4.0, params, backend, budget), DomainError);
    CHECK_THROWS_AS(adaptive_join(t, t, "p", 0.1, 1.0, params, backend, budget), DomainError);
}

TEST_CASE("embedding join pairs nearest vectors and writes nothing") {
    HashEmbeddingBackend backend(4, 3);
    backend.set_override("L0", {1, 0, 0, 0});
    backend.set_override("L1", {0, 1, 0, 0});
    backend.set_override("R0", {0.9, 0.1, 0, 0});
    backend.set_override("R1", {0.1, 0.9, 0, 0});
    Table t1 = Table({Tuple{0, "L0", 1}, Tuple{1, "L1", 1}});
    Table t2 = Table({Tuple{10, "R0", 1}, Tuple{11, "R1", 1}});

    JoinReport report = embedding_join(t1, t2, backend);
    REQUIRE(report.pairs.size() == 2);
    CHECK(report.pairs[0] == std::pair<std::int64_t, std::int64_t>{0, 10});
    CHECK(report.pairs[1] == std::pair<std::int64_t, std::int64_t>{1, 11});
    CHECK(report.ledger.tokens_written == 0);
    CHECK(report.ledger.invocations == 2);
    CHECK(report.ledger.tokens_read > 0);
}

TEST_CASE("embedding join breaks similarity ties toward the lower id") {
    HashEmbeddingBackend backend(4, 3);
    backend.set_override("q", {1, 0, 0, 0});
    backend.set_override("o1", {0, 1, 0, 0});
    backend.set_override("o2", {0, 0, 1, 0});  // both orthogonal to q
    Table t1 = Table({Tuple{5, "q", 1}});
    Table t2 = Table({Tuple{21, "o2", 1}, Tuple{20, "o1", 1}});
    JoinReport report = embedding_join(t1, t2, backend);
    REQUIRE(report.pairs.size() == 1);
    CHECK(report.pairs[0] == std::pair<std::int64_t, std::int64_t>{5, 20});
}

TEST_CASE("symmetric embedding join adds the reverse direction") {
    HashEmbeddingBackend backend(4, 3);
    backend.set_override("L0", {1, 0, 0, 0});
    backend.set_override("R0", {1, 0, 0, 0});
    backend.set_override("R1", {0.99, 0.1, 0, 0});
    Table t1 = Table({Tuple{0, "L0", 1}});
    Table t2 = Table({Tuple{10, "R0", 1}, Tuple{11, "R1", 1}});
    JoinReport one_way = embedding_join(t1, t2, backend, false);
    CHECK(one_way.pairs.size() == 1);
    JoinReport both = embedding_join(t1, t2, backend, true);
    REQUIRE(both.pairs.size() == 2);  // R1's best match is L0 as well
    CHECK(both.pairs[1] == std::pair<std::int64_t, std::int64_t>{0, 11});
}

TEST_CASE("all completion operators agree with the oracle on random instances") {
    std::mt19937_64 rng(29);
    for (int round = 0; round < 30; ++round) {
        std::int64_t r1 = 2 + static_cast<std::int64_t>(rng() % 11);
        std::int64_t r2 = 2 + static_cast<std::int64_t>(rng() % 11);
        CostParams params;
        params.r1 = r1; params.r2 = r2;
        params.s1 = 3 + static_cast<double>(rng() % 8);
        params.s2 = 3 + static_cast<double>(rng() % 8);
        params.s3 = 1 + static_cast<double>(rng() % 3);
        params.p = static_cast<double>(rng() % 20);
        params.g = 1 + static_cast<double>(rng() % 3);
        params.t = static_cast<double>(r1) * params.s1 + static_cast<double>(r2) * params.s2 +
                   static_cast<double>(r1 * r2) * params.s3 +
                   1 + kPlannerHeadroomPairs * params.s3 + 32;
        params.sigma = uniform(rng, 0.0, 0.5);

        std::set<std::pair<std::int64_t, std::int64_t>> truth;
        for (std::int64_t i = 0; i < r1; ++i) {
            for (std::int64_t j = 0; j < r2; ++j) {
                if (uniform(rng, 0.0, 1.0) < params.sigma) truth.insert({i, j});
            }
        }
        SimulatedBackend backend(world_for(params, ground_truth_oracle(truth)));
        Table t1 = constant_table(r1, std::llround(params.s1));
        Table t2 = constant_table(r2, std::llround(params.s2));
        ExecutionBudget budget = ExecutionBudget::measured_from(params);

        JoinReport tuple_report = tuple_join(t1, t2, "t", backend);
        IntBatchSizes batches{1 + static_cast<std::int64_t>(rng() % r1),
                              1 + static_cast<std::int64_t>(rng() % r2)};
        JoinReport block_report = block_join(t1, t2, "t", batches, backend, budget);
        JoinReport adaptive_report = adaptive_join(
            t1, t2, "t", uniform(rng, 0.01, 0.4), 4.0, params, backend, budget);

        REQUIRE(block_report.status == JoinStatus::Completed);
        REQUIRE(adaptive_report.status == JoinStatus::Completed);
        std::vector<std::pair<std::int64_t, std::int64_t>> expected(truth.begin(),
                                                                    truth.end());
        CHECK(tuple_report.pairs == expected);
        CHECK(block_report.pairs == expected);
        CHECK(adaptive_report.pairs == expected);
        CHECK(score(tuple_report.pairs, truth).f1 == doctest::Approx(1.0));
    }
}

TEST_CASE("backend failures surface with partial results preserved") {
    CostParams params;
    params.r1 = 4; params.r2 = 4; params.s1 = 2; params.s2 = 2;
    params.s3 = 1; params.p = 1; params.g = 1; params.t = 200;
    SimulatedBackend inner(
        world_for(params, [](const Tuple& a, const Tuple& b) { return a.id == b.id; }));
    Table t1 = constant_table(4, 2);
    Table t2 = constant_table(4, 2);

    SUBCASE("pairwise") {
        FlakyBackend flaky(inner, 6);  // dies during pair (1, 2)
        JoinReport report = tuple_join(t1, t2, "same", flaky);
        CHECK(report.status == JoinStatus::BackendFailure);
        CHECK(report.error.find("injected timeout") != std::string::npos);
        CHECK(report.ledger.invocations == 6);
        REQUIRE(report.pairs.size() == 2);  // (0,0) and (1,1) seen before the failure
    }
    SUBCASE("block") {
        FlakyBackend flaky(inner, 1);
        JoinReport report = block_join(t1, t2, "same", IntBatchSizes{2, 2}, flaky,
                                       ExecutionBudget::measured_from(params));
        CHECK(report.status == JoinStatus::BackendFailure);
        CHECK(report.ledger.invocations == 1);
        CHECK(report.pairs.size() == 2);  // both matches of the first batch pair
    }
    SUBCASE("adaptive propagates the failure") {
        FlakyBackend flaky(inner, 0);
        JoinReport report =
            adaptive_join(t1, t2, "same", 0.5, 4.0, params, flaky,
                          ExecutionBudget::measured_from(params));
        CHECK(report.status == JoinStatus::BackendFailure);
        CHECK_FALSE(report.error.empty());
    }
}

} // TEST_SUITE
