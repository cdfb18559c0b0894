#include <doctest.h>

#include <sstream>
#include <string>

#include "llmjoin/bench.hpp"
#include "llmjoin/join.hpp"
#include "llmjoin/simulated.hpp"

using namespace llmjoin;

TEST_SUITE("bench") {

TEST_CASE("quality metrics") {
    std::set<std::pair<std::int64_t, std::int64_t>> truth = {{0, 0}, {1, 1}, {2, 2}, {3, 3}};
    SUBCASE("exact result") {
        QualityMetrics m = score({{0, 0}, {1, 1}, {2, 2}, {3, 3}}, truth);
        CHECK(m.recall == doctest::Approx(1.0));
        CHECK(m.precision == doctest::Approx(1.0));
        CHECK(m.f1 == doctest::Approx(1.0));
        CHECK_FALSE(m.precision_undefined);
    }
    SUBCASE("empty result against non-empty truth") {
        QualityMetrics m = score({}, truth);
        CHECK(m.recall == doctest::Approx(0.0));
        CHECK(m.precision == doctest::Approx(1.0));
        CHECK(m.precision_undefined);
        CHECK(m.f1 == doctest::Approx(0.0));
    }
    SUBCASE("half of truth plus one false pair") {
        QualityMetrics m = score({{0, 0}, {1, 1}, {9, 9}}, truth);
        CHECK(m.recall == doctest::Approx(0.5));
        CHECK(m.precision == doctest::Approx(2.0 / 3.0));
        CHECK(m.f1 == doctest::Approx(4.0 / 7.0));
    }
    SUBCASE("empty against empty") {
        QualityMetrics m = score({}, {});
        CHECK(m.recall == doctest::Approx(1.0));
        CHECK(m.precision == doctest::Approx(1.0));
        CHECK(m.f1 == doctest::Approx(1.0));
    }
    SUBCASE("duplicates in the pair list do not inflate precision") {
        QualityMetrics m = score({{0, 0}, {0, 0}, {5, 5}}, truth);
        CHECK(m.precision == doctest::Approx(0.5));
        CHECK(m.recall == doctest::Approx(0.25));
    }
}

TEST_CASE("email scenario statistics") {
    Benchmark bench = gen_emails(100, 10, 7);
    CHECK(bench.table1.row_count() == 100);
    CHECK(bench.table2.row_count() == 10);
    CHECK(bench.ground_truth.size() == 10);
    CHECK(bench.realized_selectivity() == doctest::Approx(0.01));
    TableStats s1 = bench.table1.stats();
    TableStats s2 = bench.table2.stats();
    CHECK(s1.avg_tuple_tokens() >= 11.0);
    CHECK(s1.avg_tuple_tokens() <= 17.0);
    CHECK(s2.avg_tuple_tokens() >= 12.0);
    CHECK(s2.avg_tuple_tokens() <= 18.0);
    CHECK(bench.predicate_text == "the two texts contradict each other");
}

TEST_CASE("email ground truth only pairs texts about the same person") {
    for (std::uint64_t seed : {1ULL, 7ULL, 23ULL}) {
        Benchmark bench = gen_emails(100, 10, seed);
        CHECK(bench.ground_truth.size() == 10);
        for (const auto& [sid, eid] : bench.ground_truth) {
            const std::string& statement =
                bench.table1.tuples()[static_cast<std::size_t>(sid)].text;
            const std::string& email =
                bench.table2.tuples()[static_cast<std::size_t>(eid)].text;
            std::string name = statement.substr(0, statement.find(':'));
            CHECK(email.find(" " + name + " ") != std::string::npos);
        }
    }
}

TEST_CASE("email generation is seed deterministic") {
    Benchmark a = gen_emails(40, 6, 99);
    Benchmark b = gen_emails(40, 6, 99);
    REQUIRE(a.table1.row_count() == b.table1.row_count());
    for (std::size_t i = 0; i < a.table1.tuples().size(); ++i) {
        CHECK(a.table1.tuples()[i].text == b.table1.tuples()[i].text);
    }
    CHECK(a.ground_truth == b.ground_truth);
    Benchmark c = gen_emails(40, 6, 100);
    bool any_difference = false;
    for (std::size_t i = 0; i < a.table1.tuples().size(); ++i) {
        if (a.table1.tuples()[i].text != c.table1.tuples()[i].text) any_difference = true;
    }
    CHECK(any_difference);
}

TEST_CASE("ads scenario statistics") {
    Benchmark bench = gen_ads(16, 16, 7);
    CHECK(bench.table1.row_count() == 16);
    CHECK(bench.table2.row_count() == 16);
    // sixteen distinct ads: every search matches exactly one of them
    CHECK(bench.ground_truth.size() == 16);
    CHECK(bench.realized_selectivity() == doctest::Approx(0.0625));
    TableStats s1 = bench.table1.stats();
    TableStats s2 = bench.table2.stats();
    CHECK(s1.avg_tuple_tokens() >= 8.0);
    CHECK(s1.avg_tuple_tokens() <= 14.0);
    CHECK(s2.avg_tuple_tokens() >= 7.0);
    CHECK(s2.avg_tuple_tokens() <= 13.0);
}

TEST_CASE("ads ground truth means equal material and color") {
    Benchmark bench = gen_ads(20, 24, 5);
    auto suffix_of = [](const std::string& text) {
        return text.substr(text.find(" that is "));
    };
    for (const auto& [aid, sid] : bench.ground_truth) {
        const std::string& ad = bench.table1.tuples()[static_cast<std::size_t>(aid)].text;
        const std::string& search =
            bench.table2.tuples()[static_cast<std::size_t>(sid)].text;
        CHECK(suffix_of(ad) == suffix_of(search));
    }
    // and conversely: equal descriptions are always in the truth set
    for (const Tuple& ad : bench.table1.tuples()) {
        for (const Tuple& search : bench.table2.tuples()) {
            if (suffix_of(ad.text) == suffix_of(search.text)) {
                CHECK(bench.ground_truth.count({ad.id, search.id}) == 1);
            }
        }
    }
}

TEST_CASE("operators reach perfect quality against the oracle wired to ground truth") {
    for (bool use_ads : {true, false}) {
        Benchmark bench = use_ads ? gen_ads(16, 16, 7) : gen_emails(100, 10, 7);
        CostParams params;
        params.r1 = bench.table1.row_count();
        params.r2 = bench.table2.row_count();
        params.s1 = bench.table1.stats().avg_tuple_tokens();
        params.s2 = bench.table2.stats().avg_tuple_tokens();
        params.s3 = 2;
        params.p = 50;
        params.g = 2;
        params.t = 8192;
        SimulatedWorld world;
        world.match_oracle = ground_truth_oracle(bench.ground_truth);
        world.per_pair_output_tokens = 2;
        world.token_budget = 8192;
        world.static_prompt_tokens = 50;
        SimulatedBackend backend(world);
        JoinReport report =
            adaptive_join(bench.table1, bench.table2, bench.predicate_text, 0.0001, 4.0,
                          params, backend, ExecutionBudget::measured_from(params));
        QualityMetrics m = score(report.pairs, bench.ground_truth);
        CHECK(m.f1 == doctest::Approx(1.0));
        CHECK(m.recall == doctest::Approx(1.0));
        CHECK(m.precision == doctest::Approx(1.0));
    }
}

TEST_CASE("ground truth csv round trip") {
    Benchmark bench = gen_ads(16, 16, 7);
    std::ostringstream out;
    save_ground_truth_csv(bench.ground_truth, out);
    std::istringstream in(out.str());
    auto loaded = load_ground_truth_csv(in);
    CHECK(loaded == bench.ground_truth);

    std::istringstream bad("no,header\n1,2\n");
    CHECK_THROWS_AS(load_ground_truth_csv(bad), ParseError);
}

TEST_CASE("generators reject non-positive sizes") {
    CHECK_THROWS_AS(gen_emails(0, 5, 1), DomainError);
    CHECK_THROWS_AS(gen_ads(5, 0, 1), DomainError);
}

} // TEST_SUITE
