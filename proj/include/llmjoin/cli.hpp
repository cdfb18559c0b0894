#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "llmjoin/bench.hpp"
#include "llmjoin/cost_model.hpp"
#include "llmjoin/cost_params.hpp"
#include "llmjoin/errors.hpp"
#include "llmjoin/http_backend.hpp"
#include "llmjoin/join.hpp"
#include "llmjoin/optimizer.hpp"
#include "llmjoin/record_replay.hpp"
#include "llmjoin/simulated.hpp"
#include "llmjoin/sweep.hpp"
#include "llmjoin/table.hpp"
#include "llmjoin/table_jsonl.hpp"

namespace llmjoin::cli {

namespace detail {

inline std::string usd(double value) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "$%.4f", value);
    return std::string(buf);
}

inline std::string num(double value, const char* fmt = "%.4f") {
    char buf[64];
    std::snprintf(buf, sizeof buf, fmt, value);
    return std::string(buf);
}

inline Tokenizer tokenizer_by_name(const std::string& name) {
    if (name == "chars4") return Tokenizer::chars_div_4();
    if (name == "whitespace") return Tokenizer::whitespace();
    throw ParseError("unknown tokenizer: " + name);
}

inline Table load_table(const std::string& path, const Tokenizer& tokenizer) {
    if (path.size() >= 6 && path.substr(path.size() - 6) == ".jsonl") {
        return load_table_jsonl(path, tokenizer);
    }
    return load_table_csv(path, tokenizer);
}

inline const char* status_name(JoinStatus status) {
    switch (status) {
    case JoinStatus::Completed: return "completed";
    case JoinStatus::Overflow: return "overflow";
    case JoinStatus::BackendFailure: return "backend_failure";
    }
    return "";
}

inline const char* attempt_outcome_name(AttemptOutcome outcome) {
    return outcome == AttemptOutcome::Completed ? "completed" : "overflow";
}

inline nlohmann::json ledger_json(const JoinReport& report, const Pricing& pricing) {
    nlohmann::json attempts = nlohmann::json::array();
    for (const AttemptRecord& a : report.attempts) {
        attempts.push_back({
            {"estimate", a.estimate},
            {"b1", a.batches.b1},
            {"b2", a.batches.b2},
            {"outcome", attempt_outcome_name(a.outcome)},
            {"tokens_read", a.ledger.tokens_read},
            {"tokens_written", a.ledger.tokens_written},
            {"invocations", a.ledger.invocations},
            {"overflows", a.ledger.overflows},
        });
    }
    return nlohmann::json{
        {"tokens_read", report.ledger.tokens_read},
        {"tokens_written", report.ledger.tokens_written},
        {"invocations", report.ledger.invocations},
        {"overflows", report.ledger.overflows},
        {"cost_usd", report.ledger.monetary_cost(pricing)},
        {"wall_time_seconds", report.wall_time_seconds},
        {"status", status_name(report.status)},
        {"error", report.error},
        {"malformed_fragments", report.malformed_fragments},
        {"attempts", attempts},
    };
}

inline void write_pairs_csv(const JoinReport& report, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("cannot write pairs file: " + path);
    out << "id1,id2\n";
    for (const auto& [id1, id2] : report.pairs) out << id1 << ',' << id2 << '\n';
}

inline void write_file(const nlohmann::json& payload, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("cannot write file: " + path);
    out << payload.dump(2) << '\n';
}

struct BackendOptions {
    std::string backend = "simulated";
    std::string base_url;
    std::string model;
    std::string embedding_model;
    std::string api_key_env = "LLMJOIN_API_KEY";
    double timeout_seconds = 20.0;
    std::string config_path;
    std::string record_path;
    std::string replay_path;
    std::string truth_path;
    double sim_sigma = -1.0;
    std::uint64_t seed = 7;

    // which flags were set on the command line (flags > config file > defaults)
    bool base_url_set = false;
    bool model_set = false;
    bool embedding_model_set = false;
    bool timeout_set = false;

    void add_to(CLI::App& cmd) {
        cmd.add_option("--backend", backend, "Backend: simulated, http, or replay")
            ->check(CLI::IsMember({"simulated", "http", "replay"}));
        cmd.add_option("--base-url", base_url, "HTTP backend base URL");
        cmd.add_option("--model", model, "Completion model name");
        cmd.add_option("--embedding-model", embedding_model, "Embedding model name");
        cmd.add_option("--api-key-env", api_key_env,
                       "Environment variable holding the API key");
        cmd.add_option("--timeout", timeout_seconds, "Per-request timeout in seconds");
        cmd.add_option("--config", config_path, "JSON config file for backend settings");
        cmd.add_option("--record", record_path, "Record invocations to this cassette");
        cmd.add_option("--replay", replay_path, "Replay invocations from this cassette");
        cmd.add_option("--truth", truth_path,
                       "Ground-truth CSV; drives the simulated match oracle");
        cmd.add_option("--sim-sigma", sim_sigma,
                       "Simulated oracle selectivity (when no --truth is given)");
        cmd.add_option("--seed", seed, "Seed for simulated components");
    }

    void capture_set_flags(const CLI::App& cmd) {
        base_url_set = cmd.count("--base-url") > 0;
        model_set = cmd.count("--model") > 0;
        embedding_model_set = cmd.count("--embedding-model") > 0;
        timeout_set = cmd.count("--timeout") > 0;
    }

    HttpBackendConfig http_config() const {
        HttpBackendConfig config;
        if (!config_path.empty()) {
            std::ifstream in(config_path);
            if (!in) throw ParseError("cannot open config file: " + config_path);
            nlohmann::json doc;
            try {
                doc = nlohmann::json::parse(in);
            } catch (const nlohmann::json::exception& e) {
                throw ParseError("config file: " + std::string(e.what()));
            }
            config.base_url = doc.value("base_url", config.base_url);
            config.model = doc.value("model", config.model);
            config.embedding_model = doc.value("embedding_model", config.embedding_model);
            config.timeout_seconds = doc.value("timeout_seconds", config.timeout_seconds);
        }
        if (base_url_set) config.base_url = base_url;
        if (model_set) config.model = model;
        if (embedding_model_set) config.embedding_model = embedding_model;
        if (timeout_set) config.timeout_seconds = timeout_seconds;
        if (const char* key = std::getenv(api_key_env.c_str())) config.api_key = key;
        if (config.api_key.empty() && backend == "http") {
            throw ParseError("HTTP backend needs an API key in $" + api_key_env);
        }
        return config;
    }
};

struct ParamOptions {
    CostParams params;
    Pricing pricing = default_pricing();
    bool g_set = false;

    void add_cost_flags(CLI::App& cmd, bool with_rows = true) {
        params = default_params();
        if (with_rows) {
            cmd.add_option("--r1", params.r1, "Rows in table 1");
            cmd.add_option("--r2", params.r2, "Rows in table 2");
        }
        cmd.add_option("--s1", params.s1, "Tokens per tuple, table 1");
        cmd.add_option("--s2", params.s2, "Tokens per tuple, table 2");
        cmd.add_option("--s3", params.s3, "Tokens per result index pair");
        cmd.add_option("--sigma", params.sigma, "Join predicate selectivity");
        cmd.add_option("--g", params.g, "Relative cost of generated tokens");
        cmd.add_option("--p", params.p, "Static prompt tokens");
        cmd.add_option("--t", params.t, "Token budget per invocation, net of p");
        cmd.add_option("--price-read", pricing.read_cost_per_token,
                       "Currency per token read");
        cmd.add_option("--price-write", pricing.write_cost_per_token,
                       "Currency per token generated");
    }

    void finish(const CLI::App& cmd) {
        g_set = cmd.count("--g") > 0;
        if (!g_set && pricing.read_cost_per_token > 0) {
            params.g = pricing.relative_write_cost();
        }
    }
};

} // namespace detail

inline int cmd_optimize(const detail::ParamOptions& opts) {
    OptimizerResult result = optimize(opts.params);
    std::cout << "continuous optimum: b1* = " << detail::num(result.b1_star)
              << ", b2* = " << detail::num(result.b2_star) << '\n';
    std::cout << "integer batch sizes: b1 = " << result.ib1 << ", b2 = " << result.ib2
              << '\n';
    std::cout << "predicted invocations: " << detail::num(result.predicted_invocations)
              << " (continuous), "
              << block_invocations_int(opts.params, IntBatchSizes{result.ib1, result.ib2})
              << " (integer)\n";
    std::cout << "predicted cost: " << detail::num(result.predicted_cost) << " token units = "
              << detail::usd(result.predicted_cost * opts.pricing.read_cost_per_token)
              << '\n';
    return 0;
}

inline int cmd_cost(const detail::ParamOptions& opts, std::int64_t b1, std::int64_t b2) {
    const CostParams& params = opts.params;
    params.validate();
    double read_price = opts.pricing.read_cost_per_token;
    std::cout << "tuple join: " << detail::num(tuple_join_cost(params), "%.10g")
              << " token units = " << detail::usd(tuple_join_cost(params) * read_price)
              << " (" << params.r1 * params.r2 << " invocations)\n";
    IntBatchSizes batches{b1, b2};
    if (b1 < 1 || b2 < 1) {
        OptimizerResult result = optimize(params);
        batches = IntBatchSizes{result.ib1, result.ib2};
        std::cout << "batch sizes from optimizer: b1 = " << batches.b1
                  << ", b2 = " << batches.b2 << '\n';
    }
    BatchSizes continuous = batches.as_continuous();
    std::cout << "block prompt size: " << detail::num(block_prompt_size(params, continuous))
              << " tokens, cost " << detail::num(block_prompt_cost(params, continuous))
              << " token units per invocation\n";
    std::cout << "block invocations: " << detail::num(block_invocations(params, continuous))
              << " (continuous), " << block_invocations_int(params, batches)
              << " (integer)\n";
    double cost = block_join_cost(params, continuous);
    std::cout << "block join: " << detail::num(cost, "%.10g") << " token units = "
              << detail::usd(cost * read_price) << '\n';
    return 0;
}

inline int cmd_simulate(const std::string& config_path, const std::string& out_path) {
    SweepConfig config;
    {
        std::ifstream in(config_path);
        if (!in) throw ParseError("cannot open sweep config: " + config_path);
        nlohmann::json doc;
        try {
            doc = nlohmann::json::parse(in);
        } catch (const nlohmann::json::exception& e) {
            throw ParseError("sweep config: " + std::string(e.what()));
        }
        config.variable = parse_sweep_variable(doc.at("variable").get<std::string>());
        config.values = doc.at("values").get<std::vector<double>>();
        if (doc.contains("operators")) {
            config.operators.clear();
            for (const auto& name : doc["operators"]) {
                config.operators.push_back(parse_sweep_operator(name.get<std::string>()));
            }
        }
        config.seed = doc.value("seed", config.seed);
        config.alpha = doc.value("alpha", config.alpha);
        config.estimate_divisor = doc.value("e0_divisor", config.estimate_divisor);
        if (doc.contains("params")) {
            const auto& p = doc["params"];
            config.defaults.r1 = p.value("r1", config.defaults.r1);
            config.defaults.r2 = p.value("r2", config.defaults.r2);
            config.defaults.s1 = p.value("s1", config.defaults.s1);
            config.defaults.s2 = p.value("s2", config.defaults.s2);
            config.defaults.s3 = p.value("s3", config.defaults.s3);
            config.defaults.sigma = p.value("sigma", config.defaults.sigma);
            config.defaults.g = p.value("g", config.defaults.g);
            config.defaults.p = p.value("p", config.defaults.p);
            config.defaults.t = p.value("t", config.defaults.t);
        }
        if (doc.contains("pricing")) {
            config.pricing.read_cost_per_token =
                doc["pricing"].value("read", config.pricing.read_cost_per_token);
            config.pricing.write_cost_per_token =
                doc["pricing"].value("write", config.pricing.write_cost_per_token);
        }
    }
    config.validate();
    std::vector<SweepRow> rows = run_sweep(config);
    emit_csv(rows, config, out_path);

    std::cout << sweep_variable_name(config.variable);
    for (SweepOperator op : config.operators) {
        std::cout << '\t' << sweep_operator_name(op) << "_usd";
    }
    std::cout << '\n';
    for (const SweepRow& row : rows) {
        std::cout << detail::num(row.value, "%.6g");
        for (const auto& [op, outcome] : row.results) {
            std::cout << '\t' << detail::num(outcome.currency);
        }
        std::cout << '\n';
    }
    std::cout << "wrote " << out_path << '\n';
    return 0;
}

inline int cmd_gen(const std::string& scenario, std::int64_t n1, std::int64_t n2,
                   std::uint64_t seed, const std::string& out_dir) {
    Benchmark bench;
    if (scenario == "emails") {
        bench = gen_emails(n1 > 0 ? n1 : 100, n2 > 0 ? n2 : 10, seed);
    } else if (scenario == "ads") {
        bench = gen_ads(n1 > 0 ? n1 : 16, n2 > 0 ? n2 : 16, seed);
    } else {
        throw ParseError("unknown scenario: " + scenario + " (expected emails or ads)");
    }
    std::filesystem::create_directories(out_dir);
    save_table_csv(bench.table1, out_dir + "/table1.csv");
    save_table_csv(bench.table2, out_dir + "/table2.csv");
    save_ground_truth_csv(bench.ground_truth, out_dir + "/ground_truth.csv");
    TableStats s1 = bench.table1.stats();
    TableStats s2 = bench.table2.stats();
    std::cout << "scenario: " << scenario << '\n'
              << "predicate: " << bench.predicate_text << '\n'
              << "table 1: " << s1.row_count << " rows, avg "
              << detail::num(s1.avg_tuple_tokens(), "%.2f") << " tokens\n"
              << "table 2: " << s2.row_count << " rows, avg "
              << detail::num(s2.avg_tuple_tokens(), "%.2f") << " tokens\n"
              << "ground truth pairs: " << bench.ground_truth.size() << " (selectivity "
              << detail::num(bench.realized_selectivity(), "%.4f") << ")\n"
              << "wrote " << out_dir << "/table{1,2}.csv and ground_truth.csv\n";
    return 0;
}

struct JoinInvocation {
    std::string operator_name = "adaptive";
    std::int64_t b1 = 0;
    std::int64_t b2 = 0;
    double e0 = 0.01;
    double alpha = kDefaultAlpha;
    bool symmetric = false;
    std::string tokenizer_name = "chars4";
    double margin = 1.1;
    std::string out_dir = ".";
};

namespace detail {

/// Builds backends, runs the requested operator, writes pairs/ledger
/// (and metrics when ground truth is known), prints a summary.
/// Shared by `join` and `bench`.
inline int execute_join(const Table& table1, const Table& table2,
                        const std::string& predicate,
                        const std::optional<std::set<std::pair<std::int64_t, std::int64_t>>>&
                            truth,
                        const JoinInvocation& inv, const BackendOptions& backend_opts,
                        ParamOptions& opts) {
    CostParams params = opts.params;
    TableStats stats1 = table1.stats();
    TableStats stats2 = table2.stats();
    params.r1 = stats1.row_count;
    params.r2 = stats2.row_count;
    params.s1 = stats1.avg_tuple_tokens();
    params.s2 = stats2.avg_tuple_tokens();

    // Assemble the completion backend stack.
    std::unique_ptr<CompletionBackend> base;
    std::unique_ptr<EmbeddingBackend> embedding;
    ExecutionBudget budget = ExecutionBudget::measured_from(params);
    if (backend_opts.backend == "simulated") {
        SimulatedWorld world;
        if (!backend_opts.truth_path.empty()) {
            world.match_oracle = ground_truth_oracle(
                load_ground_truth_csv(backend_opts.truth_path));
        } else if (truth) {
            world.match_oracle = ground_truth_oracle(*truth);
        } else if (backend_opts.sim_sigma >= 0.0) {
            world.match_oracle =
                selectivity_oracle(backend_opts.sim_sigma, backend_opts.seed);
        } else {
            throw ParseError(
                "simulated backend needs --truth or --sim-sigma to define matches");
        }
        world.per_pair_output_tokens = std::llround(params.s3);
        world.token_budget = std::llround(params.t);
        world.static_prompt_tokens = std::llround(params.p);
        base = std::make_unique<SimulatedBackend>(world);
        embedding = std::make_unique<HashEmbeddingBackend>(16, backend_opts.seed);
    } else if (backend_opts.backend == "http") {
        HttpBackendConfig config = backend_opts.http_config();
        base = std::make_unique<HttpCompletionBackend>(config);
        embedding = std::make_unique<HttpEmbeddingBackend>(config);
        budget = ExecutionBudget::estimated(params.t, params.p, inv.margin,
                                            tokenizer_by_name(inv.tokenizer_name));
    } else {  // replay
        if (backend_opts.replay_path.empty()) {
            throw ParseError("replay backend needs --replay <cassette>");
        }
        base = std::make_unique<RecordReplayBackend>(backend_opts.replay_path);
        embedding = std::make_unique<HashEmbeddingBackend>(16, backend_opts.seed);
    }
    std::unique_ptr<RecordReplayBackend> recorder;
    CompletionBackend* backend = base.get();
    if (!backend_opts.record_path.empty()) {
        recorder = std::make_unique<RecordReplayBackend>(*base, backend_opts.record_path);
        backend = recorder.get();
    }

    JoinReport report;
    if (inv.operator_name == "tuple") {
        report = tuple_join(table1, table2, predicate, *backend);
    } else if (inv.operator_name == "block") {
        IntBatchSizes batches{inv.b1, inv.b2};
        double estimate = params.sigma;
        if (inv.b1 < 1 || inv.b2 < 1) {
            ExecutionPlan plan = plan_block_execution(params);
            batches = plan.batches;
        }
        report = block_join(table1, table2, predicate, batches, *backend, budget, estimate);
    } else if (inv.operator_name == "adaptive") {
        report = adaptive_join(table1, table2, predicate, inv.e0, inv.alpha, params,
                               *backend, budget);
    } else if (inv.operator_name == "embedding") {
        report = embedding_join(table1, table2, *embedding, inv.symmetric);
    } else {
        throw ParseError("unknown operator: " + inv.operator_name);
    }

    std::filesystem::create_directories(inv.out_dir);
    write_pairs_csv(report, inv.out_dir + "/pairs.csv");
    write_file(ledger_json(report, opts.pricing), inv.out_dir + "/ledger.json");

    std::cout << "operator: " << inv.operator_name << '\n'
              << "status: " << status_name(report.status) << '\n'
              << "pairs: " << report.pairs.size() << '\n'
              << "tokens read: " << report.ledger.tokens_read
              << ", written: " << report.ledger.tokens_written
              << ", invocations: " << report.ledger.invocations
              << ", overflows: " << report.ledger.overflows << '\n'
              << "fees: " << usd(report.ledger.monetary_cost(opts.pricing)) << '\n'
              << "time: " << num(report.wall_time_seconds) << " s\n";
    if (truth) {
        QualityMetrics metrics = score(report.pairs, *truth);
        write_file(nlohmann::json{{"recall", metrics.recall},
                                  {"precision", metrics.precision},
                                  {"f1", metrics.f1},
                                  {"precision_undefined", metrics.precision_undefined}},
                   inv.out_dir + "/metrics.json");
        std::cout << "recall: " << num(metrics.recall)
                  << ", precision: " << num(metrics.precision)
                  << ", f1: " << num(metrics.f1) << '\n';
    }
    if (report.status == JoinStatus::BackendFailure) {
        std::cerr << "backend failure: " << report.error
                  << " (partial results preserved in " << inv.out_dir << ")\n";
        return 1;
    }
    if (report.status == JoinStatus::Overflow) {
        std::cout << "result: OVERFLOW — the output budget was too small for the "
                     "result; retry with a larger selectivity estimate or the "
                     "adaptive operator\n";
        return 3;
    }
    return 0;
}

} // namespace detail

/// Entry point shared by the binary and the CLI tests.
inline int run_cli(int argc, const char* const* argv) {
    CLI::App app{"Semantic joins over text tables via batched language-model prompts"};
    app.require_subcommand(1);

    detail::ParamOptions optimize_opts;
    auto* optimize_cmd =
        app.add_subcommand("optimize", "Compute cost-optimal batch sizes");
    optimize_opts.add_cost_flags(*optimize_cmd);

    detail::ParamOptions cost_opts;
    std::int64_t cost_b1 = 0;
    std::int64_t cost_b2 = 0;
    auto* cost_cmd =
        app.add_subcommand("cost", "Estimate join costs for given parameters");
    cost_opts.add_cost_flags(*cost_cmd);
    cost_cmd->add_option("--b1", cost_b1, "Batch size for table 1 (optimized if absent)");
    cost_cmd->add_option("--b2", cost_b2, "Batch size for table 2 (optimized if absent)");

    std::string sim_config;
    std::string sim_out = "sweep.csv";
    auto* simulate_cmd =
        app.add_subcommand("simulate", "Run a simulated cost-scaling sweep");
    simulate_cmd->add_option("--config", sim_config, "Sweep config JSON")->required();
    simulate_cmd->add_option("--out", sim_out, "Output CSV path");

    std::string gen_scenario;
    std::int64_t gen_n1 = 0;
    std::int64_t gen_n2 = 0;
    std::uint64_t gen_seed = 7;
    std::string gen_out = "bench";
    auto* gen_cmd = app.add_subcommand("gen", "Generate a benchmark data set");
    gen_cmd->add_option("--scenario", gen_scenario, "emails or ads")->required();
    gen_cmd->add_option("--n1", gen_n1, "Rows in table 1");
    gen_cmd->add_option("--n2", gen_n2, "Rows in table 2");
    gen_cmd->add_option("--seed", gen_seed, "Generator seed");
    gen_cmd->add_option("--out-dir", gen_out, "Output directory");

    detail::ParamOptions join_opts;
    detail::BackendOptions join_backend;
    JoinInvocation join_inv;
    std::string join_table1;
    std::string join_table2;
    std::string join_predicate;
    std::string join_truth;
    auto* join_cmd = app.add_subcommand("join", "Join two tables");
    join_opts.add_cost_flags(*join_cmd, /*with_rows=*/false);
    join_backend.add_to(*join_cmd);
    join_cmd->add_option("--table1", join_table1, "Table 1 (CSV or JSONL)")->required();
    join_cmd->add_option("--table2", join_table2, "Table 2 (CSV or JSONL)")->required();
    join_cmd->add_option("--predicate", join_predicate, "Natural-language join condition")
        ->required();
    join_cmd->add_option("--operator", join_inv.operator_name,
                         "tuple, block, adaptive, or embedding")
        ->check(CLI::IsMember({"tuple", "block", "adaptive", "embedding"}));
    join_cmd->add_option("--b1", join_inv.b1, "Block batch size, table 1");
    join_cmd->add_option("--b2", join_inv.b2, "Block batch size, table 2");
    join_cmd->add_option("--e0", join_inv.e0, "Adaptive initial selectivity estimate");
    join_cmd->add_option("--alpha", join_inv.alpha, "Adaptive estimate growth factor");
    join_cmd->add_flag("--symmetric", join_inv.symmetric,
                       "Match embedding join in both directions");
    join_cmd->add_option("--tokenizer", join_inv.tokenizer_name, "chars4 or whitespace");
    join_cmd->add_option("--margin", join_inv.margin,
                         "Safety factor on estimated prompt tokens (HTTP backend)");
    join_cmd->add_option("--out-dir", join_inv.out_dir, "Output directory");
    join_cmd->add_option("--metrics-truth", join_truth,
                         "Ground-truth CSV for quality metrics");

    detail::ParamOptions bench_opts;
    detail::BackendOptions bench_backend;
    JoinInvocation bench_inv;
    std::string bench_scenario;
    std::int64_t bench_n1 = 0;
    std::int64_t bench_n2 = 0;
    auto* bench_cmd =
        app.add_subcommand("bench", "Generate a benchmark and run one operator on it");
    bench_opts.add_cost_flags(*bench_cmd, /*with_rows=*/false);
    bench_backend.add_to(*bench_cmd);  // --seed also seeds the generator
    bench_cmd->add_option("--scenario", bench_scenario, "emails or ads")->required();
    bench_cmd->add_option("--operator", bench_inv.operator_name,
                          "tuple, block, adaptive, or embedding")
        ->check(CLI::IsMember({"tuple", "block", "adaptive", "embedding"}));
    bench_cmd->add_option("--n1", bench_n1, "Rows in table 1");
    bench_cmd->add_option("--n2", bench_n2, "Rows in table 2");
    bench_cmd->add_option("--b1", bench_inv.b1, "Block batch size, table 1");
    bench_cmd->add_option("--b2", bench_inv.b2, "Block batch size, table 2");
    bench_cmd->add_option("--e0", bench_inv.e0, "Adaptive initial selectivity estimate");
    bench_cmd->add_option("--alpha", bench_inv.alpha, "Adaptive estimate growth factor");
    bench_cmd->add_flag("--symmetric", bench_inv.symmetric,
                        "Match embedding join in both directions");
    bench_cmd->add_option("--tokenizer", bench_inv.tokenizer_name, "chars4 or whitespace");
    bench_cmd->add_option("--margin", bench_inv.margin,
                          "Safety factor on estimated prompt tokens (HTTP backend)");
    bench_cmd->add_option("--out-dir", bench_inv.out_dir, "Output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (optimize_cmd->parsed()) {
            optimize_opts.finish(*optimize_cmd);
            return cmd_optimize(optimize_opts);
        }
        if (cost_cmd->parsed()) {
            cost_opts.finish(*cost_cmd);
            return cmd_cost(cost_opts, cost_b1, cost_b2);
        }
        if (simulate_cmd->parsed()) {
            return cmd_simulate(sim_config, sim_out);
        }
        if (gen_cmd->parsed()) {
            return cmd_gen(gen_scenario, gen_n1, gen_n2, gen_seed, gen_out);
        }
        if (join_cmd->parsed()) {
            join_opts.finish(*join_cmd);
            join_backend.capture_set_flags(*join_cmd);
            Tokenizer tokenizer = detail::tokenizer_by_name(join_inv.tokenizer_name);
            Table table1 = detail::load_table(join_table1, tokenizer);
            Table table2 = detail::load_table(join_table2, tokenizer);
            std::optional<std::set<std::pair<std::int64_t, std::int64_t>>> truth;
            if (!join_truth.empty()) truth = load_ground_truth_csv(join_truth);
            else if (!join_backend.truth_path.empty())
                truth = load_ground_truth_csv(join_backend.truth_path);
            return detail::execute_join(table1, table2, join_predicate, truth, join_inv,
                                        join_backend, join_opts);
        }
        if (bench_cmd->parsed()) {
            bench_opts.finish(*bench_cmd);
            bench_backend.capture_set_flags(*bench_cmd);
            Benchmark bench;
            if (bench_scenario == "emails") {
                bench = gen_emails(bench_n1 > 0 ? bench_n1 : 100,
                                   bench_n2 > 0 ? bench_n2 : 10, bench_backend.seed);
            } else if (bench_scenario == "ads") {
                bench = gen_ads(bench_n1 > 0 ? bench_n1 : 16, bench_n2 > 0 ? bench_n2 : 16,
                                bench_backend.seed);
            } else {
                throw ParseError("unknown scenario: " + bench_scenario);
            }
            std::filesystem::create_directories(bench_inv.out_dir);
            save_table_csv(bench.table1, bench_inv.out_dir + "/table1.csv");
            save_table_csv(bench.table2, bench_inv.out_dir + "/table2.csv");
            save_ground_truth_csv(bench.ground_truth,
                                  bench_inv.out_dir + "/ground_truth.csv");
            return detail::execute_join(bench.table1, bench.table2, bench.predicate_text,
                                        bench.ground_truth, bench_inv, bench_backend,
                                        bench_opts);
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "unexpected error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}

} // namespace llmjoin::cli
