#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "llmjoin/backend.hpp"
#include "llmjoin/errors.hpp"
#include "llmjoin/table.hpp"

namespace llmjoin {

/// Deterministic stand-in for a completion provider. The match oracle
/// decides which tuple pairs satisfy the join predicate; token accounting
/// uses each tuple's token_size plus the configured static prompt size, so
/// simulated ledgers reproduce the cost formulas exactly for constant
/// tuple sizes.
struct SimulatedWorld {
    std::function<bool(const Tuple&, const Tuple&)> match_oracle;
    std::int64_t per_pair_output_tokens = 1;  ///< s3
    std::int64_t token_budget = 1;            ///< t, net of the static prompt
    std::int64_t static_prompt_tokens = 0;    ///< p
};

/// Enumerates oracle matches in row-major order (batch1 outer) and emits
/// "x,y" fragments of s3 tokens each, then the sentinel (one token) if
/// everything fits within max_output_tokens; otherwise the maximal prefix
/// of complete pairs with truncated set.
inline CompletionOutcome simulate_block_answer(const SimulatedWorld& world,
                                               std::span<const Tuple> batch1,
                                               std::span<const Tuple> batch2,
                                               std::int64_t max_output_tokens) {
    std::int64_t prompt_tokens = world.static_prompt_tokens;
    for (const Tuple& t : batch1) prompt_tokens += t.token_size;
    for (const Tuple& t : batch2) prompt_tokens += t.token_size;

    std::vector<std::pair<std::size_t, std::size_t>> matches;
    for (std::size_t i = 0; i < batch1.size(); ++i) {
        for (std::size_t j = 0; j < batch2.size(); ++j) {
            if (world.match_oracle(batch1[i], batch2[j])) matches.emplace_back(i, j);
        }
    }

    CompletionOutcome outcome;
    outcome.prompt_tokens = prompt_tokens;
    std::int64_t s3 = world.per_pair_output_tokens;
    std::int64_t needed = static_cast<std::int64_t>(matches.size()) * s3 + 1;
    std::size_t emitted;
    if (needed <= max_output_tokens) {
        emitted = matches.size();
        outcome.output_tokens = needed;
        outcome.truncated = false;
    } else {
        std::int64_t fit = max_output_tokens >= 0 ? max_output_tokens / s3 : 0;
        emitted = std::min(matches.size(), static_cast<std::size_t>(std::max<std::int64_t>(fit, 0)));
        outcome.output_tokens = std::max<std::int64_t>(max_output_tokens, 0);
        outcome.truncated = true;
    }
    std::string text;
    for (std::size_t k = 0; k < emitted; ++k) {
        if (k > 0) text += ';';
        text += std::to_string(matches[k].first + 1);
        text += ',';
        text += std::to_string(matches[k].second + 1);
    }
    if (!outcome.truncated) {
        if (!text.empty()) text += ';';
        text += kFinishedSentinel;
    }
    outcome.text = std::move(text);
    return outcome;
}

class SimulatedBackend : public CompletionBackend {
public:
    explicit SimulatedBackend(SimulatedWorld world) : world_(std::move(world)) {}

    const SimulatedWorld& world() const { return world_; }

    CompletionOutcome complete(const CompletionRequest&) override {
        throw BackendError(
            "the simulated backend only serves structured pair/block requests");
    }

    CompletionOutcome complete_pair(const Tuple& t1, const Tuple& t2,
                                    const std::string&) override {
        CompletionOutcome outcome;
        outcome.prompt_tokens = world_.static_prompt_tokens + t1.token_size + t2.token_size;
        outcome.output_tokens = 1;
        outcome.truncated = false;
        outcome.text = world_.match_oracle(t1, t2) ? "Yes" : "No";
        return outcome;
    }

    CompletionOutcome complete_block(std::span<const Tuple> batch1,
                                     std::span<const Tuple> batch2,
                                     const std::string&,
                                     std::int64_t max_output_tokens) override {
        return simulate_block_answer(world_, batch1, batch2, max_output_tokens);
    }

private:
    SimulatedWorld world_;
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t fnv1a64(std::string_view data, std::uint64_t seed = 0xcbf29ce484222325ULL) {
    std::uint64_t h = seed;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

} // namespace detail

/// Pair oracle realizing a target selectivity: a seeded point on a
/// Kronecker lattice over (id1, id2) is compared against sigma. The global
/// match rate converges to sigma, the same seed always selects the same
/// pairs, and — unlike independent per-pair sampling — the match count
/// inside any batch rectangle stays within a few pairs of sigma*b1*b2, so
/// correctly planned runs do not overflow on sampling noise.
inline std::function<bool(const Tuple&, const Tuple&)>
selectivity_oracle(double sigma, std::uint64_t seed) {
    if (sigma >= 1.0) return [](const Tuple&, const Tuple&) { return true; };
    if (sigma <= 0.0) return [](const Tuple&, const Tuple&) { return false; };
    constexpr double kPhi = 0.41421356237309515;  // frac(sqrt 2)
    constexpr double kPsi = 0.6180339887498949;   // frac(golden ratio)
    double base = static_cast<double>(detail::splitmix64(seed) >> 11) / 9007199254740992.0;
    return [base, sigma](const Tuple& a, const Tuple& b) {
        double x = base + static_cast<double>(a.id) * kPhi +
                   static_cast<double>(b.id) * kPsi;
        return x - std::floor(x) < sigma;
    };
}

/// Oracle backed by an explicit ground-truth pair set.
inline std::function<bool(const Tuple&, const Tuple&)>
ground_truth_oracle(std::set<std::pair<std::int64_t, std::int64_t>> truth) {
    return [truth = std::move(truth)](const Tuple& a, const Tuple& b) {
        return truth.count({a.id, b.id}) > 0;
    };
}

/// Deterministic embedding provider: each text hashes to a seeded direction
/// on the unit sphere. An override table pins exact vectors for tests.
class HashEmbeddingBackend : public EmbeddingBackend {
public:
    explicit HashEmbeddingBackend(std::size_t dimensions = 16, std::uint64_t seed = 7)
        : dimensions_(dimensions), seed_(seed) {}

    void set_override(const std::string& text, std::vector<double> vector) {
        normalize(vector);
        overrides_[text] = std::move(vector);
    }

    std::vector<std::vector<double>> embed(const std::vector<std::string>& texts) override {
        if (texts.empty()) throw BackendError("embed: no input texts");
        std::vector<std::vector<double>> out;
        out.reserve(texts.size());
        last_tokens_ = 0;
        for (const std::string& text : texts) {
            last_tokens_ += static_cast<std::int64_t>((text.size() + 3) / 4);
            auto it = overrides_.find(text);
            if (it != overrides_.end()) {
                out.push_back(it->second);
                continue;
            }
            std::vector<double> v(dimensions_);
            std::uint64_t state = detail::fnv1a64(text, seed_ ^ 0x51ed270b2f6c87ULL);
            for (double& coord : v) {
                state = detail::splitmix64(state);
                // map to (-1, 1); direction is all that matters after normalizing
                coord = (static_cast<double>(state >> 11) / 9007199254740992.0) * 2.0 - 1.0;
            }
            normalize(v);
            out.push_back(std::move(v));
        }
        return out;
    }

    std::int64_t last_tokens_read() const override { return last_tokens_; }

private:
    static void normalize(std::vector<double>& v) {
        double norm = 0.0;
        for (double x : v) norm += x * x;
        norm = std::sqrt(norm);
        if (norm > 0) {
            for (double& x : v) x /= norm;
        }
    }

    std::size_t dimensions_;
    std::uint64_t seed_;
    std::int64_t last_tokens_ = 0;
    std::map<std::string, std::vector<double>> overrides_;
};

} // namespace llmjoin
