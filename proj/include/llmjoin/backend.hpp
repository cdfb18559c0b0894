#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "llmjoin/errors.hpp"
#include "llmjoin/prompts.hpp"
#include "llmjoin/table.hpp"

namespace llmjoin {

struct CompletionRequest {
    std::string prompt;
    std::int64_t max_output_tokens = 1;
    std::optional<std::string> stop_sequence;
    double temperature = 0.0;
};

struct CompletionOutcome {
    std::string text;
    std::int64_t prompt_tokens = 0;
    std::int64_t output_tokens = 0;
    /// Output hit max_output_tokens before a natural stop.
    bool truncated = false;
};

/// Text-completion provider. Join operators call the structured entry
/// points; by default those render the prompt templates and go through
/// complete(), which is how the HTTP backend works. The simulated backend
/// overrides them so simulation never depends on prompt-string parsing.
class CompletionBackend {
public:
    virtual ~CompletionBackend() = default;

    virtual CompletionOutcome complete(const CompletionRequest& request) = 0;

    /// One Yes/No comparison of a tuple pair.
    virtual CompletionOutcome complete_pair(const Tuple& t1, const Tuple& t2,
                                            const std::string& predicate) {
        CompletionRequest request;
        request.prompt = tuple_prompt(t1, t2, predicate);
        request.max_output_tokens = 1;
        return complete(request);
    }

    /// One batched matching request over two tuple collections.
    virtual CompletionOutcome complete_block(std::span<const Tuple> batch1,
                                             std::span<const Tuple> batch2,
                                             const std::string& predicate,
                                             std::int64_t max_output_tokens) {
        CompletionRequest request;
        request.prompt = block_prompt(batch1, batch2, predicate);
        request.max_output_tokens = max_output_tokens;
        request.stop_sequence = std::string(kFinishedSentinel);
        return complete(request);
    }
};

/// Embedding provider returning one unit-norm vector per input text.
class EmbeddingBackend {
public:
    virtual ~EmbeddingBackend() = default;

    virtual std::vector<std::vector<double>> embed(const std::vector<std::string>& texts) = 0;

    /// Token count billed for the last embed() call, when known.
    virtual std::int64_t last_tokens_read() const { return 0; }
};

} // namespace llmjoin
