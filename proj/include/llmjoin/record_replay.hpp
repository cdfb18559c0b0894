#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <mutex>
#include <span>
#include <string>
#include <utility>

#include <json.hpp>

#include "llmjoin/backend.hpp"
#include "llmjoin/errors.hpp"
#include "llmjoin/simulated.hpp"

namespace llmjoin {

enum class CassetteMode { Record, Replay };

/// Wraps another completion backend with a JSON-lines cassette. Record mode
/// forwards requests and appends one record per invocation; replay mode
/// serves stored outcomes without touching the inner backend and fails on
/// unseen requests. Structured pair/block requests are keyed by their
/// rendered prompt text, which encodes the batches deterministically.
class RecordReplayBackend : public CompletionBackend {
public:
    /// Record mode; wraps the inner backend.
    RecordReplayBackend(CompletionBackend& inner, std::string cassette_path)
        : inner_(&inner), path_(std::move(cassette_path)), mode_(CassetteMode::Record) {
        out_.open(path_, std::ios::binary | std::ios::trunc);
        if (!out_) throw ParseError("cannot write cassette: " + path_);
    }

    /// Replay mode; no inner backend required.
    explicit RecordReplayBackend(std::string cassette_path)
        : path_(std::move(cassette_path)), mode_(CassetteMode::Replay) {
        load();
    }

    CassetteMode mode() const { return mode_; }

    CompletionOutcome complete(const CompletionRequest& request) override {
        return serve(request.prompt, [&] { return inner_->complete(request); });
    }

    CompletionOutcome complete_pair(const Tuple& t1, const Tuple& t2,
                                    const std::string& predicate) override {
        return serve(tuple_prompt(t1, t2, predicate),
                     [&] { return inner_->complete_pair(t1, t2, predicate); });
    }

    CompletionOutcome complete_block(std::span<const Tuple> batch1,
                                     std::span<const Tuple> batch2,
                                     const std::string& predicate,
                                     std::int64_t max_output_tokens) override {
        return serve(block_prompt(batch1, batch2, predicate), [&] {
            return inner_->complete_block(batch1, batch2, predicate, max_output_tokens);
        });
    }

private:
    template <typename Invoke>
    CompletionOutcome serve(const std::string& prompt, Invoke&& invoke) {
        std::string key = hash_key(prompt);
        if (mode_ == CassetteMode::Replay) {
            std::lock_guard<std::mutex> lock(mutex_);
            auto it = entries_.find(key);
            if (it == entries_.end() || it->second.first != prompt) {
                throw CassetteMiss("cassette " + path_ + " has no entry for this request");
            }
            return it->second.second;
        }
        CompletionOutcome outcome = invoke();
        nlohmann::json record{
            {"hash", key},
            {"prompt", prompt},
            {"text", outcome.text},
            {"prompt_tokens", outcome.prompt_tokens},
            {"output_tokens", outcome.output_tokens},
            {"truncated", outcome.truncated},
        };
        std::lock_guard<std::mutex> lock(mutex_);
        out_ << record.dump() << '\n';
        out_.flush();
        entries_[key] = {prompt, outcome};
        return outcome;
    }

    static std::string hash_key(const std::string& prompt) {
        char buf[17];
        std::snprintf(buf, sizeof buf, "%016llx",
                      static_cast<unsigned long long>(detail::fnv1a64(prompt)));
        return std::string(buf);
    }

    void load() {
        std::ifstream in(path_, std::ios::binary);
        if (!in) throw ParseError("cannot open cassette: " + path_);
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (line.empty()) continue;
            nlohmann::json record;
            try {
                record = nlohmann::json::parse(line);
            } catch (const nlohmann::json::exception& e) {
                throw ParseError("cassette line " + std::to_string(lineno) + ": " + e.what());
            }
            CompletionOutcome outcome;
            outcome.text = record.at("text").get<std::string>();
            outcome.prompt_tokens = record.at("prompt_tokens").get<std::int64_t>();
            outcome.output_tokens = record.at("output_tokens").get<std::int64_t>();
            outcome.truncated = record.at("truncated").get<bool>();
            entries_[record.at("hash").get<std::string>()] = {
                record.at("prompt").get<std::string>(), outcome};
        }
    }

    CompletionBackend* inner_ = nullptr;
    std::string path_;
    CassetteMode mode_;
    std::ofstream out_;
    std::mutex mutex_;
    std::map<std::string, std::pair<std::string, CompletionOutcome>> entries_;
};

} // namespace llmjoin
