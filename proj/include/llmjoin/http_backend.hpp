#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "llmjoin/backend.hpp"
#include "llmjoin/errors.hpp"

namespace llmjoin {

struct HttpBackendConfig {
    std::string base_url = "https://api.openai.com";
    std::string model = "gpt-4";
    std::string embedding_model = "text-embedding-3-small";
    std::string api_key;
    double timeout_seconds = 20.0;
    int max_attempts = 3;
    double initial_backoff_seconds = 0.5;
};

namespace detail {

/// Splits "scheme://host[:port][/prefix]" into origin and API path prefix;
/// the prefix defaults to "/v1" when the URL names only the origin.
inline std::pair<std::string, std::string> split_base_url(std::string url) {
    while (!url.empty() && url.back() == '/') url.pop_back();
    std::size_t scheme = url.find("://");
    std::size_t path_start = url.find('/', scheme == std::string::npos ? 0 : scheme + 3);
    if (path_start == std::string::npos) return {url, "/v1"};
    return {url.substr(0, path_start), url.substr(path_start)};
}

inline std::int64_t approx_tokens(std::string_view text) {
    return static_cast<std::int64_t>((text.size() + 3) / 4);
}

} // namespace detail

/// Shared POST-with-retries plumbing for the OpenAI-compatible endpoints.
/// Transient failures (timeouts, connection errors, 5xx) are retried with
/// exponential backoff; 4xx responses are surfaced as BackendRejected.
class HttpClientBase {
protected:
    explicit HttpClientBase(HttpBackendConfig config) : config_(std::move(config)) {
        auto [origin, prefix] = detail::split_base_url(config_.base_url);
        origin_ = origin;
        prefix_ = prefix;
    }

    nlohmann::json post_json(const std::string& endpoint, const nlohmann::json& body,
                             std::vector<nlohmann::json>* billed_attempts = nullptr) {
        std::string payload = body.dump();
        std::string last_error;
        bool timed_out = false;
        for (int attempt = 1; attempt <= config_.max_attempts; ++attempt) {
            if (attempt > 1) {
                double backoff = config_.initial_backoff_seconds *
                                 std::pow(2.0, attempt - 2);
                std::this_thread::sleep_for(std::chrono::duration<double>(backoff));
            }
            httplib::Client client(origin_);
            auto timeout = std::chrono::duration<double>(config_.timeout_seconds);
            client.set_connection_timeout(timeout);
            client.set_read_timeout(timeout);
            client.set_write_timeout(timeout);
            httplib::Headers headers;
            if (!config_.api_key.empty()) {
                headers.emplace("Authorization", "Bearer " + config_.api_key);
            }
            auto res = client.Post(prefix_ + endpoint, headers, payload, "application/json");
            if (!res) {
                timed_out = res.error() == httplib::Error::ConnectionTimeout ||
                            res.error() == httplib::Error::Read ||
                            res.error() == httplib::Error::Write || timed_out;
                last_error = httplib::to_string(res.error());
                continue;
            }
            if (res->status >= 200 && res->status < 300) {
                try {
                    return nlohmann::json::parse(res->body);
                } catch (const nlohmann::json::exception& e) {
                    throw BackendError(std::string("malformed provider response: ") + e.what());
                }
            }
            if (res->status >= 400 && res->status < 500) {
                throw BackendRejected("provider rejected request with status " +
                                      std::to_string(res->status) + ": " + res->body);
            }
            // 5xx: count any billed usage the provider reported, then retry.
            if (billed_attempts != nullptr) {
                try {
                    nlohmann::json parsed = nlohmann::json::parse(res->body);
                    if (parsed.contains("usage")) billed_attempts->push_back(parsed["usage"]);
                } catch (const nlohmann::json::exception&) {
                }
            }
            last_error = "status " + std::to_string(res->status);
        }
        if (timed_out) {
            throw BackendTimeout("request to " + origin_ + prefix_ + endpoint +
                                 " timed out after " + std::to_string(config_.max_attempts) +
                                 " attempts (" + last_error + ")");
        }
        throw BackendError("request to " + origin_ + prefix_ + endpoint + " failed after " +
                           std::to_string(config_.max_attempts) + " attempts (" +
                           last_error + ")");
    }

    HttpBackendConfig config_;
    std::string origin_;
    std::string prefix_;
};

/// OpenAI-compatible chat-completions backend: one POST per invocation,
/// with the prompt as a single user message. Token counts come from the
/// provider's usage report when present; otherwise they are estimated from
/// character counts. Usage billed by failed-but-retried attempts is folded
/// into the returned outcome so ledgers stay truthful.
class HttpCompletionBackend : public CompletionBackend, private HttpClientBase {
public:
    explicit HttpCompletionBackend(HttpBackendConfig config)
        : HttpClientBase(std::move(config)) {}

    CompletionOutcome complete(const CompletionRequest& request) override {
        nlohmann::json body{
            {"model", config_.model},
            {"messages", nlohmann::json::array({
                nlohmann::json{{"role", "user"}, {"content", request.prompt}},
            })},
            {"max_tokens", request.max_output_tokens},
            {"temperature", request.temperature},
        };
        if (request.stop_sequence) {
            body["stop"] = nlohmann::json::array({*request.stop_sequence});
        }
        std::vector<nlohmann::json> billed;
        nlohmann::json response = post_json("/chat/completions", body, &billed);

        CompletionOutcome outcome;
        try {
            const auto& choice = response.at("choices").at(0);
            outcome.text = choice.at("message").at("content").get<std::string>();
            outcome.truncated = choice.value("finish_reason", "") == "length";
        } catch (const nlohmann::json::exception& e) {
            throw BackendError(std::string("unexpected completion payload: ") + e.what());
        }
        if (response.contains("usage")) {
            outcome.prompt_tokens = response["usage"].value("prompt_tokens", std::int64_t{0});
            outcome.output_tokens = response["usage"].value("completion_tokens", std::int64_t{0});
        } else {
            outcome.prompt_tokens = detail::approx_tokens(request.prompt);
            outcome.output_tokens = detail::approx_tokens(outcome.text);
        }
        for (const nlohmann::json& usage : billed) {
            outcome.prompt_tokens += usage.value("prompt_tokens", std::int64_t{0});
            outcome.output_tokens += usage.value("completion_tokens", std::int64_t{0});
        }
        return outcome;
    }
};

/// OpenAI-compatible embeddings backend.
class HttpEmbeddingBackend : public EmbeddingBackend, private HttpClientBase {
public:
    explicit HttpEmbeddingBackend(HttpBackendConfig config)
        : HttpClientBase(std::move(config)) {}

    std::vector<std::vector<double>> embed(const std::vector<std::string>& texts) override {
        if (texts.empty()) throw BackendError("embed: no input texts");
        nlohmann::json body{{"model", config_.embedding_model}, {"input", texts}};
        nlohmann::json response = post_json("/embeddings", body);

        std::vector<std::vector<double>> out(texts.size());
        try {
            for (const auto& item : response.at("data")) {
                auto index = item.at("index").get<std::size_t>();
                if (index >= out.size()) throw BackendError("embedding index out of range");
                out[index] = item.at("embedding").get<std::vector<double>>();
            }
        } catch (const nlohmann::json::exception& e) {
            throw BackendError(std::string("unexpected embeddings payload: ") + e.what());
        }
        for (auto& v : out) {
            double norm = 0.0;
            for (double x : v) norm += x * x;
            norm = std::sqrt(norm);
            if (norm > 0) {
                for (double& x : v) x /= norm;
            }
        }
        last_tokens_ = 0;
        if (response.contains("usage")) {
            last_tokens_ = response["usage"].value("prompt_tokens", std::int64_t{0});
        } else {
            for (const std::string& text : texts) last_tokens_ += detail::approx_tokens(text);
        }
        return out;
    }

    std::int64_t last_tokens_read() const override { return last_tokens_; }

private:
    std::int64_t last_tokens_ = 0;
};

} // namespace llmjoin
