#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <string_view>
#include <unordered_map>

namespace rvt {

struct ModelConfig {
    std::string endpoint_url;
    std::string model_id = "default";
    double temperature = 0.3;
    int max_tokens = 8;
    double request_timeout_s = 30.0;
    int max_parallel = 4;  // in-flight request ceiling, enforced in the client
    int max_retries = 2;   // retries after the initial attempt
    double retry_backoff_s = 0.5; // doubles per retry
    std::string response_field = "text"; // dotted path into the endpoint JSON
    std::string bearer_token_env = "REVIEWTYPES_API_TOKEN";
};

struct CompletionRequest {
    std::string prompt; // non-empty
    double temperature = 0.3;
    int max_tokens = 8;
    int repetition = 0; // replay key component; the HTTP transport ignores it
};

struct CompletionResponse {
    std::string text;
    double latency_s = 0.0;
};

// One contract, two implementations: remote endpoint and deterministic replay.
class CompletionClient {
public:
    virtual ~CompletionClient() = default;
    virtual CompletionResponse complete(const CompletionRequest& req) = 0;
};

enum class YesNo { yes, no, invalid };

// Skips leading non-letter bytes, reads the first letter run, lowercases.
// "Yes." -> yes; "no, because..." -> no; anything else -> invalid.
YesNo parse_yes_no(std::string_view text);

// POST {prompt, temperature, max_tokens[, model]} to the endpoint; extracts
// the configured response field. Retries transport failures and 5xx with
// exponential backoff; 4xx and malformed payloads fail fast as protocol
// errors. Bounded to max_parallel concurrent requests; safe for concurrent
// use.
class HttpClient : public CompletionClient {
public:
    explicit HttpClient(ModelConfig cfg);
    ~HttpClient() override;
    CompletionResponse complete(const CompletionRequest& req) override;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

// Canned responses keyed by (sha256 of prompt, repetition). Missing entries
// raise FixtureMissError; nothing is ever randomized. Immutable after load.
class ReplayClient : public CompletionClient {
public:
    // Log rows: {prompt_sha256, repetition, response}; duplicate keys last-wins.
    explicit ReplayClient(const std::filesystem::path& log_path);
    CompletionResponse complete(const CompletionRequest& req) override;
    std::size_t size() const { return responses_.size(); }

private:
    std::unordered_map<std::string, std::string> responses_;
};

} // namespace rvt
