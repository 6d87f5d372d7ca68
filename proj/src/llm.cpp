#include "reviewtypes/llm.hpp"

#include "reviewtypes/errors.hpp"
#include "reviewtypes/jsonl.hpp"
#include "reviewtypes/sha256.hpp"

#include <httplib.h>

#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <semaphore>
#include <thread>

namespace rvt {

YesNo parse_yes_no(std::string_view text) {
    std::size_t i = 0;
    while (i < text.size() && !std::isalpha(static_cast<unsigned char>(text[i])))
        ++i;
    std::string token;
    while (i < text.size() && std::isalpha(static_cast<unsigned char>(text[i])))
        token += static_cast<char>(std::tolower(static_cast<unsigned char>(text[i++])));
    if (token == "yes")
        return YesNo::yes;
    if (token == "no")
        return YesNo::no;
    return YesNo::invalid;
}

namespace {

// "http://host:1234/v1/complete" -> ("http://host:1234", "/v1/complete").
std::pair<std::string, std::string> split_url(const std::string& url) {
    auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos)
        throw ConfigError("endpoint url '" + url + "' has no scheme");
    auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos)
        return {url, "/"};
    return {url.substr(0, path_start), url.substr(path_start)};
}

// Dotted path into the response JSON; numeric segments index arrays.
const Json* walk_field_path(const Json& root, const std::string& path) {
    const Json* node = &root;
    std::size_t start = 0;
    while (start <= path.size()) {
        auto dot = path.find('.', start);
        std::string seg = path.substr(start, dot == std::string::npos ? dot : dot - start);
        if (seg.empty())
            return nullptr;
        if (node->is_array()) {
            if (seg.find_first_not_of("0123456789") != std::string::npos)
                return nullptr;
            auto idx = static_cast<std::size_t>(std::stoull(seg));
            if (idx >= node->size())
                return nullptr;
            node = &(*node)[idx];
        } else if (node->is_object()) {
            if (!node->contains(seg))
                return nullptr;
            node = &(*node)[seg];
        } else {
            return nullptr;
        }
        if (dot == std::string::npos)
            break;
        start = dot + 1;
    }
    return node;
}

} // namespace

struct HttpClient::Impl {
    ModelConfig cfg;
    std::string base;
    std::string path;
    std::counting_semaphore<(1 << 20)> slots;

    explicit Impl(ModelConfig c, const std::string& b, const std::string& p)
        : cfg(std::move(c)), base(b), path(p), slots(cfg.max_parallel) {}
};

HttpClient::HttpClient(ModelConfig cfg) {
    if (cfg.endpoint_url.empty())
        throw ConfigError("http client needs an endpoint url");
    if (cfg.max_parallel < 1 || cfg.max_retries < 0)
        throw ConfigError("max_parallel must be >= 1 and max_retries >= 0");
    auto [base, path] = split_url(cfg.endpoint_url);
    impl_ = std::make_unique<Impl>(std::move(cfg), base, path);
}

HttpClient::~HttpClient() = default;

CompletionResponse HttpClient::complete(const CompletionRequest& req) {
    if (req.prompt.empty())
        throw ConfigError("completion request has an empty prompt");
    impl_->slots.acquire();
    struct Release {
        Impl* impl;
        ~Release() { impl->slots.release(); }
    } release{impl_.get()};

    Json body = {{"prompt", req.prompt},
                 {"temperature", req.temperature},
                 {"max_tokens", req.max_tokens}};
    if (!impl_->cfg.model_id.empty())
        body["model"] = impl_->cfg.model_id;
    std::string payload = body.dump();

    httplib::Headers headers;
    if (const char* token = std::getenv(impl_->cfg.bearer_token_env.c_str());
        token && *token != '\0')
        headers.emplace("Authorization", std::string("Bearer ") + token);

    std::string last_failure;
    for (int attempt = 0; attempt <= impl_->cfg.max_retries; ++attempt) {
        if (attempt > 0) {
            double backoff = impl_->cfg.retry_backoff_s * std::pow(2.0, attempt - 1);
            std::this_thread::sleep_for(std::chrono::duration<double>(backoff));
        }
        // httplib clients are not safe for concurrent reuse; one per request.
        httplib::Client client(impl_->base);
        auto timeout = std::chrono::duration<double>(impl_->cfg.request_timeout_s);
        client.set_connection_timeout(timeout);
        client.set_read_timeout(timeout);
        client.set_write_timeout(timeout);

        auto start = std::chrono::steady_clock::now();
        httplib::Result res = client.Post(impl_->path, headers, payload, "application/json");
        double latency =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

        if (!res) {
            last_failure = httplib::to_string(res.error());
            continue;
        }
        if (res->status >= 500) {
            last_failure = "status " + std::to_string(res->status);
            continue;
        }
        if (res->status < 200 || res->status >= 300)
            throw ProtocolError("endpoint returned status " + std::to_string(res->status));
        Json parsed;
        try {
            parsed = Json::parse(res->body);
        } catch (const nlohmann::json::parse_error&) {
            throw ProtocolError("endpoint returned non-JSON body");
        }
        const Json* field = walk_field_path(parsed, impl_->cfg.response_field);
        if (!field || !field->is_string())
            throw ProtocolError("endpoint response has no string field '" +
                                impl_->cfg.response_field + "'");
        return {field->get<std::string>(), latency};
    }
    throw TransportError("endpoint unreachable after " +
                         std::to_string(impl_->cfg.max_retries + 1) + " attempts: " +
                         last_failure);
}

ReplayClient::ReplayClient(const std::filesystem::path& log_path) {
    for_each_jsonl(log_path, [&](const Json& row, std::size_t line_no) {
        std::string ctx = log_path.string() + ":" + std::to_string(line_no);
        std::string sha = require_string(row, "prompt_sha256", ctx);
        if (!row.contains("repetition") || !row["repetition"].is_number_integer())
            throw DataError(ctx + ": missing integer field 'repetition'");
        auto rep = row["repetition"].get<long long>();
        std::string response = require_string(row, "response", ctx);
        responses_[sha + "#" + std::to_string(rep)] = std::move(response);
    });
}

CompletionResponse ReplayClient::complete(const CompletionRequest& req) {
    if (req.prompt.empty())
        throw ConfigError("completion request has an empty prompt");
    std::string sha = sha256_hex(req.prompt);
    auto it = responses_.find(sha + "#" + std::to_string(req.repetition));
    if (it == responses_.end())
        throw FixtureMissError("replay log has no entry for prompt " + sha.substr(0, 12) +
                               "... repetition " + std::to_string(req.repetition));
    return {it->second, 0.0};
}

} // namespace rvt
