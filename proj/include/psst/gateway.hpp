#pragma once

#include <chrono>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace psst {

struct EndpointConfig {
    std::string base_url = "http://127.0.0.1:8000";
    std::string model = "local-model";
    double temperature = 0.0;
    double top_p = 1.0;
    int max_tokens = 2048;
    std::optional<long> seed;
    std::string api_key_env = "PSST_API_KEY";
    double timeout_seconds = 120.0;
    int max_retries = 3;
    int max_concurrency = 4;
};

struct ChatMessage {
    std::string role;  // system | user | assistant
    std::string content;
};

struct ChatRequest {
    std::vector<ChatMessage> messages;
};

struct TokenUsage {
    long prompt_tokens = 0;
    long completion_tokens = 0;
    long total_tokens = 0;
};

struct ChatResponse {
    std::string content;
    std::string finish_reason;
    TokenUsage usage;
    bool cache_hit = false;
};

/// Per-item outcome of a batch call; failures never abort the batch.
struct ChatOutcome {
    std::optional<ChatResponse> response;
    std::string error;
    bool ok() const { return response.has_value(); }
};

enum class CacheMode { record, replay };

struct HttpResponse {
    int status = 0;
    std::string body;
};

/// Transport seam under the gateway. Production uses HttplibTransport;
/// tests inject stubs, and replay mode always gets a FailingTransport so a
/// replayed run provably performs zero network operations.
class Transport {
public:
    virtual ~Transport() = default;
    virtual HttpResponse post_json(const EndpointConfig& config, const std::string& body,
                                   const std::string& bearer_token) = 0;
};

std::unique_ptr<Transport> make_http_transport();
std::unique_ptr<Transport> make_failing_transport(std::string reason);

/// Append-only JSONL store of {key, request, response, timestamp} records.
/// Concurrent readers share the in-memory index; appends are serialized.
class ResponseCache {
public:
    /// Loads an existing cache file; a missing file is an empty cache.
    explicit ResponseCache(std::filesystem::path path);

    std::optional<ChatResponse> find(const std::string& key) const;
    void append(const std::string& key, const std::string& canonical_request,
                const ChatResponse& response);
    std::size_t size() const;
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
    mutable std::mutex mutex_;
    std::unordered_map<std::string, ChatResponse> entries_;
};

/// Single egress point to one chat-completions endpoint: request
/// construction, bounded-concurrency batching, retries with full-jitter
/// exponential backoff, and the record/replay cache.
class Gateway {
public:
    Gateway(EndpointConfig config, CacheMode mode, std::filesystem::path cache_path);

    /// Test/tool constructor with an explicit transport and backoff base.
    Gateway(EndpointConfig config, CacheMode mode, std::filesystem::path cache_path,
            std::unique_ptr<Transport> transport,
            std::chrono::milliseconds backoff_base = std::chrono::milliseconds(250));

    /// Record mode: cache first, network on miss, response persisted before
    /// returning. Replay mode: cache hit mandatory, misses throw
    /// CacheMissError. HTTP 4xx fails immediately; transport errors and 5xx
    /// retry up to max_retries.
    ChatResponse chat(const ChatRequest& request);

    /// At most max_concurrency requests in flight; output order equals input
    /// order; per-item errors reported positionally.
    std::vector<ChatOutcome> chat_batch(const std::vector<ChatRequest>& requests);

    const EndpointConfig& config() const { return config_; }
    CacheMode mode() const { return mode_; }

    /// Canonical serialization: UTF-8 JSON, keys sorted, no insignificant
    /// whitespace, sampling parameters and model included. Cache keys are
    /// SHA-256 over exactly these bytes.
    static std::string canonical_request(const ChatRequest& request,
                                         const EndpointConfig& config);
    static std::string cache_key(const ChatRequest& request, const EndpointConfig& config);

private:
    ChatResponse perform(const ChatRequest& request);

    EndpointConfig config_;
    CacheMode mode_;
    ResponseCache cache_;
    std::unique_ptr<Transport> transport_;
    std::chrono::milliseconds backoff_base_;
};

}  // namespace psst
