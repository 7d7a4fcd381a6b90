#include "psst/gateway.hpp"

#include <atomic>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <random>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "psst/digest.hpp"
#include "psst/errors.hpp"

namespace psst {

using json = nlohmann::json;

namespace {

std::string iso8601_now() {
    const std::time_t now = std::time(nullptr);
    std::tm utc{};
    gmtime_r(&now, &utc);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &utc);
    return buf;
}

json response_to_json(const ChatResponse& r) {
    return json{{"content", r.content},
                {"finish_reason", r.finish_reason},
                {"usage",
                 {{"prompt_tokens", r.usage.prompt_tokens},
                  {"completion_tokens", r.usage.completion_tokens},
                  {"total_tokens", r.usage.total_tokens}}}};
}

ChatResponse response_from_json(const json& j) {
    ChatResponse r;
    r.content = j.at("content").get<std::string>();
    r.finish_reason = j.value("finish_reason", "");
    if (j.contains("usage")) {
        const auto& u = j.at("usage");
        r.usage.prompt_tokens = u.value("prompt_tokens", 0L);
        r.usage.completion_tokens = u.value("completion_tokens", 0L);
        r.usage.total_tokens = u.value("total_tokens", 0L);
    }
    return r;
}

void validate_request(const ChatRequest& request) {
    if (request.messages.empty()) throw ValidationError("chat request has no messages");
    for (const auto& m : request.messages) {
        if (m.role != "system" && m.role != "user" && m.role != "assistant")
            throw ValidationError("invalid message role: " + m.role);
    }
    for (const auto& m : request.messages) {
        if (m.role == "system") continue;
        if (m.role != "user")
            throw ValidationError("first non-system message must have role user");
        break;
    }
}

class HttplibTransport : public Transport {
public:
    HttpResponse post_json(const EndpointConfig& config, const std::string& body,
                           const std::string& bearer_token) override {
        // Split base_url into origin and an optional path prefix.
        std::string origin = config.base_url;
        std::string prefix;
        const auto scheme_end = origin.find("://");
        const auto path_start =
            origin.find('/', scheme_end == std::string::npos ? 0 : scheme_end + 3);
        if (path_start != std::string::npos) {
            prefix = origin.substr(path_start);
            origin = origin.substr(0, path_start);
            while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
        }

        httplib::Client client(origin);
        client.set_connection_timeout(std::chrono::duration<double>(config.timeout_seconds));
        client.set_read_timeout(std::chrono::duration<double>(config.timeout_seconds));
        client.set_write_timeout(std::chrono::duration<double>(config.timeout_seconds));

        httplib::Headers headers;
        if (!bearer_token.empty()) headers.emplace("Authorization", "Bearer " + bearer_token);

        auto result = client.Post(prefix + "/v1/chat/completions", headers, body,
                                  "application/json");
        if (!result)
            throw GatewayError("transport error: " + httplib::to_string(result.error()) +
                               " (" + origin + ")");
        return {result->status, result->body};
    }
};

class FailingTransport : public Transport {
public:
    explicit FailingTransport(std::string reason) : reason_(std::move(reason)) {}
    HttpResponse post_json(const EndpointConfig&, const std::string&,
                           const std::string&) override {
        throw GatewayError("network disabled: " + reason_);
    }

private:
    std::string reason_;
};

}  // namespace

std::unique_ptr<Transport> make_http_transport() { return std::make_unique<HttplibTransport>(); }

std::unique_ptr<Transport> make_failing_transport(std::string reason) {
    return std::make_unique<FailingTransport>(std::move(reason));
}

// ---------------------------------------------------------------------------
// ResponseCache
// ---------------------------------------------------------------------------

ResponseCache::ResponseCache(std::filesystem::path path) : path_(std::move(path)) {
    std::ifstream in(path_);
    if (!in) return;  // missing file = empty cache
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            json rec = json::parse(line);
            // Later records win so an appended correction overrides.
            entries_[rec.at("key").get<std::string>()] =
                response_from_json(rec.at("response"));
        } catch (const json::exception& e) {
            throw ValidationError(path_.string() + ":" + std::to_string(line_no) +
                                  ": malformed cache record: " + e.what());
        }
    }
}

std::optional<ChatResponse> ResponseCache::find(const std::string& key) const {
    std::lock_guard lock(mutex_);
    auto it = entries_.find(key);
    if (it == entries_.end()) return std::nullopt;
    ChatResponse r = it->second;
    r.cache_hit = true;
    return r;
}

void ResponseCache::append(const std::string& key, const std::string& canonical_request,
                           const ChatResponse& response) {
    std::lock_guard lock(mutex_);
    if (entries_.count(key)) return;  // concurrent duplicate; first append wins
    std::ofstream out(path_, std::ios::app);
    if (!out) throw IoError("cannot append to cache file: " + path_.string());
    json rec{{"key", key},
             {"request", json::parse(canonical_request)},
             {"response", response_to_json(response)},
             {"timestamp", iso8601_now()}};
    out << rec.dump() << "\n";
    out.flush();
    if (!out) throw IoError("cache append failed: " + path_.string());
    entries_[key] = response;
}

std::size_t ResponseCache::size() const {
    std::lock_guard lock(mutex_);
    return entries_.size();
}

// ---------------------------------------------------------------------------
// Gateway
// ---------------------------------------------------------------------------

Gateway::Gateway(EndpointConfig config, CacheMode mode, std::filesystem::path cache_path)
    : Gateway(std::move(config), mode, std::move(cache_path),
              mode == CacheMode::replay ? make_failing_transport("replay mode")
                                        : make_http_transport()) {}

Gateway::Gateway(EndpointConfig config, CacheMode mode, std::filesystem::path cache_path,
                 std::unique_ptr<Transport> transport, std::chrono::milliseconds backoff_base)
    : config_(std::move(config)),
      mode_(mode),
      cache_(std::move(cache_path)),
      transport_(std::move(transport)),
      backoff_base_(backoff_base) {
    if (config_.max_concurrency < 1) throw ValidationError("max_concurrency must be >= 1");
    if (config_.timeout_seconds <= 0) throw ValidationError("timeout must be > 0");
    if (config_.max_retries < 0) throw ValidationError("max_retries must be >= 0");
}

std::string Gateway::canonical_request(const ChatRequest& request,
                                       const EndpointConfig& config) {
    json messages = json::array();
    for (const auto& m : request.messages)
        messages.push_back(json{{"content", m.content}, {"role", m.role}});
    json body{{"max_tokens", config.max_tokens},
              {"messages", std::move(messages)},
              {"model", config.model},
              {"temperature", config.temperature},
              {"top_p", config.top_p}};
    if (config.seed) body["seed"] = *config.seed;
    return body.dump();
}

std::string Gateway::cache_key(const ChatRequest& request, const EndpointConfig& config) {
    return sha256_hex(canonical_request(request, config));
}

ChatResponse Gateway::perform(const ChatRequest& request) {
    const std::string body = canonical_request(request, config_);

    std::string bearer;
    if (const char* key = std::getenv(config_.api_key_env.c_str())) bearer = key;

    const int attempts = config_.max_retries + 1;
    std::string last_error;
    for (int attempt = 0; attempt < attempts; ++attempt) {
        if (attempt > 0) {
            // Full jitter: uniform over (0, base * 2^i], capped at 8 s.
            thread_local std::mt19937_64 rng(std::random_device{}());
            const double cap_ms = 8000.0;
            const double span =
                std::min(cap_ms, static_cast<double>(backoff_base_.count()) *
                                     static_cast<double>(1 << (attempt - 1)));
            std::uniform_real_distribution<double> jitter(0.0, span);
            std::this_thread::sleep_for(
                std::chrono::duration<double, std::milli>(jitter(rng)));
        }
        HttpResponse http;
        try {
            http = transport_->post_json(config_, body, bearer);
        } catch (const GatewayError& e) {
            last_error = e.what();
            continue;
        }
        if (http.status >= 200 && http.status < 300) {
            try {
                json reply = json::parse(http.body);
                const auto& choice = reply.at("choices").at(0);
                ChatResponse r;
                r.content = choice.at("message").at("content").get<std::string>();
                r.finish_reason = choice.value("finish_reason", "");
                if (reply.contains("usage")) {
                    const auto& u = reply.at("usage");
                    r.usage.prompt_tokens = u.value("prompt_tokens", 0L);
                    r.usage.completion_tokens = u.value("completion_tokens", 0L);
                    r.usage.total_tokens = u.value("total_tokens", 0L);
                }
                return r;
            } catch (const json::exception& e) {
                throw GatewayError("unparseable endpoint reply: " + std::string(e.what()) +
                                   "; body: " + http.body.substr(0, 512));
            }
        }
        if (http.status >= 400 && http.status < 500)
            throw GatewayError("HTTP " + std::to_string(http.status) + ": " +
                               http.body.substr(0, 512));
        last_error = "HTTP " + std::to_string(http.status) + ": " + http.body.substr(0, 256);
    }
    throw GatewayError(last_error + " (after " + std::to_string(attempts) + " attempts)");
}

ChatResponse Gateway::chat(const ChatRequest& request) {
    validate_request(request);
    const std::string key = cache_key(request, config_);
    if (auto cached = cache_.find(key)) return *cached;
    if (mode_ == CacheMode::replay) throw CacheMissError(key);
    ChatResponse response = perform(request);
    cache_.append(key, canonical_request(request, config_), response);
    return response;
}

std::vector<ChatOutcome> Gateway::chat_batch(const std::vector<ChatRequest>& requests) {
    std::vector<ChatOutcome> outcomes(requests.size());
    if (requests.empty()) return outcomes;

    const std::size_t workers =
        std::min<std::size_t>(static_cast<std::size_t>(config_.max_concurrency),
                              requests.size());
    std::atomic<std::size_t> next{0};
    auto run = [&]() {
        for (std::size_t i = next.fetch_add(1); i < requests.size(); i = next.fetch_add(1)) {
            try {
                outcomes[i] = {chat(requests[i]), ""};
            } catch (const std::exception& e) {
                outcomes[i] = {std::nullopt, e.what()};
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(run);
    for (auto& t : pool) t.join();
    return outcomes;
}

}  // namespace psst
