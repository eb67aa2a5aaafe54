#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <semaphore>
#include <stdexcept>
#include <string>
#include <vector>

namespace abcd {

struct CompletionRequest {
    std::string model;
    std::string prompt;  // single-turn user content
    double temperature = 0.0;
    int max_tokens = 256;

    friend bool operator==(const CompletionRequest&, const CompletionRequest&) = default;
};

enum class FinishReason { stop, length, filtered, other };

std::string_view to_string(FinishReason r);
FinishReason finish_reason_from_string(std::string_view s);

struct CompletionResponse {
    std::string text;
    FinishReason finish_reason = FinishReason::stop;

    friend bool operator==(const CompletionResponse&, const CompletionResponse&) = default;
};

class ProviderError : public std::runtime_error {
public:
    enum class Kind { RateLimited, Network, Auth, Filtered, ReplayMiss, Other };

    ProviderError(Kind kind, std::string detail);

    Kind kind() const { return kind_; }
    bool retryable() const { return kind_ == Kind::RateLimited || kind_ == Kind::Network; }
    const std::string& detail() const { return detail_; }

private:
    Kind kind_;
    std::string detail_;
};

std::string_view to_string(ProviderError::Kind k);

/// Completion backend. Implementations must be safe to call from several
/// threads at once.
class Provider {
public:
    virtual ~Provider() = default;
    virtual CompletionResponse complete(const CompletionRequest& req) = 0;
};

// ---------------------------------------------------------------------------
// Scripted provider (tests and fixtures)
// ---------------------------------------------------------------------------

struct ScriptRule {
    enum class Match { substring, exact };
    Match match = Match::substring;
    std::string pattern;
    std::string response;
};

/// Answers with the response of the first rule matching the prompt.
class ScriptedProvider final : public Provider {
public:
    explicit ScriptedProvider(std::vector<ScriptRule> rules);

    CompletionResponse complete(const CompletionRequest& req) override;

private:
    std::vector<ScriptRule> rules_;
};

/// Reads a JSON array of {"match": "substring"|"exact", "pattern", "response"}.
std::vector<ScriptRule> load_script_rules(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Record / replay cache
// ---------------------------------------------------------------------------

/// SHA-256 over a length-prefixed canonical encoding of the request, hex.
std::string cache_key(const CompletionRequest& req);

/// On-disk response store: one <digest>.json per request.
class ResponseCache {
public:
    explicit ResponseCache(std::filesystem::path dir);

    const std::filesystem::path& dir() const { return dir_; }
    std::filesystem::path entry_path(const std::string& digest) const;

    std::optional<CompletionResponse> load(const std::string& digest) const;
    /// Atomic write (temp file then rename). Stores the request alongside.
    void store(const std::string& digest, const CompletionRequest& req, const CompletionResponse& resp);

    /// Per-digest lock so concurrent identical misses hit the backend once.
    std::shared_ptr<std::mutex> lock_for(const std::string& digest);

private:
    std::filesystem::path dir_;
    std::mutex locks_mu_;
    std::map<std::string, std::shared_ptr<std::mutex>> locks_;
};

class CachingProvider final : public Provider {
public:
    /// With a null `inner`, the provider is a strict replayer: any miss throws
    /// ProviderError{ReplayMiss} naming the digest.
    CachingProvider(std::shared_ptr<ResponseCache> cache, std::shared_ptr<Provider> inner);

    CompletionResponse complete(const CompletionRequest& req) override;

    std::int64_t hits() const { return hits_.load(); }
    std::int64_t misses() const { return misses_.load(); }

private:
    std::shared_ptr<ResponseCache> cache_;
    std::shared_ptr<Provider> inner_;
    std::atomic<std::int64_t> hits_{0};
    std::atomic<std::int64_t> misses_{0};
};

// ---------------------------------------------------------------------------
// Decorators
// ---------------------------------------------------------------------------

struct RetryPolicy {
    int max_attempts = 5;
    std::chrono::milliseconds base_delay{500};
    std::chrono::milliseconds max_delay{30000};
    std::uint64_t jitter_seed = 0x5eed;
};

/// Retries retryable ProviderErrors with capped exponential backoff and full
/// jitter: the n-th wait is uniform in [0, min(max_delay, base_delay * 2^n)].
class RetryingProvider final : public Provider {
public:
    using Sleeper = std::function<void(std::chrono::milliseconds)>;

    RetryingProvider(std::shared_ptr<Provider> inner, RetryPolicy policy, Sleeper sleeper = {});

    CompletionResponse complete(const CompletionRequest& req) override;

private:
    std::shared_ptr<Provider> inner_;
    RetryPolicy policy_;
    Sleeper sleeper_;
    std::mutex rng_mu_;
    std::uint64_t rng_state_;
};

/// Bounds the number of in-flight calls to the inner provider.
class BoundedProvider final : public Provider {
public:
    BoundedProvider(std::shared_ptr<Provider> inner, int limit);

    CompletionResponse complete(const CompletionRequest& req) override;

private:
    std::shared_ptr<Provider> inner_;
    std::counting_semaphore<1024> slots_;
};

/// Counts calls that reach the inner provider.
class CountingProvider final : public Provider {
public:
    explicit CountingProvider(std::shared_ptr<Provider> inner) : inner_(std::move(inner)) {}

    CompletionResponse complete(const CompletionRequest& req) override;

    std::int64_t calls() const { return calls_.load(); }

private:
    std::shared_ptr<Provider> inner_;
    std::atomic<std::int64_t> calls_{0};
};

// ---------------------------------------------------------------------------
// Live endpoint
// ---------------------------------------------------------------------------

struct HttpProviderConfig {
    std::string base_url = "https://api.openai.com/v1";
    std::string api_key;
    std::chrono::seconds timeout{60};
};

/// Chat-completion style endpoint: POST {base_url}/chat/completions with a
/// single user message.
class HttpProvider final : public Provider {
public:
    explicit HttpProvider(HttpProviderConfig cfg);

    CompletionResponse complete(const CompletionRequest& req) override;

private:
    HttpProviderConfig cfg_;
    std::string origin_;       // scheme://host[:port]
    std::string path_prefix_;  // e.g. /v1
};

/// Reads ABCD_API_KEY; empty when unset.
std::string api_key_from_env();

}  // namespace abcd
