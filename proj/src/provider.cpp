#include "abcd/provider.hpp"

#include "abcd/fs_util.hpp"

#include <json.hpp>
#include <openssl/evp.h>

#include <bit>
#include <cstdlib>
#include <thread>

namespace abcd {

namespace fs = std::filesystem;
using nlohmann::json;

std::string_view to_string(FinishReason r) {
    switch (r) {
        case FinishReason::stop: return "stop";
        case FinishReason::length: return "length";
        case FinishReason::filtered: return "filtered";
        case FinishReason::other: return "other";
    }
    return "other";
}

FinishReason finish_reason_from_string(std::string_view s) {
    if (s == "stop") return FinishReason::stop;
    if (s == "length") return FinishReason::length;
    if (s == "filtered" || s == "content_filter") return FinishReason::filtered;
    return FinishReason::other;
}

std::string_view to_string(ProviderError::Kind k) {
    switch (k) {
        case ProviderError::Kind::RateLimited: return "rate_limited";
        case ProviderError::Kind::Network: return "network";
        case ProviderError::Kind::Auth: return "auth";
        case ProviderError::Kind::Filtered: return "filtered";
        case ProviderError::Kind::ReplayMiss: return "replay_miss";
        case ProviderError::Kind::Other: return "other";
    }
    return "other";
}

ProviderError::ProviderError(Kind kind, std::string detail)
    : std::runtime_error(std::string(to_string(kind)) + ": " + detail),
      kind_(kind),
      detail_(std::move(detail)) {}

// ---------------------------------------------------------------------------

ScriptedProvider::ScriptedProvider(std::vector<ScriptRule> rules) : rules_(std::move(rules)) {
    if (rules_.empty()) throw std::invalid_argument("scripted provider needs at least one rule");
}

CompletionResponse ScriptedProvider::complete(const CompletionRequest& req) {
    for (const auto& rule : rules_) {
        const bool hit = rule.match == ScriptRule::Match::exact
                             ? req.prompt == rule.pattern
                             : req.prompt.find(rule.pattern) != std::string::npos;
        if (hit) return {rule.response, FinishReason::stop};
    }
    throw ProviderError(ProviderError::Kind::Other, "no scripted rule matches prompt");
}

std::vector<ScriptRule> load_script_rules(const fs::path& path) {
    const auto doc = json::parse(read_file(path));
    if (!doc.is_array()) throw std::runtime_error(path.string() + ": expected a JSON array of rules");
    std::vector<ScriptRule> rules;
    for (const auto& r : doc) {
        ScriptRule rule;
        const auto match = r.value("match", std::string("substring"));
        if (match == "exact") {
            rule.match = ScriptRule::Match::exact;
        } else if (match != "substring") {
            throw std::runtime_error(path.string() + ": unknown match mode '" + match + "'");
        }
        rule.pattern = r.at("pattern").get<std::string>();
        rule.response = r.at("response").get<std::string>();
        rules.push_back(std::move(rule));
    }
    return rules;
}

// ---------------------------------------------------------------------------

namespace {

void put_u64(std::string& buf, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_bytes(std::string& buf, std::string_view s) {
    put_u64(buf, s.size());
    buf.append(s);
}

json request_json(const CompletionRequest& req) {
    return {{"model", req.model},
            {"prompt", req.prompt},
            {"temperature", req.temperature},
            {"max_tokens", req.max_tokens}};
}

}  // namespace

std::string cache_key(const CompletionRequest& req) {
    std::string buf;
    put_bytes(buf, "abcd-cache-v1");
    put_bytes(buf, req.model);
    put_bytes(buf, req.prompt);
    put_u64(buf, std::bit_cast<std::uint64_t>(req.temperature == 0.0 ? 0.0 : req.temperature));
    put_u64(buf, static_cast<std::uint64_t>(static_cast<std::int64_t>(req.max_tokens)));

    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(buf.data(), buf.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
        throw std::runtime_error("sha256 failed");
    }
    static constexpr char kHex[] = "0123456789abcdef";
    std::string hex;
    hex.reserve(2 * len);
    for (unsigned i = 0; i < len; ++i) {
        hex.push_back(kHex[digest[i] >> 4]);
        hex.push_back(kHex[digest[i] & 0xf]);
    }
    return hex;
}

ResponseCache::ResponseCache(fs::path dir) : dir_(std::move(dir)) { fs::create_directories(dir_); }

fs::path ResponseCache::entry_path(const std::string& digest) const { return dir_ / (digest + ".json"); }

std::optional<CompletionResponse> ResponseCache::load(const std::string& digest) const {
    const auto path = entry_path(digest);
    if (!fs::exists(path)) return std::nullopt;
    const auto doc = json::parse(read_file(path));
    const auto& r = doc.at("response");
    return CompletionResponse{r.at("text").get<std::string>(),
                              finish_reason_from_string(r.at("finish_reason").get<std::string>())};
}

void ResponseCache::store(const std::string& digest, const CompletionRequest& req,
                          const CompletionResponse& resp) {
    json doc = {{"request", request_json(req)},
                {"response", {{"text", resp.text}, {"finish_reason", to_string(resp.finish_reason)}}},
                {"timestamp", utc_timestamp()}};
    write_file_atomic(entry_path(digest), doc.dump(2) + "\n");
}

std::shared_ptr<std::mutex> ResponseCache::lock_for(const std::string& digest) {
    std::lock_guard guard(locks_mu_);
    auto& slot = locks_[digest];
    if (!slot) slot = std::make_shared<std::mutex>();
    return slot;
}

CachingProvider::CachingProvider(std::shared_ptr<ResponseCache> cache, std::shared_ptr<Provider> inner)
    : cache_(std::move(cache)), inner_(std::move(inner)) {
    if (!cache_) throw std::invalid_argument("caching provider needs a cache");
}

CompletionResponse CachingProvider::complete(const CompletionRequest& req) {
    const auto digest = cache_key(req);
    const auto lock = cache_->lock_for(digest);
    std::lock_guard guard(*lock);

    if (auto hit = cache_->load(digest)) {
        ++hits_;
        return *hit;
    }
    ++misses_;
    if (!inner_) {
        throw ProviderError(ProviderError::Kind::ReplayMiss,
                            "no cache entry " + digest + " in " + cache_->dir().string());
    }
    auto resp = inner_->complete(req);
    cache_->store(digest, req, resp);
    return resp;
}

// ---------------------------------------------------------------------------

RetryingProvider::RetryingProvider(std::shared_ptr<Provider> inner, RetryPolicy policy, Sleeper sleeper)
    : inner_(std::move(inner)),
      policy_(policy),
      sleeper_(sleeper ? std::move(sleeper) : Sleeper([](auto d) { std::this_thread::sleep_for(d); })),
      rng_state_(policy.jitter_seed) {
    if (policy_.max_attempts < 1) throw std::invalid_argument("max_attempts must be >= 1");
}

CompletionResponse RetryingProvider::complete(const CompletionRequest& req) {
    for (int attempt = 0;; ++attempt) {
        try {
            return inner_->complete(req);
        } catch (const ProviderError& e) {
            if (!e.retryable() || attempt + 1 >= policy_.max_attempts) throw;
        }
        const auto ceiling = std::min<std::int64_t>(policy_.max_delay.count(),
                                                    policy_.base_delay.count() << std::min(attempt, 30));
        std::uint64_t r;
        {
            // splitmix64
            std::lock_guard guard(rng_mu_);
            std::uint64_t z = (rng_state_ += 0x9e3779b97f4a7c15ULL);
            z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
            z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
            r = z ^ (z >> 31);
        }
        const auto wait = ceiling <= 0 ? 0 : static_cast<std::int64_t>(r % static_cast<std::uint64_t>(ceiling + 1));
        sleeper_(std::chrono::milliseconds(wait));
    }
}

BoundedProvider::BoundedProvider(std::shared_ptr<Provider> inner, int limit)
    : inner_(std::move(inner)), slots_(limit) {
    if (limit < 1 || limit > 1024) throw std::invalid_argument("concurrency limit must be in [1, 1024]");
}

CompletionResponse BoundedProvider::complete(const CompletionRequest& req) {
    slots_.acquire();
    struct Release {
        std::counting_semaphore<1024>& s;
        ~Release() { s.release(); }
    } release{slots_};
    return inner_->complete(req);
}

CompletionResponse CountingProvider::complete(const CompletionRequest& req) {
    ++calls_;
    return inner_->complete(req);
}

std::string api_key_from_env() {
    const char* v = std::getenv("ABCD_API_KEY");
    return v ? std::string(v) : std::string();
}

}  // namespace abcd
