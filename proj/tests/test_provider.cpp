#include "abcd/provider.hpp"

#include "abcd/fs_util.hpp"
#include "test_support.hpp"

#include <doctest.h>
#include <json.hpp>

// Must match the library build of the same header.
#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include <thread>

using namespace abcd;
using Kind = ProviderError::Kind;

namespace {

CompletionRequest req(std::string prompt, std::string model = "m") {
    return {std::move(model), std::move(prompt), 0.0, 64};
}

Kind error_kind(Provider& p, const CompletionRequest& r) {
    try {
        p.complete(r);
    } catch (const ProviderError& e) {
        return e.kind();
    }
    FAIL("expected ProviderError");
    return Kind::Other;
}

/// Fails with `kind` for the first `failures` calls, then answers "ok".
class Flaky final : public Provider {
public:
    Flaky(int failures, Kind kind) : failures_(failures), kind_(kind) {}
    CompletionResponse complete(const CompletionRequest&) override {
        if (calls++ < failures_) throw ProviderError(kind_, "flaky");
        return {"ok", FinishReason::stop};
    }
    int calls = 0;

private:
    int failures_;
    Kind kind_;
};

}  // namespace

TEST_CASE("error kinds") {
    CHECK(ProviderError(Kind::RateLimited, "").retryable());
    CHECK(ProviderError(Kind::Network, "").retryable());
    CHECK_FALSE(ProviderError(Kind::Auth, "").retryable());
    CHECK_FALSE(ProviderError(Kind::ReplayMiss, "").retryable());
    CHECK(std::string(ProviderError(Kind::Auth, "bad key").what()).find("bad key") != std::string::npos);
}

TEST_CASE("scripted provider") {
    ScriptedProvider p({{ScriptRule::Match::substring, "True or False", "True"},
                        {ScriptRule::Match::substring, "born on", "False"},
                        {ScriptRule::Match::exact, "exact prompt", "exact reply"}});
    CHECK(p.complete(req("True or False: X was born on Y")).text == "True");
    CHECK(p.complete(req("X was born on Y")).text == "False");
    CHECK(p.complete(req("exact prompt")).text == "exact reply");
    CHECK(error_kind(p, req("exact prompt ")) == Kind::Other);
    CHECK_THROWS_AS(ScriptedProvider({}), std::invalid_argument);
}

TEST_CASE("script rules load from JSON") {
    testing::TempDir dir;
    write_file_atomic(dir / "rules.json",
                      R"([{"match": "exact", "pattern": "a", "response": "A"}, {"pattern": "b", "response": "B"}])");
    const auto rules = load_script_rules(dir / "rules.json");
    REQUIRE(rules.size() == 2);
    CHECK(rules[0].match == ScriptRule::Match::exact);
    CHECK(rules[1].match == ScriptRule::Match::substring);
}

TEST_CASE("cache key is a stable SHA-256 of the canonical encoding") {
    CHECK(cache_key(req("True or False: x")) == "79f93b787aa1dd1522997afa1c934e2d0105052bb4bb9d42376c9f3a2f66b105");
    CHECK(cache_key({"verify-model", "p", 0.7, 256}) ==
          "6fae691b2306a23ba48ea0c4563319a37a729e311cb6d12b45bc239671078ef2");
    CHECK(cache_key({"m", "p", -0.0, 64}) == cache_key({"m", "p", 0.0, 64}));
    // Length prefixes keep field boundaries unambiguous.
    CHECK(cache_key({"ab", "c", 0.0, 64}) != cache_key({"a", "bc", 0.0, 64}));
    CHECK(cache_key({"m", "p", 0.0, 64}) != cache_key({"m", "p", 0.0, 65}));
}

TEST_CASE("caching provider records then replays") {
    testing::TempDir dir;
    auto cache = std::make_shared<ResponseCache>(dir.path());
    auto backend = std::make_shared<CountingProvider>(
        std::make_shared<ScriptedProvider>(std::vector<ScriptRule>{{ScriptRule::Match::substring, "", "True"}}));
    CachingProvider caching(cache, backend);

    const auto first = caching.complete(req("True or False: a"));
    const auto second = caching.complete(req("True or False: a"));
    CHECK(first == second);
    CHECK(backend->calls() == 1);
    CHECK(caching.hits() == 1);
    CHECK(caching.misses() == 1);

    const auto digest = cache_key(req("True or False: a"));
    const auto entry = nlohmann::json::parse(read_file(cache->entry_path(digest)));
    CHECK(entry.at("request").at("prompt") == "True or False: a");
    CHECK(entry.at("response").at("text") == "True");
    CHECK(entry.contains("timestamp"));

    CachingProvider replay(std::make_shared<ResponseCache>(dir.path()), nullptr);
    CHECK(replay.complete(req("True or False: a")) == first);
    try {
        replay.complete(req("True or False: unseen"));
        FAIL("expected ReplayMiss");
    } catch (const ProviderError& e) {
        CHECK(e.kind() == Kind::ReplayMiss);
        CHECK(e.detail().find(cache_key(req("True or False: unseen"))) != std::string::npos);
    }
}

TEST_CASE("concurrent identical misses reach the backend once") {
    testing::TempDir dir;
    auto backend = std::make_shared<CountingProvider>(
        std::make_shared<ScriptedProvider>(std::vector<ScriptRule>{{ScriptRule::Match::substring, "", "x"}}));
    CachingProvider caching(std::make_shared<ResponseCache>(dir.path()), backend);
    std::vector<std::jthread> threads;
    for (int i = 0; i < 8; ++i) threads.emplace_back([&] { caching.complete(req("same")); });
    threads.clear();
    CHECK(backend->calls() == 1);
    CHECK(std::distance(std::filesystem::directory_iterator(dir.path()), {}) == 1);
}

TEST_CASE("retrying provider") {
    std::vector<std::chrono::milliseconds> waits;
    const auto sleeper = [&](std::chrono::milliseconds d) { waits.push_back(d); };
    RetryPolicy policy;
    policy.max_attempts = 5;
    policy.base_delay = std::chrono::milliseconds(100);
    policy.max_delay = std::chrono::milliseconds(250);

    SUBCASE("recovers from transient failures") {
        auto flaky = std::make_shared<Flaky>(3, Kind::RateLimited);
        RetryingProvider p(flaky, policy, sleeper);
        CHECK(p.complete(req("x")).text == "ok");
        CHECK(flaky->calls == 4);
        REQUIRE(waits.size() == 3);
        const long caps[] = {100, 200, 250};
        for (int i = 0; i < 3; ++i) {
            CHECK(waits[i].count() >= 0);
            CHECK(waits[i].count() <= caps[i]);
        }
    }
    SUBCASE("gives up after the attempt limit") {
        auto flaky = std::make_shared<Flaky>(10, Kind::Network);
        RetryingProvider p(flaky, policy, sleeper);
        CHECK(error_kind(p, req("x")) == Kind::Network);
        CHECK(flaky->calls == 5);
        CHECK(waits.size() == 4);
    }
    SUBCASE("does not retry permanent errors") {
        auto flaky = std::make_shared<Flaky>(10, Kind::Auth);
        RetryingProvider p(flaky, policy, sleeper);
        CHECK(error_kind(p, req("x")) == Kind::Auth);
        CHECK(flaky->calls == 1);
        CHECK(waits.empty());
    }
}

TEST_CASE("bounded provider limits in-flight calls") {
    struct Slow final : Provider {
        std::atomic<int> in_flight{0};
        std::atomic<int> peak{0};
        CompletionResponse complete(const CompletionRequest&) override {
            const int now = ++in_flight;
            int p = peak.load();
            while (now > p && !peak.compare_exchange_weak(p, now)) {}
            std::this_thread::sleep_for(std::chrono::milliseconds(5));
            --in_flight;
            return {"ok", FinishReason::stop};
        }
    };
    auto slow = std::make_shared<Slow>();
    BoundedProvider bounded(slow, 2);
    {
        std::vector<std::jthread> threads;
        for (int i = 0; i < 8; ++i) threads.emplace_back([&] { bounded.complete(req("x")); });
    }
    CHECK(slow->peak.load() <= 2);
    CHECK(slow->peak.load() >= 1);
}

TEST_CASE("http provider wire format and error mapping") {
    httplib::Server server;
    nlohmann::json last_body;
    std::string last_auth;
    std::mutex mu;
    server.Post("/v1/chat/completions", [&](const httplib::Request& rq, httplib::Response& rs) {
        const auto body = nlohmann::json::parse(rq.body);
        {
            std::lock_guard lock(mu);
            last_body = body;
            last_auth = rq.get_header_value("Authorization");
        }
        const auto prompt = body["messages"][0]["content"].get<std::string>();
        if (prompt == "rate") {
            rs.status = 429;
        } else if (prompt == "auth") {
            rs.status = 401;
        } else if (prompt == "boom") {
            rs.status = 503;
        } else if (prompt == "teapot") {
            rs.status = 418;
        } else if (prompt == "filter") {
            rs.set_content(R"({"choices":[{"message":{"content":null},"finish_reason":"content_filter"}]})",
                           "application/json");
        } else if (prompt == "garbage") {
            rs.set_content("not json", "text/plain");
        } else {
            rs.set_content(R"({"choices":[{"message":{"role":"assistant","content":"True"},"finish_reason":"length"}]})",
                           "application/json");
        }
    });
    const int port = server.bind_to_any_port("127.0.0.1");
    std::jthread serve([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    HttpProvider p({"http://127.0.0.1:" + std::to_string(port) + "/v1/", "sk-test", std::chrono::seconds(5)});
    const auto resp = p.complete({"verify-model", "True or False: x", 0.0, 64});
    CHECK(resp.text == "True");
    CHECK(resp.finish_reason == FinishReason::length);
    {
        std::lock_guard lock(mu);
        CHECK(last_auth == "Bearer sk-test");
        CHECK(last_body["model"] == "verify-model");
        CHECK(last_body["max_tokens"] == 64);
        CHECK(last_body["temperature"] == 0.0);
        CHECK(last_body["messages"].size() == 1);
        CHECK(last_body["messages"][0]["role"] == "user");
        CHECK(last_body["messages"][0]["content"] == "True or False: x");
    }

    CHECK(error_kind(p, req("rate")) == Kind::RateLimited);
    CHECK(error_kind(p, req("auth")) == Kind::Auth);
    CHECK(error_kind(p, req("boom")) == Kind::Network);
    CHECK(error_kind(p, req("teapot")) == Kind::Other);
    CHECK(error_kind(p, req("filter")) == Kind::Filtered);
    CHECK(error_kind(p, req("garbage")) == Kind::Other);
    server.stop();

    HttpProvider dead({"http://127.0.0.1:" + std::to_string(port) + "/v1", "", std::chrono::seconds(1)});
    CHECK(error_kind(dead, req("x")) == Kind::Network);
    CHECK_THROWS_AS(HttpProvider({"no-scheme", "", std::chrono::seconds(1)}), std::invalid_argument);
}
