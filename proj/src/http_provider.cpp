#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include "abcd/provider.hpp"

#include <json.hpp>

namespace abcd {

using nlohmann::json;

HttpProvider::HttpProvider(HttpProviderConfig cfg) : cfg_(std::move(cfg)) {
    const auto scheme_end = cfg_.base_url.find("://");
    if (scheme_end == std::string::npos) {
        throw std::invalid_argument("base URL needs a scheme: " + cfg_.base_url);
    }
    const auto path_begin = cfg_.base_url.find('/', scheme_end + 3);
    origin_ = cfg_.base_url.substr(0, path_begin);
    path_prefix_ = path_begin == std::string::npos ? "" : cfg_.base_url.substr(path_begin);
    while (!path_prefix_.empty() && path_prefix_.back() == '/') path_prefix_.pop_back();
}

CompletionResponse HttpProvider::complete(const CompletionRequest& req) {
    if (req.model.empty()) throw std::invalid_argument("completion request without a model");
    if (req.max_tokens < 1) throw std::invalid_argument("max_tokens must be >= 1");

    httplib::Client client(origin_);
    client.set_connection_timeout(cfg_.timeout);
    client.set_read_timeout(cfg_.timeout);
    client.set_write_timeout(cfg_.timeout);

    httplib::Headers headers;
    if (!cfg_.api_key.empty()) headers.emplace("Authorization", "Bearer " + cfg_.api_key);

    const json body = {{"model", req.model},
                       {"messages", json::array({{{"role", "user"}, {"content", req.prompt}}})},
                       {"temperature", req.temperature},
                       {"max_tokens", req.max_tokens}};

    auto res = client.Post(path_prefix_ + "/chat/completions", headers, body.dump(), "application/json");
    if (!res) {
        throw ProviderError(ProviderError::Kind::Network, "request failed: " + httplib::to_string(res.error()));
    }

    const int status = res->status;
    if (status == 429) throw ProviderError(ProviderError::Kind::RateLimited, res->body);
    if (status == 401 || status == 403) throw ProviderError(ProviderError::Kind::Auth, res->body);
    if (status >= 500) {
        throw ProviderError(ProviderError::Kind::Network, "HTTP " + std::to_string(status) + ": " + res->body);
    }
    if (status != 200) {
        throw ProviderError(ProviderError::Kind::Other, "HTTP " + std::to_string(status) + ": " + res->body);
    }

    json doc;
    try {
        doc = json::parse(res->body);
        const auto& choice = doc.at("choices").at(0);
        CompletionResponse out;
        const auto& content = choice.at("message").at("content");
        out.text = content.is_null() ? std::string() : content.get<std::string>();
        const auto reason = choice.value("finish_reason", json("stop"));
        out.finish_reason = reason.is_string() ? finish_reason_from_string(reason.get<std::string>())
                                               : FinishReason::other;
        if (out.finish_reason == FinishReason::filtered && out.text.empty()) {
            throw ProviderError(ProviderError::Kind::Filtered, "response withheld by content filter");
        }
        return out;
    } catch (const json::exception& e) {
        throw ProviderError(ProviderError::Kind::Other, std::string("malformed response: ") + e.what());
    }
}

}  // namespace abcd
