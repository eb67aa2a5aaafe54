#include "abcd/claim_verifier.hpp"

#include "abcd/template_engine.hpp"
#include "abcd/text_util.hpp"

#include <future>

namespace abcd {

namespace {

bool is_terminal_punct(char c) {
    switch (c) {
        case '.': case '!': case '?': case ',': case ';': case ':': return true;
        default: return false;
    }
}

bool has_keyword(std::string_view normalized, std::string_view keyword, VerdictParseConfig::MatchMode mode) {
    if (mode == VerdictParseConfig::MatchMode::substring) {
        return normalized.find(keyword) != std::string_view::npos;
    }
    return contains_word(normalized, keyword);
}

VerificationResult verify_one(int index, const std::string& text, Provider& provider, const VerifyOptions& opts) {
    try {
        auto r = verify_claim(text, provider, opts);
        r.claim_index = index;
        return r;
    } catch (const ProviderError& e) {
        throw ClaimVerificationError(index, e.what(), e.kind());
    } catch (const std::exception& e) {
        throw ClaimVerificationError(index, e.what());
    }
}

}  // namespace

std::string normalize_for_verdict(std::string_view s) {
    auto out = collapse_whitespace(ascii_lower(s));
    while (!out.empty() && is_terminal_punct(out.back())) out.pop_back();
    return trim(out);
}

Verdict parse_verdict(std::string_view raw, std::string_view claim_text, const VerdictParseConfig& cfg) {
    const auto response = normalize_for_verdict(raw);
    const bool says_true = has_keyword(response, "true", cfg.match_mode);
    const bool says_false = has_keyword(response, "false", cfg.match_mode);

    if (cfg.restatement_override && says_false) {
        const auto claim = normalize_for_verdict(claim_text);
        if (!claim.empty() && response.find(claim) != std::string::npos) return Verdict::True;
    }
    if (says_true) return Verdict::True;
    if (says_false) return Verdict::False;
    return Verdict::NonResponse;
}

std::string build_verification_prompt(std::string_view claim) {
    std::string prompt(kVerifyPrefix);
    prompt.append(claim);
    return prompt;
}

VerificationResult verify_claim(std::string_view instantiated_text, Provider& provider, const VerifyOptions& opts) {
    if (!scan_tags(instantiated_text).empty()) {
        throw std::invalid_argument("claim still contains tags: " + std::string(instantiated_text));
    }
    VerificationResult result;
    result.instantiated_text = std::string(instantiated_text);
    try {
        const auto resp = provider.complete(
            {opts.model, build_verification_prompt(instantiated_text), opts.temperature, opts.max_tokens});
        result.raw_response = resp.text;
        result.verdict = parse_verdict(resp.text, instantiated_text, opts.parse);
    } catch (const ProviderError&) {
        if (!opts.lenient) throw;
        result.verdict = Verdict::NonResponse;
    }
    return result;
}

std::vector<VerificationResult> verify_all(const ClaimSet& cs, const AnswerAssignment& assignment,
                                           Provider& provider, const VerifyOptions& opts,
                                           const std::optional<std::string>& override_answer) {
    std::vector<std::string> texts;
    texts.reserve(cs.claims.size());
    for (const auto& claim : cs.claims) {
        try {
            texts.push_back(override_answer ? instantiate_with_override(claim, assignment, *override_answer)
                                            : instantiate(claim, assignment));
        } catch (const std::exception& e) {
            throw ClaimVerificationError(claim.index, e.what());
        }
    }

    std::vector<VerificationResult> results;
    results.reserve(texts.size());
    if (!opts.parallel) {
        for (std::size_t i = 0; i < texts.size(); ++i) {
            results.push_back(verify_one(cs.claims[i].index, texts[i], provider, opts));
        }
        return results;
    }

    std::vector<std::future<VerificationResult>> pending;
    pending.reserve(texts.size());
    for (std::size_t i = 0; i < texts.size(); ++i) {
        pending.push_back(std::async(std::launch::async, verify_one, cs.claims[i].index, std::cref(texts[i]),
                                     std::ref(provider), std::cref(opts)));
    }
    // Drain every future before rethrowing so no task outlives `texts`.
    std::exception_ptr first_error;
    for (auto& f : pending) {
        try {
            results.push_back(f.get());
        } catch (...) {
            if (!first_error) first_error = std::current_exception();
        }
    }
    if (first_error) std::rethrow_exception(first_error);
    return results;
}

std::string build_baseline_prompt(const Question& q, std::string_view answer) {
    auto text = trim(q.text);
    while (!text.empty() && text.back() == '?') text.pop_back();
    return "Here is the question: " + trim(text) + "? Is the answer " + std::string(answer) + " correct?";
}

BaselineResult baseline_whole_question(const Question& q, std::string_view answer, Provider& provider,
                                       const VerifyOptions& opts) {
    const auto resp =
        provider.complete({opts.model, build_baseline_prompt(q, answer), opts.temperature, opts.max_tokens});
    auto cfg = opts.parse;
    cfg.restatement_override = false;
    return {parse_verdict(resp.text, "", cfg), resp.text};
}

}  // namespace abcd
