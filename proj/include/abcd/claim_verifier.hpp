#pragma once

#include "abcd/core_model.hpp"
#include "abcd/provider.hpp"

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace abcd {

/// Exact prefix of every verification prompt (15 bytes).
inline constexpr std::string_view kVerifyPrefix = "True or False: ";
inline constexpr int kVerifyMaxTokens = 64;

struct VerdictParseConfig {
    enum class MatchMode {
        substring,     // keyword anywhere in the lowercased response
        word_boundary  // keyword must stand as a whole word
    };
    MatchMode match_mode = MatchMode::substring;
    /// "false" followed by a restatement of the claim counts as true.
    bool restatement_override = true;
};

/// Lowercase, collapse whitespace, trim, and strip trailing punctuation.
std::string normalize_for_verdict(std::string_view s);

/// Maps a verification response to a verdict:
///   1. restatement: response says "false" but contains the claim -> True
///   2. "true" present -> True
///   3. "false" present -> False
///   4. otherwise NonResponse
Verdict parse_verdict(std::string_view raw, std::string_view claim_text, const VerdictParseConfig& cfg = {});

struct VerifyOptions {
    std::string model = "verify-model";
    double temperature = 0.0;
    int max_tokens = kVerifyMaxTokens;
    VerdictParseConfig parse;
    /// Map provider failures to NonResponse instead of propagating them.
    bool lenient = false;
    /// Verify the claims of one question on parallel threads.
    bool parallel = false;
};

std::string build_verification_prompt(std::string_view claim);

VerificationResult verify_claim(std::string_view instantiated_text, Provider& provider,
                                const VerifyOptions& opts = {});

/// Failure while verifying one claim of a set.
class ClaimVerificationError : public std::runtime_error {
public:
    ClaimVerificationError(int claim_index, const std::string& what,
                           std::optional<ProviderError::Kind> provider_kind = std::nullopt)
        : std::runtime_error("claim " + std::to_string(claim_index) + ": " + what),
          claim_index_(claim_index),
          provider_kind_(provider_kind) {}

    int claim_index() const { return claim_index_; }
    /// Set when the cause was a ProviderError.
    const std::optional<ProviderError::Kind>& provider_kind() const { return provider_kind_; }

private:
    int claim_index_;
    std::optional<ProviderError::Kind> provider_kind_;
};

/// One independent verification per claim, in claim order. With
/// `override_answer`, the answer tag is filled with it instead of the
/// generated answer.
std::vector<VerificationResult> verify_all(const ClaimSet& cs, const AnswerAssignment& assignment,
                                           Provider& provider, const VerifyOptions& opts = {},
                                           const std::optional<std::string>& override_answer = std::nullopt);

std::string build_baseline_prompt(const Question& q, std::string_view answer);

struct BaselineResult {
    Verdict verdict;
    std::string raw_response;
};

/// Whole-question self-check; keyword rules only, no restatement override.
BaselineResult baseline_whole_question(const Question& q, std::string_view answer, Provider& provider,
                                       const VerifyOptions& opts = {});

}  // namespace abcd
