#pragma once

#include "abcd/core_model.hpp"
#include "abcd/provider.hpp"

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace abcd {

class AnswerParseError : public std::runtime_error {
public:
    enum class Kind { MissingTagAnswer, MalformedLine };

    AnswerParseError(Kind kind, std::optional<Tag> tag);

    Kind kind() const { return kind_; }
    const std::optional<Tag>& tag() const { return tag_; }

private:
    Kind kind_;
    std::optional<Tag> tag_;
};

/// Zero-shot prompt asking for one "<tag>: value" line per tag, answer tag
/// first. Throws std::invalid_argument when `tags` lacks the answer tag.
std::string build_answer_prompt(const Question& q, const std::vector<Tag>& tags);

/// Prompt for the auxiliary tags once the answer is fixed.
std::string build_conditioned_answer_prompt(const Question& q, std::string_view answer,
                                            const std::vector<Tag>& aux_tags);

/// For each tag, the first line starting with "<tag>:" supplies the answer.
/// Lines that match nothing, or whose value is empty or contains angle
/// brackets, are skipped.
AnswerAssignment parse_answers(std::string_view raw, const std::vector<Tag>& tags);

/// Trims whitespace, surrounding quotes, and terminal periods.
std::string clean_answer(std::string_view value);

enum class AnswerMode {
    joint,       // all tags in one completion
    conditioned  // answer tag first, then the auxiliary tags given that answer
};

struct AnswerOptions {
    std::string model = "answer-model";
    double temperature = 0.0;
    int max_tokens = 256;
    AnswerMode mode = AnswerMode::joint;
};

AnswerAssignment generate_answers(const Question& q, const ClaimSet& cs, Provider& provider,
                                  const AnswerOptions& opts = {});

}  // namespace abcd
