#pragma once

#include "abcd/core_model.hpp"

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace abcd {

class InstantiationError : public std::runtime_error {
public:
    enum class Kind { MissingAssignment, LeftoverTag, MalformedTag };

    InstantiationError(Kind kind, std::optional<Tag> tag, std::optional<std::size_t> position);

    Kind kind() const { return kind_; }
    const std::optional<Tag>& tag() const { return tag_; }
    const std::optional<std::size_t>& position() const { return position_; }

private:
    Kind kind_;
    std::optional<Tag> tag_;
    std::optional<std::size_t> position_;
};

/// One serialized tag occurrence in a string.
struct TagSpan {
    std::size_t begin = 0;  // offset of '<'
    std::size_t end = 0;    // one past '>'
    Tag tag;
};

/// Every tag occurrence in `text`, left to right. Angle-bracket spans whose
/// contents fall outside the tag grammar are skipped.
std::vector<TagSpan> scan_tags(std::string_view text);

/// Distinct tags in first-occurrence order.
std::vector<Tag> extract_tags(std::string_view text);

/// Replaces every tag in the template with its answer in a single pass.
std::string instantiate(const ClaimTemplate& tmpl, const AnswerAssignment& assignment);

/// Same as instantiate(), except the answer tag is filled with `override_answer`.
std::string instantiate_with_override(const ClaimTemplate& tmpl,
                                      const AnswerAssignment& assignment,
                                      std::string_view override_answer);

}  // namespace abcd
