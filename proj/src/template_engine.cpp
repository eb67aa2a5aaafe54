#include "abcd/template_engine.hpp"

#include <algorithm>

namespace abcd {

namespace {

std::string describe(InstantiationError::Kind kind, const std::optional<Tag>& tag,
                     const std::optional<std::size_t>& position) {
    std::string msg;
    switch (kind) {
        case InstantiationError::Kind::MissingAssignment: msg = "missing assignment"; break;
        case InstantiationError::Kind::LeftoverTag: msg = "leftover tag after substitution"; break;
        case InstantiationError::Kind::MalformedTag: msg = "malformed tag"; break;
    }
    if (tag) msg += " for " + tag->serialized();
    if (position) msg += " at offset " + std::to_string(*position);
    return msg;
}

std::string substitute(const ClaimTemplate& tmpl, const AnswerAssignment& assignment,
                       const std::string* override_answer) {
    const auto spans = scan_tags(tmpl.text);

    std::vector<Tag> seen;
    for (const auto& s : spans) {
        if (std::find(seen.begin(), seen.end(), s.tag) == seen.end()) seen.push_back(s.tag);
    }
    if (seen != tmpl.tags) {
        throw InstantiationError(InstantiationError::Kind::MalformedTag, std::nullopt, std::nullopt);
    }

    std::string out;
    out.reserve(tmpl.text.size());
    std::size_t cursor = 0;
    for (const auto& s : spans) {
        out.append(tmpl.text, cursor, s.begin - cursor);
        const std::string* value = nullptr;
        if (override_answer != nullptr && s.tag.is_answer()) {
            value = override_answer;
        } else {
            value = assignment.find(s.tag);
        }
        if (value == nullptr) {
            throw InstantiationError(InstantiationError::Kind::MissingAssignment, s.tag, s.begin);
        }
        out += *value;
        cursor = s.end;
    }
    out.append(tmpl.text, cursor, std::string::npos);

    if (auto leftover = scan_tags(out); !leftover.empty()) {
        throw InstantiationError(InstantiationError::Kind::LeftoverTag, leftover.front().tag,
                                 leftover.front().begin);
    }
    return out;
}

}  // namespace

InstantiationError::InstantiationError(Kind kind, std::optional<Tag> tag,
                                       std::optional<std::size_t> position)
    : std::runtime_error(describe(kind, tag, position)),
      kind_(kind),
      tag_(std::move(tag)),
      position_(position) {}

std::vector<TagSpan> scan_tags(std::string_view text) {
    std::vector<TagSpan> spans;
    std::size_t i = 0;
    while (i < text.size()) {
        if (text[i] != '<') {
            ++i;
            continue;
        }
        const auto close = text.find_first_of("<>", i + 1);
        if (close == std::string_view::npos) break;
        if (text[close] == '<') {
            // A nested '<' cannot belong to this span; restart from it.
            i = close;
            continue;
        }
        const auto inner = text.substr(i + 1, close - i - 1);
        if (is_valid_tag_name(inner)) {
            spans.push_back({i, close + 1, Tag(inner)});
            i = close + 1;
        } else {
            ++i;
        }
    }
    return spans;
}

std::vector<Tag> extract_tags(std::string_view text) {
    std::vector<Tag> tags;
    for (auto& s : scan_tags(text)) {
        if (std::find(tags.begin(), tags.end(), s.tag) == tags.end()) tags.push_back(std::move(s.tag));
    }
    return tags;
}

std::string instantiate(const ClaimTemplate& tmpl, const AnswerAssignment& assignment) {
    return substitute(tmpl, assignment, nullptr);
}

std::string instantiate_with_override(const ClaimTemplate& tmpl,
                                      const AnswerAssignment& assignment,
                                      std::string_view override_answer) {
    const std::string value(override_answer);
    return substitute(tmpl, assignment, &value);
}

}  // namespace abcd
