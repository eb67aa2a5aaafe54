#include "abcd/answer_generator.hpp"

#include "abcd/text_util.hpp"

#include <algorithm>

namespace abcd {

namespace {

std::string describe(AnswerParseError::Kind kind, const std::optional<Tag>& tag) {
    std::string msg = kind == AnswerParseError::Kind::MissingTagAnswer ? "no answer line" : "malformed answer line";
    if (tag) msg += " for " + tag->serialized();
    return msg;
}

std::vector<Tag> answer_first(const std::vector<Tag>& tags) {
    std::vector<Tag> ordered{Tag::answer()};
    for (const auto& t : tags) {
        if (!t.is_answer()) ordered.push_back(t);
    }
    return ordered;
}

std::string slots(const std::vector<Tag>& tags) {
    std::string out;
    for (const auto& t : tags) out += t.serialized() + ":\n";
    return out;
}

std::optional<std::string> find_answer(const std::vector<std::string>& lines, const Tag& tag) {
    const auto key = tag.serialized() + ":";
    for (const auto& line : lines) {
        const auto t = trim(line);
        if (t.size() < key.size() || ascii_lower(std::string_view(t).substr(0, key.size())) != key) continue;
        auto value = clean_answer(std::string_view(t).substr(key.size()));
        if (value.empty() || value.find_first_of("<>") != std::string::npos) continue;
        return value;
    }
    return std::nullopt;
}

}  // namespace

AnswerParseError::AnswerParseError(Kind kind, std::optional<Tag> tag)
    : std::runtime_error(describe(kind, tag)), kind_(kind), tag_(std::move(tag)) {}

std::string build_answer_prompt(const Question& q, const std::vector<Tag>& tags) {
    require_valid(q);
    if (std::none_of(tags.begin(), tags.end(), [](const Tag& t) { return t.is_answer(); })) {
        throw std::invalid_argument("answer prompt needs the answer tag");
    }
    const auto ordered = answer_first(tags);
    std::string prompt =
        "Answer the following question. " + Tag::answer().serialized() +
        " is the answer to the question";
    if (ordered.size() > 1) prompt += "; give a consistent value for each of the other tags as well";
    prompt +=
        ". Reply with exactly one line per tag in the form \"<tag>: value\", in the order shown, "
        "and nothing else.\n\nQuestion: " +
        trim(q.text) + "\n\n" + slots(ordered);
    return prompt;
}

std::string build_conditioned_answer_prompt(const Question& q, std::string_view answer,
                                            const std::vector<Tag>& aux_tags) {
    require_valid(q);
    return "Question: " + trim(q.text) + "\n" + Tag::answer().serialized() + ": " + std::string(answer) +
           "\n\nAssuming this answer, give a value for each tag below. Reply with exactly one line per "
           "tag in the form \"<tag>: value\", in the order shown, and nothing else.\n\n" +
           slots(aux_tags);
}

std::string clean_answer(std::string_view value) {
    auto s = trim(value);
    for (bool changed = true; changed && !s.empty();) {
        changed = false;
        if (s.size() >= 2 && ((s.front() == '"' && s.back() == '"') || (s.front() == '\'' && s.back() == '\''))) {
            s = trim(std::string_view(s).substr(1, s.size() - 2));
            changed = true;
        }
        while (!s.empty() && s.back() == '.') {
            s.pop_back();
            changed = true;
        }
        s = trim(s);
    }
    return s;
}

AnswerAssignment parse_answers(std::string_view raw, const std::vector<Tag>& tags) {
    const auto lines = split_lines(raw);
    AnswerAssignment::Map entries;
    for (const auto& tag : tags) {
        auto value = find_answer(lines, tag);
        if (!value) throw AnswerParseError(AnswerParseError::Kind::MissingTagAnswer, tag);
        entries.emplace(tag, std::move(*value));
    }
    return AnswerAssignment(std::move(entries));
}

AnswerAssignment generate_answers(const Question& q, const ClaimSet& cs, Provider& provider,
                                  const AnswerOptions& opts) {
    auto tags = cs.tags;
    if (std::find(tags.begin(), tags.end(), Tag::answer()) == tags.end()) tags.insert(tags.begin(), Tag::answer());

    if (opts.mode == AnswerMode::joint || tags.size() == 1) {
        const auto prompt = build_answer_prompt(q, tags);
        const auto resp = provider.complete({opts.model, prompt, opts.temperature, opts.max_tokens});
        return parse_answers(resp.text, answer_first(tags));
    }

    const auto first = provider.complete({opts.model, build_answer_prompt(q, {Tag::answer()}),
                                          opts.temperature, opts.max_tokens});
    auto entries = parse_answers(first.text, {Tag::answer()}).entries();

    std::vector<Tag> aux(tags.begin(), tags.end());
    aux.erase(std::remove(aux.begin(), aux.end(), Tag::answer()), aux.end());
    const auto second = provider.complete({opts.model,
                                           build_conditioned_answer_prompt(q, entries.at(Tag::answer()), aux),
                                           opts.temperature, opts.max_tokens});
    auto lines = split_lines(second.text);
    for (const auto& tag : aux) {
        auto value = find_answer(lines, tag);
        if (!value) throw AnswerParseError(AnswerParseError::Kind::MissingTagAnswer, tag);
        entries.emplace(tag, std::move(*value));
    }
    return AnswerAssignment(std::move(entries));
}

}  // namespace abcd
