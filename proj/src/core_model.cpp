#include "abcd/core_model.hpp"

#include "abcd/template_engine.hpp"

#include <algorithm>
#include <cctype>
#include <limits>
#include <numeric>

namespace abcd {

namespace {

using Wide = __int128;

std::int64_t narrow(Wide v) {
    if (v > std::numeric_limits<std::int64_t>::max() || v < std::numeric_limits<std::int64_t>::min()) {
        throw std::overflow_error("fraction overflow");
    }
    return static_cast<std::int64_t>(v);
}

Fraction reduce(Wide num, Wide den) {
    if (den == 0) throw std::domain_error("fraction with zero denominator");
    if (den < 0) {
        num = -num;
        den = -den;
    }
    Wide a = num < 0 ? -num : num;
    Wide b = den;
    while (b != 0) {
        Wide t = a % b;
        a = b;
        b = t;
    }
    if (a > 1) {
        num /= a;
        den /= a;
    }
    return Fraction(narrow(num), narrow(den));
}

bool is_blank(std::string_view s) {
    return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c) != 0; });
}

}  // namespace

Fraction::Fraction(std::int64_t num, std::int64_t den) {
    if (den == 0) throw std::domain_error("fraction with zero denominator");
    if (den < 0) {
        num = -num;
        den = -den;
    }
    const auto g = std::gcd(num, den);
    num_ = g > 1 ? num / g : num;
    den_ = g > 1 ? den / g : den;
}

Fraction operator+(Fraction a, Fraction b) {
    return reduce(Wide(a.num_) * b.den_ + Wide(b.num_) * a.den_, Wide(a.den_) * b.den_);
}

Fraction operator-(Fraction a, Fraction b) {
    return reduce(Wide(a.num_) * b.den_ - Wide(b.num_) * a.den_, Wide(a.den_) * b.den_);
}

Fraction operator/(Fraction a, std::int64_t n) { return reduce(Wide(a.num_), Wide(a.den_) * n); }

std::strong_ordering operator<=>(Fraction a, Fraction b) {
    return Wide(a.num_) * b.den_ <=> Wide(b.num_) * a.den_;
}

std::string Fraction::to_string() const { return std::to_string(num_) + "/" + std::to_string(den_); }

std::string_view to_string(Dataset d) {
    switch (d) {
        case Dataset::triviaqa: return "triviaqa";
        case Dataset::hotpotqa_easy: return "hotpotqa_easy";
        case Dataset::hotpotqa_medium: return "hotpotqa_medium";
        case Dataset::obscureqa: return "obscureqa";
        case Dataset::custom: return "custom";
    }
    return "custom";
}

std::optional<Dataset> dataset_from_string(std::string_view s) {
    for (auto d : {Dataset::triviaqa, Dataset::hotpotqa_easy, Dataset::hotpotqa_medium,
                   Dataset::obscureqa, Dataset::custom}) {
        if (to_string(d) == s) return d;
    }
    return std::nullopt;
}

void require_valid(const Question& q) {
    if (is_blank(q.text)) throw std::invalid_argument("question " + q.id + " has empty text");
}

bool is_valid_tag_name(std::string_view name) {
    if (name.empty() || name.front() == ' ' || name.back() == ' ') return false;
    char prev = '\0';
    for (char c : name) {
        const auto u = static_cast<unsigned char>(c);
        const bool ok = std::isalnum(u) != 0 || c == '_' || c == '-' || (c == ' ' && prev != ' ');
        if (!ok || u >= 0x80) return false;
        prev = c;
    }
    return true;
}

Tag::Tag(std::string_view name) {
    if (!is_valid_tag_name(name)) {
        throw std::invalid_argument("invalid tag name '" + std::string(name) + "'");
    }
    name_.reserve(name.size());
    for (char c : name) name_ += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
}

bool ClaimTemplate::has_answer_tag() const {
    return std::any_of(tags.begin(), tags.end(), [](const Tag& t) { return t.is_answer(); });
}

ClaimTemplate make_claim(int index, std::string text) {
    auto tags = extract_tags(text);
    return ClaimTemplate{index, std::move(text), std::move(tags)};
}

std::vector<Tag> collect_tags(const std::vector<ClaimTemplate>& claims) {
    std::vector<Tag> out;
    for (const auto& c : claims) {
        for (const auto& t : c.tags) {
            if (std::find(out.begin(), out.end(), t) == out.end()) out.push_back(t);
        }
    }
    return out;
}

std::vector<ClaimSetViolation> validate_claim_set(const ClaimSet& cs) {
    std::vector<ClaimSetViolation> found;
    if (cs.claims.empty()) {
        found.push_back({std::nullopt, "non_empty", "claim set has no claims"});
        return found;
    }

    bool contiguous = true;
    for (std::size_t i = 0; i < cs.claims.size(); ++i) {
        if (cs.claims[i].index != static_cast<int>(i) + 1) contiguous = false;
    }
    if (!contiguous) {
        found.push_back({std::nullopt, "contiguous_indices", "claim indices are not 1..n"});
    }

    for (std::size_t i = 0; i < cs.claims.size(); ++i) {
        const auto& c = cs.claims[i];
        const int idx = c.index;
        if (extract_tags(c.text) != c.tags) {
            found.push_back({idx, "tags_match_text", "tag list differs from tags in text"});
        }
        if (!c.has_answer_tag()) {
            found.push_back({idx, "answer_tag", "claim does not mention " + Tag::answer().serialized()});
        }
        if (i == 0 && !(c.tags.size() == 1 && c.tags.front().is_answer())) {
            found.push_back({idx, "entity_type_claim", "first claim must mention only the answer tag"});
        }
    }

    if (collect_tags(cs.claims) != cs.tags) {
        found.push_back({std::nullopt, "tag_union", "claim set tags differ from union of claim tags"});
    }
    return found;
}

AnswerAssignment::AnswerAssignment(Map entries) : entries_(std::move(entries)) {
    if (entries_.find(Tag::answer()) == entries_.end()) {
        throw std::invalid_argument("assignment lacks the answer tag");
    }
    for (const auto& [tag, value] : entries_) {
        if (is_blank(value)) throw std::invalid_argument("blank answer for " + tag.serialized());
        if (value.find_first_of("<>") != std::string::npos) {
            throw std::invalid_argument("answer for " + tag.serialized() + " contains angle brackets");
        }
    }
}

const std::string* AnswerAssignment::find(const Tag& t) const {
    auto it = entries_.find(t);
    return it == entries_.end() ? nullptr : &it->second;
}

const std::string& AnswerAssignment::answer() const {
    auto it = entries_.find(Tag::answer());
    if (it == entries_.end()) throw std::logic_error("assignment is empty");
    return it->second;
}

std::string_view to_string(Verdict v) {
    switch (v) {
        case Verdict::True: return "true";
        case Verdict::False: return "false";
        case Verdict::NonResponse: return "non_response";
    }
    return "non_response";
}

std::optional<Verdict> verdict_from_string(std::string_view s) {
    if (s == "true") return Verdict::True;
    if (s == "false") return Verdict::False;
    if (s == "non_response") return Verdict::NonResponse;
    return std::nullopt;
}

}  // namespace abcd
