#include "abcd/dataset_io.hpp"

#include "abcd/fs_util.hpp"
#include "abcd/text_util.hpp"

#include <json.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <set>

namespace abcd {

using nlohmann::json;

namespace {

struct Transliteration {
    char32_t code_point;
    const char* ascii;
};

constexpr Transliteration kTable[] = {
#include "transliteration_table.inc"
};

const char* lookup_ascii(char32_t cp) {
    const auto* it = std::lower_bound(std::begin(kTable), std::end(kTable), cp,
                                      [](const Transliteration& t, char32_t v) { return t.code_point < v; });
    if (it == std::end(kTable) || it->code_point != cp) return nullptr;
    return it->ascii;
}

// Decodes one UTF-8 sequence at s[i]; returns the code point and advances i.
// Invalid sequences yield U+FFFD and advance one byte.
char32_t decode_utf8(std::string_view s, std::size_t& i) {
    const auto b0 = static_cast<unsigned char>(s[i]);
    int len = 0;
    char32_t cp = 0;
    if (b0 < 0x80) {
        ++i;
        return b0;
    } else if ((b0 & 0xE0) == 0xC0) {
        len = 2;
        cp = b0 & 0x1F;
    } else if ((b0 & 0xF0) == 0xE0) {
        len = 3;
        cp = b0 & 0x0F;
    } else if ((b0 & 0xF8) == 0xF0) {
        len = 4;
        cp = b0 & 0x07;
    } else {
        ++i;
        return 0xFFFD;
    }
    if (i + static_cast<std::size_t>(len) > s.size()) {
        ++i;
        return 0xFFFD;
    }
    for (int k = 1; k < len; ++k) {
        const auto b = static_cast<unsigned char>(s[i + k]);
        if ((b & 0xC0) != 0x80) {
            ++i;
            return 0xFFFD;
        }
        cp = (cp << 6) | (b & 0x3F);
    }
    i += static_cast<std::size_t>(len);
    return cp;
}

std::string strip_bracket_spans(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    std::size_t i = 0;
    while (i < s.size()) {
        const char c = s[i];
        char close = '\0';
        if (c == '(') close = ')';
        if (c == '[') close = ']';
        if (c == '<') close = '>';
        if (close != '\0') {
            const auto end = s.find(close, i + 1);
            if (end != std::string_view::npos) {
                out += ' ';
                i = end + 1;
                continue;
            }
        }
        out += c;
        ++i;
    }
    return out;
}

constexpr std::array<std::string_view, 6> kModeratorPrefixes = {
    "note to moderator", "note to the moderator", "note for moderator",
    "moderator note",    "moderator's note",      "moderators note",
};

bool is_moderator_note(std::string_view clue) {
    const auto lower = ascii_lower(trim(clue));
    return std::any_of(kModeratorPrefixes.begin(), kModeratorPrefixes.end(),
                       [&](std::string_view p) { return lower.rfind(p, 0) == 0; });
}

std::optional<std::string> opt_string(const json& j, const char* key) {
    if (auto it = j.find(key); it != j.end() && it->is_string() && !trim(it->get<std::string>()).empty()) {
        return it->get<std::string>();
    }
    return std::nullopt;
}

std::string first_string(const json& j, std::initializer_list<const char*> keys) {
    for (const char* k : keys) {
        if (auto v = opt_string(j, k)) return *v;
    }
    std::string names;
    for (const char* k : keys) names += std::string(names.empty() ? "" : "/") + k;
    throw std::runtime_error("missing field " + names);
}

std::string id_string(const json& j, std::initializer_list<const char*> keys) {
    for (const char* k : keys) {
        if (auto it = j.find(k); it != j.end()) {
            if (it->is_string()) return it->get<std::string>();
            if (it->is_number_integer()) return std::to_string(it->get<std::int64_t>());
        }
    }
    return {};
}

// Returns nullopt for records excluded by a filter.
std::optional<Question> question_from_record(const json& j, QuestionFormat format) {
    if (!j.is_object()) throw std::runtime_error("record is not a JSON object");
    Question q;
    switch (format) {
        case QuestionFormat::triviaqa: {
            q.dataset = Dataset::triviaqa;
            q.id = id_string(j, {"question_id", "QuestionId", "id"});
            q.text = first_string(j, {"question", "Question"});
            const json* ans = nullptr;
            for (const char* k : {"answer", "Answer"}) {
                if (j.contains(k)) ans = &j.at(k);
            }
            if (ans == nullptr) throw std::runtime_error("missing field answer");
            if (ans->is_string()) {
                q.gold_answer = ans->get<std::string>();
            } else {
                q.gold_answer = first_string(*ans, {"value", "Value"});
            }
            break;
        }
        case QuestionFormat::hotpotqa: {
            if (first_string(j, {"type"}) != "bridge") return std::nullopt;
            const auto level = first_string(j, {"level"});
            if (level == "easy") {
                q.dataset = Dataset::hotpotqa_easy;
            } else if (level == "medium") {
                q.dataset = Dataset::hotpotqa_medium;
            } else {
                return std::nullopt;
            }
            q.id = id_string(j, {"_id", "id"});
            q.text = first_string(j, {"question"});
            q.gold_answer = first_string(j, {"answer"});
            break;
        }
        case QuestionFormat::obscureqa: {
            q.dataset = Dataset::obscureqa;
            q.id = id_string(j, {"id"});
            q.text = first_string(j, {"question"});
            q.gold_answer = first_string(j, {"answer"});
            q.category = opt_string(j, "category");
            q.subcategory = opt_string(j, "subcategory");
            break;
        }
        case QuestionFormat::generic: {
            q.id = id_string(j, {"id"});
            q.text = first_string(j, {"text"});
            q.gold_answer = j.value("gold_answer", std::string());
            const auto ds = j.value("dataset", std::string("custom"));
            const auto parsed = dataset_from_string(ds);
            if (!parsed) throw std::runtime_error("unknown dataset '" + ds + "'");
            q.dataset = *parsed;
            q.category = opt_string(j, "category");
            q.subcategory = opt_string(j, "subcategory");
            break;
        }
    }
    if (q.id.empty()) throw std::runtime_error("missing id");
    require_valid(q);
    return q;
}

}  // namespace

std::string transliterate_to_ascii(std::string_view utf8) {
    std::string out;
    out.reserve(utf8.size());
    std::size_t i = 0;
    while (i < utf8.size()) {
        const auto cp = decode_utf8(utf8, i);
        if (cp < 0x80) {
            out += static_cast<char>(cp);
        } else if (const char* ascii = lookup_ascii(cp)) {
            out += ascii;
        }
    }
    return out;
}

std::string clean_text(std::string_view s) {
    return collapse_whitespace(strip_bracket_spans(transliterate_to_ascii(s)));
}

std::optional<std::string> convert_clue_to_question(std::string_view clue) {
    if (is_moderator_note(clue)) return std::nullopt;

    std::string text = trim(clue);
    for (std::size_t pos = 0; (pos = ascii_lower(text).find("this", pos)) != std::string::npos;) {
        const bool left = pos == 0 || !is_word_char(text[pos - 1]);
        const bool right = pos + 4 == text.size() || !is_word_char(text[pos + 4]);
        if (left && right) {
            static constexpr char kLower[] = "what";
            for (std::size_t k = 0; k < 4; ++k) {
                const bool upper = text[pos + k] >= 'A' && text[pos + k] <= 'Z';
                text[pos + k] = upper ? static_cast<char>(kLower[k] - 'a' + 'A') : kLower[k];
            }
        }
        pos += 4;
    }

    while (!text.empty() && (text.back() == '.' || text.back() == ',' || text.back() == ';' ||
                             text.back() == ':' || text.back() == ' ')) {
        text.pop_back();
    }
    if (text.empty()) return std::nullopt;
    if (text.back() != '?') text += '?';
    return text;
}

std::uint64_t SeededShuffler::below(std::uint64_t bound) {
    if (bound == 0) throw std::invalid_argument("bound must be positive");
    // Reject the top partial bucket so every residue is equally likely.
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t r;
    do {
        r = engine_();
    } while (r >= limit);
    return r % bound;
}

std::vector<Question> sample_questions(const std::vector<Question>& qs, std::size_t n, std::uint64_t seed) {
    if (n > qs.size()) {
        throw SampleTooLarge("sample of " + std::to_string(n) + " from " + std::to_string(qs.size()) + " questions");
    }
    auto pool = qs;
    SeededShuffler(seed).shuffle(pool);
    pool.resize(n);
    return pool;
}

void require_valid(const SplitSpec& spec) {
    for (double f : {spec.train, spec.valid, spec.test}) {
        if (!(f > 0.0 && f < 1.0)) throw std::invalid_argument("split fractions must lie in (0,1)");
    }
    if (std::fabs(spec.train + spec.valid + spec.test - 1.0) > 1e-9) {
        throw std::invalid_argument("split fractions must sum to 1");
    }
}

SplitSizes split_sizes(std::size_t n, const SplitSpec& spec) {
    require_valid(spec);
    const std::array<double, 3> fracs = {spec.train, spec.valid, spec.test};
    std::array<std::size_t, 3> sizes{};
    std::array<double, 3> rema{};
    std::size_t assigned = 0;
    for (std::size_t k = 0; k < 3; ++k) {
        const double quota = fracs[k] * static_cast<double>(n);
        // Snap values within rounding noise of an integer (0.7 * 10 = 6.999...).
        const double rounded = std::round(quota);
        const double exact = std::fabs(quota - rounded) < 1e-9 * std::max(1.0, quota) ? rounded : quota;
        sizes[k] = static_cast<std::size_t>(std::floor(exact));
        // Quantized so equal remainders tie exactly and break toward train.
        rema[k] = std::round((exact - std::floor(exact)) * 1e9) / 1e9;
        assigned += sizes[k];
    }
    std::array<std::size_t, 3> order = {0, 1, 2};
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return rema[a] > rema[b]; });
    for (std::size_t k = 0; assigned < n; k = (k + 1) % 3) {
        ++sizes[order[k]];
        ++assigned;
    }
    return {sizes[0], sizes[1], sizes[2]};
}

ObscureQaBuild build_obscureqa(const std::vector<RawQuizbowlRecord>& records, const SplitSpec& split) {
    require_valid(split);
    ObscureQaBuild out;
    std::vector<Question> kept;
    const auto drop = [&](const char* reason) {
        ++out.dropped;
        ++out.drop_reasons[reason];
    };

    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto& rec = records[i];
        if (rec.clues.empty()) {
            drop("no_clues");
            continue;
        }
        const auto question = convert_clue_to_question(clean_text(rec.clues.front()));
        if (!question) {
            drop("not_convertible");
            continue;
        }
        auto answer = clean_text(rec.answer);
        if (answer.empty()) {
            drop("empty_answer");
            continue;
        }
        char id[32];
        std::snprintf(id, sizeof id, "obscureqa-%06zu", i + 1);
        Question q;
        q.id = id;
        q.text = *question;
        q.gold_answer = std::move(answer);
        q.dataset = Dataset::obscureqa;
        if (auto cat = trim(rec.category); !cat.empty()) q.category = cat;
        if (rec.subcategory && !trim(*rec.subcategory).empty()) q.subcategory = trim(*rec.subcategory);
        kept.push_back(std::move(q));
    }

    SeededShuffler(split.seed).shuffle(kept);
    const auto sizes = split_sizes(kept.size(), split);
    auto it = kept.begin();
    out.train.assign(std::make_move_iterator(it), std::make_move_iterator(it + sizes.train));
    it += sizes.train;
    out.valid.assign(std::make_move_iterator(it), std::make_move_iterator(it + sizes.valid));
    it += sizes.valid;
    out.test.assign(std::make_move_iterator(it), std::make_move_iterator(kept.end()));
    return out;
}

std::vector<RawQuizbowlRecord> read_quizbowl_dump(const std::filesystem::path& path) {
    std::vector<RawQuizbowlRecord> records;
    std::size_t line_no = 0;
    for (const auto& line : read_lines(path)) {
        ++line_no;
        if (trim(line).empty()) continue;
        try {
            const auto j = json::parse(line);
            RawQuizbowlRecord rec;
            rec.clues = j.at("clues").get<std::vector<std::string>>();
            if (rec.clues.empty()) throw std::runtime_error("empty clue list");
            rec.answer = j.at("answer").get<std::string>();
            rec.category = j.value("category", std::string());
            rec.subcategory = opt_string(j, "subcategory");
            records.push_back(std::move(rec));
        } catch (const std::exception& e) {
            throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    return records;
}

std::optional<QuestionFormat> question_format_from_string(std::string_view s) {
    if (s == "triviaqa") return QuestionFormat::triviaqa;
    if (s == "hotpotqa") return QuestionFormat::hotpotqa;
    if (s == "obscureqa") return QuestionFormat::obscureqa;
    if (s == "generic") return QuestionFormat::generic;
    return std::nullopt;
}

LoadResult parse_questions(std::string_view text, QuestionFormat format) {
    LoadResult out;
    std::set<std::string> ids;
    std::size_t line_no = 0;
    std::size_t parsed_lines = 0;
    for (const auto& line : split_lines(text)) {
        ++line_no;
        if (trim(line).empty()) continue;
        try {
            auto q = question_from_record(json::parse(line), format);
            ++parsed_lines;
            if (!q) {
                ++out.skipped;
                continue;
            }
            if (!ids.insert(q->id).second) throw std::runtime_error("duplicate id " + q->id);
            out.questions.push_back(std::move(*q));
        } catch (const std::exception& e) {
            out.errors.push_back({line_no, e.what()});
        }
    }
    if (parsed_lines == 0) {
        std::string msg = "no parsable question records";
        if (!out.errors.empty()) msg += " (line " + std::to_string(out.errors.front().line) + ": " +
                                        out.errors.front().message + ")";
        throw std::runtime_error(msg);
    }
    return out;
}

LoadResult load_questions(const std::filesystem::path& path, QuestionFormat format) {
    try {
        return parse_questions(read_file(path), format);
    } catch (const std::runtime_error& e) {
        throw std::runtime_error(path.string() + ": " + e.what());
    }
}

}  // namespace abcd
