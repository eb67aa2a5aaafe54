#pragma once

#include "abcd/core_model.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace abcd {

// ---------------------------------------------------------------------------
// Text cleaning
// ---------------------------------------------------------------------------

/// Closest-ASCII transliteration of UTF-8 text. Characters without a mapping
/// and invalid byte sequences are dropped.
std::string transliterate_to_ascii(std::string_view utf8);

/// Transliterates, deletes (), [] and <> spans including the brackets
/// (minimal, non-nested, left to right), collapses whitespace, and trims.
std::string clean_text(std::string_view s);

/// Rewrites a cleaned Quizbowl clue as a question: standalone "this" becomes
/// "what" (first-letter case kept) and a '?' terminates the text. Absent for
/// moderator notes.
std::optional<std::string> convert_clue_to_question(std::string_view clue);

// ---------------------------------------------------------------------------
// Deterministic sampling
// ---------------------------------------------------------------------------

/// Seeded shuffles and samples on std::mt19937_64 with rejection-sampled
/// bounded integers, so results match across platforms and standard libraries.
class SeededShuffler {
public:
    explicit SeededShuffler(std::uint64_t seed) : engine_(seed) {}

    /// Uniform integer in [0, bound).
    std::uint64_t below(std::uint64_t bound);

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            const auto j = static_cast<std::size_t>(below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::mt19937_64 engine_;
};

class SampleTooLarge : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Uniform sample without replacement, in shuffled order.
std::vector<Question> sample_questions(const std::vector<Question>& qs, std::size_t n, std::uint64_t seed);

// ---------------------------------------------------------------------------
// ObscureQA construction
// ---------------------------------------------------------------------------

struct RawQuizbowlRecord {
    std::vector<std::string> clues;  // most obscure first
    std::string answer;
    std::string category;
    std::optional<std::string> subcategory;
};

struct SplitSpec {
    double train = 0.70;
    double valid = 0.10;
    double test = 0.20;
    std::uint64_t seed = 0;
};

/// Throws std::invalid_argument when a fraction is outside (0,1) or the sum
/// differs from 1 by more than 1e-9.
void require_valid(const SplitSpec& spec);

struct SplitSizes {
    std::size_t train = 0;
    std::size_t valid = 0;
    std::size_t test = 0;

    friend bool operator==(const SplitSizes&, const SplitSizes&) = default;
};

/// Largest-remainder apportionment of n items; ties go to train, then valid.
SplitSizes split_sizes(std::size_t n, const SplitSpec& spec);

struct ObscureQaBuild {
    std::vector<Question> train;
    std::vector<Question> valid;
    std::vector<Question> test;
    std::size_t dropped = 0;
    std::map<std::string, std::size_t> drop_reasons;
};

ObscureQaBuild build_obscureqa(const std::vector<RawQuizbowlRecord>& records, const SplitSpec& split);

/// Reads line-delimited {clues, answer, category, subcategory} records.
std::vector<RawQuizbowlRecord> read_quizbowl_dump(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Question files
// ---------------------------------------------------------------------------

enum class QuestionFormat { triviaqa, hotpotqa, obscureqa, generic };

std::optional<QuestionFormat> question_format_from_string(std::string_view s);

struct LineError {
    std::size_t line = 0;
    std::string message;
};

struct LoadResult {
    std::vector<Question> questions;
    std::vector<LineError> errors;
    std::size_t skipped = 0;  // well-formed records excluded by a filter
};

/// Loads a line-delimited question file. Bad lines are collected in
/// `errors`; throws std::runtime_error only when no line parses.
LoadResult load_questions(const std::filesystem::path& path, QuestionFormat format);

/// Same, over in-memory text.
LoadResult parse_questions(std::string_view text, QuestionFormat format);

}  // namespace abcd
