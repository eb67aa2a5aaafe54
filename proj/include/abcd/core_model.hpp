#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace abcd {

// ---------------------------------------------------------------------------
// Exact fractions
// ---------------------------------------------------------------------------

/// Reduced fraction with a positive denominator. Scores and proportions are
/// ratios of small counts, so they are kept exact and only rendered as
/// doubles at the edges.
class Fraction {
public:
    Fraction() = default;
    Fraction(std::int64_t num, std::int64_t den);

    static Fraction whole(std::int64_t n) { return {n, 1}; }

    std::int64_t num() const { return num_; }
    std::int64_t den() const { return den_; }
    double value() const { return static_cast<double>(num_) / static_cast<double>(den_); }

    friend Fraction operator+(Fraction a, Fraction b);
    friend Fraction operator-(Fraction a, Fraction b);
    friend Fraction operator/(Fraction a, std::int64_t n);
    friend bool operator==(Fraction a, Fraction b) = default;
    friend std::strong_ordering operator<=>(Fraction a, Fraction b);

    std::string to_string() const;

private:
    std::int64_t num_ = 0;
    std::int64_t den_ = 1;
};

// ---------------------------------------------------------------------------
// Questions
// ---------------------------------------------------------------------------

enum class Dataset { triviaqa, hotpotqa_easy, hotpotqa_medium, obscureqa, custom };

std::string_view to_string(Dataset d);
std::optional<Dataset> dataset_from_string(std::string_view s);

struct Question {
    std::string id;
    std::string text;
    std::string gold_answer;
    Dataset dataset = Dataset::custom;
    std::optional<std::string> category;
    std::optional<std::string> subcategory;

    friend bool operator==(const Question&, const Question&) = default;
};

/// Throws std::invalid_argument when the text is blank.
void require_valid(const Question& q);

// ---------------------------------------------------------------------------
// Tags and claims
// ---------------------------------------------------------------------------

/// Placeholder name inside a claim template. Names are lowercase; the
/// serialized form wraps the name in angle brackets.
class Tag {
public:
    /// Lowercases `name`; throws std::invalid_argument when the name falls
    /// outside the tag grammar.
    explicit Tag(std::string_view name);

    static Tag answer() { return Tag("answer"); }

    const std::string& name() const { return name_; }
    std::string serialized() const { return "<" + name_ + ">"; }
    bool is_answer() const { return name_ == kAnswerName; }

    friend auto operator<=>(const Tag&, const Tag&) = default;

    static constexpr std::string_view kAnswerName = "answer";

private:
    std::string name_;
};

/// True when `name` is a legal tag name: letters, digits, '_', '-', and single
/// internal spaces.
bool is_valid_tag_name(std::string_view name);

struct ClaimTemplate {
    int index = 0;  // 1-based
    std::string text;
    std::vector<Tag> tags;  // first-occurrence order

    bool has_answer_tag() const;

    friend bool operator==(const ClaimTemplate&, const ClaimTemplate&) = default;
};

/// Builds a template whose tag list is extracted from `text`.
ClaimTemplate make_claim(int index, std::string text);

struct ClaimSet {
    std::string question_id;
    std::optional<std::string> entity_reasoning;
    std::vector<ClaimTemplate> claims;
    std::vector<Tag> tags;  // union over claims, first-occurrence order

    friend bool operator==(const ClaimSet&, const ClaimSet&) = default;
};

/// Recomputes the tag union from the claims.
std::vector<Tag> collect_tags(const std::vector<ClaimTemplate>& claims);

struct ClaimSetViolation {
    std::optional<int> claim_index;
    std::string rule;
    std::string detail;

    friend bool operator==(const ClaimSetViolation&, const ClaimSetViolation&) = default;
};

std::vector<ClaimSetViolation> validate_claim_set(const ClaimSet& cs);

// ---------------------------------------------------------------------------
// Answers and verdicts
// ---------------------------------------------------------------------------

/// Tag -> answer string. Always holds the answer tag; answers are non-blank
/// and free of angle brackets.
class AnswerAssignment {
public:
    using Map = std::map<Tag, std::string>;

    /// Throws std::invalid_argument on a violated invariant.
    explicit AnswerAssignment(Map entries);
    AnswerAssignment() = default;

    const Map& entries() const { return entries_; }
    bool empty() const { return entries_.empty(); }
    const std::string* find(const Tag& t) const;
    const std::string& answer() const;

    friend bool operator==(const AnswerAssignment&, const AnswerAssignment&) = default;

private:
    Map entries_;
};

enum class Verdict { True, False, NonResponse };

std::string_view to_string(Verdict v);
std::optional<Verdict> verdict_from_string(std::string_view s);

struct VerificationResult {
    int claim_index = 0;
    std::string instantiated_text;
    Verdict verdict = Verdict::NonResponse;
    std::string raw_response;

    friend bool operator==(const VerificationResult&, const VerificationResult&) = default;
};

struct QuestionEvaluation {
    Question question;
    ClaimSet claim_set;
    AnswerAssignment assignment;  // empty until the answer stage ran
    std::vector<VerificationResult> results;
    std::vector<VerificationResult> gt_results;  // ground-truth mode only
    std::optional<Fraction> score_true;
    std::optional<bool> correct;
    std::optional<std::string> error_category;
    std::optional<Fraction> gt_score_true;

    friend bool operator==(const QuestionEvaluation&, const QuestionEvaluation&) = default;
};

struct GroundTruthCounts {
    std::int64_t gt_greater = 0;
    std::int64_t gt_equal = 0;
    std::int64_t gt_less = 0;

    friend bool operator==(const GroundTruthCounts&, const GroundTruthCounts&) = default;
};

struct AggregateReport {
    std::string dataset;
    std::int64_t n_total = 0;
    std::int64_t n_correct = 0;
    std::int64_t n_incorrect = 0;
    std::int64_t n_unlabeled = 0;
    std::int64_t n_failed = 0;
    std::optional<Fraction> mean_correct;
    std::optional<Fraction> mean_incorrect;
    std::optional<Fraction> diff;
    std::optional<double> t_stat;
    std::optional<double> degrees_freedom;
    std::optional<double> p_value;
    std::optional<Fraction> p_correct;
    std::optional<Fraction> p_incorrect;
    std::optional<GroundTruthCounts> gt_comparison;

    friend bool operator==(const AggregateReport&, const AggregateReport&) = default;
};

}  // namespace abcd
