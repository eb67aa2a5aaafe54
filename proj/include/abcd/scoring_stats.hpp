#pragma once

#include "abcd/core_model.hpp"

#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace abcd {

/// Share of claims 2..n judged True; the entity-type claim at index 1 is
/// skipped. False and NonResponse count in the denominator only. Absent for
/// n <= 1.
std::optional<Fraction> score_true(std::span<const Verdict> verdicts);

std::optional<Fraction> score_true(const std::vector<VerificationResult>& results);

class DegenerateInput : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct TTestResult {
    double t_stat = 0.0;
    double degrees_freedom = 0.0;
    double p_value = 1.0;  // two-sided
};

enum class TTestKind {
    welch,   // unequal variances, Welch-Satterthwaite df
    pooled   // Student, pooled variance
};

/// Two-sample t-test of mean(xs) - mean(ys) = 0. Throws DegenerateInput when
/// a group has fewer than two values or both variances are zero.
TTestResult t_test(std::span<const double> xs, std::span<const double> ys, TTestKind kind = TTestKind::welch);

inline TTestResult welch_t_test(std::span<const double> xs, std::span<const double> ys) {
    return t_test(xs, ys, TTestKind::welch);
}

/// I_x(a, b) by continued fraction (modified Lentz).
double regularized_incomplete_beta(double a, double b, double x);

/// P(|T| >= |t|) for Student's t with `df` degrees of freedom.
double student_t_two_sided_p(double t, double df);

/// Counts of gt_score_true >, =, < score_true over records labeled incorrect
/// that carry both scores.
GroundTruthCounts ground_truth_comparison(const std::vector<QuestionEvaluation>& records);

/// Correct-vs-incorrect summary over the labeled, completed records.
AggregateReport aggregate(const std::vector<QuestionEvaluation>& records, std::string dataset,
                          TTestKind kind = TTestKind::welch);

}  // namespace abcd
