#include "abcd/scoring_stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace abcd {

std::optional<Fraction> score_true(std::span<const Verdict> verdicts) {
    if (verdicts.size() <= 1) return std::nullopt;
    std::int64_t hits = 0;
    for (std::size_t i = 1; i < verdicts.size(); ++i) {
        if (verdicts[i] == Verdict::True) ++hits;
    }
    return Fraction(hits, static_cast<std::int64_t>(verdicts.size() - 1));
}

std::optional<Fraction> score_true(const std::vector<VerificationResult>& results) {
    std::vector<Verdict> verdicts;
    verdicts.reserve(results.size());
    for (const auto& r : results) verdicts.push_back(r.verdict);
    return score_true(std::span<const Verdict>(verdicts));
}

namespace {

struct Moments {
    double n;
    double mean;
    double var;  // sample variance
};

Moments moments(std::span<const double> v) {
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double ss = 0.0;
    double comp = 0.0;
    for (double x : v) {
        ss += (x - mean) * (x - mean);
        comp += x - mean;
    }
    const double n = static_cast<double>(v.size());
    return {n, mean, (ss - comp * comp / n) / (n - 1.0)};
}

// Continued fraction for I_x(a,b), valid for x < (a+1)/(a+b+2).
double beta_continued_fraction(double a, double b, double x) {
    constexpr int kMaxIter = 100000;
    constexpr double kEps = 1e-16;
    constexpr double kTiny = 1e-300;

    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        const double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < kEps) return h;
    }
    throw std::runtime_error("incomplete beta continued fraction did not converge");
}

}  // namespace

double regularized_incomplete_beta(double a, double b, double x) {
    if (!(a > 0.0) || !(b > 0.0)) throw std::domain_error("incomplete beta needs a, b > 0");
    if (x < 0.0 || x > 1.0 || std::isnan(x)) throw std::domain_error("incomplete beta needs 0 <= x <= 1");
    if (x == 0.0) return 0.0;
    if (x == 1.0) return 1.0;
    const double log_front =
        std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
    const double front = std::exp(log_front);
    if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_continued_fraction(a, b, x) / a;
    return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double student_t_two_sided_p(double t, double df) {
    if (!(df > 0.0)) throw std::domain_error("degrees of freedom must be positive");
    if (std::isnan(t)) return std::numeric_limits<double>::quiet_NaN();
    if (t == 0.0) return 1.0;
    if (std::isinf(t)) return 0.0;
    // P(|T| >= |t|) = I_{df/(df+t^2)}(df/2, 1/2); the complementary form keeps
    // precision when x is close to 1.
    const double t2 = t * t;
    if (t2 < df) {
        const double y = t2 / (df + t2);
        return 1.0 - regularized_incomplete_beta(0.5, df / 2.0, y);
    }
    return regularized_incomplete_beta(df / 2.0, 0.5, df / (df + t2));
}

TTestResult t_test(std::span<const double> xs, std::span<const double> ys, TTestKind kind) {
    if (xs.size() < 2 || ys.size() < 2) throw DegenerateInput("t-test needs at least two values per group");
    const auto mx = moments(xs);
    const auto my = moments(ys);
    if (mx.var <= 0.0 && my.var <= 0.0) throw DegenerateInput("t-test with zero variance in both groups");

    TTestResult r;
    const double diff = mx.mean - my.mean;
    if (kind == TTestKind::welch) {
        const double vx = mx.var / mx.n;
        const double vy = my.var / my.n;
        const double se2 = vx + vy;
        r.t_stat = diff / std::sqrt(se2);
        r.degrees_freedom = se2 * se2 / (vx * vx / (mx.n - 1.0) + vy * vy / (my.n - 1.0));
    } else {
        const double df = mx.n + my.n - 2.0;
        const double pooled = ((mx.n - 1.0) * mx.var + (my.n - 1.0) * my.var) / df;
        r.t_stat = diff / std::sqrt(pooled * (1.0 / mx.n + 1.0 / my.n));
        r.degrees_freedom = df;
    }
    r.p_value = student_t_two_sided_p(r.t_stat, r.degrees_freedom);
    return r;
}

GroundTruthCounts ground_truth_comparison(const std::vector<QuestionEvaluation>& records) {
    GroundTruthCounts counts;
    for (const auto& rec : records) {
        if (rec.correct != false || !rec.gt_score_true || !rec.score_true) continue;
        const auto order = *rec.gt_score_true <=> *rec.score_true;
        if (order > 0) {
            ++counts.gt_greater;
        } else if (order == 0) {
            ++counts.gt_equal;
        } else {
            ++counts.gt_less;
        }
    }
    return counts;
}

AggregateReport aggregate(const std::vector<QuestionEvaluation>& records, std::string dataset, TTestKind kind) {
    AggregateReport rep;
    rep.dataset = std::move(dataset);
    rep.n_total = static_cast<std::int64_t>(records.size());

    std::vector<Fraction> correct_scores;
    std::vector<Fraction> incorrect_scores;
    bool any_gt = false;
    for (const auto& rec : records) {
        if (rec.results.empty()) {
            ++rep.n_failed;
            continue;
        }
        if (!rec.correct) {
            ++rep.n_unlabeled;
            continue;
        }
        auto& group = *rec.correct ? correct_scores : incorrect_scores;
        *rec.correct ? ++rep.n_correct : ++rep.n_incorrect;
        if (rec.score_true) group.push_back(*rec.score_true);
        if (!*rec.correct && rec.score_true && rec.gt_score_true) any_gt = true;
    }

    const auto labeled = rep.n_correct + rep.n_incorrect;
    if (labeled > 0) {
        rep.p_correct = Fraction(rep.n_correct, labeled);
        rep.p_incorrect = Fraction(rep.n_incorrect, labeled);
    }

    const auto mean = [](const std::vector<Fraction>& v) -> std::optional<Fraction> {
        if (v.empty()) return std::nullopt;
        Fraction sum;
        for (const auto& f : v) sum = sum + f;
        return sum / static_cast<std::int64_t>(v.size());
    };
    rep.mean_correct = mean(correct_scores);
    rep.mean_incorrect = mean(incorrect_scores);
    if (rep.mean_correct && rep.mean_incorrect) rep.diff = *rep.mean_correct - *rep.mean_incorrect;

    if (correct_scores.size() >= 2 && incorrect_scores.size() >= 2) {
        std::vector<double> xs, ys;
        for (const auto& f : correct_scores) xs.push_back(f.value());
        for (const auto& f : incorrect_scores) ys.push_back(f.value());
        // Sorted so the floating-point sums do not depend on record order.
        std::sort(xs.begin(), xs.end());
        std::sort(ys.begin(), ys.end());
        try {
            const auto tt = t_test(xs, ys, kind);
            rep.t_stat = tt.t_stat;
            rep.degrees_freedom = tt.degrees_freedom;
            rep.p_value = tt.p_value;
        } catch (const DegenerateInput&) {
            // Both groups constant: no test.
        }
    }

    if (any_gt) rep.gt_comparison = ground_truth_comparison(records);
    return rep;
}

}  // namespace abcd
