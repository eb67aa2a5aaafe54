#include "abcd/scoring_stats.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <algorithm>
#include <random>

using namespace abcd;

namespace {

std::vector<Verdict> decode(unsigned code, int n) {
    std::vector<Verdict> v;
    for (int i = 0; i < n; ++i, code /= 3) v.push_back(static_cast<Verdict>(code % 3));
    return v;
}

QuestionEvaluation rec(const std::string& id, std::optional<Fraction> score, std::optional<bool> correct,
                       std::optional<Fraction> gt = std::nullopt) {
    QuestionEvaluation e;
    e.question = {id, "q " + id + "?", "a"};
    e.results = {VerificationResult{1, "x", Verdict::True, "True"}};
    e.score_true = score;
    e.correct = correct;
    e.gt_score_true = gt;
    return e;
}

}  // namespace

TEST_CASE("score_true examples") {
    using V = Verdict;
    const std::vector<V> five{V::True, V::True, V::True, V::False, V::NonResponse};
    CHECK(score_true(five) == Fraction(1, 2));
    const std::vector<V> four(4, V::True);
    CHECK(score_true(four) == Fraction(1, 1));
    const std::vector<V> one{V::False};
    CHECK_FALSE(score_true(one));
    CHECK_FALSE(score_true(std::vector<V>{}));
}

TEST_CASE("score_true matches the direct count for every verdict vector up to n=6") {
    for (int n = 1; n <= 6; ++n) {
        unsigned total = 1;
        for (int i = 0; i < n; ++i) total *= 3;
        for (unsigned code = 0; code < total; ++code) {
            const auto v = decode(code, n);
            const auto [num, den] = oracle::true_share(v);
            const auto got = score_true(v);
            if (den == 0) {
                CHECK_FALSE(got);
                continue;
            }
            REQUIRE(got);
            CHECK(*got == Fraction(num, den));
        }
    }
}

TEST_CASE("flipping a non-first verdict to True adds exactly 1/(n-1)") {
    for (int n = 2; n <= 6; ++n) {
        for (unsigned code = 0; code < 729; ++code) {
            auto v = decode(code, n);
            for (int i = 1; i < n; ++i) {
                if (v[i] == Verdict::True) continue;
                auto w = v;
                w[i] = Verdict::True;
                CHECK(*score_true(w) - *score_true(v) == Fraction(1, n - 1));
            }
        }
    }
}

TEST_CASE("welch hand example") {
    const std::vector<double> xs{1, 2, 3, 4, 5}, ys{2, 3, 4, 5, 6};
    const auto r = welch_t_test(xs, ys);
    CHECK(r.t_stat == doctest::Approx(-1.0).epsilon(1e-15));
    CHECK(r.degrees_freedom == doctest::Approx(8.0).epsilon(1e-15));
    const double ref = oracle::two_sided_p_by_quadrature(-1.0, 8.0);
    CHECK(std::abs(ref - 0.3466) < 1e-4);
    // scipy.stats.t.sf(1, 8) * 2
    CHECK(std::abs(ref - 0.34659350708733416) < 1e-12);
    CHECK(std::abs(r.p_value - ref) < 1e-9);
}

TEST_CASE("welch agrees with numeric integration on random fixtures") {
    std::mt19937_64 rng(7);
    for (int k = 0; k < 20; ++k) {
        std::uniform_int_distribution<int> size(2, 40);
        std::normal_distribution<double> a(std::uniform_real_distribution<double>(-1, 1)(rng), 1.0 + k % 3);
        std::normal_distribution<double> b(std::uniform_real_distribution<double>(-1, 1)(rng), 0.5 + k % 4);
        std::vector<double> xs(size(rng)), ys(size(rng));
        for (auto& x : xs) x = a(rng);
        for (auto& y : ys) y = b(rng);
        const auto got = welch_t_test(xs, ys);
        const auto ref = oracle::welch(xs, ys);
        CHECK(std::abs(got.t_stat - ref.t) < 1e-9);
        CHECK(std::abs(got.degrees_freedom - ref.df) < 1e-9 * std::max(1.0, ref.df));
        CHECK(std::abs(got.p_value - ref.p) < 1e-9);
    }
}

TEST_CASE("welch symmetry and degenerate input") {
    const std::vector<double> xs{0.2, 0.9, 0.4, 1.0}, ys{0.1, 0.3, 0.5};
    const auto r = welch_t_test(xs, xs);
    CHECK(r.t_stat == 0.0);
    CHECK(r.p_value == 1.0);

    const auto ab = welch_t_test(xs, ys);
    const auto ba = welch_t_test(ys, xs);
    CHECK(ab.t_stat == -ba.t_stat);
    CHECK(ab.p_value == ba.p_value);
    CHECK(ab.degrees_freedom == ba.degrees_freedom);

    const std::vector<double> one{1.0}, flat{0.5, 0.5};
    CHECK_THROWS_AS(welch_t_test(one, ys), DegenerateInput);
    CHECK_THROWS_AS(welch_t_test(flat, flat), DegenerateInput);
    // One constant group is fine.
    CHECK_NOTHROW(welch_t_test(flat, ys));
}

TEST_CASE("pooled t-test") {
    const std::vector<double> xs{1, 2, 3, 4, 5}, ys{2, 3, 4, 5, 6, 9};
    const auto r = t_test(xs, ys, TTestKind::pooled);
    CHECK(r.degrees_freedom == 9.0);
    const double sp2 = (4 * 2.5 + 5 * oracle::sample_var(ys)) / 9.0;
    const double t = (3.0 - oracle::mean(ys)) / std::sqrt(sp2 * (1.0 / 5 + 1.0 / 6));
    CHECK(r.t_stat == doctest::Approx(t).epsilon(1e-12));
    CHECK(std::abs(r.p_value - oracle::two_sided_p_by_quadrature(t, 9.0)) < 1e-9);
}

TEST_CASE("incomplete beta edge values") {
    CHECK(regularized_incomplete_beta(2, 3, 0) == 0.0);
    CHECK(regularized_incomplete_beta(2, 3, 1) == 1.0);
    // I_x(1, 1) = x and I_x(a, 1) = x^a.
    CHECK(regularized_incomplete_beta(1, 1, 0.37) == doctest::Approx(0.37).epsilon(1e-14));
    CHECK(regularized_incomplete_beta(3, 1, 0.5) == doctest::Approx(0.125).epsilon(1e-14));
    CHECK(student_t_two_sided_p(0.0, 5.0) == 1.0);
}

TEST_CASE("aggregate example") {
    const std::vector<QuestionEvaluation> rs{rec("a", Fraction(1, 1), true), rec("b", Fraction(4, 5), true),
                                             rec("c", Fraction(1, 2), false), rec("d", Fraction(3, 10), false)};
    const auto r = aggregate(rs, "toy");
    CHECK(r.mean_correct == Fraction(9, 10));
    CHECK(r.mean_incorrect == Fraction(2, 5));
    CHECK(r.diff == Fraction(1, 2));
    CHECK(r.p_correct == Fraction(1, 2));
    CHECK(r.p_incorrect == Fraction(1, 2));
    REQUIRE(r.p_value);
    const auto ref = oracle::welch({1.0, 0.8}, {0.5, 0.3});
    CHECK(std::abs(*r.p_value - ref.p) < 1e-9);
    CHECK_FALSE(r.gt_comparison);
}

TEST_CASE("aggregate group handling") {
    SUBCASE("all correct") {
        const auto r = aggregate({rec("a", Fraction(1, 1), true), rec("b", Fraction(1, 2), true)}, "d");
        CHECK(r.mean_correct == Fraction(3, 4));
        CHECK_FALSE(r.mean_incorrect);
        CHECK_FALSE(r.diff);
        CHECK_FALSE(r.p_value);
        CHECK(r.p_correct == Fraction(1, 1));
    }
    SUBCASE("unlabeled and failed records are excluded") {
        auto failed = rec("f", std::nullopt, true);
        failed.results.clear();
        const auto r = aggregate({rec("a", Fraction(1, 1), std::nullopt), failed}, "d");
        CHECK(r.n_total == 2);
        CHECK(r.n_unlabeled == 1);
        CHECK(r.n_failed == 1);
        CHECK_FALSE(r.p_correct);
        CHECK_FALSE(r.mean_correct);
    }
    SUBCASE("permutation invariance") {
        std::vector<QuestionEvaluation> rs;
        std::mt19937_64 rng(3);
        for (int i = 0; i < 15; ++i) {
            rs.push_back(rec(std::to_string(i), Fraction(static_cast<std::int64_t>(rng() % 6), 5), rng() % 3 != 0,
                             Fraction(static_cast<std::int64_t>(rng() % 4), 3)));
        }
        const auto base = aggregate(rs, "d");
        for (int k = 0; k < 10; ++k) {
            std::shuffle(rs.begin(), rs.end(), rng);
            CHECK(aggregate(rs, "d") == base);
        }
    }
}

TEST_CASE("ground-truth comparison") {
    CHECK(ground_truth_comparison({rec("a", Fraction(2, 5), false, Fraction(3, 5))}) == GroundTruthCounts{1, 0, 0});
    CHECK(ground_truth_comparison({rec("a", Fraction(1, 2), false, Fraction(2, 4))}) == GroundTruthCounts{0, 1, 0});
    const std::vector<QuestionEvaluation> mixed{
        rec("a", Fraction(2, 3), false, Fraction(1, 3)),
        rec("b", Fraction(1, 3), true, Fraction(2, 3)),   // correct: ignored
        rec("c", Fraction(1, 3), false),                   // no gt score: ignored
        rec("d", Fraction(1, 3), std::nullopt, Fraction(2, 3)),
    };
    const auto g = ground_truth_comparison(mixed);
    CHECK(g == GroundTruthCounts{0, 0, 1});
    CHECK(aggregate(mixed, "d").gt_comparison == g);
}
