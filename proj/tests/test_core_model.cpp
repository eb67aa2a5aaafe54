#include "abcd/core_model.hpp"

#include <doctest.h>

using namespace abcd;

TEST_CASE("fraction arithmetic stays reduced") {
    CHECK(Fraction(2, 4) == Fraction(1, 2));
    CHECK(Fraction(3, -6) == Fraction(-1, 2));
    CHECK(Fraction(1, 2) + Fraction(1, 3) == Fraction(5, 6));
    CHECK(Fraction(1, 2) - Fraction(1, 2) == Fraction(0, 1));
    CHECK((Fraction(9, 5) / 2) == Fraction(9, 10));
    CHECK(Fraction(2, 5) < Fraction(1, 2));
    CHECK(Fraction(3, 4).to_string() == "3/4");
    CHECK_THROWS_AS(Fraction(1, 0), std::domain_error);
}

TEST_CASE("tag grammar") {
    CHECK(Tag("Play").name() == "play");
    CHECK(Tag("first name").serialized() == "<first name>");
    CHECK(Tag::answer().is_answer());
    CHECK(is_valid_tag_name("book_2-x"));
    CHECK_FALSE(is_valid_tag_name(""));
    CHECK_FALSE(is_valid_tag_name(" play"));
    CHECK_FALSE(is_valid_tag_name("two  spaces"));
    CHECK_FALSE(is_valid_tag_name("a.b"));
    CHECK_THROWS_AS(Tag("x y "), std::invalid_argument);
}

TEST_CASE("question text must be non-blank") {
    Question q{"q1", "  \t", "x"};
    CHECK_THROWS_AS(require_valid(q), std::invalid_argument);
    q.text = "Who?";
    CHECK_NOTHROW(require_valid(q));
}

TEST_CASE("answer assignment invariants") {
    CHECK_THROWS_AS(AnswerAssignment({{Tag("play"), "Macbeth"}}), std::invalid_argument);
    CHECK_THROWS_AS(AnswerAssignment({{Tag::answer(), "   "}}), std::invalid_argument);
    CHECK_THROWS_AS(AnswerAssignment({{Tag::answer(), "a <b> c"}}), std::invalid_argument);
    const AnswerAssignment a({{Tag::answer(), "Iris Murdoch"}, {Tag("play"), "The Sea"}});
    CHECK(a.answer() == "Iris Murdoch");
    REQUIRE(a.find(Tag("play")));
    CHECK(*a.find(Tag("play")) == "The Sea");
    CHECK(a.find(Tag("city")) == nullptr);
}

namespace {

ClaimSet set_of(std::vector<ClaimTemplate> claims) {
    ClaimSet cs;
    cs.question_id = "q";
    cs.tags = collect_tags(claims);
    cs.claims = std::move(claims);
    return cs;
}

}  // namespace

TEST_CASE("validate_claim_set") {
    SUBCASE("well-formed three-claim set") {
        const auto cs = set_of({make_claim(1, "<answer> is an author"),
                                make_claim(2, "<answer> wrote a play named <play>"),
                                make_claim(3, "<play> premiered in London, and <answer> attended")});
        CHECK(validate_claim_set(cs).empty());
    }
    SUBCASE("claim 2 lacking the answer tag") {
        const auto cs = set_of({make_claim(1, "<answer> is an author"), make_claim(2, "<play> premiered in London")});
        const auto v = validate_claim_set(cs);
        REQUIRE(v.size() == 1);
        CHECK(v[0].claim_index == 2);
        CHECK(v[0].rule == "answer_tag");
    }
    SUBCASE("duplicate indices") {
        const auto cs = set_of({make_claim(1, "<answer> is an author"), make_claim(1, "<answer> was born in 1919"),
                                make_claim(2, "<answer> wrote novels")});
        const auto v = validate_claim_set(cs);
        REQUIRE(v.size() == 1);
        CHECK(v[0].rule == "contiguous_indices");
    }
    SUBCASE("empty set") {
        const auto v = validate_claim_set(set_of({}));
        REQUIRE(v.size() == 1);
        CHECK(v[0].rule == "non_empty");
    }
    SUBCASE("entity claim with an extra tag and a stale tag union") {
        auto cs = set_of({make_claim(1, "<answer> wrote <play>"), make_claim(2, "<answer> is Irish")});
        cs.tags = {Tag::answer()};
        const auto v = validate_claim_set(cs);
        REQUIRE(v.size() == 2);
        CHECK(v[0].rule == "entity_type_claim");
        CHECK(v[1].rule == "tag_union");
    }
    SUBCASE("tag list out of sync with text") {
        auto cs = set_of({make_claim(1, "<answer> is an author")});
        cs.claims[0].tags.push_back(Tag("ghost"));
        const auto v = validate_claim_set(cs);
        REQUIRE_FALSE(v.empty());
        CHECK(v[0].rule == "tags_match_text");
    }
}

TEST_CASE("verdict strings") {
    for (auto v : {Verdict::True, Verdict::False, Verdict::NonResponse}) {
        CHECK(verdict_from_string(to_string(v)) == v);
    }
    CHECK_FALSE(verdict_from_string("maybe"));
}

TEST_CASE("dataset strings") {
    for (auto d : {Dataset::triviaqa, Dataset::hotpotqa_easy, Dataset::hotpotqa_medium, Dataset::obscureqa,
                   Dataset::custom}) {
        CHECK(dataset_from_string(to_string(d)) == d);
    }
}
