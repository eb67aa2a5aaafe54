#include "abcd/template_engine.hpp"

#include "template_gen.hpp"

#include <doctest.h>

using namespace abcd;

namespace {

std::vector<std::string> names(const std::vector<Tag>& tags) {
    std::vector<std::string> out;
    for (const auto& t : tags) out.push_back(t.name());
    return out;
}

AnswerAssignment assign(std::initializer_list<std::pair<const char*, const char*>> kv) {
    AnswerAssignment::Map m;
    for (const auto& [k, v] : kv) m.emplace(Tag(k), v);
    return AnswerAssignment(m);
}

}  // namespace

TEST_CASE("extract_tags examples") {
    CHECK(names(extract_tags("<answer> is an author")) == std::vector<std::string>{"answer"});
    CHECK(names(extract_tags("<answer> wrote a play named <play>, and <play> premiered")) ==
          std::vector<std::string>{"answer", "play"});
    CHECK(extract_tags("x < y and y > z").empty());
}

TEST_CASE("extract_tags edge cases") {
    CHECK(names(extract_tags("<<answer>>")) == std::vector<std::string>{"answer"});
    CHECK(names(extract_tags("a <b c> d <B C>")) == std::vector<std::string>{"b c"});
    CHECK(extract_tags("<a.b> <> < a>").empty());
    const auto spans = scan_tags("x <play> y");
    REQUIRE(spans.size() == 1);
    CHECK(spans[0].begin == 2);
    CHECK(spans[0].end == 8);
}

TEST_CASE("instantiate examples") {
    CHECK(instantiate(make_claim(1, "<answer> is an author"), assign({{"answer", "Philip K. Dick"}})) ==
          "Philip K. Dick is an author");
    CHECK(instantiate(make_claim(1, "no tags at all"), AnswerAssignment{}) == "no tags at all");

    try {
        instantiate(make_claim(1, "<answer> wrote <play>"), assign({{"answer", "A"}}));
        FAIL("expected MissingAssignment");
    } catch (const InstantiationError& e) {
        CHECK(e.kind() == InstantiationError::Kind::MissingAssignment);
        REQUIRE(e.tag());
        CHECK(e.tag()->name() == "play");
    }
}

TEST_CASE("instantiate replaces every occurrence in one pass") {
    const auto a = assign({{"answer", "Ben Jonson"}, {"play", "Volpone"}});
    CHECK(instantiate(make_claim(2, "<answer> wrote <play>; <play> is by <answer>"), a) ==
          "Ben Jonson wrote Volpone; Volpone is by Ben Jonson");
    // Brackets that are not tags pass through untouched.
    CHECK(instantiate(make_claim(2, "<answer> scored 3 < 4"), a) == "Ben Jonson scored 3 < 4");
}

TEST_CASE("instantiate rejects malformed templates") {
    ClaimTemplate t{1, "<answer> wrote <play>", {Tag::answer()}};
    try {
        instantiate(t, assign({{"answer", "A"}, {"play", "P"}}));
        FAIL("expected MalformedTag");
    } catch (const InstantiationError& e) {
        CHECK(e.kind() == InstantiationError::Kind::MalformedTag);
    }
}

TEST_CASE("instantiate detects tags formed across the substitution boundary") {
    // "<" + "x" + ">" only appears once the answers are spliced in.
    const auto t = make_claim(1, "<answer> and <play>");
    try {
        instantiate(make_claim(1, "<<answer>>"), assign({{"answer", "x"}}));
        FAIL("expected LeftoverTag");
    } catch (const InstantiationError& e) {
        CHECK(e.kind() == InstantiationError::Kind::LeftoverTag);
        REQUIRE(e.position());
        CHECK(*e.position() == 0);
    }
    CHECK(instantiate(t, assign({{"answer", "a"}, {"play", "b"}})) == "a and b");
}

TEST_CASE("instantiate_with_override") {
    const auto x = assign({{"answer", "X"}});
    const auto t = make_claim(1, "<answer> is an author");
    CHECK(instantiate_with_override(t, x, "Iris Murdoch") == "Iris Murdoch is an author");
    CHECK(instantiate_with_override(t, x, "X") == instantiate(t, x));
    const auto no_answer = make_claim(2, "<play> premiered in London");
    const auto xp = assign({{"answer", "X"}, {"play", "Hamlet"}});
    CHECK(instantiate_with_override(no_answer, xp, "anything") == instantiate(no_answer, xp));
}

TEST_CASE("round trip and totality over random templates") {
    std::mt19937_64 rng(20240611);
    for (int i = 0; i < 1000; ++i) {
        const auto c = testgen::random_case(rng);
        CHECK(extract_tags(c.text) == c.inserted);
        const auto tmpl = make_claim(1, c.text);
        const auto out = instantiate(tmpl, c.assignment);
        CHECK(scan_tags(out).empty());
        CHECK(out == testgen::expected_instantiation(c));
        CHECK(instantiate(tmpl, c.assignment) == out);
    }
}
