#include "e2e_support.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cstdlib>

using namespace abcd;
using namespace abcd::testing;

TEST_CASE("evaluate on the scripted fixture") {
    TempDir dir;
    std::ostringstream log;
    const auto cfg = fixture_config(dir.path());
    CHECK(cmd_evaluate(cfg, log) == exit_code::partial);

    const auto exp = expected_values();
    const auto r = read_report(dir.path());
    CHECK(r.n_total == exp["n_total"]);
    CHECK(r.n_failed == exp["n_failed"]);
    CHECK(r.n_unlabeled == exp["n_unlabeled"]);
    CHECK(r.n_correct == exp["n_correct"]);
    CHECK(r.n_incorrect == exp["n_incorrect"]);
    CHECK(r.mean_correct == frac(exp["mean_correct"]));
    CHECK(r.mean_incorrect == frac(exp["mean_incorrect"]));
    CHECK(r.diff == frac(exp["diff"]));
    CHECK(r.p_correct == frac(exp["p_correct"]));
    CHECK(r.p_incorrect == frac(exp["p_incorrect"]));
    REQUIRE(r.gt_comparison);
    CHECK(*r.gt_comparison == GroundTruthCounts{exp["gt_comparison"][0].get<std::int64_t>(),
                                                exp["gt_comparison"][1].get<std::int64_t>(),
                                                exp["gt_comparison"][2].get<std::int64_t>()});
    REQUIRE(r.p_value);
    const auto ref = oracle::welch(exp["correct_scores"].get<std::vector<double>>(),
                                   exp["incorrect_scores"].get<std::vector<double>>());
    CHECK(std::abs(*r.p_value - ref.p) < 1e-9);

    const auto records = read_evaluations(dir / "evaluations.jsonl");
    REQUIRE(records.size() == 12);
    for (const auto& rec : records) {
        const auto& want = exp["score_true"];
        if (!want.contains(rec.question.id)) continue;
        if (want[rec.question.id].is_null()) {
            CHECK_FALSE(rec.score_true);
        } else {
            CHECK(rec.score_true == frac(want[rec.question.id]));
        }
        CHECK(rec.results.size() == rec.claim_set.claims.size());
    }
    CHECK(records.back().question.id == "q12");
    CHECK(records.back().results.empty());

    const auto manifest = nlohmann::json::parse(read_file(dir / "manifest.json"));
    CHECK(manifest["questions"].size() == 12);
    CHECK(manifest["questions"][11]["status"] == "failed");
    CHECK(manifest["questions"][11]["stage"] == "decompose");
    CHECK(manifest["provider_calls"]["decompose"]["provider_calls"] == 12);
    CHECK(manifest["provider_calls"]["answer"]["provider_calls"] == 11);
    CHECK(manifest["config"]["provider_mode"] == "scripted");

    const auto table = read_file(dir / "report.txt");
    CHECK(table.find("GT>Pred") != std::string::npos);
    CHECK(table.find(format_number(frac(exp["diff"]).value())) != std::string::npos);
}

TEST_CASE("missing labels leave every record unlabeled") {
    TempDir dir;
    std::ostringstream log;
    auto cfg = fixture_config(dir.path());
    cfg.labels_path = dir / "absent.jsonl";
    CHECK(cmd_evaluate(cfg, log) == exit_code::partial);
    const auto r = read_report(dir.path());
    CHECK(r.n_unlabeled == 11);
    CHECK_FALSE(r.mean_correct);
    CHECK_FALSE(r.p_value);
    CHECK_FALSE(r.p_correct);
    CHECK_FALSE(r.gt_comparison);
}

TEST_CASE("staged commands reproduce the one-shot run") {
    TempDir dir;
    std::ostringstream log;
    auto cfg = fixture_config(dir / "full");
    REQUIRE(cmd_evaluate(cfg, log) == exit_code::partial);

    CHECK(cmd_decompose(cfg, dir / "1.jsonl", log) == exit_code::partial);
    CHECK(cmd_answer(cfg, {dir / "1.jsonl", dir / "2.jsonl"}, log) == exit_code::partial);
    CHECK(cmd_verify(cfg, {dir / "2.jsonl", dir / "3.jsonl"}, log) == exit_code::partial);
    CHECK(cmd_score(cfg, {dir / "3.jsonl", dir / "4.jsonl"}, log) == exit_code::partial);
    CHECK(read_evaluations(dir / "4.jsonl") == read_evaluations(dir / "full" / "evaluations.jsonl"));

    const auto m = nlohmann::json::parse(read_file(dir / "2.jsonl.manifest.json"));
    CHECK(m["questions"][11]["stage"] == "answer");
    // Answering never decomposes again.
    CHECK(m["provider_calls"]["decompose"]["requests"] == 0);

    CHECK(cmd_report({dir / "4.jsonl", dir / "full" / "evaluations.jsonl"}, dir / "rep", TTestKind::welch, log) ==
          exit_code::ok);
    auto reports = nlohmann::json::parse(read_file(dir / "rep" / "report.json"));
    REQUIRE(reports.size() == 2);
    CHECK(reports[0]["dataset"] == "4");
    CHECK(reports[1]["dataset"] == "evaluations");
    reports[0].erase("dataset");
    reports[1].erase("dataset");
    CHECK(reports[0] == reports[1]);
}

TEST_CASE("report command") {
    TempDir dir;
    std::ostringstream log;
    CHECK(cmd_report({}, dir.path(), TTestKind::welch, log) == exit_code::usage);
    write_file_atomic(dir / "empty.jsonl", "");
    CHECK(cmd_report({dir / "empty.jsonl"}, dir.path(), TTestKind::welch, log) == exit_code::failure);

    AggregateReport a;
    a.dataset = "triviaqa";
    a.mean_correct = Fraction(887, 1000);
    a.mean_incorrect = Fraction(581, 1000);
    a.diff = Fraction(306, 1000);
    a.p_value = 1.0 / 3.0;
    a.p_correct = Fraction(3, 4);
    a.p_incorrect = Fraction(1, 4);
    const auto table = render_report_table({a});
    CHECK(table.find("0.887") != std::string::npos);
    CHECK(table.find("0.306") != std::string::npos);
    CHECK(table.find("0.333333333333") != std::string::npos);
    CHECK(table.find("GT>Pred") == std::string::npos);
    CHECK(format_number(0.5) == "0.5");
    CHECK(format_number(1.0) == "1");
}

TEST_CASE("annotate") {
    TempDir dir;
    std::vector<QuestionEvaluation> recs(3);
    for (int i = 0; i < 3; ++i) {
        recs[i].question = {"a" + std::to_string(i), "Q" + std::to_string(i) + "?", "gold"};
        recs[i].assignment = AnswerAssignment({{Tag::answer(), "pred" + std::to_string(i)}});
    }
    const auto labels = dir / "labels.jsonl";

    std::istringstream in("c\ni\ns\n");
    std::ostringstream out;
    const auto s = annotate(recs, labels, in, out);
    CHECK(s.labeled == 2);
    CHECK(s.skipped == 1);
    CHECK(out.str().find("pred1") != std::string::npos);
    auto got = read_labels(labels);
    REQUIRE(got.size() == 2);
    CHECK(got[0].correct);
    CHECK_FALSE(got[1].correct);

    const auto before = read_file(labels);
    std::istringstream again("q\n");
    std::ostringstream out2;
    annotate({recs[0], recs[1]}, labels, again, out2);
    CHECK(read_file(labels) == before);
    CHECK(out2.str().empty());

    std::istringstream tense("what\ni   tense\n");
    std::ostringstream out3;
    CHECK(annotate(recs, labels, tense, out3).labeled == 1);
    got = read_labels(labels);
    REQUIRE(got.size() == 3);
    CHECK(got[2].question_id == "a2");
    CHECK(got[2].error_category == "tense");
    CHECK(out3.str().find("unrecognized") != std::string::npos);

    std::vector<QuestionEvaluation> bare(1);
    bare[0].question = {"b", "Q?", "g"};
    std::istringstream eof("");
    std::ostringstream out4;
    annotate(bare, dir / "other.jsonl", eof, out4);
    CHECK(out4.str().find("(none)") != std::string::npos);
    CHECK_FALSE(std::filesystem::exists(dir / "other.jsonl"));
}

TEST_CASE("baseline") {
    TempDir dir;
    std::ostringstream log;
    auto cfg = fixture_config(dir / "run");
    REQUIRE(cmd_evaluate(cfg, log) == exit_code::partial);

    write_file_atomic(dir / "false.json", R"([{"match": "substring", "pattern": "Here is the question", "response": "False"}])");
    cfg.script_path = dir / "false.json";
    CHECK(cmd_baseline(cfg, {dir / "run" / "evaluations.jsonl", dir / "b.jsonl"}, log) == exit_code::ok);
    const auto lines = read_lines(dir / "b.jsonl");
    CHECK(lines.size() == 11);
    for (const auto& line : lines) {
        const auto j = nlohmann::json::parse(line);
        CHECK(j["baseline_verdict"] == "false");
    }
    const auto m = nlohmann::json::parse(read_file(dir / "b.jsonl.manifest.json"));
    CHECK(m["questions"][11]["notes"][0] == "skipped: no generated answer");
}

TEST_CASE("build-obscureqa command") {
    TempDir dir;
    std::ostringstream log;
    CHECK(cmd_build_obscureqa(fixture("quizbowl/dump.jsonl"), {0.7, 0.1, 0.2, 1}, dir.path(), log) == exit_code::ok);
    CHECK(read_lines(dir / "train.jsonl").size() == 7);
    CHECK(read_lines(dir / "valid.jsonl").size() == 1);
    CHECK(read_lines(dir / "test.jsonl").size() == 2);
    const auto stats = nlohmann::json::parse(read_file(dir / "stats.json"));
    CHECK(stats["kept"] == 10);
    CHECK(stats["categories"]["Geography"] == 3);

    const auto loaded = load_questions(dir / "train.jsonl", QuestionFormat::obscureqa);
    CHECK(loaded.questions.size() == 7);
    CHECK(loaded.errors.empty());

    CHECK(cmd_build_obscureqa(fixture("quizbowl/moderator_only.jsonl"), {}, dir / "x", log) == exit_code::failure);
}

TEST_CASE("config validation") {
    TempDir dir;
    auto cfg = fixture_config(dir.path());
    CHECK_NOTHROW(validate(cfg, true));

    auto bad = cfg;
    bad.dataset_path = dir / "nope.jsonl";
    CHECK_THROWS_AS(validate(bad, true), ConfigError);
    bad = cfg;
    bad.concurrency = 0;
    CHECK_THROWS_AS(validate(bad, true), ConfigError);
    bad = cfg;
    bad.provider_mode = ProviderMode::replay;
    CHECK_THROWS_AS(validate(bad, true), ConfigError);  // no cache dir
    bad.cache_dir = dir / "cache";
    CHECK_NOTHROW(validate(bad, true));

    ::unsetenv("ABCD_API_KEY");
    bad = cfg;
    bad.provider_mode = ProviderMode::live;
    CHECK_THROWS_AS(validate(bad, true), ConfigError);
    ::setenv("ABCD_API_KEY", "sk-test", 1);
    CHECK_NOTHROW(validate(bad, true));
    ::unsetenv("ABCD_API_KEY");
}

TEST_CASE("limit samples deterministically") {
    TempDir dir;
    std::ostringstream log;
    auto cfg = fixture_config(dir / "a");
    cfg.limit = 5;
    cfg.seed = 3;
    cmd_evaluate(cfg, log);
    cfg.output_dir = dir / "b";
    cmd_evaluate(cfg, log);
    const auto a = read_evaluations(dir / "a" / "evaluations.jsonl");
    CHECK(a.size() == 5);
    CHECK(a == read_evaluations(dir / "b" / "evaluations.jsonl"));
}
