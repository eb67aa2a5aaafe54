// abcd: command-line front end for the claim decomposition pipeline.

#include "abcd/pipeline.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

using namespace abcd;

struct Options {
    RunConfig cfg;
    std::string format = "generic";
    std::string provider = "live";
    std::string match_mode = "substring";
    std::string answer_mode = "joint";
    std::string t_test = "welch";
    bool no_restatement = false;
    bool no_strict_replay = false;
    std::string labels;
    std::string cache_dir;
    std::size_t limit = 0;
    int retry_attempts = 5;
};

void add_provider_flags(CLI::App* app, Options& o) {
    app->add_option("--provider", o.provider, "live, replay or scripted")
        ->check(CLI::IsMember({"live", "replay", "scripted"}));
    app->add_flag("--no-strict-replay", o.no_strict_replay, "in replay mode, fall back to the live endpoint on a miss");
    app->add_option("--cache-dir", o.cache_dir, "response cache directory");
    app->add_option("--script", o.cfg.script_path, "rules file for scripted mode");
    app->add_option("--base-url", o.cfg.base_url, "chat completions endpoint base");
    app->add_option("--concurrency", o.cfg.concurrency, "in-flight provider calls");
    app->add_option("--retries", o.retry_attempts, "attempts per call for retryable errors");
    app->add_option("--temperature", o.cfg.temperature);
}

void add_model_flags(CLI::App* app, Options& o) {
    app->add_option("--decompose-model", o.cfg.decompose_model);
    app->add_option("--answer-model", o.cfg.answer_model);
    app->add_option("--verify-model", o.cfg.verify_model);
    app->add_option("--decompose-max-tokens", o.cfg.decompose_max_tokens);
    app->add_option("--answer-max-tokens", o.cfg.answer_max_tokens);
    app->add_option("--verify-max-tokens", o.cfg.verify_max_tokens);
    app->add_option("--answer-mode", o.answer_mode, "joint or conditioned")
        ->check(CLI::IsMember({"joint", "conditioned"}));
}

void add_verdict_flags(CLI::App* app, Options& o) {
    app->add_option("--match-mode", o.match_mode, "substring or word_boundary")
        ->check(CLI::IsMember({"substring", "word_boundary"}));
    app->add_flag("--no-restatement", o.no_restatement, "disable the false-then-restatement override");
    app->add_flag("--lenient", o.cfg.lenient_verify, "record failed verifications as non-responses");
}

void add_dataset_flags(CLI::App* app, Options& o) {
    app->add_option("--dataset", o.cfg.dataset_path, "question file (JSONL)")->required();
    app->add_option("--format", o.format, "triviaqa, hotpotqa, obscureqa or generic")
        ->check(CLI::IsMember({"triviaqa", "hotpotqa", "obscureqa", "generic"}));
    app->add_option("--limit", o.limit, "sample this many questions");
    app->add_option("--seed", o.cfg.seed, "sampling seed");
    app->add_option("--pack", o.cfg.pack_path, "prompt pack directory")->required();
}

void finish(Options& o) {
    auto& c = o.cfg;
    c.format = *question_format_from_string(o.format);
    c.provider_mode = *provider_mode_from_string(o.provider);
    c.strict_replay = !o.no_strict_replay;
    c.verdict.match_mode = o.match_mode == "word_boundary" ? VerdictParseConfig::MatchMode::word_boundary
                                                           : VerdictParseConfig::MatchMode::substring;
    c.verdict.restatement_override = !o.no_restatement;
    c.answer_mode = o.answer_mode == "conditioned" ? AnswerMode::conditioned : AnswerMode::joint;
    c.t_test = o.t_test == "pooled" ? TTestKind::pooled : TTestKind::welch;
    c.retry.max_attempts = o.retry_attempts;
    if (!o.labels.empty()) c.labels_path = o.labels;
    if (!o.cache_dir.empty()) c.cache_dir = o.cache_dir;
    if (o.limit > 0) c.limit = o.limit;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Answer-based claim decomposition and fine-grained self-evaluation"};
    app.require_subcommand(1);

    Options o;
    StageIo io;
    std::filesystem::path output;
    std::vector<std::filesystem::path> record_files;
    std::filesystem::path records_path;
    std::filesystem::path dump;
    SplitSpec split;

    auto* evaluate = app.add_subcommand("evaluate", "run the full pipeline over a question file");
    add_dataset_flags(evaluate, o);
    add_model_flags(evaluate, o);
    add_provider_flags(evaluate, o);
    add_verdict_flags(evaluate, o);
    evaluate->add_flag("--ground-truth", o.cfg.ground_truth_mode, "also verify with the gold answer substituted");
    evaluate->add_option("--labels", o.labels, "labels file (JSONL)");
    evaluate->add_option("--output-dir", o.cfg.output_dir);
    evaluate->add_option("--t-test", o.t_test)->check(CLI::IsMember({"welch", "pooled"}));

    auto* decompose = app.add_subcommand("decompose", "decompose questions into claim templates");
    add_dataset_flags(decompose, o);
    add_model_flags(decompose, o);
    add_provider_flags(decompose, o);
    decompose->add_option("--output", output, "records file to write")->required();

    auto* answer = app.add_subcommand("answer", "generate answers for decomposed records");
    add_model_flags(answer, o);
    add_provider_flags(answer, o);
    answer->add_option("--input", io.input)->required()->check(CLI::ExistingFile);
    answer->add_option("--output", io.output)->required();

    auto* verify = app.add_subcommand("verify", "verify instantiated claims");
    add_model_flags(verify, o);
    add_provider_flags(verify, o);
    add_verdict_flags(verify, o);
    verify->add_flag("--ground-truth", o.cfg.ground_truth_mode, "also verify with the gold answer substituted");
    verify->add_option("--input", io.input)->required()->check(CLI::ExistingFile);
    verify->add_option("--output", io.output)->required();

    auto* score = app.add_subcommand("score", "score verified records and join labels");
    score->add_option("--input", io.input)->required()->check(CLI::ExistingFile);
    score->add_option("--output", io.output)->required();
    score->add_option("--labels", o.labels)->check(CLI::ExistingFile);

    auto* report = app.add_subcommand("report", "aggregate record files into report tables");
    report->add_option("records", record_files, "record files, one per dataset")->required()->check(CLI::ExistingFile);
    report->add_option("--output-dir", o.cfg.output_dir);
    report->add_option("--t-test", o.t_test)->check(CLI::IsMember({"welch", "pooled"}));

    auto* annotate = app.add_subcommand("annotate", "label generated answers interactively");
    annotate->add_option("records", records_path)->required()->check(CLI::ExistingFile);
    annotate->add_option("--labels", o.labels)->required();

    auto* baseline = app.add_subcommand("baseline", "whole-question self-evaluation baseline");
    add_model_flags(baseline, o);
    add_provider_flags(baseline, o);
    add_verdict_flags(baseline, o);
    baseline->add_option("--input", io.input)->required()->check(CLI::ExistingFile);
    baseline->add_option("--output", io.output)->required();

    auto* build = app.add_subcommand("build-obscureqa", "build ObscureQA splits from a Quizbowl dump");
    build->add_option("dump", dump)->required()->check(CLI::ExistingFile);
    build->add_option("--train", split.train);
    build->add_option("--valid", split.valid);
    build->add_option("--test", split.test);
    build->add_option("--seed", split.seed);
    build->add_option("--output-dir", o.cfg.output_dir);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? exit_code::ok : exit_code::usage;
    }

    try {
        finish(o);
        auto& log = std::cerr;
        if (*evaluate) return cmd_evaluate(o.cfg, log);
        if (*decompose) return cmd_decompose(o.cfg, output, log);
        if (*answer) return cmd_answer(o.cfg, io, log);
        if (*verify) return cmd_verify(o.cfg, io, log);
        if (*score) return cmd_score(o.cfg, io, log);
        if (*report) return cmd_report(record_files, o.cfg.output_dir, o.cfg.t_test, log);
        if (*annotate) return cmd_annotate(records_path, *o.cfg.labels_path, std::cin, std::cout);
        if (*baseline) return cmd_baseline(o.cfg, io, log);
        if (*build) {
            require_valid(split);
            return cmd_build_obscureqa(dump, split, o.cfg.output_dir, log);
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return exit_code::usage;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code::usage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code::failure;
    }
    return exit_code::usage;
}
