#include "abcd/fs_util.hpp"
#include "abcd/pipeline.hpp"
#include "abcd/serialization.hpp"
#include "abcd/text_util.hpp"

#include <ostream>
#include <set>

namespace abcd {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct StageFailure : std::runtime_error {
    StageFailure(std::string stage, const std::string& reason) : std::runtime_error(reason), stage(std::move(stage)) {}
    std::string stage;
};

template <typename Fn>
auto run_stage(std::string_view stage, Fn&& fn) -> decltype(fn()) {
    try {
        return fn();
    } catch (const StageFailure&) {
        throw;
    } catch (const std::exception& e) {
        throw StageFailure(std::string(stage), e.what());
    }
}

struct StageContext {
    const RunConfig& cfg;
    ProviderStack& providers;
};

void do_decompose(const StageContext& ctx, const PromptPack& pack, QuestionEvaluation& rec, QuestionStatus& st) {
    const auto result = run_stage("decompose", [&] {
        return decompose(rec.question, pack, ctx.providers.stage(Stage::decompose),
                         {ctx.cfg.decompose_model, ctx.cfg.temperature, ctx.cfg.decompose_max_tokens});
    });
    rec.claim_set = result.claim_set;
    for (const auto& w : result.warnings) {
        std::string note = w.kind == DecompositionParseError::Kind::ClaimWithoutAnswerTag
                               ? "claim " + std::to_string(*w.claim_index) + " lacks the answer tag"
                               : "unnumbered line " + std::to_string(w.line) + " ignored";
        st.notes.push_back(std::move(note));
    }
}

void do_answer(const StageContext& ctx, QuestionEvaluation& rec) {
    if (rec.claim_set.claims.empty()) throw StageFailure("answer", "record has no claim set");
    rec.assignment = run_stage("answer", [&] {
        return generate_answers(rec.question, rec.claim_set, ctx.providers.stage(Stage::answer),
                                {ctx.cfg.answer_model, ctx.cfg.temperature, ctx.cfg.answer_max_tokens,
                                 ctx.cfg.answer_mode});
    });
}

void do_verify(const StageContext& ctx, QuestionEvaluation& rec) {
    if (rec.assignment.empty()) throw StageFailure("verify", "record has no generated answers");
    VerifyOptions opts;
    opts.model = ctx.cfg.verify_model;
    opts.temperature = ctx.cfg.temperature;
    opts.max_tokens = ctx.cfg.verify_max_tokens;
    opts.parse = ctx.cfg.verdict;
    opts.lenient = ctx.cfg.lenient_verify;
    auto& provider = ctx.providers.stage(Stage::verify);
    rec.results = run_stage("verify", [&] { return verify_all(rec.claim_set, rec.assignment, provider, opts); });
    if (ctx.cfg.ground_truth_mode) {
        rec.gt_results = run_stage("verify_ground_truth", [&] {
            return verify_all(rec.claim_set, rec.assignment, provider, opts, rec.question.gold_answer);
        });
    }
}

int exit_for(std::size_t ok, std::size_t total) {
    if (ok == 0) return exit_code::failure;
    return ok == total ? exit_code::ok : exit_code::partial;
}

std::string dataset_label(const std::vector<QuestionEvaluation>& records, const fs::path& fallback) {
    std::set<std::string_view> names;
    for (const auto& r : records) names.insert(to_string(r.question.dataset));
    if (names.size() == 1 && *names.begin() != "custom") return std::string(*names.begin());
    return fallback.stem().string();
}

json manifest(const RunConfig& cfg, const std::string& command, const std::string& started,
              const std::vector<QuestionStatus>& statuses, const ProviderStack* providers) {
    json j = {{"command", command},
              {"config", config_snapshot(cfg)},
              {"started_at", started},
              {"finished_at", utc_timestamp()}};
    json qs = json::array();
    std::size_t ok = 0;
    for (const auto& s : statuses) {
        qs.push_back(to_json(s));
        ok += s.ok ? 1 : 0;
    }
    j["questions"] = qs;
    j["summary"] = {{"total", statuses.size()}, {"ok", ok}, {"failed", statuses.size() - ok}};
    if (providers) j["provider_calls"] = providers->counts();
    return j;
}

fs::path manifest_path_for(const fs::path& output) {
    auto p = output;
    p += ".manifest.json";
    return p;
}

void log_failures(const std::vector<QuestionStatus>& statuses, std::ostream& log) {
    for (const auto& s : statuses) {
        if (!s.ok) log << "  " << s.question_id << ": failed at " << s.stage << ": " << s.reason << "\n";
    }
}

template <typename StageFn>
int run_record_stage(const RunConfig& cfg, const StageIo& io, const std::string& command, std::ostream& log,
                     StageFn&& stage_fn) {
    const auto started = utc_timestamp();
    auto records = read_evaluations(io.input);
    ProviderStack providers(cfg);
    const StageContext ctx{cfg, providers};

    std::vector<QuestionStatus> statuses(records.size());
    parallel_for(records.size(), cfg.concurrency, [&](std::size_t i) {
        auto& st = statuses[i];
        st.question_id = records[i].question.id;
        try {
            stage_fn(ctx, records[i]);
        } catch (const StageFailure& e) {
            st.ok = false;
            st.stage = e.stage;
            st.reason = e.what();
        }
    });

    write_evaluations(io.output, records);
    write_file_atomic(manifest_path_for(io.output),
                      manifest(cfg, command, started, statuses, &providers).dump(2) + "\n");
    const auto ok = static_cast<std::size_t>(
        std::count_if(statuses.begin(), statuses.end(), [](const auto& s) { return s.ok; }));
    log << command << ": " << ok << "/" << records.size() << " records ok -> " << io.output.string() << "\n";
    log_failures(statuses, log);
    return exit_for(ok, records.size());
}

std::vector<Question> select_questions(const RunConfig& cfg, std::ostream& log) {
    auto loaded = load_questions(cfg.dataset_path, cfg.format);
    for (const auto& e : loaded.errors) {
        log << "warning: " << cfg.dataset_path.string() << ":" << e.line << ": " << e.message << "\n";
    }
    if (loaded.skipped > 0) log << "skipped " << loaded.skipped << " records excluded by the format filter\n";
    if (!cfg.limit) return std::move(loaded.questions);
    const auto n = std::min(*cfg.limit, loaded.questions.size());
    return sample_questions(loaded.questions, n, cfg.seed);
}

}  // namespace

int cmd_evaluate(const RunConfig& cfg, std::ostream& log) {
    validate(cfg, true);
    ProviderStack providers(cfg);
    return cmd_evaluate(cfg, providers, log);
}

int cmd_evaluate(const RunConfig& cfg, ProviderStack& providers, std::ostream& log) {
    validate(cfg, true);
    const auto started = utc_timestamp();
    const auto questions = select_questions(cfg, log);
    const auto pack = load_prompt_pack(cfg.pack_path);
    const StageContext ctx{cfg, providers};

    std::vector<QuestionEvaluation> records(questions.size());
    std::vector<QuestionStatus> statuses(questions.size());
    parallel_for(questions.size(), cfg.concurrency, [&](std::size_t i) {
        auto& rec = records[i];
        auto& st = statuses[i];
        rec.question = questions[i];
        st.question_id = questions[i].id;
        try {
            do_decompose(ctx, pack, rec, st);
            do_answer(ctx, rec);
            do_verify(ctx, rec);
        } catch (const StageFailure& e) {
            st.ok = false;
            st.stage = e.stage;
            st.reason = e.what();
        }
    });

    score_records(records);
    if (cfg.labels_path) {
        if (fs::exists(*cfg.labels_path)) {
            join_labels(records, read_labels(*cfg.labels_path));
        } else {
            log << "labels file " << cfg.labels_path->string() << " not found; all records unlabeled\n";
        }
    }
    const auto report = aggregate(records, dataset_label(records, cfg.dataset_path), cfg.t_test);

    write_evaluations(cfg.output_dir / "evaluations.jsonl", records);
    write_file_atomic(cfg.output_dir / "report.json", json(std::vector<AggregateReport>{report}).dump(2) + "\n");
    write_file_atomic(cfg.output_dir / "report.txt", render_report_table({report}));
    write_file_atomic(cfg.output_dir / "manifest.json",
                      manifest(cfg, "evaluate", started, statuses, &providers).dump(2) + "\n");

    const auto ok = static_cast<std::size_t>(
        std::count_if(statuses.begin(), statuses.end(), [](const auto& s) { return s.ok; }));
    log << "evaluate: " << ok << "/" << records.size() << " questions completed -> " << cfg.output_dir.string()
        << "\n";
    log_failures(statuses, log);
    return exit_for(ok, records.size());
}

int cmd_decompose(const RunConfig& cfg, const fs::path& output, std::ostream& log) {
    validate(cfg, true);
    const auto started = utc_timestamp();
    const auto questions = select_questions(cfg, log);
    const auto pack = load_prompt_pack(cfg.pack_path);
    ProviderStack providers(cfg);
    const StageContext ctx{cfg, providers};

    std::vector<QuestionEvaluation> records(questions.size());
    std::vector<QuestionStatus> statuses(questions.size());
    parallel_for(questions.size(), cfg.concurrency, [&](std::size_t i) {
        records[i].question = questions[i];
        statuses[i].question_id = questions[i].id;
        try {
            do_decompose(ctx, pack, records[i], statuses[i]);
        } catch (const StageFailure& e) {
            statuses[i].ok = false;
            statuses[i].stage = e.stage;
            statuses[i].reason = e.what();
        }
    });

    write_evaluations(output, records);
    write_file_atomic(manifest_path_for(output), manifest(cfg, "decompose", started, statuses, &providers).dump(2) + "\n");
    const auto ok = static_cast<std::size_t>(
        std::count_if(statuses.begin(), statuses.end(), [](const auto& s) { return s.ok; }));
    log << "decompose: " << ok << "/" << records.size() << " questions ok -> " << output.string() << "\n";
    log_failures(statuses, log);
    return exit_for(ok, records.size());
}

int cmd_answer(const RunConfig& cfg, const StageIo& io, std::ostream& log) {
    validate(cfg, false);
    return run_record_stage(cfg, io, "answer", log,
                            [](const StageContext& ctx, QuestionEvaluation& rec) { do_answer(ctx, rec); });
}

int cmd_verify(const RunConfig& cfg, const StageIo& io, std::ostream& log) {
    validate(cfg, false);
    return run_record_stage(cfg, io, "verify", log,
                            [](const StageContext& ctx, QuestionEvaluation& rec) { do_verify(ctx, rec); });
}

int cmd_score(const RunConfig& cfg, const StageIo& io, std::ostream& log) {
    auto records = read_evaluations(io.input);
    score_records(records);
    if (cfg.labels_path) join_labels(records, read_labels(*cfg.labels_path));
    write_evaluations(io.output, records);
    const auto scored = std::count_if(records.begin(), records.end(), [](const auto& r) { return !r.results.empty(); });
    log << "score: " << scored << "/" << records.size() << " records scored -> " << io.output.string() << "\n";
    return exit_for(static_cast<std::size_t>(scored), records.size());
}

int cmd_report(const std::vector<fs::path>& record_files, const fs::path& output_dir, TTestKind kind,
               std::ostream& log) {
    if (record_files.empty()) {
        log << "report: no record files given\n";
        return exit_code::usage;
    }
    std::vector<AggregateReport> reports;
    for (const auto& path : record_files) {
        const auto records = read_evaluations(path);
        if (records.empty()) {
            log << "report: " << path.string() << " holds no records\n";
            return exit_code::failure;
        }
        reports.push_back(aggregate(records, dataset_label(records, path), kind));
    }
    const auto table = render_report_table(reports);
    write_file_atomic(output_dir / "report.json", json(reports).dump(2) + "\n");
    write_file_atomic(output_dir / "report.txt", table);
    log << table;
    return exit_code::ok;
}

int cmd_baseline(const RunConfig& cfg, const StageIo& io, std::ostream& log) {
    validate(cfg, false);
    const auto started = utc_timestamp();
    const auto records = read_evaluations(io.input);
    ProviderStack providers(cfg);

    VerifyOptions opts;
    opts.model = cfg.verify_model;
    opts.temperature = cfg.temperature;
    opts.max_tokens = cfg.verify_max_tokens;
    opts.parse = cfg.verdict;

    std::vector<QuestionStatus> statuses(records.size());
    std::vector<std::optional<json>> rows(records.size());
    parallel_for(records.size(), cfg.concurrency, [&](std::size_t i) {
        const auto& rec = records[i];
        auto& st = statuses[i];
        st.question_id = rec.question.id;
        if (rec.assignment.empty()) {
            st.notes.push_back("skipped: no generated answer");
            return;
        }
        try {
            const auto res = baseline_whole_question(rec.question, rec.assignment.answer(),
                                                     providers.stage(Stage::baseline), opts);
            json row = {{"question_id", rec.question.id},
                        {"answer", rec.assignment.answer()},
                        {"baseline_verdict", to_string(res.verdict)},
                        {"raw_response", res.raw_response}};
            if (rec.score_true) row["score_true"] = *rec.score_true;
            if (rec.correct) row["correct"] = *rec.correct;
            rows[i] = std::move(row);
        } catch (const std::exception& e) {
            st.ok = false;
            st.stage = "baseline";
            st.reason = e.what();
        }
    });

    std::string out;
    std::size_t ok = 0;
    for (const auto& row : rows) {
        if (!row) continue;
        out += row->dump() + "\n";
        ++ok;
    }
    write_file_atomic(io.output, out);
    write_file_atomic(manifest_path_for(io.output), manifest(cfg, "baseline", started, statuses, &providers).dump(2) + "\n");
    log << "baseline: " << ok << "/" << records.size() << " verdicts -> " << io.output.string() << "\n";
    log_failures(statuses, log);
    const auto failed = std::count_if(statuses.begin(), statuses.end(), [](const auto& s) { return !s.ok; });
    if (ok == 0 && failed > 0) return exit_code::failure;
    return failed > 0 ? exit_code::partial : exit_code::ok;
}

ObscureQaStats obscureqa_stats(std::size_t input_records, const ObscureQaBuild& build) {
    ObscureQaStats s;
    s.input_records = input_records;
    s.dropped = build.dropped;
    s.drop_reasons = build.drop_reasons;
    s.train = build.train.size();
    s.valid = build.valid.size();
    s.test = build.test.size();
    s.kept = s.train + s.valid + s.test;
    std::size_t qwords = 0;
    std::size_t awords = 0;
    for (const auto* split : {&build.train, &build.valid, &build.test}) {
        for (const auto& q : *split) {
            ++s.categories[q.category.value_or("")];
            qwords += word_count(q.text);
            awords += word_count(q.gold_answer);
        }
    }
    if (s.kept > 0) {
        s.avg_question_words = static_cast<double>(qwords) / static_cast<double>(s.kept);
        s.avg_answer_words = static_cast<double>(awords) / static_cast<double>(s.kept);
    }
    return s;
}

int cmd_build_obscureqa(const fs::path& dump, const SplitSpec& split, const fs::path& output_dir, std::ostream& log) {
    const auto raw = read_quizbowl_dump(dump);
    const auto build = build_obscureqa(raw, split);
    const auto stats = obscureqa_stats(raw.size(), build);
    if (stats.kept == 0) {
        log << "build-obscureqa: no convertible records in " << dump.string() << "\n";
        return exit_code::failure;
    }

    const auto write_split = [&](const char* name, const std::vector<Question>& qs) {
        std::string out;
        for (const auto& q : qs) {
            json j = {{"id", q.id}, {"question", q.text}, {"answer", q.gold_answer}};
            j["category"] = q.category ? json(*q.category) : json(nullptr);
            j["subcategory"] = q.subcategory ? json(*q.subcategory) : json(nullptr);
            out += j.dump() + "\n";
        }
        write_file_atomic(output_dir / (std::string(name) + ".jsonl"), out);
    };
    write_split("train", build.train);
    write_split("valid", build.valid);
    write_split("test", build.test);

    const json j = {{"input_records", stats.input_records},
                    {"kept", stats.kept},
                    {"dropped", stats.dropped},
                    {"drop_reasons", stats.drop_reasons},
                    {"splits", {{"train", stats.train}, {"valid", stats.valid}, {"test", stats.test}}},
                    {"categories", stats.categories},
                    {"avg_question_words", stats.avg_question_words},
                    {"avg_answer_words", stats.avg_answer_words},
                    {"seed", split.seed}};
    write_file_atomic(output_dir / "stats.json", j.dump(2) + "\n");
    log << "build-obscureqa: kept " << stats.kept << " of " << stats.input_records << " (train " << stats.train
        << ", valid " << stats.valid << ", test " << stats.test << ") -> " << output_dir.string() << "\n";
    return exit_code::ok;
}

}  // namespace abcd
