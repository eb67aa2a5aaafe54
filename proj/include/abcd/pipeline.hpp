#pragma once

#include "abcd/answer_generator.hpp"
#include "abcd/claim_verifier.hpp"
#include "abcd/core_model.hpp"
#include "abcd/dataset_io.hpp"
#include "abcd/decomposer.hpp"
#include "abcd/provider.hpp"
#include "abcd/scoring_stats.hpp"

#include <json.hpp>

#include <array>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace abcd {

namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int usage = 1;
inline constexpr int partial = 2;
inline constexpr int failure = 3;
}  // namespace exit_code

class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

enum class ProviderMode { live, replay, scripted };

std::string_view to_string(ProviderMode m);
std::optional<ProviderMode> provider_mode_from_string(std::string_view s);

struct RunConfig {
    std::filesystem::path dataset_path;
    QuestionFormat format = QuestionFormat::generic;
    std::optional<std::size_t> limit;
    std::uint64_t seed = 0;
    std::filesystem::path pack_path;

    std::string decompose_model = "decompose-model";
    std::string answer_model = "answer-model";
    std::string verify_model = "verify-model";
    double temperature = 0.0;
    int decompose_max_tokens = 512;
    int answer_max_tokens = 256;
    int verify_max_tokens = kVerifyMaxTokens;
    AnswerMode answer_mode = AnswerMode::joint;

    ProviderMode provider_mode = ProviderMode::live;
    bool strict_replay = true;
    std::string base_url = "https://api.openai.com/v1";
    std::filesystem::path script_path;  // scripted mode rules
    std::optional<std::filesystem::path> cache_dir;
    RetryPolicy retry;
    int concurrency = 4;

    std::filesystem::path output_dir = "abcd-out";
    std::optional<std::filesystem::path> labels_path;
    VerdictParseConfig verdict;
    bool lenient_verify = false;
    bool ground_truth_mode = false;
    TTestKind t_test = TTestKind::welch;
};

/// Throws ConfigError on an inconsistent configuration. `needs_dataset`
/// distinguishes commands that read a question file.
void validate(const RunConfig& cfg, bool needs_dataset);

nlohmann::json config_snapshot(const RunConfig& cfg);

enum class Stage { decompose, answer, verify, baseline };
inline constexpr std::array<Stage, 4> kStages = {Stage::decompose, Stage::answer, Stage::verify, Stage::baseline};
std::string_view to_string(Stage s);

/// Per-stage provider handles layered as
///   requests counter -> cache (optional) -> backend counter -> backend
/// where the backend is the live endpoint (bounded, with retries), the
/// scripted provider, or nothing at all for strict replay.
class ProviderStack {
public:
    explicit ProviderStack(const RunConfig& cfg);
    /// Uses `backend` in place of the one the mode would construct.
    ProviderStack(const RunConfig& cfg, std::shared_ptr<Provider> backend);

    Provider& stage(Stage s);

    std::int64_t requests(Stage s) const;
    /// Calls that reached the backend, i.e. cache misses when caching.
    std::int64_t backend_calls(Stage s) const;

    nlohmann::json counts() const;

private:
    void wire(const RunConfig& cfg, std::shared_ptr<Provider> backend);

    struct Layers {
        std::shared_ptr<CountingProvider> backend_counter;
        std::shared_ptr<CountingProvider> top;
    };
    std::array<Layers, kStages.size()> layers_;
};

struct QuestionStatus {
    std::string question_id;
    bool ok = true;
    std::string stage;
    std::string reason;
    std::vector<std::string> notes;
};

nlohmann::json to_json(const QuestionStatus& s);

struct Label {
    std::string question_id;
    bool correct = false;
    std::optional<std::string> error_category;
};

std::vector<Label> read_labels(const std::filesystem::path& path);
void write_labels(const std::filesystem::path& path, const std::vector<Label>& labels);

/// Applies labels by question id; unknown ids are ignored.
void join_labels(std::vector<QuestionEvaluation>& records, const std::vector<Label>& labels);

/// Fills score_true and gt_score_true from the verification results.
void score_records(std::vector<QuestionEvaluation>& records);

/// Runs `fn(i)` for i in [0, n) on up to `workers` threads.
void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn);

// ---------------------------------------------------------------------------
// Reporting
// ---------------------------------------------------------------------------

/// Up to 12 significant digits, trailing zeros trimmed.
std::string format_number(double v);

/// Plain-text tables: correct-vs-incorrect summary, then the ground-truth
/// comparison when any report carries it.
std::string render_report_table(const std::vector<AggregateReport>& reports);

// ---------------------------------------------------------------------------
// Commands. Each returns a process exit code and logs progress to `log`.
// ---------------------------------------------------------------------------

/// Full pipeline. Writes evaluations.jsonl, report.json, report.txt and
/// manifest.json under cfg.output_dir.
int cmd_evaluate(const RunConfig& cfg, std::ostream& log);
int cmd_evaluate(const RunConfig& cfg, ProviderStack& providers, std::ostream& log);

struct StageIo {
    std::filesystem::path input;
    std::filesystem::path output;
};

/// Questions -> records holding the claim set.
int cmd_decompose(const RunConfig& cfg, const std::filesystem::path& output, std::ostream& log);
/// Records with claim sets -> records with answers.
int cmd_answer(const RunConfig& cfg, const StageIo& io, std::ostream& log);
/// Records with answers -> records with verification results.
int cmd_verify(const RunConfig& cfg, const StageIo& io, std::ostream& log);
/// Scores verified records and joins labels when cfg.labels_path is set.
int cmd_score(const RunConfig& cfg, const StageIo& io, std::ostream& log);

/// One report per record file, written to output_dir/report.{json,txt}.
int cmd_report(const std::vector<std::filesystem::path>& record_files, const std::filesystem::path& output_dir,
               TTestKind kind, std::ostream& log);

struct AnnotateSummary {
    std::size_t labeled = 0;
    std::size_t skipped = 0;
    bool quit = false;
};

/// Interactive labeling loop. Keys: c (correct), i (incorrect), s (skip),
/// q (quit); text after the key is stored as the error category. The labels
/// file is rewritten after every entry.
AnnotateSummary annotate(const std::vector<QuestionEvaluation>& records, const std::filesystem::path& labels_path,
                         std::istream& in, std::ostream& out);
int cmd_annotate(const std::filesystem::path& records_path, const std::filesystem::path& labels_path,
                 std::istream& in, std::ostream& out);

/// Whole-question baseline for each record with a generated answer.
int cmd_baseline(const RunConfig& cfg, const StageIo& io, std::ostream& log);

struct ObscureQaStats {
    std::size_t input_records = 0;
    std::size_t kept = 0;
    std::size_t dropped = 0;
    std::map<std::string, std::size_t> drop_reasons;
    std::size_t train = 0, valid = 0, test = 0;
    std::map<std::string, std::size_t> categories;
    double avg_question_words = 0.0;
    double avg_answer_words = 0.0;
};

ObscureQaStats obscureqa_stats(std::size_t input_records, const ObscureQaBuild& build);

int cmd_build_obscureqa(const std::filesystem::path& dump, const SplitSpec& split,
                        const std::filesystem::path& output_dir, std::ostream& log);

}  // namespace abcd
