#include "abcd/pipeline.hpp"

#include "abcd/fs_util.hpp"
#include "abcd/serialization.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <thread>
#include <unordered_map>

namespace abcd {

namespace fs = std::filesystem;
using nlohmann::json;

std::string_view to_string(ProviderMode m) {
    switch (m) {
        case ProviderMode::live: return "live";
        case ProviderMode::replay: return "replay";
        case ProviderMode::scripted: return "scripted";
    }
    return "live";
}

std::optional<ProviderMode> provider_mode_from_string(std::string_view s) {
    if (s == "live") return ProviderMode::live;
    if (s == "replay") return ProviderMode::replay;
    if (s == "scripted") return ProviderMode::scripted;
    return std::nullopt;
}

std::string_view to_string(Stage s) {
    switch (s) {
        case Stage::decompose: return "decompose";
        case Stage::answer: return "answer";
        case Stage::verify: return "verify";
        case Stage::baseline: return "baseline";
    }
    return "unknown";
}

void validate(const RunConfig& cfg, bool needs_dataset) {
    if (needs_dataset) {
        if (cfg.dataset_path.empty() || !fs::exists(cfg.dataset_path)) {
            throw ConfigError("dataset file not found: " + cfg.dataset_path.string());
        }
        if (cfg.pack_path.empty() || !fs::is_directory(cfg.pack_path)) {
            throw ConfigError("prompt pack directory not found: " + cfg.pack_path.string());
        }
    }
    for (const auto* model : {&cfg.decompose_model, &cfg.answer_model, &cfg.verify_model}) {
        if (model->empty()) throw ConfigError("model ids must be non-empty");
    }
    if (cfg.temperature < 0.0) throw ConfigError("temperature must be >= 0");
    if (cfg.decompose_max_tokens < 1 || cfg.answer_max_tokens < 1 || cfg.verify_max_tokens < 1) {
        throw ConfigError("max_tokens must be >= 1");
    }
    if (cfg.concurrency < 1 || cfg.concurrency > 1024) throw ConfigError("concurrency must be in [1, 1024]");
    if (cfg.retry.max_attempts < 1) throw ConfigError("retry attempts must be >= 1");

    const bool needs_key = cfg.provider_mode == ProviderMode::live ||
                           (cfg.provider_mode == ProviderMode::replay && !cfg.strict_replay);
    if (needs_key && api_key_from_env().empty()) {
        throw ConfigError("live provider calls need ABCD_API_KEY in the environment");
    }
    if (cfg.provider_mode == ProviderMode::replay && !cfg.cache_dir) {
        throw ConfigError("replay mode needs a cache directory");
    }
    if (cfg.provider_mode == ProviderMode::scripted && !fs::exists(cfg.script_path)) {
        throw ConfigError("scripted mode needs a rules file: " + cfg.script_path.string());
    }
}

json config_snapshot(const RunConfig& cfg) {
    static constexpr const char* kFormats[] = {"triviaqa", "hotpotqa", "obscureqa", "generic"};
    json j = {
        {"dataset_path", cfg.dataset_path.string()},
        {"format", kFormats[static_cast<int>(cfg.format)]},
        {"seed", cfg.seed},
        {"pack_path", cfg.pack_path.string()},
        {"decompose_model", cfg.decompose_model},
        {"answer_model", cfg.answer_model},
        {"verify_model", cfg.verify_model},
        {"temperature", cfg.temperature},
        {"decompose_max_tokens", cfg.decompose_max_tokens},
        {"answer_max_tokens", cfg.answer_max_tokens},
        {"verify_max_tokens", cfg.verify_max_tokens},
        {"answer_mode", cfg.answer_mode == AnswerMode::joint ? "joint" : "conditioned"},
        {"provider_mode", to_string(cfg.provider_mode)},
        {"strict_replay", cfg.strict_replay},
        {"base_url", cfg.base_url},
        {"script_path", cfg.script_path.string()},
        {"retry_attempts", cfg.retry.max_attempts},
        {"concurrency", cfg.concurrency},
        {"output_dir", cfg.output_dir.string()},
        {"verdict_match_mode",
         cfg.verdict.match_mode == VerdictParseConfig::MatchMode::substring ? "substring" : "word_boundary"},
        {"restatement_override", cfg.verdict.restatement_override},
        {"lenient_verify", cfg.lenient_verify},
        {"ground_truth_mode", cfg.ground_truth_mode},
        {"t_test", cfg.t_test == TTestKind::welch ? "welch" : "pooled"},
    };
    j["limit"] = cfg.limit ? json(*cfg.limit) : json(nullptr);
    j["cache_dir"] = cfg.cache_dir ? json(cfg.cache_dir->string()) : json(nullptr);
    j["labels_path"] = cfg.labels_path ? json(cfg.labels_path->string()) : json(nullptr);
    return j;
}

// ---------------------------------------------------------------------------

namespace {

std::shared_ptr<Provider> make_backend(const RunConfig& cfg) {
    switch (cfg.provider_mode) {
        case ProviderMode::scripted:
            return std::make_shared<BoundedProvider>(
                std::make_shared<ScriptedProvider>(load_script_rules(cfg.script_path)), cfg.concurrency);
        case ProviderMode::replay:
            if (cfg.strict_replay) return nullptr;
            [[fallthrough]];
        case ProviderMode::live: {
            auto http = std::make_shared<HttpProvider>(HttpProviderConfig{cfg.base_url, api_key_from_env()});
            return std::make_shared<BoundedProvider>(std::make_shared<RetryingProvider>(http, cfg.retry),
                                                     cfg.concurrency);
        }
    }
    return nullptr;
}

}  // namespace

ProviderStack::ProviderStack(const RunConfig& cfg) { wire(cfg, make_backend(cfg)); }

ProviderStack::ProviderStack(const RunConfig& cfg, std::shared_ptr<Provider> backend) {
    wire(cfg, std::move(backend));
}

void ProviderStack::wire(const RunConfig& cfg, std::shared_ptr<Provider> backend) {
    std::shared_ptr<ResponseCache> cache;
    if (cfg.cache_dir) cache = std::make_shared<ResponseCache>(*cfg.cache_dir);
    if (!cache && !backend) throw ConfigError("no provider backend and no cache to replay from");

    for (std::size_t i = 0; i < kStages.size(); ++i) {
        auto& layer = layers_[i];
        if (backend) layer.backend_counter = std::make_shared<CountingProvider>(backend);
        std::shared_ptr<Provider> below = layer.backend_counter;
        if (cache) below = std::make_shared<CachingProvider>(cache, layer.backend_counter);
        layer.top = std::make_shared<CountingProvider>(below);
    }
}

Provider& ProviderStack::stage(Stage s) { return *layers_[static_cast<std::size_t>(s)].top; }

std::int64_t ProviderStack::requests(Stage s) const { return layers_[static_cast<std::size_t>(s)].top->calls(); }

std::int64_t ProviderStack::backend_calls(Stage s) const {
    const auto& counter = layers_[static_cast<std::size_t>(s)].backend_counter;
    return counter ? counter->calls() : 0;
}

json ProviderStack::counts() const {
    json j = json::object();
    for (auto s : kStages) {
        j[std::string(to_string(s))] = {{"requests", requests(s)}, {"provider_calls", backend_calls(s)}};
    }
    return j;
}

json to_json(const QuestionStatus& s) {
    json j = {{"question_id", s.question_id}, {"status", s.ok ? "ok" : "failed"}};
    if (!s.ok) {
        j["stage"] = s.stage;
        j["reason"] = s.reason;
    }
    if (!s.notes.empty()) j["notes"] = s.notes;
    return j;
}

// ---------------------------------------------------------------------------

std::vector<Label> read_labels(const fs::path& path) {
    std::vector<Label> labels;
    if (!fs::exists(path)) return labels;
    std::size_t line_no = 0;
    for (const auto& line : read_lines(path)) {
        ++line_no;
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        try {
            const auto j = json::parse(line);
            Label l;
            l.question_id = j.at("question_id").get<std::string>();
            l.correct = j.at("correct").get<bool>();
            if (auto it = j.find("error_category"); it != j.end() && it->is_string()) l.error_category = *it;
            labels.push_back(std::move(l));
        } catch (const std::exception& e) {
            throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    return labels;
}

void write_labels(const fs::path& path, const std::vector<Label>& labels) {
    std::string out;
    for (const auto& l : labels) {
        json j = {{"question_id", l.question_id}, {"correct", l.correct}};
        if (l.error_category) j["error_category"] = *l.error_category;
        out += j.dump() + "\n";
    }
    write_file_atomic(path, out);
}

void join_labels(std::vector<QuestionEvaluation>& records, const std::vector<Label>& labels) {
    std::unordered_map<std::string, const Label*> by_id;
    for (const auto& l : labels) by_id[l.question_id] = &l;  // later entries win
    for (auto& rec : records) {
        auto it = by_id.find(rec.question.id);
        if (it == by_id.end()) continue;
        rec.correct = it->second->correct;
        rec.error_category = it->second->error_category;
    }
}

void score_records(std::vector<QuestionEvaluation>& records) {
    for (auto& rec : records) {
        rec.score_true = rec.results.empty() ? std::nullopt : score_true(rec.results);
        rec.gt_score_true = rec.gt_results.empty() ? std::nullopt : score_true(rec.gt_results);
    }
}

void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn) {
    const auto threads = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, workers)));
    if (threads <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) fn(i);
        });
    }
}

// ---------------------------------------------------------------------------

std::string format_number(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

namespace {

std::string cell(const std::optional<Fraction>& f) { return f ? format_number(f->value()) : "-"; }
std::string cell(const std::optional<double>& d) { return d ? format_number(*d) : "-"; }

std::string render_rows(const std::vector<std::string>& header, const std::vector<std::vector<std::string>>& rows) {
    std::vector<std::size_t> width(header.size());
    for (std::size_t c = 0; c < header.size(); ++c) width[c] = header[c].size();
    for (const auto& r : rows) {
        for (std::size_t c = 0; c < r.size(); ++c) width[c] = std::max(width[c], r[c].size());
    }
    const auto line = [&](const std::vector<std::string>& r) {
        std::string out;
        for (std::size_t c = 0; c < r.size(); ++c) {
            auto v = r[c];
            v.resize(width[c], ' ');
            out += (c == 0 ? "" : " | ") + v;
        }
        while (!out.empty() && out.back() == ' ') out.pop_back();
        return out + "\n";
    };
    std::string out = line(header);
    std::string rule;
    for (std::size_t c = 0; c < header.size(); ++c) rule += (c == 0 ? "" : "-+-") + std::string(width[c], '-');
    out += rule + "\n";
    for (const auto& r : rows) out += line(r);
    return out;
}

}  // namespace

std::string render_report_table(const std::vector<AggregateReport>& reports) {
    std::vector<std::vector<std::string>> rows;
    for (const auto& r : reports) {
        rows.push_back({r.dataset, cell(r.mean_correct), cell(r.mean_incorrect), cell(r.diff), cell(r.p_value),
                        cell(r.p_correct), cell(r.p_incorrect)});
    }
    std::string out = "Average share of claims judged true, correct (C) vs incorrect (I) answers\n\n";
    out += render_rows({"Dataset", "C", "I", "Diff", "p-val", "P(C)", "P(I)"}, rows);

    std::vector<std::vector<std::string>> gt_rows;
    for (const auto& r : reports) {
        if (!r.gt_comparison) continue;
        gt_rows.push_back({r.dataset, std::to_string(r.gt_comparison->gt_greater),
                           std::to_string(r.gt_comparison->gt_equal), std::to_string(r.gt_comparison->gt_less)});
    }
    if (!gt_rows.empty()) {
        out += "\nGround-truth answer score vs predicted answer score (incorrect answers)\n\n";
        out += render_rows({"Dataset", "GT>Pred", "GT=Pred", "GT<Pred"}, gt_rows);
    }
    return out;
}

}  // namespace abcd
