#include "abcd/serialization.hpp"

#include "abcd/fs_util.hpp"
#include "abcd/template_engine.hpp"

namespace abcd {

namespace {

template <typename T>
void put_opt(json& j, const char* key, const std::optional<T>& v) {
    if (v) j[key] = *v;
}

template <typename T>
void get_opt(const json& j, const char* key, std::optional<T>& out) {
    if (auto it = j.find(key); it != j.end() && !it->is_null()) {
        out = it->get<T>();
    } else {
        out.reset();
    }
}

std::vector<Tag> tags_from_json(const json& j) {
    std::vector<Tag> tags;
    for (const auto& t : j) tags.emplace_back(t.get<std::string>());
    return tags;
}

json tags_to_json(const std::vector<Tag>& tags) {
    json arr = json::array();
    for (const auto& t : tags) arr.push_back(t.name());
    return arr;
}

}  // namespace

void to_json(json& j, const Fraction& f) { j = {{"num", f.num()}, {"den", f.den()}, {"value", f.value()}}; }

void from_json(const json& j, Fraction& f) {
    f = Fraction(j.at("num").get<std::int64_t>(), j.at("den").get<std::int64_t>());
}

void to_json(json& j, const Question& q) {
    j = {{"id", q.id}, {"text", q.text}, {"gold_answer", q.gold_answer}, {"dataset", to_string(q.dataset)}};
    put_opt(j, "category", q.category);
    put_opt(j, "subcategory", q.subcategory);
}

void from_json(const json& j, Question& q) {
    q.id = j.at("id").get<std::string>();
    q.text = j.at("text").get<std::string>();
    q.gold_answer = j.value("gold_answer", std::string());
    const auto ds = j.value("dataset", std::string("custom"));
    const auto parsed = dataset_from_string(ds);
    if (!parsed) throw std::runtime_error("unknown dataset '" + ds + "'");
    q.dataset = *parsed;
    get_opt(j, "category", q.category);
    get_opt(j, "subcategory", q.subcategory);
    require_valid(q);
}

void to_json(json& j, const ClaimTemplate& c) {
    j = {{"index", c.index}, {"text", c.text}, {"tags", tags_to_json(c.tags)}};
}

void from_json(const json& j, ClaimTemplate& c) {
    c.index = j.at("index").get<int>();
    c.text = j.at("text").get<std::string>();
    c.tags = j.contains("tags") ? tags_from_json(j.at("tags")) : extract_tags(c.text);
    if (c.tags != extract_tags(c.text)) {
        throw std::runtime_error("claim " + std::to_string(c.index) + ": tags do not match text");
    }
}

void to_json(json& j, const ClaimSet& cs) {
    j = {{"question_id", cs.question_id}, {"claims", cs.claims}, {"tags", tags_to_json(cs.tags)}};
    put_opt(j, "entity_reasoning", cs.entity_reasoning);
}

void from_json(const json& j, ClaimSet& cs) {
    cs.question_id = j.at("question_id").get<std::string>();
    cs.claims = j.at("claims").get<std::vector<ClaimTemplate>>();
    cs.tags = j.contains("tags") ? tags_from_json(j.at("tags")) : collect_tags(cs.claims);
    get_opt(j, "entity_reasoning", cs.entity_reasoning);
}

void to_json(json& j, const AnswerAssignment& a) {
    j = json::object();
    for (const auto& [tag, value] : a.entries()) j[tag.name()] = value;
}

void from_json(const json& j, AnswerAssignment& a) {
    if (j.is_null() || j.empty()) {
        a = AnswerAssignment();
        return;
    }
    AnswerAssignment::Map entries;
    for (const auto& [key, value] : j.items()) entries.emplace(Tag(key), value.get<std::string>());
    a = AnswerAssignment(std::move(entries));
}

void to_json(json& j, const VerificationResult& r) {
    j = {{"claim_index", r.claim_index},
         {"instantiated_text", r.instantiated_text},
         {"verdict", to_string(r.verdict)},
         {"raw_response", r.raw_response}};
}

void from_json(const json& j, VerificationResult& r) {
    r.claim_index = j.at("claim_index").get<int>();
    r.instantiated_text = j.at("instantiated_text").get<std::string>();
    const auto v = j.at("verdict").get<std::string>();
    const auto parsed = verdict_from_string(v);
    if (!parsed) throw std::runtime_error("unknown verdict '" + v + "'");
    r.verdict = *parsed;
    r.raw_response = j.value("raw_response", std::string());
}

void to_json(json& j, const QuestionEvaluation& e) {
    j = {{"question", e.question}, {"claim_set", e.claim_set}};
    if (!e.assignment.empty()) j["assignment"] = e.assignment;
    if (!e.results.empty()) j["results"] = e.results;
    if (!e.gt_results.empty()) j["gt_results"] = e.gt_results;
    put_opt(j, "score_true", e.score_true);
    put_opt(j, "correct", e.correct);
    put_opt(j, "error_category", e.error_category);
    put_opt(j, "gt_score_true", e.gt_score_true);
}

void from_json(const json& j, QuestionEvaluation& e) {
    e.question = j.at("question").get<Question>();
    e.claim_set = j.at("claim_set").get<ClaimSet>();
    e.assignment = j.contains("assignment") ? j.at("assignment").get<AnswerAssignment>() : AnswerAssignment();
    e.results = j.value("results", std::vector<VerificationResult>{});
    e.gt_results = j.value("gt_results", std::vector<VerificationResult>{});
    get_opt(j, "score_true", e.score_true);
    get_opt(j, "correct", e.correct);
    get_opt(j, "error_category", e.error_category);
    get_opt(j, "gt_score_true", e.gt_score_true);
}

void to_json(json& j, const GroundTruthCounts& g) {
    j = {{"gt_greater", g.gt_greater}, {"gt_equal", g.gt_equal}, {"gt_less", g.gt_less}};
}

void from_json(const json& j, GroundTruthCounts& g) {
    g.gt_greater = j.at("gt_greater").get<std::int64_t>();
    g.gt_equal = j.at("gt_equal").get<std::int64_t>();
    g.gt_less = j.at("gt_less").get<std::int64_t>();
}

void to_json(json& j, const AggregateReport& r) {
    j = {{"dataset", r.dataset},
         {"n_total", r.n_total},
         {"n_correct", r.n_correct},
         {"n_incorrect", r.n_incorrect},
         {"n_unlabeled", r.n_unlabeled},
         {"n_failed", r.n_failed}};
    put_opt(j, "mean_correct", r.mean_correct);
    put_opt(j, "mean_incorrect", r.mean_incorrect);
    put_opt(j, "diff", r.diff);
    put_opt(j, "t_stat", r.t_stat);
    put_opt(j, "degrees_freedom", r.degrees_freedom);
    put_opt(j, "p_value", r.p_value);
    put_opt(j, "p_correct", r.p_correct);
    put_opt(j, "p_incorrect", r.p_incorrect);
    put_opt(j, "gt_comparison", r.gt_comparison);
}

void from_json(const json& j, AggregateReport& r) {
    r.dataset = j.at("dataset").get<std::string>();
    r.n_total = j.at("n_total").get<std::int64_t>();
    r.n_correct = j.at("n_correct").get<std::int64_t>();
    r.n_incorrect = j.at("n_incorrect").get<std::int64_t>();
    r.n_unlabeled = j.at("n_unlabeled").get<std::int64_t>();
    r.n_failed = j.value("n_failed", std::int64_t{0});
    get_opt(j, "mean_correct", r.mean_correct);
    get_opt(j, "mean_incorrect", r.mean_incorrect);
    get_opt(j, "diff", r.diff);
    get_opt(j, "t_stat", r.t_stat);
    get_opt(j, "degrees_freedom", r.degrees_freedom);
    get_opt(j, "p_value", r.p_value);
    get_opt(j, "p_correct", r.p_correct);
    get_opt(j, "p_incorrect", r.p_incorrect);
    get_opt(j, "gt_comparison", r.gt_comparison);
}

std::vector<QuestionEvaluation> read_evaluations(const std::filesystem::path& path) {
    return from_jsonl<QuestionEvaluation>(read_file(path), path.string());
}

void write_evaluations(const std::filesystem::path& path, const std::vector<QuestionEvaluation>& records) {
    write_file_atomic(path, to_jsonl(records));
}

}  // namespace abcd
