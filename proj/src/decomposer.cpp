#include "abcd/decomposer.hpp"

#include "abcd/fs_util.hpp"
#include "abcd/text_util.hpp"

#include <json.hpp>

#include <regex>

namespace abcd {

namespace fs = std::filesystem;

namespace {

std::string describe(DecompositionParseError::Kind kind, const std::optional<int>& line) {
    std::string msg;
    switch (kind) {
        case DecompositionParseError::Kind::MissingStepMarker: msg = "missing step-3 marker"; break;
        case DecompositionParseError::Kind::NoClaims: msg = "no claims after step-3 marker"; break;
        case DecompositionParseError::Kind::UnnumberedLine: msg = "unnumbered line"; break;
        case DecompositionParseError::Kind::ClaimWithoutAnswerTag: msg = "claim without answer tag"; break;
    }
    if (line) msg += " (line " + std::to_string(*line) + ")";
    return msg;
}

const std::regex& claim_line_pattern() {
    static const std::regex re(R"(^\s*(\d+)\s*[.)]\s+(.*\S)\s*$)");
    return re;
}

bool starts_with(std::string_view s, std::string_view prefix) {
    return !prefix.empty() && s.substr(0, prefix.size()) == prefix;
}

}  // namespace

DecompositionParseError::DecompositionParseError(Kind kind, std::optional<int> line)
    : std::runtime_error(describe(kind, line)), kind_(kind), line_(line) {}

PromptPack load_prompt_pack(const fs::path& dir) {
    PromptPack pack;
    pack.instructions = trim(read_file(dir / "instructions.txt"));

    std::string block;
    for (const auto& line : read_lines(dir / "examples.txt")) {
        if (trim(line) == "---") {
            if (!trim(block).empty()) pack.examples.push_back(trim(block));
            block.clear();
        } else {
            block += line;
            block += '\n';
        }
    }
    if (!trim(block).empty()) pack.examples.push_back(trim(block));

    if (const auto cfg = dir / "pack.json"; fs::exists(cfg)) {
        const auto doc = nlohmann::json::parse(read_file(cfg));
        pack.markers.step1 = doc.value("step1_marker", pack.markers.step1);
        pack.markers.step2 = doc.value("step2_marker", pack.markers.step2);
        pack.markers.step3 = doc.value("step3_marker", pack.markers.step3);
        pack.question_template = doc.value("question_template", pack.question_template);
    }
    validate_prompt_pack(pack);
    return pack;
}

void validate_prompt_pack(const PromptPack& pack) {
    if (pack.examples.size() < kMinPackExamples || pack.examples.size() > kMaxPackExamples) {
        throw std::invalid_argument("prompt pack needs 5-7 examples, found " +
                                    std::to_string(pack.examples.size()));
    }
    if (pack.question_template.find("{question}") == std::string::npos) {
        throw std::invalid_argument("question template lacks {question}");
    }
    for (std::size_t i = 0; i < pack.examples.size(); ++i) {
        try {
            parse_decomposition(pack.examples[i], pack.markers);
        } catch (const DecompositionParseError& e) {
            throw std::invalid_argument("prompt pack example " + std::to_string(i + 1) + ": " + e.what());
        }
    }
}

std::string build_decomposition_prompt(const Question& q, const PromptPack& pack) {
    require_valid(q);
    std::string prompt = pack.instructions;
    prompt += "\n\n";
    for (const auto& ex : pack.examples) {
        prompt += ex;
        prompt += "\n\n";
    }
    auto line = pack.question_template;
    line.replace(line.find("{question}"), 10, trim(q.text));
    prompt += line;
    prompt += '\n';
    prompt += pack.markers.step1;
    return prompt;
}

Decomposition parse_decomposition(std::string_view raw, const StepMarkers& markers) {
    const auto lines = split_lines(raw);

    std::optional<std::size_t> step1_at, step2_at, step3_at;
    for (std::size_t i = 0; i < lines.size() && !step3_at; ++i) {
        const auto t = trim(lines[i]);
        if (starts_with(t, markers.step3)) {
            step3_at = i;
        } else if (starts_with(t, markers.step2) && !step2_at) {
            step2_at = i;
        } else if (starts_with(t, markers.step1) && !step1_at && !step2_at) {
            step1_at = i;
        }
    }
    if (!step3_at) throw DecompositionParseError(DecompositionParseError::Kind::MissingStepMarker, std::nullopt);

    Decomposition out;

    // Step-1 rationale: the free text of the step-1 section that is not a
    // numbered claim.
    {
        const std::size_t begin = step1_at.value_or(0);
        const std::size_t end = step2_at.value_or(*step3_at);
        std::string rationale;
        for (std::size_t i = begin; i < end; ++i) {
            std::string t = trim(lines[i]);
            if (step1_at && i == *step1_at) t = trim(std::string_view(t).substr(markers.step1.size()));
            if (t.empty() || std::regex_match(t, claim_line_pattern())) continue;
            if (!rationale.empty()) rationale += ' ';
            rationale += t;
        }
        if (!rationale.empty()) out.claim_set.entity_reasoning = std::move(rationale);
    }

    struct Line {
        int number;
        std::string text;
    };
    std::vector<Line> body;
    {
        const auto head = trim(std::string_view(trim(lines[*step3_at])).substr(markers.step3.size()));
        if (!head.empty()) body.push_back({static_cast<int>(*step3_at) + 1, head});
    }
    for (std::size_t i = *step3_at + 1; i < lines.size(); ++i) {
        auto t = trim(lines[i]);
        if (t.empty()) {
            if (body.empty()) continue;
            break;
        }
        if (t == "---" || starts_with(t, "Question:") || starts_with(t, markers.step1) ||
            starts_with(t, markers.step2) || starts_with(t, markers.step3)) {
            break;
        }
        body.push_back({static_cast<int>(i) + 1, std::move(t)});
    }

    for (const auto& line : body) {
        std::smatch m;
        if (!std::regex_match(line.text, m, claim_line_pattern())) {
            out.warnings.push_back({DecompositionParseError::Kind::UnnumberedLine, line.number, std::nullopt});
            continue;
        }
        const int index = static_cast<int>(out.claim_set.claims.size()) + 1;
        auto claim = make_claim(index, m[2].str());
        if (!claim.has_answer_tag()) {
            out.warnings.push_back({DecompositionParseError::Kind::ClaimWithoutAnswerTag, line.number, index});
        }
        out.claim_set.claims.push_back(std::move(claim));
    }

    if (out.claim_set.claims.empty()) {
        throw DecompositionParseError(DecompositionParseError::Kind::NoClaims, static_cast<int>(*step3_at) + 1);
    }
    out.claim_set.tags = collect_tags(out.claim_set.claims);
    return out;
}

std::string render_decomposition(const ClaimSet& cs, const StepMarkers& markers) {
    std::string out = markers.step1;
    if (cs.entity_reasoning) out += " " + *cs.entity_reasoning;
    out += "\n" + markers.step2 + "\n" + markers.step3 + "\n";
    for (const auto& c : cs.claims) {
        out += std::to_string(c.index) + ". " + c.text + "\n";
    }
    return out;
}

Decomposition decompose(const Question& q, const PromptPack& pack, Provider& provider,
                        const DecomposeOptions& opts) {
    const auto prompt = build_decomposition_prompt(q, pack);
    const auto resp = provider.complete({opts.model, prompt, opts.temperature, opts.max_tokens});
    auto result = parse_decomposition(resp.text, pack.markers);
    result.claim_set.question_id = q.id;
    return result;
}

}  // namespace abcd
