#pragma once

#include "abcd/core_model.hpp"

#include <json.hpp>

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

// JSON mapping for the domain types. Field names follow the struct members;
// absent optionals are omitted. Fractions are {"num", "den", "value"} with
// "value" informational only.
namespace abcd {

using nlohmann::json;

void to_json(json& j, const Fraction& f);
void from_json(const json& j, Fraction& f);

void to_json(json& j, const Question& q);
void from_json(const json& j, Question& q);

void to_json(json& j, const ClaimTemplate& c);
void from_json(const json& j, ClaimTemplate& c);

void to_json(json& j, const ClaimSet& cs);
void from_json(const json& j, ClaimSet& cs);

void to_json(json& j, const AnswerAssignment& a);
void from_json(const json& j, AnswerAssignment& a);

void to_json(json& j, const VerificationResult& r);
void from_json(const json& j, VerificationResult& r);

void to_json(json& j, const QuestionEvaluation& e);
void from_json(const json& j, QuestionEvaluation& e);

void to_json(json& j, const GroundTruthCounts& g);
void from_json(const json& j, GroundTruthCounts& g);

void to_json(json& j, const AggregateReport& r);
void from_json(const json& j, AggregateReport& r);

/// One compact JSON document per line.
template <typename T>
std::string to_jsonl(const std::vector<T>& items) {
    std::string out;
    for (const auto& item : items) {
        out += json(item).dump();
        out += '\n';
    }
    return out;
}

/// Parses every non-blank line; throws std::runtime_error naming the line on
/// the first failure.
template <typename T>
std::vector<T> from_jsonl(const std::string& text, const std::string& origin = "<input>") {
    std::vector<T> items;
    std::size_t line_no = 0;
    std::size_t start = 0;
    while (start < text.size()) {
        auto nl = text.find('\n', start);
        if (nl == std::string::npos) nl = text.size();
        ++line_no;
        const auto line = std::string_view(text).substr(start, nl - start);
        start = nl + 1;
        if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
        try {
            items.push_back(json::parse(line).get<T>());
        } catch (const std::exception& e) {
            throw std::runtime_error(origin + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    return items;
}

std::vector<QuestionEvaluation> read_evaluations(const std::filesystem::path& path);
void write_evaluations(const std::filesystem::path& path, const std::vector<QuestionEvaluation>& records);

}  // namespace abcd
