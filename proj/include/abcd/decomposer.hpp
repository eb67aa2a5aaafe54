#pragma once

#include "abcd/core_model.hpp"
#include "abcd/provider.hpp"

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace abcd {

struct StepMarkers {
    std::string step1 = "Step 1:";
    std::string step2 = "Step 2:";
    std::string step3 = "Step 3:";
};

/// Few-shot bundle for claim decomposition: instructions plus 5-7 worked
/// examples, each a complete question -> step 1/2/3 transcript.
struct PromptPack {
    std::string instructions;
    std::vector<std::string> examples;
    StepMarkers markers;
    /// Line introducing the target question; "{question}" is substituted.
    std::string question_template = "Question: {question}";
};

inline constexpr std::size_t kMinPackExamples = 5;
inline constexpr std::size_t kMaxPackExamples = 7;

/// Loads instructions.txt, examples.txt (blocks separated by a line holding
/// only "---") and the optional pack.json overriding markers.
PromptPack load_prompt_pack(const std::filesystem::path& dir);

/// Throws std::invalid_argument naming the first problem found.
void validate_prompt_pack(const PromptPack& pack);

class DecompositionParseError : public std::runtime_error {
public:
    enum class Kind { MissingStepMarker, NoClaims, UnnumberedLine, ClaimWithoutAnswerTag };

    DecompositionParseError(Kind kind, std::optional<int> line);

    Kind kind() const { return kind_; }
    const std::optional<int>& line() const { return line_; }

private:
    Kind kind_;
    std::optional<int> line_;
};

/// Non-fatal finding while parsing step-3 output.
struct DecompositionWarning {
    DecompositionParseError::Kind kind;
    int line = 0;                    // 1-based line in the raw text
    std::optional<int> claim_index;  // set for ClaimWithoutAnswerTag

    friend bool operator==(const DecompositionWarning&, const DecompositionWarning&) = default;
};

struct Decomposition {
    ClaimSet claim_set;
    std::vector<DecompositionWarning> warnings;
};

std::string build_decomposition_prompt(const Question& q, const PromptPack& pack);

/// Parses the claims following the step-3 marker. Malformed lines become
/// warnings; only a missing marker or an empty claim list throw.
Decomposition parse_decomposition(std::string_view raw, const StepMarkers& markers = {});

/// Canonical transcript of a claim set; parse_decomposition() reads it back
/// to an equal value.
std::string render_decomposition(const ClaimSet& cs, const StepMarkers& markers = {});

struct DecomposeOptions {
    std::string model = "decompose-model";
    double temperature = 0.0;
    int max_tokens = 512;
};

Decomposition decompose(const Question& q, const PromptPack& pack, Provider& provider,
                        const DecomposeOptions& opts = {});

}  // namespace abcd
