#include "abcd/pipeline.hpp"
#include "abcd/serialization.hpp"
#include "abcd/text_util.hpp"

#include <istream>
#include <ostream>
#include <set>

namespace abcd {

namespace {

enum class Key { correct, incorrect, skip, quit };

std::optional<Key> key_from(std::string_view token) {
    const auto t = ascii_lower(token);
    if (t == "c" || t == "correct") return Key::correct;
    if (t == "i" || t == "incorrect") return Key::incorrect;
    if (t == "s" || t == "skip") return Key::skip;
    if (t == "q" || t == "quit") return Key::quit;
    return std::nullopt;
}

void show(const QuestionEvaluation& rec, std::size_t pos, std::size_t total, std::ostream& out) {
    const auto* answer = rec.assignment.empty() ? nullptr : &rec.assignment.answer();
    out << "\n[" << pos << "/" << total << "] " << rec.question.id << "\n"
        << "Q:    " << rec.question.text << "\n"
        << "Gold: " << rec.question.gold_answer << "\n"
        << "Pred: " << (answer ? *answer : std::string("(none)")) << "\n";
}

}  // namespace

AnnotateSummary annotate(const std::vector<QuestionEvaluation>& records, const std::filesystem::path& labels_path,
                         std::istream& in, std::ostream& out) {
    std::vector<Label> labels;
    if (std::filesystem::exists(labels_path)) labels = read_labels(labels_path);
    std::set<std::string> done;
    for (const auto& l : labels) done.insert(l.question_id);

    AnnotateSummary summary;
    std::size_t pos = 0;
    for (const auto& rec : records) {
        ++pos;
        if (done.contains(rec.question.id)) continue;
        show(rec, pos, records.size(), out);

        std::optional<Key> key;
        std::string rest;
        std::string line;
        while (!key) {
            out << "[c]orrect / [i]ncorrect [category] / [s]kip / [q]uit > " << std::flush;
            if (!std::getline(in, line)) return summary;
            const auto trimmed = trim(line);
            const auto sp = trimmed.find_first_of(" \t");
            key = key_from(trimmed.substr(0, sp));
            rest = sp == std::string::npos ? "" : trim(std::string_view(trimmed).substr(sp));
            if (!key) out << "unrecognized input\n";
        }

        if (*key == Key::quit) {
            summary.quit = true;
            return summary;
        }
        if (*key == Key::skip) {
            ++summary.skipped;
            continue;
        }
        Label l{rec.question.id, *key == Key::correct, std::nullopt};
        if (!rest.empty()) l.error_category = rest;
        labels.push_back(std::move(l));
        done.insert(rec.question.id);
        write_labels(labels_path, labels);
        ++summary.labeled;
    }
    return summary;
}

int cmd_annotate(const std::filesystem::path& records_path, const std::filesystem::path& labels_path,
                 std::istream& in, std::ostream& out) {
    const auto records = read_evaluations(records_path);
    const auto s = annotate(records, labels_path, in, out);
    out << "\nlabeled " << s.labeled << ", skipped " << s.skipped << " -> " << labels_path.string() << "\n";
    return exit_code::ok;
}

}  // namespace abcd
