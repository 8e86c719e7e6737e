#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace jointdec {

// Lowercase, ASCII punctuation to spaces, whitespace runs collapsed, trimmed.
// Non-ASCII bytes pass through untouched.
std::string normalize(std::string_view s);

std::vector<std::string> split_words(std::string_view normalized);

struct MatchOptions {
    // Plain substring containment instead of word-aligned containment.
    bool raw_substring = false;
};

// True iff some normalized reference occurs in the normalized output on word
// boundaries. Empty references never match.
bool answer_hit(std::string_view output, std::span<const std::string> references, MatchOptions opts = {});

class EmptyReference : public std::domain_error {
public:
    EmptyReference() : std::domain_error("EmptyReference: WER undefined for an empty reference") {}
};

struct WerBreakdown {
    double wer = 0.0;
    std::size_t substitutions = 0;
    std::size_t deletions = 0;
    std::size_t insertions = 0;
    std::size_t ref_len = 0;

    std::size_t errors() const { return substitutions + deletions + insertions; }
};

// Word-level minimum edit alignment over already tokenized sequences.
WerBreakdown align_words(std::span<const std::string> reference, std::span<const std::string> hypothesis);

// reference = model text output, hypothesis = ASR transcript of the model's
// speech. Both are normalized first. Uncapped; can exceed 1.
WerBreakdown wer(std::string_view reference, std::string_view hypothesis);

struct QaEvalRecord {
    std::string id;
    std::vector<std::string> reference_answers;
    std::string text_output;
    std::optional<std::string> speech_transcript;
};

struct RecordVerdict {
    std::string id;
    bool s2t_hit = false;
    std::optional<bool> s2s_hit;
    std::optional<double> wer;  // empty when no transcript or the reference is empty
};

struct EvalReport {
    std::size_t n = 0;
    std::size_t n_with_transcript = 0;
    std::size_t n_wer = 0;
    std::size_t n_wer_undefined = 0;
    double s2t_accuracy = 0.0;
    double s2s_accuracy = 0.0;
    std::optional<double> rel_ratio;  // undefined when s2t_accuracy == 0
    double mean_wer = 0.0;
    std::vector<RecordVerdict> verdicts;
};

class NoRecords : public std::invalid_argument {
public:
    NoRecords() : std::invalid_argument("NoRecords: evaluation needs at least one record") {}
};

RecordVerdict judge(const QaEvalRecord& record, MatchOptions opts = {});

EvalReport evaluate(std::span<const QaEvalRecord> records, MatchOptions opts = {});

void from_json(const nlohmann::json& j, QaEvalRecord& r);
void to_json(nlohmann::json& j, const EvalReport& r);

// Per-record CSV: id,s2t_hit,s2s_hit,wer
std::string verdicts_csv(const EvalReport& r);

}  // namespace jointdec
