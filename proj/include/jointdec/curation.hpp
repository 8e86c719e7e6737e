#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace jointdec {

// QA data curation: rewrite the short answer into a sentence, synthesize
// question and answer audio, transcribe the answer audio, and drop pairs whose
// answer WER exceeds the threshold.

using AudioRef = std::string;

struct QaSourceRecord {
    std::string id;
    std::string question_text;
    std::string answer_phrase;
};

enum class CurationStatus : std::uint8_t { Kept, Dropped };
enum class DropReason : std::uint8_t { None, WerTooHigh, ClientError };

std::string_view to_string(CurationStatus s);
std::string_view to_string(DropReason r);

struct CuratedRecord {
    std::string id;
    std::string question_text;
    std::string answer_phrase;
    std::string answer_sentence;
    AudioRef question_audio_ref;
    AudioRef answer_audio_ref;
    std::string answer_transcript;
    std::optional<double> answer_wer;
    int speaker_id = 0;
    CurationStatus status = CurationStatus::Dropped;
    DropReason reason = DropReason::None;
    std::string error_stage;  // "rewrite" | "tts" | "asr" on ClientError
    std::string error_message;

    bool operator==(const CuratedRecord&) const = default;
};

// External services. Any client may throw; the record is then dropped with
// reason ClientError and the stage name.
struct ClientSuite {
    std::function<std::string(std::string_view question, std::string_view answer_phrase)> rewrite;
    std::function<AudioRef(std::string_view text, int speaker_id)> synthesize;
    std::function<std::string(const AudioRef& audio)> transcribe;
};

struct NoiseSpec {
    double deletion_rate = 0.0;
    double substitution_rate = 0.0;
};

// Deterministic stand-ins. The rewriter emits "The answer is {phrase}."; tts
// returns a content-hash handle; asr returns the normalized text behind the
// handle with per-word deletions/substitutions drawn from (seed, handle).
ClientSuite mock_clients(std::uint64_t seed, NoiseSpec noise = {});

struct CurationOptions {
    double wer_threshold = 0.20;
    int speaker_pool_size = 1000;
    std::uint64_t seed = 0;
    unsigned workers = 1;
};

struct CurationSummary {
    std::size_t total = 0;
    std::size_t kept = 0;
    std::size_t dropped_wer = 0;
    std::size_t dropped_client = 0;
    std::map<std::string, std::size_t> client_errors_by_stage;
};

struct CurationResult {
    std::vector<CuratedRecord> records;  // input order
    CurationSummary summary;
};

// Speaker ids for `count` records: successive passes over independently
// shuffled decks of [0, pool), so any pool-sized window covers every id.
std::vector<int> draw_speakers(std::size_t count, int pool, std::uint64_t seed);

CurationResult curate(std::span<const QaSourceRecord> records, const ClientSuite& clients,
                      const CurationOptions& opts);

void from_json(const nlohmann::json& j, QaSourceRecord& r);
void to_json(nlohmann::json& j, const CuratedRecord& r);
void to_json(nlohmann::json& j, const CurationSummary& s);

}  // namespace jointdec
