#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "jointdec/patterns.hpp"

namespace jointdec {

inline constexpr double kDefaultTokensPerSecond = 25.0;

struct LengthReport {
    std::size_t len_interleaved = 0;
    std::size_t len_esi = 0;
    std::size_t pad_count = 0;
    // len_esi / len_interleaved. Exceeds 1 by the marker's cost on pad-free pairs.
    double reduction = 0.0;
    std::size_t first_speech_interleaved = 0;
    std::size_t first_speech_esi = 0;
    double est_audio_seconds = 0.0;
};

// Lengths come from running both muxers, not from a closed form.
LengthReport length_report(const ChannelPair& pair, const InterleaveConfig& cfg, const VocabSpec& vocab,
                           double tokens_per_second = kDefaultTokensPerSecond);

struct Distribution {
    double mean = 0.0;
    double p50 = 0.0;
    double p90 = 0.0;
    double p99 = 0.0;
};

struct RecordFailure {
    std::string id;
    std::string error;
};

struct CorpusReport {
    std::size_t records = 0;  // successfully measured
    Distribution len_interleaved;
    Distribution len_esi;
    double mean_reduction = 0.0;
    std::size_t total_pads = 0;
    std::size_t total_text = 0;          // text tokens including EOS
    std::size_t total_text_content = 0;  // excluding EOS
    // total pads / total text tokens, EOS counted as text.
    double pad_to_text_ratio = 0.0;
    double pad_to_text_ratio_excl_eos = 0.0;
    double total_audio_seconds = 0.0;
    std::vector<RecordFailure> failures;
};

struct IdentifiedPair {
    std::string id;
    ChannelPair pair;
};

// Throws InvalidInput when no record could be measured. Per-record mux errors
// are collected in failures. Statistics do not depend on record order.
CorpusReport corpus_report(std::span<const IdentifiedPair> pairs, const InterleaveConfig& cfg,
                           const VocabSpec& vocab, double tokens_per_second = kDefaultTokensPerSecond);

// Incremental form of corpus_report for streaming input.
class CorpusAccumulator {
public:
    CorpusAccumulator(InterleaveConfig cfg, VocabSpec vocab, double tokens_per_second = kDefaultTokensPerSecond);

    void add(const std::string& id, const ChannelPair& pair);
    void merge(const CorpusAccumulator& other);
    CorpusReport report() const;

private:
    InterleaveConfig cfg_;
    VocabSpec vocab_;
    double tps_;
    std::vector<double> len_int_;
    std::vector<double> len_esi_;
    std::vector<double> reductions_;
    std::size_t pads_ = 0;
    std::size_t text_ = 0;
    std::size_t text_content_ = 0;
    std::size_t speech_content_ = 0;
    std::vector<RecordFailure> failures_;
};

struct ExpectedReduction {
    // Marker cost dropped; the long-text limit.
    double asymptotic = 1.0;
    // Marker counted once against a text channel of text_len tokens.
    double with_marker = 1.0;
};

// Closed form: with T text tokens, P = ratio*T pads and S = (T+P)*r_speech/r_text
// speech tokens, (T + 1 + S) / (T + P + S).
ExpectedReduction expected_reduction(double pad_to_text_ratio, const InterleaveConfig& cfg,
                                     double text_len = 1.0);

void to_json(nlohmann::json& j, const LengthReport& r);
void to_json(nlohmann::json& j, const Distribution& d);
void to_json(nlohmann::json& j, const CorpusReport& r);

}  // namespace jointdec
