#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <variant>
#include <vector>

#include <json.hpp>

#include "jointdec/demux.hpp"

namespace jointdec {

// Stand-ins for an LM decode loop: token generators that drive a demuxer.

enum class CorruptionMode : std::uint8_t {
    // Replace the token with a random id of the other channel's range.
    OppositeChannel,
    // Replace the token with a uniformly random id over the whole vocab span
    // plus a margin of unknown ids.
    UniformId,
};

struct Generator;

struct ScriptedGen {
    TokenSeq tokens;
};

struct ReplayGen {
    ChannelPair pair;
    Pattern pattern = Pattern::Interleaved;
    InterleaveConfig cfg;
};

struct CorruptingGen {
    std::shared_ptr<const Generator> inner;
    double rate = 0.0;
    std::uint64_t seed = 0;
    CorruptionMode mode = CorruptionMode::OppositeChannel;
};

struct Generator {
    std::variant<ScriptedGen, ReplayGen, CorruptingGen> kind;
};

Generator scripted(TokenSeq tokens);
Generator replay(ChannelPair pair, Pattern pattern, InterleaveConfig cfg);
Generator corrupting(Generator inner, double rate, std::uint64_t seed,
                     CorruptionMode mode = CorruptionMode::OppositeChannel);

// Pull-based token stream over a generator. Replay re-muxes up front and may
// throw MuxError on construction.
class TokenStream {
public:
    TokenStream(const Generator& gen, const VocabSpec& vocab);
    ~TokenStream();
    TokenStream(TokenStream&&) noexcept;
    TokenStream& operator=(TokenStream&&) noexcept;

    std::optional<TokenId> next();
    // Positions (0-based) this stream has corrupted so far, outermost layer.
    const std::vector<std::size_t>& corrupted_positions() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

// Returns a token that differs from `token` per the corruption mode.
TokenId corrupt_token(TokenId token, const VocabSpec& vocab, CorruptionMode mode, std::mt19937_64& rng);

struct RunError {
    DemuxErrorKind kind;
    std::size_t index;

    bool operator==(const RunError&) const = default;
};

struct RunTranscript {
    std::vector<DemuxEvent> events;
    std::optional<RunError> error;  // present iff StreamDone was not reached
    std::optional<ChannelPair> pair;
    std::size_t tokens_consumed = 0;
    std::chrono::nanoseconds elapsed{0};
    double throughput = 0.0;  // tokens per second
    std::vector<std::size_t> corrupted_positions;
};

// Parallel layouts use cfg.r_speech as k.
RunTranscript run(const Generator& gen, Pattern pattern, const InterleaveConfig& cfg, const VocabSpec& vocab);

struct BenchSummary {
    Pattern pattern = Pattern::Interleaved;
    InterleaveConfig cfg;
    std::size_t records = 0;
    int repetitions = 0;
    std::vector<std::size_t> tokens_per_record;
    std::size_t total_tokens = 0;
    double p50_stream_tps = 0.0;
    double p99_stream_tps = 0.0;
    // Aggregate tokens/second of each repetition.
    std::vector<double> rep_aggregate_tps;
    double aggregate_tps = 0.0;
};

// Token streams are deterministic; only timings vary between runs.
BenchSummary bench(std::span<const ChannelPair> corpus, Pattern pattern, const InterleaveConfig& cfg,
                   const VocabSpec& vocab, int repetitions, unsigned workers = 1);

// Mean over records of numerator.tokens[i] / denominator.tokens[i].
double token_count_ratio(const BenchSummary& numerator, const BenchSummary& denominator);

void to_json(nlohmann::json& j, const RunTranscript& t);
void to_json(nlohmann::json& j, const BenchSummary& b);

}  // namespace jointdec
