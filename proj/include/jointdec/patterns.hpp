#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "jointdec/vocab.hpp"

namespace jointdec {

using TokenSeq = std::vector<TokenId>;

// The demultiplexed form. Each channel ends with its own EOS id; the speech
// EOS is absent when the layout runs with append_speech_eos = false.
struct ChannelPair {
    TokenSeq text_tokens;
    TokenSeq speech_tokens;

    // Throws InvalidInput on a malformed channel.
    void validate(const VocabSpec& vocab, bool speech_eos = true) const;

    bool operator==(const ChannelPair&) const = default;
};

struct InterleaveConfig {
    int r_text = 1;
    int r_speech = 2;
    bool append_speech_eos = true;

    void validate() const;

    bool operator==(const InterleaveConfig&) const = default;
};

// Parses "R_T:R_S", e.g. "5:10".
InterleaveConfig parse_ratio(std::string_view ratio);

enum class Pattern : std::uint8_t { Interleaved, EarlyStopInterleaved, Parallel };

std::string_view to_string(Pattern p);
// Accepts "interleaved", "esi", "parallel".
Pattern parse_pattern(std::string_view name);

struct MixedSequence {
    TokenSeq tokens;
    Pattern pattern = Pattern::Interleaved;
    InterleaveConfig config;

    bool operator==(const MixedSequence&) const = default;
};

struct Frame {
    TokenId text_slot = 0;
    TokenSeq speech_slots;

    bool operator==(const Frame&) const = default;
};

struct FrameSequence {
    std::vector<Frame> frames;
    int k = 1;
    bool append_speech_eos = true;

    // Text-slot-first flattening: t0 s0..sk-1 t1 ...
    TokenSeq flatten() const;

    bool operator==(const FrameSequence&) const = default;
};

enum class MuxErrorKind : std::uint8_t { SpeechUnderrun };

class MuxError : public std::runtime_error {
public:
    MuxError(MuxErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    MuxErrorKind kind() const noexcept { return kind_; }

private:
    MuxErrorKind kind_;
};

// Fixed-ratio interleave: chunks of r_text text slots then r_speech speech
// slots. Exhausted text is padded with pad_text_id; the sequence ends at the
// last speech token.
MixedSequence mux_interleaved(const ChannelPair& pair, const InterleaveConfig& cfg,
                              const VocabSpec& vocab);

// Early-stop interleave: same chunking until the text EOS, then the marker and
// every remaining speech token. Never emits pad_text_id.
MixedSequence mux_esi(const ChannelPair& pair, const InterleaveConfig& cfg, const VocabSpec& vocab);

// One text slot plus k speech slots per frame. The last frame is filled with
// eos_speech_id repetitions when append_speech_eos is set, otherwise it may be short.
FrameSequence mux_parallel(const ChannelPair& pair, int k, const VocabSpec& vocab,
                           bool append_speech_eos = true);

// Dispatches on pattern; Parallel uses cfg.r_speech as k.
TokenSeq mux_tokens(const ChannelPair& pair, Pattern pattern, const InterleaveConfig& cfg,
                    const VocabSpec& vocab);

// Number of pad_text_id slots the interleaved layout would need.
std::size_t interleaved_pad_count(std::size_t text_len, std::size_t speech_len,
                                  const InterleaveConfig& cfg);

}  // namespace jointdec
