#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "jointdec/patterns.hpp"

namespace jointdec {

enum class EventKind : std::uint8_t { TextToken, TextDone, SpeechToken, SpeechDone, StreamDone };

// Trace-log spelling: "text", "text_done", "speech", "speech_done", "done".
std::string_view to_string(EventKind k);

struct DemuxEvent {
    EventKind kind = EventKind::StreamDone;
    TokenId id = 0;  // meaningful for TextToken / SpeechToken only
    std::size_t index = 0;

    bool operator==(const DemuxEvent&) const = default;
};

enum class DemuxErrorKind : std::uint8_t {
    WrongChannel,
    PadBeforeEos,
    UnexpectedMarker,
    TokenAfterFinish,
    UnknownToken,
    TruncatedStream,  // stream ended, or speech EOS arrived, with the text channel open
    MissingMarker,   // ESI: token after the text EOS that is not the marker
    TextAfterEos,    // text content or a second EOS in a text slot after TextDone
    BadFill,         // parallel: final-frame fill slot that is not the speech EOS
};

std::string_view to_string(DemuxErrorKind k);

class DemuxError : public std::runtime_error {
public:
    DemuxError(DemuxErrorKind kind, std::size_t index);

    DemuxErrorKind kind() const noexcept { return kind_; }
    std::size_t index() const noexcept { return index_; }

private:
    DemuxErrorKind kind_;
    std::size_t index_;
};

enum class DemuxPhase : std::uint8_t { Chunked, SpeechOnly, Finished, Failed };

// Streaming demultiplexer for one token stream. Validates each token against
// the slot the layout schedules for it and fails fast on the first violation;
// after a failure every further call rethrows the same error.
//
// The parallel layout is driven as a 1:k schedule over the text-slot-first
// flattening of its frames.
class Demuxer {
public:
    Demuxer(const VocabSpec& vocab, Pattern pattern, InterleaveConfig cfg);

    static Demuxer parallel(const VocabSpec& vocab, int k, bool append_speech_eos = true);

    void feed(TokenId token);
    void feed(TokenId token, std::vector<DemuxEvent>& events);

    // Returns the reconstructed pair or throws TruncatedStream. With
    // append_speech_eos off, a stream that ends on speech content after the
    // text EOS closes implicitly (SpeechDone + StreamDone are appended).
    ChannelPair finish(std::vector<DemuxEvent>* events = nullptr);

    // Diagnostic hook; the marker produces no content event.
    void on_marker(std::function<void(std::size_t index)> cb) { marker_cb_ = std::move(cb); }

    DemuxPhase phase() const noexcept { return phase_; }
    std::size_t tokens_consumed() const noexcept { return index_; }
    std::size_t pads_consumed() const noexcept { return pads_; }
    bool marker_seen() const noexcept { return marker_seen_; }
    bool text_done() const noexcept { return text_done_; }
    const ChannelPair& partial() const noexcept { return pair_; }

private:
    template <class Emit>
    void step(TokenId token, Emit&& emit);
    [[noreturn]] void fail(DemuxErrorKind kind, std::size_t index);
    void advance_cursor();

    VocabSpec vocab_;
    Pattern pattern_;
    InterleaveConfig cfg_;
    int period_;

    DemuxPhase phase_ = DemuxPhase::Chunked;
    int cursor_ = 0;
    bool text_done_ = false;
    bool awaiting_marker_ = false;
    bool draining_ = false;
    bool marker_seen_ = false;
    bool last_was_speech_ = false;
    std::size_t index_ = 0;
    std::size_t pads_ = 0;
    std::optional<DemuxError> error_;
    ChannelPair pair_;
    std::function<void(std::size_t)> marker_cb_;
};

// Feeds every token then finishes. Errors carry the offending token index.
ChannelPair demux_tokens(std::span<const TokenId> tokens, Pattern pattern, const InterleaveConfig& cfg,
                         const VocabSpec& vocab, std::vector<DemuxEvent>* events = nullptr);

ChannelPair demux_all(const MixedSequence& seq, const VocabSpec& vocab,
                      std::vector<DemuxEvent>* events = nullptr);
ChannelPair demux_all(const FrameSequence& seq, const VocabSpec& vocab,
                      std::vector<DemuxEvent>* events = nullptr);

}  // namespace jointdec
