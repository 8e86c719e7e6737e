#include "jointdec/demux.hpp"

namespace jointdec {

std::string_view to_string(EventKind k) {
    switch (k) {
        case EventKind::TextToken: return "text";
        case EventKind::TextDone: return "text_done";
        case EventKind::SpeechToken: return "speech";
        case EventKind::SpeechDone: return "speech_done";
        case EventKind::StreamDone: return "done";
    }
    return "done";
}

std::string_view to_string(DemuxErrorKind k) {
    switch (k) {
        case DemuxErrorKind::WrongChannel: return "WrongChannel";
        case DemuxErrorKind::PadBeforeEos: return "PadBeforeEos";
        case DemuxErrorKind::UnexpectedMarker: return "UnexpectedMarker";
        case DemuxErrorKind::TokenAfterFinish: return "TokenAfterFinish";
        case DemuxErrorKind::UnknownToken: return "UnknownToken";
        case DemuxErrorKind::TruncatedStream: return "TruncatedStream";
        case DemuxErrorKind::MissingMarker: return "MissingMarker";
        case DemuxErrorKind::TextAfterEos: return "TextAfterEos";
        case DemuxErrorKind::BadFill: return "BadFill";
    }
    return "Unknown";
}

DemuxError::DemuxError(DemuxErrorKind kind, std::size_t index)
    : std::runtime_error(std::string(to_string(kind)) + " at index " + std::to_string(index)),
      kind_(kind),
      index_(index) {}

Demuxer::Demuxer(const VocabSpec& vocab, Pattern pattern, InterleaveConfig cfg)
    : vocab_(vocab), pattern_(pattern), cfg_(cfg), period_(0) {
    vocab_.validate();
    if (pattern_ == Pattern::Parallel) cfg_.r_text = 1;
    cfg_.validate();
    period_ = cfg_.r_text + cfg_.r_speech;
}

Demuxer Demuxer::parallel(const VocabSpec& vocab, int k, bool append_speech_eos) {
    return Demuxer(vocab, Pattern::Parallel, InterleaveConfig{1, k, append_speech_eos});
}

void Demuxer::fail(DemuxErrorKind kind, std::size_t index) {
    phase_ = DemuxPhase::Failed;
    error_.emplace(kind, index);
    throw *error_;
}

void Demuxer::advance_cursor() {
    if (++cursor_ == period_) cursor_ = 0;
}

template <class Emit>
void Demuxer::step(TokenId token, Emit&& emit) {
    const std::size_t at = index_;
    if (phase_ == DemuxPhase::Failed) throw *error_;
    if (phase_ == DemuxPhase::Finished) fail(DemuxErrorKind::TokenAfterFinish, at);

    const TokenClass cls = vocab_.classify(token);
    if (cls == TokenClass::Unknown) fail(DemuxErrorKind::UnknownToken, at);

    if (awaiting_marker_) {
        if (cls == TokenClass::Marker) {
            awaiting_marker_ = false;
            marker_seen_ = true;
            phase_ = DemuxPhase::SpeechOnly;
            ++index_;
            if (marker_cb_) marker_cb_(at);
            return;
        }
        fail(is_speech_class(cls) ? DemuxErrorKind::WrongChannel : DemuxErrorKind::MissingMarker, at);
    }

    if (phase_ == DemuxPhase::SpeechOnly) {
        switch (cls) {
            case TokenClass::SpeechContent:
                pair_.speech_tokens.push_back(token);
                emit(DemuxEvent{EventKind::SpeechToken, token, at});
                last_was_speech_ = true;
                break;
            case TokenClass::SpeechEos:
                pair_.speech_tokens.push_back(token);
                emit(DemuxEvent{EventKind::SpeechDone, 0, at});
                emit(DemuxEvent{EventKind::StreamDone, 0, at});
                phase_ = DemuxPhase::Finished;
                last_was_speech_ = false;
                break;
            case TokenClass::Marker: fail(DemuxErrorKind::UnexpectedMarker, at);
            default: fail(DemuxErrorKind::WrongChannel, at);
        }
        ++index_;
        return;
    }

    if (draining_) {
        if (cls != TokenClass::SpeechEos) {
            if (is_text_class(cls)) fail(DemuxErrorKind::WrongChannel, at);
            if (cls == TokenClass::Marker) fail(DemuxErrorKind::UnexpectedMarker, at);
            fail(DemuxErrorKind::BadFill, at);
        }
        ++index_;
        advance_cursor();
        if (cursor_ == 0) {
            draining_ = false;
            phase_ = DemuxPhase::Finished;
            emit(DemuxEvent{EventKind::StreamDone, 0, at});
        }
        return;
    }

    if (cls == TokenClass::Marker) fail(DemuxErrorKind::UnexpectedMarker, at);

    if (cursor_ < cfg_.r_text) {
        switch (cls) {
            case TokenClass::TextContent:
                if (text_done_) fail(DemuxErrorKind::TextAfterEos, at);
                pair_.text_tokens.push_back(token);
                emit(DemuxEvent{EventKind::TextToken, token, at});
                break;
            case TokenClass::TextEos:
                if (text_done_) fail(DemuxErrorKind::TextAfterEos, at);
                pair_.text_tokens.push_back(token);
                text_done_ = true;
                emit(DemuxEvent{EventKind::TextDone, 0, at});
                if (pattern_ == Pattern::EarlyStopInterleaved) awaiting_marker_ = true;
                break;
            case TokenClass::TextPad:
                if (!text_done_) fail(DemuxErrorKind::PadBeforeEos, at);
                ++pads_;
                break;
            default: fail(DemuxErrorKind::WrongChannel, at);
        }
        last_was_speech_ = false;
    } else {
        switch (cls) {
            case TokenClass::SpeechContent:
                pair_.speech_tokens.push_back(token);
                emit(DemuxEvent{EventKind::SpeechToken, token, at});
                last_was_speech_ = true;
                break;
            case TokenClass::SpeechEos:
                if (!text_done_) fail(DemuxErrorKind::TruncatedStream, at);
                pair_.speech_tokens.push_back(token);
                emit(DemuxEvent{EventKind::SpeechDone, 0, at});
                last_was_speech_ = false;
                if (pattern_ == Pattern::Parallel && cursor_ + 1 < period_) {
                    draining_ = true;
                } else {
                    phase_ = DemuxPhase::Finished;
                    emit(DemuxEvent{EventKind::StreamDone, 0, at});
                }
                break;
            default: fail(DemuxErrorKind::WrongChannel, at);
        }
    }
    ++index_;
    advance_cursor();
}

void Demuxer::feed(TokenId token) {
    step(token, [](const DemuxEvent&) {});
}

void Demuxer::feed(TokenId token, std::vector<DemuxEvent>& events) {
    step(token, [&events](const DemuxEvent& e) { events.push_back(e); });
}

ChannelPair Demuxer::finish(std::vector<DemuxEvent>* events) {
    if (phase_ == DemuxPhase::Failed) throw *error_;
    if (phase_ == DemuxPhase::Finished) return pair_;
    const bool closable = !cfg_.append_speech_eos && text_done_ && !awaiting_marker_ &&
                          last_was_speech_ &&
                          (pattern_ != Pattern::EarlyStopInterleaved || phase_ == DemuxPhase::SpeechOnly);
    if (!closable) fail(DemuxErrorKind::TruncatedStream, index_);
    phase_ = DemuxPhase::Finished;
    if (events) {
        events->push_back(DemuxEvent{EventKind::SpeechDone, 0, index_});
        events->push_back(DemuxEvent{EventKind::StreamDone, 0, index_});
    }
    return pair_;
}

ChannelPair demux_tokens(std::span<const TokenId> tokens, Pattern pattern, const InterleaveConfig& cfg,
                         const VocabSpec& vocab, std::vector<DemuxEvent>* events) {
    Demuxer d(vocab, pattern, cfg);
    if (events) {
        for (TokenId t : tokens) d.feed(t, *events);
    } else {
        for (TokenId t : tokens) d.feed(t);
    }
    return d.finish(events);
}

ChannelPair demux_all(const MixedSequence& seq, const VocabSpec& vocab, std::vector<DemuxEvent>* events) {
    return demux_tokens(seq.tokens, seq.pattern, seq.config, vocab, events);
}

ChannelPair demux_all(const FrameSequence& seq, const VocabSpec& vocab, std::vector<DemuxEvent>* events) {
    for (std::size_t i = 0; i < seq.frames.size(); ++i) {
        const auto n = seq.frames[i].speech_slots.size();
        const bool last = i + 1 == seq.frames.size();
        if (n > static_cast<std::size_t>(seq.k) || (n < static_cast<std::size_t>(seq.k) && !last) ||
            (seq.append_speech_eos && n != static_cast<std::size_t>(seq.k)))
            throw InvalidInput("frame " + std::to_string(i) + " has " + std::to_string(n) +
                               " speech slots, expected " + std::to_string(seq.k));
    }
    const TokenSeq flat = seq.flatten();
    return demux_tokens(flat, Pattern::Parallel, InterleaveConfig{1, seq.k, seq.append_speech_eos}, vocab,
                        events);
}

}  // namespace jointdec
