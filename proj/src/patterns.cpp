#include "jointdec/patterns.hpp"

#include <charconv>
#include <string>

namespace jointdec {

namespace {

void check_channel(const TokenSeq& seq, const VocabSpec& vocab, TokenClass content, TokenId eos,
                   bool needs_eos, const char* name) {
    if (seq.empty()) throw InvalidInput(std::string(name) + " channel is empty");
    const std::size_t body = needs_eos ? seq.size() - 1 : seq.size();
    if (needs_eos && seq.back() != eos)
        throw InvalidInput(std::string(name) + " channel does not end with its EOS id");
    for (std::size_t i = 0; i < body; ++i) {
        if (vocab.classify(seq[i]) != content)
            throw InvalidInput(std::string(name) + " channel has a non-content token at position " +
                               std::to_string(i));
    }
}

[[noreturn]] void underrun(std::size_t text_left) {
    throw MuxError(MuxErrorKind::SpeechUnderrun,
                   "SpeechUnderrun: speech channel exhausted with " + std::to_string(text_left) +
                       " text token(s) unemitted");
}

}  // namespace

void ChannelPair::validate(const VocabSpec& vocab, bool speech_eos) const {
    check_channel(text_tokens, vocab, TokenClass::TextContent, vocab.eos_text_id, true, "text");
    check_channel(speech_tokens, vocab, TokenClass::SpeechContent, vocab.eos_speech_id, speech_eos,
                  "speech");
}

void InterleaveConfig::validate() const {
    if (r_text < 1 || r_speech < 1) throw InvalidInput("interleave ratio terms must be >= 1");
}

InterleaveConfig parse_ratio(std::string_view ratio) {
    const auto colon = ratio.find(':');
    if (colon == std::string_view::npos)
        throw InvalidInput("ratio must look like R_T:R_S, got '" + std::string(ratio) + "'");
    auto parse_term = [&](std::string_view s) {
        int v = 0;
        const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc{} || ptr != s.data() + s.size() || v < 1)
            throw InvalidInput("ratio terms must be positive integers, got '" + std::string(ratio) + "'");
        return v;
    };
    InterleaveConfig cfg;
    cfg.r_text = parse_term(ratio.substr(0, colon));
    cfg.r_speech = parse_term(ratio.substr(colon + 1));
    return cfg;
}

std::string_view to_string(Pattern p) {
    switch (p) {
        case Pattern::Interleaved: return "interleaved";
        case Pattern::EarlyStopInterleaved: return "esi";
        case Pattern::Parallel: return "parallel";
    }
    return "interleaved";
}

Pattern parse_pattern(std::string_view name) {
    if (name == "interleaved") return Pattern::Interleaved;
    if (name == "esi") return Pattern::EarlyStopInterleaved;
    if (name == "parallel") return Pattern::Parallel;
    throw InvalidInput("unknown pattern '" + std::string(name) + "'");
}

TokenSeq FrameSequence::flatten() const {
    TokenSeq out;
    out.reserve(frames.size() * (static_cast<std::size_t>(k) + 1));
    for (const auto& f : frames) {
        out.push_back(f.text_slot);
        out.insert(out.end(), f.speech_slots.begin(), f.speech_slots.end());
    }
    return out;
}

MixedSequence mux_interleaved(const ChannelPair& pair, const InterleaveConfig& cfg,
                              const VocabSpec& vocab) {
    cfg.validate();
    pair.validate(vocab, cfg.append_speech_eos);
    const auto& text = pair.text_tokens;
    const auto& speech = pair.speech_tokens;

    MixedSequence out{{}, Pattern::Interleaved, cfg};
    const std::size_t chunks = (speech.size() + cfg.r_speech - 1) / cfg.r_speech;
    out.tokens.reserve(chunks * static_cast<std::size_t>(cfg.r_text) + speech.size());

    std::size_t ti = 0;
    std::size_t si = 0;
    while (si < speech.size()) {
        for (int j = 0; j < cfg.r_text; ++j)
            out.tokens.push_back(ti < text.size() ? text[ti++] : vocab.pad_text_id);
        for (int j = 0; j < cfg.r_speech && si < speech.size(); ++j) out.tokens.push_back(speech[si++]);
    }
    if (ti < text.size()) underrun(text.size() - ti);
    return out;
}

MixedSequence mux_esi(const ChannelPair& pair, const InterleaveConfig& cfg, const VocabSpec& vocab) {
    cfg.validate();
    pair.validate(vocab, cfg.append_speech_eos);
    const auto& text = pair.text_tokens;
    const auto& speech = pair.speech_tokens;

    MixedSequence out{{}, Pattern::EarlyStopInterleaved, cfg};
    out.tokens.reserve(text.size() + speech.size() + 1);

    std::size_t ti = 0;
    std::size_t si = 0;
    while (true) {
        for (int j = 0; j < cfg.r_text && ti < text.size(); ++j) out.tokens.push_back(text[ti++]);
        if (ti == text.size()) break;
        if (si >= speech.size()) underrun(text.size() - ti);
        for (int j = 0; j < cfg.r_speech && si < speech.size(); ++j) out.tokens.push_back(speech[si++]);
        if (si == speech.size()) underrun(text.size() - ti);
    }
    out.tokens.push_back(vocab.marker_id);
    out.tokens.insert(out.tokens.end(), speech.begin() + static_cast<std::ptrdiff_t>(si), speech.end());
    return out;
}

FrameSequence mux_parallel(const ChannelPair& pair, int k, const VocabSpec& vocab,
                           bool append_speech_eos) {
    if (k < 1) throw InvalidInput("parallel k must be >= 1");
    pair.validate(vocab, append_speech_eos);
    const auto& text = pair.text_tokens;
    const auto& speech = pair.speech_tokens;
    const auto ku = static_cast<std::size_t>(k);
    const std::size_t frame_count = (speech.size() + ku - 1) / ku;
    if (frame_count < text.size()) underrun(text.size() - frame_count);

    FrameSequence out;
    out.k = k;
    out.append_speech_eos = append_speech_eos;
    out.frames.resize(frame_count);
    for (std::size_t i = 0; i < frame_count; ++i) {
        auto& f = out.frames[i];
        f.text_slot = i < text.size() ? text[i] : vocab.pad_text_id;
        const std::size_t lo = i * ku;
        const std::size_t hi = std::min(lo + ku, speech.size());
        f.speech_slots.assign(speech.begin() + static_cast<std::ptrdiff_t>(lo),
                              speech.begin() + static_cast<std::ptrdiff_t>(hi));
        if (append_speech_eos) f.speech_slots.resize(ku, vocab.eos_speech_id);
    }
    return out;
}

TokenSeq mux_tokens(const ChannelPair& pair, Pattern pattern, const InterleaveConfig& cfg,
                    const VocabSpec& vocab) {
    switch (pattern) {
        case Pattern::Interleaved: return mux_interleaved(pair, cfg, vocab).tokens;
        case Pattern::EarlyStopInterleaved: return mux_esi(pair, cfg, vocab).tokens;
        case Pattern::Parallel:
            return mux_parallel(pair, cfg.r_speech, vocab, cfg.append_speech_eos).flatten();
    }
    return {};
}

std::size_t interleaved_pad_count(std::size_t text_len, std::size_t speech_len,
                                  const InterleaveConfig& cfg) {
    const std::size_t chunks = (speech_len + cfg.r_speech - 1) / cfg.r_speech;
    const std::size_t slots = chunks * static_cast<std::size_t>(cfg.r_text);
    return slots > text_len ? slots - text_len : 0;
}

}  // namespace jointdec
