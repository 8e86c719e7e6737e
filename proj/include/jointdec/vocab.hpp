#pragma once

#include <cstdint>
#include <stdexcept>
#include <string_view>

#include <json.hpp>

namespace jointdec {

using TokenId = std::int64_t;

// Half-open interval [begin, end).
struct TokenRange {
    TokenId begin = 0;
    TokenId end = 0;

    constexpr bool contains(TokenId t) const { return t >= begin && t < end; }
    constexpr bool empty() const { return end <= begin; }
    constexpr TokenId size() const { return empty() ? 0 : end - begin; }

    bool operator==(const TokenRange&) const = default;
};

enum class TokenClass : std::uint8_t {
    TextContent,
    TextEos,
    TextPad,
    Marker,
    SpeechContent,
    SpeechEos,
    Unknown,
};

std::string_view to_string(TokenClass c);

constexpr bool is_text_class(TokenClass c) {
    return c == TokenClass::TextContent || c == TokenClass::TextEos || c == TokenClass::TextPad;
}

constexpr bool is_speech_class(TokenClass c) {
    return c == TokenClass::SpeechContent || c == TokenClass::SpeechEos;
}

class InvalidInput : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Token-id universe shared by every muxer and demuxer. Text EOS and PAD live
// inside the text range, speech EOS inside the speech range, and the <S>
// marker outside both.
struct VocabSpec {
    TokenRange text_range{0, 4096};
    TokenRange speech_range{4096, 10646};
    TokenId eos_text_id = 4094;
    TokenId pad_text_id = 4095;
    TokenId marker_id = 10646;
    TokenId eos_speech_id = 10645;

    // Throws InvalidInput naming the first violated invariant.
    void validate() const;

    constexpr TokenClass classify(TokenId t) const {
        if (t == eos_text_id) return TokenClass::TextEos;
        if (t == pad_text_id) return TokenClass::TextPad;
        if (t == marker_id) return TokenClass::Marker;
        if (t == eos_speech_id) return TokenClass::SpeechEos;
        if (text_range.contains(t)) return TokenClass::TextContent;
        if (speech_range.contains(t)) return TokenClass::SpeechContent;
        return TokenClass::Unknown;
    }

    bool operator==(const VocabSpec&) const = default;
};

inline TokenClass classify(const VocabSpec& vocab, TokenId token) { return vocab.classify(token); }

void to_json(nlohmann::json& j, const VocabSpec& v);
// Accepts ranges as two-element arrays [begin, end). Validates the result.
void from_json(const nlohmann::json& j, VocabSpec& v);

}  // namespace jointdec
