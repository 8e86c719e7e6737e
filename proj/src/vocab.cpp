#include "jointdec/vocab.hpp"

#include <array>
#include <string>

namespace jointdec {

std::string_view to_string(TokenClass c) {
    switch (c) {
        case TokenClass::TextContent: return "TextContent";
        case TokenClass::TextEos: return "TextEos";
        case TokenClass::TextPad: return "TextPad";
        case TokenClass::Marker: return "Marker";
        case TokenClass::SpeechContent: return "SpeechContent";
        case TokenClass::SpeechEos: return "SpeechEos";
        case TokenClass::Unknown: return "Unknown";
    }
    return "Unknown";
}

void VocabSpec::validate() const {
    if (text_range.empty()) throw InvalidInput("vocab: text_range is empty");
    if (speech_range.empty()) throw InvalidInput("vocab: speech_range is empty");
    if (text_range.begin < speech_range.end && speech_range.begin < text_range.end)
        throw InvalidInput("vocab: text_range and speech_range overlap");
    if (!text_range.contains(eos_text_id)) throw InvalidInput("vocab: eos_text_id outside text_range");
    if (!text_range.contains(pad_text_id)) throw InvalidInput("vocab: pad_text_id outside text_range");
    if (!speech_range.contains(eos_speech_id))
        throw InvalidInput("vocab: eos_speech_id outside speech_range");
    if (text_range.contains(marker_id) || speech_range.contains(marker_id))
        throw InvalidInput("vocab: marker_id must lie outside both ranges");
    const std::array ids{eos_text_id, pad_text_id, marker_id, eos_speech_id};
    for (std::size_t i = 0; i < ids.size(); ++i)
        for (std::size_t j = i + 1; j < ids.size(); ++j)
            if (ids[i] == ids[j]) throw InvalidInput("vocab: special ids must be pairwise distinct");
}

void to_json(nlohmann::json& j, const VocabSpec& v) {
    j = nlohmann::json{
        {"text_range", {v.text_range.begin, v.text_range.end}},
        {"speech_range", {v.speech_range.begin, v.speech_range.end}},
        {"eos_text_id", v.eos_text_id},
        {"pad_text_id", v.pad_text_id},
        {"marker_id", v.marker_id},
        {"eos_speech_id", v.eos_speech_id},
    };
}

namespace {

TokenRange range_from_json(const nlohmann::json& j, const char* name) {
    const auto& r = j.at(name);
    if (!r.is_array() || r.size() != 2)
        throw InvalidInput(std::string("vocab: ") + name + " must be [begin, end)");
    return {r[0].get<TokenId>(), r[1].get<TokenId>()};
}

}  // namespace

void from_json(const nlohmann::json& j, VocabSpec& v) {
    v.text_range = range_from_json(j, "text_range");
    v.speech_range = range_from_json(j, "speech_range");
    v.eos_text_id = j.at("eos_text_id").get<TokenId>();
    v.pad_text_id = j.at("pad_text_id").get<TokenId>();
    v.marker_id = j.at("marker_id").get<TokenId>();
    v.eos_speech_id = j.at("eos_speech_id").get<TokenId>();
    v.validate();
}

}  // namespace jointdec
