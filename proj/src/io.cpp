#include "jointdec/io.hpp"

#include <string>

namespace jointdec {

nlohmann::json pair_to_json(const std::string& id, const ChannelPair& pair) {
    return {{"id", id}, {"text_tokens", pair.text_tokens}, {"speech_tokens", pair.speech_tokens}};
}

IdentifiedPair pair_from_json(const nlohmann::json& j) {
    IdentifiedPair p;
    p.id = j.at("id").get<std::string>();
    p.pair.text_tokens = j.at("text_tokens").get<TokenSeq>();
    p.pair.speech_tokens = j.at("speech_tokens").get<TokenSeq>();
    return p;
}

nlohmann::json mixed_to_json(const std::string& id, const MixedSequence& seq) {
    return {{"id", id},
            {"pattern", to_string(seq.pattern)},
            {"r_text", seq.config.r_text},
            {"r_speech", seq.config.r_speech},
            {"tokens", seq.tokens}};
}

MixedRecord mixed_from_json(const nlohmann::json& j) {
    MixedRecord r;
    r.id = j.at("id").get<std::string>();
    r.seq.pattern = parse_pattern(j.at("pattern").get<std::string>());
    if (r.seq.pattern == Pattern::Parallel) throw InvalidInput("record " + r.id + ": parallel records use frames");
    r.seq.config.r_text = j.at("r_text").get<int>();
    r.seq.config.r_speech = j.at("r_speech").get<int>();
    r.seq.config.validate();
    r.seq.tokens = j.at("tokens").get<TokenSeq>();
    return r;
}

nlohmann::json frames_to_json(const std::string& id, const FrameSequence& seq) {
    nlohmann::json frames = nlohmann::json::array();
    for (const auto& f : seq.frames) frames.push_back({f.text_slot, f.speech_slots});
    return {{"id", id}, {"k", seq.k}, {"frames", std::move(frames)}};
}

FrameRecord frames_from_json(const nlohmann::json& j) {
    FrameRecord r;
    r.id = j.at("id").get<std::string>();
    r.seq.k = j.at("k").get<int>();
    if (r.seq.k < 1) throw InvalidInput("record " + r.id + ": k must be >= 1");
    for (const auto& f : j.at("frames")) {
        if (!f.is_array() || f.size() != 2) throw InvalidInput("record " + r.id + ": frame must be [text, [speech...]]");
        r.seq.frames.push_back(Frame{f[0].get<TokenId>(), f[1].get<TokenSeq>()});
    }
    return r;
}

void for_each_jsonl(std::istream& in, const std::function<void(std::size_t, const nlohmann::json&)>& fn) {
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw InvalidInput("line " + std::to_string(lineno) + ": " + e.what());
        }
        fn(lineno, j);
    }
}

}  // namespace jointdec
