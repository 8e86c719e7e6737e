#pragma once

#include <functional>
#include <istream>
#include <string>

#include <json.hpp>

#include "jointdec/analytics.hpp"
#include "jointdec/patterns.hpp"

namespace jointdec {

// JSONL record shapes:
//   pair:   {"id", "text_tokens": [int], "speech_tokens": [int]}
//   mixed:  {"id", "pattern": "interleaved"|"esi", "r_text", "r_speech", "tokens": [int]}
//   frames: {"id", "k", "frames": [[text, [speech...]], ...]}

struct MixedRecord {
    std::string id;
    MixedSequence seq;
};

struct FrameRecord {
    std::string id;
    FrameSequence seq;
};

nlohmann::json pair_to_json(const std::string& id, const ChannelPair& pair);
IdentifiedPair pair_from_json(const nlohmann::json& j);

nlohmann::json mixed_to_json(const std::string& id, const MixedSequence& seq);
MixedRecord mixed_from_json(const nlohmann::json& j);

nlohmann::json frames_to_json(const std::string& id, const FrameSequence& seq);
FrameRecord frames_from_json(const nlohmann::json& j);

// Calls fn(line_number, json) for every non-blank line. Parse errors throw
// InvalidInput naming the line.
void for_each_jsonl(std::istream& in, const std::function<void(std::size_t, const nlohmann::json&)>& fn);

}  // namespace jointdec
