#include "jointdec/curation.hpp"

#include <cstdio>
#include <memory>
#include <mutex>
#include <numeric>
#include <stdexcept>
#include <unordered_map>

#include "jointdec/detail.hpp"
#include "jointdec/metrics.hpp"

namespace jointdec {

std::string_view to_string(CurationStatus s) { return s == CurationStatus::Kept ? "kept" : "dropped"; }

std::string_view to_string(DropReason r) {
    switch (r) {
        case DropReason::None: return "";
        case DropReason::WerTooHigh: return "WerTooHigh";
        case DropReason::ClientError: return "ClientError";
    }
    return "";
}

namespace {

struct MockStore {
    std::mutex mu;
    std::unordered_map<AudioRef, std::string> text_by_handle;
};

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

}  // namespace

ClientSuite mock_clients(std::uint64_t seed, NoiseSpec noise) {
    if (noise.deletion_rate < 0 || noise.substitution_rate < 0 ||
        noise.deletion_rate + noise.substitution_rate > 1.0)
        throw std::invalid_argument("asr noise rates must be >= 0 and sum to at most 1");
    auto store = std::make_shared<MockStore>();
    ClientSuite suite;
    suite.rewrite = [](std::string_view, std::string_view phrase) {
        return "The answer is " + std::string(phrase) + ".";
    };
    suite.synthesize = [store](std::string_view text, int speaker) {
        const std::string key = std::string(text) + '\x1f' + std::to_string(speaker);
        AudioRef handle = "audio:" + hex64(detail::fnv1a(key));
        std::lock_guard lock(store->mu);
        store->text_by_handle.emplace(handle, std::string(text));
        return handle;
    };
    suite.transcribe = [store, seed, noise](const AudioRef& audio) {
        std::string text;
        {
            std::lock_guard lock(store->mu);
            const auto it = store->text_by_handle.find(audio);
            if (it == store->text_by_handle.end()) throw std::runtime_error("unknown audio handle " + audio);
            text = it->second;
        }
        std::mt19937_64 rng(seed ^ detail::fnv1a(audio));
        std::string out;
        for (const auto& w : split_words(normalize(text))) {
            const double u = detail::uniform01(rng);
            if (u < noise.deletion_rate) continue;
            const bool sub = u < noise.deletion_rate + noise.substitution_rate;
            if (!out.empty()) out.push_back(' ');
            out += sub ? (w == "zzz" ? "yyy" : "zzz") : w;
        }
        return out;
    };
    return suite;
}

std::vector<int> draw_speakers(std::size_t count, int pool, std::uint64_t seed) {
    if (pool < 1) throw std::invalid_argument("speaker_pool_size must be >= 1");
    std::mt19937_64 rng(seed);
    std::vector<int> deck(static_cast<std::size_t>(pool));
    std::vector<int> out;
    out.reserve(count);
    while (out.size() < count) {
        std::iota(deck.begin(), deck.end(), 0);
        for (std::size_t i = deck.size(); i > 1; --i)
            std::swap(deck[i - 1], deck[detail::uniform_below(rng, i)]);
        for (std::size_t i = 0; i < deck.size() && out.size() < count; ++i) out.push_back(deck[i]);
    }
    return out;
}

namespace {

CuratedRecord curate_one(const QaSourceRecord& src, int speaker, const ClientSuite& clients,
                         double threshold) {
    CuratedRecord r;
    r.id = src.id;
    r.question_text = src.question_text;
    r.answer_phrase = src.answer_phrase;
    r.speaker_id = speaker;

    const char* stage = "rewrite";
    try {
        r.answer_sentence = clients.rewrite(src.question_text, src.answer_phrase);
        if (normalize(r.answer_sentence).empty()) throw std::runtime_error("empty rewritten answer");
        stage = "tts";
        r.question_audio_ref = clients.synthesize(src.question_text, speaker);
        r.answer_audio_ref = clients.synthesize(r.answer_sentence, speaker);
        stage = "asr";
        r.answer_transcript = clients.transcribe(r.answer_audio_ref);
    } catch (const std::exception& e) {
        r.status = CurationStatus::Dropped;
        r.reason = DropReason::ClientError;
        r.error_stage = stage;
        r.error_message = e.what();
        return r;
    }

    r.answer_wer = wer(r.answer_sentence, r.answer_transcript).wer;
    if (*r.answer_wer > threshold) {
        r.status = CurationStatus::Dropped;
        r.reason = DropReason::WerTooHigh;
    } else {
        r.status = CurationStatus::Kept;
    }
    return r;
}

}  // namespace

CurationResult curate(std::span<const QaSourceRecord> records, const ClientSuite& clients,
                      const CurationOptions& opts) {
    if (!(opts.wer_threshold > 0.0 && opts.wer_threshold <= 1.0))
        throw std::invalid_argument("wer_threshold must lie in (0, 1]");
    if (!clients.rewrite || !clients.synthesize || !clients.transcribe)
        throw std::invalid_argument("client suite is incomplete");
    const auto speakers = draw_speakers(records.size(), opts.speaker_pool_size, opts.seed);

    CurationResult result;
    result.records.resize(records.size());
    detail::parallel_for(records.size(), opts.workers, [&](std::size_t i) {
        result.records[i] = curate_one(records[i], speakers[i], clients, opts.wer_threshold);
    });

    auto& s = result.summary;
    s.total = records.size();
    for (const auto& r : result.records) {
        if (r.status == CurationStatus::Kept) {
            ++s.kept;
        } else if (r.reason == DropReason::WerTooHigh) {
            ++s.dropped_wer;
        } else {
            ++s.dropped_client;
            ++s.client_errors_by_stage[r.error_stage];
        }
    }
    return result;
}

void from_json(const nlohmann::json& j, QaSourceRecord& r) {
    r.id = j.at("id").get<std::string>();
    r.question_text = j.at("question").get<std::string>();
    r.answer_phrase = j.at("answer").get<std::string>();
    if (r.question_text.empty() || r.answer_phrase.empty())
        throw std::invalid_argument("record " + r.id + ": question and answer must be non-empty");
}

void to_json(nlohmann::json& j, const CuratedRecord& r) {
    j = {
        {"id", r.id},
        {"question_text", r.question_text},
        {"answer_phrase", r.answer_phrase},
        {"answer_sentence", r.answer_sentence},
        {"question_audio_ref", r.question_audio_ref},
        {"answer_audio_ref", r.answer_audio_ref},
        {"answer_transcript", r.answer_transcript},
        {"answer_wer", r.answer_wer ? nlohmann::json(*r.answer_wer) : nlohmann::json(nullptr)},
        {"speaker_id", r.speaker_id},
        {"status", to_string(r.status)},
        {"reason", to_string(r.reason)},
    };
    if (r.reason == DropReason::ClientError) {
        j["error_stage"] = r.error_stage;
        j["error_message"] = r.error_message;
    }
}

void to_json(nlohmann::json& j, const CurationSummary& s) {
    j = {
        {"total", s.total},
        {"kept", s.kept},
        {"dropped", s.dropped_wer + s.dropped_client},
        {"dropped_wer_too_high", s.dropped_wer},
        {"dropped_client_error", s.dropped_client},
        {"client_errors_by_stage", s.client_errors_by_stage},
    };
}

}  // namespace jointdec
