#include "jointdec/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace jointdec {

namespace {

std::size_t first_speech_index(const TokenSeq& tokens, const VocabSpec& vocab) {
    const auto it = std::find_if(tokens.begin(), tokens.end(),
                                 [&](TokenId t) { return is_speech_class(vocab.classify(t)); });
    return static_cast<std::size_t>(it - tokens.begin());
}

// Nearest-rank percentile over a sorted sample.
double percentile(const std::vector<double>& sorted, double q) {
    if (sorted.empty()) return 0.0;
    const auto rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(sorted.size())));
    return sorted[std::clamp<std::size_t>(rank, 1, sorted.size()) - 1];
}

Distribution summarize(std::vector<double> xs) {
    Distribution d;
    if (xs.empty()) return d;
    std::sort(xs.begin(), xs.end());
    // Summing in sorted order keeps the mean independent of input order.
    d.mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
    d.p50 = percentile(xs, 0.50);
    d.p90 = percentile(xs, 0.90);
    d.p99 = percentile(xs, 0.99);
    return d;
}

}  // namespace

LengthReport length_report(const ChannelPair& pair, const InterleaveConfig& cfg, const VocabSpec& vocab,
                           double tokens_per_second) {
    if (!(tokens_per_second > 0.0)) throw InvalidInput("tokens_per_second must be > 0");
    const auto inter = mux_interleaved(pair, cfg, vocab);
    const auto esi = mux_esi(pair, cfg, vocab);

    LengthReport r;
    r.len_interleaved = inter.tokens.size();
    r.len_esi = esi.tokens.size();
    r.pad_count = static_cast<std::size_t>(
        std::count(inter.tokens.begin(), inter.tokens.end(), vocab.pad_text_id));
    r.reduction = static_cast<double>(r.len_esi) / static_cast<double>(r.len_interleaved);
    r.first_speech_interleaved = first_speech_index(inter.tokens, vocab);
    r.first_speech_esi = first_speech_index(esi.tokens, vocab);
    const auto content = static_cast<double>(
        std::count_if(pair.speech_tokens.begin(), pair.speech_tokens.end(),
                      [&](TokenId t) { return vocab.classify(t) == TokenClass::SpeechContent; }));
    r.est_audio_seconds = content / tokens_per_second;
    return r;
}

CorpusAccumulator::CorpusAccumulator(InterleaveConfig cfg, VocabSpec vocab, double tokens_per_second)
    : cfg_(cfg), vocab_(vocab), tps_(tokens_per_second) {
    cfg_.validate();
    vocab_.validate();
    if (!(tps_ > 0.0)) throw InvalidInput("tokens_per_second must be > 0");
}

void CorpusAccumulator::add(const std::string& id, const ChannelPair& pair) {
    LengthReport r;
    try {
        r = length_report(pair, cfg_, vocab_, tps_);
    } catch (const std::exception& e) {
        failures_.push_back({id, e.what()});
        return;
    }
    len_int_.push_back(static_cast<double>(r.len_interleaved));
    len_esi_.push_back(static_cast<double>(r.len_esi));
    reductions_.push_back(r.reduction);
    pads_ += r.pad_count;
    text_ += pair.text_tokens.size();
    text_content_ += pair.text_tokens.size() - 1;
    speech_content_ += static_cast<std::size_t>(
        std::count_if(pair.speech_tokens.begin(), pair.speech_tokens.end(),
                      [&](TokenId t) { return vocab_.classify(t) == TokenClass::SpeechContent; }));
}

void CorpusAccumulator::merge(const CorpusAccumulator& other) {
    len_int_.insert(len_int_.end(), other.len_int_.begin(), other.len_int_.end());
    len_esi_.insert(len_esi_.end(), other.len_esi_.begin(), other.len_esi_.end());
    reductions_.insert(reductions_.end(), other.reductions_.begin(), other.reductions_.end());
    pads_ += other.pads_;
    text_ += other.text_;
    text_content_ += other.text_content_;
    speech_content_ += other.speech_content_;
    failures_.insert(failures_.end(), other.failures_.begin(), other.failures_.end());
}

CorpusReport CorpusAccumulator::report() const {
    if (reductions_.empty()) throw InvalidInput("corpus_report: no measurable records");
    CorpusReport r;
    r.records = reductions_.size();
    r.len_interleaved = summarize(len_int_);
    r.len_esi = summarize(len_esi_);
    r.mean_reduction = summarize(reductions_).mean;
    r.total_pads = pads_;
    r.total_text = text_;
    r.total_text_content = text_content_;
    r.pad_to_text_ratio = static_cast<double>(pads_) / static_cast<double>(text_);
    r.pad_to_text_ratio_excl_eos =
        text_content_ == 0 ? 0.0 : static_cast<double>(pads_) / static_cast<double>(text_content_);
    r.total_audio_seconds = static_cast<double>(speech_content_) / tps_;
    r.failures = failures_;
    return r;
}

CorpusReport corpus_report(std::span<const IdentifiedPair> pairs, const InterleaveConfig& cfg,
                           const VocabSpec& vocab, double tokens_per_second) {
    CorpusAccumulator acc(cfg, vocab, tokens_per_second);
    for (const auto& p : pairs) acc.add(p.id, p.pair);
    return acc.report();
}

ExpectedReduction expected_reduction(double pad_to_text_ratio, const InterleaveConfig& cfg, double text_len) {
    if (pad_to_text_ratio < 0.0) throw InvalidInput("pad_to_text_ratio must be >= 0");
    if (!(text_len > 0.0)) throw InvalidInput("text_len must be > 0");
    cfg.validate();
    const double scale = static_cast<double>(cfg.r_speech) / static_cast<double>(cfg.r_text);
    const double t = text_len;
    const double p = pad_to_text_ratio * t;
    const double s = (t + p) * scale;
    return {(t + s) / (t + p + s), (t + 1.0 + s) / (t + p + s)};
}

void to_json(nlohmann::json& j, const LengthReport& r) {
    j = {
        {"len_interleaved", r.len_interleaved},
        {"len_esi", r.len_esi},
        {"pad_count", r.pad_count},
        {"reduction", r.reduction},
        {"first_speech_index", {{"interleaved", r.first_speech_interleaved}, {"esi", r.first_speech_esi}}},
        {"est_audio_seconds", r.est_audio_seconds},
    };
}

void to_json(nlohmann::json& j, const Distribution& d) {
    j = {{"mean", d.mean}, {"p50", d.p50}, {"p90", d.p90}, {"p99", d.p99}};
}

void to_json(nlohmann::json& j, const CorpusReport& r) {
    nlohmann::json failures = nlohmann::json::array();
    for (const auto& f : r.failures) failures.push_back({{"id", f.id}, {"error", f.error}});
    j = {
        {"records", r.records},
        {"len_interleaved", r.len_interleaved},
        {"len_esi", r.len_esi},
        {"mean_len_interleaved", r.len_interleaved.mean},
        {"median_len_interleaved", r.len_interleaved.p50},
        {"mean_len_esi", r.len_esi.mean},
        {"median_len_esi", r.len_esi.p50},
        {"mean_reduction", r.mean_reduction},
        {"total_pads", r.total_pads},
        {"total_text", r.total_text},
        {"pad_to_text_ratio", r.pad_to_text_ratio},
        {"pad_to_text_ratio_excl_eos", r.pad_to_text_ratio_excl_eos},
        {"total_audio_seconds", r.total_audio_seconds},
        {"failures", failures},
    };
}

}  // namespace jointdec
