#include "jointdec/simulator.hpp"

#include <algorithm>
#include <cmath>

#include "jointdec/detail.hpp"

namespace jointdec {

Generator scripted(TokenSeq tokens) { return {ScriptedGen{std::move(tokens)}}; }

Generator replay(ChannelPair pair, Pattern pattern, InterleaveConfig cfg) {
    return {ReplayGen{std::move(pair), pattern, cfg}};
}

Generator corrupting(Generator inner, double rate, std::uint64_t seed, CorruptionMode mode) {
    if (rate < 0.0 || rate > 1.0) throw InvalidInput("corruption rate must lie in [0, 1]");
    return {CorruptingGen{std::make_shared<const Generator>(std::move(inner)), rate, seed, mode}};
}

namespace {

TokenId draw_in(const TokenRange& r, std::mt19937_64& rng) {
    return r.begin + static_cast<TokenId>(detail::uniform_below(rng, static_cast<std::uint64_t>(r.size())));
}

}  // namespace

TokenId corrupt_token(TokenId token, const VocabSpec& vocab, CorruptionMode mode, std::mt19937_64& rng) {
    if (mode == CorruptionMode::UniformId) {
        constexpr TokenId kUnknownMargin = 16;
        const TokenId lo = std::min({vocab.text_range.begin, vocab.speech_range.begin, vocab.marker_id});
        const TokenId hi =
            std::max({vocab.text_range.end, vocab.speech_range.end, vocab.marker_id + 1}) + kUnknownMargin;
        TokenId t = token;
        while (t == token) t = draw_in(TokenRange{lo, hi}, rng);
        return t;
    }
    const TokenClass cls = vocab.classify(token);
    if (is_text_class(cls)) return draw_in(vocab.speech_range, rng);
    if (is_speech_class(cls)) return draw_in(vocab.text_range, rng);
    // Marker or unknown: any channel token.
    const bool text = detail::uniform_below(rng, 2) == 0;
    return draw_in(text ? vocab.text_range : vocab.speech_range, rng);
}

struct TokenStream::Impl {
    TokenSeq tokens;
    std::size_t pos = 0;

    std::unique_ptr<TokenStream> inner;
    VocabSpec vocab;
    std::mt19937_64 rng;
    double rate = 0.0;
    CorruptionMode mode = CorruptionMode::OppositeChannel;
    std::vector<std::size_t> corrupted;
};

TokenStream::TokenStream(const Generator& gen, const VocabSpec& vocab) : impl_(std::make_unique<Impl>()) {
    impl_->vocab = vocab;
    std::visit(
        [&](const auto& g) {
            using G = std::decay_t<decltype(g)>;
            if constexpr (std::is_same_v<G, ScriptedGen>) {
                impl_->tokens = g.tokens;
            } else if constexpr (std::is_same_v<G, ReplayGen>) {
                impl_->tokens = mux_tokens(g.pair, g.pattern, g.cfg, vocab);
            } else {
                impl_->inner = std::make_unique<TokenStream>(*g.inner, vocab);
                impl_->rng.seed(g.seed);
                impl_->rate = g.rate;
                impl_->mode = g.mode;
            }
        },
        gen.kind);
}

TokenStream::~TokenStream() = default;
TokenStream::TokenStream(TokenStream&&) noexcept = default;
TokenStream& TokenStream::operator=(TokenStream&&) noexcept = default;

std::optional<TokenId> TokenStream::next() {
    auto& s = *impl_;
    if (!s.inner) {
        if (s.pos >= s.tokens.size()) return std::nullopt;
        return s.tokens[s.pos++];
    }
    auto t = s.inner->next();
    if (!t) return t;
    const std::size_t at = s.pos++;
    if (s.rate > 0.0 && detail::uniform01(s.rng) < s.rate) {
        s.corrupted.push_back(at);
        return corrupt_token(*t, s.vocab, s.mode, s.rng);
    }
    return t;
}

const std::vector<std::size_t>& TokenStream::corrupted_positions() const { return impl_->corrupted; }

RunTranscript run(const Generator& gen, Pattern pattern, const InterleaveConfig& cfg, const VocabSpec& vocab) {
    RunTranscript tr;
    TokenStream stream(gen, vocab);
    Demuxer demux(vocab, pattern, cfg);

    const auto start = std::chrono::steady_clock::now();
    try {
        while (demux.phase() != DemuxPhase::Finished) {
            const auto t = stream.next();
            if (!t) break;
            demux.feed(*t, tr.events);
        }
        tr.pair = demux.finish(&tr.events);
    } catch (const DemuxError& e) {
        tr.error = RunError{e.kind(), e.index()};
    }
    tr.elapsed = std::chrono::steady_clock::now() - start;
    tr.tokens_consumed = demux.tokens_consumed();
    const double secs = std::max(std::chrono::duration<double>(tr.elapsed).count(), 1e-9);
    tr.throughput = static_cast<double>(tr.tokens_consumed) / secs;
    tr.corrupted_positions = stream.corrupted_positions();
    return tr;
}

namespace {

double nearest_rank(std::vector<double> xs, double q) {
    if (xs.empty()) return 0.0;
    std::sort(xs.begin(), xs.end());
    const auto rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(xs.size())));
    return xs[std::clamp<std::size_t>(rank, 1, xs.size()) - 1];
}

}  // namespace

BenchSummary bench(std::span<const ChannelPair> corpus, Pattern pattern, const InterleaveConfig& cfg,
                   const VocabSpec& vocab, int repetitions, unsigned workers) {
    if (corpus.empty()) throw InvalidInput("bench: corpus is empty");
    if (repetitions < 1) throw InvalidInput("bench: repetitions must be >= 1");

    BenchSummary b;
    b.pattern = pattern;
    b.cfg = cfg;
    b.records = corpus.size();
    b.repetitions = repetitions;

    std::vector<TokenSeq> streams(corpus.size());
    for (std::size_t i = 0; i < corpus.size(); ++i) streams[i] = mux_tokens(corpus[i], pattern, cfg, vocab);
    b.tokens_per_record.reserve(streams.size());
    for (const auto& s : streams) {
        b.tokens_per_record.push_back(s.size());
        b.total_tokens += s.size();
    }

    std::vector<double> stream_tps;
    stream_tps.reserve(streams.size() * static_cast<std::size_t>(repetitions));
    for (int rep = 0; rep < repetitions; ++rep) {
        std::vector<double> secs(streams.size());
        const auto wall_start = std::chrono::steady_clock::now();
        detail::parallel_for(streams.size(), workers, [&](std::size_t i) {
            const auto start = std::chrono::steady_clock::now();
            Demuxer d(vocab, pattern, cfg);
            for (TokenId t : streams[i]) d.feed(t);
            (void)d.finish();
            secs[i] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        });
        const double wall =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_start).count();
        for (std::size_t i = 0; i < streams.size(); ++i)
            stream_tps.push_back(static_cast<double>(streams[i].size()) / std::max(secs[i], 1e-9));
        b.rep_aggregate_tps.push_back(static_cast<double>(b.total_tokens) / std::max(wall, 1e-9));
    }
    b.p50_stream_tps = nearest_rank(stream_tps, 0.50);
    b.p99_stream_tps = nearest_rank(stream_tps, 0.99);
    b.aggregate_tps = nearest_rank(b.rep_aggregate_tps, 0.50);
    return b;
}

double token_count_ratio(const BenchSummary& numerator, const BenchSummary& denominator) {
    if (numerator.tokens_per_record.size() != denominator.tokens_per_record.size() ||
        numerator.tokens_per_record.empty())
        throw InvalidInput("token_count_ratio: summaries cover different corpora");
    double sum = 0.0;
    for (std::size_t i = 0; i < numerator.tokens_per_record.size(); ++i)
        sum += static_cast<double>(numerator.tokens_per_record[i]) /
               static_cast<double>(denominator.tokens_per_record[i]);
    return sum / static_cast<double>(numerator.tokens_per_record.size());
}

void to_json(nlohmann::json& j, const RunTranscript& t) {
    j = {
        {"tokens_consumed", t.tokens_consumed},
        {"events", t.events.size()},
        {"ok", !t.error.has_value()},
        {"elapsed_ns", t.elapsed.count()},
        {"throughput_tps", t.throughput},
        {"corrupted_positions", t.corrupted_positions},
    };
    if (t.error) {
        j["error"] = {{"kind", to_string(t.error->kind)}, {"index", t.error->index}};
    } else {
        j["error"] = nullptr;
    }
}

void to_json(nlohmann::json& j, const BenchSummary& b) {
    j = {
        {"pattern", to_string(b.pattern)},
        {"ratio", std::to_string(b.cfg.r_text) + ":" + std::to_string(b.cfg.r_speech)},
        {"records", b.records},
        {"repetitions", b.repetitions},
        {"total_tokens", b.total_tokens},
        {"p50_stream_tps", b.p50_stream_tps},
        {"p99_stream_tps", b.p99_stream_tps},
        {"rep_aggregate_tps", b.rep_aggregate_tps},
        {"aggregate_tps", b.aggregate_tps},
    };
}

}  // namespace jointdec
