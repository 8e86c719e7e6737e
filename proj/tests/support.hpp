#pragma once

// Shared fixtures and independent oracles. Nothing here calls into the code
// under test except for VocabSpec::classify.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "jointdec/patterns.hpp"

namespace testing {

using jointdec::ChannelPair;
using jointdec::TokenId;
using jointdec::TokenSeq;
using jointdec::VocabSpec;

// text [0,100), speech [1000,2000); E=98, P=99, M=500, Q=1999.
inline VocabSpec small_vocab() {
    VocabSpec v;
    v.text_range = {0, 100};
    v.speech_range = {1000, 2000};
    v.eos_text_id = 98;
    v.pad_text_id = 99;
    v.marker_id = 500;
    v.eos_speech_id = 1999;
    return v;
}

inline constexpr TokenId E = 98;
inline constexpr TokenId P = 99;
inline constexpr TokenId M = 500;
inline constexpr TokenId Q = 1999;
inline constexpr TokenId T(int i) { return i; }
inline constexpr TokenId S(int i) { return 1000 + i; }

inline TokenSeq text_seq(int n_content) {
    TokenSeq t;
    for (int i = 1; i <= n_content; ++i) t.push_back(T(i));
    t.push_back(E);
    return t;
}

inline TokenSeq speech_seq(int n_content, bool eos = true) {
    TokenSeq s;
    for (int i = 1; i <= n_content; ++i) s.push_back(S(i));
    if (eos) s.push_back(Q);
    return s;
}

inline TokenSeq range_of(TokenId (*f)(int), int lo, int hi) {
    TokenSeq out;
    for (int i = lo; i <= hi; ++i) out.push_back(f(i));
    return out;
}

inline TokenSeq cat(std::initializer_list<TokenSeq> parts) {
    TokenSeq out;
    for (const auto& p : parts) out.insert(out.end(), p.begin(), p.end());
    return out;
}

// ---------------------------------------------------------------- random pairs

inline TokenId random_content(std::mt19937_64& rng, const jointdec::TokenRange& r, const VocabSpec& v,
                              jointdec::TokenClass want) {
    std::uniform_int_distribution<TokenId> d(r.begin, r.end - 1);
    for (;;) {
        const TokenId t = d(rng);
        if (v.classify(t) == want) return t;
    }
}

// |text| in [1, max_text] including EOS; |speech| from the smallest length the
// layout accepts up to max_speech. min_speech(text_len) supplies that bound.
inline ChannelPair random_pair(std::mt19937_64& rng, const VocabSpec& v, std::size_t max_text,
                               std::size_t max_speech, const std::function<std::size_t(std::size_t)>& min_speech,
                               bool speech_eos = true) {
    std::uniform_int_distribution<std::size_t> tl(1, max_text);
    const std::size_t n_text = tl(rng);
    const std::size_t lo = std::max<std::size_t>(min_speech(n_text), speech_eos ? 1 : 1);
    std::uniform_int_distribution<std::size_t> sl(lo, std::max(lo, max_speech));
    const std::size_t n_speech = sl(rng);
    ChannelPair p;
    for (std::size_t i = 0; i + 1 < n_text; ++i)
        p.text_tokens.push_back(random_content(rng, v.text_range, v, jointdec::TokenClass::TextContent));
    p.text_tokens.push_back(v.eos_text_id);
    const std::size_t body = speech_eos ? n_speech - 1 : n_speech;
    for (std::size_t i = 0; i < body; ++i)
        p.speech_tokens.push_back(random_content(rng, v.speech_range, v, jointdec::TokenClass::SpeechContent));
    if (speech_eos) p.speech_tokens.push_back(v.eos_speech_id);
    return p;
}

// Smallest |speech| that never underruns at r_text:r_speech: ceil(|text|*r_s/r_t).
inline std::function<std::size_t(std::size_t)> chunked_min(int r_text, int r_speech) {
    return [=](std::size_t n) {
        return (n * static_cast<std::size_t>(r_speech) + r_text - 1) / static_cast<std::size_t>(r_text);
    };
}

// Smallest |speech| giving at least |text| frames of k.
inline std::function<std::size_t(std::size_t)> parallel_min(int k) {
    return [=](std::size_t n) { return (n - 1) * static_cast<std::size_t>(k) + 1; };
}

// ---------------------------------------------------------------- mux oracles

// Chunk-index construction of the interleaved layout: chunk c holds text slots
// [c*rt, (c+1)*rt) and speech slots [c*rs, (c+1)*rs). nullopt on underrun.
inline std::optional<TokenSeq> interleave_oracle(const TokenSeq& text, const TokenSeq& speech, int rt, int rs,
                                                 TokenId pad) {
    const std::size_t chunks = (speech.size() + rs - 1) / rs;
    if (chunks * rt < text.size()) return std::nullopt;
    TokenSeq out;
    for (std::size_t c = 0; c < chunks; ++c) {
        for (std::size_t j = 0; j < static_cast<std::size_t>(rt); ++j) {
            const std::size_t idx = c * rt + j;
            out.push_back(idx < text.size() ? text[idx] : pad);
        }
        for (std::size_t j = 0; j < static_cast<std::size_t>(rs); ++j) {
            const std::size_t idx = c * rs + j;
            if (idx < speech.size()) out.push_back(speech[idx]);
        }
    }
    return out;
}

// The text EOS lands in chunk e = (|text|-1)/rt; all earlier chunks are full.
inline std::optional<TokenSeq> esi_oracle(const TokenSeq& text, const TokenSeq& speech, int rt, int rs,
                                          TokenId marker) {
    const std::size_t e = (text.size() - 1) / rt;
    if (e * rs >= speech.size()) return std::nullopt;
    TokenSeq out;
    for (std::size_t c = 0; c < e; ++c) {
        out.insert(out.end(), text.begin() + c * rt, text.begin() + (c + 1) * rt);
        out.insert(out.end(), speech.begin() + c * rs, speech.begin() + (c + 1) * rs);
    }
    out.insert(out.end(), text.begin() + e * rt, text.end());
    out.push_back(marker);
    out.insert(out.end(), speech.begin() + e * rs, speech.end());
    return out;
}

struct OracleFrame {
    TokenId text;
    TokenSeq speech;
};

inline std::optional<std::vector<OracleFrame>> parallel_oracle(const TokenSeq& text, const TokenSeq& speech, int k,
                                                               TokenId pad, TokenId fill, bool do_fill) {
    std::vector<OracleFrame> frames;
    for (std::size_t s = 0; s < speech.size(); s += k) {
        OracleFrame f{frames.size() < text.size() ? text[frames.size()] : pad, {}};
        for (std::size_t j = s; j < s + k; ++j) {
            if (j < speech.size())
                f.speech.push_back(speech[j]);
            else if (do_fill)
                f.speech.push_back(fill);
        }
        frames.push_back(std::move(f));
    }
    if (frames.size() < text.size()) return std::nullopt;
    return frames;
}

// ---------------------------------------------------------------- WER oracles

// Top-down memoized edit distance (unit costs).
inline std::size_t edit_distance_memo(const std::vector<std::string>& a, const std::vector<std::string>& b) {
    std::map<std::pair<std::size_t, std::size_t>, std::size_t> memo;
    std::function<std::size_t(std::size_t, std::size_t)> go = [&](std::size_t i, std::size_t j) -> std::size_t {
        if (i == a.size()) return b.size() - j;
        if (j == b.size()) return a.size() - i;
        const auto key = std::make_pair(i, j);
        if (auto it = memo.find(key); it != memo.end()) return it->second;
        std::size_t best = go(i + 1, j + 1) + (a[i] == b[j] ? 0 : 1);
        best = std::min(best, go(i + 1, j) + 1);
        best = std::min(best, go(i, j + 1) + 1);
        memo[key] = best;
        return best;
    };
    return go(0, 0);
}

// Enumerates every alignment path; exponential, for tiny inputs only.
inline std::size_t edit_distance_enumerate(const std::vector<std::string>& a, const std::vector<std::string>& b,
                                           std::size_t i = 0, std::size_t j = 0) {
    if (i == a.size() && j == b.size()) return 0;
    std::size_t best = SIZE_MAX;
    if (i < a.size() && j < b.size())
        best = std::min(best, edit_distance_enumerate(a, b, i + 1, j + 1) + (a[i] == b[j] ? 0 : 1));
    if (i < a.size()) best = std::min(best, edit_distance_enumerate(a, b, i + 1, j) + 1);
    if (j < b.size()) best = std::min(best, edit_distance_enumerate(a, b, i, j + 1) + 1);
    return best;
}

inline std::vector<std::string> random_words(std::mt19937_64& rng, std::size_t max_len,
                                             const std::vector<std::string>& alphabet) {
    std::uniform_int_distribution<std::size_t> len(0, max_len);
    std::uniform_int_distribution<std::size_t> pick(0, alphabet.size() - 1);
    std::vector<std::string> w(len(rng));
    for (auto& x : w) x = alphabet[pick(rng)];
    return w;
}

inline std::string join(const std::vector<std::string>& words) {
    std::string s;
    for (const auto& w : words) {
        if (!s.empty()) s += ' ';
        s += w;
    }
    return s;
}

// Scans every word-aligned window of the output for the reference words.
inline bool word_window_contains(const std::vector<std::string>& out, const std::vector<std::string>& ref) {
    if (ref.empty() || ref.size() > out.size()) return false;
    for (std::size_t start = 0; start + ref.size() <= out.size(); ++start)
        if (std::equal(ref.begin(), ref.end(), out.begin() + start)) return true;
    return false;
}

}  // namespace testing

namespace testing {

// A pair whose interleaved layout at r_text:r_speech carries exactly `pads`
// pads: speech fills (text+pads)/r_text chunks completely.
inline ChannelPair pair_with_pads(std::mt19937_64& rng, const VocabSpec& v, std::size_t text_len, std::size_t pads,
                                  int r_text, int r_speech) {
    const std::size_t slots = text_len + pads;
    const std::size_t chunks = slots / static_cast<std::size_t>(r_text);
    ChannelPair p;
    for (std::size_t i = 0; i + 1 < text_len; ++i)
        p.text_tokens.push_back(random_content(rng, v.text_range, v, jointdec::TokenClass::TextContent));
    p.text_tokens.push_back(v.eos_text_id);
    const std::size_t n_speech = chunks * static_cast<std::size_t>(r_speech);
    for (std::size_t i = 0; i + 1 < n_speech; ++i)
        p.speech_tokens.push_back(random_content(rng, v.speech_range, v, jointdec::TokenClass::SpeechContent));
    p.speech_tokens.push_back(v.eos_speech_id);
    return p;
}

// Corpus whose total pads / total text tokens equals `ratio` up to rounding
// of each record. Text lengths are drawn from [min_text, max_text].
inline std::vector<ChannelPair> corpus_with_pad_ratio(std::mt19937_64& rng, const VocabSpec& v, double ratio,
                                                      std::size_t records, std::size_t min_text,
                                                      std::size_t max_text, int r_text, int r_speech) {
    std::vector<ChannelPair> out;
    std::uniform_int_distribution<std::size_t> tl(min_text, max_text);
    for (std::size_t i = 0; i < records; ++i) {
        const std::size_t t = tl(rng);
        std::size_t pads = static_cast<std::size_t>(std::llround(ratio * static_cast<double>(t)));
        // Round the slot count up to a whole number of chunks.
        while ((t + pads) % static_cast<std::size_t>(r_text) != 0) ++pads;
        out.push_back(pair_with_pads(rng, v, t, pads, r_text, r_speech));
    }
    return out;
}

}  // namespace testing
