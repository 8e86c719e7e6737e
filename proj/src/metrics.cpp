#include "jointdec/metrics.hpp"

#include <algorithm>
#include <cctype>
#include <numeric>
#include <sstream>

namespace jointdec {

std::string normalize(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    bool pending_space = false;
    for (const char ch : s) {
        const auto c = static_cast<unsigned char>(ch);
        const bool sep = c < 0x80 && (std::isspace(c) || std::ispunct(c));
        if (sep) {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) {
            out.push_back(' ');
            pending_space = false;
        }
        out.push_back(c < 0x80 ? static_cast<char>(std::tolower(c)) : ch);
    }
    return out;
}

std::vector<std::string> split_words(std::string_view normalized) {
    std::vector<std::string> words;
    std::size_t pos = 0;
    while (pos < normalized.size()) {
        const auto next = normalized.find(' ', pos);
        const auto end = next == std::string_view::npos ? normalized.size() : next;
        if (end > pos) words.emplace_back(normalized.substr(pos, end - pos));
        pos = end + 1;
    }
    return words;
}

bool answer_hit(std::string_view output, std::span<const std::string> references, MatchOptions opts) {
    const std::string out = normalize(output);
    const std::string padded = " " + out + " ";
    for (const auto& ref : references) {
        const std::string r = normalize(ref);
        if (r.empty()) continue;
        if (opts.raw_substring ? out.find(r) != std::string::npos
                               : padded.find(" " + r + " ") != std::string::npos)
            return true;
    }
    return false;
}

WerBreakdown align_words(std::span<const std::string> ref, std::span<const std::string> hyp) {
    const std::size_t n = ref.size();
    const std::size_t m = hyp.size();
    if (n == 0 && m > 0) throw EmptyReference();

    // cost[i][j]: edit distance between ref[0..i) and hyp[0..j).
    std::vector<std::size_t> cost((n + 1) * (m + 1));
    auto at = [m](std::size_t i, std::size_t j) { return i * (m + 1) + j; };
    for (std::size_t i = 0; i <= n; ++i) cost[at(i, 0)] = i;
    for (std::size_t j = 0; j <= m; ++j) cost[at(0, j)] = j;
    for (std::size_t i = 1; i <= n; ++i) {
        for (std::size_t j = 1; j <= m; ++j) {
            const std::size_t diag = cost[at(i - 1, j - 1)] + (ref[i - 1] == hyp[j - 1] ? 0 : 1);
            cost[at(i, j)] = std::min({diag, cost[at(i - 1, j)] + 1, cost[at(i, j - 1)] + 1});
        }
    }

    WerBreakdown b;
    b.ref_len = n;
    std::size_t i = n;
    std::size_t j = m;
    while (i > 0 || j > 0) {
        const std::size_t c = cost[at(i, j)];
        if (i > 0 && j > 0) {
            const bool same = ref[i - 1] == hyp[j - 1];
            if (c == cost[at(i - 1, j - 1)] + (same ? 0 : 1)) {
                if (!same) ++b.substitutions;
                --i;
                --j;
                continue;
            }
        }
        if (i > 0 && c == cost[at(i - 1, j)] + 1) {
            ++b.deletions;
            --i;
        } else {
            ++b.insertions;
            --j;
        }
    }
    b.wer = n == 0 ? 0.0 : static_cast<double>(b.errors()) / static_cast<double>(n);
    return b;
}

WerBreakdown wer(std::string_view reference, std::string_view hypothesis) {
    const auto ref = split_words(normalize(reference));
    const auto hyp = split_words(normalize(hypothesis));
    return align_words(ref, hyp);
}

RecordVerdict judge(const QaEvalRecord& record, MatchOptions opts) {
    if (record.reference_answers.empty())
        throw std::invalid_argument("record " + record.id + ": reference_answers is empty");
    RecordVerdict v;
    v.id = record.id;
    v.s2t_hit = answer_hit(record.text_output, record.reference_answers, opts);
    if (record.speech_transcript) {
        v.s2s_hit = answer_hit(*record.speech_transcript, record.reference_answers, opts);
        try {
            v.wer = wer(record.text_output, *record.speech_transcript).wer;
        } catch (const EmptyReference&) {
            v.wer.reset();
        }
    }
    return v;
}

EvalReport evaluate(std::span<const QaEvalRecord> records, MatchOptions opts) {
    if (records.empty()) throw NoRecords();
    EvalReport r;
    r.n = records.size();
    r.verdicts.reserve(records.size());
    std::size_t s2t = 0;
    std::size_t s2s = 0;
    std::vector<double> wers;
    for (const auto& rec : records) {
        auto v = judge(rec, opts);
        s2t += v.s2t_hit ? 1 : 0;
        if (v.s2s_hit) {
            ++r.n_with_transcript;
            s2s += *v.s2s_hit ? 1 : 0;
            if (v.wer) {
                wers.push_back(*v.wer);
            } else {
                ++r.n_wer_undefined;
            }
        }
        r.verdicts.push_back(std::move(v));
    }
    r.s2t_accuracy = static_cast<double>(s2t) / static_cast<double>(r.n);
    r.s2s_accuracy =
        r.n_with_transcript == 0 ? 0.0 : static_cast<double>(s2s) / static_cast<double>(r.n_with_transcript);
    if (s2t > 0) r.rel_ratio = r.s2s_accuracy / r.s2t_accuracy;
    r.n_wer = wers.size();
    if (!wers.empty()) {
        std::sort(wers.begin(), wers.end());
        r.mean_wer = std::accumulate(wers.begin(), wers.end(), 0.0) / static_cast<double>(wers.size());
    }
    return r;
}

void from_json(const nlohmann::json& j, QaEvalRecord& r) {
    r.id = j.at("id").get<std::string>();
    r.reference_answers = j.at("references").get<std::vector<std::string>>();
    if (r.reference_answers.empty()) throw std::invalid_argument("record " + r.id + ": references is empty");
    r.text_output = j.at("text_output").get<std::string>();
    if (const auto it = j.find("speech_transcript"); it != j.end() && !it->is_null())
        r.speech_transcript = it->get<std::string>();
    else
        r.speech_transcript.reset();
}

void to_json(nlohmann::json& j, const EvalReport& r) {
    j = {
        {"n", r.n},
        {"n_with_transcript", r.n_with_transcript},
        {"n_wer", r.n_wer},
        {"n_wer_undefined", r.n_wer_undefined},
        {"s2t", r.s2t_accuracy},
        {"s2s", r.s2s_accuracy},
        {"rel", r.rel_ratio ? nlohmann::json(*r.rel_ratio) : nlohmann::json(nullptr)},
        {"mean_wer", r.mean_wer},
    };
}

std::string verdicts_csv(const EvalReport& r) {
    std::ostringstream os;
    os << "id,s2t_hit,s2s_hit,wer\n";
    for (const auto& v : r.verdicts) {
        if (v.id.find_first_of(",\"\n") != std::string::npos) {
            os << '"';
            for (const char c : v.id) os << (c == '"' ? "\"\"" : std::string(1, c));
            os << '"';
        } else {
            os << v.id;
        }
        os << ',' << (v.s2t_hit ? 1 : 0) << ',';
        if (v.s2s_hit) os << (*v.s2s_hit ? 1 : 0);
        os << ',';
        if (v.wer) os << *v.wer;
        os << '\n';
    }
    return os.str();
}

}  // namespace jointdec
