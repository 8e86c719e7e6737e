#include "cli.hpp"

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "jointdec/analytics.hpp"
#include "jointdec/curation.hpp"
#include "jointdec/demux.hpp"
#include "jointdec/detail.hpp"
#include "jointdec/io.hpp"
#include "jointdec/metrics.hpp"
#include "jointdec/patterns.hpp"
#include "jointdec/simulator.hpp"

namespace jointdec::cli {

namespace {

using nlohmann::json;

// Input/validation failure; becomes exit code 1.
struct InputFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Streams {
    std::istream& in;
    std::ostream& out;
    std::ostream& err;
};

class Input {
public:
    Input(const std::string& path, std::istream& std_in) {
        if (path == "-") {
            stream_ = &std_in;
            return;
        }
        file_ = std::make_unique<std::ifstream>(path);
        if (!*file_) throw InputFailure("cannot open '" + path + "' for reading");
        stream_ = file_.get();
    }
    std::istream& get() { return *stream_; }

private:
    std::unique_ptr<std::ifstream> file_;
    std::istream* stream_ = nullptr;
};

class Output {
public:
    Output(const std::string& path, std::ostream& std_out) {
        if (path == "-") {
            stream_ = &std_out;
            return;
        }
        file_ = std::make_unique<std::ofstream>(path, std::ios::binary);
        if (!*file_) throw InputFailure("cannot open '" + path + "' for writing");
        stream_ = file_.get();
    }
    std::ostream& get() { return *stream_; }

private:
    std::unique_ptr<std::ofstream> file_;
    std::ostream* stream_ = nullptr;
};

struct LayoutOptions {
    std::string pattern = "interleaved";
    std::string ratio = "1:2";
    int k = 1;
    bool no_speech_eos = false;
    std::string vocab_path;
    bool k_given = false;

    Pattern parsed_pattern() const { return parse_pattern(pattern); }

    // Parallel layouts carry k in r_speech.
    InterleaveConfig config() const {
        InterleaveConfig cfg = parsed_pattern() == Pattern::Parallel ? InterleaveConfig{1, k} : parse_ratio(ratio);
        cfg.append_speech_eos = !no_speech_eos;
        return cfg;
    }

    VocabSpec vocab() const {
        if (vocab_path.empty()) return VocabSpec{};
        std::ifstream f(vocab_path);
        if (!f) throw InputFailure("cannot open vocab '" + vocab_path + "'");
        try {
            return json::parse(f).get<VocabSpec>();
        } catch (const std::exception& e) {
            throw InputFailure("vocab '" + vocab_path + "': " + e.what());
        }
    }
};

const CLI::Validator kRatio(
    [](std::string& s) -> std::string {
        try {
            (void)parse_ratio(s);
        } catch (const std::exception& e) {
            return e.what();
        }
        return {};
    },
    "R_T:R_S", "ratio");

void add_pattern(CLI::App* sub, LayoutOptions& o, bool with_parallel = true) {
    std::vector<std::string> choices{"interleaved", "esi"};
    if (with_parallel) choices.emplace_back("parallel");
    sub->add_option("--pattern", o.pattern, "Sequence layout")->check(CLI::IsMember(choices));
}

CLI::Option* add_ratio(CLI::App* sub, LayoutOptions& o) {
    return sub->add_option("--ratio", o.ratio, "Text:speech tokens per chunk, e.g. 5:10")->check(kRatio);
}

void add_layout(CLI::App* sub, LayoutOptions& o) {
    add_pattern(sub, o);
    auto* ratio = add_ratio(sub, o);
    auto* k = sub->add_option("--k", o.k, "Speech tokens per parallel frame")->check(CLI::PositiveNumber);
    k->excludes(ratio);
    sub->add_flag("--no-speech-eos", o.no_speech_eos, "Speech channel carries no EOS token");
    sub->add_option("--vocab", o.vocab_path, "VocabSpec JSON file (default layout if omitted)");
}

std::string record_prefix(const json& j, std::size_t lineno) {
    if (j.is_object()) {
        const auto it = j.find("id");
        if (it != j.end() && it->is_string()) return "record " + it->get<std::string>();
    }
    return "line " + std::to_string(lineno);
}

// ---------------------------------------------------------------- encode

int cmd_encode(const LayoutOptions& o, const std::string& in_path, const std::string& out_path, Streams io) {
    const VocabSpec vocab = o.vocab();
    const Pattern pattern = o.parsed_pattern();
    const InterleaveConfig cfg = o.config();
    Input in(in_path, io.in);
    Output out(out_path, io.out);
    for_each_jsonl(in.get(), [&](std::size_t lineno, const json& j) {
        try {
            const auto rec = pair_from_json(j);
            json rendered;
            switch (pattern) {
                case Pattern::Interleaved: rendered = mixed_to_json(rec.id, mux_interleaved(rec.pair, cfg, vocab)); break;
                case Pattern::EarlyStopInterleaved: rendered = mixed_to_json(rec.id, mux_esi(rec.pair, cfg, vocab)); break;
                case Pattern::Parallel:
                    rendered = frames_to_json(rec.id, mux_parallel(rec.pair, o.k, vocab, cfg.append_speech_eos));
                    break;
            }
            out.get() << rendered.dump() << '\n';
        } catch (const std::exception& e) {
            throw InputFailure(record_prefix(j, lineno) + ": " + e.what());
        }
    });
    return 0;
}

// ---------------------------------------------------------------- decode

void write_trace(std::ostream& trace, const std::string& id, const std::vector<DemuxEvent>& events) {
    for (const auto& e : events) {
        json line = {{"rec", id}, {"i", e.index}, {"ev", to_string(e.kind)}};
        if (e.kind == EventKind::TextToken || e.kind == EventKind::SpeechToken) line["id"] = e.id;
        trace << line.dump() << '\n';
    }
}

int cmd_decode(const LayoutOptions& o, bool pattern_given, bool ratio_given, const std::string& in_path,
               const std::string& out_path, const std::string& trace_path, Streams io) {
    const VocabSpec vocab = o.vocab();
    const Pattern pattern = o.parsed_pattern();
    Input in(in_path, io.in);
    Output out(out_path, io.out);
    std::optional<Output> trace;
    if (!trace_path.empty()) trace.emplace(trace_path, io.err);

    for_each_jsonl(in.get(), [&](std::size_t lineno, const json& j) {
        const std::string where = record_prefix(j, lineno);
        std::vector<DemuxEvent> events;
        std::vector<DemuxEvent>* ev = trace ? &events : nullptr;
        std::string id;
        ChannelPair pair;
        try {
            if (pattern == Pattern::Parallel) {
                auto rec = frames_from_json(j);
                if (o.k_given && o.k != rec.seq.k)
                    throw InvalidInput("record k=" + std::to_string(rec.seq.k) + " does not match --k");
                rec.seq.append_speech_eos = !o.no_speech_eos;
                id = rec.id;
                pair = demux_all(rec.seq, vocab, ev);
            } else {
                auto rec = mixed_from_json(j);
                if (pattern_given && rec.seq.pattern != pattern)
                    throw InvalidInput("record pattern '" + std::string(to_string(rec.seq.pattern)) +
                                       "' does not match --pattern");
                if (ratio_given) {
                    const auto cfg = parse_ratio(o.ratio);
                    if (cfg.r_text != rec.seq.config.r_text || cfg.r_speech != rec.seq.config.r_speech)
                        throw InvalidInput("record ratio does not match --ratio");
                }
                rec.seq.config.append_speech_eos = !o.no_speech_eos;
                id = rec.id;
                pair = demux_all(rec.seq, vocab, ev);
            }
        } catch (const std::exception& e) {
            if (trace) write_trace(trace->get(), id, events);
            throw InputFailure(where + ": " + e.what());
        }
        if (trace) write_trace(trace->get(), id, events);
        out.get() << pair_to_json(id, pair).dump() << '\n';
    });
    return 0;
}

// ---------------------------------------------------------------- analyze

int cmd_analyze(const LayoutOptions& o, double tps, const std::string& in_path, const std::string& out_path,
                Streams io) {
    const VocabSpec vocab = o.vocab();
    InterleaveConfig cfg = parse_ratio(o.ratio);
    cfg.append_speech_eos = !o.no_speech_eos;
    if (!(tps > 0.0)) throw InputFailure("--tps must be > 0");
    CorpusAccumulator acc(cfg, vocab, tps);
    Input in(in_path, io.in);
    for_each_jsonl(in.get(), [&](std::size_t lineno, const json& j) {
        IdentifiedPair rec;
        try {
            rec = pair_from_json(j);
        } catch (const std::exception& e) {
            throw InputFailure(record_prefix(j, lineno) + ": " + e.what());
        }
        acc.add(rec.id, rec.pair);
    });
    CorpusReport report;
    try {
        report = acc.report();
    } catch (const std::exception& e) {
        throw InputFailure(e.what());
    }
    json doc = report;
    doc["ratio"] = o.ratio;
    doc["tokens_per_second"] = tps;
    const double mean_text = static_cast<double>(report.total_text) / static_cast<double>(report.records);
    const auto expected = expected_reduction(report.pad_to_text_ratio, cfg, mean_text);
    doc["expected_reduction"] = {
        {"asymptotic", expected.asymptotic}, {"with_marker", expected.with_marker}, {"mean_text_len", mean_text}};
    Output out(out_path, io.out);
    out.get() << doc.dump(2) << '\n';
    return 0;
}

// ---------------------------------------------------------------- eval

int cmd_eval(const std::string& pred_path, const std::string& out_path, const std::string& csv_path,
             bool raw_substring, Streams io) {
    std::vector<QaEvalRecord> records;
    Input in(pred_path, io.in);
    for_each_jsonl(in.get(), [&](std::size_t lineno, const json& j) {
        try {
            records.push_back(j.get<QaEvalRecord>());
        } catch (const std::exception& e) {
            throw InputFailure(record_prefix(j, lineno) + ": " + e.what());
        }
    });
    EvalReport report;
    try {
        report = evaluate(records, MatchOptions{raw_substring});
    } catch (const std::exception& e) {
        throw InputFailure(e.what());
    }
    json doc = report;
    doc["containment"] = raw_substring ? "raw_substring" : "word_boundary";
    Output out(out_path, io.out);
    out.get() << doc.dump(2) << '\n';
    if (!csv_path.empty()) {
        Output csv(csv_path, io.out);
        csv.get() << verdicts_csv(report);
    }
    return 0;
}

// ---------------------------------------------------------------- curate

struct CurateArgs {
    std::string in_path = "-";
    std::string out_path = "-";
    std::string summary_path;
    double wer_threshold = 0.20;
    int speakers = 1000;
    std::uint64_t seed = 0;
    bool mock = false;
    double del_rate = 0.0;
    double sub_rate = 0.0;
    unsigned workers = 1;
};

int cmd_curate(const CurateArgs& a, Streams io) {
    if (!a.mock) {
        io.err << "curate: only the mock client suite ships with this build; pass --mock. "
                  "Real clients read JOINTDEC_REWRITE_URL, JOINTDEC_TTS_URL, JOINTDEC_ASR_URL "
                  "and JOINTDEC_API_KEY.\n";
        return 2;
    }
    std::vector<QaSourceRecord> records;
    Input in(a.in_path, io.in);
    for_each_jsonl(in.get(), [&](std::size_t lineno, const json& j) {
        try {
            records.push_back(j.get<QaSourceRecord>());
        } catch (const std::exception& e) {
            throw InputFailure(record_prefix(j, lineno) + ": " + e.what());
        }
    });
    ClientSuite clients;
    try {
        clients = mock_clients(a.seed, NoiseSpec{a.del_rate, a.sub_rate});
    } catch (const std::exception& e) {
        throw InputFailure(e.what());
    }
    CurationOptions opts{a.wer_threshold, a.speakers, a.seed, a.workers};
    const auto result = curate(records, clients, opts);
    Output out(a.out_path, io.out);
    for (const auto& r : result.records) out.get() << json(r).dump() << '\n';
    const json summary = result.summary;
    if (!a.summary_path.empty()) {
        Output s(a.summary_path, io.out);
        s.get() << summary.dump(2) << '\n';
    } else {
        io.err << "curate: " << summary.dump() << '\n';
    }
    return 0;
}

// ---------------------------------------------------------------- simulate / bench

std::vector<IdentifiedPair> read_pairs(const std::string& path, std::istream& std_in) {
    std::vector<IdentifiedPair> pairs;
    Input in(path, std_in);
    for_each_jsonl(in.get(), [&](std::size_t lineno, const json& j) {
        try {
            pairs.push_back(pair_from_json(j));
        } catch (const std::exception& e) {
            throw InputFailure(record_prefix(j, lineno) + ": " + e.what());
        }
    });
    if (pairs.empty()) throw InputFailure("corpus is empty");
    return pairs;
}

struct SimulateArgs {
    std::string corpus = "-";
    std::string report = "-";
    double corrupt_rate = 0.0;
    std::uint64_t seed = 0;
    std::string corrupt_mode = "opposite";
    unsigned workers = 1;
};

int cmd_simulate(const LayoutOptions& o, const SimulateArgs& a, Streams io) {
    const VocabSpec vocab = o.vocab();
    const Pattern pattern = o.parsed_pattern();
    const InterleaveConfig cfg = o.config();
    const auto mode = a.corrupt_mode == "uniform" ? CorruptionMode::UniformId : CorruptionMode::OppositeChannel;
    const auto pairs = read_pairs(a.corpus, io.in);

    std::vector<RunTranscript> runs(pairs.size());
    std::vector<std::string> setup_errors(pairs.size());
    detail::parallel_for(pairs.size(), a.workers, [&](std::size_t i) {
        const auto seed = a.seed ^ detail::fnv1a(pairs[i].id);
        try {
            runs[i] = run(corrupting(replay(pairs[i].pair, pattern, cfg), a.corrupt_rate, seed, mode), pattern,
                          cfg, vocab);
        } catch (const std::exception& e) {
            setup_errors[i] = e.what();
        }
    });

    json records = json::array();
    std::map<std::string, std::size_t> by_kind;
    std::size_t ok = 0, failed = 0, silent = 0, corrupted = 0, tokens = 0;
    double seconds = 0.0;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        if (!setup_errors[i].empty())
            throw InputFailure("record " + pairs[i].id + ": " + setup_errors[i]);
        const auto& t = runs[i];
        json rec = t;
        rec.erase("elapsed_ns");
        rec.erase("throughput_tps");
        rec["id"] = pairs[i].id;
        const bool intact = t.pair && *t.pair == pairs[i].pair;
        rec["reconstructed"] = intact;
        records.push_back(std::move(rec));
        if (!t.corrupted_positions.empty()) ++corrupted;
        if (t.error) {
            ++failed;
            ++by_kind[std::string(to_string(t.error->kind))];
        } else {
            ++ok;
            if (!intact) ++silent;
        }
        tokens += t.tokens_consumed;
        seconds += std::chrono::duration<double>(t.elapsed).count();
    }
    const json doc = {
        {"pattern", o.pattern},
        {"ratio", std::to_string(cfg.r_text) + ":" + std::to_string(cfg.r_speech)},
        {"corrupt_rate", a.corrupt_rate},
        {"corrupt_mode", a.corrupt_mode},
        {"seed", a.seed},
        {"records", pairs.size()},
        {"ok", ok},
        {"failed", failed},
        {"corrupted_records", corrupted},
        {"silently_wrong", silent},
        {"errors_by_kind", by_kind},
        {"runs", records},
    };
    Output out(a.report, io.out);
    out.get() << doc.dump(2) << '\n';
    io.err << "simulate: " << tokens << " tokens, " << (seconds > 0 ? tokens / seconds : 0.0) << " tokens/s\n";
    return 0;
}

int cmd_bench(const LayoutOptions& o, const std::string& corpus, unsigned workers, int reps, Streams io) {
    const VocabSpec vocab = o.vocab();
    const auto pairs = read_pairs(corpus, io.in);
    std::vector<ChannelPair> plain;
    plain.reserve(pairs.size());
    for (const auto& p : pairs) plain.push_back(p.pair);
    BenchSummary b;
    try {
        b = bench(plain, o.parsed_pattern(), o.config(), vocab, reps, workers);
    } catch (const std::exception& e) {
        throw InputFailure(e.what());
    }
    io.out << json(b).dump(2) << '\n';
    return 0;
}

}  // namespace

int run(int argc, const char* const* argv, std::istream& in, std::ostream& out, std::ostream& err) {
    CLI::App app{"Joint speech-text sequence codecs, analytics and SpokenQA evaluation", "jointdec"};
    app.set_version_flag("--version", std::string("jointdec ") + kVersion);
    app.require_subcommand(1);
    Streams io{in, out, err};

    LayoutOptions layout;
    std::string in_path = "-";
    std::string out_path = "-";

    auto* encode = app.add_subcommand("encode", "Multiplex ChannelPair JSONL into sequence records");
    add_layout(encode, layout);
    encode->add_option("--in", in_path, "Input JSONL ('-' = stdin)");
    encode->add_option("--out", out_path, "Output JSONL ('-' = stdout)");

    std::string trace_path;
    auto* decode = app.add_subcommand("decode", "Demultiplex sequence records back into ChannelPair JSONL");
    add_layout(decode, layout);
    decode->add_option("--in", in_path, "Input JSONL ('-' = stdin)");
    decode->add_option("--out", out_path, "Output JSONL ('-' = stdout)");
    decode->add_option("--trace", trace_path, "Write the demux event log as JSONL to this path");

    double tps = kDefaultTokensPerSecond;
    auto* analyze = app.add_subcommand("analyze", "Sequence-length and padding statistics for a corpus");
    add_ratio(analyze, layout);
    analyze->add_flag("--no-speech-eos", layout.no_speech_eos, "Speech channel carries no EOS token");
    analyze->add_option("--vocab", layout.vocab_path, "VocabSpec JSON file");
    analyze->add_option("--tps", tps, "Speech tokens per second of audio");
    analyze->add_option("--in", in_path, "Input ChannelPair JSONL");
    analyze->add_option("--out", out_path, "Output JSON");

    std::string csv_path;
    bool raw_substring = false;
    auto* eval = app.add_subcommand("eval", "SpokenQA S2T/S2S accuracy, S2S/S2T ratio and WER");
    eval->add_option("--pred", in_path, "Prediction JSONL");
    eval->add_option("--out", out_path, "Output JSON");
    eval->add_option("--csv", csv_path, "Per-record CSV output path");
    eval->add_flag("--raw-substring", raw_substring, "Plain substring containment instead of word-aligned");

    CurateArgs curate_args;
    auto* curate_cmd = app.add_subcommand("curate", "QA data curation with ASR-WER filtering");
    curate_cmd->add_option("--in", curate_args.in_path, "Input JSONL {id, question, answer}");
    curate_cmd->add_option("--out", curate_args.out_path, "Output JSONL");
    curate_cmd->add_option("--summary", curate_args.summary_path, "Write the summary JSON here (default: stderr)");
    curate_cmd->add_option("--wer-threshold", curate_args.wer_threshold, "Drop answers with WER above this")
        ->check(CLI::Range(0.0, 1.0));
    curate_cmd->add_option("--speakers", curate_args.speakers, "Speaker prompt pool size")->check(CLI::PositiveNumber);
    curate_cmd->add_option("--seed", curate_args.seed, "Seed for speaker draws and mock ASR noise");
    auto* mock = curate_cmd->add_flag("--mock", curate_args.mock, "Use the deterministic mock clients");
    curate_cmd->add_option("--asr-del-rate", curate_args.del_rate, "Mock ASR word deletion rate")
        ->check(CLI::Range(0.0, 1.0))
        ->needs(mock);
    curate_cmd->add_option("--asr-sub-rate", curate_args.sub_rate, "Mock ASR word substitution rate")
        ->check(CLI::Range(0.0, 1.0))
        ->needs(mock);
    curate_cmd->add_option("--workers", curate_args.workers, "Records in flight")->check(CLI::PositiveNumber);

    SimulateArgs sim;
    auto* simulate = app.add_subcommand("simulate", "Replay a corpus through the demuxer, optionally corrupted");
    add_layout(simulate, layout);
    simulate->add_option("--corpus", sim.corpus, "ChannelPair JSONL");
    simulate->add_option("--corrupt-rate", sim.corrupt_rate, "Per-token corruption probability")
        ->check(CLI::Range(0.0, 1.0));
    simulate->add_option("--corrupt-mode", sim.corrupt_mode, "opposite | uniform")
        ->check(CLI::IsMember({"opposite", "uniform"}));
    simulate->add_option("--seed", sim.seed, "Corruption seed");
    simulate->add_option("--report", sim.report, "Report JSON path");
    simulate->add_option("--workers", sim.workers, "Parallel streams")->check(CLI::PositiveNumber);

    std::string bench_corpus = "-";
    unsigned bench_workers = 1;
    int reps = 3;
    auto* bench_cmd = app.add_subcommand("bench", "Demux throughput over a corpus");
    add_layout(bench_cmd, layout);
    bench_cmd->add_option("--corpus", bench_corpus, "ChannelPair JSONL");
    bench_cmd->add_option("--workers", bench_workers, "Parallel streams")->check(CLI::PositiveNumber);
    bench_cmd->add_option("--reps", reps, "Timing repetitions")->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*encode) return cmd_encode(layout, in_path, out_path, io);
        if (*decode) {
            layout.k_given = decode->count("--k") > 0;
            return cmd_decode(layout, decode->count("--pattern") > 0, decode->count("--ratio") > 0, in_path,
                              out_path, trace_path, io);
        }
        if (*analyze) return cmd_analyze(layout, tps, in_path, out_path, io);
        if (*eval) return cmd_eval(in_path, out_path, csv_path, raw_substring, io);
        if (*curate_cmd) return cmd_curate(curate_args, io);
        if (*simulate) return cmd_simulate(layout, sim, io);
        if (*bench_cmd) return cmd_bench(layout, bench_corpus, bench_workers, reps, io);
    } catch (const InputFailure& e) {
        err << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        err << e.what() << '\n';
        return 1;
    }
    return 2;
}

}  // namespace jointdec::cli
