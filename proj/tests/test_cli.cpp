#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli.hpp"
#include "jointdec/io.hpp"
#include "support.hpp"

using namespace jointdec;
using namespace testing;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result invoke(std::vector<std::string> args, const std::string& stdin_text = "") {
    args.insert(args.begin(), "jointdec");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::istringstream in(stdin_text);
    std::ostringstream out, err;
    const int code = cli::run(static_cast<int>(argv.size()), argv.data(), in, out, err);
    return {code, out.str(), err.str()};
}

std::filesystem::path temp_file(const std::string& name, const std::string& content) {
    const auto path = std::filesystem::temp_directory_path() / ("jointdec_test_" + name);
    std::ofstream(path) << content;
    return path;
}

std::string vocab_file() { return temp_file("vocab.json", nlohmann::json(small_vocab()).dump()).string(); }

std::string esi_example_pair() {
    return pair_to_json("ex", {text_seq(7), speech_seq(24)}).dump() + "\n";
}

}  // namespace

TEST_CASE("encode esi 5:10 emits the 34-token record") {
    const auto r = invoke({"encode", "--pattern", "esi", "--ratio", "5:10", "--vocab", vocab_file()}, esi_example_pair());
    REQUIRE(r.code == 0);
    const auto j = nlohmann::json::parse(r.out);
    CHECK(j.at("pattern") == "esi");
    CHECK(j.at("r_text") == 5);
    CHECK(j.at("r_speech") == 10);
    CHECK(j.at("tokens").size() == 34);
    CHECK(j.at("tokens").get<TokenSeq>() ==
          cat({range_of(T, 1, 5), range_of(S, 1, 10), {T(6), T(7), E, M}, range_of(S, 11, 24), {Q}}));
}

TEST_CASE("encode | decode is the identity") {
    std::mt19937_64 rng(1);
    const auto v = small_vocab();
    std::string input;
    for (int i = 0; i < 40; ++i)
        input += pair_to_json("r" + std::to_string(i), random_pair(rng, v, 20, 200, chunked_min(1, 1))).dump() + "\n";
    for (const std::vector<std::string> layout :
         {std::vector<std::string>{"--pattern", "interleaved", "--ratio", "1:1"},
          std::vector<std::string>{"--pattern", "esi", "--ratio", "1:1"},
          std::vector<std::string>{"--pattern", "parallel", "--k", "1"}}) {
        auto enc_args = std::vector<std::string>{"encode", "--vocab", vocab_file()};
        enc_args.insert(enc_args.end(), layout.begin(), layout.end());
        const auto enc = invoke(enc_args, input);
        REQUIRE(enc.code == 0);
        auto dec_args = enc_args;
        dec_args[0] = "decode";
        const auto dec = invoke(dec_args, enc.out);
        REQUIRE(dec.code == 0);
        CHECK(dec.out == input);
    }
}

TEST_CASE("decode reports the record and the offending index") {
    const std::string valid =
        R"({"id":"ok","pattern":"interleaved","r_text":1,"r_speech":2,"tokens":[1,1001,1002,2,1003,1004,98,1999]})";
    CHECK(invoke({"decode", "--vocab", vocab_file()}, valid + "\n").code == 0);

    const std::string corrupted =
        R"({"id":"q17","pattern":"interleaved","r_text":1,"r_speech":2,"tokens":[1,1001,1002,1003,1004,1005,98,1999]})";
    const auto c = invoke({"decode", "--pattern", "interleaved", "--ratio", "1:2", "--vocab", vocab_file()}, corrupted + "\n");
    CHECK(c.code == 1);
    CHECK(c.err == "record q17: WrongChannel at index 3\n");

    const auto mismatch = invoke({"decode", "--pattern", "esi", "--vocab", vocab_file()}, valid + "\n");
    CHECK(mismatch.code == 1);
}

TEST_CASE("decode --trace writes one event per line") {
    const auto trace = std::filesystem::temp_directory_path() / "jointdec_test_trace.jsonl";
    const std::string rec = R"({"id":"a","pattern":"esi","r_text":5,"r_speech":10,"tokens":[98,500,1001,1999]})";
    const auto r = invoke({"decode", "--vocab", vocab_file(), "--trace", trace.string()}, rec + "\n");
    REQUIRE(r.code == 0);
    std::ifstream f(trace);
    std::vector<nlohmann::json> lines;
    for (std::string line; std::getline(f, line);) lines.push_back(nlohmann::json::parse(line));
    REQUIRE(lines.size() == 4);
    CHECK(lines[0] == nlohmann::json{{"rec", "a"}, {"i", 0}, {"ev", "text_done"}});
    CHECK(lines[1] == nlohmann::json{{"rec", "a"}, {"i", 2}, {"ev", "speech"}, {"id", 1001}});
    CHECK(lines[2] == nlohmann::json{{"rec", "a"}, {"i", 3}, {"ev", "speech_done"}});
    CHECK(lines[3].at("ev") == "done");
}

TEST_CASE("usage errors exit 2") {
    CHECK(invoke({}).code == 2);
    CHECK(invoke({"encode", "--ratio", "5-10"}).code == 2);
    CHECK(invoke({"encode", "--pattern", "thinker"}).code == 2);
    CHECK(invoke({"encode", "--ratio", "1:2", "--k", "3"}).code == 2);
    CHECK(invoke({"curate", "--asr-del-rate", "0.5"}).code == 2);
    CHECK(invoke({"curate"}, "").code == 2);
    CHECK(invoke({"frobnicate"}).code == 2);
    const auto v = invoke({"--version"});
    CHECK(v.code == 0);
    CHECK(v.out.find("1.0.0") != std::string::npos);
}

TEST_CASE("encode surfaces underruns as input errors") {
    const auto line = pair_to_json("short", {text_seq(5), speech_seq(1)}).dump() + "\n";
    const auto r = invoke({"encode", "--vocab", vocab_file()}, line);
    CHECK(r.code == 1);
    CHECK(r.err.rfind("record short: SpeechUnderrun", 0) == 0);
    CHECK(invoke({"encode"}, "{not json\n").code == 1);
}

TEST_CASE("analyze emits a CorpusReport") {
    const auto r = invoke({"analyze", "--ratio", "5:10", "--vocab", vocab_file()}, esi_example_pair());
    REQUIRE(r.code == 0);
    const auto j = nlohmann::json::parse(r.out);
    CHECK(j.at("records") == 1);
    CHECK(j.at("mean_reduction").get<double>() == doctest::Approx(0.85));
    CHECK(j.at("total_pads") == 7);
    CHECK(j.at("len_interleaved").at("p50") == 40.0);
    CHECK(j.contains("pad_to_text_ratio"));
    CHECK(invoke({"analyze"}, "").code == 1);
}

TEST_CASE("eval prints s2t, s2s, rel and mean_wer") {
    const std::string preds =
        R"({"id":"1","references":["Paris"],"text_output":"It is Paris.","speech_transcript":"it is paris"})"
        "\n"
        R"({"id":"2","references":["Rome"],"text_output":"Rome.","speech_transcript":"roam"})"
        "\n";
    const auto csv = std::filesystem::temp_directory_path() / "jointdec_test_eval.csv";
    const auto r = invoke({"eval", "--pred", "-", "--csv", csv.string()}, preds);
    REQUIRE(r.code == 0);
    const auto j = nlohmann::json::parse(r.out);
    CHECK(j.at("s2t") == 1.0);
    CHECK(j.at("s2s") == 0.5);
    CHECK(j.at("rel") == 0.5);
    CHECK(j.at("mean_wer") == 0.5);
    std::ifstream f(csv);
    std::stringstream ss;
    ss << f.rdbuf();
    CHECK(ss.str() == "id,s2t_hit,s2s_hit,wer\n1,1,1,0\n2,1,0,1\n");
    CHECK(invoke({"eval"}, "").code == 1);
}

TEST_CASE("curate --mock is deterministic") {
    std::string input;
    for (int i = 0; i < 30; ++i)
        input += nlohmann::json{{"id", "q" + std::to_string(i)}, {"question", "Who is " + std::to_string(i) + "?"},
                                {"answer", "person " + std::to_string(i) + " from the town"}}
                     .dump() +
                 "\n";
    const std::vector<std::string> args{"curate", "--mock", "--seed", "3", "--speakers", "8",
                                        "--asr-del-rate", "0.1", "--asr-sub-rate", "0.05"};
    const auto a = invoke(args, input);
    const auto b = invoke(args, input);
    REQUIRE(a.code == 0);
    CHECK(a.out == b.out);
    std::istringstream lines(a.out);
    int n = 0;
    for (std::string line; std::getline(lines, line); ++n) {
        const auto j = nlohmann::json::parse(line);
        CHECK(j.contains("status"));
        CHECK(j.contains("reason"));
        CHECK((j.at("status") == "kept") == (j.at("answer_wer").get<double>() <= 0.2));
    }
    CHECK(n == 30);
    CHECK(a.err.find("\"total\":30") != std::string::npos);
}

TEST_CASE("simulate and bench") {
    std::mt19937_64 rng(2);
    const auto v = small_vocab();
    std::string corpus;
    for (int i = 0; i < 20; ++i)
        corpus += pair_to_json("s" + std::to_string(i), random_pair(rng, v, 10, 100, chunked_min(5, 10))).dump() + "\n";
    const std::vector<std::string> sim{"simulate", "--pattern", "esi",           "--ratio", "5:10", "--vocab",
                                       vocab_file(), "--corrupt-rate", "0.05", "--seed", "4"};
    const auto a = invoke(sim, corpus);
    const auto b = invoke(sim, corpus);
    REQUIRE(a.code == 0);
    CHECK(a.out == b.out);
    const auto j = nlohmann::json::parse(a.out);
    CHECK(j.at("records") == 20);
    CHECK(j.at("silently_wrong") == 0);
    CHECK(j.at("ok").get<int>() + j.at("failed").get<int>() == 20);

    const auto clean = nlohmann::json::parse(invoke({"simulate", "--pattern", "esi", "--ratio", "5:10", "--vocab", vocab_file()}, corpus).out);
    CHECK(clean.at("ok") == 20);

    const auto bench = invoke({"bench", "--pattern", "interleaved", "--ratio", "5:10", "--vocab", vocab_file(), "--reps", "2"}, corpus);
    REQUIRE(bench.code == 0);
    const auto bj = nlohmann::json::parse(bench.out);
    CHECK(bj.at("repetitions") == 2);
    CHECK(bj.at("aggregate_tps").get<double>() > 0.0);
}
