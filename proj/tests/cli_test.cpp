#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli.hpp"
#include "doctest.h"
#include "nextkey/snapshot.hpp"

using namespace nextkey;
namespace fs = std::filesystem;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result run(std::vector<std::string> args) {
    args.insert(args.begin(), "nextkey");
    std::ostringstream out;
    std::ostringstream err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

class TempDir {
public:
    TempDir() {
        path_ = fs::temp_directory_path() /
                ("nextkey_cli_test_" + std::to_string(reinterpret_cast<std::uintptr_t>(this)));
        fs::remove_all(path_);
        fs::create_directories(path_);
    }
    ~TempDir() { fs::remove_all(path_); }
    std::string file(const std::string& name, const std::string& content = {}) const {
        const fs::path p = path_ / name;
        if (!content.empty()) {
            std::ofstream(p, std::ios::binary) << content;
        }
        return p.string();
    }

private:
    fs::path path_;
};

std::string read(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

const char* kCorpus =
    R"({"ts": 1704099600, "text": "dog dot dog"})" "\n"
    R"({"ts": 1704103200, "text": "RT @x: cat"})" "\n"
    R"({"ts": 1704142800, "text": "night owl https://t.co/z"})" "\n";

}  // namespace

TEST_CASE("stats on a fresh engine") {
    const Result r = run({"stats"});
    CHECK(r.code == 0);
    CHECK(r.out.find("total\t0\t0\n") != std::string::npos);
    CHECK(r.out.find("partitions: 1\n") != std::string::npos);

    const Result t = run({"stats", "--partitions", "3"});
    CHECK(t.out.find("2\t0\t0\n") != std::string::npos);
}

TEST_CASE("accelerate twice doubles every weight") {
    TempDir dir;
    const std::string corpus = dir.file("c.jsonl", kCorpus);
    const std::string state = dir.file("state.json");
    const std::string twice = dir.file("twice.json");

    Result r = run({"accelerate", "--corpus", corpus, "--state", state, "--partitions", "2"});
    REQUIRE(r.code == 0);
    CHECK(r.out.find("trained on 2 of 3") != std::string::npos);
    r = run({"accelerate", "--corpus", corpus, "--state", state, "--out", twice});
    REQUIRE(r.code == 0);

    const Engine once = load_snapshot(state);
    const Engine doubled = load_snapshot(twice);
    CHECK(doubled.config().partitions == 2);
    for (std::size_t p = 0; p < 2; ++p) {
        const WeightedTrie& a = once.trie(p);
        const WeightedTrie& b = doubled.trie(p);
        CHECK(a.node_count() == b.node_count());
        std::vector<Cursor> stack{a.root()};
        while (!stack.empty()) {
            const Cursor at = stack.back();
            stack.pop_back();
            for (Cursor c : a.children(at)) {
                const auto other = b.find(a.spell(c));
                REQUIRE(other.has_value());
                CHECK(b.weight(*other) == 2 * a.weight(c));
                stack.push_back(c);
            }
        }
    }
    CHECK(once.trie(0).find(U"dog"));
    CHECK(once.trie(1).find(U"owl"));
    CHECK_FALSE(once.trie(0).find(U"cat"));
    CHECK_FALSE(once.trie(1).find(U"h"));

    r = run({"accelerate", "--corpus", corpus, "--state", state, "--conf", "9"});
    CHECK(r.code == 0);
    CHECK(r.err.find("note:") != std::string::npos);
}

TEST_CASE("simulate writes a CSV report") {
    TempDir dir;
    std::string corpus;
    for (int i = 0; i < 60; ++i) {
        corpus += R"({"ts": )" + std::to_string(1704067200 + i * 1800) +
                  R"(, "text": "alpha beta gamma"})" "\n";
    }
    const std::string path = dir.file("c.jsonl", corpus);
    const std::string words = dir.file("w.txt", "alpha\nzeta\n");
    const std::string out = dir.file("r.csv");
    const Result r = run({"simulate", "--corpus", path, "--partitions", "1,24", "--prune-budget",
                          "0,2", "--train-max", "40", "--train-step", "20", "--test-size", "10",
                          "--wordlist", words, "--dictionary-both", "--jobs", "2", "--out", out});
    REQUIRE(r.code == 0);
    const std::string csv = read(out);
    CHECK(csv.rfind("variant,train_size,mean_precision,words_learned,prediction_events,"
                    "empty_prediction_events\n",
                    0) == 0);
    CHECK(csv.find("\nT=1,0,") != std::string::npos);
    CHECK(csv.find("\nT=1+dict,0,") != std::string::npos);
    CHECK(csv.find("\nT=24+prune=2+dict,40,") != std::string::npos);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + 8 * 3);

    const Result warn = run({"simulate", "--corpus", path, "--test-size", "50", "--train-step", "10"});
    CHECK(warn.code == 0);
    CHECK(warn.err.find("warning:") != std::string::npos);
    CHECK(warn.out.find("T=1,10,") != std::string::npos);
}

TEST_CASE("export lists words most recent first") {
    TempDir dir;
    const std::string corpus = dir.file(
        "c.jsonl", R"({"ts": 100, "text": "old"})" "\n" R"({"ts": 200, "text": "new new"})" "\n");
    const std::string state = dir.file("s.json");
    REQUIRE(run({"accelerate", "--corpus", corpus, "--state", state}).code == 0);
    const Result r = run({"export", "--state", state});
    CHECK(r.code == 0);
    CHECK(r.out == "word\tcount\tlast_used\tpartition\nnew\t2\t200\t0\nold\t1\t100\t0\n");
}

TEST_CASE("exit codes") {
    TempDir dir;
    CHECK(run({}).code == 2);
    CHECK(run({"bogus"}).code == 2);
    CHECK(run({"simulate"}).code == 2);
    CHECK(run({"stats", "--conf", "zero"}).code == 2);
    CHECK(run({"simulate", "--corpus", "x", "--partitions", "1,,2"}).code == 2);
    CHECK(run({"--help"}).code == 0);

    const Result missing = run({"stats", "--state", dir.file("none.json")});
    CHECK(missing.code == 1);
    CHECK(missing.err.rfind("error: ", 0) == 0);
    CHECK(run({"export", "--state", dir.file("none.json")}).code == 1);
    CHECK(run({"accelerate", "--corpus", dir.file("none.jsonl"), "--state",
               dir.file("s.json")})
              .code == 1);
    const std::string bad = dir.file("bad.jsonl", "{\"ts\": 1}\n");
    const Result format = run({"accelerate", "--corpus", bad, "--state", dir.file("s.json")});
    CHECK(format.code == 1);
    CHECK(format.err.find("line 1") != std::string::npos);
    const std::string junk = dir.file("junk.json", "{}");
    CHECK(run({"stats", "--state", junk}).code == 1);
    CHECK(run({"stats", "--n-min", "4"}).code == 1);
}
