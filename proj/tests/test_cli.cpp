#include <gtest/gtest.h>

#include <sstream>

#include "kbridge/cli.hpp"
#include "kbridge/config.hpp"
#include "kbridge/embedding.hpp"
#include "kbridge/pkb.hpp"
#include "test_support.hpp"

using namespace kbridge;
using kbridge::testing::kFixtures;
using kbridge::testing::read_text;
using kbridge::testing::TempDir;
using kbridge::testing::write_text;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

EnvLookup no_env() {
    return [](const std::string&) -> std::optional<std::string> { return std::nullopt; };
}

/// Temp workspace with a config that points the scripted provider at the
/// bundled fixtures.
class CliTest : public ::testing::Test {
  protected:
    TempDir dir;
    std::filesystem::path config = dir / "config.toml";

    void SetUp() override {
        auto fx = [](const std::string& sub) { return "\"" + (kFixtures / sub / "llm").string() + "\""; };
        auto appendix = kFixtures / "appendix" / "01_registered_capital";
        write_text(config, "[provider]\nkind = \"scripted\"\nfixtures = [" + fx("appendix") + ", " + fx("pkb") + ", " +
                               fx("cli") + ", " + fx("kbqa") + "]\n\n[kb.CNDBPedia]\ntype = \"file\"\npath = \"" +
                               (appendix / "kb.tsv").string() + "\"\n\n[kb.KB]\ntype = \"file\"\npath = \"" +
                               (kFixtures / "kbqa" / "kb.tsv").string() + "\"\n");
    }

    Result run(std::vector<std::string> args, const std::string& input = "") {
        args.insert(args.begin(), {"--config", config.string()});
        std::istringstream in(input);
        std::ostringstream out, err;
        int code = cli::run(args, in, out, err, no_env());
        return {code, out.str(), err.str()};
    }
};

const std::string kSocratesQuestion = "What did Socrates do during the Peloponnesian War?";

}  // namespace

TEST_F(CliTest, AskAppendixScenario) {
    auto r = run({"ask", "What is the registered capital of Dong Wu Securities?", "--kb", "CNDBPedia"});
    EXPECT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(r.out, "1.5 billion Yuan.\n");
}

TEST_F(CliTest, AskShowTrace) {
    auto r = run({"ask", "What is the registered capital of Dong Wu Securities?", "--kb", "CNDBPedia", "--show-trace"});
    EXPECT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(r.out,
              "1.5 billion Yuan.\n[trace CNDBPedia]\n  find_entity_or_value(entity_aliases = ['Dongwu Securities'], "
              "relation_aliases = ['Registered Capital', 'Capital']) -> Dongwu Securities, Registered Capital: 1.5 "
              "billion Yuan\n");
}

TEST_F(CliTest, AskWithoutKb) {
    auto r = run({"ask", "--no-kb", "Hello, how are you?"});
    EXPECT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(r.out, "I'm doing well, thank you.\n");
}

TEST_F(CliTest, MissingKbFileExitsTwo) {
    write_text(config, read_text(config) + "\n[kb.Gone]\ntype = \"file\"\npath = \"" + (dir / "gone.tsv").string() + "\"\n");
    auto r = run({"ask", "Anything?", "--kb", "Gone"});
    EXPECT_EQ(r.code, cli::kExitConfig);
    EXPECT_NE(r.err.find("gone.tsv"), std::string::npos);
}

TEST_F(CliTest, MissingFixtureIsProviderError) {
    auto r = run({"ask", "--no-kb", "A question nobody scripted?"});
    EXPECT_EQ(r.code, cli::kExitProvider);
}

TEST_F(CliTest, StoreFromFileAndStdin) {
    auto pkb = dir / "pkb.jsonl";
    auto r = run({"--pkb", pkb.string(), "store", "--file", (kFixtures / "pkb" / "socrates.txt").string()});
    EXPECT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(r.out, "stored 3 records\n");
    auto r2 = run({"--pkb", pkb.string(), "store"}, read_text(kFixtures / "pkb" / "shystie.txt"));
    EXPECT_EQ(r2.out, "stored 4 records\n");
    HashEmbedder e;
    EXPECT_EQ(PkbStore::load(pkb, e).record_count(), 7u);
}

TEST_F(CliTest, StoreEmptyStdinExitsTwo) {
    auto r = run({"--pkb", (dir / "pkb.jsonl").string(), "store"}, "  \n");
    EXPECT_EQ(r.code, cli::kExitConfig);
}

TEST_F(CliTest, StoreUnwritablePathExitsTwo) {
    auto r = run({"--pkb", (dir / "no" / "such" / "dir" / "pkb.jsonl").string(), "store", "--file",
                  (kFixtures / "pkb" / "socrates.txt").string()});
    EXPECT_EQ(r.code, cli::kExitConfig);
}

TEST_F(CliTest, ImportRegistersKb) {
    write_text(dir / "new.tsv", "A\tr\tB\nA\tr2\tC\nB\tr3\tD\n");
    auto r = run({"import", "--format", "triples_tsv", "--out", "Mine", (dir / "new.tsv").string()});
    EXPECT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(r.out, "3 triples\n");
    auto j = parse_toml(read_text(config));
    EXPECT_EQ(j["kb"]["Mine"]["format"], "triples_tsv");
    EXPECT_EQ(j["kb"]["CNDBPedia"]["type"], "file");

    write_text(dir / "bad.tsv", "A\tr\tB\nbroken\n");
    auto r2 = run({"import", "--format", "triples_tsv", "--out", "Mine", (dir / "bad.tsv").string()});
    EXPECT_EQ(r2.out, "1 triple, 1 skipped\n");
}

TEST_F(CliTest, EvalBaselineAndSystem) {
    auto report = dir / "report.json";
    auto r = run({"eval", "--dataset", (kFixtures / "kbqa" / "questions.tsv").string(), "--system", "knowledgpt", "--kb",
                  "KB", "--report", report.string()});
    EXPECT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("averaged F1: 1.0000"), std::string::npos) << r.out;
    auto j = nlohmann::json::parse(read_text(report));
    EXPECT_EQ(j["rows"].size(), 30u);
    EXPECT_TRUE(std::filesystem::exists(dir / "report.txt"));

    auto b = run({"eval", "--dataset", (kFixtures / "kbqa" / "questions.tsv").string(), "--system", "bm25", "--kb", "KB"});
    EXPECT_EQ(b.code, 0) << b.err;
    EXPECT_NE(b.out.find("system: bm25"), std::string::npos);
}

TEST_F(CliTest, EvalUnknownSystemExitsTwo) {
    auto r = run({"eval", "--dataset", (kFixtures / "kbqa" / "questions.tsv").string(), "--system", "oracle"});
    EXPECT_EQ(r.code, cli::kExitConfig);
}

TEST_F(CliTest, ReplAskStoreAsk) {
    std::string script = kSocratesQuestion + "\n:store " + (kFixtures / "pkb" / "socrates.txt").string() + "\n" +
                         kSocratesQuestion + "\n:quit\nnever asked\n";
    auto r = run({"repl", "--kb", "PKB"}, script);
    EXPECT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(r.out,
              "I don't know.\nstored 3 records\nHe served as a Greek hoplite and fought at Potidaea, Amphipolis and "
              "Delium.\n");
}

TEST_F(CliTest, ReplUnknownDirectiveContinues) {
    auto r = run({"repl"}, ":frobnicate\n:quit\n");
    EXPECT_EQ(r.code, 0);
    EXPECT_NE(r.err.find("unknown directive :frobnicate"), std::string::npos);
}

TEST_F(CliTest, NoSubcommandIsUsageError) {
    auto r = run({});
    EXPECT_NE(r.code, 0);
}
