#include <gtest/gtest.h>

#include <cmath>

#include "kbridge/embedding.hpp"
#include "kbridge/errors.hpp"
#include "kbridge/eval.hpp"
#include "kbridge/kb.hpp"
#include "kbridge/similarity.hpp"
#include "test_support.hpp"

using namespace kbridge;
using kbridge::testing::TempDir;
using kbridge::testing::write_text;

namespace {

FileKb kb_from(TempDir& d, const std::string& rows) {
    write_text(d / "kb.tsv", rows);
    return load_file_kb(d / "kb.tsv", KbFormat::TriplesTsv);
}

ExtractedRecord desc(const std::string& entity, const std::string& text) {
    return ExtractedRecord{ExtractedRecord::Kind::Description, AliasList{entity}, "", text};
}

const char* kChain = "Alpha\tfounder\tBravo\nBravo\tbirthplace\tCharlie\nDelta\tbirthplace\tEcho\n";

}  // namespace

TEST(AveragedF1, Examples) {
    EXPECT_DOUBLE_EQ(averaged_f1({"a", "b"}, {"a", "b"}), 1.0);
    EXPECT_DOUBLE_EQ(averaged_f1({"a", "x"}, {"a", "b"}), 0.5);
    EXPECT_DOUBLE_EQ(averaged_f1({"  Paris \n"}, {"Paris"}), 1.0);
    EXPECT_DOUBLE_EQ(averaged_f1({"ＰＡＲＩＳ"}, {"paris"}), 1.0);
    EXPECT_THROW(averaged_f1({"a"}, {"a", "b"}), std::invalid_argument);
    EXPECT_THROW(averaged_f1({}, {}), std::invalid_argument);
}

TEST(AveragedF1, OrderInvariant) {
    EXPECT_DOUBLE_EQ(averaged_f1({"a", "x", "c"}, {"a", "b", "c"}), averaged_f1({"c", "a", "x"}, {"c", "a", "b"}));
}

TEST(WordSet, DropsStopwordsAndLemmatizes) {
    EXPECT_EQ(word_set("The cities were founded"), (std::set<std::string>{"city", "found"}));
    EXPECT_EQ(lemmatize("studies"), "study");
    EXPECT_EQ(lemmatize("running"), "run");
    EXPECT_EQ(lemmatize("glass"), "glass");
}

TEST(WordRecall, Examples) {
    std::string doc = "Socrates served as a Greek hoplite at Delium.";
    EXPECT_DOUBLE_EQ(word_recall({desc("Socrates", doc)}, doc), 1.0);
    EXPECT_DOUBLE_EQ(word_recall({}, doc), 0.0);
    EXPECT_THROW(word_recall({}, "   "), std::invalid_argument);
    EXPECT_DOUBLE_EQ(word_recall({}, "the of and"), 1.0);
    EXPECT_THROW(word_recall({desc("X", "word")}, "the of and"), std::invalid_argument);
}

TEST(WordRecall, TenWordsEightCovered) {
    std::string doc = "alpha bravo charlie delta echo foxtrot golf hotel india juliet";
    ASSERT_EQ(word_set(doc).size(), 10u);
    EXPECT_DOUBLE_EQ(word_recall({desc("alpha", "bravo charlie delta echo foxtrot golf hotel")}, doc), 0.8);
}

TEST(WordRecall, Monotone) {
    std::string doc = "Marie Curie discovered polonium and radium in Paris.";
    std::vector<ExtractedRecord> recs;
    double prev = word_recall(recs, doc);
    for (const auto& piece : {"Marie Curie", "discovered radium", "polonium", "unrelated words", "Paris"}) {
        recs.push_back(desc("Marie Curie", piece));
        double now = word_recall(recs, doc);
        EXPECT_GE(now, prev);
        prev = now;
    }
    EXPECT_DOUBLE_EQ(prev, 1.0);
}

TEST(Bm25, MatchesFormulaOnThreeDocs) {
    Bm25Index idx({{"a", "b"}, {"b", "c", "c"}, {"d"}});
    // avgdl = 2, N = 3; "c" appears in one document twice.
    double idf_c = std::log((3 - 1 + 0.5) / (1 + 0.5) + 1);
    double tf = 2, dl = 3, avgdl = 2;
    double want = idf_c * tf * 2.5 / (tf + 1.5 * (1 - 0.75 + 0.75 * dl / avgdl));
    EXPECT_NEAR(idx.score({"c"}, 1), want, 1e-12);
    EXPECT_EQ(idx.score({"c"}, 0), 0.0);
}

TEST(Bm25Baseline, SingleEntityRelationVerbatim) {
    TempDir d;
    auto kb = kb_from(d, "Dongwu Securities\tregistered capital\t1.5 billion Yuan\nDongwu Securities\theadquarters\tSuzhou\n");
    EXPECT_EQ(bm25_baseline("What is the registered capital of Dongwu Securities?", kb, 1), "1.5 billion Yuan");
}

TEST(Bm25Baseline, ZeroOverlapIsLowConfidence) {
    TempDir d;
    auto kb = kb_from(d, kChain);
    auto r = Bm25Baseline(kb).answer("Zzz qqq?", 1);
    EXPECT_TRUE(r.low_confidence);
}

TEST(Bm25Baseline, TwoHopChain) {
    TempDir d;
    auto kb = kb_from(d, kChain);
    EXPECT_EQ(bm25_baseline("What is the birthplace of the founder of Alpha?", kb, 2), "Charlie");
}

TEST(EmbeddingBaseline, ExactRenderingScoresOne) {
    TempDir d;
    auto kb = kb_from(d, kChain);
    HashEmbedder e;
    EmbeddingBaseline base(kb, e);
    auto r = base.answer("Bravo birthplace Charlie", 1);
    EXPECT_EQ(r.chosen.relation, "birthplace");
    EXPECT_EQ(r.answer, "Charlie");
    auto s = base.scores("Bravo birthplace Charlie");
    EXPECT_NEAR(s[1], 1.0, 1e-9);
}

TEST(EmbeddingBaseline, ScoresMatchExhaustiveCosines) {
    TempDir d;
    auto kb = kb_from(d, "A\tr1\tB\nA\tr2\tC\nB\tr3\tD\nE\tr4\tF\nG\tr5\tH\n");
    HashEmbedder e;
    EmbeddingBaseline base(kb, e);
    auto s = base.scores("A r2 something");
    auto qv = e.embed("A r2 something");
    const auto& ts = base.triples();
    ASSERT_EQ(ts.size(), 5u);
    for (std::size_t i = 0; i < ts.size(); ++i) EXPECT_NEAR(s[i], cosine(qv, e.embed(render_triple(ts[i]))), 1e-12);
}

TEST(EmbeddingBaseline, TwoHopChain) {
    TempDir d;
    auto kb = kb_from(d, kChain);
    HashEmbedder e;
    EXPECT_EQ(embedding_baseline("Alpha founder", kb, e, 2), "Charlie");
}

TEST(RunEval, EmptyDatasetAndMissingContext) {
    EvalContext ctx;
    EXPECT_THROW(run_eval({}, EvalSystem::Bm25, ctx), std::invalid_argument);
    EXPECT_THROW(run_eval({{"q", "a", 1}}, EvalSystem::Bm25, ctx), std::invalid_argument);
}

TEST(RunEval, Bm25ReportAggregates) {
    TempDir d;
    auto kb = kb_from(d, kChain);
    EvalContext ctx;
    ctx.kb = &kb;
    auto rep = run_eval({{"What is the birthplace of the founder of Alpha?", "Charlie", 2},
                         {"Who is the founder of Alpha?", "Bravo", 1},
                         {"Zzz?", "Echo", 1}},
                        EvalSystem::Bm25, ctx);
    ASSERT_EQ(rep.rows.size(), 3u);
    EXPECT_DOUBLE_EQ(rep.averaged_f1, 2.0 / 3.0);
    EXPECT_EQ(rep.to_json()["averaged_f1"], rep.averaged_f1);
    EXPECT_EQ(rep.to_json()["config"]["bm25"]["k1"], 1.5);
    EXPECT_NE(rep.to_table().find("system: bm25"), std::string::npos);
}

TEST(Datasets, LoadQaTsv) {
    TempDir d;
    write_text(d / "qa.tsv", "Who?\tMe\t1\nWhat then?\tIt\t2\n");
    auto rows = load_qa_tsv(d / "qa.tsv");
    ASSERT_EQ(rows.size(), 2u);
    EXPECT_EQ(rows[1].hops, 2);
    write_text(d / "bad.tsv", "Who?\tMe\t1\nbroken\n");
    EXPECT_THROW(load_qa_tsv(d / "bad.tsv"), FormatError);
}

TEST(Datasets, LoadMultidocDirectory) {
    auto ex = load_multidoc(kbridge::testing::kFixtures / "hotpot" / "examples");
    ASSERT_EQ(ex.size(), 5u);
    EXPECT_EQ(ex[0].type, "bridge");
    EXPECT_EQ(ex[0].documents.size(), 2u);
}
