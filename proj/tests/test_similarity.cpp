#include <gtest/gtest.h>

#include <cmath>

#include "kbridge/embedding.hpp"
#include "kbridge/model.hpp"
#include "kbridge/similarity.hpp"

using namespace kbridge;

TEST(Levenshtein, Examples) {
    EXPECT_EQ(levenshtein("abc", "abc"), 0u);
    EXPECT_EQ(levenshtein("", "ab"), 2u);
    EXPECT_EQ(levenshtein("kitten", "sitting"), 3u);
    EXPECT_EQ(levenshtein("李白", "李白白"), 1u);
}

TEST(EntitySimilarity, Examples) {
    EXPECT_EQ(entity_similarity("Li Bai", "Li Bai").value, 100.0);
    EXPECT_EQ(entity_similarity("apple", "orange").value, 0.0);
    // "Li Bai" -> "Li Ronghao" needs 6 edits; the names share the token "li".
    EXPECT_EQ(levenshtein("Li Bai", "Li Ronghao"), 6u);
    EXPECT_EQ(entity_similarity("Li Bai", "Li Ronghao").value, 94.0);
    EXPECT_EQ(entity_similarity("Li Bai", "Li Ronghao").scale, SimilarityScore::Scale::EntScore);
}

TEST(Jaccard, Examples) {
    EXPECT_DOUBLE_EQ(jaccard({"a", "b"}, {"a", "b"}).value, 1.0);
    EXPECT_DOUBLE_EQ(jaccard({"a"}, {"b"}).value, 0.0);
    EXPECT_DOUBLE_EQ(jaccard({"a", "b"}, {"b", "c"}).value, 1.0 / 3.0);
    EXPECT_DOUBLE_EQ(jaccard({}, {}).value, 0.0);
    EXPECT_DOUBLE_EQ(jaccard({"a", "a", "b"}, {"b", "b"}).value, 0.5);
}

TEST(Embedding, HashEmbedderIsDeterministicAndUnitNorm) {
    HashEmbedder e;
    auto a = e.embed("registered capital");
    EXPECT_EQ(a, e.embed("registered capital"));
    EXPECT_NEAR(cosine(a, a), 1.0, 1e-9);
    double norm = 0;
    for (double x : a) norm += x * x;
    EXPECT_NEAR(norm, 1.0, 1e-9);
    EXPECT_THROW(e.embed(""), std::invalid_argument);
}

TEST(Embedding, SharedGramsScoreHigher) {
    HashEmbedder e;
    auto rc = e.embed("registered capital");
    EXPECT_GT(cosine(rc, e.embed("capital")), cosine(rc, e.embed("zebra")));
}

TEST(Embedding, CachingEmbedderMemoizes) {
    HashEmbedder inner;
    CachingEmbedder cache(inner);
    auto v = cache.embed("x y z");
    EXPECT_EQ(cache.embed("x y z"), v);
    EXPECT_EQ(cache.cached(), 1u);
    EXPECT_EQ(v, inner.embed("x y z"));
}

TEST(Embsim, SelfSimilarityIsOne) {
    HashEmbedder e;
    EXPECT_NEAR(embsim("capital", AliasList{"registered capital", "capital"}, e).value, 1.0, 1e-9);
    EXPECT_NEAR(embsim("director", AliasList{"director"}, e).value, 1.0, 1e-9);
}

TEST(Embsim, EqualsMaxOfAliasCosines) {
    HashEmbedder e;
    AliasList aliases{"founder", "founded by", "creator"};
    double best = -1;
    for (const auto& a : aliases) best = std::max(best, cosine(e.embed("founding person"), e.embed(a)));
    EXPECT_NEAR(embsim("founding person", aliases, e).value, best, 1e-12);
}

TEST(BestRelation, EmptyAndVerbatim) {
    HashEmbedder e;
    EXPECT_FALSE(best_relation({}, AliasList{"x"}, e).has_value());
    auto m = best_relation({"birthplace", "spouse", "registered capital"}, AliasList{"registered capital"}, e);
    ASSERT_TRUE(m);
    EXPECT_EQ(m->relation, "registered capital");
    EXPECT_NEAR(m->score, 1.0, 1e-9);
}

TEST(BestRelation, MatchesExhaustiveArgmax) {
    HashEmbedder e;
    std::vector<std::string> rels{"date of birth", "place of birth", "spouse", "occupation", "award received"};
    AliasList aliases{"born", "birth place"};
    std::size_t best = 0;
    std::vector<double> s;
    for (const auto& r : rels) s.push_back(embsim(r, aliases, e).value);
    for (std::size_t i = 1; i < s.size(); ++i) {
        if (s[i] > s[best]) best = i;
    }
    EXPECT_EQ(best_relation(rels, aliases, e)->relation, rels[best]);
}

TEST(Argmax, FirstMaximumWins) {
    std::vector<double> s{0.2, 0.9, 0.9};
    EXPECT_EQ(argmax_first(s), 1u);
    EXPECT_FALSE(argmax_first(std::vector<double>{}).has_value());
}
