#include <gtest/gtest.h>

#include "kbridge/model.hpp"
#include "kbridge/text.hpp"

using namespace kbridge;

TEST(Text, Utf8RoundTrip) {
    std::string s = "Li Bai 李白 é 😀";
    EXPECT_EQ(text::encode_utf8(text::decode_utf8(s)), s);
    EXPECT_EQ(text::length(s), 13u);
}

TEST(Text, InvalidBytesBecomeReplacement) {
    auto cps = text::decode_utf8(std::string("a\xff") + "b");
    ASSERT_EQ(cps.size(), 3u);
    EXPECT_EQ(cps[1], U'�');
}

TEST(Text, TruncateKeepsWholeCodePoints) {
    EXPECT_EQ(text::truncate("李白静夜思", 2), "李白");
    EXPECT_EQ(text::truncate("abc", 10), "abc");
}

TEST(Text, TokenizeSplitsCjkPerCharacter) {
    EXPECT_EQ(text::tokenize("Li Bai's poem, 静夜思!"),
              (std::vector<std::string>{"li", "bai", "s", "poem", "静", "夜", "思"}));
}

TEST(Text, TokenSetKeepsFirstOccurrenceOrder) {
    EXPECT_EQ(text::token_set("b a B c a"), (std::vector<std::string>{"b", "a", "c"}));
}

TEST(Text, HalfWidth) {
    EXPECT_EQ(text::to_half_width("ＡＢＣ１２３　x"), "ABC123 x");
}

TEST(Text, TrimAndFold) {
    EXPECT_EQ(text::trim("  \t hi there \n"), "hi there");
    EXPECT_EQ(text::case_fold("Dongwu SECURITIES"), "dongwu securities");
}

TEST(Text, SplitSentences) {
    EXPECT_EQ(text::split_sentences("X was born in 1923. X died in 2005."),
              (std::vector<std::string>{"X was born in 1923.", "X died in 2005."}));
    EXPECT_EQ(text::split_sentences("Version 1.5 shipped. Done"),
              (std::vector<std::string>{"Version 1.5 shipped.", "Done"}));
    EXPECT_EQ(text::split_sentences("他是诗人。 他很有名。"),
              (std::vector<std::string>{"他是诗人。", "他很有名。"}));
}

TEST(Text, SplitAndJoin) {
    auto parts = text::split("a\tb\t\tc", '\t');
    EXPECT_EQ(parts, (std::vector<std::string>{"a", "b", "", "c"}));
    EXPECT_EQ(text::join(parts, "|"), "a|b||c");
}

TEST(Model, RenderMessage) {
    EXPECT_EQ(render_message("CNDBPedia", "find_entity_or_value",
                             "entity_aliases = ['Dongwu Securities'], relation_aliases = ['Registered Capital', 'Capital']",
                             "Dongwu Securities, Registered Capital: 1.5 billion Yuan"),
              "[FROM CNDBPedia][find_entity_or_value(entity_aliases = ['Dongwu Securities'], relation_aliases = "
              "['Registered Capital', 'Capital']) -> ] Dongwu Securities, Registered Capital: 1.5 billion Yuan");
    EXPECT_EQ(render_message("PKB", "get_entity_info", "entity_aliases = ['X']", ""),
              "[FROM PKB][get_entity_info(entity_aliases = ['X']) -> ] ");
    EXPECT_EQ(render_message("FileKB", "find_relationship", "entity1_aliases = ['Li Ronghao'], entity2_aliases = ['Li Bai']",
                             "Li Ronghao, Representative Work: Li Bai"),
              "[FROM FileKB][find_relationship(entity1_aliases = ['Li Ronghao'], entity2_aliases = ['Li Bai']) -> ] "
              "Li Ronghao, Representative Work: Li Bai");
}

TEST(Model, PythonRepr) {
    EXPECT_EQ(python_repr("Li Bai"), "'Li Bai'");
    EXPECT_EQ(python_repr("King's College"), "\"King's College\"");
}

TEST(Model, AliasListTrimsAndDedupes) {
    AliasList a{" Li Bai ", "li bai", "", "Taibai"};
    EXPECT_EQ(a.items(), (std::vector<std::string>{"Li Bai", "Taibai"}));
    EXPECT_EQ(a.preferred(), "Li Bai");
    EXPECT_THROW(AliasList::require({"  ", ""}), std::invalid_argument);
}

TEST(Model, QueryRejectsEmptyText) {
    EXPECT_THROW(Query::from_text(""), std::invalid_argument);
    EXPECT_EQ(Query::from_text("李白的字是什么？").language, Language::Chinese);
    EXPECT_EQ(Query::from_text("Who wrote it?").language, Language::English);
}
