#include <gtest/gtest.h>

#include <nlohmann/json.hpp>

#include "fn_provider.hpp"
#include "kbridge/embedding.hpp"
#include "kbridge/errors.hpp"
#include "kbridge/kb.hpp"
#include "kbridge/linking.hpp"
#include "kbridge/retrieval.hpp"
#include "test_support.hpp"

using namespace kbridge;
using kbridge::testing::FnProvider;
using kbridge::testing::TempDir;
using kbridge::testing::write_text;

namespace {

/// Small KB shared by the tests below.
struct Fixture {
    TempDir dir;
    FileKb kb;

    Fixture() : kb(make()) {}

    FileKb make() {
        write_text(dir / "kb.tsv",
                   "Dongwu Securities\tRegistered Capital\t1.5 billion Yuan\n"
                   "Dongwu Securities\tHeadquarters\tSuzhou\n"
                   "Quiet Night Thoughts\tauthor\tLi Bai\n"
                   "Quiet Night Thoughts (song)\tsinger\tSomeone\n"
                   "Li Ronghao\tRepresentative Work\tLi Bai\n"
                   "Li Bai\tDynasty\tTang\n"
                   "Sun Maosong\toccupation\tProfessor\n");
        write_text(dir / "desc.tsv",
                   "Sun Maosong\tProfessor, Doctoral Supervisor at Tsinghua University.\n"
                   "X Person\tX was born in 1923. X died in 2005.\n");
        FileKbOptions o;
        o.kb_tag = "FileKB";
        o.descriptions_path = dir / "desc.tsv";
        return load_file_kb(dir / "kb.tsv", KbFormat::TriplesTsv, o);
    }
};

std::string answer_json(const std::string& a) {
    return nlohmann::json{{"used_knowledge", true}, {"answer", a}}.dump();
}

}  // namespace

TEST(Linking, SingleExactCandidateSkipsModel) {
    Fixture f;
    FnProvider p([](const LlmRequest&) -> std::string { throw std::logic_error("unexpected model call"); });
    LlmGateway g(p, kbridge::testing::catalog());
    auto r = entity_linking(Query::from_text("capital?"), AliasList{"Dongwu Securities"}, f.kb, g);
    ASSERT_TRUE(r.entity);
    EXPECT_EQ(r.entity->local_id, "Dongwu Securities");
    EXPECT_FALSE(r.used_llm);
    EXPECT_TRUE(p.requests.empty());
}

TEST(Linking, ModelChoosesBetweenPoemAndSong) {
    Fixture f;
    FnProvider p([](const LlmRequest& r) {
        auto cands = r.slots.at("candidates");
        // Pick the candidate line that is the poem.
        auto poem = cands.find("] Quiet Night Thoughts:");
        return std::string(R"({"choice": )") + cands.substr(poem - 1, 1) + "}";
    });
    LlmGateway g(p, kbridge::testing::catalog());
    auto r = entity_linking(Query::from_text("Who wrote the poem Quiet Night Thoughts?"), AliasList{"Quiet Night Thoughts"},
                            f.kb, g);
    ASSERT_TRUE(r.entity);
    EXPECT_EQ(r.entity->local_id, "Quiet Night Thoughts");
    EXPECT_TRUE(r.used_llm);
    EXPECT_EQ(r.candidate_count, 2u);
}

TEST(Linking, NoCandidates) {
    Fixture f;
    FnProvider p([](const LlmRequest&) { return std::string(R"({"choice": 0})"); });
    LlmGateway g(p, kbridge::testing::catalog());
    auto r = entity_linking(Query::from_text("?"), AliasList{"Nobody At All"}, f.kb, g);
    EXPECT_FALSE(r.entity);
    EXPECT_TRUE(p.requests.empty());
}

TEST(Linking, RenderEntityInfo) {
    EntityInfo info;
    info.description = "Tang poet.";
    info.triples = {{{"K", "Li Bai"}, "also known as", "Qinglian Jushi"},
                    {{"K", "Li Bai"}, "also known as", "Zhixianren"},
                    {{"K", "Li Bai"}, "Dynasty", "Tang"}};
    EXPECT_EQ(render_entity_info(info), "Tang poet. Attributes: also known as->Qinglian Jushi, Zhixianren; Dynasty->Tang.");
}

class AccessorTest : public ::testing::Test {
  protected:
    Fixture f;
    HashEmbedder embedder;
    FnProvider provider{[](const LlmRequest&) -> std::string { throw ProviderError("no model in this test"); }};
    LlmGateway gateway{provider, kbridge::testing::catalog()};
    UnifiedAccessor acc{f.kb, embedder, gateway, Query::from_text("test")};
};

TEST_F(AccessorTest, FindEntityOrValue) {
    auto r = acc.find_entity_or_value(AliasList{"Dongwu Securities"}, AliasList{"Registered Capital", "Capital"});
    EXPECT_EQ(r.values, (std::vector<std::string>{"1.5 billion Yuan"}));
    EXPECT_EQ(r.message,
              "[FROM FileKB][find_entity_or_value(entity_aliases = ['Dongwu Securities'], relation_aliases = "
              "['Registered Capital', 'Capital']) -> ] Dongwu Securities, Registered Capital: 1.5 billion Yuan");
    EXPECT_EQ(acc.trace()->size(), 1u);
}

TEST_F(AccessorTest, UnknownEntity) {
    auto r = acc.find_entity_or_value(AliasList{"Nobody At All"}, AliasList{"age"});
    EXPECT_TRUE(r.values.empty());
    EXPECT_NE(r.message.find("[FROM FileKB][find_entity_or_value("), std::string::npos);
    auto info = acc.get_entity_info(AliasList{"Nobody At All"});
    EXPECT_FALSE(info.info);
}

TEST_F(AccessorTest, DescriptionSentenceFallback) {
    auto r = acc.find_entity_or_value(AliasList{"X Person"}, AliasList{"born"});
    EXPECT_EQ(r.values, (std::vector<std::string>{"X was born in 1923."}));
}

TEST_F(AccessorTest, GetEntityInfoStartsWithDescription) {
    auto r = acc.get_entity_info(AliasList{"Sun Maosong", "Prof. Sun Maosong"});
    ASSERT_TRUE(r.info);
    EXPECT_EQ(r.info->rfind("Professor, Doctoral Supervisor", 0), 0u);
}

TEST_F(AccessorTest, FindRelationshipBothDirections) {
    auto fwd = acc.find_relationship(AliasList{"Li Ronghao"}, AliasList{"Li Bai"});
    EXPECT_EQ(fwd.values, (std::vector<std::string>{"Representative Work"}));
    EXPECT_NE(fwd.message.find("Li Ronghao, Representative Work: Li Bai"), std::string::npos);
    auto rev = acc.find_relationship(AliasList{"Li Bai"}, AliasList{"Li Ronghao"});
    EXPECT_EQ(rev.values, (std::vector<std::string>{"Representative Work"}));
    auto none = acc.find_relationship(AliasList{"Dongwu Securities"}, AliasList{"Sun Maosong"});
    EXPECT_TRUE(none.values.empty());
}

TEST(RenderCallArgs, PythonKeywordStyle) {
    EXPECT_EQ(render_call_args(dsl::Builtin::FindEntityOrValue, {AliasList{"a"}, AliasList{"b", "c"}}),
              "entity_aliases = ['a'], relation_aliases = ['b', 'c']");
}

TEST(ConcatCapped, DropsWholeSegments) {
    KbExecution a{"A", {}};
    a.outcome.segments = {"aaaa", "bbbb"};
    KbExecution b{"B", {}};
    b.outcome.segments = {"cccc"};
    EXPECT_EQ(concat_capped({a, b}, 100), "aaaabbbbcccc");
    EXPECT_EQ(concat_capped({a, b}, 9), std::string("aaaabbbb") + std::string(kTruncatedMarker));
}

TEST(AnswerQuery, GreetingSkipsRetrieval) {
    Fixture f;
    HashEmbedder e;
    FnProvider p([](const LlmRequest& r) {
        if (r.name == PromptName::SearchCode) return std::string(R"({"needs_kb": false, "code": ""})");
        return std::string(R"({"used_knowledge": false, "answer": "Hi!"})");
    });
    LlmGateway g(p, kbridge::testing::catalog());
    auto r = answer_query(Query::from_text("Hello, how are you?"), {&f.kb}, g, e);
    EXPECT_EQ(r.answer, "Hi!");
    EXPECT_TRUE(r.executions.empty());
    EXPECT_EQ(r.knowledge, "");
}

TEST(AnswerQuery, TwoHopOverFileKb) {
    Fixture f;
    HashEmbedder e;
    std::string code =
        "def search():\n    messages = ''\n"
        "    w, msg = find_entity_or_value(entity_aliases = ['Li Ronghao'], relation_aliases = ['Representative Work'])\n"
        "    messages += msg\n"
        "    d, msg = find_entity_or_value(entity_aliases = w, relation_aliases = ['Dynasty'])\n"
        "    messages += msg\n    return messages\n";
    FnProvider p([&](const LlmRequest& r) {
        if (r.name == PromptName::SearchCode) return nlohmann::json{{"needs_kb", true}, {"code", code}}.dump();
        if (r.name == PromptName::EntityLinking) return std::string(R"({"choice": 0})");
        return answer_json(r.slots.at("knowledge").find("Dynasty: Tang") != std::string::npos ? "Tang" : "?");
    });
    LlmGateway g(p, kbridge::testing::catalog());
    auto r = answer_query(Query::from_text("Which dynasty is Li Ronghao's representative work named after?"), {&f.kb}, g, e);
    EXPECT_EQ(r.answer, "Tang");
    ASSERT_EQ(r.executions.size(), 1u);
    EXPECT_FALSE(r.executions[0].outcome.halted_early);
    EXPECT_EQ(r.executions[0].outcome.trace.size(), 2u);
}

TEST(AnswerQuery, UnparseableCodeUsesFallback) {
    Fixture f;
    HashEmbedder e;
    FnProvider p([](const LlmRequest& r) {
        if (r.name == PromptName::SearchCode) {
            return nlohmann::json{{"needs_kb", true},
                                  {"code",
                                   "def search():\n    x = find_entity_or_value(entity_aliases = ['Dongwu Securities'], "
                                   "relation_aliases = ['Registered Capital']) + 1\n"}}
                .dump();
        }
        return answer_json("1.5 billion Yuan.");
    });
    LlmGateway g(p, kbridge::testing::catalog());
    auto r = answer_query(Query::from_text("Registered capital of Dongwu Securities?"), {&f.kb}, g, e);
    EXPECT_TRUE(r.used_fallback);
    EXPECT_TRUE(r.parse_error);
    EXPECT_NE(r.knowledge.find("1.5 billion Yuan"), std::string::npos);
}
