#include <gtest/gtest.h>

#include "kbridge/embedding.hpp"
#include "kbridge/errors.hpp"
#include "kbridge/gateway.hpp"
#include "kbridge/llm.hpp"
#include "kbridge/pkb.hpp"
#include "kbridge/retrieval.hpp"
#include "test_support.hpp"

using namespace kbridge;
using kbridge::testing::kFixtures;
using kbridge::testing::read_text;
using kbridge::testing::TempDir;
using kbridge::testing::write_text;

namespace {

class PkbTest : public ::testing::Test {
  protected:
    HashEmbedder embedder;
    ScriptedProvider provider{{kFixtures / "pkb" / "llm"}};
    LlmGateway gateway{provider, kbridge::testing::catalog()};
    PkbStore store{embedder};

    std::string doc(const std::string& name) { return read_text(kFixtures / "pkb" / name); }
};

std::size_t count_aspects(const PkbData& d, const std::string& aspect) {
    std::size_t n = 0;
    for (const auto& r : d.records) {
        if (const auto* a = std::get_if<AspectRecord>(&r.record.form)) n += a->aspect == aspect ? 1 : 0;
    }
    return n;
}

}  // namespace

TEST_F(PkbTest, StoresSocratesAspect) {
    auto ids = store_document(doc("socrates.txt"), store, gateway);
    EXPECT_EQ(ids.size(), 3u);
    EXPECT_EQ(count_aspects(store.data(), "Military Service"), 1u);
    EXPECT_EQ(store.entity_count(), 1u);
}

TEST_F(PkbTest, EmptyExtractionStoresNothing) {
    ScriptedProvider p;
    p.add(PromptName::Extraction, {{"document", "Nothing to see."}}, R"({"knowledge": []})");
    LlmGateway g(p, kbridge::testing::catalog());
    EXPECT_TRUE(store_document("Nothing to see.", store, g).empty());
    EXPECT_THROW(store_document("   ", store, g), std::invalid_argument);
}

TEST_F(PkbTest, SameDocumentTwiceKeepsDuplicates) {
    store_document(doc("socrates.txt"), store, gateway);
    store_document(doc("socrates.txt"), store, gateway);
    EXPECT_EQ(store.entity_count(), 2u);
    EXPECT_EQ(store.record_count(), 6u);
    auto c = pkb_entity_linking(Query::from_text("Socrates?"), AliasList{"Socrates"}, store);
    ASSERT_EQ(c.size(), 2u);
    EXPECT_NE(c[0].entity, c[1].entity);
}

TEST_F(PkbTest, AliasExactMatch) {
    store_document(doc("shystie.txt"), store, gateway);
    auto c = pkb_entity_linking(Query::from_text("Where is Shystie from?"), AliasList{"Shystie"}, store);
    ASSERT_EQ(c.size(), 1u);
    EXPECT_EQ(c[0].aliases, (std::vector<std::string>{"Chanelle Scott Calica", "Shystie"}));
    PkbStore empty(embedder);
    EXPECT_TRUE(pkb_entity_linking(Query::from_text("x"), AliasList{"Shystie"}, empty).empty());
}

TEST_F(PkbTest, AspectOnlyEntityInfo) {
    store.add_extracted({ExtractedRecord{ExtractedRecord::Kind::Aspect, AliasList{"Delium"}, "Battle",
                                         "Fought in 424 BC between Athens and Boeotia."}});
    ScriptedProvider none;
    LlmGateway g(none, kbridge::testing::catalog());
    UnifiedAccessor acc(store, embedder, g, Query::from_text("Delium?"));
    auto r = acc.get_entity_info(AliasList{"Delium"});
    ASSERT_TRUE(r.info);
    EXPECT_NE(r.info->find("Fought in 424 BC"), std::string::npos);
}

TEST_F(PkbTest, RelationThresholdReturnsAspectText) {
    store_document(doc("socrates.txt"), store, gateway);
    ScriptedProvider none;
    LlmGateway g(none, kbridge::testing::catalog());
    UnifiedAccessor acc(store, embedder, g, Query::from_text("military service?"));
    auto r = acc.find_entity_or_value(AliasList{"Socrates"}, AliasList{"Military Service"});
    ASSERT_EQ(r.values.size(), 1u);
    EXPECT_NE(r.values[0].find("hoplite"), std::string::npos);
}

TEST_F(PkbTest, RoundTrip) {
    TempDir d;
    store_document(doc("socrates.txt"), store, gateway);
    store_document(doc("shystie.txt"), store, gateway);
    store.save(d / "pkb.jsonl");
    auto loaded = PkbStore::load(d / "pkb.jsonl", embedder);
    EXPECT_EQ(loaded.data(), store.data());
    EXPECT_FALSE(std::filesystem::exists(d / "pkb.jsonl.tmp"));
}

TEST_F(PkbTest, NewIdsContinueAfterLoad) {
    TempDir d;
    store_document(doc("socrates.txt"), store, gateway);
    store.save(d / "pkb.jsonl");
    auto loaded = PkbStore::load(d / "pkb.jsonl", embedder);
    auto more = loaded.add_extracted({ExtractedRecord{ExtractedRecord::Kind::Triple, AliasList{"Plato"}, "teacher", "Socrates"}});
    ASSERT_EQ(more.size(), 1u);
    for (const auto& r : store.data().records) EXPECT_NE(r.id, more[0]);
}

TEST_F(PkbTest, LoadEmptyAndCorrupt) {
    TempDir d;
    write_text(d / "empty.jsonl", "");
    EXPECT_EQ(PkbStore::load(d / "empty.jsonl", embedder).record_count(), 0u);

    write_text(d / "bad.jsonl",
               "{\"kind\":\"entity\",\"id\":\"e1\",\"aliases\":[\"A\"]}\n"
               "{\"kind\":\"triple\",\"id\":\"r1\",\"entity\":\"e1\",\"relation\":\"x\",\"tail\":\"y\"}\n"
               "{not json\n");
    try {
        PkbStore::load(d / "bad.jsonl", embedder);
        FAIL() << "expected CorruptStore";
    } catch (const CorruptStore& e) {
        EXPECT_EQ(e.line(), 3u);
    }
    EXPECT_THROW(PkbStore::load(d / "missing.jsonl", embedder), IoError);
}

TEST_F(PkbTest, PersistsOnStoreWhenPathSet) {
    TempDir d;
    store.set_path(d / "pkb.jsonl");
    store_document(doc("shystie.txt"), store, gateway);
    EXPECT_EQ(PkbStore::load(d / "pkb.jsonl", embedder).data(), store.data());
}
