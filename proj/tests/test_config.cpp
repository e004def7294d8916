#include <gtest/gtest.h>

#include <map>

#include "kbridge/config.hpp"
#include "kbridge/errors.hpp"
#include "test_support.hpp"

using namespace kbridge;
using kbridge::testing::TempDir;
using kbridge::testing::write_text;

namespace {

EnvLookup env_of(std::map<std::string, std::string> vars) {
    return [vars](const std::string& k) -> std::optional<std::string> {
        auto it = vars.find(k);
        if (it == vars.end()) return std::nullopt;
        return it->second;
    };
}

}  // namespace

TEST(Toml, ParsesSubset) {
    auto j = parse_toml(R"(# comment
top = "x"
[provider]
kind = 'scripted'
timeout_seconds = 30
fixtures = [
  "a",  # first
  "b",
]
[thresholds]
relation_floor = 0.25
[kb.FileKB]
kbqa_mode = true
)");
    EXPECT_EQ(j["top"], "x");
    EXPECT_EQ(j["provider"]["kind"], "scripted");
    EXPECT_EQ(j["provider"]["timeout_seconds"], 30);
    EXPECT_EQ(j["provider"]["fixtures"], nlohmann::json::array({"a", "b"}));
    EXPECT_DOUBLE_EQ(j["thresholds"]["relation_floor"].get<double>(), 0.25);
    EXPECT_EQ(j["kb"]["FileKB"]["kbqa_mode"], true);
}

TEST(Toml, ErrorsNameTheLine) {
    try {
        parse_toml("[a]\nx = 1\ny = {inline = 1}\n", "cfg");
        FAIL() << "expected ConfigError";
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("3"), std::string::npos);
    }
    EXPECT_THROW(parse_toml("x = 1\nx = 2\n"), ConfigError);
}

TEST(Toml, ReplaceTableRoundTrips) {
    std::string src = "[provider]\nkind = \"scripted\"\n\n[kb.A]\npath = \"old.tsv\"\n";
    auto out = replace_toml_table(src, "kb.A", {{"type", "file"}, {"path", "new.tsv"}});
    auto j = parse_toml(out);
    EXPECT_EQ(j["kb"]["A"]["path"], "new.tsv");
    EXPECT_EQ(j["provider"]["kind"], "scripted");
    auto added = parse_toml(replace_toml_table(src, "kb.B", {{"path", "b.tsv"}}));
    EXPECT_EQ(added["kb"]["A"]["path"], "old.tsv");
    EXPECT_EQ(added["kb"]["B"]["path"], "b.tsv");
}

TEST(Config, DefaultsWithoutFile) {
    auto c = load_config({}, env_of({}));
    EXPECT_EQ(c.provider, ProviderKind::Scripted);
    EXPECT_DOUBLE_EQ(c.relation_floor, 0.30);
    EXPECT_DOUBLE_EQ(c.relation_threshold, 0.85);
    EXPECT_DOUBLE_EQ(c.embedding_match, 0.80);
    EXPECT_EQ(c.message_cap, 8000u);
    EXPECT_FALSE(c.source);
}

TEST(Config, FlagBeatsEnvBeatsFile) {
    TempDir d;
    write_text(d / "c.toml", "[thresholds]\nrelation_floor = 0.1\nrelation_threshold = 0.7\nmessage_cap = 100\n");
    ConfigOverrides flags;
    flags.config_path = d / "c.toml";
    flags.relation_floor = 0.5;
    auto env = env_of({{"KBRIDGE_RELATION_FLOOR", "0.4"}, {"KBRIDGE_RELATION_THRESHOLD", "0.9"}});
    auto c = load_config(flags, env);
    EXPECT_DOUBLE_EQ(c.relation_floor, 0.5);
    EXPECT_DOUBLE_EQ(c.relation_threshold, 0.9);
    EXPECT_EQ(c.message_cap, 100u);
}

TEST(Config, ConfigPathResolution) {
    TempDir d;
    std::filesystem::create_directories(d.path() / "xdg" / "kbridge");
    write_text(d.path() / "xdg" / "kbridge" / "config.toml", "[pkb]\npath = \"store.jsonl\"\n");
    auto env = env_of({{"XDG_CONFIG_HOME", (d.path() / "xdg").string()}});
    auto c = load_config({}, env);
    ASSERT_TRUE(c.pkb_path);
    EXPECT_EQ(*c.pkb_path, d.path() / "xdg" / "kbridge" / "store.jsonl");

    write_text(d / "other.toml", "[pkb]\npath = \"/abs/p.jsonl\"\n");
    auto env2 = env_of({{"XDG_CONFIG_HOME", (d.path() / "xdg").string()}, {"KBRIDGE_CONFIG", (d / "other.toml").string()}});
    EXPECT_EQ(*load_config({}, env2).pkb_path, "/abs/p.jsonl");
}

TEST(Config, MissingExplicitFileIsAnError) {
    ConfigOverrides flags;
    flags.config_path = "/nonexistent/kbridge.toml";
    EXPECT_THROW(load_config(flags, env_of({})), ConfigError);
}

TEST(Config, KbEntriesAndRouting) {
    TempDir d;
    write_text(d / "c.toml", R"([routing]
en = ["Wiki", "PKB"]
zh = ["CN"]

[kb.CN]
type = "file"
path = "cn.tsv"
format = "nlpcc_tsv"
kbqa_mode = true
delimiters = ["|"]

[kb.Wiki]
type = "remote"
search_url = "http://x/search"
linking_url = "http://x/link"
entity_url = "http://x/entity"
max_candidates = 3
)");
    write_text(d / "cn.tsv", "a\tb\tc\n");
    ConfigOverrides flags;
    flags.config_path = d / "c.toml";
    auto c = load_config(flags, env_of({}));
    ASSERT_EQ(c.kbs.size(), 2u);
    const auto* cn = c.find_kb("CN");
    ASSERT_TRUE(cn);
    EXPECT_EQ(cn->path, d / "cn.tsv");
    EXPECT_EQ(cn->format, KbFormat::NlpccTsv);
    EXPECT_TRUE(cn->kbqa_mode);
    EXPECT_EQ(c.find_kb("Wiki")->type, KbType::Remote);
    EXPECT_EQ(c.find_kb("Wiki")->max_candidates, 3u);
    EXPECT_EQ(c.routing.at("en"), (std::vector<std::string>{"Wiki", "PKB"}));
}

TEST(Config, RejectsBadValues) {
    TempDir d;
    ConfigOverrides flags;
    flags.config_path = d / "c.toml";
    write_text(d / "c.toml", "[provider]\nkind = \"psychic\"\n");
    EXPECT_THROW(load_config(flags, env_of({})), ConfigError);
    write_text(d / "c.toml", "[thresholds]\nrelation_floor = 2.0\n");
    EXPECT_THROW(load_config(flags, env_of({})), ConfigError);
    write_text(d / "c.toml", "[kb.X]\ntype = \"file\"\n");
    EXPECT_THROW(load_config(flags, env_of({})), ConfigError);
}

TEST(Config, ApiKeyFromEnvironment) {
    auto c = load_config({}, env_of({{"KNOWLEDGPT_API_KEY", "sk-test"}, {"KBRIDGE_PROVIDER", "live"}}));
    EXPECT_EQ(c.api_key, "sk-test");
    EXPECT_EQ(c.provider, ProviderKind::Live);
}
