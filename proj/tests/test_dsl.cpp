#include <gtest/gtest.h>

#include <functional>
#include <map>
#include <stdexcept>

#include "kbridge/dsl.hpp"
#include "kbridge/model.hpp"

using namespace kbridge;
using namespace kbridge::dsl;

namespace {

const char* kQuietNight = R"(def search():
    messages = ''
    author, msg = find_entity_or_value(entity_aliases = ['Quiet Night Thoughts'], relation_aliases = ['author', 'creator', 'writer'])
    messages += msg
    titles, msg = find_entity_or_value(entity_aliases = author, relation_aliases = ['title', 'also known as', 'appellation'])
    messages += msg
    return messages
)";

/// Answers find_entity_or_value from a table keyed by the first entity alias;
/// unknown entities raise, like a host whose KB lacks the relation.
class TableHost : public BuiltinHost {
  public:
    std::map<std::string, std::vector<std::string>> values;

    BuiltinResult invoke(Builtin b, const std::vector<AliasList>& args) override {
        const auto& key = args.at(0).preferred();
        auto it = values.find(key);
        if (it == values.end()) throw std::runtime_error("no value for " + key);
        std::string msg = std::string(builtin_name(b)) + ":" + key + "->";
        for (const auto& v : it->second) msg += v + ";";
        return {Value::strings(it->second), msg};
    }
};

Query q() { return Query::from_text("test query"); }

}  // namespace

TEST(Parse, EmptyBody) {
    auto p = parse("def search():\n    messages = ''\n    return messages");
    ASSERT_EQ(p.statements.size(), 2u);
    EXPECT_EQ(p.statements[0].kind, Stmt::Kind::Assign);
    EXPECT_EQ(p.statements[1].kind, Stmt::Kind::Return);
    EXPECT_TRUE(collect_calls(p).empty());
}

TEST(Parse, TwoHopProgram) {
    auto p = parse(kQuietNight);
    std::vector<Stmt::Kind> kinds;
    for (const auto& s : p.statements) kinds.push_back(s.kind);
    EXPECT_EQ(kinds, (std::vector<Stmt::Kind>{Stmt::Kind::Assign, Stmt::Kind::AssignCall, Stmt::Kind::ConcatMsg,
                                              Stmt::Kind::AssignCall, Stmt::Kind::ConcatMsg, Stmt::Kind::Return}));
    const auto& second = p.statements[3].call;
    EXPECT_EQ(second.builtin, Builtin::FindEntityOrValue);
    EXPECT_EQ(second.args[0].first, "entity_aliases");
    EXPECT_EQ(second.args[0].second, Expr::name("author"));
    EXPECT_EQ(p.statements[1].targets, (std::vector<std::string>{"author", "msg"}));
}

TEST(Parse, PrettyPrintRoundTrips) {
    const char* code = R"(def search():
    messages = ''
    people, msg = find_entity_or_value(entity_aliases = ["King's College"], relation_aliases = ['alumni'])
    messages += msg
    for p in people:
        info, msg = get_entity_info(entity_aliases = [p])
        messages += msg
    if people and not info:
        messages += 'none'
    elif people[0] == 'x' != 'y':
        pass
    else:
        messages += "done"
    return messages
)";
    auto p = parse(code);
    EXPECT_EQ(parse(pretty_print(p)), p);
}

TEST(Parse, RejectsUnsupportedConstructs) {
    EXPECT_THROW(parse("def search():\n    messages = ''\n    a, msg = find_entity_or_value(entity_aliases = ['A'], "
                       "relation_aliases = ['h'])\n    if a[0] > '1':\n        messages += 'x'\n    return messages\n"),
                 ParseError);
    EXPECT_THROW(parse("def search():\n    x = 1 + 2\n    return messages\n"), ParseError);
    EXPECT_THROW(parse("def search():\n    import os\n"), ParseError);
    EXPECT_THROW(parse("print('hi')\n"), ParseError);
}

TEST(Parse, ErrorCarriesPosition) {
    try {
        parse("def search():\n    messages = ''\n    messages += msg +\n");
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 3u);
    }
}

TEST(ExtractCalls, FromBrokenCode) {
    auto calls = extract_calls(
        "def search(:\n    x, msg = find_entity_or_value(entity_aliases = ['Dongwu Securities'], relation_aliases = "
        "['Registered Capital', 'Capital']))\n");
    ASSERT_EQ(calls.size(), 1u);
    EXPECT_EQ(to_source(calls[0]),
              "find_entity_or_value(entity_aliases = ['Dongwu Securities'], relation_aliases = ['Registered Capital', "
              "'Capital'])");
}

TEST(ExtractCalls, NoBuiltins) { EXPECT_TRUE(extract_calls("def search():\n    return ''\n").empty()); }

TEST(ExtractCalls, AgreesWithParser) {
    const char* code = R"(def search():
    messages = ''
    capital, msg = find_entity_or_value(entity_aliases = ['Dongwu Securities'], relation_aliases = ['Registered Capital', 'Capital'])
    messages += msg
    return messages
)";
    EXPECT_EQ(extract_calls(code), collect_calls(parse(code)));
}

TEST(ExtractCalls, DropsVariableArguments) {
    auto calls = extract_calls(kQuietNight);
    ASSERT_EQ(calls.size(), 1u);  // the second call only references a variable
    EXPECT_EQ(calls[0].args[0].second, Expr::list({Expr::string("Quiet Night Thoughts")}));
}

TEST(Execute, EmptyProgram) {
    TableHost host;
    auto out = execute(parse("def search():\n    messages = ''\n    return messages"), host, q());
    EXPECT_EQ(out.messages, "");
    EXPECT_FALSE(out.halted_early);
}

TEST(Execute, ChainsResults) {
    TableHost host;
    host.values["Quiet Night Thoughts"] = {"Li Bai"};
    host.values["Li Bai"] = {"Qinglian Jushi", "Zhixianren"};
    auto out = execute(parse(kQuietNight), host, q());
    EXPECT_FALSE(out.halted_early);
    EXPECT_EQ(out.messages,
              "find_entity_or_value:Quiet Night Thoughts->Li Bai;find_entity_or_value:Li Bai->Qinglian Jushi;Zhixianren;");
    ASSERT_EQ(out.executed_calls.size(), 2u);
    EXPECT_EQ(out.executed_calls[1].second[0], AliasList{"Li Bai"});
    EXPECT_EQ(out.segments.size(), 2u);
}

TEST(Execute, HaltsWhenSecondCallFails) {
    TableHost host;
    host.values["Quiet Night Thoughts"] = {"Li Bai"};
    auto out = execute(parse(kQuietNight), host, q());
    EXPECT_TRUE(out.halted_early);
    ASSERT_TRUE(out.halt_reason);
    EXPECT_EQ(out.messages, "find_entity_or_value:Quiet Night Thoughts->Li Bai;");
}

TEST(Execute, IndexOutOfRangeHalts) {
    TableHost host;
    host.values["A"] = {"b"};
    auto out = execute(parse("def search():\n    messages = ''\n    x, msg = find_entity_or_value(entity_aliases = ['A'], "
                             "relation_aliases = ['r'])\n    messages += msg\n    y, msg = get_entity_info(entity_aliases = "
                             "[x[3]])\n    messages += msg\n    return messages\n"),
                       host, q());
    EXPECT_TRUE(out.halted_early);
    EXPECT_EQ(out.messages, "find_entity_or_value:A->b;");
}

TEST(Execute, EmptyArgumentsHalt) {
    TableHost host;
    host.values["A"] = {};
    auto out = execute(parse("def search():\n    messages = ''\n    x, msg = find_entity_or_value(entity_aliases = ['A'], "
                             "relation_aliases = ['r'])\n    messages += msg\n    y, msg = get_entity_info(entity_aliases = "
                             "x)\n    messages += msg\n    return messages\n"),
                       host, q());
    EXPECT_TRUE(out.halted_early);
    EXPECT_EQ(out.executed_calls.size(), 1u);
}

TEST(Execute, LoopsAndBranches) {
    TableHost host;
    host.values["Nobel"] = {"a", "b"};
    host.values["a"] = {"1"};
    host.values["b"] = {"2"};
    auto out = execute(parse(R"(def search():
    messages = ''
    people, msg = find_entity_or_value(entity_aliases = ['Nobel'], relation_aliases = ['laureate'])
    for p in people:
        v, msg = find_entity_or_value(entity_aliases = [p], relation_aliases = ['year'])
        messages += msg
    if people[0] == 'a':
        messages += ' first is a'
    else:
        messages += ' first is not a'
    return messages
)"),
                       host, q());
    EXPECT_FALSE(out.halted_early);
    EXPECT_EQ(out.messages, "find_entity_or_value:a->1;find_entity_or_value:b->2; first is a");
}

TEST(Execute, LoopCap) {
    TableHost host;
    std::vector<std::string> many;
    for (int i = 0; i < 40; ++i) many.push_back("e" + std::to_string(i));
    host.values["X"] = many;
    for (const auto& e : many) host.values[e] = {"v"};
    auto out = execute(parse(R"(def search():
    messages = ''
    xs, msg = find_entity_or_value(entity_aliases = ['X'], relation_aliases = ['r'])
    for x in xs:
        v, msg = find_entity_or_value(entity_aliases = [x], relation_aliases = ['r'])
        messages += msg
    return messages
)"),
                       host, q());
    EXPECT_EQ(out.executed_calls.size(), 1 + kLoopCap);
}

TEST(Builtins, Names) {
    EXPECT_EQ(builtin_from_name("find_relationship"), Builtin::FindRelationship);
    EXPECT_FALSE(builtin_from_name("eval").has_value());
    EXPECT_EQ(builtin_params(Builtin::FindRelationship),
              (std::vector<std::string>{"entity1_aliases", "entity2_aliases"}));
}
