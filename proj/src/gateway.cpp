#include "kbridge/gateway.hpp"

#include <nlohmann/json.hpp>

#include "kbridge/errors.hpp"
#include "kbridge/text.hpp"

namespace kbridge {
namespace {

using nlohmann::json;

constexpr std::string_view kRepairReminder =
    "\n\nYour previous reply could not be parsed. Reply again with only the JSON object, exactly in the "
    "required output format.";

json parse_object(const std::string& reply) {
    try {
        auto j = json::parse(extract_json_object(reply));
        if (!j.is_object()) throw MalformedOutput("reply is not a JSON object");
        return j;
    } catch (const json::exception& e) {
        throw MalformedOutput(std::string("invalid JSON: ") + e.what());
    }
}

const json& field(const json& j, const char* name) {
    if (!j.contains(name)) throw MalformedOutput(std::string("missing field '") + name + "'");
    return j[name];
}

bool get_bool(const json& j, const char* name) {
    const auto& v = field(j, name);
    if (!v.is_boolean()) throw MalformedOutput(std::string("field '") + name + "' must be a boolean");
    return v.get<bool>();
}

std::string get_string(const json& j, const char* name) {
    const auto& v = field(j, name);
    if (!v.is_string()) throw MalformedOutput(std::string("field '") + name + "' must be a string");
    return v.get<std::string>();
}

AliasList get_aliases(const json& j, const char* name) {
    const auto& v = field(j, name);
    std::vector<std::string> items;
    if (v.is_string()) {
        items.push_back(v.get<std::string>());
    } else if (v.is_array()) {
        for (const auto& e : v) {
            if (!e.is_string()) throw MalformedOutput(std::string("field '") + name + "' must hold strings");
            items.push_back(e.get<std::string>());
        }
    } else {
        throw MalformedOutput(std::string("field '") + name + "' must be a list of strings");
    }
    AliasList list(items);
    if (list.empty()) throw MalformedOutput(std::string("field '") + name + "' is empty");
    return list;
}

}  // namespace

std::string extract_json_object(const std::string& reply) {
    auto start = reply.find('{');
    if (start == std::string::npos) throw MalformedOutput("no JSON object in reply");
    int depth = 0;
    bool in_string = false;
    bool escaped = false;
    for (std::size_t i = start; i < reply.size(); ++i) {
        char c = reply[i];
        if (in_string) {
            if (escaped) {
                escaped = false;
            } else if (c == '\\') {
                escaped = true;
            } else if (c == '"') {
                in_string = false;
            }
            continue;
        }
        if (c == '"') {
            in_string = true;
        } else if (c == '{') {
            ++depth;
        } else if (c == '}') {
            if (--depth == 0) return reply.substr(start, i - start + 1);
        }
    }
    throw MalformedOutput("unterminated JSON object in reply");
}

std::string strip_code_fence(const std::string& code) {
    std::string s = code;
    auto first = s.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && s.compare(first, 3, "```") == 0) {
        auto nl = s.find('\n', first);
        s = nl == std::string::npos ? std::string() : s.substr(nl + 1);
        auto fence = s.rfind("```");
        if (fence != std::string::npos) s = s.substr(0, fence);
    }
    return s;
}

std::string render_candidates(const std::vector<EntityCandidate>& candidates) {
    std::string out;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        const auto& c = candidates[i];
        if (i) out += '\n';
        out += "[" + std::to_string(i) + "] " + c.display_name;
        if (c.aliases.size() > 1) out += " (aliases: " + text::join(c.aliases, ", ") + ")";
        out += ": " + c.info_snippet;
    }
    return out;
}

LlmGateway::LlmGateway(LlmProvider& provider, PromptCatalog catalog)
    : provider_(provider), catalog_(std::move(catalog)) {}

template <typename Parse>
auto LlmGateway::dispatch(PromptName name, const Slots& slots, Parse&& parse) -> decltype(parse(std::string{})) {
    LlmRequest req{name, slots, catalog_.fill(name, slots), 0};
    try {
        return parse(provider_.complete(req));
    } catch (const MalformedOutput&) {
        req.attempt = 1;
        req.prompt += kRepairReminder;
        return parse(provider_.complete(req));
    }
}

SearchCodeResult LlmGateway::generate_search_code(const Query& query) {
    return dispatch(PromptName::SearchCode, {{"query", query.text}}, [](const std::string& reply) {
        auto j = parse_object(reply);
        SearchCodeResult r;
        r.needs_kb = get_bool(j, "needs_kb");
        if (r.needs_kb) {
            r.code = strip_code_fence(get_string(j, "code"));
            if (text::trim(r.code).empty()) throw MalformedOutput("needs_kb is true but code is empty");
        }
        return r;
    });
}

Disambiguation LlmGateway::disambiguate_entity(const Query& query, const AliasList& target_aliases,
                                               const std::vector<EntityCandidate>& candidates,
                                               const std::optional<AliasList>& relation_hint) {
    if (candidates.empty()) return {};
    Slots slots = {
        {"query", query.text},
        {"entity_aliases", python_list_repr(target_aliases.items())},
        {"relation_aliases", relation_hint ? python_list_repr(relation_hint->items()) : "[]"},
        {"candidates", render_candidates(candidates)},
    };
    const std::size_t n = candidates.size();
    const bool want_relations = relation_hint.has_value();
    return dispatch(PromptName::EntityLinking, slots, [n, want_relations](const std::string& reply) {
        auto j = parse_object(reply);
        const auto& choice = field(j, "choice");
        Disambiguation d;
        if (choice.is_string()) {
            if (text::trim(choice.get<std::string>()) != "[NONE]") throw MalformedOutput("choice must be an index or [NONE]");
        } else if (choice.is_number_integer()) {
            auto idx = choice.get<long long>();
            if (idx < 0 || static_cast<std::size_t>(idx) >= n) throw MalformedOutput("choice index out of range");
            d.index = static_cast<std::size_t>(idx);
        } else {
            throw MalformedOutput("choice must be an index or [NONE]");
        }
        if (want_relations && j.contains("relation_aliases") && !j["relation_aliases"].is_null()) {
            d.relation_aliases = get_aliases(j, "relation_aliases");
        }
        return d;
    });
}

AnswerOutput LlmGateway::answer_with_knowledge(const Query& query, const std::string& knowledge) {
    return dispatch(PromptName::Answer, {{"query", query.text}, {"knowledge", knowledge}},
                    [](const std::string& reply) {
                        auto j = parse_object(reply);
                        return AnswerOutput{get_bool(j, "used_knowledge"), get_string(j, "answer")};
                    });
}

std::vector<ExtractedRecord> LlmGateway::extract_knowledge(const std::string& document) {
    if (text::trim(document).empty()) throw std::invalid_argument("document is empty");
    return dispatch(PromptName::Extraction, {{"document", document}}, [](const std::string& reply) {
        auto j = parse_object(reply);
        const auto& items = field(j, "knowledge");
        if (!items.is_array()) throw MalformedOutput("field 'knowledge' must be a list");
        std::vector<ExtractedRecord> out;
        for (const auto& item : items) {
            if (!item.is_object()) throw MalformedOutput("knowledge items must be objects");
            auto kind = get_string(item, "kind");
            ExtractedRecord r;
            if (kind == "description") {
                r.kind = ExtractedRecord::Kind::Description;
                r.entity = get_aliases(item, "entity");
                r.value = get_string(item, "text");
            } else if (kind == "triple") {
                r.kind = ExtractedRecord::Kind::Triple;
                r.entity = get_aliases(item, "head");
                r.label = get_string(item, "relation");
                r.value = get_string(item, "tail");
            } else if (kind == "aspect") {
                r.kind = ExtractedRecord::Kind::Aspect;
                r.entity = get_aliases(item, "entity");
                r.label = get_string(item, "aspect");
                r.value = get_string(item, "text");
            } else {
                throw MalformedOutput("unknown knowledge kind '" + kind + "'");
            }
            if (text::trim(r.value).empty()) throw MalformedOutput("knowledge item has empty text");
            if (r.kind != ExtractedRecord::Kind::Description && text::trim(r.label).empty()) {
                throw MalformedOutput("knowledge item has empty relation/aspect");
            }
            out.push_back(std::move(r));
        }
        return out;
    });
}

}  // namespace kbridge
