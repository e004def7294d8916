#include "kbridge/retrieval.hpp"

#include <algorithm>
#include <future>
#include <map>
#include <set>

#include <spdlog/spdlog.h>

#include "kbridge/errors.hpp"
#include "kbridge/similarity.hpp"
#include "kbridge/text.hpp"

namespace kbridge {

std::string render_call_args(dsl::Builtin builtin, const std::vector<AliasList>& args) {
    const auto& params = dsl::builtin_params(builtin);
    std::string out;
    for (std::size_t i = 0; i < args.size() && i < params.size(); ++i) {
        if (i) out += ", ";
        out += params[i] + " = " + python_list_repr(args[i].items());
    }
    return out;
}

UnifiedAccessor::UnifiedAccessor(KbBackend& backend, EmbeddingProvider& embedder, LlmGateway& gateway, Query query,
                                 RetrievalConfig config)
    : backend_(backend),
      embedder_(embedder),
      gateway_(gateway),
      query_(std::move(query)),
      config_(std::move(config)),
      pkb_mode_(backend.capabilities().pkb_mode) {}

LinkResult UnifiedAccessor::link(const AliasList& aliases, const std::optional<AliasList>& relation_hint) {
    std::optional<AliasList> hint;
    if (backend_.capabilities().kbqa_mode) hint = relation_hint;
    return entity_linking(query_, aliases, backend_, gateway_, hint, config_.linking);
}

std::string UnifiedAccessor::record(std::string_view fn, const std::string& args, const std::string& result,
                                    const std::string& note) {
    auto message = render_message(backend_.kb_tag(), fn, args, result);
    std::string call = std::string(fn) + "(" + args + ")";
    trace_.append({backend_.kb_tag(), call, note.empty() ? result : result + " (" + note + ")"});
    return message;
}

std::optional<std::string> UnifiedAccessor::matching_sentence(const std::string& description,
                                                              const AliasList& aliases) const {
    for (const auto& sentence : text::split_sentences(description)) {
        auto words = text::token_set(sentence);
        std::set<std::string> have(words.begin(), words.end());
        for (const auto& alias : aliases) {
            auto need = text::token_set(alias);
            if (need.empty()) continue;
            if (std::all_of(need.begin(), need.end(), [&](const auto& t) { return have.contains(t); })) return sentence;
        }
    }
    return std::nullopt;
}

UnifiedAccessor::InfoResult UnifiedAccessor::get_entity_info(const AliasList& entity_aliases) {
    auto args = render_call_args(dsl::Builtin::GetEntityInfo, {entity_aliases});
    auto linked = link(entity_aliases, std::nullopt);
    if (!linked.entity) {
        auto result = "No entity found for " + python_list_repr(entity_aliases.items());
        return {std::nullopt, record("get_entity_info", args, result, linked.note)};
    }
    auto info = backend_.get_entity_info(*linked.entity, std::nullopt);
    info.aspects = backend_.get_entity_aspects(*linked.entity);
    auto rendered = render_entity_info(info);
    auto display = backend_.display_name(*linked.entity);
    auto result = rendered.empty() ? display + ": no information available" : display + ": " + rendered;
    return {rendered, record("get_entity_info", args, result)};
}

UnifiedAccessor::ValuesResult UnifiedAccessor::find_entity_or_value(const AliasList& entity_aliases,
                                                                    const AliasList& relation_aliases) {
    auto args = render_call_args(dsl::Builtin::FindEntityOrValue, {entity_aliases, relation_aliases});
    auto linked = link(entity_aliases, relation_aliases);
    if (!linked.entity) {
        auto result = "No entity found for " + python_list_repr(entity_aliases.items());
        return {{}, record("find_entity_or_value", args, result, linked.note)};
    }
    const auto& id = *linked.entity;
    const AliasList& wanted = linked.relation_aliases ? *linked.relation_aliases : relation_aliases;
    auto display = backend_.display_name(id);

    std::vector<Triple> triples;
    if (backend_.capabilities().kbqa_mode) {
        triples = backend_.get_entity_info(id, relation_aliases).triples;
    } else {
        triples = backend_.get_entity_triples(id);
    }
    auto aspects = backend_.get_entity_aspects(id);
    std::vector<std::string> relations;
    for (const auto& t : triples) relations.push_back(t.relation);
    for (const auto& a : aspects) relations.push_back(a.aspect);

    auto values_for = [&](const std::string& relation) {
        std::vector<std::string> values;
        for (const auto& t : triples) {
            if (t.relation == relation) values.push_back(t.tail_text());
        }
        for (const auto& a : aspects) {
            if (a.aspect == relation) values.push_back(a.text);
        }
        return values;
    };

    std::vector<std::string> selected;
    if (pkb_mode_) {
        auto scored = score_relations(relations, wanted, embedder_);
        std::stable_sort(scored.begin(), scored.end(),
                         [](const RelationMatch& a, const RelationMatch& b) { return a.score > b.score; });
        for (const auto& m : scored) {
            if (m.score >= config_.relation_threshold) selected.push_back(m.relation);
        }
    } else if (auto best = best_relation(relations, wanted, embedder_); best && best->score >= config_.relation_floor) {
        selected.push_back(best->relation);
    }

    if (!selected.empty()) {
        std::vector<std::string> values;
        std::vector<std::string> parts;
        for (const auto& r : selected) {
            auto v = values_for(r);
            parts.push_back(r + ": " + text::join(v, ", "));
            values.insert(values.end(), v.begin(), v.end());
        }
        return {values, record("find_entity_or_value", args, display + ", " + text::join(parts, "; "))};
    }

    auto description = backend_.get_entity_info(id, std::nullopt).description;
    if (description && !text::trim(*description).empty()) {
        auto sentence = matching_sentence(*description, wanted);
        const auto& value = sentence ? *sentence : *description;
        return {{value}, record("find_entity_or_value", args, display + ": " + value)};
    }
    auto result = display + ": no value found for " + python_list_repr(wanted.items());
    return {{}, record("find_entity_or_value", args, result)};
}

std::optional<UnifiedAccessor::Found> UnifiedAccessor::relationship_from(const AliasList& from, const AliasList& to) {
    auto linked = link(from, std::nullopt);
    if (!linked.entity) return std::nullopt;
    auto display = backend_.display_name(*linked.entity);
    auto triples = backend_.get_entity_triples(*linked.entity);
    struct Hit {
        double score;
        const Triple* triple;
    };
    std::vector<Hit> hits;
    for (const auto& t : triples) {
        double best = 0.0;
        for (const auto& alias : to) best = std::max(best, entity_similarity(t.tail_text(), alias).value);
        if (best > 0.0) hits.push_back({best, &t});
    }
    std::stable_sort(hits.begin(), hits.end(), [](const Hit& a, const Hit& b) { return a.score > b.score; });
    if (!hits.empty()) {
        Found f;
        std::vector<std::string> parts;
        for (const auto& h : hits) {
            if (std::find(f.values.begin(), f.values.end(), h.triple->relation) == f.values.end()) {
                f.values.push_back(h.triple->relation);
            }
            parts.push_back(h.triple->relation + ": " + h.triple->tail_text());
        }
        f.rendering = display + ", " + text::join(parts, "; ");
        return f;
    }
    auto description = backend_.get_entity_info(*linked.entity, std::nullopt).description;
    if (description) {
        if (auto sentence = matching_sentence(*description, to)) return Found{{*sentence}, display + ": " + *sentence};
    }
    return std::nullopt;
}

UnifiedAccessor::ValuesResult UnifiedAccessor::find_relationship(const AliasList& entity1_aliases,
                                                                 const AliasList& entity2_aliases) {
    auto args = render_call_args(dsl::Builtin::FindRelationship, {entity1_aliases, entity2_aliases});
    auto found = relationship_from(entity1_aliases, entity2_aliases);
    if (!found) found = relationship_from(entity2_aliases, entity1_aliases);
    if (!found) {
        auto result = "No relationship found between " + python_list_repr(entity1_aliases.items()) + " and " +
                      python_list_repr(entity2_aliases.items());
        return {{}, record("find_relationship", args, result)};
    }
    return {found->values, record("find_relationship", args, found->rendering)};
}

dsl::BuiltinResult UnifiedAccessor::invoke(dsl::Builtin builtin, const std::vector<AliasList>& args) {
    if (args.size() != dsl::builtin_params(builtin).size()) throw std::invalid_argument("wrong argument count");
    switch (builtin) {
        case dsl::Builtin::GetEntityInfo: {
            auto r = get_entity_info(args[0]);
            return {r.info ? dsl::Value::str(*r.info) : dsl::Value::none(), r.message};
        }
        case dsl::Builtin::FindEntityOrValue: {
            auto r = find_entity_or_value(args[0], args[1]);
            return {dsl::Value::strings(r.values), r.message};
        }
        case dsl::Builtin::FindRelationship:
            break;
    }
    auto r = find_relationship(args[0], args[1]);
    return {dsl::Value::strings(r.values), r.message};
}

std::string concat_capped(const std::vector<KbExecution>& executions, std::size_t cap) {
    std::string out;
    std::size_t used = 0;
    for (const auto& ex : executions) {
        for (const auto& seg : ex.outcome.segments) {
            auto len = text::length(seg);
            if (used + len > cap) return out + std::string(kTruncatedMarker);
            out += seg;
            used += len;
        }
    }
    return out;
}

dsl::SearchProgram compile_search_code(const std::string& code, std::optional<std::string>* parse_error) {
    try {
        return dsl::parse(code);
    } catch (const dsl::ParseError& e) {
        if (parse_error) *parse_error = e.what();
        return dsl::program_from_calls(dsl::extract_calls(code));
    }
}

namespace {

AnswerOutput answer_step(LlmGateway& gateway, const Query& query, const std::string& knowledge) {
    try {
        return gateway.answer_with_knowledge(query, knowledge);
    } catch (const MalformedOutput& e) {
        throw ProviderError(std::string("answer step: ") + e.what());
    }
}

}  // namespace

AnswerResult answer_with_code(const Query& query, const std::string& code, const std::vector<KbBackend*>& backends,
                              LlmGateway& gateway, EmbeddingProvider& embedder, const RetrievalConfig& config) {
    AnswerResult result;
    result.needs_kb = true;
    result.code = code;
    auto program = compile_search_code(code, &result.parse_error);
    result.used_fallback = result.parse_error.has_value();
    if (result.used_fallback) spdlog::debug("search code did not parse ({}); using call extraction", *result.parse_error);

    std::vector<std::future<dsl::ExecOutcome>> tasks;
    tasks.reserve(backends.size());
    for (auto* backend : backends) {
        tasks.push_back(std::async(std::launch::async, [&, backend] {
            UnifiedAccessor accessor(*backend, embedder, gateway, query, config);
            return dsl::execute(program, accessor, query);
        }));
    }
    for (std::size_t i = 0; i < tasks.size(); ++i) {
        result.executions.push_back({backends[i]->kb_tag(), tasks[i].get()});
    }
    result.knowledge = concat_capped(result.executions, config.message_cap);
    auto out = answer_step(gateway, query, result.knowledge);
    result.answer = out.answer;
    result.used_knowledge = out.used_knowledge;
    return result;
}

AnswerResult answer_query(const Query& query, const std::vector<KbBackend*>& backends, LlmGateway& gateway,
                          EmbeddingProvider& embedder, const RetrievalConfig& config) {
    SearchCodeResult generated;
    try {
        generated = gateway.generate_search_code(query);
    } catch (const MalformedOutput& e) {
        throw ProviderError(std::string("code generation: ") + e.what());
    }
    if (!generated.needs_kb || backends.empty()) {
        AnswerResult result;
        result.needs_kb = generated.needs_kb;
        result.code = generated.code;
        auto out = answer_step(gateway, query, "");
        result.answer = out.answer;
        return result;
    }
    return answer_with_code(query, generated.code, backends, gateway, embedder, config);
}

}  // namespace kbridge
