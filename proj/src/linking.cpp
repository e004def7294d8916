#include "kbridge/linking.hpp"

#include <map>

#include "kbridge/errors.hpp"
#include "kbridge/text.hpp"

namespace kbridge {

std::string render_entity_info(const EntityInfo& info) {
    std::string out;
    if (info.description && !info.description->empty()) out = *info.description;
    if (!info.triples.empty()) {
        // Group tails by relation, keeping first-appearance order.
        std::vector<std::string> relations;
        std::map<std::string, std::vector<std::string>> tails;
        for (const auto& t : info.triples) {
            auto [it, inserted] = tails.try_emplace(t.relation);
            if (inserted) relations.push_back(t.relation);
            it->second.push_back(t.tail_text());
        }
        std::vector<std::string> parts;
        for (const auto& r : relations) parts.push_back(r + "->" + text::join(tails[r], ", "));
        if (!out.empty()) out += ' ';
        out += "Attributes: " + text::join(parts, "; ") + ".";
    }
    if (!info.aspects.empty()) {
        std::vector<std::string> parts;
        for (const auto& a : info.aspects) parts.push_back(a.aspect + "->" + a.text);
        if (!out.empty()) out += ' ';
        out += "Aspects: " + text::join(parts, "; ");
    }
    return out;
}

namespace {

bool exact_match(const EntityCandidate& c, const AliasList& aliases) {
    for (const auto& a : aliases) {
        if (a == c.display_name) return true;
        for (const auto& name : c.aliases) {
            if (a == name || a == linking_name(name)) return true;
        }
    }
    return false;
}

}  // namespace

LinkResult entity_linking(const Query& query, const AliasList& aliases, KbBackend& backend, LlmGateway& gateway,
                          const std::optional<AliasList>& relation_hint, const LinkingOptions& options) {
    LinkResult result;
    if (aliases.empty()) {
        result.note = "no aliases given";
        return result;
    }
    auto candidates = backend.find_candidates(query, aliases);
    result.candidate_count = candidates.size();
    if (candidates.empty()) {
        result.note = "no candidate entities";
        return result;
    }
    for (auto& c : candidates) {
        if (c.info_snippet.empty()) {
            auto info = backend.get_entity_info(c.entity, relation_hint);
            info.aspects = backend.get_entity_aspects(c.entity);
            c.info_snippet = render_entity_info(info);
        }
        c.info_snippet = text::truncate(c.info_snippet, options.snippet_chars);
    }
    if (!options.always_consult_llm && candidates.size() == 1 && exact_match(candidates.front(), aliases)) {
        result.entity = candidates.front().entity;
        result.display_name = candidates.front().display_name;
        return result;
    }
    result.used_llm = true;
    Disambiguation choice;
    try {
        choice = gateway.disambiguate_entity(query, aliases, candidates, relation_hint);
    } catch (const ProviderError& e) {
        result.note = std::string("disambiguation failed: ") + e.what();
        return result;
    } catch (const MalformedOutput& e) {
        result.note = std::string("disambiguation failed: ") + e.what();
        return result;
    }
    if (!choice.index) {
        result.note = "model rejected all candidates";
        return result;
    }
    const auto& picked = candidates.at(*choice.index);
    result.entity = picked.entity;
    result.display_name = picked.display_name;
    result.relation_aliases = choice.relation_aliases;
    return result;
}

}  // namespace kbridge
