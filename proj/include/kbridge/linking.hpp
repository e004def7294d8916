#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "kbridge/gateway.hpp"
#include "kbridge/kb.hpp"
#include "kbridge/model.hpp"

namespace kbridge {

struct LinkingOptions {
    /// Maximum characters of entity information shown per candidate.
    std::size_t snippet_chars = 500;
    /// Consult the model even when a single candidate matches exactly.
    bool always_consult_llm = false;
};

struct LinkResult {
    std::optional<EntityId> entity;
    std::string display_name;
    /// Relation aliases rewritten by the model (KBQA mode), if any.
    std::optional<AliasList> relation_aliases;
    /// Why linking produced nothing, for the trace.
    std::string note;
    std::size_t candidate_count = 0;
    bool used_llm = false;
};

/// "<description> Attributes: rel->v1, v2; rel2->v. Aspects: label->text"
std::string render_entity_info(const EntityInfo& info);

/// Candidates from the backend, information for each, then model
/// disambiguation. A single candidate whose name or alias equals one of the
/// aliases is taken without a model call unless always_consult_llm is set.
/// Provider failures and model rejections yield no entity.
LinkResult entity_linking(const Query& query, const AliasList& aliases, KbBackend& backend, LlmGateway& gateway,
                          const std::optional<AliasList>& relation_hint = std::nullopt,
                          const LinkingOptions& options = {});

}  // namespace kbridge
