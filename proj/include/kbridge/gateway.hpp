#pragma once

#include <optional>
#include <string>
#include <vector>

#include "kbridge/llm.hpp"
#include "kbridge/model.hpp"
#include "kbridge/prompts.hpp"

namespace kbridge {

struct SearchCodeResult {
    bool needs_kb = false;
    std::string code;
};

struct Disambiguation {
    /// nullopt means the model chose [NONE] (or there was nothing to choose).
    std::optional<std::size_t> index;
    /// Relation aliases re-aligned to the KB's vocabulary (KBQA adaptation).
    std::optional<AliasList> relation_aliases;
};

struct AnswerOutput {
    bool used_knowledge = false;
    std::string answer;
};

/// One knowledge point as extracted, before it is registered in a store.
/// `label` is the relation (triples) or aspect (aspects); `value` is the tail,
/// the aspect text, or the description text.
struct ExtractedRecord {
    enum class Kind { Description, Triple, Aspect };

    Kind kind = Kind::Description;
    AliasList entity;
    std::string label;
    std::string value;

    bool operator==(const ExtractedRecord&) const = default;
};

/// Renders candidates as the numbered block the linking prompt shows.
std::string render_candidates(const std::vector<EntityCandidate>& candidates);

/// Drives the four prompt templates against a provider. Every reply must be
/// a JSON object of the documented shape; one repair retry precedes
/// MalformedOutput.
class LlmGateway {
  public:
    LlmGateway(LlmProvider& provider, PromptCatalog catalog);

    SearchCodeResult generate_search_code(const Query& query);

    Disambiguation disambiguate_entity(const Query& query, const AliasList& target_aliases,
                                       const std::vector<EntityCandidate>& candidates,
                                       const std::optional<AliasList>& relation_hint = std::nullopt);

    AnswerOutput answer_with_knowledge(const Query& query, const std::string& knowledge);

    std::vector<ExtractedRecord> extract_knowledge(const std::string& document);

    LlmProvider& provider() noexcept { return provider_; }

  private:
    template <typename Parse>
    auto dispatch(PromptName name, const Slots& slots, Parse&& parse) -> decltype(parse(std::string{}));

    LlmProvider& provider_;
    PromptCatalog catalog_;
};

/// Pulls the first balanced JSON object out of a reply, tolerating code
/// fences and surrounding prose. Throws MalformedOutput.
std::string extract_json_object(const std::string& reply);

/// Strips a leading ```lang fence and trailing ``` from generated code.
std::string strip_code_fence(const std::string& code);

}  // namespace kbridge
