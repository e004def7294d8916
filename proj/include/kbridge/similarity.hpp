#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "kbridge/model.hpp"

namespace kbridge {

class EmbeddingProvider;

/// A score tagged with the scale it lives on.
struct SimilarityScore {
    enum class Scale { Cosine, EntScore, Jaccard };

    double value = 0.0;
    Scale scale = Scale::Cosine;

    /// Cosine in [-1,1]; EntScore is 0 or at most 100; Jaccard in [0,1].
    bool in_range() const noexcept;
};

/// Unit-cost edit distance over code points.
std::size_t levenshtein(std::string_view a, std::string_view b);

/// 100 - levenshtein(a, b) when the case-folded token sets overlap, else 0.
SimilarityScore entity_similarity(std::string_view name1, std::string_view name2);

/// |A ∩ B| / |A ∪ B|, 0 when both are empty. Inputs are treated as sets.
SimilarityScore jaccard(const std::vector<std::string>& tokens_a, const std::vector<std::string>& tokens_b);

/// jaccard() over token_set() of both strings.
SimilarityScore jaccard_text(std::string_view a, std::string_view b);

double cosine(std::span<const double> a, std::span<const double> b);

/// Max cosine between the relation embedding and each alias embedding,
/// starting from -1.
SimilarityScore embsim(const std::string& relation, const AliasList& aliases, EmbeddingProvider& embedder);

struct RelationMatch {
    std::string relation;
    double score = 0.0;
};

/// Index of the first maximum; nullopt on empty input.
std::optional<std::size_t> argmax_first(std::span<const double> scores);

/// Relation with the highest embsim against the aliases, first occurrence
/// winning ties. nullopt iff there are no candidates.
std::optional<RelationMatch> best_relation(const std::vector<std::string>& candidate_relations,
                                           const AliasList& aliases, EmbeddingProvider& embedder);

/// Every distinct candidate relation scored by embsim, in input order.
std::vector<RelationMatch> score_relations(const std::vector<std::string>& candidate_relations,
                                           const AliasList& aliases, EmbeddingProvider& embedder);

}  // namespace kbridge
